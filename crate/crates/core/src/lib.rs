//! Camouflage evaluation and synthesis.
//!
//! Color similarity is measured with the Bhattacharyya coefficient between
//! quantized HSV histograms, texture with GLCM descriptors summarized over
//! four directions. New patterns take their palette from the merged
//! histograms of several environments and their shapes from the K-means
//! patches of a donor image.

pub mod color_hist;
pub mod error;
pub mod fixtures;
pub mod image;
pub mod segment;
pub mod synth;
pub mod texture;

pub use color_hist::{
    bhattacharyya, build_histogram, merge_histograms, quantize, ColorHistogram, HsvBin, QuantizationScheme,
    SimilarityScore,
};
pub use error::{Error, Result};
pub use fixtures::{generate_fixture, FixtureSpec, Generator, Persona};
pub use image::{rgb_to_hsv, HsvPixel, RasterImage, Rgb};
pub use segment::{
    extract_edges, extract_patches, kmeans_segment, ColorSpace, EdgeMask, KmeansConfig, Patch, SegmentationMap,
};
pub use synth::{dominant_palette, evaluate_design, render_pattern, CamoPattern, EnvironmentReport, Palette};
pub use texture::{
    compute_glcm, glcm_features, texture_compare, texture_vector, to_gray, Glcm, GlcmConfig, Offset, TextureComparison,
    TextureFeatures, TextureVector,
};
