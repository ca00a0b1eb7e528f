//! Gray-level co-occurrence matrices and the four texture descriptors
//! (energy, entropy, correlation, inertia) aggregated over directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::RasterImage;

/// Pixel offset as `(dy, dx)`; rows grow downwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offset {
    pub dy: i32,
    pub dx: i32,
}

impl Offset {
    pub const DEG_0: Offset = Offset { dy: 0, dx: 1 };
    pub const DEG_45: Offset = Offset { dy: -1, dx: 1 };
    pub const DEG_90: Offset = Offset { dy: -1, dx: 0 };
    pub const DEG_135: Offset = Offset { dy: -1, dx: -1 };

    pub const STANDARD: [Offset; 4] = [Self::DEG_0, Self::DEG_45, Self::DEG_90, Self::DEG_135];
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyBase {
    #[default]
    Natural,
    Two,
    Ten,
}

impl EntropyBase {
    fn ln_base(self) -> f64 {
        match self {
            EntropyBase::Natural => 1.0,
            EntropyBase::Two => std::f64::consts::LN_2,
            EntropyBase::Ten => std::f64::consts::LN_10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GlcmConfig {
    pub gray_levels: usize,
    pub distance: u32,
    pub directions: Vec<Offset>,
    pub symmetric: bool,
    #[serde(default)]
    pub entropy_base: EntropyBase,
}

impl Default for GlcmConfig {
    fn default() -> Self {
        Self {
            gray_levels: 16,
            distance: 1,
            directions: Offset::STANDARD.to_vec(),
            symmetric: true,
            entropy_base: EntropyBase::Natural,
        }
    }
}

impl GlcmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gray_levels < 2 || self.gray_levels > 256 {
            return Err(Error::InvalidConfig(format!(
                "gray levels must be in 2..=256, got {}",
                self.gray_levels
            )));
        }
        if self.distance == 0 {
            return Err(Error::InvalidConfig("GLCM distance must be >= 1".into()));
        }
        if self.directions.is_empty() {
            return Err(Error::InvalidConfig("at least one GLCM direction is required".into()));
        }
        if self.directions.iter().any(|o| o.dx == 0 && o.dy == 0) {
            return Err(Error::InvalidConfig("zero GLCM offset".into()));
        }
        Ok(())
    }
}

/// Quantized luma grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub levels: usize,
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

/// Rec. 601 luma rounded to an integer, then split into `levels` equal bands.
pub fn to_gray(image: &RasterImage, levels: usize) -> GrayImage {
    assert!((2..=256).contains(&levels), "gray levels must be in 2..=256");
    let data = image
        .pixels()
        .iter()
        .map(|&[r, g, b]| {
            // Integer form of round(0.299 r + 0.587 g + 0.114 b), halves rounding up.
            let luma = (299 * r as usize + 587 * g as usize + 114 * b as usize + 500) / 1000;
            (luma * levels / 256).min(levels - 1) as u8
        })
        .collect();
    GrayImage {
        width: image.width(),
        height: image.height(),
        levels,
        data,
    }
}

/// Normalized co-occurrence matrix, row-major `levels × levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    levels: usize,
    entries: Vec<f64>,
}

impl Glcm {
    pub fn from_entries(levels: usize, entries: Vec<f64>) -> Result<Self> {
        if levels == 0 || entries.len() != levels * levels {
            return Err(Error::InvalidConfig(format!(
                "{} entries do not form a {levels}x{levels} matrix",
                entries.len()
            )));
        }
        Ok(Self { levels, entries })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.levels + j]
    }
}

pub fn compute_glcm(gray: &GrayImage, config: &GlcmConfig, direction: Offset) -> Result<Glcm> {
    let n = gray.levels;
    let dy = direction.dy as i64 * config.distance as i64;
    let dx = direction.dx as i64 * config.distance as i64;
    let (w, h) = (gray.width as i64, gray.height as i64);
    let mut counts = vec![0u64; n * n];
    let mut pairs = 0u64;

    let ys = dy.min(0).abs()..(h - dy.max(0)).max(0);
    let xs = dx.min(0).abs()..(w - dx.max(0)).max(0);
    for y in ys {
        for x in xs.clone() {
            let a = gray.data[(y * w + x) as usize] as usize;
            let b = gray.data[((y + dy) * w + x + dx) as usize] as usize;
            counts[a * n + b] += 1;
            if config.symmetric {
                counts[b * n + a] += 1;
            }
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::DegenerateImage {
            dy: direction.dy,
            dx: direction.dx,
            distance: config.distance,
        });
    }
    let total: u64 = counts.iter().sum();
    let entries = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(Glcm { levels: n, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureFeatures {
    pub energy: f64,
    pub entropy: f64,
    pub correlation: f64,
    pub inertia: f64,
}

impl TextureFeatures {
    pub fn as_array(&self) -> [f64; 4] {
        [self.energy, self.entropy, self.correlation, self.inertia]
    }
}

pub fn glcm_features(glcm: &Glcm) -> TextureFeatures {
    glcm_features_with_base(glcm, EntropyBase::Natural)
}

#[allow(clippy::needless_range_loop)]
pub fn glcm_features_with_base(glcm: &Glcm, base: EntropyBase) -> TextureFeatures {
    let n = glcm.levels;
    let mut row = vec![0.0; n];
    let mut col = vec![0.0; n];
    let mut energy = 0.0;
    let mut entropy = 0.0;
    let mut inertia = 0.0;
    let mut cross = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = glcm.get(i, j);
            row[i] += p;
            col[j] += p;
            energy += p * p;
            if p > 0.0 {
                entropy -= p * p.ln();
            }
            let d = i as f64 - j as f64;
            inertia += d * d * p;
            cross += (i * j) as f64 * p;
        }
    }
    let moments = |m: &[f64]| {
        let mean: f64 = m.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
        let var: f64 = m.iter().enumerate().map(|(i, p)| (i as f64 - mean).powi(2) * p).sum();
        (mean, var.sqrt())
    };
    let (mx, sx) = moments(&row);
    let (my, sy) = moments(&col);
    let correlation = if sx * sy > 1e-12 {
        ((cross - mx * my) / (sx * sy)).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    TextureFeatures {
        energy,
        entropy: entropy / base.ln_base(),
        correlation,
        inertia,
    }
}

/// Per-feature mean (`a`) and population standard deviation (`b`) over the
/// configured directions, laid out `a1,b1,a2,b2,a3,b3,a4,b4` for
/// energy, entropy, correlation, inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureVector(pub [f64; 8]);

pub const FEATURE_NAMES: [&str; 4] = ["energy", "entropy", "correlation", "inertia"];

impl TextureVector {
    pub fn mean(&self, feature: usize) -> f64 {
        self.0[2 * feature]
    }

    pub fn std(&self, feature: usize) -> f64 {
        self.0[2 * feature + 1]
    }

    pub fn from_features(per_direction: &[TextureFeatures]) -> Self {
        assert!(!per_direction.is_empty());
        let n = per_direction.len() as f64;
        let mut out = [0.0; 8];
        for k in 0..4 {
            let mean = per_direction.iter().map(|f| f.as_array()[k]).sum::<f64>() / n;
            let var = per_direction
                .iter()
                .map(|f| (f.as_array()[k] - mean).powi(2))
                .sum::<f64>()
                / n;
            out[2 * k] = mean;
            out[2 * k + 1] = var.sqrt();
        }
        TextureVector(out)
    }

    pub const CSV_HEADER: &'static str = "a1,b1,a2,b2,a3,b3,a4,b4";

    /// Comma-separated row with 10 significant digits.
    pub fn to_csv_row(&self) -> String {
        self.0.iter().map(|v| format!("{v:.9e}")).collect::<Vec<_>>().join(",")
    }
}

pub fn texture_vector(image: &RasterImage, config: &GlcmConfig) -> Result<TextureVector> {
    config.validate()?;
    let gray = to_gray(image, config.gray_levels);
    let features = config
        .directions
        .iter()
        .map(|&d| compute_glcm(&gray, config, d).map(|g| glcm_features_with_base(&g, config.entropy_base)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TextureVector::from_features(&features))
}

/// JSON form of a texture vector together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TextureRecord {
    pub config: GlcmConfig,
    pub vector: TextureVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FeatureComparison {
    pub feature: &'static str,
    pub first: f64,
    pub second: f64,
    /// `first / second`; `None` when the denominator is zero.
    pub ratio: Option<f64>,
    pub same_order_of_magnitude: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextureComparison {
    pub features: Vec<FeatureComparison>,
}

impl TextureComparison {
    pub fn get(&self, feature: &str) -> Option<&FeatureComparison> {
        self.features.iter().find(|f| f.feature == feature)
    }
}

/// Ratio of direction means per feature and whether it lies within one decade.
pub fn texture_compare(v1: &TextureVector, v2: &TextureVector) -> TextureComparison {
    let features = (0..4)
        .map(|k| {
            let (a, b) = (v1.mean(k), v2.mean(k));
            let ratio = (b != 0.0).then(|| a / b).filter(|r| r.is_finite());
            let same = ratio.is_some_and(|r| r > 0.0 && r.log10().abs() <= 1.0);
            FeatureComparison {
                feature: FEATURE_NAMES[k],
                first: a,
                second: b,
                ratio,
                same_order_of_magnitude: same,
            }
        })
        .collect();
    TextureComparison { features }
}
