use std::path::{Path, PathBuf};

use camo_core::segment::ColorSpace;
use camo_core::texture::GlcmConfig;
use camo_core::{KmeansConfig, QuantizationScheme};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SEED_ENV: &str = "CAMO_EVAL_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "camo",
    version,
    about = "Evaluate and design camouflage patterns against background imagery"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Color-histogram similarity between a camouflage image and a background
    EvaluateColor(EvaluateArgs),
    /// GLCM texture vectors of a camouflage image and a background
    EvaluateTexture(EvaluateArgs),
    /// K-means segmentation of a background into labels, edges and patches
    Segment(SegmentArgs),
    /// Synthesize a pattern from one or more backgrounds and evaluate it
    Design(DesignArgs),
    /// Regenerate the synthetic fixture corpus
    Fixtures(FixturesArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorSpaceArg {
    Rgb,
    Hsv,
}

impl From<ColorSpaceArg> for ColorSpace {
    fn from(c: ColorSpaceArg) -> Self {
        match c {
            ColorSpaceArg::Rgb => ColorSpace::Rgb,
            ColorSpaceArg::Hsv => ColorSpace::Hsv,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Directory for output files
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Stdout report format
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with default settings; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SchemeArgs {
    #[arg(long)]
    pub h_bins: Option<usize>,
    #[arg(long)]
    pub s_bins: Option<usize>,
    #[arg(long)]
    pub v_bins: Option<usize>,
    /// Include value in the histogram bins
    #[arg(long)]
    pub include_v: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlcmArgs {
    #[arg(long)]
    pub gray_levels: Option<usize>,
    #[arg(long)]
    pub glcm_distance: Option<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct KmeansArgs {
    #[arg(long)]
    pub k: Option<usize>,
    /// Seed for clustering and rendering (default: $CAMO_EVAL_SEED, else 0)
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub color_space: Option<ColorSpaceArg>,
    /// Smallest patch area kept, in pixels
    #[arg(long)]
    pub min_area: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub camo: PathBuf,
    pub background: PathBuf,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub glcm: GlcmArgs,
    /// Write both serialized histograms to the output directory
    #[arg(long)]
    pub emit_histograms: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    pub background: PathBuf,
    #[command(flatten)]
    pub kmeans: KmeansArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(required = true)]
    pub backgrounds: Vec<PathBuf>,
    #[arg(long)]
    pub palette_size: Option<usize>,
    /// Background (file stem or path) whose patches shape the pattern
    #[arg(long)]
    pub donor: Option<String>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[command(flatten)]
    pub kmeans: KmeansArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub glcm: GlcmArgs,
    #[arg(long)]
    pub emit_histograms: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    #[arg(long, default_value = "fixtures")]
    pub out_dir: PathBuf,
}

/// Optional settings file. Every field mirrors a flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConfigFile {
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub color_space: Option<ColorSpace>,
    pub min_area: Option<usize>,
    pub gray_levels: Option<usize>,
    pub glcm_distance: Option<u32>,
    pub h_bins: Option<usize>,
    pub s_bins: Option<usize>,
    pub v_bins: Option<usize>,
    pub include_v: Option<bool>,
    pub palette_size: Option<usize>,
    pub donor: Option<String>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))
    }
}

pub fn resolve_format(common: &CommonArgs, file: &ConfigFile) -> Format {
    common.format.or(file.format).unwrap_or_default()
}

pub fn resolve_scheme(args: &SchemeArgs, file: &ConfigFile) -> Result<QuantizationScheme, CliError> {
    let d = QuantizationScheme::default();
    let scheme = QuantizationScheme {
        h_bins: args.h_bins.or(file.h_bins).unwrap_or(d.h_bins),
        s_bins: args.s_bins.or(file.s_bins).unwrap_or(d.s_bins),
        v_bins: args.v_bins.or(file.v_bins).unwrap_or(d.v_bins),
        include_v: args.include_v || file.include_v.unwrap_or(d.include_v),
    };
    scheme.validate()?;
    Ok(scheme)
}

pub fn resolve_glcm(args: &GlcmArgs, file: &ConfigFile) -> Result<GlcmConfig, CliError> {
    let d = GlcmConfig::default();
    let config = GlcmConfig {
        gray_levels: args.gray_levels.or(file.gray_levels).unwrap_or(d.gray_levels),
        distance: args.glcm_distance.or(file.glcm_distance).unwrap_or(d.distance),
        ..d
    };
    config.validate()?;
    Ok(config)
}

pub fn resolve_seed(flag: Option<u64>, file: &ConfigFile) -> Result<u64, CliError> {
    if let Some(s) = flag.or(file.seed) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

pub fn resolve_kmeans(args: &KmeansArgs, file: &ConfigFile) -> Result<KmeansConfig, CliError> {
    let d = KmeansConfig::default();
    let config = KmeansConfig {
        k: args.k.or(file.k).unwrap_or(d.k),
        seed: resolve_seed(args.seed, file)?,
        color_space: args
            .color_space
            .map(Into::into)
            .or(file.color_space)
            .unwrap_or(d.color_space),
        ..d
    };
    config.validate()?;
    Ok(config)
}

pub fn resolve_min_area(args: &KmeansArgs, file: &ConfigFile, default: usize) -> Result<usize, CliError> {
    let v = args.min_area.or(file.min_area).unwrap_or(default);
    if v == 0 {
        return Err(CliError::Config("--min-area must be >= 1".into()));
    }
    Ok(v)
}
