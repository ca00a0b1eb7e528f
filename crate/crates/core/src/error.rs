use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed image: {0}")]
    MalformedImage(String),
    #[error("unsupported image format: only PNG input is accepted")]
    UnsupportedFormat,
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("image has no pixels")]
    EmptyImage,
    #[error("invalid quantization scheme: {0}")]
    InvalidScheme(String),
    #[error("histogram bin layouts differ")]
    BinMismatch,
    #[error("bad merge weights: {0}")]
    BadWeights(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("image admits no pixel pair for offset ({dy}, {dx}) at distance {distance}")]
    DegenerateImage { dy: i32, dx: i32, distance: u32 },
    #[error("{pixels} pixels is fewer than k = {k}")]
    TooFewPixels { pixels: usize, k: usize },
    #[error("histogram has no non-zero bins")]
    EmptyHistogram,
    #[error("palette of {requested} colors requested but only {available} non-zero bins exist")]
    PaletteTooLarge { requested: usize, available: usize },
    #[error("palette is empty")]
    EmptyPalette,
    #[error("no patches to render")]
    NoPatches,
    #[error("bad fixture spec: {0}")]
    BadSpec(String),
}

impl Error {
    /// True for failures caused by unreadable input data rather than by
    /// parameters supplied by the caller.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::MalformedImage(_) | Error::UnsupportedFormat)
    }
}
