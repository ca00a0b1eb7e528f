//! Shared inputs for the benchmarks: the standard fixture scenes, generated
//! in memory so benches do not depend on the working directory.

use camo_core::fixtures::standard_fixtures;
use camo_core::{generate_fixture, RasterImage};

pub const ENVIRONMENTS: [&str; 4] = ["woodland_64", "sand_64", "desert_64", "snow_64"];

pub fn fixture(name: &str) -> RasterImage {
    let spec = standard_fixtures()
        .into_iter()
        .find(|s| s.name == name)
        .unwrap_or_else(|| panic!("no fixture named {name}"));
    generate_fixture(&spec).expect("standard fixtures are valid")
}

pub fn environments() -> Vec<RasterImage> {
    ENVIRONMENTS.iter().map(|n| fixture(n)).collect()
}

/// Nearest-neighbour upscale, for timing the same scene at larger sizes.
pub fn upscale(image: &RasterImage, factor: usize) -> RasterImage {
    RasterImage::from_fn(image.width() * factor, image.height() * factor, |x, y| {
        image.get(x / factor, y / factor)
    })
    .expect("non-empty")
}
