//! Deterministic synthetic imagery used as stand-in environments and as
//! test inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{RasterImage, Rgb};

const MAX_SIDE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Persona {
    Woodland,
    Sand,
    Desert,
    Snow,
}

impl Persona {
    pub const ALL: [Persona; 4] = [Persona::Woodland, Persona::Sand, Persona::Desert, Persona::Snow];

    /// Base colors with relative frequencies.
    pub fn palette(self) -> &'static [(Rgb, u32)] {
        match self {
            Persona::Woodland => &[
                ([46, 92, 38], 5),
                ([82, 110, 48], 4),
                ([101, 72, 40], 3),
                ([32, 48, 28], 2),
                ([128, 104, 64], 1),
            ],
            Persona::Sand => &[
                ([206, 186, 138], 5),
                ([188, 166, 116], 4),
                ([224, 206, 164], 3),
                ([150, 118, 76], 2),
                ([120, 96, 58], 1),
            ],
            Persona::Desert => &[
                ([198, 124, 66], 5),
                ([168, 102, 54], 4),
                ([214, 156, 98], 3),
                ([128, 82, 44], 2),
                ([186, 142, 96], 1),
            ],
            Persona::Snow => &[
                ([242, 244, 248], 5),
                ([222, 226, 234], 4),
                ([196, 202, 214], 3),
                ([168, 174, 186], 2),
                ([138, 132, 120], 1),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    Constant {
        width: usize,
        height: usize,
        color: Rgb,
    },
    /// Left half `left`, right half `right`; split at `width / 2`.
    TwoHalves {
        width: usize,
        height: usize,
        left: Rgb,
        right: Rgb,
    },
    /// Bands `thickness` pixels wide cycling through `colors`.
    Stripes {
        width: usize,
        height: usize,
        thickness: usize,
        orientation: Orientation,
        colors: Vec<Rgb>,
    },
    Checkerboard {
        width: usize,
        height: usize,
        block: usize,
        colors: [Rgb; 2],
    },
    /// Warped Voronoi blobs in persona colors with per-channel jitter.
    SeededBlobs {
        width: usize,
        height: usize,
        persona: Persona,
        blobs: usize,
        jitter: u8,
    },
    /// Independent uniform RGB per pixel.
    Noise {
        width: usize,
        height: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub name: String,
    pub generator: Generator,
    #[serde(default)]
    pub seed: u64,
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || width > MAX_SIDE || height > MAX_SIDE {
        return Err(Error::BadSpec(format!(
            "dimensions {width}x{height} outside 1..={MAX_SIDE}"
        )));
    }
    Ok(())
}

pub fn generate_fixture(spec: &FixtureSpec) -> Result<RasterImage> {
    if spec.name.is_empty() {
        return Err(Error::BadSpec("fixture name is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match &spec.generator {
        &Generator::Constant { width, height, color } => {
            check_dims(width, height)?;
            RasterImage::filled(width, height, color)
        }
        &Generator::TwoHalves {
            width,
            height,
            left,
            right,
        } => {
            check_dims(width, height)?;
            RasterImage::from_fn(width, height, |x, _| if x < width / 2 { left } else { right })
        }
        Generator::Stripes {
            width,
            height,
            thickness,
            orientation,
            colors,
        } => {
            check_dims(*width, *height)?;
            if *thickness == 0 || colors.is_empty() {
                return Err(Error::BadSpec("stripes need thickness >= 1 and a color".into()));
            }
            RasterImage::from_fn(*width, *height, |x, y| {
                let t = match orientation {
                    Orientation::Horizontal => y,
                    Orientation::Vertical => x,
                };
                colors[(t / thickness) % colors.len()]
            })
        }
        &Generator::Checkerboard {
            width,
            height,
            block,
            colors,
        } => {
            check_dims(width, height)?;
            if block == 0 {
                return Err(Error::BadSpec("checkerboard block must be >= 1".into()));
            }
            RasterImage::from_fn(width, height, |x, y| colors[(x / block + y / block) % 2])
        }
        &Generator::SeededBlobs {
            width,
            height,
            persona,
            blobs,
            jitter,
        } => {
            check_dims(width, height)?;
            if blobs == 0 {
                return Err(Error::BadSpec("seeded blobs need at least one blob".into()));
            }
            Ok(seeded_blobs(width, height, persona, blobs, jitter, &mut rng))
        }
        &Generator::Noise { width, height } => {
            check_dims(width, height)?;
            RasterImage::from_fn(width, height, |_, _| [rng.random(), rng.random(), rng.random()])
        }
    }
}

struct Blob {
    x: f64,
    y: f64,
    stretch: f64,
    color: Rgb,
}

fn seeded_blobs(
    width: usize,
    height: usize,
    persona: Persona,
    count: usize,
    jitter: u8,
    rng: &mut ChaCha8Rng,
) -> RasterImage {
    let palette = persona.palette();
    let total: u32 = palette.iter().map(|(_, w)| w).sum();
    let blobs: Vec<Blob> = (0..count)
        .map(|_| {
            let mut pick = rng.random_range(0..total);
            let color = palette
                .iter()
                .find(|(_, w)| {
                    if pick < *w {
                        true
                    } else {
                        pick -= w;
                        false
                    }
                })
                .map(|(c, _)| *c)
                .expect("weighted pick in range");
            Blob {
                x: rng.random::<f64>() * width as f64,
                y: rng.random::<f64>() * height as f64,
                stretch: 0.5 + rng.random::<f64>(),
                color,
            }
        })
        .collect();
    let freq = 2.0 * std::f64::consts::PI / width.max(height) as f64;
    let amp = width.min(height) as f64 / 10.0;
    let (px, py) = (rng.random::<f64>() * 6.3, rng.random::<f64>() * 6.3);

    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            // Domain warp gives the cells organic outlines.
            let wx = x as f64 + amp * (3.0 * freq * y as f64 + py).sin();
            let wy = y as f64 + amp * (2.0 * freq * x as f64 + px).cos();
            let nearest = blobs
                .iter()
                .map(|b| ((wx - b.x).powi(2) * b.stretch + (wy - b.y).powi(2) / b.stretch, b))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, b)| b.color)
                .expect("at least one blob");
            let j = jitter as i32;
            let px = nearest.map(|c| {
                let delta = if j > 0 { rng.random_range(-j..=j) } else { 0 };
                (c as i32 + delta).clamp(0, 255) as u8
            });
            pixels.push(px);
        }
    }
    RasterImage::new(width, height, pixels).expect("dimensions checked")
}

/// The committed fixture corpus.
pub fn standard_fixtures() -> Vec<FixtureSpec> {
    let blobs = |name: &str, persona, seed| FixtureSpec {
        name: name.into(),
        generator: Generator::SeededBlobs {
            width: 64,
            height: 64,
            persona,
            blobs: 24,
            jitter: 3,
        },
        seed,
    };
    vec![
        blobs("woodland_64", Persona::Woodland, 7),
        blobs("sand_64", Persona::Sand, 11),
        blobs("desert_64", Persona::Desert, 13),
        blobs("snow_64", Persona::Snow, 17),
        FixtureSpec {
            name: "stripes_h_64".into(),
            generator: Generator::Stripes {
                width: 64,
                height: 64,
                thickness: 4,
                orientation: Orientation::Horizontal,
                colors: vec![[40, 60, 30], [150, 140, 100], [90, 100, 60]],
            },
            seed: 0,
        },
        FixtureSpec {
            name: "noise_64".into(),
            generator: Generator::Noise { width: 64, height: 64 },
            seed: 3,
        },
        FixtureSpec {
            name: "green_64".into(),
            generator: Generator::Constant {
                width: 64,
                height: 64,
                color: [0, 128, 0],
            },
            seed: 0,
        },
        FixtureSpec {
            name: "red".into(),
            generator: Generator::Constant {
                width: 16,
                height: 16,
                color: [255, 0, 0],
            },
            seed: 0,
        },
        FixtureSpec {
            name: "blue".into(),
            generator: Generator::Constant {
                width: 16,
                height: 16,
                color: [0, 0, 255],
            },
            seed: 0,
        },
        FixtureSpec {
            name: "halves_32".into(),
            generator: Generator::TwoHalves {
                width: 32,
                height: 16,
                left: [200, 30, 30],
                right: [30, 30, 200],
            },
            seed: 0,
        },
        FixtureSpec {
            name: "checker_8".into(),
            generator: Generator::Checkerboard {
                width: 8,
                height: 8,
                block: 2,
                colors: [[20, 20, 20], [230, 230, 230]],
            },
            seed: 0,
        },
    ]
}
