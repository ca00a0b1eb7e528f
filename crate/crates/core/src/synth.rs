//! Composite pattern synthesis: palette from merged histograms, geometry
//! from a donor segmentation's patches.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::color_hist::{bhattacharyya, build_histogram, ColorHistogram, QuantizationScheme, SimilarityScore};
use crate::error::{Error, Result};
use crate::image::{hsv_to_rgb, RasterImage, Rgb};
use crate::segment::Patch;
use crate::texture::{texture_compare, texture_vector, GlcmConfig, TextureComparison, TextureVector};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaletteEntry {
    pub color: Rgb,
    pub weight: f64,
    /// Flat histogram bin the color was drawn from.
    pub bin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Palette {
    pub entries: Vec<PaletteEntry>,
}

impl Palette {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn colors(&self) -> impl Iterator<Item = Rgb> + '_ {
        self.entries.iter().map(|e| e.color)
    }
}

/// Picks the `palette_size` most frequent bins of `merged` and colors each
/// with the mean RGB of the source pixels that fall into it.
pub fn dominant_palette(merged: &ColorHistogram, images: &[RasterImage], palette_size: usize) -> Result<Palette> {
    if palette_size == 0 {
        return Err(Error::InvalidConfig("palette size must be >= 1".into()));
    }
    let scheme = merged.scheme();
    let mut ranked: Vec<(usize, f64)> = merged
        .values()
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, v)| *v > 0.0)
        .collect();
    if ranked.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    if palette_size > ranked.len() {
        return Err(Error::PaletteTooLarge {
            requested: palette_size,
            available: ranked.len(),
        });
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(palette_size);

    let mut sums = vec![[0u64; 4]; scheme.bin_count()];
    for image in images {
        for &px in image.pixels() {
            let s = &mut sums[scheme.bin_of_rgb(px)];
            s[0] += px[0] as u64;
            s[1] += px[1] as u64;
            s[2] += px[2] as u64;
            s[3] += 1;
        }
    }
    let total: f64 = ranked.iter().map(|(_, v)| v).sum();
    let entries = ranked
        .iter()
        .map(|&(bin, freq)| {
            let s = sums[bin];
            let color = if s[3] > 0 {
                let n = s[3];
                [0, 1, 2].map(|c| ((s[c] + n / 2) / n) as u8)
            } else {
                hsv_to_rgb(scheme.bin_center(bin))
            };
            PaletteEntry {
                color,
                weight: freq / total,
                bin,
            }
        })
        .collect();
    Ok(Palette { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternProvenance {
    pub palette: Palette,
    pub seed: u64,
    pub patch_count: usize,
    pub donor_width: usize,
    pub donor_height: usize,
    /// Palette index chosen for each donor patch, in patch order.
    pub patch_colors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CamoPattern {
    pub image: RasterImage,
    pub provenance: PatternProvenance,
}

/// Pairs of patch indices that share at least one 4-neighbour pixel edge.
pub fn patch_adjacency(patches: &[Patch]) -> (usize, usize, Vec<BTreeSet<usize>>) {
    let (w, h) = donor_extent(patches);
    let owner = owner_grid(patches, w, h);
    let mut adj = vec![BTreeSet::new(); patches.len()];
    for y in 0..h {
        for x in 0..w {
            let Some(a) = owner[y * w + x] else { continue };
            let right = (x + 1 < w).then(|| owner[y * w + x + 1]).flatten();
            let down = (y + 1 < h).then(|| owner[(y + 1) * w + x]).flatten();
            for b in [right, down].into_iter().flatten() {
                if a != b {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            }
        }
    }
    (w, h, adj)
}

fn donor_extent(patches: &[Patch]) -> (usize, usize) {
    patches.iter().fold((0, 0), |(w, h), p| {
        (w.max(p.bounding_box.x1 + 1), h.max(p.bounding_box.y1 + 1))
    })
}

fn owner_grid(patches: &[Patch], w: usize, h: usize) -> Vec<Option<usize>> {
    let mut owner = vec![None; w * h];
    for (i, p) in patches.iter().enumerate() {
        for (x, y) in p.pixels() {
            owner[y * w + x] = Some(i);
        }
    }
    owner
}

/// Palette indices in weighted random order without replacement.
fn weighted_order(weights: &[f64], rng: &mut impl Rng) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..weights.len()).collect();
    let mut order = Vec::with_capacity(weights.len());
    while !remaining.is_empty() {
        let total: f64 = remaining.iter().map(|&i| weights[i]).sum();
        let pos = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            remaining
                .iter()
                .position(|&i| {
                    acc += weights[i];
                    acc > target
                })
                .unwrap_or(remaining.len() - 1)
        } else {
            rng.random_range(0..remaining.len())
        };
        order.push(remaining.remove(pos));
    }
    order
}

const SEARCH_BUDGET: usize = 200_000;

/// Backtracking search over the per-patch candidate orders. Returns `None`
/// when the budget runs out or no proper coloring exists.
fn proper_coloring(adj: &[BTreeSet<usize>], candidates: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut colors: Vec<Option<usize>> = vec![None; n];
    let mut cursor = vec![0usize; n];
    let mut i = 0;
    let mut steps = 0;
    while i < n {
        steps += 1;
        if steps > SEARCH_BUDGET {
            return None;
        }
        let mut placed = false;
        while cursor[i] < candidates[i].len() {
            let c = candidates[i][cursor[i]];
            cursor[i] += 1;
            if adj[i].iter().all(|&j| colors[j] != Some(c)) {
                colors[i] = Some(c);
                placed = true;
                break;
            }
        }
        if placed {
            i += 1;
        } else {
            cursor[i] = 0;
            colors[i] = None;
            if i == 0 {
                return None;
            }
            i -= 1;
            colors[i] = None;
        }
    }
    Some(colors.into_iter().map(|c| c.expect("assigned")).collect())
}

/// Greedy pass: first non-conflicting candidate, else the palette entry
/// used longest ago.
fn greedy_coloring(adj: &[BTreeSet<usize>], candidates: &[Vec<usize>], palette_len: usize) -> Vec<usize> {
    let mut colors: Vec<Option<usize>> = vec![None; adj.len()];
    let mut last_used = vec![None::<usize>; palette_len];
    for i in 0..adj.len() {
        let pick = candidates[i]
            .iter()
            .copied()
            .find(|&c| adj[i].iter().all(|&j| colors[j] != Some(c)))
            .unwrap_or_else(|| {
                (0..palette_len)
                    .min_by_key(|&c| (last_used[c].map_or(0, |s| s + 1), c))
                    .expect("non-empty palette")
            });
        colors[i] = Some(pick);
        last_used[pick] = Some(i);
    }
    colors.into_iter().map(|c| c.expect("assigned")).collect()
}

/// Scales the donor patch layout to `width × height` (nearest neighbour) and
/// fills each patch with a palette color so that edge-adjacent patches
/// differ whenever the palette allows it.
pub fn render_pattern(
    patches: &[Patch],
    palette: &Palette,
    width: usize,
    height: usize,
    seed: u64,
) -> Result<CamoPattern> {
    if palette.is_empty() {
        return Err(Error::EmptyPalette);
    }
    if patches.is_empty() {
        return Err(Error::NoPatches);
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidConfig("pattern dimensions must be positive".into()));
    }
    let (dw, dh, adj) = patch_adjacency(patches);
    let owner = owner_grid(patches, dw, dh);
    let weights: Vec<f64> = palette.entries.iter().map(|e| e.weight).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<Vec<usize>> = (0..patches.len()).map(|_| weighted_order(&weights, &mut rng)).collect();

    let patch_colors = if palette.len() == 1 {
        vec![0; patches.len()]
    } else {
        proper_coloring(&adj, &candidates).unwrap_or_else(|| greedy_coloring(&adj, &candidates, palette.len()))
    };

    let fallback = palette.entries[0].color;
    let image = RasterImage::from_fn(width, height, |x, y| {
        let sx = x * dw / width;
        let sy = y * dh / height;
        owner[sy * dw + sx].map_or(fallback, |p| palette.entries[patch_colors[p]].color)
    })?;
    Ok(CamoPattern {
        image,
        provenance: PatternProvenance {
            palette: palette.clone(),
            seed,
            patch_count: patches.len(),
            donor_width: dw,
            donor_height: dh,
            patch_colors,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnvironmentReport {
    pub similarity: SimilarityScore,
    pub pattern_texture: TextureVector,
    pub environment_texture: TextureVector,
    pub texture_comparison: TextureComparison,
}

/// Color and texture evaluation of a pattern against each environment.
pub fn evaluate_design(
    pattern: &RasterImage,
    environments: &[RasterImage],
    scheme: &QuantizationScheme,
    glcm: &GlcmConfig,
) -> Result<Vec<EnvironmentReport>> {
    if environments.is_empty() {
        return Err(Error::InvalidConfig("at least one environment is required".into()));
    }
    let pattern_hist = build_histogram(pattern, scheme)?;
    let pattern_texture = texture_vector(pattern, glcm)?;
    environments
        .iter()
        .map(|env| {
            let env_hist = build_histogram(env, scheme)?;
            let environment_texture = texture_vector(env, glcm)?;
            Ok(EnvironmentReport {
                similarity: bhattacharyya(&pattern_hist, &env_hist)?,
                pattern_texture,
                environment_texture,
                texture_comparison: texture_compare(&pattern_texture, &environment_texture),
            })
        })
        .collect()
}
