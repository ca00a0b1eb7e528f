//! K-means pixel clustering, label-boundary edges and connected patches.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{rgb_to_hsv, RasterImage, Rgb};

pub type Feature = [f64; 3];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorSpace {
    Rgb,
    #[default]
    Hsv,
}

impl std::str::FromStr for ColorSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rgb" => Ok(ColorSpace::Rgb),
            "hsv" => Ok(ColorSpace::Hsv),
            other => Err(Error::InvalidConfig(format!("unknown color space '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KmeansConfig {
    pub k: usize,
    pub max_iterations: usize,
    /// Convergence threshold on the largest squared centroid shift.
    pub tolerance: f64,
    pub seed: u64,
    pub color_space: ColorSpace,
    pub restarts: usize,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        Self {
            k: 4,
            max_iterations: 100,
            tolerance: 1e-6,
            seed: 0,
            color_space: ColorSpace::Hsv,
            restarts: 3,
        }
    }
}

impl KmeansConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > 256 {
            return Err(Error::InvalidConfig(format!("k must be in 1..=256, got {}", self.k)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max iterations must be >= 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::InvalidConfig("tolerance must be >= 0".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Feature vector of a pixel. HSV puts hue on the unit circle scaled by
/// saturation so that hue wraps without a seam.
pub fn pixel_feature(px: Rgb, space: ColorSpace) -> Feature {
    match space {
        ColorSpace::Rgb => [px[0] as f64 / 255.0, px[1] as f64 / 255.0, px[2] as f64 / 255.0],
        ColorSpace::Hsv => {
            let hsv = rgb_to_hsv(px[0], px[1], px[2]);
            let angle = hsv.h.to_radians();
            [hsv.s * angle.cos(), hsv.s * angle.sin(), hsv.v]
        }
    }
}

pub fn pixel_features(image: &RasterImage, space: ColorSpace) -> Vec<Feature> {
    image.pixels().iter().map(|&p| pixel_feature(p, space)).collect()
}

pub fn squared_distance(a: &Feature, b: &Feature) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SegmentationMap {
    pub width: usize,
    pub height: usize,
    pub k: usize,
    pub labels: Vec<u8>,
    pub centroids: Vec<Feature>,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
}

impl SegmentationMap {
    pub fn label(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }
}

/// Result of one Lloyd run on a feature set.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub labels: Vec<u8>,
    pub centroids: Vec<Feature>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia of every (assignment, centroid update) state visited.
    pub history: Vec<f64>,
}

fn nearest(point: &Feature, centroids: &[Feature]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// k-means++ seeding: first centre uniform, the rest drawn with
/// probability proportional to squared distance from the nearest centre.
pub fn plus_plus_init(points: &[Feature], k: usize, rng: &mut impl Rng) -> Vec<Feature> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())]);
    let mut dist: Vec<f64> = points.iter().map(|p| squared_distance(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = points.len() - 1;
            for (i, d) in dist.iter().enumerate() {
                acc += d;
                if acc > target && *d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[pick];
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

// Sums deviations from each cluster's first member so that identical
// members average exactly.
fn means(points: &[Feature], labels: &[u8], previous: &[Feature]) -> (Vec<Feature>, Vec<usize>) {
    let k = previous.len();
    let mut anchors: Vec<Option<Feature>> = vec![None; k];
    let mut sums = vec![[0.0; 3]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        let l = l as usize;
        let a = *anchors[l].get_or_insert(*p);
        let s = &mut sums[l];
        s[0] += p[0] - a[0];
        s[1] += p[1] - a[1];
        s[2] += p[2] - a[2];
        counts[l] += 1;
    }
    let centroids = (0..k)
        .map(|c| match anchors[c] {
            None => previous[c],
            Some(a) => {
                let n = counts[c] as f64;
                let s = sums[c];
                [a[0] + s[0] / n, a[1] + s[1] / n, a[2] + s[2] / n]
            }
        })
        .collect();
    (centroids, counts)
}

fn total_inertia(points: &[Feature], labels: &[u8], centroids: &[Feature]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| squared_distance(p, &centroids[l as usize]))
        .sum()
}

/// Lloyd iterations from the given starting centroids.
pub fn lloyd(points: &[Feature], mut centroids: Vec<Feature>, max_iterations: usize, tolerance: f64) -> Clustering {
    let mut labels = vec![0u8; points.len()];
    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut dists = Vec::with_capacity(points.len());
        for (p, l) in points.iter().zip(labels.iter_mut()) {
            let (i, d) = nearest(p, &centroids);
            *l = i as u8;
            dists.push(d);
        }
        // An empty cluster takes over the point worst served by its centre.
        let mut counts = vec![0usize; centroids.len()];
        labels.iter().for_each(|&l| counts[l as usize] += 1);
        for c in 0..centroids.len() {
            if counts[c] > 0 {
                continue;
            }
            let far = dists
                .iter()
                .enumerate()
                .filter(|(i, _)| counts[labels[*i] as usize] > 1)
                .fold(None, |best: Option<(usize, f64)>, (i, &d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                });
            if let Some((i, _)) = far.filter(|(_, d)| *d > 0.0) {
                counts[labels[i] as usize] -= 1;
                labels[i] = c as u8;
                counts[c] = 1;
                dists[i] = 0.0;
                centroids[c] = points[i];
            }
        }
        let (next, _) = means(points, &labels, &centroids);
        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| squared_distance(a, b))
            .fold(0.0, f64::max);
        centroids = next;
        let inertia = total_inertia(points, &labels, &centroids);
        if let Some(&last) = history.last() {
            debug_assert!(
                inertia <= last + 1e-9 * last.max(1.0),
                "Lloyd inertia increased: {last} -> {inertia}"
            );
        }
        history.push(inertia);
        if shift < tolerance || iterations >= max_iterations {
            return Clustering {
                labels,
                centroids,
                inertia,
                iterations,
                history,
            };
        }
    }
}

/// Best of `restarts` seeded k-means++/Lloyd runs on raw feature points.
pub fn kmeans_points(points: &[Feature], config: &KmeansConfig) -> Result<Clustering> {
    config.validate()?;
    if points.len() < config.k {
        return Err(Error::TooFewPixels {
            pixels: points.len(),
            k: config.k,
        });
    }
    let mut best: Option<Clustering> = None;
    for r in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(r as u64));
        let init = plus_plus_init(points, config.k, &mut rng);
        let run = lloyd(points, init, config.max_iterations, config.tolerance);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

pub fn kmeans_segment(image: &RasterImage, config: &KmeansConfig) -> Result<SegmentationMap> {
    let points = pixel_features(image, config.color_space);
    let run = kmeans_points(&points, config)?;
    Ok(SegmentationMap {
        width: image.width(),
        height: image.height(),
        k: config.k,
        labels: run.labels,
        centroids: run.centroids,
        inertia: run.inertia,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask {
    pub width: usize,
    pub height: usize,
    pub edges: Vec<bool>,
}

impl EdgeMask {
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.edges[y * self.width + x]
    }

    /// Grayscale samples: 255 on edges, 0 elsewhere.
    pub fn to_samples(&self) -> Vec<u8> {
        self.edges.iter().map(|&e| if e { 255 } else { 0 }).collect()
    }
}

fn neighbors4(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    let mut out = [(usize::MAX, usize::MAX); 4];
    if x > 0 {
        out[0] = (x - 1, y);
    }
    if x + 1 < w {
        out[1] = (x + 1, y);
    }
    if y > 0 {
        out[2] = (x, y - 1);
    }
    if y + 1 < h {
        out[3] = (x, y + 1);
    }
    out.into_iter().filter(|p| p.0 != usize::MAX)
}

/// Marks pixels with at least one 4-neighbour of a different label.
pub fn extract_edges(map: &SegmentationMap) -> EdgeMask {
    let (w, h) = (map.width, map.height);
    let mut edges = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let l = map.label(x, y);
            edges[y * w + x] = neighbors4(x, y, w, h).any(|(nx, ny)| map.label(nx, ny) != l);
        }
    }
    EdgeMask {
        width: w,
        height: h,
        edges,
    }
}

/// Inclusive pixel bounds `(x0, y0, x1, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }
}

/// A 4-connected region of one cluster label.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Patch {
    pub cluster_id: u8,
    pub area: usize,
    pub bounding_box: BoundingBox,
    pub mean_color: Rgb,
    /// Row-major mask over the bounding box.
    #[serde(serialize_with = "serialize_mask_rows")]
    #[serde(rename = "mask")]
    pub pixel_mask: Vec<bool>,
}

fn serialize_mask_rows<S: serde::Serializer>(mask: &[bool], s: S) -> std::result::Result<S::Ok, S::Error> {
    // Width is unknown here, so the mask goes out as one bit string; the
    // bounding box gives the row length.
    s.serialize_str(&mask.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
}

impl Patch {
    /// Whether the absolute pixel `(x, y)` belongs to the patch.
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let b = &self.bounding_box;
        x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1 && self.pixel_mask[(y - b.y0) * b.width() + (x - b.x0)]
    }

    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let b = self.bounding_box;
        self.pixel_mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(move |(i, _)| (b.x0 + i % b.width(), b.y0 + i / b.width()))
    }
}

/// Connected components of equal labels with `area >= min_area`, largest
/// first, ties by top-left corner of the bounding box.
pub fn extract_patches(map: &SegmentationMap, image: &RasterImage, min_area: usize) -> Result<Vec<Patch>> {
    if min_area == 0 {
        return Err(Error::InvalidConfig("min area must be >= 1".into()));
    }
    if image.width() != map.width || image.height() != map.height {
        return Err(Error::InvalidConfig("image and segmentation sizes differ".into()));
    }
    let (w, h) = (map.width, map.height);
    let mut seen = vec![false; w * h];
    let mut patches = Vec::new();
    let mut queue = VecDeque::new();
    let mut members = Vec::new();
    for start in 0..w * h {
        if seen[start] {
            continue;
        }
        let label = map.labels[start];
        seen[start] = true;
        queue.push_back(start);
        members.clear();
        while let Some(i) = queue.pop_front() {
            members.push(i);
            for (nx, ny) in neighbors4(i % w, i / w, w, h) {
                let j = ny * w + nx;
                if !seen[j] && map.labels[j] == label {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if members.len() < min_area {
            continue;
        }
        let mut bb = BoundingBox {
            x0: usize::MAX,
            y0: usize::MAX,
            x1: 0,
            y1: 0,
        };
        let mut sum = [0u64; 3];
        for &i in &members {
            let (x, y) = (i % w, i / w);
            bb.x0 = bb.x0.min(x);
            bb.y0 = bb.y0.min(y);
            bb.x1 = bb.x1.max(x);
            bb.y1 = bb.y1.max(y);
            let px = image.pixels()[i];
            for c in 0..3 {
                sum[c] += px[c] as u64;
            }
        }
        let mut mask = vec![false; bb.width() * bb.height()];
        for &i in &members {
            mask[(i / w - bb.y0) * bb.width() + (i % w - bb.x0)] = true;
        }
        let n = members.len() as u64;
        let mean_color = [0, 1, 2].map(|c| ((sum[c] + n / 2) / n) as u8);
        patches.push(Patch {
            cluster_id: label,
            area: members.len(),
            bounding_box: bb,
            mean_color,
            pixel_mask: mask,
        });
    }
    patches.sort_by(|a, b| {
        b.area
            .cmp(&a.area)
            .then(a.bounding_box.y0.cmp(&b.bounding_box.y0))
            .then(a.bounding_box.x0.cmp(&b.bounding_box.x0))
    });
    Ok(patches)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RED: Rgb = [255, 0, 0];
    const BLUE: Rgb = [0, 0, 255];

    fn halves(w: usize, h: usize) -> RasterImage {
        RasterImage::from_fn(w, h, |x, _| if x < w / 2 { RED } else { BLUE }).unwrap()
    }

    fn map_from(width: usize, height: usize, labels: Vec<u8>) -> SegmentationMap {
        let k = *labels.iter().max().unwrap() as usize + 1;
        SegmentationMap {
            width,
            height,
            k,
            labels,
            centroids: vec![[0.0; 3]; k],
            inertia: 0.0,
        }
    }

    #[test]
    fn separable_halves() {
        let img = halves(8, 4);
        let cfg = KmeansConfig {
            k: 2,
            ..Default::default()
        };
        let m = kmeans_segment(&img, &cfg).unwrap();
        assert_eq!(m.inertia, 0.0);
        let left = m.label(0, 0);
        for y in 0..4 {
            for x in 0..8 {
                assert_eq!(m.label(x, y) == left, x < 4);
            }
        }
    }

    #[test]
    fn constant_single_cluster() {
        let img = RasterImage::filled(5, 5, [10, 200, 30]).unwrap();
        for space in [ColorSpace::Rgb, ColorSpace::Hsv] {
            let cfg = KmeansConfig {
                k: 1,
                color_space: space,
                ..Default::default()
            };
            let m = kmeans_segment(&img, &cfg).unwrap();
            assert!(m.labels.iter().all(|&l| l == 0));
            assert_eq!(m.centroids[0], pixel_feature([10, 200, 30], space));
            assert_eq!(m.inertia, 0.0);
        }
    }

    #[test]
    fn constant_image_with_surplus_clusters() {
        let img = RasterImage::filled(3, 3, [40, 40, 40]).unwrap();
        let m = kmeans_segment(
            &img,
            &KmeansConfig {
                k: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(m.inertia, 0.0);
        assert!(m.labels.iter().all(|&l| l < 3));
    }

    #[test]
    fn too_few_pixels() {
        let img = RasterImage::filled(1, 2, RED).unwrap();
        assert_eq!(
            kmeans_segment(
                &img,
                &KmeansConfig {
                    k: 3,
                    ..Default::default()
                }
            ),
            Err(Error::TooFewPixels { pixels: 2, k: 3 })
        );
    }

    #[test]
    fn centroids_are_member_means_and_inertia_recomputes() {
        let img = RasterImage::from_fn(12, 9, |x, y| [(x * 21) as u8, (y * 27) as u8, ((x + y) * 9) as u8]).unwrap();
        let cfg = KmeansConfig {
            k: 3,
            color_space: ColorSpace::Rgb,
            ..Default::default()
        };
        let m = kmeans_segment(&img, &cfg).unwrap();
        let pts = pixel_features(&img, ColorSpace::Rgb);
        for c in 0..3u8 {
            let members: Vec<_> = pts
                .iter()
                .zip(&m.labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            for d in 0..3 {
                let mean = members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
                assert!((mean - m.centroids[c as usize][d]).abs() < 1e-6);
            }
        }
        let recomputed: f64 = pts
            .iter()
            .zip(&m.labels)
            .map(|(p, &l)| squared_distance(p, &m.centroids[l as usize]))
            .sum();
        assert!((recomputed - m.inertia).abs() < 1e-6);
    }

    #[test]
    fn lloyd_history_is_non_increasing() {
        let img = RasterImage::from_fn(16, 16, |x, y| [(x * 16) as u8, (y * 16) as u8, ((x * y) % 256) as u8]).unwrap();
        let pts = pixel_features(&img, ColorSpace::Hsv);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let init = plus_plus_init(&pts, 5, &mut rng);
        let run = lloyd(&pts, init, 100, 0.0);
        for pair in run.history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let img = RasterImage::from_fn(20, 20, |x, y| [(x * 12) as u8, 90, (y * 12) as u8]).unwrap();
        let cfg = KmeansConfig {
            seed: 11,
            ..Default::default()
        };
        assert_eq!(kmeans_segment(&img, &cfg).unwrap(), kmeans_segment(&img, &cfg).unwrap());
    }

    #[test]
    fn hsv_feature_wraps_hue() {
        let a = pixel_feature([255, 0, 1], ColorSpace::Hsv);
        let b = pixel_feature([255, 1, 0], ColorSpace::Hsv);
        assert!(squared_distance(&a, &b) < 1e-3);
    }

    #[test]
    fn edges_single_cluster() {
        let m = map_from(4, 3, vec![0; 12]);
        assert!(extract_edges(&m).edges.iter().all(|e| !e));
    }

    #[test]
    fn edges_vertical_split() {
        let (w, h, c) = (7, 4, 3);
        let m = map_from(w, h, (0..w * h).map(|i| (i % w >= c) as u8).collect());
        let e = extract_edges(&m);
        for y in 0..h {
            for x in 0..w {
                assert_eq!(e.get(x, y), x == c - 1 || x == c);
            }
        }
    }

    #[test]
    fn patches_of_constant_and_halves() {
        let img = RasterImage::filled(6, 5, [1, 2, 3]).unwrap();
        let m = map_from(6, 5, vec![0; 30]);
        let p = extract_patches(&m, &img, 1).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].area, 30);
        assert_eq!(p[0].mean_color, [1, 2, 3]);
        assert_eq!(
            p[0].bounding_box,
            BoundingBox {
                x0: 0,
                y0: 0,
                x1: 5,
                y1: 4
            }
        );

        let img = halves(8, 4);
        let m = map_from(8, 4, (0..32).map(|i| (i % 8 >= 4) as u8).collect());
        let p = extract_patches(&m, &img, 1).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(|q| q.area == 16));
        // Tie on area resolved by x0.
        assert_eq!(p[0].bounding_box.x0, 0);
        assert_eq!(p[0].mean_color, RED);
        assert_eq!(p[1].mean_color, BLUE);
    }

    #[test]
    fn min_area_filters_small_components() {
        let mut labels = vec![0u8; 25];
        labels[12] = 1;
        let m = map_from(5, 5, labels);
        let img = RasterImage::filled(5, 5, [0; 3]).unwrap();
        assert_eq!(extract_patches(&m, &img, 1).unwrap().len(), 2);
        let big = extract_patches(&m, &img, 2).unwrap();
        assert_eq!(big.len(), 1);
        assert_eq!(big[0].area, 24);
        assert!(!big[0].contains(2, 2));
        assert!(extract_patches(&m, &img, 0).is_err());
    }

    #[test]
    fn diagonal_cells_are_separate_components() {
        let m = map_from(2, 2, vec![1, 0, 0, 1]);
        let img = RasterImage::filled(2, 2, [0; 3]).unwrap();
        assert_eq!(extract_patches(&m, &img, 1).unwrap().len(), 4);
    }
}
