//! HSV quantization, normalized color histograms and Bhattacharyya scoring.
//!
//! Bins are stored flat in hue-major order: `h * s_bins + s`, extended to
//! `(h * s_bins + s) * v_bins + v` when value is included.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::image::{rgb_to_hsv, HsvPixel, RasterImage};

/// Equal-width partition of the HSV cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuantizationScheme {
    pub h_bins: usize,
    pub s_bins: usize,
    pub v_bins: usize,
    #[serde(rename = "includeV")]
    pub include_v: bool,
}

impl Default for QuantizationScheme {
    fn default() -> Self {
        Self {
            h_bins: 16,
            s_bins: 4,
            v_bins: 4,
            include_v: false,
        }
    }
}

impl QuantizationScheme {
    pub fn validate(&self) -> Result<()> {
        if self.h_bins == 0 || self.s_bins == 0 || self.v_bins == 0 {
            return Err(Error::InvalidScheme(format!(
                "bin counts must be >= 1, got h={} s={} v={}",
                self.h_bins, self.s_bins, self.v_bins
            )));
        }
        Ok(())
    }

    pub fn bin_count(&self) -> usize {
        if self.include_v {
            self.h_bins * self.s_bins * self.v_bins
        } else {
            self.h_bins * self.s_bins
        }
    }

    pub fn flat_index(&self, bin: HsvBin) -> usize {
        let hs = bin.h * self.s_bins + bin.s;
        if self.include_v {
            hs * self.v_bins + bin.v
        } else {
            hs
        }
    }

    /// Inverse of [`flat_index`](Self::flat_index). The value bin is 0 when
    /// value is not part of the layout.
    pub fn unflatten(&self, index: usize) -> HsvBin {
        let (hs, v) = if self.include_v {
            (index / self.v_bins, index % self.v_bins)
        } else {
            (index, 0)
        };
        HsvBin {
            h: hs / self.s_bins,
            s: hs % self.s_bins,
            v,
        }
    }

    /// Flat bin of an 8-bit RGB pixel.
    pub fn bin_of_rgb(&self, rgb: [u8; 3]) -> usize {
        self.flat_index(quantize(rgb_to_hsv(rgb[0], rgb[1], rgb[2]), self))
    }

    /// HSV coordinates of a bin's center. With value excluded the center
    /// value is 1/2.
    pub fn bin_center(&self, index: usize) -> HsvPixel {
        let bin = self.unflatten(index);
        let v = if self.include_v {
            (bin.v as f64 + 0.5) / self.v_bins as f64
        } else {
            0.5
        };
        HsvPixel {
            h: (bin.h as f64 + 0.5) * 360.0 / self.h_bins as f64,
            s: (bin.s as f64 + 0.5) / self.s_bins as f64,
            v,
        }
    }
}

/// Per-channel bin indices of a quantized pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HsvBin {
    pub h: usize,
    pub s: usize,
    pub v: usize,
}

/// Maps an HSV pixel onto bin indices; upper endpoints clamp into the last bin.
pub fn quantize(pixel: HsvPixel, scheme: &QuantizationScheme) -> HsvBin {
    let width = 360.0 / scheme.h_bins as f64;
    let h = ((pixel.h / width).floor().max(0.0) as usize).min(scheme.h_bins - 1);
    let s = ((pixel.s * scheme.s_bins as f64).floor().max(0.0) as usize).min(scheme.s_bins - 1);
    let v = ((pixel.v * scheme.v_bins as f64).floor().max(0.0) as usize).min(scheme.v_bins - 1);
    HsvBin { h, s, v }
}

/// Normalized bin frequencies `count / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ColorHistogram {
    scheme: QuantizationScheme,
    pixel_total: u64,
    values: Vec<f64>,
}

impl ColorHistogram {
    /// Wraps precomputed frequencies. Values must be non-negative, sum to 1
    /// within 1e-9 and match the scheme's bin count.
    pub fn from_values(scheme: QuantizationScheme, values: Vec<f64>, pixel_total: u64) -> Result<Self> {
        scheme.validate()?;
        if values.len() != scheme.bin_count() {
            return Err(Error::BinMismatch);
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig("histogram values must be finite and >= 0".into()));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("histogram sums to {sum}, expected 1")));
        }
        Ok(Self {
            scheme,
            pixel_total,
            values,
        })
    }

    pub fn scheme(&self) -> &QuantizationScheme {
        &self.scheme
    }

    pub fn bin_count(&self) -> usize {
        self.values.len()
    }

    pub fn pixel_total(&self) -> u64 {
        self.pixel_total
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Per-bin pixel counts, the unnormalized form of a histogram.
pub fn bin_counts(image: &RasterImage, scheme: &QuantizationScheme) -> Result<Vec<u64>> {
    scheme.validate()?;
    let mut counts = vec![0u64; scheme.bin_count()];
    for &px in image.pixels() {
        counts[scheme.bin_of_rgb(px)] += 1;
    }
    Ok(counts)
}

pub fn build_histogram(image: &RasterImage, scheme: &QuantizationScheme) -> Result<ColorHistogram> {
    if image.is_empty() {
        return Err(Error::EmptyImage);
    }
    let counts = bin_counts(image, scheme)?;
    let n = image.len() as u64;
    let values = counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(ColorHistogram {
        scheme: *scheme,
        pixel_total: n,
        values,
    })
}

/// Bhattacharyya coefficient with its derived distance and percentage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityScore {
    pub coefficient: f64,
    /// `-ln(coefficient)`; infinite for disjoint histograms.
    #[serde(serialize_with = "serialize_distance")]
    pub distance: f64,
    pub percent: f64,
}

impl SimilarityScore {
    pub fn from_coefficient(coefficient: f64) -> Self {
        let coefficient = coefficient.clamp(0.0, 1.0);
        let distance = if coefficient == 0.0 {
            f64::INFINITY
        } else if coefficient == 1.0 {
            0.0
        } else {
            -coefficient.ln()
        };
        Self {
            coefficient,
            distance,
            percent: 100.0 * coefficient,
        }
    }
}

// JSON has no infinity literal.
fn serialize_distance<S: Serializer>(d: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if d.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*d)
    }
}

/// Raw coefficient `Σ √(p_i q_i)` over equal-length frequency slices.
pub fn bhattacharyya_coefficient(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::BinMismatch);
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum())
}

pub fn bhattacharyya(p: &ColorHistogram, q: &ColorHistogram) -> Result<SimilarityScore> {
    if p.scheme != q.scheme {
        return Err(Error::BinMismatch);
    }
    bhattacharyya_coefficient(&p.values, &q.values).map(SimilarityScore::from_coefficient)
}

/// Weighted per-bin mix of histograms. `None` means equal weights.
pub fn merge_histograms(histograms: &[ColorHistogram], weights: Option<&[f64]>) -> Result<ColorHistogram> {
    let first = histograms.first().ok_or(Error::EmptyHistogram)?;
    if histograms.iter().any(|h| h.scheme != first.scheme) {
        return Err(Error::BinMismatch);
    }
    let equal;
    let weights = match weights {
        Some(w) => w,
        None => {
            equal = vec![1.0 / histograms.len() as f64; histograms.len()];
            &equal
        }
    };
    if weights.len() != histograms.len() {
        return Err(Error::BadWeights(format!(
            "{} weights for {} histograms",
            weights.len(),
            histograms.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::BadWeights("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::BadWeights(format!("weights sum to {total}, expected 1")));
    }
    let mut values = vec![0.0; first.bin_count()];
    for (h, w) in histograms.iter().zip(weights) {
        for (acc, v) in values.iter_mut().zip(&h.values) {
            *acc += w * v;
        }
    }
    Ok(ColorHistogram {
        scheme: first.scheme,
        pixel_total: histograms.iter().map(|h| h.pixel_total).sum(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const RED: [u8; 3] = [255, 0, 0];
    const GREEN: [u8; 3] = [0, 255, 0];

    fn two_bin(values: [f64; 2]) -> ColorHistogram {
        let scheme = QuantizationScheme {
            h_bins: 2,
            s_bins: 1,
            v_bins: 1,
            include_v: false,
        };
        ColorHistogram::from_values(scheme, values.to_vec(), 0).unwrap()
    }

    #[test]
    fn quantize_examples() {
        let d = QuantizationScheme::default();
        let q = |h, s, v| quantize(HsvPixel { h, s, v }, &d);
        assert_eq!(q(0.0, 0.0, 0.0), HsvBin { h: 0, s: 0, v: 0 });
        assert_eq!(q(359.9, 1.0, 1.0), HsvBin { h: 15, s: 3, v: 3 });
        assert_eq!(q(120.0, 0.5, 0.5), HsvBin { h: 5, s: 2, v: 2 });
    }

    #[test]
    fn flat_index_round_trips() {
        for include_v in [false, true] {
            let s = QuantizationScheme {
                include_v,
                ..Default::default()
            };
            for i in 0..s.bin_count() {
                assert_eq!(s.flat_index(s.unflatten(i)), i);
            }
        }
    }

    #[test]
    fn pure_red_image() {
        let img = RasterImage::filled(4, 4, RED).unwrap();
        let h = build_histogram(&img, &QuantizationScheme::default()).unwrap();
        assert_eq!(h.bin_count(), 64);
        assert_eq!(h.values()[3], 1.0);
        assert_eq!(h.values().iter().sum::<f64>(), 1.0);
        assert_eq!(h.pixel_total(), 16);
    }

    #[test]
    fn red_and_green() {
        let img = RasterImage::new(2, 1, vec![RED, GREEN]).unwrap();
        let h = build_histogram(&img, &QuantizationScheme::default()).unwrap();
        assert_eq!(h.values()[3], 0.5);
        assert_eq!(h.values()[23], 0.5);
        assert_eq!(h.values().iter().filter(|v| **v > 0.0).count(), 2);
    }

    #[test]
    fn include_v_layout() {
        let scheme = QuantizationScheme {
            include_v: true,
            ..Default::default()
        };
        let img = RasterImage::filled(1, 1, RED).unwrap();
        let h = build_histogram(&img, &scheme).unwrap();
        assert_eq!(h.bin_count(), 256);
        // h=0, s=3, v=3
        assert_eq!(h.values()[15], 1.0);
    }

    #[test]
    fn invalid_scheme() {
        let scheme = QuantizationScheme {
            s_bins: 0,
            ..Default::default()
        };
        let img = RasterImage::filled(1, 1, RED).unwrap();
        assert!(matches!(build_histogram(&img, &scheme), Err(Error::InvalidScheme(_))));
    }

    #[test]
    fn bhattacharyya_examples() {
        let p = two_bin([0.5, 0.5]);
        let q = two_bin([0.9, 0.1]);
        let s = bhattacharyya(&p, &q).unwrap();
        let expect = 0.45f64.sqrt() + 0.05f64.sqrt();
        assert!((s.coefficient - expect).abs() < 1e-12);
        assert!((s.coefficient - 0.8944).abs() < 1e-4);
        assert!((s.distance - 0.1116).abs() < 1e-4);

        let same = bhattacharyya(&p, &p).unwrap();
        assert_eq!((same.coefficient, same.distance, same.percent), (1.0, 0.0, 100.0));

        let a = two_bin([1.0, 0.0]);
        let b = two_bin([0.0, 1.0]);
        let d = bhattacharyya(&a, &b).unwrap();
        assert_eq!(d.coefficient, 0.0);
        assert!(d.distance.is_infinite() && d.distance > 0.0);
        assert_eq!(d.percent, 0.0);
    }

    #[test]
    fn infinite_distance_serializes() {
        let s = SimilarityScore::from_coefficient(0.0);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"distance\":\"inf\""), "{json}");
    }

    #[test]
    fn mismatched_schemes() {
        let img = RasterImage::filled(1, 1, RED).unwrap();
        let a = build_histogram(&img, &QuantizationScheme::default()).unwrap();
        let b = build_histogram(
            &img,
            &QuantizationScheme {
                include_v: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(bhattacharyya(&a, &b), Err(Error::BinMismatch));
        assert_eq!(merge_histograms(&[a, b], None), Err(Error::BinMismatch));
    }

    #[test]
    fn merge_examples() {
        let h = two_bin([0.25, 0.75]);
        assert_eq!(
            merge_histograms(std::slice::from_ref(&h), Some(&[1.0]))
                .unwrap()
                .values(),
            h.values()
        );

        let a = two_bin([1.0, 0.0]);
        let b = two_bin([0.0, 1.0]);
        let m = merge_histograms(&[a.clone(), b.clone()], Some(&[0.5, 0.5])).unwrap();
        assert_eq!(m.values(), &[0.5, 0.5]);

        assert!(matches!(
            merge_histograms(&[a.clone(), b.clone()], Some(&[0.7, 0.7])),
            Err(Error::BadWeights(_))
        ));
        assert!(matches!(
            merge_histograms(&[a, b], Some(&[1.5, -0.5])),
            Err(Error::BadWeights(_))
        ));
    }

    #[test]
    fn json_shape() {
        let h = two_bin([0.25, 0.75]);
        let v: serde_json::Value = serde_json::to_value(&h).unwrap();
        assert_eq!(v["scheme"]["hBins"], 2);
        assert_eq!(v["scheme"]["includeV"], false);
        assert_eq!(v["pixelTotal"], 0);
        assert_eq!(v["values"][1], 0.75);
        let back: ColorHistogram = serde_json::from_value(v).unwrap();
        assert_eq!(back, h);
    }

    fn arb_hist(bins: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0u32..1000, bins).prop_filter_map("non-zero", |c| {
            let total: u32 = c.iter().sum();
            (total > 0).then(|| c.iter().map(|&x| x as f64 / total as f64).collect())
        })
    }

    fn arb_image() -> impl Strategy<Value = RasterImage> {
        (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            prop::collection::vec(prop::array::uniform3(0u8..=255), w * h)
                .prop_map(move |px| RasterImage::new(w, h, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn coefficient_bounds_and_symmetry(p in arb_hist(16), q in arb_hist(16)) {
            let pq = bhattacharyya_coefficient(&p, &q).unwrap();
            let qp = bhattacharyya_coefficient(&q, &p).unwrap();
            prop_assert_eq!(pq.to_bits(), qp.to_bits());
            let s = SimilarityScore::from_coefficient(pq);
            prop_assert!((0.0..=1.0).contains(&s.coefficient));
            prop_assert!((bhattacharyya_coefficient(&p, &p).unwrap() - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn histogram_counts_are_exact(img in arb_image()) {
            let h = build_histogram(&img, &QuantizationScheme::default()).unwrap();
            prop_assert!((h.values().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            for v in h.values() {
                let c = v * h.pixel_total() as f64;
                prop_assert!((c - c.round()).abs() <= 1e-6);
            }
        }

        #[test]
        fn histogram_is_permutation_invariant(img in arb_image(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut px = img.pixels().to_vec();
            px.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = RasterImage::new(img.width(), img.height(), px).unwrap();
            let scheme = QuantizationScheme::default();
            let a = build_histogram(&img, &scheme).unwrap();
            let b = build_histogram(&shuffled, &scheme).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
