//! Aligned text tables for `--format table`.

use std::fmt::Write;

use camo_core::segment::Patch;
use camo_core::{EnvironmentReport, SimilarityScore, TextureComparison};

fn fmt_distance(d: f64) -> String {
    if d.is_infinite() {
        "inf".into()
    } else {
        format!("{d:.6}")
    }
}

pub fn similarity_table(rows: &[(String, SimilarityScore)]) -> String {
    let width = rows
        .iter()
        .map(|(n, _)| n.len())
        .max()
        .unwrap_or(0)
        .max("environment".len());
    let mut s = format!(
        "{:<width$}  {:>10}  {:>12}  {:>10}\n",
        "environment", "percent", "coefficient", "distance"
    );
    for (name, score) in rows {
        let _ = writeln!(
            s,
            "{name:<width$}  {:>10.4}  {:>12.9}  {:>10}",
            score.percent,
            score.coefficient,
            fmt_distance(score.distance)
        );
    }
    s
}

pub fn comparison_table(c: &TextureComparison) -> String {
    let mut s = format!(
        "{:<12}  {:>12}  {:>12}  {:>10}  {}\n",
        "feature", "camo", "background", "ratio", "same-order"
    );
    for f in &c.features {
        let ratio = f.ratio.map_or_else(|| "n/a".to_string(), |r| format!("{r:.4}"));
        let _ = writeln!(
            s,
            "{:<12}  {:>12.6}  {:>12.6}  {:>10}  {}",
            f.feature, f.first, f.second, ratio, f.same_order_of_magnitude
        );
    }
    s
}

pub fn patch_table(patches: &[Patch], inertia: f64, edge_pixels: usize) -> String {
    let mut s = format!(
        "patches: {}  inertia: {inertia:.6}  edge pixels: {edge_pixels}\n",
        patches.len()
    );
    let _ = writeln!(
        s,
        "{:>5}  {:>7}  {:>6}  {:<19}  mean color",
        "#", "cluster", "area", "bbox"
    );
    for (i, p) in patches.iter().enumerate() {
        let b = p.bounding_box;
        let bbox = format!("({},{})-({},{})", b.x0, b.y0, b.x1, b.y1);
        let _ = writeln!(
            s,
            "{i:>5}  {:>7}  {:>6}  {bbox:<19}  {:?}",
            p.cluster_id, p.area, p.mean_color
        );
    }
    s
}

pub fn design_table(rows: &[(String, &EnvironmentReport)]) -> String {
    let width = rows
        .iter()
        .map(|(n, _)| n.len())
        .max()
        .unwrap_or(0)
        .max("environment".len());
    let mut s = format!(
        "{:<width$}  {:>10}  {:>7}  {:>7}  {:>11}  {:>7}\n",
        "environment", "percent", "energy", "entropy", "correlation", "inertia"
    );
    for (name, r) in rows {
        let flag = |f: &str| {
            r.texture_comparison
                .get(f)
                .map_or("n/a", |c| if c.same_order_of_magnitude { "yes" } else { "no" })
        };
        let _ = writeln!(
            s,
            "{name:<width$}  {:>10.4}  {:>7}  {:>7}  {:>11}  {:>7}",
            r.similarity.percent,
            flag("energy"),
            flag("entropy"),
            flag("correlation"),
            flag("inertia")
        );
    }
    s
}
