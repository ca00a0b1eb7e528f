use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use camo_core::color_hist::{bhattacharyya, build_histogram, merge_histograms, ColorHistogram};
use camo_core::fixtures::{generate_fixture, standard_fixtures};
use camo_core::image::{encode_gray_png, encode_indexed_png, hsv_to_rgb};
use camo_core::segment::{extract_edges, extract_patches, kmeans_segment, ColorSpace, Feature};
use camo_core::synth::{dominant_palette, evaluate_design, render_pattern};
use camo_core::texture::{texture_compare, texture_vector, TextureRecord, TextureVector};
use camo_core::{Error as CoreError, HsvPixel, RasterImage, Rgb};
use serde_json::{json, Value};

use crate::args::{
    resolve_format, resolve_glcm, resolve_kmeans, resolve_min_area, resolve_scheme, resolve_seed, ConfigFile,
    DesignArgs, EvaluateArgs, FixturesArgs, Format, SegmentArgs,
};
use crate::error::CliError;
use crate::output::{to_json_bytes, RunManifest, StagedOutputs, SCHEMA_VERSION};
use crate::report;

pub const DESIGN_MIN_AREA: usize = 16;

pub fn load_image(path: &Path) -> Result<RasterImage, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    RasterImage::decode_png(&bytes).map_err(|e| CliError::Decode(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn histogram_json(h: &ColorHistogram) -> Value {
    let mut v = serde_json::to_value(h).expect("histogram serializes");
    v["schemaVersion"] = json!(SCHEMA_VERSION);
    v
}

fn finish(outputs: Option<StagedOutputs>, manifest: &mut RunManifest) -> Result<(), CliError> {
    if let Some(out) = outputs {
        manifest.outputs = out.commit()?.iter().map(|p| p.display().to_string()).collect();
    }
    Ok(())
}

pub fn evaluate_color(args: &EvaluateArgs, manifest: &mut RunManifest) -> Result<String, CliError> {
    let file = ConfigFile::load(args.common.config.as_deref())?;
    let scheme = resolve_scheme(&args.scheme, &file)?;
    let format = resolve_format(&args.common, &file);
    manifest.config = json!({ "scheme": scheme, "emitHistograms": args.emit_histograms, "format": format });

    let camo = load_image(&args.camo)?;
    let background = load_image(&args.background)?;
    let hc = build_histogram(&camo, &scheme)?;
    let hb = build_histogram(&background, &scheme)?;
    let score = bhattacharyya(&hc, &hb)?;

    let mut outputs = None;
    if args.emit_histograms {
        let dir = args.common.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        let mut out = StagedOutputs::new(&dir);
        out.write_json("camo_histogram.json", &histogram_json(&hc))?;
        out.write_json("background_histogram.json", &histogram_json(&hb))?;
        outputs = Some(out);
    }
    finish(outputs, manifest)?;

    let score_json = serde_json::to_value(score).expect("score serializes");
    let report = json!({
        "schemaVersion": SCHEMA_VERSION,
        "camo": args.camo.display().to_string(),
        "background": args.background.display().to_string(),
        "percent": score_json["percent"],
        "coefficient": score_json["coefficient"],
        "distance": score_json["distance"],
    });
    Ok(match format {
        Format::Json => pretty(&report),
        Format::Table => report::similarity_table(&[(stem(&args.background), score)]),
    })
}

pub fn evaluate_texture(args: &EvaluateArgs, manifest: &mut RunManifest) -> Result<String, CliError> {
    let file = ConfigFile::load(args.common.config.as_deref())?;
    let glcm = resolve_glcm(&args.glcm, &file)?;
    let format = resolve_format(&args.common, &file);
    manifest.config = json!({ "glcm": glcm, "format": format });

    let camo = load_image(&args.camo)?;
    let background = load_image(&args.background)?;
    let vc = texture_vector(&camo, &glcm)?;
    let vb = texture_vector(&background, &glcm)?;
    let comparison = texture_compare(&vc, &vb);
    let csv = format!(
        "{}\n{}\n{}\n",
        TextureVector::CSV_HEADER,
        vc.to_csv_row(),
        vb.to_csv_row()
    );

    let mut outputs = None;
    if let Some(dir) = &args.common.out_dir {
        let mut out = StagedOutputs::new(dir);
        out.write("texture.csv", csv.as_bytes())?;
        let record = |v: TextureVector| TextureRecord {
            config: glcm.clone(),
            vector: v,
        };
        out.write_json(
            "camo_texture.json",
            &json!({ "schemaVersion": SCHEMA_VERSION, "texture": record(vc) }),
        )?;
        out.write_json(
            "background_texture.json",
            &json!({ "schemaVersion": SCHEMA_VERSION, "texture": record(vb) }),
        )?;
        out.write_json(
            "texture_compare.json",
            &json!({ "schemaVersion": SCHEMA_VERSION, "comparison": comparison }),
        )?;
        outputs = Some(out);
    }
    finish(outputs, manifest)?;

    Ok(match format {
        Format::Json => pretty(&json!({
            "schemaVersion": SCHEMA_VERSION,
            "camo": { "path": args.camo.display().to_string(), "csv": vc.to_csv_row(), "vector": vc },
            "background": { "path": args.background.display().to_string(), "csv": vb.to_csv_row(), "vector": vb },
            "config": glcm,
            "comparison": comparison,
        })),
        Format::Table => format!("{csv}\n{}", report::comparison_table(&comparison)),
    })
}

/// Display color of a cluster centre.
fn centroid_color(c: &Feature, space: ColorSpace) -> Rgb {
    match space {
        ColorSpace::Rgb => c.map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8),
        ColorSpace::Hsv => {
            let s = (c[0] * c[0] + c[1] * c[1]).sqrt().min(1.0);
            let h = c[1].atan2(c[0]).to_degrees().rem_euclid(360.0);
            hsv_to_rgb(HsvPixel {
                h,
                s,
                v: c[2].clamp(0.0, 1.0),
            })
        }
    }
}

pub fn segment(args: &SegmentArgs, manifest: &mut RunManifest) -> Result<String, CliError> {
    let file = ConfigFile::load(args.common.config.as_deref())?;
    let kmeans = resolve_kmeans(&args.kmeans, &file)?;
    let min_area = resolve_min_area(&args.kmeans, &file, 1)?;
    let format = resolve_format(&args.common, &file);
    manifest.config = json!({ "kmeans": kmeans, "minArea": min_area, "format": format });

    let image = load_image(&args.background)?;
    let map = kmeans_segment(&image, &kmeans)?;
    let edges = extract_edges(&map);
    let patches = extract_patches(&map, &image, min_area)?;

    let dir = args.common.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut out = StagedOutputs::new(&dir);
    let palette: Vec<Rgb> = map
        .centroids
        .iter()
        .map(|c| centroid_color(c, kmeans.color_space))
        .collect();
    out.write(
        "labels.png",
        &encode_indexed_png(map.width, map.height, &palette, &map.labels),
    )?;
    out.write(
        "edges.png",
        &encode_gray_png(edges.width, edges.height, &edges.to_samples()),
    )?;
    out.write_json(
        "labels.json",
        &json!({
            "schemaVersion": SCHEMA_VERSION,
            "width": map.width,
            "height": map.height,
            "k": kmeans.k,
            "seed": kmeans.seed,
            "colorSpace": kmeans.color_space,
            "restarts": kmeans.restarts,
            "maxIterations": kmeans.max_iterations,
            "tolerance": kmeans.tolerance,
            "centroids": map.centroids,
            "inertia": map.inertia,
        }),
    )?;
    out.write_json(
        "patches.json",
        &json!({ "schemaVersion": SCHEMA_VERSION, "minArea": min_area, "patches": patches }),
    )?;
    finish(Some(out), manifest)?;

    let edge_count = edges.edges.iter().filter(|&&e| e).count();
    Ok(match format {
        Format::Json => pretty(&json!({
            "schemaVersion": SCHEMA_VERSION,
            "background": args.background.display().to_string(),
            "k": kmeans.k,
            "inertia": map.inertia,
            "patchCount": patches.len(),
            "edgePixels": edge_count,
            "outputs": manifest.outputs,
        })),
        Format::Table => report::patch_table(&patches, map.inertia, edge_count),
    })
}

fn unique_names(paths: &[PathBuf]) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    paths
        .iter()
        .map(|p| {
            let base = stem(p);
            let n = seen.entry(base.clone()).or_insert(0);
            *n += 1;
            if *n == 1 {
                base
            } else {
                format!("{base}_{n}")
            }
        })
        .collect()
}

fn pick_donor(requested: Option<&str>, paths: &[PathBuf], names: &[String]) -> Result<usize, CliError> {
    match requested {
        Some(r) => names
            .iter()
            .position(|n| n == r)
            .or_else(|| paths.iter().position(|p| p == Path::new(r)))
            .ok_or_else(|| CliError::Config(format!("--donor '{r}' matches no background"))),
        None => Ok(names.iter().position(|n| n.contains("woodland")).unwrap_or(0)),
    }
}

pub fn design(args: &DesignArgs, manifest: &mut RunManifest) -> Result<String, CliError> {
    let file = ConfigFile::load(args.common.config.as_deref())?;
    let scheme = resolve_scheme(&args.scheme, &file)?;
    let glcm = resolve_glcm(&args.glcm, &file)?;
    let kmeans = resolve_kmeans(&args.kmeans, &file)?;
    let min_area = resolve_min_area(&args.kmeans, &file, DESIGN_MIN_AREA)?;
    let seed = resolve_seed(args.kmeans.seed, &file)?;
    let format = resolve_format(&args.common, &file);
    let names = unique_names(&args.backgrounds);
    let donor = pick_donor(
        args.donor.as_deref().or(file.donor.as_deref()),
        &args.backgrounds,
        &names,
    )?;
    let explicit_palette = args.palette_size.or(file.palette_size);
    let mut config = json!({
        "scheme": scheme,
        "glcm": glcm,
        "kmeans": kmeans,
        "minArea": min_area,
        "seed": seed,
        "donor": names[donor],
        "paletteSize": explicit_palette.unwrap_or(5),
        "format": format,
    });
    manifest.config = config.clone();

    let images = args
        .backgrounds
        .iter()
        .map(|p| load_image(p))
        .collect::<Result<Vec<_>, _>>()?;
    let histograms = images
        .iter()
        .map(|img| build_histogram(img, &scheme))
        .collect::<Result<Vec<_>, _>>()?;
    let merged = merge_histograms(&histograms, None)?;

    // The default palette size shrinks to the number of occupied bins; an
    // explicit size that cannot be met is an error.
    let occupied = merged.values().iter().filter(|v| **v > 0.0).count();
    let palette_size = match explicit_palette {
        Some(n) => n,
        None => 5.min(occupied),
    };
    let palette = dominant_palette(&merged, &images, palette_size)?;
    config["paletteSize"] = json!(palette_size);

    let donor_image = &images[donor];
    let map = kmeans_segment(donor_image, &kmeans)?;
    let patches = extract_patches(&map, donor_image, min_area)?;
    let width = args.width.or(file.width).unwrap_or(donor_image.width());
    let height = args.height.or(file.height).unwrap_or(donor_image.height());
    if width == 0 || height == 0 {
        return Err(CliError::Config("--width and --height must be >= 1".into()));
    }
    config["width"] = json!(width);
    config["height"] = json!(height);
    manifest.config = config.clone();
    let pattern = render_pattern(&patches, &palette, width, height, seed).map_err(|e| match e {
        CoreError::NoPatches => CliError::Config(format!("no patch reaches --min-area {min_area}")),
        other => other.into(),
    })?;
    let reports = evaluate_design(&pattern.image, &images, &scheme, &glcm)?;

    let dir = args.common.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut out = StagedOutputs::new(&dir);
    out.write("pattern.png", &pattern.image.encode_png())?;
    out.write_json(
        "pattern.json",
        &json!({
            "schemaVersion": SCHEMA_VERSION,
            "paletteSize": palette.len(),
            "palette": palette.entries,
            "donor": names[donor],
            "seed": seed,
            "width": width,
            "height": height,
            "patchCount": pattern.provenance.patch_count,
            "patchColors": pattern.provenance.patch_colors,
            "minArea": min_area,
            "scheme": scheme,
            "glcmConfig": glcm,
            "kmeans": kmeans,
        }),
    )?;
    let environments: Vec<Value> = reports
        .iter()
        .zip(&names)
        .zip(&args.backgrounds)
        .map(|((r, name), path)| {
            let mut v = serde_json::to_value(r).expect("report serializes");
            v["name"] = json!(name);
            v["path"] = json!(path.display().to_string());
            v
        })
        .collect();
    let report_json = json!({ "schemaVersion": SCHEMA_VERSION, "environments": environments });
    out.write_json("report.json", &report_json)?;
    let rows: Vec<(String, &camo_core::EnvironmentReport)> = names.iter().cloned().zip(&reports).collect();
    let table = report::design_table(&rows);
    out.write("summary.txt", table.as_bytes())?;
    if args.emit_histograms {
        let pattern_hist = build_histogram(&pattern.image, &scheme)?;
        out.write_json("histograms/pattern.json", &histogram_json(&pattern_hist))?;
        for (h, name) in histograms.iter().zip(&names) {
            out.write_json(&format!("histograms/{name}.json"), &histogram_json(h))?;
        }
    }
    finish(Some(out), manifest)?;

    Ok(match format {
        Format::Json => pretty(&report_json),
        Format::Table => table,
    })
}

pub fn fixtures(args: &FixturesArgs, manifest: &mut RunManifest) -> Result<String, CliError> {
    let specs = standard_fixtures();
    manifest.config = json!({ "fixtures": specs.iter().map(|s| &s.name).collect::<Vec<_>>() });
    let mut out = StagedOutputs::new(&args.out_dir);
    out.write("specs.json", &to_json_bytes(&specs)?)?;
    for spec in &specs {
        let img = generate_fixture(spec)?;
        out.write(&format!("{}.png", spec.name), &img.encode_png())?;
    }
    finish(Some(out), manifest)?;
    Ok(manifest.outputs.join("\n") + "\n")
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}
