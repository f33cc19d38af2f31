use std::io::Write;

use anyhow::Result;
use mtquant::io::{write_csv_metadata, write_points_csv, PointsRecord};
use mtquant::presets::preset;
use mtquant::Point;
use serde_json::{json, Value};

use crate::args::{Format, Global, SampleArgs};
use crate::output::OutDir;
use crate::preset_manifold;

pub fn sample(g: &Global, a: &SampleArgs, out: &mut OutDir) -> Result<Value> {
    let spec = preset_manifold(&a.preset, g.manifold.as_deref())?;
    let law = preset(&a.preset, &spec)?;
    let (pts, stats) = law.sample_with_stats::<f64>(a.n, g.seed);
    let rel = format!("sample.{}", g.format.ext());
    let mut w = out.create(&rel)?;
    match g.format {
        Format::Csv => {
            write_csv_metadata(
                &mut w,
                &[
                    ("manifold", spec.to_string()),
                    ("preset", a.preset.clone()),
                    ("seed", g.seed.to_string()),
                    ("n", a.n.to_string()),
                ],
            )?;
            write_points_csv(&mut w, &spec, &pts)?;
        }
        Format::Json => {
            let mut rec = PointsRecord::new(&spec, &pts);
            rec.preset = Some(a.preset.clone());
            rec.seed = Some(g.seed);
            serde_json::to_writer(&mut w, &rec)?;
        }
    }
    w.flush()?;
    Ok(json!({
        "manifold": spec.to_string(),
        "preset": a.preset,
        "n": pts.len(),
        "file": rel,
        "acceptance_rate": stats.acceptance_rate(),
        "first": pts.first().map(Point::to_f64),
    }))
}
