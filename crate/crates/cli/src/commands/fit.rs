use std::io::Write;

use anyhow::{bail, Result};
use mtquant::io::{split_factors, write_fit_csv, write_fit_json, write_points_csv, CenterRecord};
use mtquant::presets::preset;
use mtquant::{fit_quantiles, FitOptions, ManifoldSpec, Point};
use serde_json::{json, Value};

use crate::args::{FitArgs, Format, Global, GridArgs};
use crate::output::OutDir;
use crate::{load_points, orders, parse_center, preset_manifold};

pub(crate) fn fit_options(spec: &ManifoldSpec, g: &GridArgs, seed: u64) -> Result<FitOptions<f64>> {
    let mut opts = FitOptions::new(g.n0, g.nr, g.ns).center(parse_center(spec, &g.center)?).seed(seed);
    if let Some(m) = g.mode {
        opts = opts.mode(m.into());
    }
    Ok(opts)
}

/// Fits `pts`, writes `fit.json`, `ranks.csv` (CSV format) and the contours under `prefix`.
pub(crate) fn fit_and_write(
    global: &Global,
    spec: &ManifoldSpec,
    pts: &[Point],
    opts: &FitOptions<f64>,
    contours: &[usize],
    prefix: &str,
    out: &mut OutDir,
) -> Result<(mtquant::Fit, Value)> {
    let fit = fit_quantiles(spec, pts, opts)?;
    let mut w = out.create(&format!("{prefix}fit.json"))?;
    write_fit_json(&mut w, &fit)?;
    w.flush()?;
    if global.format == Format::Csv {
        let mut w = out.create(&format!("{prefix}ranks.csv"))?;
        write_fit_csv(&mut w, &fit)?;
        w.flush()?;
    }
    let meta = [
        ("manifold", spec.to_string()),
        ("seed", opts.seed.to_string()),
        ("n0", opts.n0.to_string()),
        ("nR", opts.n_r.to_string()),
        ("nS", opts.n_s.to_string()),
    ];
    let mut files = Vec::new();
    for r in orders(contours, opts.n0, opts.n_r)? {
        let idx = fit.ordered_contour(r)?;
        files.push(out.contour(prefix, global.format, spec, r, fit.grid.tau(r), &idx, pts, &meta)?);
    }
    let f = |p: &Point| split_factors(spec, p.coords());
    let summary = json!({
        "manifold": spec.to_string(),
        "n": pts.len(),
        "n0": opts.n0,
        "nR": opts.n_r,
        "nS": opts.n_s,
        "mode": fit.grid.mode,
        "center": CenterRecord::from_center(spec, &fit.center),
        "theta": fit.theta.as_ref().map(f),
        "pole_image": fit.pole_image.as_ref().map(f),
        "objective": fit.objective,
        "rank_counts": fit.rank_counts(),
        "contours": files,
    });
    Ok((fit, summary))
}

pub fn fit(g: &Global, a: &FitArgs, out: &mut OutDir) -> Result<Value> {
    let (spec, pts, source) = match (&a.input, &a.preset) {
        (Some(path), _) => {
            let (spec, pts) = load_points(path, g.manifold.as_deref())?;
            (spec, pts, json!({ "input": path }))
        }
        (None, Some(name)) => {
            let spec = preset_manifold(name, g.manifold.as_deref())?;
            let n = a.n.unwrap_or(a.grid.n0 + a.grid.nr * a.grid.ns);
            let pts: Vec<Point> = preset(name, &spec)?.sample(n, g.seed);
            let mut w = out.create("sample.csv")?;
            write_points_csv(&mut w, &spec, &pts)?;
            w.flush()?;
            (spec, pts, json!({ "preset": name, "seed": g.seed }))
        }
        (None, None) => bail!("fit needs --input or --preset"),
    };
    let opts = fit_options(&spec, &a.grid, g.seed)?;
    let (_, mut summary) = fit_and_write(g, &spec, &pts, &opts, &a.grid.contours, "", out)?;
    summary["source"] = source;
    Ok(summary)
}
