//! The `mtquant` command-line tool. [`run`] executes one parsed command,
//! writes its files plus a `manifest.json` into the output directory and
//! returns the manifest.

pub mod args;
mod commands;
mod output;

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mtquant::io::{read_csv_metadata, read_points_csv, read_points_json};
use mtquant::{CenterRule, CenterSpec, ManifoldSpec, Point};
use serde_json::{json, Value};

pub use args::{Cli, Command};
use output::OutDir;

pub fn run(cli: &Cli) -> Result<Value> {
    let mut out = OutDir::new(&cli.global.out)?;
    let (name, summary) = match &cli.command {
        Command::Sample(a) => ("sample", commands::sample(&cli.global, a, &mut out)?),
        Command::Fit(a) => ("fit", commands::fit(&cli.global, a, &mut out)?),
        Command::Regress(a) => ("regress", commands::regress(&cli.global, a, &mut out)?),
        Command::Comets(a) => ("comets", commands::comets(&cli.global, a, &mut out)?),
        Command::Check(a) => ("check", commands::check(&cli.global, a, &mut out)?),
        Command::STau(a) => ("s-tau", commands::s_tau(&cli.global, a, &mut out)?),
    };
    let mut outputs = out.files.clone();
    outputs.push("manifest.json".into());
    let manifest = json!({
        "tool": "mtquant",
        "version": mtquant::VERSION,
        "command": name,
        "config": serde_json::to_value(cli)?,
        "outputs": outputs,
        "summary": summary,
    });
    out.write_json("manifest.json", &manifest)?;
    Ok(manifest)
}

pub(crate) fn parse_manifold(s: &str) -> Result<ManifoldSpec> {
    s.parse::<ManifoldSpec>().map_err(|e| anyhow!("bad manifold {s:?}: {e}"))
}

/// The manifold a preset lives on, unless `--manifold` overrides it.
pub(crate) fn preset_manifold(name: &str, flag: Option<&str>) -> Result<ManifoldSpec> {
    if let Some(m) = flag {
        return parse_manifold(m);
    }
    match name.chars().next() {
        Some('T') => Ok(ManifoldSpec::torus(2)),
        Some('S') => Ok(ManifoldSpec::sphere(2)),
        _ => bail!("preset {name:?} needs --manifold"),
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("not a number: {t:?}")))
        .collect()
}

pub(crate) fn parse_query(s: &str) -> Result<Vec<f64>> {
    let v = parse_floats(s)?;
    if v.is_empty() {
        bail!("empty query");
    }
    Ok(v)
}

/// Point from extrinsic coordinates, or from angles on a torus.
fn parse_point(spec: &ManifoldSpec, s: &str) -> Result<Point> {
    let v = parse_floats(s)?;
    if spec.is_torus() && v.len() == spec.num_factors() {
        return Ok(spec.point_from_angles(&v)?);
    }
    Ok(spec.point(v)?)
}

/// `cap`, `strip[:k]`, `polycap[:k]`, `pole:<coords>` or `equator:<k>:<angle>`.
pub(crate) fn parse_center(spec: &ManifoldSpec, s: &str) -> Result<CenterRule<f64>> {
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    let factor = |r: &str| -> Result<usize> {
        if r.is_empty() {
            Ok(0)
        } else {
            r.parse().with_context(|| format!("bad factor index {r:?}"))
        }
    };
    let rule = match head {
        "cap" => CenterRule::FrechetCap,
        "strip" => CenterRule::FrechetStrip(factor(rest)?),
        "polycap" => CenterRule::FrechetPolyCap(factor(rest)?),
        "pole" => CenterRule::FixedCenter(CenterSpec::Cap { pole: parse_point(spec, rest)? }),
        "equator" => {
            let (k, a) = rest.split_once(':').ok_or_else(|| anyhow!("equator needs <factor>:<angle>"))?;
            let angle: f64 = a.parse().with_context(|| format!("bad angle {a:?}"))?;
            CenterRule::FixedCenter(CenterSpec::TorusEquator { component: factor(k)?, angle })
        }
        _ => bail!("unknown center {s:?}"),
    };
    Ok(rule)
}

/// Points from a JSON record or a CSV whose manifold comes from `--manifold`
/// or a `# manifold=` metadata line.
pub(crate) fn load_points(path: &Path, flag: Option<&str>) -> Result<(ManifoldSpec, Vec<Point>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let (spec, pts) = read_points_json(text.as_bytes())?;
        if let Some(m) = flag {
            let want = parse_manifold(m)?;
            if want != spec {
                bail!("{} holds points on {spec}, not {want}", path.display());
            }
        }
        return Ok((spec, pts));
    }
    let spec = match flag {
        Some(m) => parse_manifold(m)?,
        None => {
            let meta = read_csv_metadata(&text);
            let m = meta
                .iter()
                .find(|(k, _)| k == "manifold")
                .ok_or_else(|| anyhow!("{} has no manifold metadata; pass --manifold", path.display()))?;
            parse_manifold(&m.1)?
        }
    };
    let pts = read_points_csv(text.as_bytes(), &spec)?;
    Ok((spec, pts))
}

/// Requested orders, or every valid order when none are given.
pub(crate) fn orders(requested: &[usize], n0: usize, n_r: usize) -> Result<Vec<usize>> {
    if requested.is_empty() {
        return Ok((if n0 == 0 { 1 } else { 0 }..=n_r).collect());
    }
    for &r in requested {
        if r > n_r || (r == 0 && n0 == 0) {
            bail!("contour order {r} outside the grid (nR = {n_r}, n0 = {n0})");
        }
    }
    Ok(requested.to_vec())
}
