use std::collections::HashSet;
use std::fs::File;
use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use mtquant::geometry::wrap_angle;
use mtquant::io::{coord_headers, write_csv_metadata};
use mtquant::{CenterRule, FitOptions, ManifoldSpec, Point};
use serde_json::{json, Value};

use super::fit::fit_and_write;
use crate::args::{CometsArgs, Global};
use crate::output::OutDir;

pub struct CometRow {
    pub name: Option<String>,
    /// Argument of perihelion, radians in `[-pi, pi)`.
    pub omega: f64,
    /// Longitude of the ascending node, radians in `[-pi, pi)`.
    pub node: f64,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CometCounts {
    pub rows: usize,
    pub missing: usize,
    pub duplicates: usize,
}

fn is_missing(s: &str) -> bool {
    let t = s.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan") || t.eq_ignore_ascii_case("null")
}

/// Usable rows in file order. Rows lacking either angle are skipped, as are
/// repeats of an angle pair already seen.
pub fn read_comets(path: &std::path::Path, om_col: &str, w_col: &str, name_col: &str) -> Result<(Vec<CometRow>, CometCounts)> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).comment(Some(b'#')).from_reader(f);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let om = col(om_col).ok_or_else(|| anyhow!("{} has no column {om_col:?}", path.display()))?;
    let w = col(w_col).ok_or_else(|| anyhow!("{} has no column {w_col:?}", path.display()))?;
    let name = col(name_col);
    let mut rows = Vec::new();
    let mut counts = CometCounts::default();
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        counts.rows += 1;
        let (a, b) = (rec.get(om).unwrap_or(""), rec.get(w).unwrap_or(""));
        if is_missing(a) || is_missing(b) {
            counts.missing += 1;
            continue;
        }
        let deg = |s: &str, c: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().with_context(|| format!("row {}: {c} = {s:?} is not a number", i + 1))?;
            if !v.is_finite() {
                bail!("row {}: {c} = {s:?} is not finite", i + 1);
            }
            Ok(v)
        };
        let (node_deg, omega_deg) = (deg(a, om_col)?, deg(b, w_col)?);
        if !seen.insert((node_deg.to_bits(), omega_deg.to_bits())) {
            counts.duplicates += 1;
            continue;
        }
        rows.push(CometRow {
            name: name.and_then(|k| rec.get(k)).map(|s| s.trim().to_string()),
            omega: wrap_angle(omega_deg.to_radians()),
            node: wrap_angle(node_deg.to_radians()),
        });
    }
    Ok((rows, counts))
}

fn factorization(v: &[usize], what: &str) -> Result<(usize, usize, usize)> {
    match v {
        [a, b, c] => Ok((*a, *b, *c)),
        _ => bail!("--{what} takes n0,nR,nS"),
    }
}

pub fn comets(g: &Global, a: &CometsArgs, out: &mut OutDir) -> Result<Value> {
    let (rows, counts) = read_comets(&a.input, &a.om_col, &a.w_col, &a.name_col)?;
    let spec = ManifoldSpec::torus(2);
    let pts: Vec<Point> =
        rows.iter().map(|r| spec.point_from_angles(&[r.omega, r.node])).collect::<Result<_, _>>()?;

    let mut w = out.create("comets.csv")?;
    write_csv_metadata(&mut w, &[("manifold", spec.to_string()), ("source", a.input.display().to_string())])?;
    let mut table = csv::Writer::from_writer(&mut w);
    let mut header = vec!["index".to_string(), "name".to_string()];
    header.extend(coord_headers(&spec));
    header.extend(["phi0", "phi1", "omega_deg", "Omega_deg"].map(String::from));
    table.write_record(&header)?;
    for (i, (r, p)) in rows.iter().zip(&pts).enumerate() {
        let mut rec = vec![i.to_string(), r.name.clone().unwrap_or_default()];
        rec.extend(p.coords().iter().map(|x| format!("{x:?}")));
        rec.extend([r.omega, r.node, r.omega.to_degrees(), r.node.to_degrees()].map(|x| format!("{x:?}")));
        table.write_record(&rec)?;
    }
    table.flush()?;
    drop(table);
    w.flush()?;

    let mut fits = serde_json::Map::new();
    let mut cap_core = Vec::new();
    for (label, fac, rule) in [
        ("cap", &a.cap, CenterRule::FrechetCap),
        ("strip", &a.strip, CenterRule::FrechetStrip(0)),
    ] {
        let (n0, nr, ns) = factorization(fac, label)?;
        let n = n0 + nr * ns;
        if pts.len() < n {
            bail!("{label} fit needs {n} usable rows, found {}", pts.len());
        }
        let opts = FitOptions::new(n0, nr, ns).center(rule).seed(g.seed);
        let (fit, summary) = fit_and_write(g, &spec, &pts[..n], &opts, &a.contours, &format!("{label}/"), out)?;
        if label == "cap" && n0 > 0 {
            cap_core = fit.ordered_contour(0)?.iter().map(|&i| rows[i].omega).collect();
        }
        fits.insert(label.to_string(), summary);
    }
    Ok(json!({
        "rows": counts.rows,
        "dropped_missing": counts.missing,
        "dropped_duplicate": counts.duplicates,
        "usable": rows.len(),
        "cap_r0_omega": cap_core,
        "fits": fits,
    }))
}
