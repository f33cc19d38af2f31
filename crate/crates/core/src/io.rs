//! CSV and JSON readers and writers for points, plans, fits and contours.
//!
//! Point columns are named `y{factor}_{coordinate}`. Point CSVs may instead
//! carry one angle column `phi{factor}` per circle factor.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, ManifoldPoint, ManifoldSpec};
use crate::quantile::{CenterSpec, GridMode, QuantileFit};
use crate::transport::Coupling;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Format(String),
}

type Result<T> = std::result::Result<T, IoError>;

pub fn coord_headers(spec: &ManifoldSpec) -> Vec<String> {
    let mut h = Vec::with_capacity(spec.ambient_dim());
    for (f, &p) in spec.dims().iter().enumerate() {
        for c in 0..=p {
            h.push(format!("y{f}_{c}"));
        }
    }
    h
}

fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn parse(s: &str, row: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| IoError::Format(format!("row {row}: cannot parse {s:?} as a number")))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r)
}

/// Writes `# key=value` metadata lines ahead of a CSV body.
pub fn write_csv_metadata<W: Write>(w: &mut W, meta: &[(&str, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Reads the `# key=value` lines at the top of a CSV.
pub fn read_csv_metadata(text: &str) -> Vec<(String, String)> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l[1..].trim().split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

/// Splits flat coordinates into one array per factor.
pub fn split_factors(spec: &ManifoldSpec, v: &[f64]) -> Vec<Vec<f64>> {
    (0..spec.num_factors()).map(|k| v[spec.factor_range(k)].to_vec()).collect()
}

/// Inverse of [`split_factors`], checking the factor shapes.
pub fn join_factors(spec: &ManifoldSpec, v: &[Vec<f64>]) -> Result<Vec<f64>> {
    if v.len() != spec.num_factors() || v.iter().zip(spec.dims()).any(|(f, &p)| f.len() != p + 1) {
        return Err(IoError::Format(format!("point does not have the factor shapes of {spec}")));
    }
    Ok(v.concat())
}

fn nested(spec: &ManifoldSpec, pts: &[ManifoldPoint<f64>]) -> Vec<Vec<Vec<f64>>> {
    pts.iter().map(|p| split_factors(spec, p.coords())).collect()
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

pub fn write_points_csv<W: Write>(w: W, spec: &ManifoldSpec, points: &[ManifoldPoint<f64>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(coord_headers(spec))?;
    for p in points {
        out.write_record(p.coords().iter().map(|x| fmt(*x)))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads ambient coordinates, or angles when every factor is a circle and
/// `phi*` columns are present. Points are renormalized.
pub fn read_points_csv<R: Read>(r: R, spec: &ManifoldSpec) -> Result<Vec<ManifoldPoint<f64>>> {
    let mut rdr = reader(r);
    let headers = rdr.headers()?.clone();
    let coords: Option<Vec<usize>> = coord_headers(spec).iter().map(|h| column(&headers, h)).collect();
    let angles: Option<Vec<usize>> = if spec.is_torus() {
        (0..spec.num_factors()).map(|f| column(&headers, &format!("phi{f}"))).collect()
    } else {
        None
    };
    let (cols, as_angles) = match (coords, angles) {
        (Some(c), _) => (c, false),
        (None, Some(a)) => (a, true),
        _ => {
            return Err(IoError::Format(format!(
                "missing coordinate columns {:?} for {spec}",
                coord_headers(spec)
            )))
        }
    };
    let mut pts = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let v: Vec<f64> = cols
            .iter()
            .map(|&c| parse(rec.get(c).unwrap_or(""), row + 1))
            .collect::<Result<_>>()?;
        pts.push(if as_angles { spec.point_from_angles(&v)? } else { spec.point(v)? });
    }
    Ok(pts)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointsRecord {
    pub manifold: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// One array per point, holding one coordinate array per factor.
    pub points: Vec<Vec<Vec<f64>>>,
}

impl PointsRecord {
    pub fn new(spec: &ManifoldSpec, points: &[ManifoldPoint<f64>]) -> Self {
        PointsRecord { manifold: spec.to_string(), preset: None, seed: None, points: nested(spec, points) }
    }

    pub fn decode(&self) -> Result<(ManifoldSpec, Vec<ManifoldPoint<f64>>)> {
        let spec: ManifoldSpec = self.manifold.parse()?;
        let pts = self
            .points
            .iter()
            .map(|v| Ok(spec.point(join_factors(&spec, v)?)?))
            .collect::<Result<_>>()?;
        Ok((spec, pts))
    }
}

pub fn write_points_json<W: Write>(w: W, spec: &ManifoldSpec, points: &[ManifoldPoint<f64>]) -> Result<()> {
    serde_json::to_writer_pretty(w, &PointsRecord::new(spec, points))?;
    Ok(())
}

pub fn read_points_json<R: Read>(r: R) -> Result<(ManifoldSpec, Vec<ManifoldPoint<f64>>)> {
    let rec: PointsRecord = serde_json::from_reader(r)?;
    rec.decode()
}

/// `row,col` pairs of a permutation.
pub fn write_assignment_csv<W: Write>(w: W, perm: &[usize]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["row", "col"])?;
    for (i, j) in perm.iter().enumerate() {
        out.write_record([i.to_string(), j.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_assignment_csv<R: Read>(r: R) -> Result<Vec<usize>> {
    let mut rdr = reader(r);
    let mut pairs = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let i = parse(rec.get(0).unwrap_or(""), row + 1)? as usize;
        let j = parse(rec.get(1).unwrap_or(""), row + 1)? as usize;
        pairs.push((i, j));
    }
    let mut perm = vec![usize::MAX; pairs.len()];
    for (i, j) in pairs {
        if i >= perm.len() || perm[i] != usize::MAX {
            return Err(IoError::Format(format!("row index {i} repeated or out of range")));
        }
        perm[i] = j;
    }
    Ok(perm)
}

/// Nonzero entries of a coupling as `row,col,mass` triples.
pub fn write_coupling_csv<W: Write>(w: W, plan: &Coupling<f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["row", "col", "mass"])?;
    for &(i, j, m) in &plan.entries {
        out.write_record([i.to_string(), j.to_string(), fmt(m)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_coupling_csv<R: Read>(r: R) -> Result<Vec<(usize, usize, f64)>> {
    let mut rdr = reader(r);
    let mut v = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |k: usize| parse(rec.get(k).unwrap_or(""), row + 1);
        v.push((get(0)? as usize, get(1)? as usize, get(2)?));
    }
    Ok(v)
}

pub fn write_assignment_json<W: Write>(w: W, perm: &[usize]) -> Result<()> {
    serde_json::to_writer(w, perm)?;
    Ok(())
}

pub fn read_assignment_json<R: Read>(r: R) -> Result<Vec<usize>> {
    Ok(serde_json::from_reader(r)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRecord {
    pub rows: usize,
    pub cols: usize,
    pub objective: f64,
    pub entries: Vec<(usize, usize, f64)>,
}

pub fn write_coupling_json<W: Write>(w: W, plan: &Coupling<f64>) -> Result<()> {
    let rec = CouplingRecord { rows: plan.rows, cols: plan.cols, objective: plan.objective, entries: plan.entries.clone() };
    serde_json::to_writer(w, &rec)?;
    Ok(())
}

pub fn read_coupling_json<R: Read>(r: R) -> Result<CouplingRecord> {
    Ok(serde_json::from_reader(r)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CenterRecord {
    Cap { pole: Vec<Vec<f64>> },
    Strip { factor: usize, center: Vec<Vec<f64>> },
    TorusEquator { component: usize, angle: f64 },
    PolyCap { factor: usize, pole: Vec<Vec<f64>> },
}

impl CenterRecord {
    pub fn from_center(spec: &ManifoldSpec, c: &CenterSpec<f64>) -> Self {
        let f = |p: &ManifoldPoint<f64>| split_factors(spec, p.coords());
        match c {
            CenterSpec::Cap { pole } => CenterRecord::Cap { pole: f(pole) },
            CenterSpec::Strip { factor, center } => CenterRecord::Strip { factor: *factor, center: f(center) },
            CenterSpec::TorusEquator { component, angle } => {
                CenterRecord::TorusEquator { component: *component, angle: *angle }
            }
            CenterSpec::PolyCap { factor, pole } => CenterRecord::PolyCap { factor: *factor, pole: f(pole) },
        }
    }

    pub fn to_center(&self, spec: &ManifoldSpec) -> Result<CenterSpec<f64>> {
        let p = |v: &[Vec<f64>]| -> Result<ManifoldPoint<f64>> { Ok(spec.point(join_factors(spec, v)?)?) };
        Ok(match self {
            CenterRecord::Cap { pole } => CenterSpec::Cap { pole: p(pole)? },
            CenterRecord::Strip { factor, center } => CenterSpec::Strip { factor: *factor, center: p(center)? },
            CenterRecord::TorusEquator { component, angle } => {
                CenterSpec::TorusEquator { component: *component, angle: *angle }
            }
            CenterRecord::PolyCap { factor, pole } => CenterSpec::PolyCap { factor: *factor, pole: p(pole)? },
        })
    }
}

/// Everything a fit produced, in plain vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub manifold: String,
    pub n0: usize,
    pub n_r: usize,
    pub n_s: usize,
    pub mode: GridMode,
    pub center: CenterRecord,
    pub theta: Option<Vec<Vec<f64>>>,
    pub pole_image: Option<Vec<Vec<f64>>>,
    pub objective: f64,
    pub sample: Vec<Vec<Vec<f64>>>,
    pub grid: Vec<Vec<Vec<f64>>>,
    pub grid_ring: Vec<usize>,
    pub perm: Vec<usize>,
    pub ranks: Vec<usize>,
    pub signs: Vec<Vec<Vec<f64>>>,
    pub rank_counts: Vec<usize>,
}

impl FitRecord {
    pub fn from_fit(fit: &QuantileFit<f64>) -> Self {
        let spec = &fit.spec;
        let f = |p: &ManifoldPoint<f64>| split_factors(spec, p.coords());
        FitRecord {
            manifold: fit.spec.to_string(),
            n0: fit.grid.n0,
            n_r: fit.grid.n_r,
            n_s: fit.grid.n_s,
            mode: fit.grid.mode,
            center: CenterRecord::from_center(spec, &fit.center),
            theta: fit.theta.as_ref().map(f),
            pole_image: fit.pole_image.as_ref().map(f),
            objective: fit.objective,
            sample: nested(spec, &fit.sample),
            grid: nested(spec, &fit.grid.points),
            grid_ring: fit.grid.ring.clone(),
            perm: fit.perm.clone(),
            ranks: fit.ranks.clone(),
            signs: fit.signs.iter().map(|s| split_factors(spec, s.coords())).collect(),
            rank_counts: fit.rank_counts(),
        }
    }
}

pub fn write_fit_json<W: Write>(w: W, fit: &QuantileFit<f64>) -> Result<()> {
    serde_json::to_writer(w, &FitRecord::from_fit(fit))?;
    Ok(())
}

pub fn read_fit_json<R: Read>(r: R) -> Result<FitRecord> {
    Ok(serde_json::from_reader(r)?)
}

impl FitRecord {
    pub fn spec(&self) -> Result<ManifoldSpec> {
        Ok(self.manifold.parse()?)
    }

    pub fn sample_points(&self) -> Result<Vec<ManifoldPoint<f64>>> {
        let spec = self.spec()?;
        self.sample.iter().map(|v| Ok(spec.point(join_factors(&spec, v)?)?)).collect()
    }
}

/// One row per observation: coordinates, rank, grid index and sign.
pub fn write_fit_csv<W: Write>(w: W, fit: &QuantileFit<f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let coords = coord_headers(&fit.spec);
    let mut header = coords.clone();
    header.push("rank".into());
    header.push("grid_index".into());
    header.extend(coords.iter().map(|h| format!("sign_{h}")));
    out.write_record(&header)?;
    for i in 0..fit.sample.len() {
        let mut row: Vec<String> = fit.sample[i].coords().iter().map(|x| fmt(*x)).collect();
        row.push(fit.ranks[i].to_string());
        row.push(fit.perm[i].to_string());
        row.extend(fit.signs[i].coords().iter().map(|x| fmt(*x)));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Rows of a fit CSV: `(point, rank, grid index)`.
pub fn read_fit_csv<R: Read>(r: R, spec: &ManifoldSpec) -> Result<Vec<(ManifoldPoint<f64>, usize, usize)>> {
    let mut rdr = reader(r);
    let headers = rdr.headers()?.clone();
    let need = |name: &str| column(&headers, name).ok_or_else(|| IoError::Format(format!("missing column {name}")));
    let cols: Vec<usize> = coord_headers(spec).iter().map(|h| need(h)).collect::<Result<_>>()?;
    let (rank, gi) = (need("rank")?, need("grid_index")?);
    let mut v = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |k: usize| parse(rec.get(k).unwrap_or(""), row + 1);
        let p: Vec<f64> = cols.iter().map(|&c| get(c)).collect::<Result<_>>()?;
        v.push((spec.point(p)?, get(rank)? as usize, get(gi)? as usize));
    }
    Ok(v)
}

/// Contour or region members: sample index, order `r` and coordinates.
pub fn write_contour_csv<W: Write>(
    w: W,
    spec: &ManifoldSpec,
    r: usize,
    indices: &[usize],
    sample: &[ManifoldPoint<f64>],
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["index".to_string(), "ring".to_string()];
    header.extend(coord_headers(spec));
    out.write_record(&header)?;
    for &i in indices {
        let mut row = vec![i.to_string(), r.to_string()];
        row.extend(sample[i].coords().iter().map(|x| fmt(*x)));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// `(index, ring, point)` rows of a contour CSV.
pub fn read_contour_csv<R: Read>(r: R, spec: &ManifoldSpec) -> Result<Vec<(usize, usize, ManifoldPoint<f64>)>> {
    let mut rdr = reader(r);
    let headers = rdr.headers()?.clone();
    let need = |name: &str| column(&headers, name).ok_or_else(|| IoError::Format(format!("missing column {name}")));
    let cols: Vec<usize> = coord_headers(spec).iter().map(|h| need(h)).collect::<Result<_>>()?;
    let (ix, ring) = (need("index")?, need("ring")?);
    let mut v = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |k: usize| parse(rec.get(k).unwrap_or(""), row + 1);
        let p: Vec<f64> = cols.iter().map(|&c| get(c)).collect::<Result<_>>()?;
        v.push((get(ix)? as usize, get(ring)? as usize, spec.point(p)?));
    }
    Ok(v)
}

/// Covariates and responses side by side: columns `x0..`, then the point columns.
pub fn write_regression_csv<W: Write>(
    w: W,
    spec: &ManifoldSpec,
    covariates: &[Vec<f64>],
    responses: &[ManifoldPoint<f64>],
) -> Result<()> {
    if covariates.len() != responses.len() {
        return Err(IoError::Format(format!("{} covariates but {} responses", covariates.len(), responses.len())));
    }
    let d = covariates.first().map_or(0, |x| x.len());
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..d).map(|k| format!("x{k}")).collect();
    header.extend(coord_headers(spec));
    out.write_record(&header)?;
    for (x, y) in covariates.iter().zip(responses) {
        if x.len() != d {
            return Err(IoError::Format("covariates of unequal length".into()));
        }
        let mut row: Vec<String> = x.iter().map(|v| fmt(*v)).collect();
        row.extend(y.coords().iter().map(|v| fmt(*v)));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `x0..x{d-1}` (as many as present) and the response point columns.
pub fn read_regression_csv<R: Read>(r: R, spec: &ManifoldSpec) -> Result<(Vec<Vec<f64>>, Vec<ManifoldPoint<f64>>)> {
    let mut rdr = reader(r);
    let headers = rdr.headers()?.clone();
    let xcols: Vec<usize> = (0..).map_while(|k| column(&headers, &format!("x{k}"))).collect();
    if xcols.is_empty() {
        return Err(IoError::Format("no covariate columns x0, x1, ...".into()));
    }
    let ycols: Vec<usize> = coord_headers(spec)
        .iter()
        .map(|h| column(&headers, h).ok_or_else(|| IoError::Format(format!("missing column {h}"))))
        .collect::<Result<_>>()?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |k: usize| parse(rec.get(k).unwrap_or(""), row + 1);
        xs.push(xcols.iter().map(|&c| get(c)).collect::<Result<Vec<f64>>>()?);
        ys.push(spec.point(ycols.iter().map(|&c| get(c)).collect::<Result<Vec<f64>>>()?)?);
    }
    Ok((xs, ys))
}

/// Plain numeric rows, one query per row; an optional header line is skipped.
pub fn read_queries_csv<R: Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(false).from_reader(r);
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
        match vals {
            Ok(v) => out.push(v),
            Err(_) if row == 0 => continue,
            Err(_) => return Err(IoError::Format(format!("query row {}: not numeric", row + 1))),
        }
    }
    Ok(out)
}

/// A contour in JSON form: ring, level and members in polyline order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourRecord {
    pub manifold: String,
    pub ring: usize,
    pub tau: f64,
    pub indices: Vec<usize>,
    pub points: Vec<Vec<Vec<f64>>>,
}

impl ContourRecord {
    pub fn new(spec: &ManifoldSpec, ring: usize, tau: f64, indices: &[usize], sample: &[ManifoldPoint<f64>]) -> Self {
        let pts: Vec<ManifoldPoint<f64>> = indices.iter().map(|&i| sample[i].clone()).collect();
        ContourRecord { manifold: spec.to_string(), ring, tau, indices: indices.to_vec(), points: nested(spec, &pts) }
    }

    pub fn decode(&self) -> Result<(ManifoldSpec, Vec<ManifoldPoint<f64>>)> {
        PointsRecord { manifold: self.manifold.clone(), preset: None, seed: None, points: self.points.clone() }.decode()
    }
}

pub fn write_contour_json<W: Write>(w: W, rec: &ContourRecord) -> Result<()> {
    serde_json::to_writer(w, rec)?;
    Ok(())
}

pub fn read_contour_json<R: Read>(r: R) -> Result<ContourRecord> {
    Ok(serde_json::from_reader(r)?)
}
