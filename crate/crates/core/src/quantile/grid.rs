//! Structured reference grids: `n0` points on the center set followed by
//! `nR` rings of `nS` points, ring `r` lying on the uniform contour of
//! order `r / (nR + 1)`.

use serde::{Deserialize, Serialize};

use super::center::{Ray, Shape};
use super::{CenterSpec, QuantileError};
use crate::geometry::{ManifoldPoint, ManifoldSpec, TangentVector};
use crate::{rng, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Fresh uniform points on every contour.
    Iid,
    /// Evenly spaced points on contours of dimension at most one.
    Equispaced,
    /// One set of `nS` uniform generating pairs shared by all rings.
    Fibered,
}

impl GridMode {
    /// Equispaced when contours have dimension at most one, i.i.d. otherwise.
    pub fn default_for(spec: &ManifoldSpec) -> Self {
        if spec.intrinsic_dim() <= 2 {
            GridMode::Equispaced
        } else {
            GridMode::Iid
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructuredGrid<T> {
    pub spec: ManifoldSpec,
    pub center: CenterSpec<T>,
    pub mode: GridMode,
    pub n0: usize,
    pub n_r: usize,
    pub n_s: usize,
    pub points: Vec<ManifoldPoint<T>>,
    /// Ring index per point, 0 for the center points.
    pub ring: Vec<usize>,
    /// Position of the point within its ring.
    pub slot: Vec<usize>,
    /// Base point on the center set the point was generated from.
    pub base: Vec<ManifoldPoint<T>>,
    /// Normal vector `v` at the base with `point = exp_base(t v)`; zero on ring 0.
    pub direction: Vec<Vec<T>>,
    pub t: Vec<T>,
}

impl<T: Real> StructuredGrid<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Unit normal direction of point `i` at its base, zero on ring 0.
    pub fn sign(&self, i: usize) -> TangentVector<T> {
        let d = &self.direction[i];
        let n = d.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
        let coords = if n == T::zero() { d.clone() } else { d.iter().map(|x| *x / n).collect() };
        TangentVector::from_raw(self.base[i].clone(), coords)
    }

    pub fn tau(&self, r: usize) -> f64 {
        r as f64 / (self.n_r + 1) as f64
    }

    pub fn ring_indices(&self, r: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.ring[i] == r).collect()
    }

    /// Apply an ambient linear isometry to every stored point and vector.
    pub fn transformed(&self, f: &dyn Fn(&[T]) -> Vec<T>, center: CenterSpec<T>) -> Self {
        let pts = |v: &[ManifoldPoint<T>]| v.iter().map(|p| ManifoldPoint::from_raw(f(p.coords()))).collect();
        Self {
            spec: self.spec.clone(),
            center,
            mode: self.mode,
            n0: self.n0,
            n_r: self.n_r,
            n_s: self.n_s,
            points: pts(&self.points),
            ring: self.ring.clone(),
            slot: self.slot.clone(),
            base: pts(&self.base),
            direction: self.direction.iter().map(|d| f(d)).collect(),
            t: self.t.clone(),
        }
    }
}

pub fn build_grid<T: Real>(
    spec: &ManifoldSpec,
    center: &CenterSpec<T>,
    n_r: usize,
    n_s: usize,
    n0: usize,
    seed: u64,
    mode: GridMode,
) -> Result<StructuredGrid<T>, QuantileError> {
    let shape = Shape::resolve(spec, center)?;
    if shape.center_dim(spec) == 0 && n0 == 0 {
        return Err(QuantileError::UnsupportedCenter("this center needs n0 >= 1".into()));
    }
    if mode == GridMode::Equispaced && spec.intrinsic_dim() > 2 {
        return Err(QuantileError::EquispacedDim(spec.intrinsic_dim()));
    }
    if n0 + n_r * n_s == 0 {
        return Err(QuantileError::Empty);
    }
    let mut r = rng::seeded(seed);
    let total = n0 + n_r * n_s;
    let mut grid = StructuredGrid {
        spec: spec.clone(),
        center: center.clone(),
        mode,
        n0,
        n_r,
        n_s,
        points: Vec::with_capacity(total),
        ring: Vec::with_capacity(total),
        slot: Vec::with_capacity(total),
        base: Vec::with_capacity(total),
        direction: Vec::with_capacity(total),
        t: Vec::with_capacity(total),
    };

    let centers = shape.center_points(spec, n0, mode == GridMode::Equispaced, &mut r);
    for (k, c) in centers.into_iter().enumerate() {
        let p = ManifoldPoint::from_raw(c);
        grid.points.push(p.clone());
        grid.base.push(p);
        grid.ring.push(0);
        grid.slot.push(k);
        grid.direction.push(vec![T::zero(); spec.ambient_dim()]);
        grid.t.push(T::zero());
    }

    let phase: f64 = rand::Rng::random::<f64>(&mut r) * std::f64::consts::TAU;
    let shared: Option<Vec<Ray<T>>> = match mode {
        GridMode::Iid => None,
        GridMode::Fibered => Some((0..n_s).map(|_| shape.random_ray(spec, &mut r)).collect()),
        GridMode::Equispaced => Some((0..n_s).map(|k| shape.equispaced_ray(spec, k, n_s, phase, &mut r)).collect()),
    };
    for ring in 1..=n_r {
        let tau = ring as f64 / (n_r + 1) as f64;
        let t = T::lit(shape.profile(tau)?);
        for k in 0..n_s {
            let fresh;
            let ray = match &shared {
                Some(rays) => &rays[k],
                None => {
                    fresh = shape.random_ray(spec, &mut r);
                    &fresh
                }
            };
            let base = ManifoldPoint::from_raw(ray.base.clone());
            let v = TangentVector::from_raw(base.clone(), ray.direction.iter().map(|x| *x * t).collect());
            grid.points.push(spec.exp(&v));
            grid.base.push(base);
            grid.ring.push(ring);
            grid.slot.push(k);
            grid.direction.push(ray.direction.clone());
            grid.t.push(t);
        }
    }
    Ok(grid)
}
