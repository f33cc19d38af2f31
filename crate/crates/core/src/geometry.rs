//! Products of unit spheres `S^{p_1} x ... x S^{p_k}`.
//!
//! Points are stored extrinsically: one unit vector in `R^{p_i + 1}` per
//! factor, concatenated in factor order. The torus `T^p` is `p` circle
//! factors, and a circle point `(cos a, sin a)` corresponds to the angle `a`.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::rng;
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("manifold needs at least one factor")]
    NoFactors,
    #[error("sphere factors must have dimension >= 1")]
    ZeroDimFactor,
    #[error("cannot parse manifold string {0:?}")]
    Parse(String),
    #[error("expected {expected} ambient coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("factor {factor} has norm {norm}, expected 1")]
    NotUnit { factor: usize, norm: f64 },
    #[error("factor {factor} is not tangent to the base point (inner product {dot})")]
    NotTangent { factor: usize, dot: f64 },
    #[error("factor {factor} is antipodal to the base point")]
    CutLocus { factor: usize },
    #[error("angle codec requires a torus, got {0}")]
    NotTorus(String),
}

type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ManifoldSpec {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint<T> {
    coords: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector<T> {
    pub base: ManifoldPoint<T>,
    coords: Vec<T>,
}

impl<T: Real> ManifoldPoint<T> {
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.f64()).collect()
    }

    pub(crate) fn from_raw(coords: Vec<T>) -> Self {
        Self { coords }
    }
}

impl<T: Real> TangentVector<T> {
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn zero(base: ManifoldPoint<T>) -> Self {
        let coords = vec![T::zero(); base.coords.len()];
        Self { base, coords }
    }

    pub fn norm(&self) -> T {
        norm(&self.coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == T::zero())
    }

    pub fn scaled(&self, t: T) -> Self {
        Self {
            base: self.base.clone(),
            coords: self.coords.iter().map(|c| *c * t).collect(),
        }
    }

    pub(crate) fn from_raw(base: ManifoldPoint<T>, coords: Vec<T>) -> Self {
        Self { base, coords }
    }
}

impl ManifoldSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(GeometryError::NoFactors);
        }
        if dims.contains(&0) {
            return Err(GeometryError::ZeroDimFactor);
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        for &p in &dims {
            offsets.push(acc);
            acc += p + 1;
        }
        offsets.push(acc);
        Ok(Self { dims, offsets })
    }

    pub fn sphere(p: usize) -> Self {
        Self::new(vec![p.max(1)]).expect("valid sphere")
    }

    pub fn torus(p: usize) -> Self {
        Self::new(vec![1; p.max(1)]).expect("valid torus")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn ambient_dim(&self) -> usize {
        self.offsets[self.dims.len()]
    }

    pub fn factor_range(&self, k: usize) -> Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// True when every factor is a circle.
    pub fn is_torus(&self) -> bool {
        self.dims.iter().all(|&p| p == 1)
    }

    pub fn is_sphere(&self) -> bool {
        self.dims.len() == 1
    }

    pub fn factor<'a, T>(&self, y: &'a ManifoldPoint<T>, k: usize) -> &'a [T] {
        &y.coords[self.factor_range(k)]
    }

    pub fn factors<'a, T>(&self, y: &'a ManifoldPoint<T>) -> Vec<&'a [T]> {
        (0..self.num_factors()).map(|k| &y.coords[self.factor_range(k)]).collect()
    }

    /// Validate ambient coordinates, renormalizing factors that are not unit to machine precision.
    pub fn point<T: Real>(&self, mut coords: Vec<T>) -> Result<ManifoldPoint<T>> {
        self.check_len(coords.len())?;
        for k in 0..self.num_factors() {
            let r = self.factor_range(k);
            let n = norm(&coords[r.clone()]);
            let off = (n - T::one()).abs();
            if off > T::input_tol() {
                return Err(GeometryError::NotUnit { factor: k, norm: n.f64() });
            }
            if off <= T::epsilon() * T::lit(4.0) {
                continue;
            }
            for c in &mut coords[r] {
                *c /= n;
            }
        }
        Ok(ManifoldPoint { coords })
    }

    pub fn point_from_f64<T: Real>(&self, coords: &[f64]) -> Result<ManifoldPoint<T>> {
        self.point(coords.iter().map(|&c| T::lit(c)).collect())
    }

    /// Build a torus point from one angle per circle factor.
    pub fn point_from_angles<T: Real>(&self, angles: &[T]) -> Result<ManifoldPoint<T>> {
        if !self.is_torus() {
            return Err(GeometryError::NotTorus(self.to_string()));
        }
        self.check_len(2 * angles.len())?;
        let coords = angles.iter().flat_map(|&a| [a.cos(), a.sin()]).collect();
        Ok(ManifoldPoint { coords })
    }

    /// Angles in `[-pi, pi)` of a torus point.
    pub fn angles<T: Real>(&self, y: &ManifoldPoint<T>) -> Result<Vec<T>> {
        if !self.is_torus() {
            return Err(GeometryError::NotTorus(self.to_string()));
        }
        Ok(y.coords.chunks(2).map(|c| wrap_angle(c[1].atan2(c[0]))).collect())
    }

    pub fn check<T: Real>(&self, y: &ManifoldPoint<T>) -> Result<()> {
        self.check_len(y.coords.len())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.ambient_dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.ambient_dim(), got });
        }
        Ok(())
    }

    /// Per-factor geodesic distances.
    pub fn factor_distances<T: Real>(&self, y: &ManifoldPoint<T>, z: &ManifoldPoint<T>) -> Vec<T> {
        (0..self.num_factors())
            .map(|k| {
                let r = self.factor_range(k);
                arc(&y.coords[r.clone()], &z.coords[r])
            })
            .collect()
    }

    /// Geodesic distance without conformance checks.
    pub fn dist<T: Real>(&self, y: &ManifoldPoint<T>, z: &ManifoldPoint<T>) -> T {
        self.dist2(y, z).sqrt()
    }

    /// Squared geodesic distance without conformance checks.
    pub fn dist2<T: Real>(&self, y: &ManifoldPoint<T>, z: &ManifoldPoint<T>) -> T {
        dist2_raw(&self.offsets, &y.coords, &z.coords)
    }

    pub fn tangent<T: Real>(&self, base: &ManifoldPoint<T>, coords: Vec<T>) -> Result<TangentVector<T>> {
        self.check(base)?;
        self.check_len(coords.len())?;
        for k in 0..self.num_factors() {
            let r = self.factor_range(k);
            let d = dot(&base.coords[r.clone()], &coords[r]);
            if d.abs() > T::input_tol() {
                return Err(GeometryError::NotTangent { factor: k, dot: d.f64() });
            }
        }
        Ok(TangentVector { base: base.clone(), coords })
    }

    /// Orthogonal projection of ambient coordinates onto the tangent space at `base`.
    pub fn project_tangent<T: Real>(&self, base: &ManifoldPoint<T>, mut coords: Vec<T>) -> TangentVector<T> {
        for k in 0..self.num_factors() {
            let r = self.factor_range(k);
            let d = dot(&base.coords[r.clone()], &coords[r.clone()]);
            for (c, b) in coords[r.clone()].iter_mut().zip(&base.coords[r]) {
                *c -= d * *b;
            }
        }
        TangentVector { base: base.clone(), coords }
    }

    pub fn exp<T: Real>(&self, v: &TangentVector<T>) -> ManifoldPoint<T> {
        let mut out = v.base.coords.clone();
        for k in 0..self.num_factors() {
            let r = self.factor_range(k);
            exp_factor(&v.base.coords[r.clone()], &v.coords[r.clone()], &mut out[r]);
        }
        ManifoldPoint { coords: out }
    }

    pub fn log<T: Real>(&self, y: &ManifoldPoint<T>, z: &ManifoldPoint<T>) -> Result<TangentVector<T>> {
        let mut out = vec![T::zero(); y.coords.len()];
        for k in 0..self.num_factors() {
            let r = self.factor_range(k);
            if !log_factor(&y.coords[r.clone()], &z.coords[r.clone()], &mut out[r]) {
                return Err(GeometryError::CutLocus { factor: k });
            }
        }
        Ok(TangentVector { base: y.clone(), coords: out })
    }

    pub fn cut_locus_distance<T: Real>(&self, y: &ManifoldPoint<T>, z: &ManifoldPoint<T>) -> T {
        self.factor_distances(y, z)
            .into_iter()
            .map(|d| T::PI() - d)
            .fold(T::infinity(), T::min)
    }

    pub fn uniform_point<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> ManifoldPoint<T> {
        let mut coords = Vec::with_capacity(self.ambient_dim());
        for &p in &self.dims {
            coords.extend(gaussian_unit::<T, R>(p + 1, rng));
        }
        ManifoldPoint { coords }
    }

    pub fn uniform_sample<T: Real>(&self, n: usize, seed: u64) -> Vec<ManifoldPoint<T>> {
        let mut r = rng::seeded(seed);
        (0..n).map(|_| self.uniform_point(&mut r)).collect()
    }
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dims.len() > 1 && self.is_torus() {
            return write!(f, "t{}", self.dims.len());
        }
        let parts: Vec<String> = self.dims.iter().map(|p| format!("s{p}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for ManifoldSpec {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || GeometryError::Parse(s.to_string());
        let mut dims = Vec::new();
        for part in s.trim().to_ascii_lowercase().split('x') {
            let (kind, num) = part.split_at(part.len().min(1));
            let p: usize = num.parse().map_err(|_| bad())?;
            match kind {
                "s" => dims.push(p),
                "t" => dims.extend(std::iter::repeat_n(1, p)),
                _ => return Err(bad()),
            }
        }
        ManifoldSpec::new(dims).map_err(|_| bad())
    }
}

pub fn geodesic_distance<T: Real>(spec: &ManifoldSpec, y: &ManifoldPoint<T>, z: &ManifoldPoint<T>) -> Result<T> {
    spec.check(y)?;
    spec.check(z)?;
    Ok(spec.dist(y, z))
}

pub fn exp_map<T: Real>(spec: &ManifoldSpec, v: &TangentVector<T>) -> Result<ManifoldPoint<T>> {
    spec.check(&v.base)?;
    spec.check_len(v.coords.len())?;
    Ok(spec.exp(v))
}

pub fn log_map<T: Real>(spec: &ManifoldSpec, y: &ManifoldPoint<T>, z: &ManifoldPoint<T>) -> Result<TangentVector<T>> {
    spec.check(y)?;
    spec.check(z)?;
    spec.log(y, z)
}

pub fn cut_locus_distance<T: Real>(spec: &ManifoldSpec, y: &ManifoldPoint<T>, z: &ManifoldPoint<T>) -> Result<T> {
    spec.check(y)?;
    spec.check(z)?;
    Ok(spec.cut_locus_distance(y, z))
}

pub fn uniform_sample<T: Real>(spec: &ManifoldSpec, n: usize, seed: u64) -> Vec<ManifoldPoint<T>> {
    spec.uniform_sample(n, seed)
}

/// Wrap an angle into `[-pi, pi)`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut w = (a + T::PI()) % two_pi;
    if w < T::zero() {
        w += two_pi;
    }
    let w = w - T::PI();
    if w >= T::PI() {
        -T::PI()
    } else {
        w
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

pub(crate) fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Angle between two unit vectors, `2 atan2(|a - b|, |a + b|)`. Agrees with
/// the clamped arccos of the inner product and stays accurate near 0 and pi.
pub(crate) fn arc<T: Real>(a: &[T], b: &[T]) -> T {
    let mut dm = T::zero();
    let mut dp = T::zero();
    for (x, y) in a.iter().zip(b) {
        let m = *x - *y;
        let p = *x + *y;
        dm += m * m;
        dp += p * p;
    }
    let two = T::one() + T::one();
    two * dm.sqrt().atan2(dp.sqrt())
}

pub(crate) fn dist2_raw<T: Real>(offsets: &[usize], y: &[T], z: &[T]) -> T {
    let mut s = T::zero();
    for w in offsets.windows(2) {
        let d = arc(&y[w[0]..w[1]], &z[w[0]..w[1]]);
        s += d * d;
    }
    s
}

impl ManifoldSpec {
    pub(crate) fn offsets(&self) -> &[usize] {
        &self.offsets
    }
}

pub(crate) fn exp_factor<T: Real>(y: &[T], v: &[T], out: &mut [T]) {
    let t = norm(v);
    if t == T::zero() {
        out.copy_from_slice(y);
        return;
    }
    let (s, c) = t.sin_cos();
    for ((o, yi), vi) in out.iter_mut().zip(y).zip(v) {
        *o = c * *yi + s * *vi / t;
    }
    let n = norm(out);
    for o in out.iter_mut() {
        *o /= n;
    }
}

/// Writes `log_y(z)` for one factor; returns false on the cut locus.
pub(crate) fn log_factor<T: Real>(y: &[T], z: &[T], out: &mut [T]) -> bool {
    let d = dot(y, z);
    if d < -T::one() + T::lit(1e-12) {
        return false;
    }
    for ((o, yi), zi) in out.iter_mut().zip(y).zip(z) {
        *o = *zi - d * *yi;
    }
    let u = norm(out);
    if u == T::zero() {
        out.iter_mut().for_each(|o| *o = T::zero());
        return true;
    }
    let theta = arc(y, z);
    for o in out.iter_mut() {
        *o = *o * theta / u;
    }
    true
}

pub(crate) fn gaussian_unit<T: Real, R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<T> {
    loop {
        let g: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-300 {
            return g.into_iter().map(|x| T::lit(x / n)).collect();
        }
    }
}

/// Columns of the Householder reflection sending the last basis vector of
/// `R^m` to the unit vector `mu`. The first `m - 1` columns form an
/// orthonormal basis of the orthogonal complement of `mu`.
pub fn householder_frame<T: Real>(mu: &[T]) -> Vec<Vec<T>> {
    let m = mu.len();
    let mut u: Vec<T> = mu.iter().map(|&x| -x).collect();
    u[m - 1] += T::one();
    let uu = dot(&u, &u);
    (0..m)
        .map(|c| {
            (0..m)
                .map(|r| {
                    let id = if r == c { T::one() } else { T::zero() };
                    if uu <= T::epsilon() {
                        id
                    } else {
                        id - (T::one() + T::one()) * u[r] * u[c] / uu
                    }
                })
                .collect()
        })
        .collect()
}
