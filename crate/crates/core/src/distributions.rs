//! Samplers and densities for the directional families used in simulations:
//! von Mises-Fisher on `S^p`, the tangent vMF on `S^p`, the bivariate sine
//! von Mises on `T^2`, finite mixtures of these, and the uniform law on any
//! product of spheres.
//!
//! Densities are with respect to the Riemannian volume (arc length on each
//! circle factor for the torus).

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::geometry::{gaussian_unit, householder_frame, wrap_angle, ManifoldPoint, ManifoldSpec};
use crate::{rng, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("location must be a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("concentration must be finite and >= 0, got {0}")]
    BadConcentration(f64),
    #[error("beta shape parameters must be > 0, got ({0}, {1})")]
    BadBeta(f64, f64),
    #[error("skewness direction has {got} coordinates, expected {expected}")]
    BadSkewDim { expected: usize, got: usize },
    #[error("mixture weights must be >= 0 and sum to 1 (sum {0})")]
    BadWeights(f64),
    #[error("mixture components live on different manifolds ({0} vs {1})")]
    MixedManifolds(String, String),
    #[error("mixture needs at least one component")]
    EmptyMixture,
    #[error("radial value must lie in [-1, 1], got {0}")]
    BadRadial(f64),
}

type Result<T> = std::result::Result<T, DistributionError>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VmfParams {
    pub mu: Vec<f64>,
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialLaw {
    /// `V = 2 B - 1` with `B ~ Beta(a, b)`.
    Beta { a: f64, b: f64 },
    /// Degenerate radial component `V = value`.
    Fixed { value: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TangentVmfParams {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub kappa: f64,
    pub radial: RadialLaw,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BsvmParams {
    pub mu: [f64; 2],
    pub kappa: [f64; 2],
    pub lambda: f64,
    #[serde(skip)]
    log_norm: OnceLock<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixtureParams {
    pub components: Vec<(f64, Law)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Law {
    Uniform { manifold: String },
    Vmf(VmfParams),
    TangentVmf(TangentVmfParams),
    Bsvm(BsvmParams),
    Mixture(MixtureParams),
}

/// Proposal bookkeeping for rejection samplers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SampleStats {
    pub proposals: u64,
    pub accepted: u64,
}

impl SampleStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

fn check_unit(v: &[f64]) -> Result<()> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-9 {
        return Err(DistributionError::NotUnit(n));
    }
    Ok(())
}

fn check_kappa(k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(DistributionError::BadConcentration(k));
    }
    Ok(())
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

impl VmfParams {
    pub fn new(mu: Vec<f64>, kappa: f64) -> Result<Self> {
        check_unit(&mu)?;
        check_kappa(kappa)?;
        if mu.len() < 2 {
            return Err(DistributionError::NotUnit(0.0));
        }
        Ok(Self { mu: normalized(&mu), kappa })
    }

    /// Sphere dimension `p` (the ambient dimension is `p + 1`).
    pub fn dim(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, stats: &mut SampleStats) -> Vec<f64> {
        let m = self.mu.len();
        let w = wood_latitude(self.kappa, m, rng, stats);
        let xi: Vec<f64> = gaussian_unit(m - 1, rng);
        let frame = householder_frame(&self.mu);
        let r = (1.0 - w * w).max(0.0).sqrt();
        let mut y: Vec<f64> = self.mu.iter().map(|x| w * x).collect();
        for (k, col) in frame.iter().take(m - 1).enumerate() {
            for (yi, ci) in y.iter_mut().zip(col) {
                *yi += r * xi[k] * ci;
            }
        }
        normalized(&y)
    }

    pub fn log_normalizer(&self) -> f64 {
        vmf_log_normalizer(self.mu.len(), self.kappa)
    }

    pub fn log_density(&self, y: &[f64]) -> f64 {
        let d: f64 = y.iter().zip(&self.mu).map(|(a, b)| a * b).sum();
        self.log_normalizer() + self.kappa * d
    }
}

/// Latitude `w = y . mu` of a vMF draw in ambient dimension `m`, by Wood's
/// rejection scheme.
fn wood_latitude<R: Rng + ?Sized>(kappa: f64, m: usize, rng: &mut R, stats: &mut SampleStats) -> f64 {
    let d = (m - 1) as f64;
    let b = d / (2.0 * kappa + (4.0 * kappa * kappa + d * d).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + d * (1.0 - x0 * x0).ln();
    let beta = Beta::new(d / 2.0, d / 2.0).expect("valid beta");
    loop {
        stats.proposals += 1;
        let z: f64 = beta.sample(rng);
        let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        let u: f64 = rng.random();
        if kappa * w + d * (1.0 - x0 * w).ln() - c >= u.ln() {
            stats.accepted += 1;
            return w.clamp(-1.0, 1.0);
        }
    }
}

/// `ln I_nu(x)` by the power series summed in log space.
pub fn ln_bessel_i(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let lh = (x / 2.0).ln();
    let term = |k: f64| (2.0 * k + nu) * lh - ln_gamma(k + 1.0) - ln_gamma(k + nu + 1.0);
    let kmax = (x + 60.0 + 10.0 * x.sqrt()) as usize;
    let terms: Vec<f64> = (0..=kmax).map(|k| term(k as f64)).collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// `ln C` for the vMF density `C exp(kappa y.mu)` in ambient dimension `m`.
pub fn vmf_log_normalizer(m: usize, kappa: f64) -> f64 {
    let h = m as f64 / 2.0;
    if kappa == 0.0 {
        return ln_gamma(h) - (2.0 * PI.powf(h)).ln();
    }
    if m == 3 {
        // kappa / (4 pi sinh kappa), written to avoid overflow.
        return kappa.ln() - (4.0 * PI).ln() - kappa - (-(-2.0 * kappa).exp_m1()).ln() + 2f64.ln();
    }
    (h - 1.0) * kappa.ln() - h * (2.0 * PI).ln() - ln_bessel_i(h - 1.0, kappa)
}

impl TangentVmfParams {
    pub fn new(mu: Vec<f64>, nu: Vec<f64>, kappa: f64, radial: RadialLaw) -> Result<Self> {
        check_unit(&mu)?;
        check_kappa(kappa)?;
        if nu.len() + 1 != mu.len() {
            return Err(DistributionError::BadSkewDim { expected: mu.len() - 1, got: nu.len() });
        }
        check_unit(&nu)?;
        match radial {
            RadialLaw::Beta { a, b } if !(a > 0.0 && b > 0.0) => return Err(DistributionError::BadBeta(a, b)),
            RadialLaw::Fixed { value } if !(-1.0..=1.0).contains(&value) => {
                return Err(DistributionError::BadRadial(value))
            }
            _ => {}
        }
        Ok(Self { mu: normalized(&mu), nu: normalized(&nu), kappa, radial })
    }

    pub fn with_beta(mu: Vec<f64>, nu: Vec<f64>, kappa: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(mu, nu, kappa, RadialLaw::Beta { a, b })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, stats: &mut SampleStats) -> Vec<f64> {
        let v = match self.radial {
            RadialLaw::Beta { a, b } => 2.0 * Beta::new(a, b).expect("valid beta").sample(rng) - 1.0,
            RadialLaw::Fixed { value } => value,
        };
        let dir = VmfParams { mu: self.nu.clone(), kappa: self.kappa }.draw(rng, stats);
        let frame = householder_frame(&self.mu);
        let r = (1.0 - v * v).max(0.0).sqrt();
        let mut y: Vec<f64> = self.mu.iter().map(|x| v * x).collect();
        for (k, col) in frame.iter().take(self.mu.len() - 1).enumerate() {
            for (yi, ci) in y.iter_mut().zip(col) {
                *yi += r * dir[k] * ci;
            }
        }
        normalized(&y)
    }
}

const BSVM_GRID: usize = 512;

impl BsvmParams {
    pub fn new(mu: [f64; 2], kappa: [f64; 2], lambda: f64) -> Result<Self> {
        check_kappa(kappa[0])?;
        check_kappa(kappa[1])?;
        if !lambda.is_finite() {
            return Err(DistributionError::BadConcentration(lambda));
        }
        Ok(Self { mu: [wrap_angle(mu[0]), wrap_angle(mu[1])], kappa, lambda, log_norm: OnceLock::new() })
    }

    fn exponent(&self, p1: f64, p2: f64) -> f64 {
        let (a, b) = (p1 - self.mu[0], p2 - self.mu[1]);
        self.kappa[0] * a.cos() + self.kappa[1] * b.cos() + self.lambda * a.sin() * b.sin()
    }

    /// `-ln` of the integral of the unnormalized density over `[-pi, pi)^2`,
    /// by the periodic trapezoid rule on a `grid x grid` lattice.
    pub fn log_normalizer_with(&self, grid: usize) -> f64 {
        let h = 2.0 * PI / grid as f64;
        let vals: Vec<f64> = (0..grid * grid)
            .map(|k| self.exponent(-PI + h * (k / grid) as f64, -PI + h * (k % grid) as f64))
            .collect();
        let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = vals.iter().map(|v| (v - top).exp()).sum();
        -(top + s.ln() + 2.0 * h.ln())
    }

    pub fn log_normalizer(&self) -> f64 {
        *self.log_norm.get_or_init(|| self.log_normalizer_with(BSVM_GRID))
    }

    pub fn log_density(&self, phi1: f64, phi2: f64) -> f64 {
        self.log_normalizer() + self.exponent(phi1, phi2)
    }

    /// Angles of one draw by rejection from independent von Mises proposals.
    pub fn draw_angles<R: Rng + ?Sized>(&self, rng: &mut R, stats: &mut SampleStats) -> [f64; 2] {
        let l = self.lambda.abs();
        loop {
            stats.proposals += 1;
            let mut inner = SampleStats::default();
            let a = von_mises_offset(self.kappa[0], rng, &mut inner);
            let b = von_mises_offset(self.kappa[1], rng, &mut inner);
            let u: f64 = rng.random();
            if u.ln() <= self.lambda * a.sin() * b.sin() - l {
                stats.accepted += 1;
                return [wrap_angle(a + self.mu[0]), wrap_angle(b + self.mu[1])];
            }
        }
    }
}

fn von_mises_offset<R: Rng + ?Sized>(kappa: f64, rng: &mut R, stats: &mut SampleStats) -> f64 {
    let y = VmfParams { mu: vec![1.0, 0.0], kappa }.draw(rng, stats);
    y[1].atan2(y[0])
}

impl MixtureParams {
    pub fn new(components: Vec<(f64, Law)>) -> Result<Self> {
        if components.is_empty() {
            return Err(DistributionError::EmptyMixture);
        }
        let s: f64 = components.iter().map(|c| c.0).sum();
        if components.iter().any(|c| !(c.0 >= 0.0)) || (s - 1.0).abs() > 1e-12 {
            return Err(DistributionError::BadWeights(s));
        }
        let first = components[0].1.spec();
        for (_, law) in &components[1..] {
            let sp = law.spec();
            if sp != first {
                return Err(DistributionError::MixedManifolds(first.to_string(), sp.to_string()));
            }
        }
        Ok(Self { components })
    }

    /// Component index for a uniform draw `u`, by inverse CDF on the weights.
    pub fn pick(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, (w, _)) in self.components.iter().enumerate() {
            acc += w;
            if u <= acc {
                return k;
            }
        }
        self.components.len() - 1
    }
}

impl Law {
    pub fn uniform(spec: &ManifoldSpec) -> Self {
        Law::Uniform { manifold: spec.to_string() }
    }

    pub fn vmf(mu: Vec<f64>, kappa: f64) -> Result<Self> {
        Ok(Law::Vmf(VmfParams::new(mu, kappa)?))
    }

    pub fn bsvm(mu: [f64; 2], kappa: [f64; 2], lambda: f64) -> Result<Self> {
        Ok(Law::Bsvm(BsvmParams::new(mu, kappa, lambda)?))
    }

    pub fn mixture(components: Vec<(f64, Law)>) -> Result<Self> {
        Ok(Law::Mixture(MixtureParams::new(components)?))
    }

    pub fn spec(&self) -> ManifoldSpec {
        match self {
            Law::Uniform { manifold } => manifold.parse().unwrap_or_else(|_| ManifoldSpec::sphere(2)),
            Law::Vmf(p) => ManifoldSpec::sphere(p.dim()),
            Law::TangentVmf(p) => ManifoldSpec::sphere(p.mu.len() - 1),
            Law::Bsvm(_) => ManifoldSpec::torus(2),
            Law::Mixture(m) => m.components[0].1.spec(),
        }
    }

    fn draw_raw<R: Rng + ?Sized>(&self, spec: &ManifoldSpec, rng: &mut R, stats: &mut SampleStats) -> (Vec<f64>, usize) {
        match self {
            Law::Uniform { .. } => (spec.uniform_point::<f64, R>(rng).into_coords(), 0),
            Law::Vmf(p) => (p.draw(rng, stats), 0),
            Law::TangentVmf(p) => (p.draw(rng, stats), 0),
            Law::Bsvm(p) => {
                let [a, b] = p.draw_angles(rng, stats);
                (vec![a.cos(), a.sin(), b.cos(), b.sin()], 0)
            }
            Law::Mixture(m) => {
                let k = if m.components.len() == 1 { 0 } else { m.pick(rng.random()) };
                (m.components[k].1.draw_raw(spec, rng, stats).0, k)
            }
        }
    }

    /// One draw and, for mixtures, the index of the component it came from.
    pub fn draw_labeled<T: Real, R: Rng + ?Sized>(&self, rng: &mut R, stats: &mut SampleStats) -> (ManifoldPoint<T>, usize) {
        let spec = self.spec();
        let (y, k) = self.draw_raw(&spec, rng, stats);
        (ManifoldPoint::from_raw(y.into_iter().map(T::lit).collect()), k)
    }

    pub fn draw<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> ManifoldPoint<T> {
        self.draw_labeled(rng, &mut SampleStats::default()).0
    }

    /// `n` draws from a generator seeded with `seed`. A one-component mixture
    /// consumes the stream exactly like its component.
    pub fn sample<T: Real>(&self, n: usize, seed: u64) -> Vec<ManifoldPoint<T>> {
        self.sample_with_stats(n, seed).0
    }

    pub fn sample_with_stats<T: Real>(&self, n: usize, seed: u64) -> (Vec<ManifoldPoint<T>>, SampleStats) {
        let mut r = rng::seeded(seed);
        let mut stats = SampleStats::default();
        let pts = (0..n).map(|_| self.draw_labeled(&mut r, &mut stats).0).collect();
        if let Law::Bsvm(_) = self {
            log::debug!("bsvm acceptance rate {:.4}", stats.acceptance_rate());
        }
        (pts, stats)
    }

    pub fn sample_labeled<T: Real>(&self, n: usize, seed: u64) -> (Vec<ManifoldPoint<T>>, Vec<usize>) {
        let mut r = rng::seeded(seed);
        let mut stats = SampleStats::default();
        (0..n).map(|_| self.draw_labeled(&mut r, &mut stats)).unzip()
    }

    /// Normalized log-density at ambient coordinates `y`, when available.
    pub fn log_density(&self, y: &[f64]) -> Option<f64> {
        match self {
            Law::Uniform { .. } => {
                let spec = self.spec();
                Some(-spec.dims().iter().map(|&p| log_sphere_area(p)).sum::<f64>())
            }
            Law::Vmf(p) => Some(p.log_density(y)),
            Law::TangentVmf(_) => None,
            Law::Bsvm(p) => Some(p.log_density(y[1].atan2(y[0]), y[3].atan2(y[2]))),
            Law::Mixture(m) => {
                let parts: Option<Vec<f64>> = m
                    .components
                    .iter()
                    .map(|(w, law)| law.log_density(y).map(|l| w.ln() + l))
                    .collect();
                let parts = parts?;
                let top = parts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if top == f64::NEG_INFINITY {
                    return Some(top);
                }
                Some(top + parts.iter().map(|p| (p - top).exp()).sum::<f64>().ln())
            }
        }
    }
}

/// `ln` of the surface area of `S^p`.
pub fn log_sphere_area(p: usize) -> f64 {
    let h = (p as f64 + 1.0) / 2.0;
    (2.0f64).ln() + h * PI.ln() - ln_gamma(h)
}
