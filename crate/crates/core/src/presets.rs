//! Named simulation designs: unconditional laws on `T^2` and `S^2`, and
//! covariate/response models for regression.

use std::f64::consts::PI;

use rand::Rng;
use thiserror::Error;

use crate::distributions::{Law, RadialLaw, SampleStats, TangentVmfParams};
use crate::geometry::{ManifoldPoint, ManifoldSpec};
use crate::regression::CovariateSpace;
use crate::{rng, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresetError {
    #[error("unknown preset {0:?}")]
    Unknown(String),
    #[error("preset {name} lives on {native}, not {requested}")]
    WrongManifold { name: String, native: String, requested: String },
}

pub const UNCONDITIONAL: [&str; 12] = ["T1", "T2", "T3", "S1", "S2", "S3", "Ta", "Tb", "Tc", "Sa", "Sb", "Sc"];

pub const REGRESSION: [&str; 12] =
    ["TS1", "TS1*", "TS1**", "TS2", "TS3", "TS3*", "SS1", "SS2", "SS2*", "TR1", "TR2", "SR"];

fn s075() -> f64 {
    0.75f64.sqrt()
}

fn three_bsvm(k1: f64, k2: f64, k3: f64) -> Law {
    Law::mixture(vec![
        (3.0 / 7.0, Law::bsvm([-PI / 2.0, PI / 2.0], [k1, k1], -2.0).unwrap()),
        (3.0 / 7.0, Law::bsvm([PI / 2.0, PI / 2.0], [k2, k2], 2.0).unwrap()),
        (1.0 / 7.0, Law::bsvm([0.0, -PI / 5.0], [k3, k3], 0.0).unwrap()),
    ])
    .unwrap()
}

fn three_vmf(k1: f64, k2: f64, k3: f64) -> Law {
    Law::mixture(vec![
        (0.3, Law::vmf(vec![0.3, 0.4, s075()], k1).unwrap()),
        (0.3, Law::vmf(vec![-0.3, -0.4, s075()], k2).unwrap()),
        (0.4, Law::vmf(vec![-0.3, 0.2, 0.87f64.sqrt()], k3).unwrap()),
    ])
    .unwrap()
}

fn skew_nu() -> Vec<f64> {
    vec![0.7, 0.51f64.sqrt()]
}

/// Unconditional law by name; `"uniform"` is the uniform law on `spec`.
/// Named presets must be requested on their own manifold.
pub fn preset(name: &str, spec: &ManifoldSpec) -> Result<Law, PresetError> {
    let north = vec![0.0, 0.0, 1.0];
    let south = vec![0.0, 0.0, -1.0];
    let law = match name {
        "uniform" => Law::uniform(spec),
        "T1" => Law::bsvm([0.0, 0.0], [3.0, 3.0], 0.0).unwrap(),
        "T2" => Law::bsvm([0.0, 0.0], [3.0, 3.0], 1.5).unwrap(),
        "T3" | "Tc" => three_bsvm(4.0, 4.0, 6.0),
        "S1" => Law::vmf(north, 10.0).unwrap(),
        "S2" => Law::TangentVmf(TangentVmfParams::with_beta(north, skew_nu(), 10.0, 2.0, 8.0).unwrap()),
        "S3" | "Sc" => three_vmf(20.0, 20.0, 20.0),
        "Ta" => Law::bsvm([0.0, 0.0], [2.5, 0.0], 0.0).unwrap(),
        "Tb" => Law::bsvm([0.0, 0.0], [2.5, 0.0], 2.0).unwrap(),
        "Sa" => Law::mixture(vec![(0.3, Law::vmf(north, 1.0).unwrap()), (0.7, Law::vmf(south, 2.0).unwrap())]).unwrap(),
        "Sb" => Law::mixture(vec![
            (
                0.3,
                Law::TangentVmf(
                    TangentVmfParams::new(north, skew_nu(), 2.0, RadialLaw::Beta { a: 5.0, b: 2.0 }).unwrap(),
                ),
            ),
            (0.7, Law::vmf(south, 3.0).unwrap()),
        ])
        .unwrap(),
        _ => return Err(PresetError::Unknown(name.to_string())),
    };
    if &law.spec() != spec {
        return Err(PresetError::WrongManifold {
            name: name.to_string(),
            native: law.spec().to_string(),
            requested: spec.to_string(),
        });
    }
    Ok(law)
}

#[derive(Clone, Debug)]
pub enum CovariateLaw {
    Manifold(Law),
    /// Uniform on `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
}

impl CovariateLaw {
    pub fn space(&self) -> CovariateSpace {
        match self {
            CovariateLaw::Manifold(l) => CovariateSpace::Manifold(l.spec()),
            CovariateLaw::Interval { .. } => CovariateSpace::Euclidean(1),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, stats: &mut SampleStats) -> Vec<f64> {
        match self {
            CovariateLaw::Manifold(l) => l.draw_labeled::<f64, R>(rng, stats).0.into_coords(),
            CovariateLaw::Interval { lo, hi } => vec![lo + (hi - lo) * rng.random::<f64>()],
        }
    }
}

/// A joint law of `(X, Y)` given as a covariate law and the conditional law
/// of the response.
#[derive(Clone, Debug)]
pub struct RegressionModel {
    pub name: String,
    pub covariate: CovariateLaw,
    pub response: ManifoldSpec,
    conditional: fn(&[f64]) -> Law,
}

impl RegressionModel {
    pub fn covariate_space(&self) -> CovariateSpace {
        self.covariate.space()
    }

    /// Law of `Y` given `X = x`.
    pub fn conditional(&self, x: &[f64]) -> Law {
        (self.conditional)(x)
    }

    /// `n` i.i.d. pairs; each pair draws `X` then `Y | X` from one stream.
    pub fn sample<T: Real>(&self, n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<ManifoldPoint<T>>) {
        let mut r = rng::seeded(seed);
        let mut stats = SampleStats::default();
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let x = self.covariate.draw(&mut r, &mut stats);
            let y = self.conditional(&x).draw_labeled(&mut r, &mut stats).0;
            xs.push(x);
            ys.push(y);
        }
        (xs, ys)
    }
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

fn ts1(x: &[f64]) -> Law {
    Law::bsvm([0.0, 0.0], [l1(x).exp(), 2.0], 1.0).unwrap()
}

fn ts1_star(x: &[f64]) -> Law {
    Law::bsvm([0.0, 0.0], [(3.0 * x[0].abs()).exp(), (3.0 * x[1].abs()).exp()], 1.0).unwrap()
}

fn ts1_star2(x: &[f64]) -> Law {
    Law::bsvm([0.0, 0.0], [6.0, 6.0], 10.0 * (x[0].abs() + x[1].abs())).unwrap()
}

fn ts2(x: &[f64]) -> Law {
    three_bsvm((2.0 * x[0]).exp(), (2.0 * x[1]).exp(), l1(x).exp())
}

fn ts3(x: &[f64]) -> Law {
    Law::bsvm([0.0, 0.0], [l1(x).exp(), 0.0], 1.0).unwrap()
}

fn ts3_star(x: &[f64]) -> Law {
    let d = (x[0] - x[1]).abs();
    Law::bsvm([0.0, 0.0], [2.0 * d, 0.0], d.exp()).unwrap()
}

fn ss1(x: &[f64]) -> Law {
    Law::vmf(vec![0.0, 0.0, 1.0], 5.0 * x[0].exp()).unwrap()
}

fn ss2(x: &[f64]) -> Law {
    three_vmf(6.0 * x[0].exp(), 4.0 * (2.0 * x[1]).exp(), 2.0 * (3.0 * x[0] + 2.0 * x[1]).exp())
}

fn ss2_star(x: &[f64]) -> Law {
    let k = (x[1].abs() / (x[0].abs() + 0.25)).exp();
    three_vmf(k, k, k)
}

fn tr1(x: &[f64]) -> Law {
    Law::bsvm([0.0, 0.0], [2.0, 2.0], x[0] * x[0] - 9.0).unwrap()
}

fn tr2(x: &[f64]) -> Law {
    Law::bsvm([0.0, 0.0], [2.0, 0.0], x[0] * x[0] - 9.0).unwrap()
}

fn sr(x: &[f64]) -> Law {
    let k = (x[0] - 5.0) * (x[0] - 5.0);
    three_vmf(k, k, k)
}

/// Regression model by name.
pub fn regression_model(name: &str) -> Result<RegressionModel, PresetError> {
    let s2_cov = |mu: Vec<f64>, kappa: f64| CovariateLaw::Manifold(Law::vmf(mu, kappa).unwrap());
    let ts_mu = vec![0.7, 0.7, 0.02f64.sqrt()];
    let ss_cov = || CovariateLaw::Manifold(Law::vmf(vec![0.0, 1.0], 3.0).unwrap());
    let interval = CovariateLaw::Interval { lo: 0.0, hi: 5.0 };
    let (covariate, response, conditional): (CovariateLaw, ManifoldSpec, fn(&[f64]) -> Law) = match name {
        "TS1" => (s2_cov(ts_mu, 1.0), ManifoldSpec::torus(2), ts1),
        "TS1*" => (s2_cov(ts_mu, 2.0), ManifoldSpec::torus(2), ts1_star),
        "TS1**" => (s2_cov(vec![0.3, 0.3, 0.82f64.sqrt()], 2.0), ManifoldSpec::torus(2), ts1_star2),
        "TS2" => (s2_cov(ts_mu, 1.0), ManifoldSpec::torus(2), ts2),
        "TS3" => (s2_cov(ts_mu, 1.0), ManifoldSpec::torus(2), ts3),
        "TS3*" => (s2_cov(ts_mu, 1.0), ManifoldSpec::torus(2), ts3_star),
        "SS1" => (ss_cov(), ManifoldSpec::sphere(2), ss1),
        "SS2" => (ss_cov(), ManifoldSpec::sphere(2), ss2),
        "SS2*" => (ss_cov(), ManifoldSpec::sphere(2), ss2_star),
        "TR1" => (interval, ManifoldSpec::torus(2), tr1),
        "TR2" => (interval, ManifoldSpec::torus(2), tr2),
        "SR" => (interval, ManifoldSpec::sphere(2), sr),
        _ => return Err(PresetError::Unknown(name.to_string())),
    };
    Ok(RegressionModel { name: name.to_string(), covariate, response, conditional })
}
