//! Conditional quantiles of a manifold response given covariates in a
//! metric space, through covariate weights and weighted optimal transport.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, ManifoldPoint, ManifoldSpec};
use crate::quantile::{
    build_grid, frechet_mean, CenterRule, CenterSpec, GridMode, GridSeeds, QuantileError, StructuredGrid,
};
use crate::transport::{cost_matrix, solve_kantorovich, Coupling, TransportError};
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressionError {
    #[error("no covariate within bandwidth {0} of the query")]
    EmptyWindow(f64),
    #[error("k = {k} is outside 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("bandwidth must be positive and finite, got {0}")]
    BadBandwidth(f64),
    #[error("covariate has {got} coordinates, expected {expected}")]
    CovariateDim { expected: usize, got: usize },
    #[error("{0} covariates but {1} responses")]
    Lengths(usize, usize),
    #[error("grid size {n} does not factor as {n0} + {nr} * {ns}")]
    Factorization { n: usize, n0: usize, nr: usize, ns: usize },
    #[error(transparent)]
    Quantile(#[from] QuantileError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

type Result<T> = std::result::Result<T, RegressionError>;

#[derive(Clone, Debug, PartialEq)]
pub enum CovariateSpace {
    Manifold(ManifoldSpec),
    Euclidean(usize),
}

impl CovariateSpace {
    pub fn dim(&self) -> usize {
        match self {
            CovariateSpace::Manifold(s) => s.ambient_dim(),
            CovariateSpace::Euclidean(d) => *d,
        }
    }

    /// Geodesic distance on a manifold, Euclidean distance otherwise.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            CovariateSpace::Manifold(s) => crate::geometry::dist2_raw(s.offsets(), a, b).sqrt(),
            CovariateSpace::Euclidean(_) => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(RegressionError::CovariateDim { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `exp(-u^2)` on `[0, 1]`.
    TrimmedGaussian,
    /// Constant on `[0, 1]`.
    Box,
}

impl Kernel {
    pub fn eval(&self, u: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        match self {
            Kernel::TrimmedGaussian => (-u * u).exp(),
            Kernel::Box => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFunction {
    Knn { k: usize },
    Kernel { h: f64, kernel: Kernel },
}

impl WeightFunction {
    pub fn weights(&self, space: &CovariateSpace, x: &[f64], covariates: &[Vec<f64>]) -> Result<Vec<f64>> {
        match *self {
            WeightFunction::Knn { k } => knn_weights(space, x, covariates, k),
            WeightFunction::Kernel { h, kernel } => kernel_weights(space, x, covariates, h, kernel),
        }
    }
}

/// Weight `1/k` on the `k` covariates nearest to `x`; distance ties go to
/// the smaller index.
pub fn knn_weights(space: &CovariateSpace, x: &[f64], covariates: &[Vec<f64>], k: usize) -> Result<Vec<f64>> {
    let n = covariates.len();
    if k == 0 || k > n {
        return Err(RegressionError::BadK { k, n });
    }
    space.check(x)?;
    let d: Vec<f64> = covariates
        .iter()
        .map(|c| space.check(c).map(|_| space.distance(x, c)))
        .collect::<Result<_>>()?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let mut w = vec![0.0; n];
    for &j in &idx[..k] {
        w[j] = 1.0 / k as f64;
    }
    Ok(w)
}

/// `w_j` proportional to `K(d(x, X_j) / h)`, the window boundary included.
pub fn kernel_weights(
    space: &CovariateSpace,
    x: &[f64],
    covariates: &[Vec<f64>],
    h: f64,
    kernel: Kernel,
) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(RegressionError::BadBandwidth(h));
    }
    space.check(x)?;
    let mut w = Vec::with_capacity(covariates.len());
    for c in covariates {
        space.check(c)?;
        w.push(kernel.eval(space.distance(x, c) / h));
    }
    let s: f64 = w.iter().sum();
    if s <= 0.0 {
        return Err(RegressionError::EmptyWindow(h));
    }
    Ok(w.into_iter().map(|v| v / s).collect())
}

/// Conditional Frechet mean under weights; same algorithm as the unconditional one.
pub fn conditional_frechet_mean<T: Real>(
    spec: &ManifoldSpec,
    responses: &[ManifoldPoint<T>],
    weights: &[f64],
) -> Result<ManifoldPoint<T>> {
    Ok(frechet_mean(spec, responses, weights)?.point)
}

#[derive(Clone, Debug)]
pub struct ConditionalOptions<T> {
    pub n0: usize,
    pub n_r: usize,
    pub n_s: usize,
    pub center: CenterRule<T>,
    pub mode: Option<GridMode>,
    pub seed: u64,
}

impl<T: Real> ConditionalOptions<T> {
    pub fn new(n0: usize, n_r: usize, n_s: usize) -> Self {
        Self { n0, n_r, n_s, center: CenterRule::FrechetCap, mode: None, seed: 0 }
    }

    pub fn center(mut self, rule: CenterRule<T>) -> Self {
        self.center = rule;
        self
    }

    pub fn mode(mut self, mode: GridMode) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn size(&self) -> usize {
        self.n0 + self.n_r * self.n_s
    }
}

#[derive(Clone, Debug)]
pub struct ConditionalFit<T> {
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    /// Indices with positive weight.
    pub support: Vec<usize>,
    pub theta: ManifoldPoint<T>,
    pub pole_image: Option<ManifoldPoint<T>>,
    pub center: CenterSpec<T>,
    pub grid: StructuredGrid<T>,
    /// Step 2 coupling; columns index `support`.
    pub coupling: Coupling<T>,
    /// `image[i]` is the sample index `Q(g_i | x)` for grid point `i`.
    pub image: Vec<usize>,
}

impl<T: Real> ConditionalFit<T> {
    pub fn distinct_images(&self) -> usize {
        let mut v = self.image.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    fn check_order(&self, r: usize) -> Result<()> {
        if r > self.grid.n_r || (r == 0 && self.grid.n0 == 0) {
            return Err(QuantileError::OrderOutOfRange { r, max: self.grid.n_r }.into());
        }
        Ok(())
    }

    /// Distinct sample indices that are images of ring `r`, sorted.
    pub fn contour(&self, r: usize) -> Result<Vec<usize>> {
        self.check_order(r)?;
        Ok(self.collect(|ring| ring == r))
    }

    /// Distinct images of ring `r` in grid-slot order, first occurrence kept.
    pub fn ordered_contour(&self, r: usize) -> Result<Vec<usize>> {
        self.check_order(r)?;
        let mut ring: Vec<usize> = (0..self.grid.len()).filter(|&i| self.grid.ring[i] == r).collect();
        ring.sort_by_key(|&i| (self.grid.slot[i], i));
        let mut seen = std::collections::HashSet::new();
        Ok(ring.into_iter().map(|i| self.image[i]).filter(|j| seen.insert(*j)).collect())
    }

    /// Distinct sample indices that are images of rings `0..=r`, sorted.
    pub fn region(&self, r: usize) -> Result<Vec<usize>> {
        if r > self.grid.n_r {
            return Err(QuantileError::OrderOutOfRange { r, max: self.grid.n_r }.into());
        }
        Ok(self.collect(|ring| ring <= r))
    }

    fn collect(&self, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut v: Vec<usize> =
            (0..self.grid.len()).filter(|&i| keep(self.grid.ring[i])).map(|i| self.image[i]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

pub fn extract_conditional_contour<T: Real>(fit: &ConditionalFit<T>, r: usize) -> Result<Vec<usize>> {
    fit.contour(r)
}

pub fn extract_conditional_region<T: Real>(fit: &ConditionalFit<T>, r: usize) -> Result<Vec<usize>> {
    fit.region(r)
}

/// Two-step conditional pipeline at covariate value `x`.
#[allow(clippy::too_many_arguments)]
pub fn fit_conditional<T: Real>(
    spec: &ManifoldSpec,
    space: &CovariateSpace,
    covariates: &[Vec<f64>],
    responses: &[ManifoldPoint<T>],
    x: &[f64],
    weight_fn: &WeightFunction,
    opts: &ConditionalOptions<T>,
) -> Result<ConditionalFit<T>> {
    if covariates.len() != responses.len() {
        return Err(RegressionError::Lengths(covariates.len(), responses.len()));
    }
    let n_grid = opts.size();
    if n_grid == 0 {
        return Err(RegressionError::Factorization { n: 0, n0: opts.n0, nr: opts.n_r, ns: opts.n_s });
    }
    for y in responses {
        spec.check(y)?;
    }
    let weights = weight_fn.weights(space, x, covariates)?;
    fit_conditional_weighted(spec, responses, x, weights, opts)
}

/// The pipeline for precomputed weights.
pub fn fit_conditional_weighted<T: Real>(
    spec: &ManifoldSpec,
    responses: &[ManifoldPoint<T>],
    x: &[f64],
    weights: Vec<f64>,
    opts: &ConditionalOptions<T>,
) -> Result<ConditionalFit<T>> {
    let n_grid = opts.size();
    let support: Vec<usize> = (0..responses.len()).filter(|&j| weights[j] > 0.0).collect();
    if support.is_empty() {
        return Err(QuantileError::BadWeights.into());
    }
    let pts: Vec<ManifoldPoint<T>> = support.iter().map(|&j| responses[j].clone()).collect();
    let w: Vec<T> = support.iter().map(|&j| T::lit(weights[j])).collect();
    let seeds = GridSeeds::from_seed(opts.seed);
    let mode = opts.mode.unwrap_or_else(|| GridMode::default_for(spec));

    let theta = frechet_mean(spec, responses, &weights)?.point;
    let (center, pole_image) = if let CenterRule::FixedCenter(c) = &opts.center {
        (c.clone(), None)
    } else {
        let reference: Vec<ManifoldPoint<T>> = spec.uniform_sample(n_grid, seeds.reference);
        let cost = cost_matrix(spec, &reference, &pts)?;
        let plan = solve_kantorovich(&cost, &w)?;
        let j_star = crate::quantile::nearest(spec, &pts, &theta);
        let mut best: Option<(usize, T, T)> = None;
        for &(i, j, p) in &plan.entries {
            if j != j_star {
                continue;
            }
            let d = spec.dist2(&reference[i], &theta);
            let better = match best {
                None => true,
                Some((_, bp, bd)) => p > bp || (p == bp && d < bd),
            };
            if better {
                best = Some((i, p, d));
            }
        }
        let (l, _, _) = best.expect("every column carries mass");
        let g = reference[l].clone();
        (opts.center.center_at(spec, &g)?, Some(g))
    };

    let grid = build_grid(spec, &center, opts.n_r, opts.n_s, opts.n0, seeds.structured, mode)?;
    let cost = cost_matrix(spec, &grid.points, &pts)?;
    let plan = solve_kantorovich(&cost, &w)?;

    let ring0: Vec<&ManifoldPoint<T>> = (0..grid.len()).filter(|&i| grid.ring[i] == 0).map(|i| &grid.points[i]).collect();
    let to_center = |j: usize| ring0.iter().map(|g| spec.dist2(g, &pts[j])).fold(T::infinity(), T::min);
    let mut image = vec![usize::MAX; grid.len()];
    let mut best_mass = vec![T::zero(); grid.len()];
    for &(i, j, p) in &plan.entries {
        let cur = image[i];
        let take = if cur == usize::MAX || p > best_mass[i] {
            true
        } else if p == best_mass[i] {
            let (dn, dc) = (to_center(j), to_center(cur));
            dn < dc || (dn == dc && j < cur)
        } else {
            false
        };
        if take {
            image[i] = j;
            best_mass[i] = p;
        }
    }
    let image: Vec<usize> = image.into_iter().map(|j| support[j]).collect();
    let mut coupling = plan;
    for e in &mut coupling.entries {
        e.1 = support[e.1];
    }
    let mut v = vec![T::zero(); responses.len()];
    for (k, &j) in support.iter().enumerate() {
        v[j] = coupling.col_potentials[k];
    }
    coupling.col_potentials = v;
    coupling.cols = responses.len();

    Ok(ConditionalFit { x: x.to_vec(), weights, support, theta, pole_image, center, grid, coupling, image })
}
