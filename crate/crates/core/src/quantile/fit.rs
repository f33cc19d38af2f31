//! The two-step empirical pipeline: locate the center through an i.i.d.
//! reference grid, then transport the sample onto the structured grid.

use super::{build_grid, frechet_mean, CenterRule, CenterSpec, GridMode, QuantileError, StructuredGrid};
use crate::geometry::{ManifoldPoint, ManifoldSpec, TangentVector};
use crate::transport::{cost_matrix, solve_assignment};
use crate::{rng, Real};

/// Seeds of the Step 1 reference grid and the Step 2 structured grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSeeds {
    pub reference: u64,
    pub structured: u64,
}

impl GridSeeds {
    pub fn from_seed(seed: u64) -> Self {
        Self { reference: rng::derive(seed, 1), structured: rng::derive(seed, 2) }
    }
}

#[derive(Clone, Debug)]
pub struct FitOptions<T> {
    pub n0: usize,
    pub n_r: usize,
    pub n_s: usize,
    pub center: CenterRule<T>,
    /// `None` picks [`GridMode::default_for`].
    pub mode: Option<GridMode>,
    pub seed: u64,
}

impl<T: Real> FitOptions<T> {
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
pub struct QuantileFit<T> {
    pub spec: ManifoldSpec,
    pub sample: Vec<ManifoldPoint<T>>,
    pub grid: StructuredGrid<T>,
    /// `perm[i]` is the grid index of the image of observation `i`.
    pub perm: Vec<usize>,
    pub ranks: Vec<usize>,
    pub signs: Vec<TangentVector<T>>,
    pub center: CenterSpec<T>,
    /// Empirical Frechet mean (absent for fixed centers).
    pub theta: Option<ManifoldPoint<T>>,
    /// Step 1 image of the observation closest to `theta`.
    pub pole_image: Option<ManifoldPoint<T>>,
    pub objective: T,
}

impl<T: Real> QuantileFit<T> {
    pub fn n_r(&self) -> usize {
        self.grid.n_r
    }

    pub fn image(&self, i: usize) -> &ManifoldPoint<T> {
        &self.grid.points[self.perm[i]]
    }

    /// Multiplicity of each rank `0..=nR`.
    pub fn rank_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.grid.n_r + 1];
        for &r in &self.ranks {
            c[r] += 1;
        }
        c
    }

    /// Contour members ordered by the slot of their grid image, for plotting as a polyline.
    pub fn ordered_contour(&self, r: usize) -> Result<Vec<usize>, QuantileError> {
        let mut idx = extract_contour(self, r)?;
        idx.sort_by_key(|&i| (self.grid.slot[self.perm[i]], i));
        Ok(idx)
    }

    pub fn points(&self, idx: &[usize]) -> Vec<ManifoldPoint<T>> {
        idx.iter().map(|&i| self.sample[i].clone()).collect()
    }
}

pub(crate) fn check_distinct<T: Real>(points: &[ManifoldPoint<T>]) -> Result<(), QuantileError> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let key = |i: usize| points[i].coords();
    idx.sort_by(|&a, &b| {
        key(a)
            .iter()
            .zip(key(b))
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in idx.windows(2) {
        if key(w[0]) == key(w[1]) {
            return Err(QuantileError::Duplicate(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(())
}

fn check_size(n: usize, n0: usize, nr: usize, ns: usize) -> Result<(), QuantileError> {
    if n != n0 + nr * ns {
        return Err(QuantileError::Factorization { n, n0, nr, ns });
    }
    Ok(())
}

/// Step 2 against a given grid: assign, then read ranks and signs off the
/// grid construction record.
pub fn fit_with_grid<T: Real>(
    spec: &ManifoldSpec,
    sample: &[ManifoldPoint<T>],
    grid: StructuredGrid<T>,
) -> Result<QuantileFit<T>, QuantileError> {
    check_size(sample.len(), grid.n0, grid.n_r, grid.n_s)?;
    for p in sample {
        spec.check(p)?;
    }
    check_distinct(sample)?;
    let cost = cost_matrix(spec, sample, &grid.points)?;
    let plan = solve_assignment(&cost)?;
    let ranks = plan.perm.iter().map(|&g| grid.ring[g]).collect();
    let signs = plan.perm.iter().map(|&g| grid.sign(g)).collect();
    Ok(QuantileFit {
        spec: spec.clone(),
        sample: sample.to_vec(),
        center: grid.center.clone(),
        perm: plan.perm,
        ranks,
        signs,
        grid,
        theta: None,
        pole_image: None,
        objective: plan.objective,
    })
}

pub fn fit_quantiles<T: Real>(
    spec: &ManifoldSpec,
    sample: &[ManifoldPoint<T>],
    opts: &FitOptions<T>,
) -> Result<QuantileFit<T>, QuantileError> {
    let n = sample.len();
    check_size(n, opts.n0, opts.n_r, opts.n_s)?;
    for p in sample {
        spec.check(p)?;
    }
    check_distinct(sample)?;
    let seeds = GridSeeds::from_seed(opts.seed);
    let mode = opts.mode.unwrap_or_else(|| GridMode::default_for(spec));

    let (center, theta, pole_image) = if let CenterRule::FixedCenter(c) = &opts.center {
        (c.clone(), None, None)
    } else {
        let reference: Vec<ManifoldPoint<T>> = spec.uniform_sample(n, seeds.reference);
        let cost = cost_matrix(spec, sample, &reference)?;
        let plan = solve_assignment(&cost)?;
        let theta = frechet_mean(spec, sample, &vec![1.0 / n as f64; n])?.point;
        let closest = nearest(spec, sample, &theta);
        let g = reference[plan.perm[closest]].clone();
        (opts.center.center_at(spec, &g)?, Some(theta), Some(g))
    };

    let grid = build_grid(spec, &center, opts.n_r, opts.n_s, opts.n0, seeds.structured, mode)?;
    let mut fit = fit_with_grid(spec, sample, grid)?;
    fit.theta = theta;
    fit.pole_image = pole_image;
    Ok(fit)
}

/// Index of the point closest to `y`, smallest index on ties.
pub(crate) fn nearest<T: Real>(spec: &ManifoldSpec, pts: &[ManifoldPoint<T>], y: &ManifoldPoint<T>) -> usize {
    let mut best = 0;
    let mut bd = T::infinity();
    for (i, p) in pts.iter().enumerate() {
        let d = spec.dist2(p, y);
        if d < bd {
            bd = d;
            best = i;
        }
    }
    best
}

fn check_order<T: Real>(fit: &QuantileFit<T>, r: usize) -> Result<(), QuantileError> {
    if r > fit.grid.n_r || (r == 0 && fit.grid.n0 == 0) {
        return Err(QuantileError::OrderOutOfRange { r, max: fit.grid.n_r });
    }
    Ok(())
}

/// Indices of observations of rank `r`.
pub fn extract_contour<T: Real>(fit: &QuantileFit<T>, r: usize) -> Result<Vec<usize>, QuantileError> {
    check_order(fit, r)?;
    Ok((0..fit.ranks.len()).filter(|&i| fit.ranks[i] == r).collect())
}

/// Indices of observations of rank at most `r`.
pub fn extract_region<T: Real>(fit: &QuantileFit<T>, r: usize) -> Result<Vec<usize>, QuantileError> {
    if r > fit.grid.n_r {
        return Err(QuantileError::OrderOutOfRange { r, max: fit.grid.n_r });
    }
    Ok((0..fit.ranks.len()).filter(|&i| fit.ranks[i] <= r).collect())
}
