//! Exact discrete optimal transport for the cost `c = d^2 / 2`.

mod assignment;
mod network_simplex;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{dist2_raw, GeometryError, ManifoldPoint, ManifoldSpec};
use crate::{rng, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("assignment needs a square cost matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("cost matrix has {len} entries, expected {rows}x{cols}")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("cost matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("masses do not balance: rows sum to {rows}, columns to {cols}")]
    Unbalanced { rows: f64, cols: f64 },
    #[error("negative or non-finite mass {0}")]
    BadMass(f64),
    #[error("expected {expected} masses, got {got}")]
    MassCount { expected: usize, got: usize },
    #[error("network simplex failed to find a bounded pivot")]
    Unbounded,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

type Result<T> = std::result::Result<T, TransportError>;

/// Dense row-major cost matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> CostMatrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(TransportError::Shape { rows, cols, len: data.len() });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(TransportError::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::from_vec(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Sub-matrix keeping the listed columns in order.
    pub fn select_cols(&self, keep: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * keep.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(keep.iter().map(|&j| row[j]));
        }
        Self { rows: self.rows, cols: keep.len(), data }
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![T::zero(); self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentPlan<T> {
    /// `perm[i]` is the column matched to row `i`.
    pub perm: Vec<usize>,
    pub objective: T,
    /// Dual certificate: `u_i + v_j <= c_ij` with equality on matched pairs.
    pub row_potentials: Vec<T>,
    pub col_potentials: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coupling<T> {
    pub rows: usize,
    pub cols: usize,
    /// Positive entries `(i, j, p_ij)` sorted by `(i, j)`.
    pub entries: Vec<(usize, usize, T)>,
    pub objective: T,
    /// Dual certificate: `u_i + v_j <= c_ij` up to rounding.
    pub row_potentials: Vec<T>,
    pub col_potentials: Vec<T>,
}

impl<T: Real> Coupling<T> {
    pub fn row_sums(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.rows];
        for &(i, _, p) in &self.entries {
            s[i] += p;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.cols];
        for &(_, j, p) in &self.entries {
            s[j] += p;
        }
        s
    }

    /// Dual objective `sum_i a_i u_i + sum_j b_j v_j`.
    pub fn dual_objective(&self, row_mass: &[T], col_mass: &[T]) -> T {
        let a: T = row_mass.iter().zip(&self.row_potentials).map(|(m, u)| *m * *u).sum();
        let b: T = col_mass.iter().zip(&self.col_potentials).map(|(m, v)| *m * *v).sum();
        a + b
    }

    /// Most negative reduced cost `c_ij - u_i - v_j` over all pairs.
    pub fn min_reduced_cost(&self, cost: &CostMatrix<T>) -> T {
        let mut m = T::infinity();
        for i in 0..self.rows {
            let row = cost.row(i);
            for j in 0..self.cols {
                m = m.min(row[j] - self.row_potentials[i] - self.col_potentials[j]);
            }
        }
        m
    }
}

/// `c_ij = d(sources_i, targets_j)^2 / 2`, computed in parallel over rows.
pub fn cost_matrix<T: Real>(
    spec: &ManifoldSpec,
    sources: &[ManifoldPoint<T>],
    targets: &[ManifoldPoint<T>],
) -> Result<CostMatrix<T>> {
    for p in sources.iter().chain(targets) {
        spec.check(p)?;
    }
    let rows = sources.len();
    let cols = targets.len();
    let mut data = vec![T::zero(); rows * cols];
    let half = T::lit(0.5);
    let offsets = spec.offsets();
    if cols > 0 {
        data.par_chunks_mut(cols).zip(sources.par_iter()).for_each(|(row, y)| {
            for (c, z) in row.iter_mut().zip(targets) {
                *c = half * dist2_raw(offsets, y.coords(), z.coords());
            }
        });
    }
    Ok(CostMatrix { rows, cols, data })
}

fn check_square<T: Real>(cost: &CostMatrix<T>) -> Result<()> {
    if cost.rows != cost.cols {
        return Err(TransportError::NotSquare { rows: cost.rows, cols: cost.cols });
    }
    if let Some(k) = cost.data.iter().position(|x| !x.is_finite()) {
        return Err(TransportError::NonFinite { row: k / cost.cols, col: k % cost.cols });
    }
    Ok(())
}

/// Optimal permutation by the network simplex on unit masses. With equal
/// masses every basic solution is a permutation matrix, so the returned
/// vertex is an optimal assignment.
pub fn solve_assignment<T: Real>(cost: &CostMatrix<T>) -> Result<AssignmentPlan<T>> {
    check_square(cost)?;
    let n = cost.rows;
    if n == 0 {
        return Ok(AssignmentPlan { perm: vec![], objective: T::zero(), row_potentials: vec![], col_potentials: vec![] });
    }
    let ones = vec![1i64; n];
    let sol = network_simplex::solve(cost, &ones, &ones).ok_or(TransportError::Unbounded)?;
    log::debug!("assignment: n = {n} in {} pivots", sol.pivots);
    let mut perm = vec![usize::MAX; n];
    for &(i, j, f) in &sol.flows {
        debug_assert_eq!(f, 1);
        perm[i] = j;
    }
    debug_assert!(perm.iter().all(|&j| j < n));
    let objective = perm.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
    let row_potentials = sol.pi[..n].iter().map(|p| -*p).collect();
    let col_potentials = sol.pi[n..].to_vec();
    Ok(AssignmentPlan { perm, objective, row_potentials, col_potentials })
}

/// Optimal permutation by Jonker and Volgenant's shortest augmenting path
/// method. Same optimum as [`solve_assignment`]; slower on large geometric
/// instances, faster on small ones.
pub fn solve_assignment_sap<T: Real>(cost: &CostMatrix<T>) -> Result<AssignmentPlan<T>> {
    check_square(cost)?;
    let lap = assignment::lapjv(cost);
    debug_assert!(lap.row_to_col.iter().enumerate().all(|(i, &j)| lap.col_to_row[j] == i));
    let perm = lap.row_to_col;
    let objective = perm.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
    let row_potentials = perm.iter().enumerate().map(|(i, &j)| cost.get(i, j) - lap.v[j]).collect();
    Ok(AssignmentPlan { perm, objective, row_potentials, col_potentials: lap.v })
}

/// Integer mass resolution: the total is the largest multiple of the row
/// count not exceeding `2^53`, so equal row masses stay exact.
const MASS_BUDGET: i64 = 1 << 53;

/// Round nonnegative masses summing to one into integers summing to `total`
/// by the largest-remainder rule.
pub(crate) fn integer_masses(mass: &[f64], total: i64) -> Vec<i64> {
    let scaled: Vec<f64> = mass.iter().map(|m| m * total as f64).collect();
    let mut out: Vec<i64> = scaled.iter().map(|s| s.floor() as i64).collect();
    let assigned: i64 = out.iter().sum();
    let mut rest = total - assigned;
    let mut order: Vec<usize> = (0..mass.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut k = 0;
    while rest > 0 && !order.is_empty() {
        out[order[k % order.len()]] += 1;
        rest -= 1;
        k += 1;
    }
    while rest < 0 {
        let j = (0..out.len()).max_by_key(|&j| out[j]).expect("nonempty");
        out[j] -= 1;
        rest += 1;
    }
    out
}

/// General balanced transport between row masses and column masses.
pub fn solve_transport<T: Real>(cost: &CostMatrix<T>, row_mass: &[T], col_mass: &[T]) -> Result<Coupling<T>> {
    if row_mass.len() != cost.rows {
        return Err(TransportError::MassCount { expected: cost.rows, got: row_mass.len() });
    }
    if col_mass.len() != cost.cols {
        return Err(TransportError::MassCount { expected: cost.cols, got: col_mass.len() });
    }
    let a: Vec<f64> = row_mass.iter().map(|m| m.f64()).collect();
    let b: Vec<f64> = col_mass.iter().map(|m| m.f64()).collect();
    for &m in a.iter().chain(&b) {
        if !(m.is_finite() && m >= 0.0) {
            return Err(TransportError::BadMass(m));
        }
    }
    let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
    if (sa - sb).abs() > 1e-9 || sa <= 0.0 {
        return Err(TransportError::Unbalanced { rows: sa, cols: sb });
    }
    if let Some(k) = cost.data.iter().position(|x| !x.is_finite()) {
        return Err(TransportError::NonFinite { row: k / cost.cols, col: k % cost.cols });
    }

    let total = (MASS_BUDGET / cost.rows as i64) * cost.rows as i64;
    let na: Vec<f64> = a.iter().map(|m| m / sa).collect();
    let nb: Vec<f64> = b.iter().map(|m| m / sb).collect();
    let ia = integer_masses(&na, total);
    let ib = integer_masses(&nb, total);

    let keep_r: Vec<usize> = (0..cost.rows).filter(|&i| ia[i] > 0).collect();
    let keep_c: Vec<usize> = (0..cost.cols).filter(|&j| ib[j] > 0).collect();
    let sub = if keep_r.len() == cost.rows && keep_c.len() == cost.cols {
        None
    } else {
        let mut data = Vec::with_capacity(keep_r.len() * keep_c.len());
        for &i in &keep_r {
            let row = cost.row(i);
            data.extend(keep_c.iter().map(|&j| row[j]));
        }
        Some(CostMatrix { rows: keep_r.len(), cols: keep_c.len(), data })
    };
    let c = sub.as_ref().unwrap_or(cost);
    let supply: Vec<i64> = keep_r.iter().map(|&i| ia[i]).collect();
    let demand: Vec<i64> = keep_c.iter().map(|&j| ib[j]).collect();
    let sol = network_simplex::solve(c, &supply, &demand).ok_or(TransportError::Unbounded)?;
    log::debug!("network simplex: {}x{} in {} pivots", c.rows(), c.cols(), sol.pivots);

    let scale = T::lit(sa / total as f64);
    let mut objective = T::zero();
    let entries: Vec<(usize, usize, T)> = sol
        .flows
        .iter()
        .map(|&(i, j, f)| {
            let (i, j) = (keep_r[i], keep_c[j]);
            let p = T::lit(f as f64) * scale;
            objective += p * cost.get(i, j);
            (i, j, p)
        })
        .collect();

    // Duals: u_i = -pi_i, v_j = pi_{rows + j}; dropped rows/cols get the
    // tightest feasible value.
    let mut u = vec![T::nan(); cost.rows];
    let mut v = vec![T::nan(); cost.cols];
    for (k, &i) in keep_r.iter().enumerate() {
        u[i] = -sol.pi[k];
    }
    for (k, &j) in keep_c.iter().enumerate() {
        v[j] = sol.pi[keep_r.len() + k];
    }
    for j in 0..cost.cols {
        if v[j].is_nan() {
            v[j] = keep_r
                .iter()
                .map(|&i| cost.get(i, j) - u[i])
                .fold(T::infinity(), T::min);
        }
    }
    for i in 0..cost.rows {
        if u[i].is_nan() {
            u[i] = (0..cost.cols).map(|j| cost.get(i, j) - v[j]).fold(T::infinity(), T::min);
        }
    }
    Ok(Coupling {
        rows: cost.rows,
        cols: cost.cols,
        entries,
        objective,
        row_potentials: u,
        col_potentials: v,
    })
}

/// Kantorovich problem with uniform row masses `1/N` and column weights `w`.
pub fn solve_kantorovich<T: Real>(cost: &CostMatrix<T>, col_weights: &[T]) -> Result<Coupling<T>> {
    let n = T::from_usize_lossy(cost.rows.max(1));
    let rows = vec![T::one() / n; cost.rows];
    solve_transport(cost, &rows, col_weights)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityReport {
    pub trials: usize,
    /// Largest `sum c(y_i, z_i) - sum c(y_sigma(i), z_i)` seen; positive
    /// values are improving re-pairings.
    pub max_violation: f64,
    /// Indices of the pairs forming the worst cycle.
    pub worst_cycle: Vec<usize>,
}

/// Sample random cycles of length `2..=k_max` among the support pairs and
/// report the largest cost decrease obtained by shifting partners cyclically.
pub fn check_cyclical_monotonicity<T: Real>(
    spec: &ManifoldSpec,
    pairs: &[(ManifoldPoint<T>, ManifoldPoint<T>)],
    k_max: usize,
    trials: usize,
    seed: u64,
) -> MonotonicityReport {
    let m = pairs.len();
    let mut report = MonotonicityReport { trials, max_violation: 0.0, worst_cycle: Vec::new() };
    if m < 2 || k_max < 2 {
        return report;
    }
    let mut r = rng::seeded(seed);
    let c = |y: &ManifoldPoint<T>, z: &ManifoldPoint<T>| spec.dist2(y, z).f64() * 0.5;
    let mut best = f64::NEG_INFINITY;
    for _ in 0..trials {
        let k = r.random_range(2..=k_max.min(m));
        let idx = sample(&mut r, m, k).into_vec();
        let before: f64 = idx.iter().map(|&i| c(&pairs[i].0, &pairs[i].1)).sum();
        let after: f64 = (0..k).map(|t| c(&pairs[idx[(t + 1) % k]].0, &pairs[idx[t]].1)).sum();
        let viol = before - after;
        if viol > best {
            best = viol;
            report.worst_cycle = idx;
        }
    }
    report.max_violation = best.max(0.0);
    report
}
