use rayon::prelude::*;

use super::QuantileError;
use crate::geometry::{log_factor, ManifoldPoint, ManifoldSpec, TangentVector};
use crate::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct FrechetMean<T> {
    pub point: ManifoldPoint<T>,
    /// `sum_j w_j d^2(Y_j, y) / 2` at the returned point.
    pub objective: T,
    pub iterations: usize,
    pub grad_norm: T,
}

fn objective<T: Real>(spec: &ManifoldSpec, pts: &[&ManifoldPoint<T>], w: &[T], y: &ManifoldPoint<T>) -> T {
    let half = T::lit(0.5);
    pts.iter().zip(w).map(|(p, wj)| *wj * half * spec.dist2(p, y)).sum()
}

/// Weighted sum of log maps; factors on the cut locus contribute nothing.
fn descent_direction<T: Real>(spec: &ManifoldSpec, pts: &[&ManifoldPoint<T>], w: &[T], y: &ManifoldPoint<T>) -> Vec<T> {
    let mut g = vec![T::zero(); spec.ambient_dim()];
    let mut buf = vec![T::zero(); spec.ambient_dim()];
    for (p, wj) in pts.iter().zip(w) {
        for k in 0..spec.num_factors() {
            let r = spec.factor_range(k);
            if log_factor(&y.coords()[r.clone()], &p.coords()[r.clone()], &mut buf[r.clone()]) {
                for (gi, bi) in g[r.clone()].iter_mut().zip(&buf[r]) {
                    *gi += *wj * *bi;
                }
            }
        }
    }
    g
}

/// Weighted Frechet mean: best sample point by exhaustive scan, then
/// Riemannian gradient descent with Armijo backtracking.
pub fn frechet_mean<T: Real>(
    spec: &ManifoldSpec,
    points: &[ManifoldPoint<T>],
    weights: &[f64],
) -> Result<FrechetMean<T>, QuantileError> {
    if points.is_empty() {
        return Err(QuantileError::Empty);
    }
    if weights.len() != points.len() || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(QuantileError::BadWeights);
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(QuantileError::BadWeights);
    }
    for p in points {
        spec.check(p)?;
    }
    let support: Vec<usize> = (0..points.len()).filter(|&j| weights[j] > 0.0).collect();
    let pts: Vec<&ManifoldPoint<T>> = support.iter().map(|&j| &points[j]).collect();
    let w: Vec<T> = support.iter().map(|&j| T::lit(weights[j] / total)).collect();

    let scores: Vec<T> = pts.par_iter().map(|y| objective(spec, &pts, &w, y)).collect();
    let mut best = 0;
    for (k, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = k;
        }
    }
    let mut y = pts[best].clone();
    let mut f = scores[best];
    let mut step = T::one();
    let mut iterations = 0;
    let mut grad_norm = T::infinity();
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(1e3));
    while iterations < 200 {
        let g = descent_direction(spec, &pts, &w, &y);
        let gn2: T = g.iter().map(|x| *x * *x).sum();
        grad_norm = gn2.sqrt();
        if grad_norm < tol {
            break;
        }
        iterations += 1;
        // Once the predicted decrease is below the rounding noise of the
        // objective, steps are judged by the gradient norm instead.
        let noisy = gn2 * step <= T::epsilon() * T::lit(1e3) * (f.abs() + T::one());
        let mut t = step;
        let mut moved = false;
        while t > T::lit(1e-12) {
            let v = TangentVector::from_raw(y.clone(), g.iter().map(|x| *x * t).collect());
            let cand = spec.exp(&v);
            let accept = if noisy {
                let gc: T = descent_direction(spec, &pts, &w, &cand).iter().map(|x| *x * *x).sum();
                gc < gn2
            } else {
                objective(spec, &pts, &w, &cand) <= f - T::lit(1e-4) * t * gn2
            };
            if accept {
                f = objective(spec, &pts, &w, &cand);
                y = cand;
                moved = true;
                break;
            }
            t = t * T::lit(0.5);
        }
        if !moved {
            break;
        }
        step = (t + t).min(T::one());
    }
    Ok(FrechetMean { point: y, objective: f, iterations, grad_norm })
}
