use rayon::prelude::*;

use super::QuantileError;
use crate::geometry::{ManifoldPoint, ManifoldSpec};
use crate::Real;

/// `sup_{a in A} inf_{b in B} d(a, b)`.
pub fn directed_hausdorff<T: Real>(spec: &ManifoldSpec, a: &[ManifoldPoint<T>], b: &[ManifoldPoint<T>]) -> T {
    a.par_iter()
        .map(|x| b.iter().map(|y| spec.dist2(x, y)).fold(T::infinity(), T::min))
        .reduce(|| T::zero(), T::max)
        .sqrt()
}

pub fn hausdorff_distance<T: Real>(
    spec: &ManifoldSpec,
    a: &[ManifoldPoint<T>],
    b: &[ManifoldPoint<T>],
) -> Result<T, QuantileError> {
    if a.is_empty() || b.is_empty() {
        return Err(QuantileError::Empty);
    }
    for p in a.iter().chain(b) {
        spec.check(p)?;
    }
    Ok(directed_hausdorff(spec, a, b).max(directed_hausdorff(spec, b, a)))
}
