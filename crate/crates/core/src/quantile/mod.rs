//! Center-outward empirical distribution and quantile functions: reference
//! grids, the two-step fitting pipeline, ranks, signs, contours and regions.

mod center;
mod fit;
mod frechet;
mod grid;
mod hausdorff;
pub mod latitude;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::transport::TransportError;

pub use center::{CenterRule, CenterSpec};
pub use fit::{
    extract_contour, extract_region, fit_quantiles, fit_with_grid, FitOptions, GridSeeds, QuantileFit,
};
pub(crate) use fit::nearest;
pub use frechet::{frechet_mean, FrechetMean};
pub use grid::{build_grid, GridMode, StructuredGrid};
pub use hausdorff::{directed_hausdorff, hausdorff_distance};
pub use latitude::{cap_content, latitude_profile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantileError {
    #[error("tau must lie in [0, 1], got {0}")]
    TauOutOfRange(f64),
    #[error("empty input")]
    Empty,
    #[error("weights must be nonnegative with positive total")]
    BadWeights,
    #[error("sample size {n} does not factor as n0 + nR * nS = {n0} + {nr} * {ns}")]
    Factorization { n: usize, n0: usize, nr: usize, ns: usize },
    #[error("unsupported center: {0}")]
    UnsupportedCenter(String),
    #[error("equispaced grids need contours of dimension <= 1 (manifold dimension {0})")]
    EquispacedDim(usize),
    #[error("sample points {0} and {1} coincide")]
    Duplicate(usize, usize),
    #[error("order {r} outside 0..={max}")]
    OrderOutOfRange { r: usize, max: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}
