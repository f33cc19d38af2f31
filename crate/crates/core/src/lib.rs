//! Center-outward distribution functions, quantile contours, ranks and signs
//! for samples on products of unit spheres, plus nonparametric quantile
//! regression with manifold-valued responses.
//!
//! Everything numerical is generic over a [`Real`] scalar (`f32` or `f64`).
//! The aliases at the bottom of this file fix the scalar to `f64`, which is
//! what the command-line tool and most callers want.

pub mod distributions;
pub mod geometry;
pub mod io;
pub mod presets;
pub mod quantile;
pub mod regression;
pub mod rng;
pub mod scalar;
pub mod transport;

pub use scalar::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use distributions::{
    BsvmParams, Law, MixtureParams, RadialLaw, TangentVmfParams, VmfParams,
};
pub use geometry::{GeometryError, ManifoldSpec};
pub use quantile::{
    build_grid, extract_contour, extract_region, fit_quantiles, fit_with_grid, frechet_mean,
    hausdorff_distance, latitude_profile, CenterRule, CenterSpec, FitOptions, GridMode,
    QuantileError,
};
pub use regression::{
    fit_conditional, kernel_weights, knn_weights, ConditionalFit, ConditionalOptions, CovariateSpace,
    Kernel, RegressionError, WeightFunction,
};
pub use transport::{
    check_cyclical_monotonicity, cost_matrix, solve_assignment, solve_assignment_sap, solve_kantorovich,
    solve_transport, TransportError,
};

pub type Point = geometry::ManifoldPoint<f64>;
pub type Tangent = geometry::TangentVector<f64>;
pub type Costs = transport::CostMatrix<f64>;
pub type Assignment = transport::AssignmentPlan<f64>;
pub type Plan = transport::Coupling<f64>;
pub type Grid = quantile::StructuredGrid<f64>;
pub type Center = quantile::CenterSpec<f64>;
pub type Fit = quantile::QuantileFit<f64>;
pub type CondFit = regression::ConditionalFit<f64>;
