//! Covariance estimation for point-referenced data and the synthetic
//! experiments around it: reference functions, Gaussian-process fields,
//! Matheron point estimates and the alternating variance refit.

mod fit;
mod gp;
mod points;
mod regress;
mod truth;

pub use fit::{fit_covariance_field, fit_covariance_points, CovarianceFit, DEFAULT_OUTER_ITERS, SIGMA2_REL_TOL};
pub use gp::{cholesky_with_jitter, sample_at, simulate_gp, Domain, SpatialField};
pub use points::{bin_distances, matheron_points, sigma2_update, CovPointSet, Sigma2Update, SIGMA2_FLOOR};
pub use regress::{generate_regression, rms_curve_error, rmspe, uniform_grid};
pub use truth::{truth_eval, TruthFunction};
