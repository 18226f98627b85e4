pub mod covpipe;
pub mod data;
pub mod error;
pub mod estimators;
pub mod idea;
pub mod io;
pub mod kernels;
pub mod modelselect;
pub mod specfun;

pub use covpipe::{CovPointSet, CovarianceFit, Domain, SpatialField, TruthFunction};
pub use data::RegressionDataset;
pub use error::{Error, Result};
pub use estimators::{EstimatorKind, EstimatorSpec, FittedEstimator};
pub use kernels::{KernelFamily, KernelSpec, PseudoDataset};
pub use idea::{IdeaConfig, IdeaRecord, IdeaTrace};
pub use io::{FitRecord, TraceSummary};
pub use modelselect::{CvConfig, CvResult};
