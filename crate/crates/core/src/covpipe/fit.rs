//! Alternating fit of the correlation shape and the variance scale.

use serde::{Deserialize, Serialize};

use super::gp::SpatialField;
use super::points::{matheron_points, sigma2_update, CovPointSet};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, FittedEstimator};
use crate::idea::{self, IdeaConfig, IdeaTrace};
use crate::modelselect::{cross_validate, derive_seed, CvConfig, CvResult};

/// Relative change in `σ̂²` below which the outer loop stops early.
pub const SIGMA2_REL_TOL: f64 = 1e-3;
pub const DEFAULT_OUTER_ITERS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceFit {
    /// Final estimator with `σ̂²` folded into its `sigma2`.
    pub estimator: FittedEstimator,
    /// `σ̂²` before the first fit, then after every update.
    pub sigma2_history: Vec<f64>,
    /// One trace per outer iteration.
    pub traces: Vec<IdeaTrace>,
    /// Outer iterations whose update kept the previous `σ̂²`.
    pub degenerate_updates: usize,
    pub cv: Option<CvResult>,
}

/// Fits `C(r) = σ̂² C0(r)` to covariance point estimates.
///
/// Starting from the sample variance, each outer step fits `C0` to `ĉ/σ̂²`
/// and refits `σ̂²` by least squares, until the relative change in `σ̂²`
/// drops below [`SIGMA2_REL_TOL`] or `outer_iters` steps have run. With a
/// CV config, `h` and `m` are chosen once on the initially normalized data
/// and `idea.m` / `spec.kernel.h` are ignored.
pub fn fit_covariance_points(
    points: &CovPointSet,
    spec: &EstimatorSpec,
    idea_cfg: &IdeaConfig,
    cv: Option<&CvConfig>,
    outer_iters: usize,
) -> Result<CovarianceFit> {
    spec.validate()?;
    idea_cfg.validate()?;
    if !spec.kind.is_radial() {
        return Err(Error::Unsupported(
            "covariance fitting uses the isotropic or monotone estimator".into(),
        ));
    }
    if outer_iters == 0 {
        return Err(Error::config("outer_iters must be at least 1"));
    }
    let mut sigma2 = points.diagonal_variance;
    if !(sigma2 > 0.0) {
        return Err(Error::numeric("sample variance is zero; nothing to fit"));
    }

    let mut spec = spec.clone();
    let mut idea_cfg = idea_cfg.clone();
    let mut cv_result = None;
    if let Some(cv) = cv {
        let res = cross_validate(&points.normalized(sigma2)?, &spec, cv)?;
        spec = spec.with_h(res.chosen_h);
        idea_cfg = IdeaConfig {
            m: res.chosen_m,
            l: 10 * res.chosen_m,
            ..idea_cfg
        };
        cv_result = Some(res);
    }

    let mut history = vec![sigma2];
    let mut traces = Vec::new();
    let mut degenerate = 0;
    let mut last = None;
    for t in 0..outer_iters {
        let cfg = IdeaConfig {
            seed: derive_seed(idea_cfg.seed, &[t as u64]),
            ..idea_cfg.clone()
        };
        let (c0, trace) = idea::run(&points.normalized(sigma2)?, &spec, &cfg)?;
        traces.push(trace);
        let update = sigma2_update(points, &c0, sigma2)?;
        degenerate += usize::from(update.degenerate);
        let change = (update.value - sigma2).abs() / sigma2;
        sigma2 = update.value;
        history.push(sigma2);
        last = Some(c0);
        if change < SIGMA2_REL_TOL {
            break;
        }
    }
    let estimator = last.expect("at least one outer iteration").with_sigma2(sigma2)?;
    Ok(CovarianceFit {
        estimator,
        sigma2_history: history,
        traces,
        degenerate_updates: degenerate,
        cv: cv_result,
    })
}

/// [`fit_covariance_points`] on the Matheron estimates of a field.
pub fn fit_covariance_field(
    field: &SpatialField,
    spec: &EstimatorSpec,
    idea_cfg: &IdeaConfig,
    cv: Option<&CvConfig>,
    outer_iters: usize,
) -> Result<CovarianceFit> {
    fit_covariance_points(&matheron_points(field), spec, idea_cfg, cv, outer_iters)
}
