//! Positive definite regression estimators built from kernel-smoothed
//! spectral surrogates.
//!
//! - `General`: `f(x) = (σ²/m) Σ cos(2π x·v_i) exp(−2π² xᵀHx)` with pseudo
//!   vectors `v_i ∈ R^d` and diagonal `H` (Gaussian kernel only).
//! - `Isotropic`: `g(r) = (σ²/m) Σ ∫_0^∞ J0(ru) [K_h(u − v_i) + K_h(u + v_i)] du`
//!   for inputs in the plane.
//! - `Monotone`: as `Isotropic` with `exp(−r²u²)` in place of `J0(ru)`; the
//!   result is positive definite in every dimension and non-increasing in `r`.

mod batch;
mod closed;
mod oracle;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec, PseudoDataset};

pub use batch::BatchEvaluator;
pub use oracle::quadrature_oracle;

pub(crate) use closed::Radial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    General,
    Isotropic,
    Monotone,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::General => "general",
            EstimatorKind::Isotropic => "isotropic",
            EstimatorKind::Monotone => "monotone",
        }
    }

    pub fn is_radial(self) -> bool {
        !matches!(self, EstimatorKind::General)
    }

    pub(crate) fn radial(self) -> Option<Radial> {
        match self {
            EstimatorKind::General => None,
            EstimatorKind::Isotropic => Some(Radial::Bessel),
            EstimatorKind::Monotone => Some(Radial::Gauss),
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "general" => Ok(EstimatorKind::General),
            "isotropic" => Ok(EstimatorKind::Isotropic),
            "monotone" => Ok(EstimatorKind::Monotone),
            other => Err(Error::config(format!("unknown estimator kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Estimator kind, kernel and input dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    pub kernel: KernelSpec,
    pub dim: usize,
    /// Diagonal of the bandwidth matrix `H` (general kind only). `None`
    /// means `H = h² I`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<Vec<f64>>,
}

impl EstimatorSpec {
    /// Isotropic estimator on the plane.
    pub fn isotropic(family: KernelFamily, h: f64) -> Result<Self> {
        let spec = EstimatorSpec {
            kind: EstimatorKind::Isotropic,
            kernel: KernelSpec { family, h },
            dim: 2,
            bandwidth: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn monotone(family: KernelFamily, h: f64) -> Result<Self> {
        let spec = EstimatorSpec {
            kind: EstimatorKind::Monotone,
            kernel: KernelSpec { family, h },
            dim: 2,
            bandwidth: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// General estimator on `R^dim` with the Gaussian kernel.
    pub fn general(dim: usize, h: f64, bandwidth: Option<Vec<f64>>) -> Result<Self> {
        let spec = EstimatorSpec {
            kind: EstimatorKind::General,
            kernel: KernelSpec {
                family: KernelFamily::Gaussian,
                h,
            },
            dim,
            bandwidth,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A spec of the given kind with default dimension.
    pub fn of_kind(kind: EstimatorKind, family: KernelFamily, h: f64, dim: usize) -> Result<Self> {
        match kind {
            EstimatorKind::Isotropic => Self::isotropic(family, h),
            EstimatorKind::Monotone => Self::monotone(family, h),
            EstimatorKind::General => {
                if family != KernelFamily::Gaussian {
                    return Err(Error::Unsupported(
                        "the general estimator requires the Gaussian kernel".into(),
                    ));
                }
                Self::general(dim, h, None)
            }
        }
    }

    /// Same spec with bandwidth `h`.
    pub fn with_h(&self, h: f64) -> Self {
        let mut s = self.clone();
        s.kernel.h = h;
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.dim == 0 {
            return Err(Error::config("input dimension must be at least 1"));
        }
        match self.kind {
            EstimatorKind::Isotropic if self.dim != 2 => Err(Error::Unsupported(format!(
                "isotropic closed forms are available for d = 2 only, got d = {}",
                self.dim
            ))),
            EstimatorKind::General if self.kernel.family != KernelFamily::Gaussian => {
                Err(Error::Unsupported(format!(
                    "the general estimator requires the Gaussian kernel, got {}",
                    self.kernel.family
                )))
            }
            _ => {
                if let Some(b) = &self.bandwidth {
                    if self.kind != EstimatorKind::General {
                        return Err(Error::config("a bandwidth matrix applies to the general kind only"));
                    }
                    if b.len() != self.dim {
                        return Err(Error::config(format!(
                            "bandwidth diagonal has {} entries for dimension {}",
                            b.len(),
                            self.dim
                        )));
                    }
                    if b.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                        return Err(Error::config("bandwidth matrix must be positive definite"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Diagonal of `H`.
    pub fn bandwidth_diagonal(&self) -> Vec<f64> {
        self.bandwidth
            .clone()
            .unwrap_or_else(|| vec![self.kernel.h * self.kernel.h; self.dim])
    }
}

/// An estimator ready for evaluation: spec, pseudo data and variance scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedEstimator {
    pub spec: EstimatorSpec,
    pub pseudo: PseudoDataset,
    pub sigma2: f64,
}

impl FittedEstimator {
    pub fn new(spec: EstimatorSpec, pseudo: PseudoDataset, sigma2: f64) -> Result<Self> {
        let fit = FittedEstimator { spec, pseudo, sigma2 };
        fit.validate()?;
        Ok(fit)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::config(format!(
                "variance scale must be positive and finite, got {}",
                self.sigma2
            )));
        }
        let want = if self.spec.kind.is_radial() { 1 } else { self.spec.dim };
        if self.pseudo.dim() != want {
            return Err(Error::config(format!(
                "{} estimator needs pseudo data of dimension {want}, got {}",
                self.spec.kind,
                self.pseudo.dim()
            )));
        }
        if self.spec.kind.is_radial() && self.pseudo.values().iter().any(|v| *v < 0.0) {
            return Err(Error::domain("radial pseudo data must be non-negative"));
        }
        Ok(())
    }

    /// Value at an input vector; radial kinds use its Euclidean norm.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self.spec.kind {
            EstimatorKind::General => eval_general(self, x),
            _ => {
                let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                self.eval_radial(r)
            }
        }
    }

    /// Value at distance `r >= 0` for the radial kinds.
    pub fn eval_radial(&self, r: f64) -> Result<f64> {
        match self.spec.kind {
            EstimatorKind::Isotropic => eval_isotropic(self, r),
            EstimatorKind::Monotone => eval_monotone(self, r),
            EstimatorKind::General => Err(Error::Unsupported(
                "the general estimator takes vector inputs".into(),
            )),
        }
    }

    /// Values at many distances.
    pub fn eval_radial_many(&self, rs: &[f64]) -> Result<Vec<f64>> {
        rs.iter().map(|&r| self.eval_radial(r)).collect()
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Result<Self> {
        self.sigma2 = sigma2;
        self.validate()?;
        Ok(self)
    }
}

/// `(σ²/m) Σ cos(2π x·v_i) exp(−2π² xᵀHx)`.
pub fn eval_general(fit: &FittedEstimator, x: &[f64]) -> Result<f64> {
    if fit.spec.kind != EstimatorKind::General {
        return Err(Error::config(format!("eval_general on a {} estimator", fit.spec.kind)));
    }
    fit.validate()?;
    if x.len() != fit.spec.dim {
        return Err(Error::domain(format!(
            "input has dimension {}, estimator expects {}",
            x.len(),
            fit.spec.dim
        )));
    }
    if x.iter().any(|c| !c.is_finite()) {
        return Err(Error::domain("non-finite input"));
    }
    let diag = fit.spec.bandwidth_diagonal();
    Ok(fit.sigma2 * general_unit(fit.pseudo.values(), fit.spec.dim, &diag, x))
}

#[inline]
pub(crate) fn general_unit(coords: &[f64], dim: usize, diag: &[f64], x: &[f64]) -> f64 {
    let quad: f64 = x.iter().zip(diag).map(|(c, h)| c * c * h).sum();
    let damp = (-2.0 * PI * PI * quad).exp();
    let m = coords.len() / dim;
    let s: f64 = coords
        .chunks_exact(dim)
        .map(|v| (2.0 * PI * v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).cos())
        .sum();
    damp * s / m as f64
}

/// `σ² ĝ(r)` for the isotropic kind.
pub fn eval_isotropic(fit: &FittedEstimator, r: f64) -> Result<f64> {
    if fit.spec.kind != EstimatorKind::Isotropic {
        return Err(Error::config(format!("eval_isotropic on a {} estimator", fit.spec.kind)));
    }
    radial_checked(fit, Radial::Bessel, r)
}

/// `σ² q̂(r)` for the monotone kind.
pub fn eval_monotone(fit: &FittedEstimator, r: f64) -> Result<f64> {
    if fit.spec.kind != EstimatorKind::Monotone {
        return Err(Error::config(format!("eval_monotone on a {} estimator", fit.spec.kind)));
    }
    radial_checked(fit, Radial::Gauss, r)
}

fn radial_checked(fit: &FittedEstimator, radial: Radial, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("distance must be finite and non-negative, got {r}")));
    }
    fit.validate()?;
    let v = fit.sigma2 * radial_unit(radial, &fit.spec.kernel, fit.pseudo.values(), r);
    if !v.is_finite() {
        return Err(Error::numeric(format!("estimator is not finite at r = {r}")));
    }
    Ok(v)
}

/// Unit-variance radial estimator; exactly 1 at `r = 0`.
#[inline]
pub(crate) fn radial_unit(radial: Radial, kernel: &KernelSpec, values: &[f64], r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let s: f64 = values
        .iter()
        .map(|&v| closed::term(radial, kernel.family, kernel.h, v, r))
        .sum();
    s / values.len() as f64
}
