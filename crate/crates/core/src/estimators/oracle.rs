//! Direct numerical evaluation of the radial estimators' defining integrals.
//!
//! Independent of the closed forms: both the direct and the reflected kernel
//! terms are integrated over `[0, ∞)` with adaptive Gauss-Kronrod, splitting
//! the range into panels no longer than half an oscillation of `Ω(ru)`.

use std::f64::consts::PI;

use super::{EstimatorKind, EstimatorSpec};
use crate::error::{Error, Result};
use crate::kernels::PseudoDataset;
use crate::specfun::j0;
use crate::specfun::quad::gauss_kronrod;

/// Gaussian kernel truncation in bandwidths; the two-sided tail beyond is
/// about `2e-17`.
const GAUSS_CUTOFF: f64 = 8.5;
const PANEL_TOL: f64 = 1e-14;

/// `Ω_d(x)` of the isotropic representation for `d` in `{1, 2, 3}`.
fn omega(dim: usize, x: f64) -> f64 {
    match dim {
        1 => x.cos(),
        2 => j0(x),
        _ => {
            if x.abs() < 1e-4 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            }
        }
    }
}

/// Unit-variance estimator at `r > 0` by quadrature of its definition.
///
/// The isotropic kind accepts `dim` in `{1, 2, 3}` here, wider than the
/// closed forms.
pub fn quadrature_oracle(spec: &EstimatorSpec, pseudo: &PseudoDataset, r: f64) -> Result<f64> {
    spec.kernel.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("quadrature_oracle needs r > 0, got {r}")));
    }
    if pseudo.dim() != 1 {
        return Err(Error::Unsupported(
            "quadrature_oracle covers the radial kinds only".into(),
        ));
    }
    let dim = spec.dim;
    let outer: Box<dyn Fn(f64) -> f64> = match spec.kind {
        EstimatorKind::Isotropic => {
            if !(1..=3).contains(&dim) {
                return Err(Error::Unsupported(format!(
                    "quadrature_oracle supports dimensions 1 to 3, got {dim}"
                )));
            }
            Box::new(move |u: f64| omega(dim, r * u))
        }
        EstimatorKind::Monotone => Box::new(move |u: f64| (-(r * u) * (r * u)).exp()),
        EstimatorKind::General => {
            return Err(Error::Unsupported(
                "quadrature_oracle covers the radial kinds only".into(),
            ))
        }
    };
    let kernel = spec.kernel;
    let reach = kernel.family.support().unwrap_or(GAUSS_CUTOFF) * kernel.h;
    // Panels of at most half a period of the oscillating factor.
    let panel = (PI / r).min(reach);
    let mut total = 0.0;
    for &v in pseudo.values() {
        // Direct term K_h(u − v) on u >= 0.
        let lo = (v - reach).max(0.0);
        let hi = v + reach;
        total += integrate_panels(&|u: f64| outer(u) * kernel.density(u - v), lo, hi, panel)?;
        // Reflected term K_h(u + v), non-zero on [0, reach − v].
        if reach > v {
            total += integrate_panels(&|u: f64| outer(u) * kernel.density(u + v), 0.0, reach - v, panel)?;
        }
    }
    Ok(total / pseudo.len() as f64)
}

fn integrate_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, width: f64) -> Result<f64> {
    let count = ((b - a) / width).ceil().max(1.0) as usize;
    let step = (b - a) / count as f64;
    let mut sum = 0.0;
    for i in 0..count {
        let lo = a + i as f64 * step;
        let hi = if i + 1 == count { b } else { lo + step };
        sum += gauss_kronrod(f, lo, hi, PANEL_TOL, 2_000)?;
    }
    Ok(sum)
}
