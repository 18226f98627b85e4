//! Per-datum closed forms of the radial estimators.
//!
//! Each function returns the contribution of one pseudo datum `v`, i.e.
//! `∫_0^∞ Ω(ru) [K_h(u − v) + K_h(u + v)] du`, which by evenness of `Ω`
//! equals `∫ Ω(r|u|) K_h(u − v) du` over the whole line. Averaging over the
//! pseudo data gives the estimator with unit variance.
//!
//! For the compact kernels the closed forms divide by powers of `r` and
//! cancel badly once `r (v + h)` is small, so that region is evaluated from
//! the even-moment series `Σ c_k r^{2k} E[(v + hS)^{2k}]`, `S ~ K`.

use std::f64::consts::PI;

use crate::kernels::KernelFamily;
use crate::specfun::{bessel, gen_bessel_scaled, lambda_pair, phi_diff};

/// Below this value of `r (v + h)` the compact kernels use the moment series.
pub(crate) const SERIES_RADIUS: f64 = 2.0;

/// Below this `r` the Gaussian forms use the second-order Taylor expansion.
pub(crate) const TAYLOR_RADIUS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Radial {
    /// `Ω(x) = J0(x)`.
    Bessel,
    /// `Ω(x) = exp(−x²)`.
    Gauss,
}

impl Radial {
    /// Coefficient `c` in `1 − c r² E[U²] + O(r⁴)`.
    fn taylor_coefficient(self) -> f64 {
        match self {
            Radial::Bessel => 0.25,
            Radial::Gauss => 1.0,
        }
    }
}

/// One pseudo datum's contribution at `r > 0`.
#[inline]
pub(crate) fn term(radial: Radial, family: KernelFamily, h: f64, v: f64, r: f64) -> f64 {
    debug_assert!(r > 0.0);
    if family == KernelFamily::Gaussian {
        if r < TAYLOR_RADIUS {
            return 1.0 - radial.taylor_coefficient() * r * r * (v * v + h * h);
        }
        return match radial {
            Radial::Bessel => gen_bessel_scaled(0.25 * h * h * r * r, r * v),
            Radial::Gauss => {
                if !(r * r * h * h).is_finite() {
                    return 0.0;
                }
                let q = 1.0 / (1.0 + 2.0 * h * h * r * r);
                q.sqrt() * (-v * v * r * r * q).exp()
            }
        };
    }
    if r * (v + h) <= SERIES_RADIUS {
        return moment_series(radial, family, h, v, r);
    }
    match (radial, family) {
        (Radial::Bessel, KernelFamily::Uniform) => uniform_bessel(h, v, r),
        (Radial::Bessel, _) => epanechnikov_bessel(h, v, r),
        (Radial::Gauss, KernelFamily::Uniform) => uniform_gauss(h, v, r),
        (Radial::Gauss, _) => epanechnikov_gauss(h, v, r),
    }
}

/// `(1/(2hr)) [Λ1(r(v+h)) − Λ1(r(v−h))]`.
fn uniform_bessel(h: f64, v: f64, r: f64) -> f64 {
    let (_, hi) = lambda_pair(r * (v + h));
    let (_, lo) = lambda_pair(r * (v - h));
    (hi - lo) / (2.0 * h * r)
}

/// Expanding `K((u − v)/h) = 3/4 [(1 − v²/h²) + 2uv/h² − u²/h²]` and using
/// `∫J0 = Λ1`, `∫tJ0 = tJ1`, `∫t²J0 = t²J1 − Λ0`.
fn epanechnikov_bessel(h: f64, v: f64, r: f64) -> f64 {
    let parts = |t: f64| {
        let (l0, l1) = lambda_pair(t);
        let j1 = bessel::j1(t);
        (l1, t * j1, t * t * j1 - l0)
    };
    let (a1, a2, a3) = parts(r * (v + h));
    let (b1, b2, b3) = parts(r * (v - h));
    let h2 = h * h;
    let s = (1.0 - v * v / h2) * (a1 - b1) + 2.0 * v / (h2 * r) * (a2 - b2)
        - (a3 - b3) / (h2 * r * r);
    0.75 * s / (h * r)
}

/// `(√π/(2hr)) [Φ(√2 r(v+h)) − Φ(√2 r(v−h))]`.
fn uniform_gauss(h: f64, v: f64, r: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * r;
    PI.sqrt() / (2.0 * h * r) * phi_diff(s * (v - h), s * (v + h))
}

fn epanechnikov_gauss(h: f64, v: f64, r: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * r;
    let h2 = h * h;
    let dphi = phi_diff(s * (v - h), s * (v + h));
    let lo = r * (v - h);
    let hi = r * (v + h);
    let bracket = PI.sqrt() * (1.0 - v * v / h2 - 1.0 / (2.0 * r * r * h2)) * dphi
        + ((v + h) * (-lo * lo).exp() - (v - h) * (-hi * hi).exp()) / (2.0 * r * h2);
    0.75 * bracket / (h * r)
}

/// Even moments `μ_{2j} = E[S^{2j}]` of the unit compact kernels.
#[inline]
fn kernel_even_moment(family: KernelFamily, j: usize) -> f64 {
    let n = 2.0 * j as f64;
    match family {
        KernelFamily::Uniform => 1.0 / (n + 1.0),
        KernelFamily::Epanechnikov => 3.0 / ((n + 1.0) * (n + 3.0)),
        KernelFamily::Gaussian => unreachable!("moment series is for compact kernels"),
    }
}

/// `Σ_k c_k r^{2k} E[(v + hS)^{2k}]` with `c_k = (−1/4)^k/(k!)²` (Bessel) or
/// `(−1)^k/k!` (Gauss).
fn moment_series(radial: Radial, family: KernelFamily, h: f64, v: f64, r: f64) -> f64 {
    const MAX_K: usize = 80;
    let r2 = r * r;
    let mut coef = 1.0;
    let mut sum = 1.0;
    for k in 1..MAX_K {
        let kf = k as f64;
        coef *= match radial {
            Radial::Bessel => -0.25 * r2 / (kf * kf),
            Radial::Gauss => -r2 / kf,
        };
        let t = coef * shifted_moment(family, h, v, 2 * k);
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `E[(v + hS)^n]` for even `n`, by the binomial expansion.
fn shifted_moment(family: KernelFamily, h: f64, v: f64, n: usize) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=n {
        if j > 0 {
            binom *= (n - j + 1) as f64 / j as f64;
        }
        if j % 2 == 0 {
            total += binom * v.powi((n - j) as i32) * h.powi(j as i32) * kernel_even_moment(family, j / 2);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_closed_forms_agree_at_the_switch() {
        for family in [KernelFamily::Uniform, KernelFamily::Epanechnikov] {
            for &(h, v) in &[(0.05, 0.3), (0.5, 1.0), (1.0, 0.0), (2.0, 3.0), (0.2, 0.1)] {
                for &z in &[1.5, 2.0, 2.5] {
                    let r = z / (v + h);
                    let a = moment_series(Radial::Bessel, family, h, v, r);
                    let b = match family {
                        KernelFamily::Uniform => uniform_bessel(h, v, r),
                        _ => epanechnikov_bessel(h, v, r),
                    };
                    assert!((a - b).abs() < 1e-11, "{family} bessel h={h} v={v} r={r}: {a} {b}");
                    let a = moment_series(Radial::Gauss, family, h, v, r);
                    let b = match family {
                        KernelFamily::Uniform => uniform_gauss(h, v, r),
                        _ => epanechnikov_gauss(h, v, r),
                    };
                    assert!((a - b).abs() < 1e-11, "{family} gauss h={h} v={v} r={r}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn shifted_moments() {
        // E[(v + hS)^2] = v² + h² μ2.
        let m = shifted_moment(KernelFamily::Epanechnikov, 0.5, 2.0, 2);
        assert!((m - (4.0 + 0.25 * 0.2)).abs() < 1e-15);
        let m = shifted_moment(KernelFamily::Uniform, 1.0, 0.0, 4);
        assert!((m - 0.2).abs() < 1e-15);
    }
}
