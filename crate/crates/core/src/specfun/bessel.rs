//! Bessel functions of the first kind, orders 0 and 1.
//!
//! Three regimes:
//! - `|x| <= 8`: power series (largest term below ~120, so cancellation
//!   costs at most two digits);
//! - `8 < |x| < 25`: Miller's backward recurrence normalized by
//!   `J0 + 2 * sum(J_2k) = 1`;
//! - `|x| >= 25`: Hankel's asymptotic expansion, truncated where the terms
//!   fall below `1e-17`.
//!
//! All three agree to better than `1e-14` at the switchover points.

use crate::error::{Error, Result};

pub(crate) const SERIES_LIMIT: f64 = 8.0;
pub(crate) const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// `J_order(x)` for `order` in `{0, 1}`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("bessel_j: non-finite argument {x}")));
    }
    match order {
        0 => Ok(j0(x)),
        1 => Ok(j1(x)),
        _ => Err(Error::domain(format!(
            "bessel_j: only orders 0 and 1 are provided, got {order}"
        ))),
    }
}

/// `J0(x)`; even in `x`.
#[inline]
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(0, ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller(ax).0
    } else {
        hankel(0, ax)
    }
}

/// `J1(x)`; odd in `x`.
#[inline]
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(1, ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller(ax).1
    } else {
        hankel(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Both `J0(x)` and `J1(x)`, sharing the recurrence when it applies.
#[inline]
pub fn j0_j1(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (a, b) = if ax > SERIES_LIMIT && ax < ASYMPTOTIC_LIMIT {
        miller(ax)
    } else {
        (j0(ax), j1(ax))
    };
    if x < 0.0 {
        (a, -b)
    } else {
        (a, b)
    }
}

pub(crate) fn series(order: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let (mut term, scale) = match order {
        0 => (1.0, 1.0),
        _ => (1.0, 0.5 * x),
    };
    let nu = order as f64;
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    scale * sum
}

/// Miller's backward recurrence for `x > 0`; returns `(J0, J1)`.
pub(crate) fn miller(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    let mut n = (x as usize) + 40;
    n += n % 2;
    let two_over_x = 2.0 / x;
    let mut above = 0.0f64; // J_{k+1}
    let mut cur = 1e-30f64; // J_k
    let mut norm = 0.0f64;
    let mut j1 = 0.0;
    for k in (1..=n).rev() {
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let below = k as f64 * two_over_x * cur - above;
        above = cur;
        cur = below;
        if k == 1 {
            j1 = above;
        }
        if cur.abs() > 1e250 {
            above *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += cur;
    (cur / norm, j1 / norm)
}

/// Hankel asymptotic expansion for large positive `x`.
pub(crate) fn hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        if term.abs() > prev {
            // Past the smallest term of the divergent series.
            break;
        }
        prev = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let phase = x - (0.5 * order as f64 + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * phase.cos() - q * phase.sin())
}
