//! Reference regression and covariance functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Known isotropic functions of distance, all equal to 1 at the origin and
/// all valid covariance functions in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TruthFunction {
    /// `sin(2r)/(2r)`.
    WaveReg,
    /// `1 − (12r − r³)/20` on `(0, 2]`, `0.2` beyond.
    SphericalReg,
    /// `sin(r)/r`.
    WaveCov,
    /// `exp(−r)`.
    ExpCov,
    /// `sin(cr)/(cr)`.
    WaveScaled { c: f64 },
    /// `1 − (b/2)(3cr − c³r³)` on `(0, 1/c]`, `1 − b` beyond.
    SphericalScaled { b: f64, c: f64 },
    /// `exp(−cr)`.
    ExpScaled { c: f64 },
}

impl TruthFunction {
    pub fn validate(&self) -> Result<()> {
        let ok = |c: f64| c > 0.0 && c.is_finite();
        match *self {
            TruthFunction::WaveScaled { c } | TruthFunction::ExpScaled { c } if !ok(c) => {
                Err(Error::config(format!("scale c must be positive, got {c}")))
            }
            TruthFunction::SphericalScaled { b, c } if !ok(c) || !(b > 0.0 && b <= 1.0) => Err(
                Error::config(format!("spherical family needs c > 0 and b in (0, 1], got b={b}, c={c}")),
            ),
            _ => Ok(()),
        }
    }

    /// Value at `r >= 0`.
    pub fn eval(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 1.0;
        }
        let sinc = |x: f64| x.sin() / x;
        match *self {
            TruthFunction::WaveReg => sinc(2.0 * r),
            TruthFunction::SphericalReg => {
                if r <= 2.0 {
                    1.0 - (12.0 * r - r * r * r) / 20.0
                } else {
                    0.2
                }
            }
            TruthFunction::WaveCov => sinc(r),
            TruthFunction::ExpCov => (-r).exp(),
            TruthFunction::WaveScaled { c } => sinc(c * r),
            TruthFunction::SphericalScaled { b, c } => {
                if r <= 1.0 / c {
                    let x = c * r;
                    1.0 - 0.5 * b * (3.0 * x - x * x * x)
                } else {
                    1.0 - b
                }
            }
            TruthFunction::ExpScaled { c } => (-c * r).exp(),
        }
    }
}

/// `truth(r)` with a domain check.
pub fn truth_eval(truth: &TruthFunction, r: f64) -> Result<f64> {
    truth.validate()?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("distance must be non-negative, got {r}")));
    }
    Ok(truth.eval(r))
}

impl fmt::Display for TruthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruthFunction::WaveReg => write!(f, "wave-reg"),
            TruthFunction::SphericalReg => write!(f, "spherical-reg"),
            TruthFunction::WaveCov => write!(f, "wave-cov"),
            TruthFunction::ExpCov => write!(f, "exp-cov"),
            TruthFunction::WaveScaled { c } => write!(f, "wave-scaled:c={c}"),
            TruthFunction::SphericalScaled { b, c } => write!(f, "spherical-scaled:b={b},c={c}"),
            TruthFunction::ExpScaled { c } => write!(f, "exp-scaled:c={c}"),
        }
    }
}

impl FromStr for TruthFunction {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form, e.g. `wave-scaled:c=2`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, p),
            None => (s, ""),
        };
        let mut b = None;
        let mut c = None;
        for part in params.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::config(format!("truth parameter '{part}' is not key=value")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("truth parameter '{part}' is not a number")))?;
            match key.trim() {
                "b" => b = Some(value),
                "c" => c = Some(value),
                other => return Err(Error::config(format!("unknown truth parameter '{other}'"))),
            }
        }
        let need = |x: Option<f64>, k: &str| {
            x.ok_or_else(|| Error::config(format!("truth '{name}' needs parameter {k}")))
        };
        let plain = |t: TruthFunction| {
            if b.is_some() || c.is_some() {
                Err(Error::config(format!("truth '{name}' takes no parameters")))
            } else {
                Ok(t)
            }
        };
        let truth = match name.trim().to_ascii_lowercase().as_str() {
            "wave-reg" => plain(TruthFunction::WaveReg)?,
            "spherical-reg" => plain(TruthFunction::SphericalReg)?,
            "wave-cov" => plain(TruthFunction::WaveCov)?,
            "exp-cov" => plain(TruthFunction::ExpCov)?,
            "wave-scaled" => TruthFunction::WaveScaled { c: need(c, "c")? },
            "spherical-scaled" => TruthFunction::SphericalScaled {
                b: need(b, "b")?,
                c: need(c, "c")?,
            },
            "exp-scaled" => TruthFunction::ExpScaled { c: need(c, "c")? },
            other => return Err(Error::config(format!("unknown truth function '{other}'"))),
        };
        truth.validate()?;
        Ok(truth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(truth_eval(&TruthFunction::WaveReg, 0.0).unwrap(), 1.0);
        assert!((truth_eval(&TruthFunction::SphericalReg, 2.5).unwrap() - 0.2).abs() < 1e-15);
        let v = truth_eval(&TruthFunction::WaveReg, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(v.abs() < 1e-16);
        assert!(truth_eval(&TruthFunction::ExpCov, -1.0).is_err());
    }

    #[test]
    fn spherical_families_are_continuous() {
        let eps = 1e-9;
        let t = TruthFunction::SphericalReg;
        assert!((t.eval(2.0 - eps) - t.eval(2.0 + eps)).abs() < 1e-8);
        let s = TruthFunction::SphericalScaled { b: 0.8, c: 0.5 };
        assert!((s.eval(2.0 - eps) - s.eval(2.0 + eps)).abs() < 1e-8);
        assert!((s.eval(2.0) - 0.2).abs() < 1e-15);
        // The regression spherical is the widely supported scaled member.
        for i in 1..100 {
            let r = 0.05 * i as f64;
            assert!((t.eval(r) - s.eval(r)).abs() < 1e-14);
        }
    }

    #[test]
    fn parse_round_trip() {
        for t in [
            TruthFunction::WaveReg,
            TruthFunction::SphericalReg,
            TruthFunction::WaveCov,
            TruthFunction::ExpCov,
            TruthFunction::WaveScaled { c: 2.0 },
            TruthFunction::SphericalScaled { b: 0.8, c: 0.5 },
            TruthFunction::ExpScaled { c: 0.25 },
        ] {
            assert_eq!(t.to_string().parse::<TruthFunction>().unwrap(), t);
        }
        assert!("wave-scaled".parse::<TruthFunction>().is_err());
        assert!("spherical-scaled:b=2,c=1".parse::<TruthFunction>().is_err());
        assert!("wave-reg:c=1".parse::<TruthFunction>().is_err());
        assert!("nope".parse::<TruthFunction>().is_err());
    }
}
