//! Univariate smoothing kernels and the reflected kernel surrogate of a
//! spectral distribution on `[0, ∞)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::phi;

/// Shape of a univariate kernel `K` with `∫K = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// `K(u) = 1/2` on `|u| <= 1`.
    Uniform,
    /// `K(u) = 3/4 (1 − u²)` on `|u| <= 1`.
    Epanechnikov,
    /// Standard normal density.
    Gaussian,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [
        KernelFamily::Uniform,
        KernelFamily::Epanechnikov,
        KernelFamily::Gaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Uniform => "uniform",
            KernelFamily::Epanechnikov => "epanechnikov",
            KernelFamily::Gaussian => "gaussian",
        }
    }

    /// Unit-bandwidth density `K(u)`.
    #[inline]
    pub fn density(self, u: f64) -> f64 {
        match self {
            KernelFamily::Uniform => {
                if u.abs() <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            KernelFamily::Epanechnikov => {
                if u.abs() <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            KernelFamily::Gaussian => (-0.5 * u * u).exp() / (2.0 * PI).sqrt(),
        }
    }

    /// Unit-bandwidth distribution function `∫_{-∞}^u K`.
    #[inline]
    pub fn cdf(self, u: f64) -> f64 {
        match self {
            KernelFamily::Uniform => (0.5 * (u + 1.0)).clamp(0.0, 1.0),
            KernelFamily::Epanechnikov => {
                let u = u.clamp(-1.0, 1.0);
                0.25 * (2.0 + 3.0 * u - u * u * u)
            }
            KernelFamily::Gaussian => phi(u),
        }
    }

    /// `∫ u² K(u) du`.
    pub fn second_moment(self) -> f64 {
        match self {
            KernelFamily::Uniform => 1.0 / 3.0,
            KernelFamily::Epanechnikov => 0.2,
            KernelFamily::Gaussian => 1.0,
        }
    }

    /// Half-width of the support, `None` for unbounded kernels.
    pub fn support(self) -> Option<f64> {
        match self {
            KernelFamily::Gaussian => None,
            _ => Some(1.0),
        }
    }

    /// One draw from the unit-bandwidth kernel.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            KernelFamily::Uniform => rng.random_range(-1.0..=1.0),
            KernelFamily::Epanechnikov => loop {
                // Rejection against the uniform envelope; acceptance rate 2/3.
                let u: f64 = rng.random_range(-1.0..=1.0);
                let accept: f64 = rng.random();
                if accept <= 1.0 - u * u {
                    break u;
                }
            },
            KernelFamily::Gaussian => rng.sample(StandardNormal),
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" | "box" => Ok(KernelFamily::Uniform),
            "epanechnikov" | "epa" => Ok(KernelFamily::Epanechnikov),
            "gaussian" | "normal" => Ok(KernelFamily::Gaussian),
            other => Err(Error::config(format!("unknown kernel family '{other}'"))),
        }
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A kernel family together with its bandwidth `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub h: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, h: f64) -> Result<Self> {
        let spec = KernelSpec { family, h };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::config(format!(
                "bandwidth must be positive and finite, got {}",
                self.h
            )));
        }
        Ok(())
    }

    /// `K_h(t) = K(t/h) / h`.
    #[inline]
    pub fn density(&self, t: f64) -> f64 {
        self.family.density(t / self.h) / self.h
    }

    #[inline]
    fn cdf(&self, t: f64) -> f64 {
        self.family.cdf(t / self.h)
    }
}

/// `K_h(t)` for a validated kernel spec.
pub fn kernel_density(spec: &KernelSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    Ok(spec.density(t))
}

/// A unit-bandwidth draw from `K`; callers scale by `h`.
pub fn kernel_sample<R: Rng + ?Sized>(spec: &KernelSpec, rng: &mut R) -> f64 {
    spec.family.sample(rng)
}

/// Pseudo data: the points whose kernel smoothing defines a surrogate
/// spectral distribution.
///
/// Radial estimators use scalar pseudo data (`dim == 1`), which must be
/// non-negative. The general estimator uses `m` vectors in `R^dim`, stored
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoDataset {
    values: Vec<f64>,
    #[serde(default = "one")]
    dim: usize,
}

fn one() -> usize {
    1
}

impl PseudoDataset {
    /// Scalar pseudo data; every value must be finite and non-negative.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("pseudo dataset must not be empty"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain(format!(
                "pseudo data must be finite and non-negative, got {v}"
            )));
        }
        Ok(PseudoDataset { values, dim: 1 })
    }

    /// `coords.len() / dim` vectors in `R^dim`.
    pub fn vectors(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::config(format!(
                "cannot split {} coordinates into vectors of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("pseudo vectors must be finite"));
        }
        Ok(PseudoDataset { values: coords, dim })
    }

    pub(crate) fn from_raw(values: Vec<f64>, dim: usize) -> Self {
        debug_assert!(dim >= 1 && values.len() % dim == 0);
        PseudoDataset { values, dim }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of pseudo points `m`.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    /// Concatenation of several datasets of equal dimension.
    pub fn merge<'a, I>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a PseudoDataset>,
    {
        let mut values = Vec::new();
        let mut dim = None;
        for p in parts {
            match dim {
                None => dim = Some(p.dim),
                Some(d) if d != p.dim => {
                    return Err(Error::config("cannot merge pseudo data of different dimensions"))
                }
                _ => {}
            }
            values.extend_from_slice(&p.values);
        }
        let dim = dim.ok_or_else(|| Error::config("nothing to merge"))?;
        if values.is_empty() {
            return Err(Error::config("nothing to merge"));
        }
        Ok(PseudoDataset { values, dim })
    }

    fn require_scalar(&self) -> Result<()> {
        if self.dim != 1 {
            return Err(Error::Unsupported(
                "the reflected surrogate is defined for scalar pseudo data only".into(),
            ));
        }
        Ok(())
    }
}

/// `G̃(u) = (1/m) Σ ∫_0^u [K_h(t − v_i) + K_h(t + v_i)] dt`.
pub fn surrogate_cdf(pseudo: &PseudoDataset, spec: &KernelSpec, u: f64) -> Result<f64> {
    spec.validate()?;
    pseudo.require_scalar()?;
    if !(u >= 0.0) {
        return Err(Error::domain(format!("surrogate_cdf needs u >= 0, got {u}")));
    }
    let m = pseudo.len() as f64;
    let total: f64 = pseudo
        .values
        .iter()
        .map(|&v| spec.cdf(u - v) - spec.cdf(-v) + spec.cdf(u + v) - spec.cdf(v))
        .sum();
    Ok((total / m).clamp(0.0, 1.0))
}

/// `ψ̃(u) = (1/m) Σ [K_h(u − v_i) + K_h(u + v_i)]`, the density of
/// [`surrogate_cdf`].
pub fn surrogate_pdf(pseudo: &PseudoDataset, spec: &KernelSpec, u: f64) -> Result<f64> {
    spec.validate()?;
    pseudo.require_scalar()?;
    if !(u >= 0.0) {
        return Err(Error::domain(format!("surrogate_pdf needs u >= 0, got {u}")));
    }
    Ok(reflected_density(&pseudo.values, spec, u))
}

#[inline]
pub(crate) fn reflected_density(values: &[f64], spec: &KernelSpec, u: f64) -> f64 {
    let s: f64 = values
        .iter()
        .map(|&v| spec.density(u - v) + spec.density(u + v))
        .sum();
    s / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quad::{adaptive_simpson, gauss_kronrod};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(family: KernelFamily, h: f64) -> KernelSpec {
        KernelSpec::new(family, h).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(kernel_density(&spec(KernelFamily::Uniform, 1.0), 0.0).unwrap(), 0.5);
        assert_eq!(
            kernel_density(&spec(KernelFamily::Epanechnikov, 1.0), 1.5).unwrap(),
            0.0
        );
        let g = kernel_density(&spec(KernelFamily::Gaussian, 2.0), 0.0).unwrap();
        assert!((g - 1.0 / (2.0 * (2.0 * PI).sqrt())).abs() < 1e-16);
    }

    #[test]
    fn invalid_bandwidth() {
        assert!(KernelSpec::new(KernelFamily::Gaussian, 0.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Gaussian, f64::NAN).is_err());
        assert!(KernelSpec::new(KernelFamily::Uniform, -1.0).is_err());
    }

    #[test]
    fn kernels_integrate_to_one_and_are_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for family in KernelFamily::ALL {
            let f = |u: f64| family.density(u);
            let total = match family.support() {
                Some(s) => adaptive_simpson(&f, -s, s, 1e-13, 1 << 22).unwrap(),
                None => gauss_kronrod(&f, -40.0, 40.0, 1e-14, 10_000).unwrap(),
            };
            assert!((total - 1.0).abs() < 1e-10, "{family}: {total}");
            let m2 = match family.support() {
                Some(s) => adaptive_simpson(&|u: f64| u * u * f(u), -s, s, 1e-13, 1 << 22).unwrap(),
                None => gauss_kronrod(&|u: f64| u * u * f(u), -40.0, 40.0, 1e-14, 10_000).unwrap(),
            };
            assert!((m2 - family.second_moment()).abs() < 1e-10);
            for _ in 0..200 {
                let t: f64 = rng.random_range(-3.0..3.0);
                assert_eq!(family.density(t), family.density(-t));
            }
        }
    }

    #[test]
    fn samples_stay_in_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for family in [KernelFamily::Uniform, KernelFamily::Epanechnikov] {
            let s = spec(family, 0.3);
            for _ in 0..10_000 {
                let e = kernel_sample(&s, &mut rng);
                assert!((-1.0..=1.0).contains(&e));
            }
        }
    }

    #[test]
    fn gaussian_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = spec(KernelFamily::Gaussian, 1.0);
        let n = 100_000;
        let mean = (0..n).map(|_| kernel_sample(&s, &mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "{mean}");
    }

    #[test]
    fn epanechnikov_sample_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let var = (0..n)
            .map(|_| KernelFamily::Epanechnikov.sample(&mut rng).powi(2))
            .sum::<f64>()
            / n as f64;
        // Var = 1/5; the sampling sd of the mean of u² is about 6e-4.
        assert!((var - 0.2).abs() < 0.004, "{var}");
    }

    #[test]
    fn surrogate_cdf_examples() {
        let p = PseudoDataset::new(vec![0.3, 1.2, 4.0]).unwrap();
        for family in KernelFamily::ALL {
            assert_eq!(surrogate_cdf(&p, &spec(family, 0.5), 0.0).unwrap(), 0.0);
        }
        let zero = PseudoDataset::new(vec![0.0]).unwrap();
        let c = surrogate_cdf(&zero, &spec(KernelFamily::Gaussian, 1.0), 40.0).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        let two = PseudoDataset::new(vec![2.0]).unwrap();
        let c = surrogate_cdf(&two, &spec(KernelFamily::Uniform, 1.0), 2.0).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
        assert!(surrogate_cdf(&two, &spec(KernelFamily::Uniform, 1.0), -0.1).is_err());
    }

    #[test]
    fn surrogate_pdf_examples() {
        let zero = PseudoDataset::new(vec![0.0]).unwrap();
        let d = surrogate_pdf(&zero, &spec(KernelFamily::Gaussian, 1.0), 0.0).unwrap();
        assert!((d - 2.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let five = PseudoDataset::new(vec![5.0]).unwrap();
        let d = surrogate_pdf(&five, &spec(KernelFamily::Uniform, 1.0), 5.0).unwrap();
        assert_eq!(d, 0.5);
        assert!(surrogate_pdf(&five, &spec(KernelFamily::Uniform, 1.0), -1.0).is_err());
    }

    #[test]
    fn surrogate_pdf_integrates_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = rng.random_range(1..8);
            let values: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..5.0)).collect();
            let h = rng.random_range(0.05..1.5);
            let p = PseudoDataset::new(values).unwrap();
            let s = spec(KernelFamily::Gaussian, h);
            let f = |u: f64| surrogate_pdf(&p, &s, u).unwrap();
            // Panels of width h so no bump is stepped over.
            let panels = (60.0 / h).ceil() as usize;
            let w = 60.0 / panels as f64;
            let total: f64 = (0..panels)
                .map(|i| gauss_kronrod(&f, i as f64 * w, (i + 1) as f64 * w, 1e-14, 1000).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "{total}");
        }
    }

    #[test]
    fn cdf_derivative_is_pdf() {
        let p = PseudoDataset::new(vec![0.1, 0.8, 2.5]).unwrap();
        let s = spec(KernelFamily::Gaussian, 0.4);
        let step = 1e-4;
        for i in 1..100 {
            let u = 0.05 * i as f64;
            let fd = (surrogate_cdf(&p, &s, u + step).unwrap() - surrogate_cdf(&p, &s, u - step).unwrap())
                / (2.0 * step);
            let pdf = surrogate_pdf(&p, &s, u).unwrap();
            assert!((fd - pdf).abs() < 1e-6, "u={u}: {fd} vs {pdf}");
        }
    }

    #[test]
    fn reflection_vanishes_far_from_boundary() {
        let h = 0.2;
        let p = PseudoDataset::new(vec![2.0, 3.5, 5.0]).unwrap();
        let s = spec(KernelFamily::Gaussian, h);
        for i in 0..100 {
            let u = 1.0 + 0.05 * i as f64;
            let plain = p.values().iter().map(|&v| s.density(u - v)).sum::<f64>() / 3.0;
            assert!((surrogate_pdf(&p, &s, u).unwrap() - plain).abs() < 1e-12);
        }
    }

    #[test]
    fn pseudo_dataset_validation() {
        assert!(PseudoDataset::new(vec![]).is_err());
        assert!(PseudoDataset::new(vec![1.0, -0.5]).is_err());
        assert!(PseudoDataset::new(vec![f64::INFINITY]).is_err());
        assert!(PseudoDataset::vectors(2, vec![1.0, 2.0, 3.0]).is_err());
        let v = PseudoDataset::vectors(2, vec![-1.0, 2.0, 3.0, 0.5]).unwrap();
        assert_eq!(v.len(), 2);
        assert!(surrogate_pdf(&v, &spec(KernelFamily::Gaussian, 1.0), 0.0).is_err());
        let a = PseudoDataset::new(vec![1.0]).unwrap();
        let b = PseudoDataset::new(vec![2.0, 3.0]).unwrap();
        assert_eq!(PseudoDataset::merge([&a, &b]).unwrap().values(), &[1.0, 2.0, 3.0]);
        assert!(PseudoDataset::merge([&a, &v]).is_err());
    }
}
