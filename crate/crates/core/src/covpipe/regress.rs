//! Synthetic regression data and prediction error.

use rand::Rng;
use rand_distr::StandardNormal;

use super::truth::TruthFunction;
use crate::data::RegressionDataset;
use crate::error::{Error, Result};
use crate::estimators::FittedEstimator;

/// `n` pairs with `r` uniform on `[lo, hi]` and `y = truth(r) + ε`,
/// `ε ~ N(0, noise_sd²)`.
pub fn generate_regression<R: Rng + ?Sized>(
    truth: &TruthFunction,
    n: usize,
    domain: (f64, f64),
    noise_sd: f64,
    rng: &mut R,
) -> Result<RegressionDataset> {
    truth.validate()?;
    let (lo, hi) = domain;
    if n == 0 {
        return Err(Error::config("need at least one observation"));
    }
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::config(format!("invalid distance interval [{lo}, {hi}]")));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::config(format!("noise sd must be non-negative, got {noise_sd}")));
    }
    let mut r = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.random_range(lo..=hi);
        let e: f64 = rng.sample(StandardNormal);
        r.push(x);
        y.push(truth.eval(x) + noise_sd * e);
    }
    RegressionDataset::radial(r, y)
}

/// Root mean squared difference between the fit and the noise-free truth.
pub fn rmspe(fit: &FittedEstimator, truth: &TruthFunction, test_inputs: &[f64]) -> Result<f64> {
    if test_inputs.is_empty() {
        return Err(Error::config("rmspe needs at least one test input"));
    }
    let mut sse = 0.0;
    for &r in test_inputs {
        let d = fit.eval_radial(r)? - truth.eval(r);
        sse += d * d;
    }
    Ok((sse / test_inputs.len() as f64).sqrt())
}

/// RMS difference between two curves evaluated on `grid`.
pub fn rms_curve_error(fit: &FittedEstimator, reference: impl Fn(f64) -> f64, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::config("empty evaluation grid"));
    }
    let mut sse = 0.0;
    for &r in grid {
        let d = fit.eval_radial(r)? - reference(r);
        sse += d * d;
    }
    Ok((sse / grid.len() as f64).sqrt())
}

/// `start, start + step, …` up to and including `end` (within rounding).
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && end.is_finite() && end >= start) {
        return Err(Error::config(format!("invalid grid {start}:{end}:{step}")));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::EstimatorSpec;
    use crate::kernels::{KernelFamily, PseudoDataset};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noise_free_and_deterministic() {
        let t = TruthFunction::WaveReg;
        let d = generate_regression(&t, 50, (0.0, 10.0), 0.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for (r, y) in d.inputs().iter().zip(d.y()) {
            assert_eq!(*y, t.eval(*r));
            assert!((0.0..=10.0).contains(r));
        }
        let a = generate_regression(&t, 200, (0.0, 10.0), 0.2, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let b = generate_regression(&t, 200, (0.0, 10.0), 0.2, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
    }

    #[test]
    fn rmspe_examples() {
        // A monotone fit with one atom at 0 and h = 1 is 1/sqrt(2r² + 1).
        let fit = FittedEstimator::new(
            EstimatorSpec::monotone(KernelFamily::Gaussian, 1.0).unwrap(),
            PseudoDataset::new(vec![0.0]).unwrap(),
            1.0,
        )
        .unwrap();
        let pts = [0.0, 1.0, 2.0];
        let exp = TruthFunction::ExpCov;
        let hand = pts
            .iter()
            .map(|r: &f64| (1.0 / (2.0 * r * r + 1.0).sqrt() - (-r).exp()).powi(2))
            .sum::<f64>()
            / 3.0;
        assert!((rmspe(&fit, &exp, &pts).unwrap() - hand.sqrt()).abs() < 1e-15);
        let same = rms_curve_error(&fit, |r| fit.eval_radial(r).unwrap(), &pts).unwrap();
        assert_eq!(same, 0.0);
        let shifted = rms_curve_error(&fit, |r| fit.eval_radial(r).unwrap() + 0.1, &pts).unwrap();
        assert!((shifted - 0.1).abs() < 1e-15);
        assert!(rmspe(&fit, &exp, &[]).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(uniform_grid(0.0, 1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(uniform_grid(0.0, 7.0, 0.05).unwrap().len(), 141);
        assert!(uniform_grid(1.0, 0.0, 0.1).is_err());
    }
}
