//! Spatial fields and Gaussian-process realizations.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::truth::TruthFunction;
use crate::error::{Error, Result};

/// Axis-aligned box, one `(low, high)` pair per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::config("domain needs at least one coordinate"));
        }
        if bounds.iter().any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::config("domain bounds must be finite with low < high"));
        }
        Ok(Domain { bounds })
    }

    /// `[0, side]^dim`.
    pub fn cube(dim: usize, side: f64) -> Result<Self> {
        Self::new(vec![(0.0, side); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }
}

impl Default for Domain {
    /// The square `[0, 10/√2]²`, whose diagonal is 10.
    fn default() -> Self {
        Domain {
            bounds: vec![(0.0, 10.0 / std::f64::consts::SQRT_2); 2],
        }
    }
}

/// Values `Z(s_i)` at `w` distinct locations in `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialField {
    locations: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
}

impl SpatialField {
    pub fn new(dim: usize, locations: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || locations.len() != dim * values.len() {
            return Err(Error::config(format!(
                "{} coordinates do not match {} values of dimension {dim}",
                locations.len(),
                values.len()
            )));
        }
        if values.len() < 2 {
            return Err(Error::config("a spatial field needs at least two locations"));
        }
        if locations.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::domain("spatial field contains non-finite values"));
        }
        let field = SpatialField { locations, values, dim };
        for i in 0..field.len() {
            for j in 0..i {
                if field.location(i) == field.location(j) {
                    return Err(Error::domain(format!("locations {j} and {i} coincide")));
                }
            }
        }
        Ok(field)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn location(&self, i: usize) -> &[f64] {
        &self.locations[i * self.dim..(i + 1) * self.dim]
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.location(i), self.location(j))
    }
}

#[inline]
fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Uniform locations in `domain` and a mean-zero Gaussian realization with
/// covariance `truth(|s_a − s_b|)`.
pub fn simulate_gp<R: Rng + ?Sized>(truth: &TruthFunction, w: usize, domain: &Domain, rng: &mut R) -> Result<SpatialField> {
    truth.validate()?;
    if w < 2 {
        return Err(Error::config(format!("need at least two locations, got {w}")));
    }
    let mut locations = Vec::with_capacity(w * domain.dim());
    for _ in 0..w {
        for &(lo, hi) in &domain.bounds {
            locations.push(rng.random_range(lo..hi));
        }
    }
    let values = sample_at(truth, domain.dim(), &locations, rng)?;
    SpatialField::new(domain.dim(), locations, values)
}

/// One Gaussian draw at fixed locations (row-major, dimension `dim`).
pub fn sample_at<R: Rng + ?Sized>(truth: &TruthFunction, dim: usize, locations: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let w = locations.len() / dim;
    let cov = DMatrix::from_fn(w, w, |a, b| {
        truth.eval(distance(&locations[a * dim..(a + 1) * dim], &locations[b * dim..(b + 1) * dim]))
    });
    let l = cholesky_with_jitter(cov)?;
    let z = DVector::from_fn(w, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok((l * z).iter().copied().collect())
}

/// Lower Cholesky factor of `cov + εI`, trying `ε = 1e-10·tr/w` and
/// escalating tenfold up to `1e-4·tr/w`.
pub fn cholesky_with_jitter(cov: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let w = cov.nrows();
    let scale = cov.trace() / w as f64;
    let mut jitter = 1e-10 * scale;
    while jitter <= 1e-4 * scale * (1.0 + 1e-9) {
        let mut m = cov.clone();
        for i in 0..w {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = m.cholesky() {
            return Ok(ch.l());
        }
        jitter *= 10.0;
    }
    Err(Error::numeric(format!(
        "covariance matrix of size {w} is not positive definite even with jitter {:e}",
        1e-4 * scale
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_tiny_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(simulate_gp(&TruthFunction::WaveCov, 1, &Domain::default(), &mut rng).is_err());
        assert!(SpatialField::new(2, vec![0.0, 0.0, 0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let a = simulate_gp(&TruthFunction::WaveCov, 30, &Domain::default(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = simulate_gp(&TruthFunction::WaveCov, 30, &Domain::default(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 30);
        let side = 10.0 / std::f64::consts::SQRT_2;
        assert!(a.locations().iter().all(|c| (0.0..side).contains(c)));
    }

    #[test]
    fn marginal_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 200;
        let s: f64 = (0..n)
            .map(|_| sample_at(&TruthFunction::ExpCov, 2, &[1.0, 1.0], &mut rng).unwrap()[0].powi(2))
            .sum();
        let var = s / n as f64;
        assert!((var - 1.0).abs() < 0.35, "{var}");
    }

    #[test]
    fn empirical_covariance_matches_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let truth = TruthFunction::WaveCov;
        let locs = [0.0, 0.0, 1.0, 0.0, 0.0, 2.5, 3.0, 3.0, 0.4, 0.3];
        let reps = 500;
        let mut acc = [[0.0f64; 5]; 5];
        for _ in 0..reps {
            let z = sample_at(&truth, 2, &locs, &mut rng).unwrap();
            for a in 0..5 {
                for b in 0..5 {
                    acc[a][b] += z[a] * z[b];
                }
            }
        }
        for a in 0..5 {
            for b in 0..5 {
                let d = distance(&locs[2 * a..2 * a + 2], &locs[2 * b..2 * b + 2]);
                let t = truth.eval(d);
                let est = acc[a][b] / reps as f64;
                // Var(Z_a Z_b) = 1 + t², so the standard error is sqrt((1 + t²)/n).
                let se = ((1.0 + t * t) / reps as f64).sqrt();
                assert!((est - t).abs() < 5.0 * se, "({a},{b}): {est} vs {t}");
            }
        }
    }

    #[test]
    fn jitter_rescues_semidefinite_matrices() {
        // Rank one: ones everywhere.
        let cov = DMatrix::from_element(4, 4, 1.0);
        let l = cholesky_with_jitter(cov).unwrap();
        assert!((l[(0, 0)] - 1.0).abs() < 1e-4);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky_with_jitter(bad).is_err());
    }
}
