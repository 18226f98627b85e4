//! Point estimates of a covariance function and the variance update.

use serde::{Deserialize, Serialize};

use super::gp::SpatialField;
use crate::data::RegressionDataset;
use crate::error::{Error, Result};
use crate::estimators::{BatchEvaluator, FittedEstimator};

/// Smallest variance the update will return.
pub const SIGMA2_FLOOR: f64 = 1e-12;

/// Off-diagonal covariance point estimates `(r_ij, ĉ_ij)` for `i < j`, plus
/// the sample variance from the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovPointSet {
    pub distances: Vec<f64>,
    pub products: Vec<f64>,
    pub diagonal_variance: f64,
}

impl CovPointSet {
    pub fn new(distances: Vec<f64>, products: Vec<f64>, diagonal_variance: f64) -> Result<Self> {
        if distances.len() != products.len() {
            return Err(Error::config(format!(
                "{} distances but {} products",
                distances.len(),
                products.len()
            )));
        }
        if distances.is_empty() {
            return Err(Error::config("covariance point set is empty"));
        }
        if distances.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::domain("distances must be finite and non-negative"));
        }
        if products.iter().any(|c| !c.is_finite()) || !(diagonal_variance >= 0.0 && diagonal_variance.is_finite()) {
            return Err(Error::domain("point estimates must be finite"));
        }
        Ok(CovPointSet {
            distances,
            products,
            diagonal_variance,
        })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    /// The points as a radial regression dataset with responses `ĉ/σ²`.
    pub fn normalized(&self, sigma2: f64) -> Result<RegressionDataset> {
        RegressionDataset::radial(
            self.distances.clone(),
            self.products.iter().map(|c| c / sigma2).collect(),
        )
    }

    /// Distances scaled so that the largest equals `max`.
    pub fn rescale_distances(&self, max: f64) -> Result<Self> {
        if !(max > 0.0 && max.is_finite()) {
            return Err(Error::config(format!("rescale target must be positive, got {max}")));
        }
        let current = self.distances.iter().cloned().fold(0.0, f64::max);
        if current == 0.0 {
            return Err(Error::domain("all distances are zero"));
        }
        let f = max / current;
        Ok(CovPointSet {
            distances: self.distances.iter().map(|r| r * f).collect(),
            ..self.clone()
        })
    }
}

/// `ĉ_ij = (Z_i − Z̄)(Z_j − Z̄)` for all `i < j`, with
/// `diagonal_variance = (1/w) Σ (Z_i − Z̄)²`.
pub fn matheron_points(field: &SpatialField) -> CovPointSet {
    let z = field.values();
    let w = z.len();
    let mean = z.iter().sum::<f64>() / w as f64;
    let dev: Vec<f64> = z.iter().map(|v| v - mean).collect();
    let pairs = w * (w - 1) / 2;
    let mut distances = Vec::with_capacity(pairs);
    let mut products = Vec::with_capacity(pairs);
    for i in 0..w {
        for j in (i + 1)..w {
            distances.push(field.distance(i, j));
            products.push(dev[i] * dev[j]);
        }
    }
    CovPointSet {
        distances,
        products,
        diagonal_variance: dev.iter().map(|d| d * d).sum::<f64>() / w as f64,
    }
}

/// One averaged `(r̄, c̄)` per non-empty bin `⌊r / width⌋`, in bin order.
pub fn bin_distances(points: &CovPointSet, bin_width: f64) -> Result<CovPointSet> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::config(format!("bin width must be positive, got {bin_width}")));
    }
    let mut bins: std::collections::BTreeMap<u64, (f64, f64, usize)> = Default::default();
    for (&r, &c) in points.distances.iter().zip(&points.products) {
        let e = bins.entry((r / bin_width).floor() as u64).or_insert((0.0, 0.0, 0));
        e.0 += r;
        e.1 += c;
        e.2 += 1;
    }
    let (distances, products) = bins
        .values()
        .map(|(r, c, n)| (r / *n as f64, c / *n as f64))
        .unzip();
    CovPointSet::new(distances, products, points.diagonal_variance)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigma2Update {
    pub value: f64,
    /// The denominator vanished and `value` is the previous estimate.
    pub degenerate: bool,
}

/// Least-squares scale `Σ ĉ C0(r) / Σ C0(r)²`, floored at
/// [`SIGMA2_FLOOR`]. `c0` is evaluated including its own `sigma2`.
pub fn sigma2_update(points: &CovPointSet, c0: &FittedEstimator, previous: f64) -> Result<Sigma2Update> {
    let data = RegressionDataset::radial(points.distances.clone(), points.products.clone())?;
    let eval = BatchEvaluator::new(&c0.spec, &data)?;
    let mut fitted = vec![0.0; data.len()];
    eval.evaluate(c0.pseudo.values(), &mut fitted);
    let mut num = 0.0;
    let mut den = 0.0;
    for (f, c) in fitted.iter().zip(&points.products) {
        let f = f * c0.sigma2;
        num += c * f;
        den += f * f;
    }
    if !(den > 1e-300) || !num.is_finite() {
        return Ok(Sigma2Update {
            value: previous,
            degenerate: true,
        });
    }
    Ok(Sigma2Update {
        value: (num / den).max(SIGMA2_FLOOR),
        degenerate: false,
    })
}
