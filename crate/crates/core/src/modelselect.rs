//! k-fold cross-validation over a grid of bandwidths `h` and pseudo data
//! sizes `m`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::RegressionDataset;
use crate::error::{Error, Result};
use crate::estimators::{BatchEvaluator, EstimatorSpec};
use crate::idea::{self, IdeaConfig};

pub const DEFAULT_H_GRID: [f64; 8] = [0.01, 0.02, 0.05, 0.1, 0.16, 0.2, 0.5, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub h_grid: Vec<f64>,
    pub m_grid: Vec<usize>,
    pub seed: u64,
    pub replications: usize,
    /// Iteration cap passed to each fit.
    pub max_iters: usize,
}

impl CvConfig {
    pub fn new(seed: u64) -> Self {
        CvConfig {
            k: 5,
            h_grid: DEFAULT_H_GRID.to_vec(),
            m_grid: (1..=10).collect(),
            seed,
            replications: 1,
            max_iters: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::config(format!("need at least 2 folds, got {}", self.k)));
        }
        if self.h_grid.is_empty() || self.m_grid.is_empty() {
            return Err(Error::config("cross-validation grids must not be empty"));
        }
        if self.h_grid.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::config("bandwidth grid values must be positive"));
        }
        if self.m_grid.contains(&0) {
            return Err(Error::config("pseudo data sizes must be positive"));
        }
        if self.replications == 0 || self.max_iters == 0 {
            return Err(Error::config("replications and max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub h: f64,
    pub m: usize,
    /// Mean validation MSE; `+∞` when a fit failed.
    pub mean_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// One entry per `(h, m)`, `h` major.
    pub cells: Vec<CvCell>,
    pub chosen_h: f64,
    pub chosen_m: usize,
}

impl CvResult {
    pub fn chosen(&self) -> CvCell {
        *self
            .cells
            .iter()
            .find(|c| c.h == self.chosen_h && c.m == self.chosen_m)
            .expect("chosen cell is in the table")
    }
}

/// Random partition of `0..n` into `k` folds; the first `n mod k` folds get
/// one extra index.
pub fn kfold_split<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    if k == 0 || n < k {
        return Err(Error::config(format!("cannot split {n} observations into {k} folds")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(idx[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a seed and indices.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Scores every `(h, m)` cell by k-fold validation MSE and picks the
/// minimum, preferring smaller `m`, then smaller `h`, on ties.
///
/// `template` supplies the kind and kernel family; its bandwidth is
/// replaced by each grid value.
pub fn cross_validate(dataset: &RegressionDataset, template: &EstimatorSpec, config: &CvConfig) -> Result<CvResult> {
    config.validate()?;
    template.validate()?;
    let n = dataset.len();
    let splits: Vec<Vec<Vec<usize>>> = (0..config.replications)
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[u64::MAX, rep as u64]));
            kfold_split(n, config.k, &mut rng)
        })
        .collect::<Result<_>>()?;
    // Train/validation pairs shared by every cell.
    let mut pairs = Vec::new();
    for (rep, folds) in splits.iter().enumerate() {
        for (f, held) in folds.iter().enumerate() {
            let train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, fold)| fold.iter().copied())
                .collect();
            pairs.push((rep, f, dataset.subset(&train)?, dataset.subset(held)?));
        }
    }

    let grid: Vec<(usize, usize)> = (0..config.h_grid.len())
        .flat_map(|hi| (0..config.m_grid.len()).map(move |mi| (hi, mi)))
        .collect();
    let cells: Vec<CvCell> = grid
        .par_iter()
        .map(|&(hi, mi)| {
            let h = config.h_grid[hi];
            let m = config.m_grid[mi];
            let spec = template.with_h(h);
            let mean_mse = cell_score(&spec, m, hi, mi, &pairs, config).unwrap_or(f64::INFINITY);
            CvCell { h, m, mean_mse }
        })
        .collect();

    let mut best: Option<CvCell> = None;
    for c in &cells {
        let better = match best {
            None => true,
            Some(b) => {
                c.mean_mse < b.mean_mse
                    || (c.mean_mse == b.mean_mse && (c.m < b.m || (c.m == b.m && c.h < b.h)))
            }
        };
        if better {
            best = Some(*c);
        }
    }
    let best = best.expect("grid is non-empty");
    Ok(CvResult {
        cells,
        chosen_h: best.h,
        chosen_m: best.m,
    })
}

fn cell_score(
    spec: &EstimatorSpec,
    m: usize,
    hi: usize,
    mi: usize,
    pairs: &[(usize, usize, RegressionDataset, RegressionDataset)],
    config: &CvConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for (rep, fold, train, held) in pairs {
        let seed = derive_seed(config.seed, &[hi as u64, mi as u64, *rep as u64, *fold as u64]);
        let idea_cfg = IdeaConfig {
            max_iters: config.max_iters,
            ..IdeaConfig::with_m(m, seed)
        };
        let (fit, _) = idea::run(train, spec, &idea_cfg)?;
        let eval = BatchEvaluator::new(spec, held)?.exact();
        let mut pred = vec![0.0; held.len()];
        eval.evaluate(fit.pseudo.values(), &mut pred);
        let mse = held
            .y()
            .iter()
            .zip(&pred)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / held.len() as f64;
        if !mse.is_finite() {
            return Err(Error::numeric("validation error is not finite"));
        }
        total += mse;
    }
    Ok(total / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;
    use proptest::prelude::*;

    #[test]
    fn split_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let folds = kfold_split(10, 5, &mut rng).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let folds = kfold_split(7, 3, &mut rng).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
        assert_eq!(sizes, vec![3, 2, 2]);
        assert!(kfold_split(2, 3, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn split_is_a_balanced_partition(n in 2usize..200, k in 2usize..10, seed in any::<u64>()) {
            prop_assume!(n >= k);
            let folds = kfold_split(n, k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let max = folds.iter().map(|f| f.len()).max().unwrap();
            let min = folds.iter().map(|f| f.len()).min().unwrap();
            prop_assert!(max - min <= 1);
        }
    }

    fn toy() -> (RegressionDataset, EstimatorSpec) {
        let r: Vec<f64> = (0..30).map(|i| 0.15 * i as f64).collect();
        let y: Vec<f64> = r.iter().map(|x| (-x).exp()).collect();
        (
            RegressionDataset::radial(r, y).unwrap(),
            EstimatorSpec::monotone(KernelFamily::Gaussian, 1.0).unwrap(),
        )
    }

    #[test]
    fn single_cell_is_chosen() {
        let (data, spec) = toy();
        let cfg = CvConfig {
            h_grid: vec![0.3],
            m_grid: vec![2],
            max_iters: 10,
            ..CvConfig::new(3)
        };
        let res = cross_validate(&data, &spec, &cfg).unwrap();
        assert_eq!(res.cells.len(), 1);
        assert_eq!((res.chosen_h, res.chosen_m), (0.3, 2));
    }

    #[test]
    fn chosen_is_minimum_and_deterministic() {
        let (data, spec) = toy();
        let cfg = CvConfig {
            h_grid: vec![0.1, 0.5],
            m_grid: vec![1, 3],
            max_iters: 15,
            k: 3,
            ..CvConfig::new(9)
        };
        let res = cross_validate(&data, &spec, &cfg).unwrap();
        let min = res.cells.iter().map(|c| c.mean_mse).fold(f64::INFINITY, f64::min);
        assert_eq!(res.chosen().mean_mse, min);
        assert!(res.cells.iter().all(|c| c.mean_mse.is_finite()));
        assert_eq!(res, cross_validate(&data, &spec, &cfg).unwrap());
        let twice = CvConfig { replications: 2, ..cfg };
        let res2 = cross_validate(&data, &spec, &twice).unwrap();
        assert_eq!(res2.cells.len(), res.cells.len());
        assert!(res2.cells.iter().all(|c| c.mean_mse.is_finite()));
    }

    #[test]
    fn seeds_depend_on_every_part() {
        let a = derive_seed(1, &[0, 1, 0, 0]);
        assert_ne!(a, derive_seed(1, &[1, 0, 0, 0]));
        assert_ne!(a, derive_seed(2, &[0, 1, 0, 0]));
        assert_eq!(a, derive_seed(1, &[0, 1, 0, 0]));
    }

    #[test]
    fn config_validation() {
        assert!(CvConfig { k: 1, ..CvConfig::new(0) }.validate().is_err());
        assert!(CvConfig { h_grid: vec![], ..CvConfig::new(0) }.validate().is_err());
        assert!(CvConfig { m_grid: vec![0], ..CvConfig::new(0) }.validate().is_err());
    }
}
