//! Shared fixtures for the criterion benchmarks.

use pdcov::covpipe::{generate_regression, TruthFunction};
use pdcov::{PseudoDataset, RegressionDataset};

/// Noisy wave data on [0, 10] from a fixed seed.
pub fn wave_data(n: usize, seed: u64) -> RegressionDataset {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    generate_regression(&TruthFunction::WaveReg, n, (0.0, 10.0), 0.2, &mut rng).expect("valid fixture")
}

/// `m` evenly spread positive pseudo values.
pub fn pseudo(m: usize) -> PseudoDataset {
    PseudoDataset::new((1..=m).map(|i| 0.25 * i as f64).collect()).expect("positive values")
}
