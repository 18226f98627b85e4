//! Iterated density estimation evolutionary algorithm over pseudo datasets.
//!
//! Each iteration scores `l` pseudo datasets by mean squared error, keeps the
//! best `⌊τl⌋`, rebuilds the kernel surrogate from their union and fills the
//! rest of the next population by the smoothed bootstrap `|ṽ_I + h·e|`.
//! Iteration stops once the log-density ratio between consecutive merged
//! surrogates stays small for `kl_patience` steps in a row.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::RegressionDataset;
use crate::error::{Error, Result};
use crate::estimators::{BatchEvaluator, EstimatorKind, EstimatorSpec, FittedEstimator};
use crate::kernels::{reflected_density, KernelSpec, PseudoDataset};

/// Densities below this are raised to it before taking logarithms.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Algorithm settings. The kernel bandwidth lives on the estimator spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeaConfig {
    /// Pseudo data per dataset.
    pub m: usize,
    /// Population size.
    pub l: usize,
    /// Acceptance rate.
    pub tau: f64,
    pub kl_threshold: f64,
    pub kl_patience: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl IdeaConfig {
    /// Defaults `l = 10m`, `τ = 0.1`, threshold `1e-3` five times running,
    /// at most 200 iterations.
    pub fn with_m(m: usize, seed: u64) -> Self {
        IdeaConfig {
            m,
            l: 10 * m,
            tau: 0.1,
            kl_threshold: 1e-3,
            kl_patience: 5,
            max_iters: 200,
            seed,
        }
    }

    /// `⌊τl⌋`, tolerant of representation error in `τ`.
    pub fn selected_count(&self) -> usize {
        (self.tau * self.l as f64 + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("pseudo data size m must be at least 1"));
        }
        if self.l == 0 {
            return Err(Error::config("population size l must be at least 1"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::config(format!("acceptance rate must lie in (0, 1], got {}", self.tau)));
        }
        if self.selected_count() == 0 {
            return Err(Error::config(format!(
                "acceptance rate {} keeps no dataset out of {}",
                self.tau, self.l
            )));
        }
        if self.kl_threshold.is_nan() || self.kl_threshold < 0.0 {
            return Err(Error::config("KL threshold must be non-negative"));
        }
        if self.kl_patience == 0 || self.max_iters == 0 {
            return Err(Error::config("kl_patience and max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// `l` pseudo datasets with their objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub datasets: Vec<PseudoDataset>,
    pub scores: Vec<f64>,
    pub iteration: usize,
}

/// One completed iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdeaRecord {
    pub iter: usize,
    pub obj_min: f64,
    /// Largest objective among the selected datasets.
    pub obj_selected_max: f64,
    pub obj_mean: f64,
    pub obj_max: f64,
    pub d_kl: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdeaTrace {
    pub records: Vec<IdeaRecord>,
    pub converged: bool,
}

impl IdeaTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().map(|r| r.obj_min)
    }
}

/// `l` datasets of `m` i.i.d. Exp(1) values.
pub fn initialize<R: Rng + ?Sized>(config: &IdeaConfig, rng: &mut R) -> Result<Population> {
    config.validate()?;
    Ok(initialize_dim(config, 1, rng))
}

/// General-kind pseudo vectors start as independent signed Exp(1)
/// coordinates.
fn initialize_dim<R: Rng + ?Sized>(config: &IdeaConfig, dim: usize, rng: &mut R) -> Population {
    let datasets = (0..config.l)
        .map(|_| {
            let values: Vec<f64> = (0..config.m * dim)
                .map(|_| {
                    let e: f64 = rng.sample(Exp1);
                    if dim > 1 && rng.random::<bool>() {
                        -e
                    } else {
                        e
                    }
                })
                .collect();
            PseudoDataset::from_raw(values, dim)
        })
        .collect();
    Population {
        datasets,
        scores: vec![f64::NAN; config.l],
        iteration: 0,
    }
}

/// Mean squared error of the unit-variance estimator built from `pseudo`.
pub fn objective(dataset: &RegressionDataset, spec: &EstimatorSpec, pseudo: &PseudoDataset) -> Result<f64> {
    FittedEstimator::new(spec.clone(), pseudo.clone(), 1.0)?;
    let eval = BatchEvaluator::new(spec, dataset)?.exact();
    let mut buf = vec![0.0; dataset.len()];
    score(&eval, dataset.y(), pseudo, &mut buf)
}

fn score(eval: &BatchEvaluator, y: &[f64], pseudo: &PseudoDataset, buf: &mut [f64]) -> Result<f64> {
    eval.evaluate(pseudo.values(), buf);
    let sse: f64 = y.iter().zip(buf.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    let mse = sse / y.len() as f64;
    if !mse.is_finite() {
        return Err(Error::numeric(format!(
            "objective is not finite for pseudo data {:?}",
            pseudo.values()
        )));
    }
    Ok(mse)
}

/// Indices of the `⌊τl⌋` best datasets, ordered by `(score, index)`.
fn ranking(scores: &[f64], keep: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // Stable sort, so equal scores keep population order.
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    order.truncate(keep);
    order
}

/// The `⌊τl⌋` lowest-scoring datasets and their concatenation.
pub fn select(pop: &Population, tau: f64) -> Result<(Vec<PseudoDataset>, PseudoDataset)> {
    if pop.datasets.len() != pop.scores.len() || pop.datasets.is_empty() {
        return Err(Error::config("population datasets and scores disagree"));
    }
    if let Some(s) = pop.scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::numeric(format!("population has unevaluated score {s}")));
    }
    let keep = (tau * pop.datasets.len() as f64 + 1e-9).floor() as usize;
    if keep == 0 {
        return Err(Error::config(format!("acceptance rate {tau} keeps no dataset")));
    }
    let selected: Vec<PseudoDataset> = ranking(&pop.scores, keep)
        .into_iter()
        .map(|i| pop.datasets[i].clone())
        .collect();
    let merged = PseudoDataset::merge(&selected)?;
    Ok((selected, merged))
}

/// How replacement perturbs a resampled pseudo value.
#[derive(Debug, Clone)]
enum Perturbation {
    /// `|ṽ + h e|`, `e ~ K`.
    Reflected(KernelSpec),
    /// `ṽ + sqrt(H_dd) z_d` coordinatewise, `z ~ N(0, 1)`.
    Gaussian(Vec<f64>),
}

/// Next population: the selected datasets carried over unchanged, then
/// `l − ⌊τl⌋` datasets of smoothed-bootstrap draws from `merged`.
pub fn replace<R: Rng + ?Sized>(
    merged: &PseudoDataset,
    selected: &[PseudoDataset],
    kernel: &KernelSpec,
    config: &IdeaConfig,
    rng: &mut R,
) -> Result<Population> {
    config.validate()?;
    kernel.validate()?;
    if merged.dim() != 1 {
        return Err(Error::config("replace expects scalar pseudo data"));
    }
    Ok(replace_with(merged, selected, &Perturbation::Reflected(*kernel), config, rng))
}

fn replace_with<R: Rng + ?Sized>(
    merged: &PseudoDataset,
    selected: &[PseudoDataset],
    perturb: &Perturbation,
    config: &IdeaConfig,
    rng: &mut R,
) -> Population {
    let dim = merged.dim();
    let pool: Vec<&[f64]> = merged.points().collect();
    let fresh = config.l.saturating_sub(selected.len());
    let mut datasets: Vec<PseudoDataset> = selected.to_vec();
    for _ in 0..fresh {
        let mut values = Vec::with_capacity(config.m * dim);
        for _ in 0..config.m {
            let base = pool[rng.random_range(0..pool.len())];
            match perturb {
                Perturbation::Reflected(k) => {
                    let e = k.family.sample(rng);
                    values.push((base[0] + k.h * e).abs());
                }
                Perturbation::Gaussian(diag) => {
                    for (b, var) in base.iter().zip(diag) {
                        let z: f64 = rng.sample(StandardNormal);
                        values.push(b + var.sqrt() * z);
                    }
                }
            }
        }
        datasets.push(PseudoDataset::from_raw(values, dim));
    }
    Population {
        scores: vec![f64::NAN; datasets.len()],
        datasets,
        iteration: 0,
    }
}

/// `(1/N) Σ log(ψ_curr(v) / ψ_prev(v))` over the `N` points `v` of
/// `prev_merged`, with both densities floored at [`DENSITY_FLOOR`].
///
/// The value estimates `−KL(ψ_prev ‖ ψ_curr)` and is therefore typically
/// non-positive; termination compares its magnitude with the threshold.
pub fn kl_step(prev_merged: &PseudoDataset, curr_merged: &PseudoDataset, kernel: &KernelSpec) -> Result<f64> {
    kernel.validate()?;
    if prev_merged.dim() != 1 || curr_merged.dim() != 1 {
        return Err(Error::config("kl_step expects scalar pseudo data"));
    }
    let prev = prev_merged.values();
    let curr = curr_merged.values();
    let total: f64 = prev
        .iter()
        .map(|&v| {
            let p = reflected_density(prev, kernel, v).max(DENSITY_FLOOR);
            let c = reflected_density(curr, kernel, v).max(DENSITY_FLOOR);
            (c / p).ln()
        })
        .sum();
    Ok(total / prev.len() as f64)
}

/// Product-Gaussian mixture version of [`kl_step`] for pseudo vectors.
fn kl_step_vectors(prev: &PseudoDataset, curr: &PseudoDataset, diag: &[f64]) -> f64 {
    let density = |set: &PseudoDataset, x: &[f64]| {
        let norm: f64 = diag.iter().map(|v| (2.0 * std::f64::consts::PI * v).sqrt()).product();
        let s: f64 = set
            .points()
            .map(|p| {
                let q: f64 = p.iter().zip(x).zip(diag).map(|((a, b), v)| (a - b) * (a - b) / v).sum();
                (-0.5 * q).exp()
            })
            .sum();
        s / (norm * set.len() as f64)
    };
    let total: f64 = prev
        .points()
        .map(|x| {
            let p = density(prev, x).max(DENSITY_FLOOR);
            let c = density(curr, x).max(DENSITY_FLOOR);
            (c / p).ln()
        })
        .sum();
    total / prev.len() as f64
}

/// Fits the estimator described by `spec` to `dataset`.
///
/// The returned estimator has unit variance and uses the final merged
/// pseudo data (size `m⌊τl⌋`). If `max_iters` is reached first the trace is
/// marked as not converged.
pub fn run(
    dataset: &RegressionDataset,
    spec: &EstimatorSpec,
    config: &IdeaConfig,
) -> Result<(FittedEstimator, IdeaTrace)> {
    config.validate()?;
    spec.validate()?;
    let eval = BatchEvaluator::new(spec, dataset)?;
    let y = dataset.y();
    let (dim, perturb) = match spec.kind {
        EstimatorKind::General => (spec.dim, Perturbation::Gaussian(spec.bandwidth_diagonal())),
        _ => (1, Perturbation::Reflected(spec.kernel)),
    };
    let kl = |prev: &PseudoDataset, curr: &PseudoDataset| -> Result<f64> {
        match &perturb {
            Perturbation::Reflected(k) => kl_step(prev, curr, k),
            Perturbation::Gaussian(diag) => Ok(kl_step_vectors(prev, curr, diag)),
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pop = initialize_dim(config, dim, &mut rng);
    score_population(&eval, y, &mut pop, 0)?;
    let keep = config.selected_count();
    let mut prev_merged = PseudoDataset::merge(&pop.datasets)?;
    let mut trace = IdeaTrace::default();
    let mut hits = 0;

    for k in 1..=config.max_iters {
        pop.iteration = k;
        let order = ranking(&pop.scores, keep);
        let selected: Vec<PseudoDataset> = order.iter().map(|&i| pop.datasets[i].clone()).collect();
        let selected_scores: Vec<f64> = order.iter().map(|&i| pop.scores[i]).collect();
        let merged = PseudoDataset::merge(&selected)?;
        let d_kl = kl(&prev_merged, &merged)?;
        let n = pop.scores.len() as f64;
        trace.records.push(IdeaRecord {
            iter: k,
            obj_min: selected_scores[0],
            obj_selected_max: selected_scores[keep - 1],
            obj_mean: pop.scores.iter().sum::<f64>() / n,
            obj_max: pop.scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            d_kl,
        });
        hits = if d_kl.abs() < config.kl_threshold { hits + 1 } else { 0 };
        if hits >= config.kl_patience {
            trace.converged = true;
            prev_merged = merged;
            break;
        }
        if k == config.max_iters {
            prev_merged = merged;
            break;
        }
        let mut next = replace_with(&merged, &selected, &perturb, config, &mut rng);
        next.scores[..keep].copy_from_slice(&selected_scores);
        score_population(&eval, y, &mut next, keep)?;
        pop = next;
        prev_merged = merged;
    }

    let fit = FittedEstimator::new(spec.clone(), prev_merged, 1.0)?;
    Ok((fit, trace))
}

/// Scores datasets `from..`; results are gathered by index so the order of
/// evaluation does not matter.
fn score_population(eval: &BatchEvaluator, y: &[f64], pop: &mut Population, from: usize) -> Result<()> {
    let scores: Vec<Result<f64>> = pop.datasets[from..]
        .par_iter()
        .map_init(|| vec![0.0; y.len()], |buf, d| score(eval, y, d, buf))
        .collect();
    for (slot, s) in pop.scores[from..].iter_mut().zip(scores) {
        *slot = s?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;

    fn toy_monotone() -> (RegressionDataset, EstimatorSpec) {
        let r: Vec<f64> = (0..40).map(|i| 0.1 * i as f64).collect();
        let y: Vec<f64> = r.iter().map(|x| (-x * x * 0.8).exp()).collect();
        (
            RegressionDataset::radial(r, y).unwrap(),
            EstimatorSpec::monotone(KernelFamily::Gaussian, 0.3).unwrap(),
        )
    }

    #[test]
    fn initialize_shapes_and_determinism() {
        let cfg = IdeaConfig { l: 30, ..IdeaConfig::with_m(3, 1) };
        let mut a = ChaCha8Rng::seed_from_u64(4);
        let mut b = ChaCha8Rng::seed_from_u64(4);
        let p = initialize(&cfg, &mut a).unwrap();
        assert_eq!(p.datasets.len(), 30);
        assert!(p.datasets.iter().all(|d| d.len() == 3 && d.values().iter().all(|v| *v >= 0.0)));
        assert_eq!(p.datasets, initialize(&cfg, &mut b).unwrap().datasets);
    }

    #[test]
    fn initial_values_are_unit_exponential() {
        let cfg = IdeaConfig { l: 10_000, ..IdeaConfig::with_m(1, 0) };
        let p = initialize(&cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let mean = p.datasets.iter().map(|d| d.values()[0]).sum::<f64>() / 1e4;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn objective_examples() {
        let spec = EstimatorSpec::monotone(KernelFamily::Gaussian, 1.0).unwrap();
        let pseudo = PseudoDataset::new(vec![0.0]).unwrap();
        let one = RegressionDataset::radial(vec![0.0], vec![0.0]).unwrap();
        assert_eq!(objective(&one, &spec, &pseudo).unwrap(), 1.0);

        let r = vec![0.5, 1.0, 2.0];
        let fit: Vec<f64> = r.iter().map(|x: &f64| 1.0 / (2.0 * x * x + 1.0).sqrt()).collect();
        let exact = RegressionDataset::radial(r.clone(), fit.clone()).unwrap();
        assert!(objective(&exact, &spec, &pseudo).unwrap() < 1e-30);

        let y = vec![0.9, 0.5, 0.1];
        let data = RegressionDataset::radial(r, y.clone()).unwrap();
        let hand = y.iter().zip(&fit).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 3.0;
        assert!((objective(&data, &spec, &pseudo).unwrap() - hand).abs() < 1e-16);
    }

    #[test]
    fn select_examples() {
        let d = |v: f64| PseudoDataset::new(vec![v]).unwrap();
        let pop = Population {
            datasets: vec![d(1.0), d(2.0), d(3.0)],
            scores: vec![3.0, 1.0, 2.0],
            iteration: 0,
        };
        let (sel, merged) = select(&pop, 2.0 / 3.0).unwrap();
        assert_eq!(sel, vec![d(2.0), d(3.0)]);
        assert_eq!(merged.values(), &[2.0, 3.0]);

        let pop = Population {
            datasets: (0..10).map(|i| d(i as f64)).collect(),
            scores: vec![5.0, 4.0, 1.0, 1.0, 9.0, 9.0, 9.0, 9.0, 9.0, 9.0],
            iteration: 0,
        };
        let (sel, _) = select(&pop, 0.1).unwrap();
        assert_eq!(sel, vec![d(2.0)]);
    }

    #[test]
    fn replace_keeps_survivors_and_signs() {
        let cfg = IdeaConfig { l: 20, tau: 0.2, ..IdeaConfig::with_m(3, 0) };
        let selected = vec![
            PseudoDataset::new(vec![0.1, 0.2, 0.3]).unwrap(),
            PseudoDataset::new(vec![0.0, 0.05, 4.0]).unwrap(),
            PseudoDataset::new(vec![1.0, 1.0, 1.0]).unwrap(),
            PseudoDataset::new(vec![2.0, 0.0, 0.4]).unwrap(),
        ];
        let merged = PseudoDataset::merge(&selected).unwrap();
        let k = KernelSpec::new(KernelFamily::Gaussian, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let next = replace(&merged, &selected, &k, &cfg, &mut rng).unwrap();
        assert_eq!(next.datasets.len(), 20);
        assert_eq!(&next.datasets[..4], &selected[..]);
        assert!(next.datasets.iter().all(|d| d.len() == 3 && d.values().iter().all(|v| *v >= 0.0)));

        let tiny = KernelSpec::new(KernelFamily::Uniform, 1e-300).unwrap();
        let next = replace(&merged, &selected, &tiny, &cfg, &mut rng).unwrap();
        for v in next.datasets[4..].iter().flat_map(|d| d.values()) {
            assert!(merged.values().iter().any(|w| (w - v).abs() <= 1e-299));
        }
    }

    #[test]
    fn kl_examples() {
        let k = KernelSpec::new(KernelFamily::Gaussian, 1.0).unwrap();
        let a = PseudoDataset::new(vec![0.3, 1.7]).unwrap();
        assert_eq!(kl_step(&a, &a, &k).unwrap(), 0.0);

        let one = PseudoDataset::new(vec![1.0]).unwrap();
        let two = PseudoDataset::new(vec![2.0]).unwrap();
        let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let hand = ((phi(-1.0) + phi(3.0)) / (phi(0.0) + phi(2.0))).ln();
        assert!((kl_step(&one, &two, &k).unwrap() - hand).abs() < 1e-15);

        let narrow = KernelSpec::new(KernelFamily::Gaussian, 0.01).unwrap();
        let far = PseudoDataset::new(vec![100.0]).unwrap();
        let d = kl_step(&one, &far, &narrow).unwrap();
        assert!(d.is_finite() && d < -100.0);
    }

    #[test]
    fn elitism_and_determinism() {
        let (data, spec) = toy_monotone();
        let cfg = IdeaConfig::with_m(3, 11);
        let (fit, trace) = run(&data, &spec, &cfg).unwrap();
        assert!(trace.iterations() <= 200);
        for w in trace.records.windows(2) {
            assert!(w[1].obj_min <= w[0].obj_min);
        }
        assert_eq!(fit.pseudo.len(), 3 * cfg.selected_count());
        let (fit2, trace2) = run(&data, &spec, &cfg).unwrap();
        assert_eq!(fit, fit2);
        assert_eq!(trace, trace2);
    }

    #[test]
    fn termination_extremes() {
        let (data, spec) = toy_monotone();
        let cfg = IdeaConfig { kl_threshold: f64::INFINITY, kl_patience: 4, ..IdeaConfig::with_m(2, 1) };
        let (_, trace) = run(&data, &spec, &cfg).unwrap();
        assert_eq!(trace.iterations(), 4);
        assert!(trace.converged);
        let cfg = IdeaConfig { kl_threshold: 0.0, max_iters: 7, ..IdeaConfig::with_m(2, 1) };
        let (_, trace) = run(&data, &spec, &cfg).unwrap();
        assert_eq!(trace.iterations(), 7);
        assert!(!trace.converged);
    }

    #[test]
    fn general_kind_runs() {
        let x: Vec<f64> = (0..60).flat_map(|i| [0.05 * (i % 10) as f64, 0.05 * (i / 10) as f64]).collect();
        let y: Vec<f64> = x
            .chunks(2)
            .map(|p| (-2.0 * std::f64::consts::PI.powi(2) * 0.04 * (p[0] * p[0] + p[1] * p[1])).exp())
            .collect();
        let data = RegressionDataset::new(2, x, y).unwrap();
        let spec = EstimatorSpec::general(2, 0.2, None).unwrap();
        let cfg = IdeaConfig { max_iters: 30, ..IdeaConfig::with_m(2, 5) };
        let (fit, trace) = run(&data, &spec, &cfg).unwrap();
        assert_eq!(fit.pseudo.dim(), 2);
        assert_eq!(fit.eval(&[0.0, 0.0]).unwrap(), 1.0);
        for w in trace.records.windows(2) {
            assert!(w[1].obj_min <= w[0].obj_min);
        }
    }

    #[test]
    fn config_validation() {
        assert!(IdeaConfig { tau: 0.05, ..IdeaConfig::with_m(1, 0) }.validate().is_err());
        assert!(IdeaConfig { m: 0, ..IdeaConfig::with_m(1, 0) }.validate().is_err());
        assert!(IdeaConfig { kl_threshold: f64::NAN, ..IdeaConfig::with_m(1, 0) }.validate().is_err());
        assert_eq!(IdeaConfig::with_m(6, 0).selected_count(), 6);
    }
}
