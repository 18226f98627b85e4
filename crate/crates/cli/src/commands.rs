use std::fs;
use std::path::Path;

use pdcov::covpipe::{
    bin_distances, fit_covariance_points, generate_regression, matheron_points, simulate_gp, uniform_grid,
};
use pdcov::io::{self, Curve, FitRecord, TraceSummary};
use pdcov::{
    idea, modelselect, CvConfig, Domain, EstimatorKind, EstimatorSpec, FittedEstimator, IdeaConfig, TruthFunction,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::*;
use crate::svg::{self, Panel, Series, Style};
use crate::{CliError, CliResult};

/// Which reference functions the short names refer to.
#[derive(Debug, Clone, Copy)]
enum Context {
    Regression,
    Covariance,
    Any,
}

fn parse_truth(s: &str, ctx: Context) -> CliResult<TruthFunction> {
    let alias = match (s.trim().to_ascii_lowercase().as_str(), ctx) {
        ("wave", Context::Regression) => Some(TruthFunction::WaveReg),
        ("spherical", Context::Regression) => Some(TruthFunction::SphericalReg),
        ("wave", Context::Covariance) => Some(TruthFunction::WaveCov),
        ("exp", Context::Covariance) => Some(TruthFunction::ExpCov),
        _ => None,
    };
    if let Some(t) = alias {
        return Ok(t);
    }
    s.parse()
        .map_err(|e: pdcov::Error| CliError::usage(format!("--truth: {e} (try wave-reg, spherical-reg, wave-cov, exp-cov, wave-scaled:c=.., spherical-scaled:b=..,c=.., exp-scaled:c=..)")))
}

fn parse_interval(flag: &str, s: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::usage(format!("{flag}: expected low:high, got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::usage(format!("--grid: expected start:end:step, got '{s}'"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    if parts.len() != 3 || parts[0] < 0.0 {
        return Err(bad());
    }
    uniform_grid(parts[0], parts[1], parts[2]).map_err(|_| bad())
}

fn parse_floats(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("{flag}: '{}' is not a number", p.trim())))
        })
        .collect()
}

fn parse_sizes(flag: &str, s: &str) -> CliResult<Vec<usize>> {
    let bad = |p: &str| CliError::usage(format!("{flag}: '{p}' is not a size or a range a..b"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad(s))?;
        let b: usize = b.trim().parse().map_err(|_| bad(s))?;
        if a > b {
            return Err(bad(s));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad(p.trim()))).collect()
}

fn idea_config(args: &IdeaArgs, m: usize, seed: u64) -> IdeaConfig {
    IdeaConfig {
        l: args.l.unwrap_or(10 * m),
        tau: args.tau,
        kl_threshold: args.kl_threshold,
        kl_patience: args.kl_patience,
        max_iters: args.max_iters,
        ..IdeaConfig::with_m(m, seed)
    }
}

/// Radial kinds live in the plane; the general kind takes the data dimension.
fn estimator_spec(args: &EstimatorArgs, h: f64, data_dim: usize, bandwidth: Option<Vec<f64>>) -> CliResult<EstimatorSpec> {
    let spec = match args.kind {
        EstimatorKind::General => {
            if args.kernel != pdcov::KernelFamily::Gaussian {
                return Err(CliError::usage("--kernel: the general kind uses the gaussian kernel"));
            }
            EstimatorSpec::general(data_dim, h, bandwidth)?
        }
        kind => {
            if bandwidth.is_some() {
                return Err(CliError::usage("--bandwidth applies to the general kind only"));
            }
            EstimatorSpec::of_kind(kind, args.kernel, h, 2)?
        }
    };
    Ok(spec)
}

fn file_digest(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|source| pdcov::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(io::sha256_hex(&bytes))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| {
        pdcov::Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

pub fn simulate_regression(a: SimulateRegression) -> CliResult<()> {
    let truth = parse_truth(&a.truth, Context::Regression)?;
    let domain = parse_interval("--domain", &a.domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let data = generate_regression(&truth, a.n, domain, a.noise_sd, &mut rng)?;
    io::write_regression(&a.out, &data)?;
    eprintln!("wrote {} observations of {truth} to {}", data.len(), a.out.display());
    Ok(())
}

fn parse_domain(s: Option<&str>) -> CliResult<Domain> {
    let Some(s) = s else {
        return Ok(Domain::default());
    };
    let axes: Vec<(f64, f64)> = s
        .split(',')
        .map(|p| parse_interval("--domain", p))
        .collect::<CliResult<_>>()?;
    let bounds = if axes.len() == 1 { vec![axes[0]; 2] } else { axes };
    Ok(Domain::new(bounds)?)
}

pub fn simulate_gp_cmd(a: SimulateGp) -> CliResult<()> {
    let truth = parse_truth(&a.truth, Context::Covariance)?;
    let domain = parse_domain(a.domain.as_deref())?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let field = simulate_gp(&truth, a.w, &domain, &mut rng)?;
    io::write_field(&a.out, &field)?;
    eprintln!("wrote {truth} field at {} locations to {}", field.len(), a.out.display());
    Ok(())
}

pub fn fit(a: Fit) -> CliResult<()> {
    let data = io::read_regression(&a.data)?;
    let bandwidth = a.bandwidth.as_deref().map(|b| parse_floats("--bandwidth", b)).transpose()?;
    let spec = estimator_spec(&a.estimator, a.h, data.dim(), bandwidth)?;
    let cfg = idea_config(&a.idea, a.m, a.seed);
    let (est, trace) = idea::run(&data, &spec, &cfg)?;
    let config = json!({
        "command": "fit",
        "data_sha256": file_digest(&a.data)?,
        "spec": spec,
        "idea": cfg,
    });
    let traces = [trace];
    FitRecord::new(&est, TraceSummary::from_traces(&traces), config).write(&a.out)?;
    if let Some(p) = &a.trace {
        io::write_trace(p, &traces)?;
    }
    eprintln!(
        "{} fit: {} iterations, converged {}, objective {:.6e}",
        spec.kind,
        traces[0].iterations(),
        traces[0].converged,
        traces[0].final_objective().unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn cv(a: Cv) -> CliResult<()> {
    let data = io::read_regression(&a.data)?;
    let template = estimator_spec(&a.estimator, 1.0, data.dim(), None)?;
    let config = CvConfig {
        k: a.k,
        h_grid: parse_floats("--h-grid", &a.h_grid)?,
        m_grid: parse_sizes("--m-grid", &a.m_grid)?,
        seed: a.seed,
        replications: a.replications,
        max_iters: a.max_iters,
    };
    let res = modelselect::cross_validate(&data, &template, &config)?;
    io::write_cv(&a.out, &res)?;
    println!("chosen h={} m={} mse={:.6e}", res.chosen_h, res.chosen_m, res.chosen().mean_mse);
    Ok(())
}

pub fn estimate_cov(a: EstimateCov) -> CliResult<()> {
    let field = io::read_field(&a.field)?;
    if a.estimator.kind == EstimatorKind::General {
        return Err(CliError::usage("--kind: covariance estimation uses isotropic or monotone"));
    }
    let mut points = matheron_points(&field);
    if let Some(max) = a.rescale_distances {
        points = points.rescale_distances(max)?;
    }
    if let Some(w) = a.bin_width {
        points = bin_distances(&points, w)?;
    }
    if let Some(p) = &a.points {
        io::write_cov_points(p, &points)?;
    }
    let spec = estimator_spec(&a.estimator, a.h, 2, None)?;
    let cfg = idea_config(&a.idea, a.m, a.seed);
    let fit = fit_covariance_points(&points, &spec, &cfg, None, a.outer_iters)?;
    let config = json!({
        "command": "estimate-cov",
        "field_sha256": file_digest(&a.field)?,
        "spec": spec,
        "idea": cfg,
        "outer_iters": a.outer_iters,
        "bin_width": a.bin_width,
        "rescale_distances": a.rescale_distances,
    });
    FitRecord::new(&fit.estimator, TraceSummary::from_cov_fit(&fit), config).write(&a.out)?;
    if let Some(p) = &a.trace {
        io::write_trace(p, &fit.traces)?;
    }
    eprintln!(
        "{} point estimates, sigma2 {:?}, {} outer iterations",
        points.len(),
        fit.sigma2_history,
        fit.traces.len()
    );
    if fit.degenerate_updates > 0 {
        eprintln!("warning: {} variance updates were degenerate and kept the previous value", fit.degenerate_updates);
    }
    Ok(())
}

/// Radial fits take `r` directly; general fits are evaluated along the
/// first coordinate axis.
fn eval_at(est: &FittedEstimator, r: f64) -> CliResult<f64> {
    Ok(match est.spec.kind {
        EstimatorKind::General => {
            let mut x = vec![0.0; est.spec.dim];
            x[0] = r;
            est.eval(&x)?
        }
        _ => est.eval_radial(r)?,
    })
}

pub fn eval(a: Eval) -> CliResult<()> {
    let rec = FitRecord::read(&a.fit)?;
    let est = rec.estimator()?;
    let grid = parse_grid(&a.grid)?;
    let truth = a.truth.as_deref().map(|t| parse_truth(t, Context::Any)).transpose()?;
    let fit: Vec<f64> = grid.iter().map(|&r| eval_at(&est, r)).collect::<CliResult<_>>()?;
    let truth_vals = truth.map(|t| grid.iter().map(|&r| t.eval(r)).collect::<Vec<f64>>());
    if a.rmspe {
        let t = truth_vals.as_ref().expect("clap enforces --truth");
        let mse = fit.iter().zip(t).map(|(f, t)| (f - t) * (f - t)).sum::<f64>() / grid.len() as f64;
        println!("rmspe {}", mse.sqrt());
    }
    io::write_curve(&a.out, &Curve { r: grid, truth: truth_vals, fit })?;
    Ok(())
}

/// Observations as `(|x|, y)` pairs from either regression data or
/// covariance point estimates.
fn read_points(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).map_err(|source| pdcov::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if text.starts_with("# pdcov:covpoints:") {
        let p = io::read_cov_points(path)?;
        return Ok(p.distances.into_iter().zip(p.products).collect());
    }
    let d = io::read_regression(path)?;
    Ok(d.radii().into_iter().zip(d.y().iter().copied()).collect())
}

pub fn plot(a: Plot) -> CliResult<()> {
    let curve = io::read_curve(&a.curve)?;
    let mut series = Vec::new();
    if let Some(p) = &a.points {
        series.push(Series::new("observations", read_points(p)?, Style::Points, "#999999"));
    }
    if let Some(t) = &curve.truth {
        series.push(Series::new("truth", curve.r.iter().copied().zip(t.iter().copied()).collect(), Style::Solid, "#000000"));
    }
    series.push(Series::new(
        "estimate",
        curve.r.iter().copied().zip(curve.fit.iter().copied()).collect(),
        Style::Dashed,
        "#d62728",
    ));
    let panel = Panel {
        title: a.title,
        x_label: "distance".into(),
        y_label: "value".into(),
        log_y: false,
        series,
    };
    write_text(&a.out, &svg::render(&[panel]))
}

pub fn plot_trace(a: PlotTrace) -> CliResult<()> {
    let recs = io::read_trace(&a.trace)?;
    if recs.is_empty() {
        return Err(CliError::usage(format!("{}: trace has no rows", a.trace.display())));
    }
    // Outer iterations restart `iter`; number rows consecutively instead.
    let xs = |f: fn(&pdcov::IdeaRecord) -> f64| -> Vec<(f64, f64)> {
        recs.iter().enumerate().map(|(i, r)| ((i + 1) as f64, f(r))).collect()
    };
    let positive = recs
        .iter()
        .all(|r| [r.obj_min, r.obj_selected_max, r.obj_mean, r.obj_max].iter().all(|v| *v > 0.0 || !v.is_finite()));
    let objectives = Panel {
        title: "objective".into(),
        x_label: "iteration".into(),
        y_label: "objective".into(),
        log_y: positive,
        series: vec![
            Series::new("minimum", xs(|r| r.obj_min), Style::Solid, "#1f77b4"),
            Series::new("selected max", xs(|r| r.obj_selected_max), Style::Dashed, "#2ca02c"),
            Series::new("mean", xs(|r| r.obj_mean), Style::Solid, "#ff7f0e"),
            Series::new("maximum", xs(|r| r.obj_max), Style::Dashed, "#d62728"),
        ],
    };
    let kl = Panel {
        title: "KL divergence".into(),
        x_label: "iteration".into(),
        y_label: "D_KL".into(),
        log_y: false,
        series: vec![Series::new("D_KL", xs(|r| r.d_kl), Style::Solid, "#000000")],
    };
    write_text(&a.out, &svg::render(&[objectives, kl]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_aliases_depend_on_context() {
        assert_eq!(parse_truth("wave", Context::Regression).unwrap(), TruthFunction::WaveReg);
        assert_eq!(parse_truth("wave", Context::Covariance).unwrap(), TruthFunction::WaveCov);
        assert_eq!(parse_truth("exp", Context::Covariance).unwrap(), TruthFunction::ExpCov);
        assert!(parse_truth("wave", Context::Any).is_err());
        assert_eq!(
            parse_truth("spherical-scaled:b=0.8,c=0.5", Context::Any).unwrap(),
            TruthFunction::SphericalScaled { b: 0.8, c: 0.5 }
        );
    }

    #[test]
    fn flag_values() {
        assert_eq!(parse_grid("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("-1:1:0.5").is_err());
        assert_eq!(parse_sizes("--m-grid", "2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_sizes("--m-grid", "1,5").unwrap(), vec![1, 5]);
        assert!(parse_sizes("--m-grid", "x").unwrap_err().to_string().contains("--m-grid"));
        assert_eq!(parse_interval("--domain", "0:10").unwrap(), (0.0, 10.0));
        assert!(parse_interval("--domain", "3:1").is_err());
        let d = parse_domain(Some("0:2,1:3")).unwrap();
        assert_eq!(d.bounds, vec![(0.0, 2.0), (1.0, 3.0)]);
        assert_eq!(parse_domain(Some("0:5")).unwrap().bounds.len(), 2);
    }
}
