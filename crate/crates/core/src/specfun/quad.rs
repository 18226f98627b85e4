//! Quadrature rules: fixed Gauss-Legendre, adaptive Simpson and adaptive
//! Gauss-Kronrod (7/15).

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Which integration scheme a [`QuadratureRule`] applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadKind {
    /// Fixed-node Gauss-Legendre; `node_count` is the number of nodes.
    GaussLegendre,
    /// Adaptive Simpson to an absolute tolerance; `node_count` is the
    /// integrand-evaluation budget.
    AdaptiveSimpson { tol: f64 },
}

/// A numerical integration rule over a finite interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub node_count: usize,
    pub kind: QuadKind,
}

impl QuadratureRule {
    pub fn gauss_legendre(node_count: usize) -> Result<Self> {
        let rule = QuadratureRule {
            node_count,
            kind: QuadKind::GaussLegendre,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn adaptive_simpson(tol: f64) -> Result<Self> {
        let rule = QuadratureRule {
            node_count: 1 << 22,
            kind: QuadKind::AdaptiveSimpson { tol },
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 8 {
            return Err(Error::config(format!(
                "quadrature rule needs at least 8 nodes, got {}",
                self.node_count
            )));
        }
        if let QuadKind::AdaptiveSimpson { tol } = self.kind {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::config(format!(
                    "quadrature tolerance must be positive, got {tol}"
                )));
            }
        }
        Ok(())
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.validate()?;
        match self.kind {
            QuadKind::GaussLegendre => Ok(gauss_legendre_integrate(&f, a, b, self.node_count)),
            QuadKind::AdaptiveSimpson { tol } => adaptive_simpson(&f, a, b, tol, self.node_count),
        }
    }
}

impl Default for QuadratureRule {
    /// 64-node Gauss-Legendre.
    fn default() -> Self {
        QuadratureRule {
            node_count: 64,
            kind: QuadKind::GaussLegendre,
        }
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// ascending by node.
pub fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

static GL64: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
static GL24: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();

pub(crate) fn gl64() -> &'static (Vec<f64>, Vec<f64>) {
    GL64.get_or_init(|| gauss_legendre_nodes(64))
}

pub(crate) fn gl24() -> &'static (Vec<f64>, Vec<f64>) {
    GL24.get_or_init(|| gauss_legendre_nodes(24))
}

pub(crate) fn gauss_legendre_with<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn gauss_legendre_integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    if n == 64 {
        gauss_legendre_with(f, a, b, gl64())
    } else {
        gauss_legendre_with(f, a, b, &gauss_legendre_nodes(n))
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
///
/// Fails with a numeric error if the evaluation budget runs out before every
/// panel meets its share of `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    struct Panel {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    }
    let simpson = |a: f64, b: f64, fa: f64, fm: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let mut evals = 3usize;
    let mut stack = vec![Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole: simpson(a, b, fa, fm, fb),
        tol,
        depth: 0,
    }];
    let mut total = 0.0;
    let mut compensation = 0.0;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        evals += 2;
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        // Require a few levels before trusting the error estimate.
        if p.depth >= 4 && (delta.abs() <= 15.0 * p.tol || p.depth >= 60) {
            let piece = left + right + delta / 15.0;
            // Kahan summation keeps thousands of panels from eroding the result.
            let y = piece - compensation;
            let t = total + y;
            compensation = (t - total) - y;
            total = t;
            continue;
        }
        if evals > max_evals {
            return Err(Error::numeric(format!(
                "adaptive Simpson exceeded {max_evals} evaluations on [{a}, {b}]"
            )));
        }
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: 0.5 * p.tol,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: 0.5 * p.tol,
            depth: p.depth + 1,
        });
    }
    if !total.is_finite() {
        return Err(Error::numeric("adaptive Simpson produced a non-finite value"));
    }
    Ok(total)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod evaluation: (estimate, error estimate).
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let x = hl * XGK[j];
        let s = f(c - x) + f(c + x);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * hl, ((resk - resg) * hl).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature to an absolute tolerance.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = kronrod15(f, a, b);
    panels.push((a, b, v, e));
    let mut err_total = e;
    while err_total > tol {
        if panels.len() >= max_panels {
            return Err(Error::numeric(format!(
                "Gauss-Kronrod did not reach tolerance {tol:e} on [{a}, {b}] (error {err_total:e})"
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let pm = 0.5 * (pa + pb);
        if pm <= pa || pm >= pb {
            // Interval cannot be split further in floating point.
            return Err(Error::numeric("Gauss-Kronrod interval underflow"));
        }
        let (lv, le) = kronrod15(f, pa, pm);
        let (rv, re) = kronrod15(f, pm, pb);
        panels.push((pa, pm, lv, le));
        panels.push((pm, pb, rv, re));
        err_total = panels.iter().map(|p| p.3).sum();
    }
    let total: f64 = panels.iter().map(|p| p.2).sum();
    if !total.is_finite() {
        return Err(Error::numeric("Gauss-Kronrod produced a non-finite value"));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 7, 8, 24, 64, 101] {
            let (x, w) = gauss_legendre_nodes(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        // n nodes integrate degree 2n-1 exactly.
        let rule = QuadratureRule::gauss_legendre(8).unwrap();
        let v = rule.integrate(|x| x.powi(15) + 3.0 * x.powi(14), 0.0, 1.0).unwrap();
        assert!((v - (1.0 / 16.0 + 3.0 / 15.0)).abs() < 1e-14);
    }

    #[test]
    fn kronrod_constants_integrate_degree_22() {
        let (v, _) = kronrod15(&|x: f64| x.powi(22), -1.0, 1.0);
        assert!((v - 2.0 / 23.0).abs() < 1e-15);
        let (v, e) = kronrod15(&|x: f64| x.powi(12), -1.0, 1.0);
        assert!((v - 2.0 / 13.0).abs() < 1e-15);
        // The embedded Gauss rule is exact at degree 13 as well.
        assert!(e < 1e-15);
    }

    #[test]
    fn adaptive_rules_agree_on_oscillatory_integrand() {
        let f = |x: f64| (10.0 * x).cos() * (-x).exp();
        // Closed form of the integral over [0, 3].
        let exact = {
            let e = (-3.0f64).exp();
            (1.0 + e * (10.0 * (30.0f64).sin() - (30.0f64).cos())) / 101.0
        };
        let s = adaptive_simpson(&f, 0.0, 3.0, 1e-12, 1 << 22).unwrap();
        let k = gauss_kronrod(&f, 0.0, 3.0, 1e-13, 10_000).unwrap();
        assert!((s - exact).abs() < 1e-10, "{s} vs {exact}");
        assert!((k - exact).abs() < 1e-12, "{k} vs {exact}");
    }

    #[test]
    fn simpson_budget_exhaustion_is_an_error() {
        let f = |x: f64| (1.0 / (x + 1e-9)).sin();
        assert!(adaptive_simpson(&f, 0.0, 1.0, 1e-14, 100).is_err());
    }

    #[test]
    fn rule_validation() {
        assert!(QuadratureRule::gauss_legendre(4).is_err());
        assert!(QuadratureRule::adaptive_simpson(0.0).is_err());
        assert!(QuadratureRule::adaptive_simpson(-1.0).is_err());
        assert_eq!(QuadratureRule::default().node_count, 64);
    }
}
