//! Log-domain adaptive Gauss–Legendre quadrature.
//!
//! The integrand is supplied as its logarithm. Each panel's contribution is
//! accumulated with log-sum-exp, so integrands like `2^n θ^x (1-θ)^(n-x)`
//! never leave the log domain even for `n` in the millions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerances and rule size for [`log_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub gl_points: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { rel_tol: 1e-10, abs_tol: 0.0, max_subdivisions: 2000, gl_points: 32 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::domain(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::domain(format!("abs_tol must be nonnegative, got {}", self.abs_tol)));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        if self.gl_points < 2 {
            return Err(Error::domain("gl_points must be at least 2"));
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
///
/// Only the nonnegative half is stored; nodes are symmetric.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(points: usize) -> Self {
        let m = points;
        let half = m.div_ceil(2);
        let mut nodes = Vec::with_capacity(half);
        let mut weights = Vec::with_capacity(half);
        for i in 0..half {
            // Tricomi initial guess, then Newton on P_m
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, z);
                dp = d;
                let step = p / d;
                z -= step;
                if step.abs() <= 1e-16 {
                    break;
                }
            }
            if m % 2 == 1 && i + 1 == half {
                z = 0.0;
            }
            let (_, d) = legendre_with_derivative(m, z);
            dp = if d != 0.0 { d } else { dp };
            nodes.push(z);
            weights.push(2.0 / ((1.0 - z * z) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn points(&self) -> usize {
        let half = self.nodes.len();
        if self.nodes.last() == Some(&0.0) {
            2 * half - 1
        } else {
            2 * half
        }
    }

    /// `(node, weight)` pairs on `[-1, 1]`, each node appearing once.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().zip(&self.weights).flat_map(|(&z, &w)| {
            let mirrored = if z == 0.0 { None } else { Some((-z, w)) };
            std::iter::once((z, w)).chain(mirrored)
        })
    }

    /// `ln ∫_lo^hi exp(f_log)`, with one application of the rule.
    fn log_panel(&self, f_log: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let ln_half = half.ln();
        let mut terms: Vec<f64> = Vec::with_capacity(self.points());
        for (z, w) in self.pairs() {
            terms.push(f_log(mid + half * z) + w.ln() + ln_half);
        }
        log_sum_exp(&terms)
    }
}

fn legendre_with_derivative(m: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// `ln Σ exp(v_i)`; `-inf` for an empty slice or all `-inf` terms.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln |e^a - e^b|`.
fn log_abs_diff(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (-(-(hi - lo)).exp_m1()).ln()
}

struct Panel {
    lo: f64,
    hi: f64,
    /// log estimate of the panel integral from its two halves
    value: f64,
    left: f64,
    right: f64,
    /// log of |whole-panel rule - two-halves rule|
    error: f64,
}

impl Panel {
    fn new(rule: &GaussLegendre, f_log: &impl Fn(f64) -> f64, lo: f64, hi: f64, whole: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        let left = rule.log_panel(f_log, lo, mid);
        let right = rule.log_panel(f_log, mid, hi);
        let value = log_sum_exp(&[left, right]);
        Panel { lo, hi, value, left, right, error: log_abs_diff(whole, value) }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // NaN errors sort first so they get subdivided
        let a = if self.error.is_nan() { f64::INFINITY } else { self.error };
        let b = if other.error.is_nan() { f64::INFINITY } else { other.error };
        a.total_cmp(&b)
    }
}

/// `ln ∫_lo^hi exp(f_log(θ)) dθ`.
///
/// Panels are refined globally, always splitting the panel with the largest
/// error estimate, until the summed error is within `rel_tol` of the total
/// (or below `abs_tol`). Nodes are strictly interior, so `f_log` is never
/// evaluated at `lo` or `hi`.
///
/// ```
/// use evitherm::numerics::{log_quadrature, QuadratureConfig};
/// let cfg = QuadratureConfig::default();
/// // ∫_0^½ 4(1-θ)² dθ = 7/6
/// let v = log_quadrature(|t: f64| 4f64.ln() + 2.0 * (1.0 - t).ln(), 0.0, 0.5, &cfg).unwrap();
/// assert!((v - (7.0f64 / 6.0).ln()).abs() < 1e-12);
/// ```
pub fn log_quadrature(f_log: impl Fn(f64) -> f64, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    log_quadrature_with_breaks(f_log, &[lo, hi], cfg)
}

/// [`log_quadrature`] over consecutive intervals of `breaks`, which must be
/// nondecreasing. Putting break points at the peak of a concentrated
/// integrand lets the initial panels resolve it.
pub fn log_quadrature_with_breaks(f_log: impl Fn(f64) -> f64, breaks: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if breaks.len() < 2 || breaks.iter().any(|b| !b.is_finite()) {
        return Err(Error::domain("quadrature needs at least two finite break points"));
    }
    if breaks.windows(2).any(|w| w[1] < w[0]) || breaks[0] >= breaks[breaks.len() - 1] {
        return Err(Error::domain(format!(
            "quadrature requires lo < hi, got [{}, {}]",
            breaks[0],
            breaks[breaks.len() - 1]
        )));
    }
    let rule = GaussLegendre::new(cfg.gl_points);
    const INITIAL_SPLIT: usize = 4;

    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let width = (b - a) / INITIAL_SPLIT as f64;
        for i in 0..INITIAL_SPLIT {
            let lo = a + width * i as f64;
            let hi = if i + 1 == INITIAL_SPLIT { b } else { lo + width };
            let whole = rule.log_panel(&f_log, lo, hi);
            heap.push(Panel::new(&rule, &f_log, lo, hi, whole));
        }
    }

    let ln_rel = cfg.rel_tol.ln();
    let ln_abs = if cfg.abs_tol > 0.0 { cfg.abs_tol.ln() } else { f64::NEG_INFINITY };
    let mut splits = 0usize;
    loop {
        let values: Vec<f64> = heap.iter().map(|p| p.value).collect();
        let errors: Vec<f64> = heap.iter().map(|p| p.error).collect();
        let total = log_sum_exp(&values);
        let error = log_sum_exp(&errors);
        if total.is_nan() {
            return Err(Error::domain("integrand produced NaN"));
        }
        if total == f64::NEG_INFINITY || error <= (ln_rel + total).max(ln_abs) {
            return Ok(total);
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::Convergence { what: "log quadrature", best: total });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // panel has collapsed to adjacent floats; nothing more to gain
            return Err(Error::Convergence { what: "log quadrature", best: total });
        }
        heap.push(Panel::new(&rule, &f_log, worst.lo, mid, worst.left));
        heap.push(Panel::new(&rule, &f_log, mid, worst.hi, worst.right));
        splits += 1;
    }
}

/// Break points that bracket the peak of `θ^x (1-θ)^(n-x)` on `[0, hi]`.
pub(crate) fn binomial_breaks(n: f64, x: f64, hi: f64) -> Vec<f64> {
    let mut breaks = vec![0.0, hi];
    if n > 0.0 {
        let mode = (x / n).clamp(0.0, hi);
        let sd = ((mode * (1.0 - mode)).max(1.0 / (n + 2.0)) / (n + 2.0)).sqrt();
        for k in [-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0] {
            let b = mode + k * sd;
            if b > 0.0 && b < hi {
                breaks.push(b);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

/// Mean of `ln(θ / (1 - θ))` under the density proportional to
/// `θ^x (1 - θ)^(n - x)` on `(0, 1/2)`.
///
/// This is the derivative of the one-sided log volume with respect to `x`,
/// and the left-hand side of the transition-point equation. It is always
/// negative.
pub fn posterior_log_odds_mean(n: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    posterior_log_odds_mean_on(n, x, 0.5, cfg)
}

pub(crate) fn posterior_log_odds_mean_on(n: f64, x: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::domain(format!("posterior mean requires n > 0, got {n}")));
    }
    if !(x >= 0.0 && x <= n * hi) {
        return Err(Error::domain(format!("posterior mean requires 0 <= x <= {}, got {x}", n * hi)));
    }
    let ln_kernel = |t: f64| {
        let a = if x == 0.0 { 0.0 } else { x * t.ln() };
        let b = if n - x == 0.0 { 0.0 } else { (n - x) * (-t).ln_1p() };
        a + b
    };
    let breaks = binomial_breaks(n, x, hi);
    let ln_den = log_quadrature_with_breaks(ln_kernel, &breaks, cfg)?;
    if hi <= 0.5 {
        // ln((1-θ)/θ) > 0 on (0, ½): integrate its log
        let ln_num = log_quadrature_with_breaks(|t| ln_kernel(t) + ((1.0 - 2.0 * t) / t).ln_1p().ln(), &breaks, cfg)?;
        Ok(-(ln_num - ln_den).exp())
    } else {
        // split at ½ where the log-odds change sign
        let lower = log_quadrature_with_breaks(
            |t| ln_kernel(t) + ((1.0 - 2.0 * t) / t).ln_1p().ln(),
            &binomial_breaks(n, x, 0.5),
            cfg,
        )?;
        let upper_breaks: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.5).chain([0.5]).collect();
        let mut upper_breaks = upper_breaks;
        upper_breaks.sort_by(f64::total_cmp);
        upper_breaks.dedup();
        let upper = log_quadrature_with_breaks(
            |t| ln_kernel(t) + ((2.0 * t - 1.0) / (1.0 - t)).ln_1p().ln(),
            &upper_breaks,
            cfg,
        )?;
        Ok((upper - ln_den).exp() - (lower - ln_den).exp())
    }
}
