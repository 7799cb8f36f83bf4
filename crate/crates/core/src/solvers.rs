//! Inverting the state map: transition points, evidence and entropy
//! inversions at fixed `n`, two-dimensional state solving, and isotherm and
//! adiabat tracing.
//!
//! For fixed `n` the evidence `E(n, x)` falls from `x = 0` to a single
//! interior minimum, the transition point, and then rises to `x = n/2`.
//! Left of the transition point the data favour "biased"; right of it they
//! favour "fair". Because the same `E` is attained once on each side, every
//! inversion of `E` takes an explicit [`Branch`].

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{brent, posterior_log_odds_mean, QuadratureConfig};
use crate::state::{raw_entropy, state_from_parts, EvidentialState, Model, ObservationPoint, Side};

/// Which side of the transition point a state lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `x < x*`: evidence for "biased"; `E` decreases in `x`.
    LeftOfTrp,
    /// `x > x*`: evidence for "fair"; `E` increases in `x`.
    RightOfTrp,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::LeftOfTrp => "left",
            Branch::RightOfTrp => "right",
        }
    }
}

/// The minimizer of `E` over `x` at fixed `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionPoint {
    pub n: f64,
    pub x_star: f64,
    pub e_min: f64,
    /// `R <ln(θ/(1-θ))> - ln(x*/(n-x*))` at the returned root.
    pub residual: f64,
}

impl TransitionPoint {
    pub fn ratio(&self) -> f64 {
        self.x_star / self.n
    }
}

/// One sample along a traced curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSample {
    pub n: f64,
    pub x: f64,
    #[serde(rename = "log_V_E")]
    pub log_v_e: f64,
    #[serde(rename = "V_E")]
    pub v_e: f64,
    #[serde(rename = "P_E")]
    pub p_e: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "S_E")]
    pub s_e: f64,
}

impl PathSample {
    pub fn point(&self) -> ObservationPoint {
        ObservationPoint { n: self.n, x: self.x }
    }
}

impl From<EvidentialState> for PathSample {
    fn from(s: EvidentialState) -> Self {
        PathSample { n: s.n(), x: s.x(), log_v_e: s.log_v_e, v_e: s.v_e(), p_e: s.p_e(), e: s.e(), s_e: s.s_e }
    }
}

/// A grid point where a curve has no state on a branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gap {
    pub n: f64,
    pub branch: Option<Branch>,
    pub reason: String,
}

/// A traced constant-`E` curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Isotherm {
    pub e_level: f64,
    pub left: Vec<PathSample>,
    pub right: Vec<PathSample>,
    pub gaps: Vec<Gap>,
    /// The transition point at which the two branches meet, when it lies in
    /// the traced range. Its `n` is the largest `n` on the isotherm.
    pub junction: Option<TransitionPoint>,
}

impl Isotherm {
    /// Left branch in increasing `n`, then the right branch in decreasing
    /// `n`: one continuous curve through the junction.
    pub fn curve(&self) -> impl Iterator<Item = (Branch, &PathSample)> {
        self.left.iter().map(|s| (Branch::LeftOfTrp, s)).chain(self.right.iter().rev().map(|s| (Branch::RightOfTrp, s)))
    }
}

/// A traced constant-`S_E` curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Adiabat {
    pub s_level: f64,
    pub samples: Vec<PathSample>,
    pub gaps: Vec<Gap>,
}

fn require_one_sided(model: &Model, what: &str) -> Result<()> {
    match model.consts.side {
        Side::OneSided => Ok(()),
        Side::TwoSided => Err(Error::Unsupported(format!("{what} is defined for the one-sided model only"))),
    }
}

/// Quadrature settings for the stationarity equation: a notch tighter than
/// the model's so that residuals near `1e-10` are resolved.
fn stationarity_quad(model: &Model) -> QuadratureConfig {
    QuadratureConfig { rel_tol: model.quad.rel_tol.min(1e-13), ..model.quad }
}

fn stationarity(model: &Model, quad: &QuadratureConfig, n: f64, x: f64) -> Result<f64> {
    Ok(model.consts.r * posterior_log_odds_mean(n, x, quad)? - (x / (n - x)).ln())
}

/// `R <ln(θ/(1-θ))> - ln(x/(n-x))`, proportional to `-dE/dx`.
///
/// Positive left of the transition point, negative right of it.
pub fn stationarity_residual(model: &Model, n: f64, x: f64) -> Result<f64> {
    require_one_sided(model, "the transition point")?;
    model.point(n, x)?;
    stationarity(model, &stationarity_quad(model), n, x)
}

/// Locates the transition point at `n`, requiring `|residual| <= tol`.
///
/// ```
/// use evitherm::{solvers::transition_point, Model};
/// let t = transition_point(&Model::default(), 10.0, 1e-10).unwrap();
/// assert!(t.x_star > 2.0 && t.x_star < 3.0);
/// ```
pub fn transition_point(model: &Model, n: f64, tol: f64) -> Result<TransitionPoint> {
    require_one_sided(model, "the transition point")?;
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::domain(format!("transition point requires n > 0, got {n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let quad = stationarity_quad(model);
    let g = |x: f64| stationarity(model, &quad, n, x);

    let x_hi = 0.5 * n;
    let g_hi = g(x_hi)?;
    let mut x_lo = 0.25 * n;
    let mut g_lo = g(x_lo)?;
    let mut scanned = vec![(x_lo, g_lo)];
    while g_lo <= 0.0 {
        x_lo *= 0.5;
        if x_lo < n * 1e-300 || scanned.len() > 1100 {
            return Err(Error::solver(format!("transition point not bracketed at n = {n}; scan: {scanned:?}")));
        }
        g_lo = g(x_lo)?;
        scanned.push((x_lo, g_lo));
    }
    let (mut a, mut fa) = (x_lo, g_lo);
    let (mut b, mut fb) = (x_hi, g_hi);
    // tighten with the last nonpositive scan point
    if let Some(&(x, gx)) = scanned.iter().rev().nth(1) {
        if gx <= 0.0 && x > a {
            (b, fb) = (x, gx);
        }
    }
    if fb > 0.0 {
        return Err(Error::solver(format!("stationarity residual positive at x = n/2 for n = {n}")));
    }
    if fb == 0.0 {
        (a, fa) = (b, fb);
    }
    let x_star = brent(g, a, b, fa, fb, 0.0, model.solver.max_iter)?;
    let residual = g(x_star)?;
    if residual.abs() > tol {
        return Err(Error::Convergence { what: "transition point", best: x_star });
    }
    let e_min = model.state(n, x_star)?.e();
    Ok(TransitionPoint { n, x_star, e_min, residual })
}

/// The branch containing `(n, x)`, from the sign of the stationarity residual.
pub fn branch_of(model: &Model, n: f64, x: f64) -> Result<Branch> {
    let g = stationarity_residual(model, n, x)?;
    Ok(if g > 0.0 { Branch::LeftOfTrp } else { Branch::RightOfTrp })
}

fn x_for_raw_entropy(n: f64, raw: f64) -> Result<f64> {
    let top = n * LN_2;
    if !(raw >= 0.0 && raw <= top * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(Error::range(format!("entropy {raw} outside [0, {top}] at n = {n}")));
    }
    if raw == 0.0 || n == 0.0 {
        return Ok(0.5 * n);
    }
    if raw >= top {
        return Ok(0.0);
    }
    let f = |x: f64| Ok(raw_entropy(n, x) - raw);
    brent(f, 0.0, 0.5 * n, top - raw, -raw, 0.0, 400)
}

/// The `x <= n/2` at which `S_E(n, x) = s_target` (including `k`).
///
/// ```
/// use evitherm::{solvers::solve_x_for_entropy, Model};
/// let m = Model::default();
/// assert_eq!(solve_x_for_entropy(&m, 10.0, 0.0).unwrap(), 5.0);
/// assert_eq!(solve_x_for_entropy(&m, 10.0, 10.0 * 2f64.ln()).unwrap(), 0.0);
/// ```
pub fn solve_x_for_entropy(model: &Model, n: f64, s_target: f64) -> Result<f64> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::domain(format!("n must be finite and nonnegative, got {n}")));
    }
    x_for_raw_entropy(n, s_target - model.consts.entropy_offset_k)
}

/// The `x` on `branch` with `E(n, x) = e_target`.
pub fn solve_x_for_evidence(model: &Model, n: f64, e_target: f64, branch: Branch) -> Result<f64> {
    let trp = transition_point(model, n, model.solver.residual_tol)?;
    solve_x_for_evidence_at(model, &trp, e_target, branch)
}

/// [`solve_x_for_evidence`] reusing an already computed transition point.
pub fn solve_x_for_evidence_at(model: &Model, trp: &TransitionPoint, e_target: f64, branch: Branch) -> Result<f64> {
    if !(e_target > 0.0) || !e_target.is_finite() {
        return Err(Error::domain(format!("evidence target must be positive, got {e_target}")));
    }
    let n = trp.n;
    let ln_target = e_target.ln();
    let ln_min = trp.e_min.ln();
    if ln_target < ln_min - model.solver.residual_tol {
        return Err(Error::NoSolution { n, e_target, e_min: trp.e_min });
    }
    if ln_target <= ln_min + model.solver.residual_tol {
        return Ok(trp.x_star);
    }
    let (end, inner) = match branch {
        Branch::LeftOfTrp => (0.0, trp.x_star),
        Branch::RightOfTrp => (0.5 * n, trp.x_star),
    };
    let h = |x: f64| Ok(model.log_e(n, x)? - ln_target);
    let h_end = h(end)?;
    if h_end < 0.0 {
        return Err(Error::range(format!(
            "E = {e_target} exceeds the {} branch endpoint E = {} at n = {n}",
            branch.label(),
            (h_end + ln_target).exp()
        )));
    }
    let h_inner = ln_min - ln_target;
    brent(h, inner, end, h_inner, h_end, 0.0, model.solver.max_iter)
}

/// Forced raw entropy `C_V ln E + R ln V_E - k` of an `(E, V_E)` target.
fn forced_raw_entropy(model: &Model, e_target: f64, log_v_target: f64) -> Result<f64> {
    if !(e_target > 0.0) || !e_target.is_finite() || !log_v_target.is_finite() {
        return Err(Error::domain(format!("invalid targets E = {e_target}, ln V_E = {log_v_target}")));
    }
    let c = &model.consts;
    let raw = c.c_v * e_target.ln() + c.r * log_v_target - c.entropy_offset_k;
    // rounding in the forced entropy of a zero-entropy target
    let slack = 1e-12 * (c.c_v * e_target.ln().abs() + c.r * log_v_target.abs() + c.entropy_offset_k.abs()).max(1.0);
    if raw < 0.0 && raw >= -slack {
        return Ok(0.0);
    }
    if raw < 0.0 {
        return Err(Error::Infeasible {
            node: None,
            reason: format!(
                "forced S_E - k = C_V ln E + R ln V_E - k = {raw:.6} < 0 for E = {e_target}, ln V_E = {log_v_target}"
            ),
        });
    }
    Ok(raw)
}

/// `ln V_E` along the isentrope `raw`, as a function of `n`.
fn isentrope_state(model: &Model, n: f64, raw: f64) -> Result<EvidentialState> {
    let x = x_for_raw_entropy(n, raw)?.min(0.5 * n);
    let point = ObservationPoint { n, x };
    let log_v = model.log_volume(point)?;
    Ok(state_from_parts(point, log_v, &model.consts))
}

fn isentrope_floor(raw: f64) -> f64 {
    raw / LN_2
}

/// All states realizing `(e_target, log_v_target)`, in increasing `n`.
///
/// Along the isentrope that the targets force, `V_E` is not monotone in `n`,
/// so there can be more than one solution.
pub fn enumerate_states(model: &Model, e_target: f64, log_v_target: f64) -> Result<Vec<EvidentialState>> {
    let raw = forced_raw_entropy(model, e_target, log_v_target)?;
    let n0 = isentrope_floor(raw);
    let h = |n: f64| Ok(isentrope_state(model, n, raw)?.log_v_e - log_v_target);

    // grid: n0, then n0 + 1e-6 s growing by 10% up to 1e7
    let scale = n0.max(1.0);
    let mut grid = vec![n0];
    let mut m = 1e-6 * scale;
    while n0 + m < 1e7 {
        grid.push(n0 + m);
        m *= 1.1;
    }
    let mut roots = Vec::new();
    let mut prev = (grid[0], h(grid[0])?);
    if prev.1 == 0.0 {
        roots.push(prev.0);
    }
    let mut falling_below = 0;
    for &n in &grid[1..] {
        let hn = h(n)?;
        if hn == 0.0 {
            roots.push(n);
        } else if prev.1 != 0.0 && hn.signum() != prev.1.signum() {
            roots.push(brent(h, prev.0, n, prev.1, hn, 0.0, model.solver.max_iter)?);
        }
        // V_E -> 0 along every isentrope; stop once safely below and falling
        if hn < 0.0 && hn < prev.1 {
            falling_below += 1;
            if falling_below >= 8 && hn < -1.0 {
                break;
            }
        } else {
            falling_below = 0;
        }
        prev = (n, hn);
    }
    roots.iter().map(|&n| isentrope_state(model, n, raw)).collect()
}

/// The state with evidence `e_target` and log volume `log_v_target` on
/// `branch`, nearest to `n_hint` when more than one exists.
///
/// The targets force `S_E = C_V ln E + R ln V_E`; the search runs along that
/// isentrope in `n`.
pub fn solve_state(
    model: &Model,
    e_target: f64,
    log_v_target: f64,
    n_hint: f64,
    branch: Branch,
) -> Result<EvidentialState> {
    require_one_sided(model, "branch-resolved state solving")?;
    let all = enumerate_states(model, e_target, log_v_target)?;
    if all.is_empty() {
        return Err(Error::solver(format!(
            "no state has E = {e_target} and ln V_E = {log_v_target} on the forced isentrope"
        )));
    }
    let mut on_branch = Vec::new();
    for s in &all {
        // x = 0 and x = n/2 are the branch ends
        let b = if s.x() == 0.0 {
            Branch::LeftOfTrp
        } else if s.x() >= 0.5 * s.n() {
            Branch::RightOfTrp
        } else {
            branch_of(model, s.n(), s.x())?
        };
        if b == branch {
            on_branch.push(*s);
        }
    }
    let hint = n_hint.max(f64::MIN_POSITIVE);
    on_branch
        .into_iter()
        .min_by(|a, b| {
            let da = (a.n().max(f64::MIN_POSITIVE) / hint).ln().abs();
            let db = (b.n().max(f64::MIN_POSITIVE) / hint).ln().abs();
            da.total_cmp(&db)
        })
        .ok_or_else(|| {
            Error::solver(format!(
                "the {} solution(s) for E = {e_target}, ln V_E = {log_v_target} all lie off the {} branch",
                all.len(),
                branch.label()
            ))
        })
}

/// The state realizing `(e_target, log_v_target)` nearest to `n_prev`,
/// found by a local bracket around `n_prev`. Used to follow a continuous
/// path in small steps.
pub fn solve_state_near(model: &Model, e_target: f64, log_v_target: f64, n_prev: f64) -> Result<EvidentialState> {
    let raw = forced_raw_entropy(model, e_target, log_v_target)?;
    let n0 = isentrope_floor(raw);
    let h = |n: f64| Ok(isentrope_state(model, n, raw)?.log_v_e - log_v_target);
    let start = n_prev.max(n0);
    let h0 = h(start)?;
    if h0 == 0.0 {
        return isentrope_state(model, start, raw);
    }
    let base = start.max(1e-6);
    let mut lo_open = start > n0;
    for j in 0..80 {
        let step = base * 1e-5 * 1.6f64.powi(j);
        let hi = start + step;
        let h_hi = h(hi)?;
        let mut best: Option<(f64, f64, f64)> = None; // (estimated distance, n, h)
        if h_hi.signum() != h0.signum() {
            best = Some((step * h0.abs() / (h0 - h_hi).abs(), hi, h_hi));
        }
        if lo_open {
            let lo = (start - step).max(n0);
            lo_open = lo > n0;
            let h_lo = h(lo)?;
            if h_lo.signum() != h0.signum() {
                let d = (start - lo) * h0.abs() / (h0 - h_lo).abs();
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, lo, h_lo));
                }
            }
        }
        if let Some((_, n_end, h_end)) = best {
            let n = brent(h, start, n_end, h0, h_end, 0.0, model.solver.max_iter)?;
            return isentrope_state(model, n, raw);
        }
        if hi > 1e9 {
            break;
        }
    }
    Err(Error::solver(format!("no state with E = {e_target}, ln V_E = {log_v_target} near n = {n_prev}")))
}

/// The transition point whose minimum evidence equals `e_level`: the
/// largest `n` reached by that isotherm.
pub fn isotherm_junction(model: &Model, e_level: f64) -> Result<TransitionPoint> {
    require_one_sided(model, "the isotherm junction")?;
    let tol = model.solver.residual_tol;
    let ln_e = e_level.ln();
    let f = |n: f64| Ok(transition_point(model, n, tol)?.e_min.ln() - ln_e);
    let floor = model.consts.gamma_minus_one() * LN_2 + model.consts.entropy_offset_k / model.consts.c_v;
    if !(ln_e > floor) {
        return Err(Error::NoSolution { n: 0.0, e_target: e_level, e_min: floor.exp() });
    }
    let mut lo = 1.0;
    let mut f_lo = f(lo)?;
    while f_lo > 0.0 {
        lo *= 0.25;
        if lo < 1e-12 {
            return Err(Error::solver(format!("isotherm junction for E = {e_level} not bracketed below")));
        }
        f_lo = f(lo)?;
    }
    let mut hi = lo * 2.0;
    let mut f_hi = f(hi)?;
    while f_hi < 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::solver(format!("isotherm junction for E = {e_level} beyond n = 1e8")));
        }
        f_hi = f(hi)?;
    }
    let xtol = model.solver.coord_rel_tol * 1e-3 * hi;
    let n = brent(f, lo, hi, f_lo, f_hi, xtol, model.solver.max_iter)?;
    transition_point(model, n, tol)
}

fn linear_grid(lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::domain("a traced curve needs at least two samples"));
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::domain(format!("invalid n range [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (samples - 1) as f64;
    Ok((0..samples).map(|i| if i + 1 == samples { hi } else { lo + step * i as f64 }).collect())
}

/// Traces the isotherm `E = e_level` over `samples` evenly spaced values
/// of `n` in `[n_lo, n_hi]`, solving for `x` on each branch.
///
/// Grid points with no state on a branch are recorded in `gaps`. When the
/// junction lies inside the range it is inserted into both branches, so the
/// largest `n` of the traced curve is exactly the junction.
pub fn trace_isotherm(model: &Model, e_level: f64, n_lo: f64, n_hi: f64, samples: usize) -> Result<Isotherm> {
    require_one_sided(model, "isotherm tracing")?;
    if !(e_level > 0.0) || !e_level.is_finite() {
        return Err(Error::domain(format!("evidence level must be positive, got {e_level}")));
    }
    let grid = linear_grid(n_lo, n_hi, samples)?;
    let junction = isotherm_junction(model, e_level).ok().filter(|t| t.n >= n_lo && t.n <= n_hi);

    let mut iso = Isotherm { e_level, left: Vec::new(), right: Vec::new(), gaps: Vec::new(), junction };
    let mut ns = grid;
    if let Some(j) = junction {
        ns.retain(|&n| n != j.n);
        ns.push(j.n);
        ns.sort_by(f64::total_cmp);
    }
    for n in ns {
        let trp = match junction {
            Some(j) if j.n == n => j,
            _ => transition_point(model, n, model.solver.residual_tol)?,
        };
        for branch in [Branch::LeftOfTrp, Branch::RightOfTrp] {
            match solve_x_for_evidence_at(model, &trp, e_level, branch) {
                Ok(x) => {
                    let s = model.state(n, x)?;
                    match branch {
                        Branch::LeftOfTrp => iso.left.push(s.into()),
                        Branch::RightOfTrp => iso.right.push(s.into()),
                    }
                }
                Err(e @ (Error::NoSolution { .. } | Error::Range(_))) => {
                    iso.gaps.push(Gap { n, branch: Some(branch), reason: e.to_string() })
                }
                Err(e) => return Err(e),
            }
        }
    }
    if iso.left.is_empty() && iso.right.is_empty() {
        return Err(Error::NoSolution {
            n: n_hi,
            e_target: e_level,
            e_min: transition_point(model, n_lo, model.solver.residual_tol)?.e_min,
        });
    }
    Ok(iso)
}

/// Traces the isentrope `S_E = s_level` over `samples` evenly spaced `n`.
///
/// Along it `ln E + (R/C_V) ln V_E = S_E / C_V` is constant.
pub fn trace_adiabat(model: &Model, s_level: f64, n_lo: f64, n_hi: f64, samples: usize) -> Result<Adiabat> {
    let grid = linear_grid(n_lo, n_hi, samples)?;
    let raw = s_level - model.consts.entropy_offset_k;
    if !(raw >= 0.0) || !raw.is_finite() {
        return Err(Error::range(format!("entropy level {s_level} is below the offset k")));
    }
    let mut ad = Adiabat { s_level, samples: Vec::new(), gaps: Vec::new() };
    for n in grid {
        match x_for_raw_entropy(n, raw) {
            Ok(x) => ad.samples.push(model.state(n, x.min(0.5 * n))?.into()),
            Err(e @ Error::Range(_)) => ad.gaps.push(Gap { n, branch: None, reason: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    if ad.samples.is_empty() {
        return Err(Error::NoSolution { n: n_hi, e_target: f64::NAN, e_min: f64::NAN });
    }
    Ok(ad)
}
