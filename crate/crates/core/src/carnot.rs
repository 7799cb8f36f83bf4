//! Four-stroke Carnot cycles between two evidence levels.
//!
//! Starting from a state `A` at `E = e2` the engine
//!
//! 1. expands isothermally at `e2` until `V_E` has grown by the expansion
//!    ratio (node `B`),
//! 2. expands adiabatically until `E = e1` (node `C`),
//! 3. compresses isothermally at `e1` until `S_E` is back to `S_E(A)`
//!    (node `D`),
//! 4. compresses adiabatically back to `A`.
//!
//! Node volumes follow from the equation of state alone, so the cycle closes
//! by construction; each stroke is then followed in `(n, x)` in small volume
//! steps and its work integrated numerically as an independent audit.
//! Heat is identified with isothermal work: `Q2 = W_A`, `Q1 = |W_C|`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solvers::{enumerate_states, solve_state_near, PathSample};
use crate::state::{EvidentialState, Model};

/// Default number of samples per stroke.
pub const DEFAULT_PATH_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrokeKind {
    Isothermal,
    Adiabatic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stroke {
    /// `'A'` to `'D'`.
    pub label: char,
    pub kind: StrokeKind,
    pub start: EvidentialState,
    pub end: EvidentialState,
    /// Not serialized; figure output writes paths separately.
    #[serde(skip)]
    pub path: Vec<PathSample>,
    pub w_analytic: f64,
    pub w_numeric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarnotCycle {
    pub e1: f64,
    pub e2: f64,
    pub expansion_ratio: f64,
    pub strokes: Vec<Stroke>,
    pub q2: f64,
    pub q1: f64,
    pub efficiency: f64,
    /// Distance in `(ln V_E, ln E)` between the end of stroke D and `A`.
    pub closure_residual: f64,
}

impl CarnotCycle {
    pub fn stroke(&self, label: char) -> &Stroke {
        self.strokes.iter().find(|s| s.label == label).expect("cycle has strokes A-D")
    }

    pub fn q_ratio(&self) -> f64 {
        self.q1 / self.q2
    }

    /// Sum of the analytic stroke works.
    pub fn net_work(&self) -> f64 {
        self.strokes.iter().map(|s| s.w_analytic).sum()
    }

    /// The same cycle run backwards: stroke order and every path reversed,
    /// every work negated.
    pub fn reversed(&self) -> CarnotCycle {
        let strokes = self
            .strokes
            .iter()
            .rev()
            .map(|s| Stroke {
                label: s.label,
                kind: s.kind,
                start: s.end,
                end: s.start,
                path: s.path.iter().rev().copied().collect(),
                w_analytic: -s.w_analytic,
                w_numeric: -s.w_numeric,
            })
            .collect();
        CarnotCycle { strokes, ..self.clone() }
    }
}

/// Trapezoidal `∫ P_E dV_E` along `path` in traversal order; positive for
/// expansion.
///
/// ```
/// use evitherm::{carnot::work_numeric, solvers::PathSample};
/// let s = |v: f64, p: f64| PathSample { n: 1.0, x: 0.5, log_v_e: v.ln(), v_e: v, p_e: p, e: p * v, s_e: 0.0 };
/// assert_eq!(work_numeric(&[s(0.25, 2.0), s(0.5, 1.0)]).unwrap(), 0.375);
/// ```
pub fn work_numeric(path: &[PathSample]) -> Result<f64> {
    if path.len() < 2 {
        return Err(Error::domain("work integral needs at least two samples"));
    }
    if path.iter().any(|s| !s.v_e.is_finite() || !s.p_e.is_finite()) {
        return Err(Error::domain("work integral needs finite volumes and pressures"));
    }
    Ok(path.windows(2).map(|w| 0.5 * (w[0].p_e + w[1].p_e) * (w[1].v_e - w[0].v_e)).sum())
}

/// The first state (smallest `n`) on the isotherm `e2` with entropy `s_e`.
pub fn start_on_isotherm(model: &Model, e2: f64, s_e: f64) -> Result<EvidentialState> {
    let c = &model.consts;
    let log_v = (s_e - c.c_v * e2.ln()) / c.r;
    enumerate_states(model, e2, log_v)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Infeasible { node: Some('A'), reason: format!("no state has E = {e2} and S_E = {s_e}") })
}

/// Fails with an infeasibility naming `node` if no state realizes the target.
fn check_node(model: &Model, node: char, e: f64, log_v: f64) -> Result<()> {
    let found = enumerate_states(model, e, log_v).map_err(|err| err.at_node(node))?;
    if found.is_empty() {
        let s = model.consts.c_v * e.ln() + model.consts.r * log_v;
        return Err(Error::Infeasible {
            node: Some(node),
            reason: format!("no (n, x) has E = {e} on the isentrope S_E = {s:.6}"),
        });
    }
    Ok(())
}

/// Follows a stroke from `start` to `log_v_end` in equal steps of `V_E`.
///
/// Isothermal strokes hold `E = e_fixed`; adiabatic ones hold `S_E` of the
/// start state.
fn trace_stroke(
    model: &Model,
    kind: StrokeKind,
    start: &EvidentialState,
    e_fixed: f64,
    log_v_end: f64,
    samples: usize,
) -> Result<Vec<PathSample>> {
    let c = &model.consts;
    let (v0, v1) = (start.log_v_e.exp(), log_v_end.exp());
    let mut path = Vec::with_capacity(samples);
    path.push(PathSample::from(*start));
    let mut n_prev = start.n();
    for i in 1..samples {
        let log_v = if i + 1 == samples { log_v_end } else { (v0 + (v1 - v0) * i as f64 / (samples - 1) as f64).ln() };
        let e = match kind {
            StrokeKind::Isothermal => e_fixed,
            StrokeKind::Adiabatic => ((start.s_e - c.r * log_v) / c.c_v).exp(),
        };
        let s = solve_state_near(model, e, log_v, n_prev)?;
        n_prev = s.n();
        path.push(s.into());
    }
    Ok(path)
}

fn path_end(model: &Model, path: &[PathSample]) -> Result<EvidentialState> {
    let last = path.last().expect("paths are nonempty");
    model.state(last.n, last.x)
}

/// Builds the cycle between `e1 < e2` starting at `start` (which must have
/// `E = e2`), with `V_B = expansion_ratio · V_A`.
pub fn build_cycle(
    model: &Model,
    e1: f64,
    e2: f64,
    start: &EvidentialState,
    expansion_ratio: f64,
    path_samples: usize,
) -> Result<CarnotCycle> {
    model.consts.validate()?;
    if !(e1 > 0.0 && e2 > e1 && e2.is_finite()) {
        return Err(Error::domain(format!("need 0 < e1 < e2, got e1 = {e1}, e2 = {e2}")));
    }
    if !(expansion_ratio > 1.0) || !expansion_ratio.is_finite() {
        return Err(Error::domain(format!("expansion ratio must exceed 1, got {expansion_ratio}")));
    }
    if path_samples < 2 {
        return Err(Error::domain("strokes need at least two path samples"));
    }
    if (start.log_e - e2.ln()).abs() > 1e-8 {
        return Err(Error::domain(format!("start state has E = {}, expected e2 = {e2}", start.e())));
    }
    let c = model.consts;
    let s_a = start.s_e;
    if s_a < c.entropy_offset_k {
        return Err(Error::Infeasible { node: Some('A'), reason: format!("S_E(A) = {s_a} is below k") });
    }
    let log_v_b = start.log_v_e + expansion_ratio.ln();
    let s_b = c.c_v * e2.ln() + c.r * log_v_b;
    let log_v_c = (s_b - c.c_v * e1.ln()) / c.r;
    let log_v_d = (s_a - c.c_v * e1.ln()) / c.r;
    check_node(model, 'B', e2, log_v_b)?;
    check_node(model, 'C', e1, log_v_c)?;
    check_node(model, 'D', e1, log_v_d)?;

    let path_a =
        trace_stroke(model, StrokeKind::Isothermal, start, e2, log_v_b, path_samples).map_err(|e| e.at_node('B'))?;
    let node_b = path_end(model, &path_a)?;
    let path_b =
        trace_stroke(model, StrokeKind::Adiabatic, &node_b, e1, log_v_c, path_samples).map_err(|e| e.at_node('C'))?;
    let node_c = path_end(model, &path_b)?;
    let path_c =
        trace_stroke(model, StrokeKind::Isothermal, &node_c, e1, log_v_d, path_samples).map_err(|e| e.at_node('D'))?;
    let node_d = path_end(model, &path_c)?;
    let path_d = trace_stroke(model, StrokeKind::Adiabatic, &node_d, e2, start.log_v_e, path_samples)
        .map_err(|e| e.at_node('A'))?;
    let back = path_end(model, &path_d)?;

    let iso = |e: f64, a: &EvidentialState, b: &EvidentialState| c.r * e * (b.log_v_e - a.log_v_e);
    let adi = |a: &EvidentialState, b: &EvidentialState| c.c_v * (a.e() - b.e());
    let stroke = |label, kind, start: EvidentialState, end: EvidentialState, path: Vec<PathSample>, w| {
        let w_numeric = work_numeric(&path)?;
        Ok::<_, Error>(Stroke { label, kind, start, end, path, w_analytic: w, w_numeric })
    };
    let strokes = vec![
        stroke('A', StrokeKind::Isothermal, *start, node_b, path_a, iso(e2, start, &node_b))?,
        stroke('B', StrokeKind::Adiabatic, node_b, node_c, path_b, adi(&node_b, &node_c))?,
        stroke('C', StrokeKind::Isothermal, node_c, node_d, path_c, iso(e1, &node_c, &node_d))?,
        stroke('D', StrokeKind::Adiabatic, node_d, back, path_d, adi(&node_d, &back))?,
    ];
    let q2 = strokes[0].w_analytic;
    let q1 = strokes[2].w_analytic.abs();
    let closure_residual = (back.log_v_e - start.log_v_e).hypot(back.log_e - start.log_e);
    Ok(CarnotCycle { e1, e2, expansion_ratio, strokes, q2, q1, efficiency: 1.0 - q1 / q2, closure_residual })
}

/// One named residual of an audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
    pub pass: bool,
}

impl AuditReport {
    pub fn get(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Re-derives every cycle identity from the stroke data.
pub fn audit_cycle(cycle: &CarnotCycle) -> AuditReport {
    let mut checks = Vec::new();
    let mut check = |name: String, residual: f64, tolerance: f64| {
        let pass = residual.abs() <= tolerance;
        checks.push(AuditCheck { name, residual, tolerance, pass });
    };
    let w = |l: char| cycle.stroke(l);
    let ratio = cycle.e1 / cycle.e2;

    let q2 = w('A').w_analytic;
    let q1 = w('C').w_analytic.abs();
    check("q_ratio".into(), (q1 / q2 - ratio) / ratio, 1e-6);
    let q_num = w('C').w_numeric.abs() / w('A').w_numeric;
    check("q_ratio_numeric".into(), (q_num - ratio) / ratio, 1e-4);
    let wb = w('B').w_analytic;
    check("adiabatic_cancellation".into(), (wb + w('D').w_analytic) / wb.abs().max(f64::MIN_POSITIVE), 1e-8);
    check("closure".into(), cycle.closure_residual, 1e-8);
    for s in &cycle.strokes {
        let scale = s.w_analytic.abs().max(1.0);
        check(format!("work_{}", s.label), (s.w_numeric - s.w_analytic) / scale, 1e-4);
    }
    let net: f64 = cycle.strokes.iter().map(|s| s.w_analytic).sum();
    check("efficiency_identity".into(), net / q2 - (1.0 - q1 / q2), 1e-6);
    check("carnot_efficiency".into(), cycle.efficiency - (1.0 - ratio), 1e-6);

    let pass = checks.iter().all(|c| c.pass);
    AuditReport { checks, pass }
}
