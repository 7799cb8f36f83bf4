//! Data series behind each figure panel.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::carnot::{audit_cycle, build_cycle, start_on_isotherm, DEFAULT_PATH_SAMPLES};
use crate::error::{Error, Result};
use crate::report::{fisher_table, ratio_grid, Cell, Table};
use crate::solvers::{isotherm_junction, trace_isotherm, transition_point};
use crate::state::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    F1a,
    F1b,
    F1c,
    F2a,
    F2b,
    F2c,
    F3,
    F4,
}

impl Figure {
    pub const ALL: [Figure; 8] =
        [Figure::F1a, Figure::F1b, Figure::F1c, Figure::F2a, Figure::F2b, Figure::F2c, Figure::F3, Figure::F4];

    pub fn id(self) -> &'static str {
        match self {
            Figure::F1a => "1a",
            Figure::F1b => "1b",
            Figure::F1c => "1c",
            Figure::F2a => "2a",
            Figure::F2b => "2b",
            Figure::F2c => "2c",
            Figure::F3 => "3",
            Figure::F4 => "4",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::domain(format!("unknown figure {s:?}; expected one of 1a 1b 1c 2a 2b 2c 3 4")))
    }
}

/// Overrides for the figure defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureOptions {
    /// Entropy offset for the Carnot figure. `None` uses `-C_V ln 2`, the
    /// smallest shift that makes `E = 1` attainable.
    pub carnot_k: Option<f64>,
    pub path_samples: usize,
    pub expansion_ratio: f64,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions { carnot_k: None, path_samples: DEFAULT_PATH_SAMPLES, expansion_ratio: 2.0 }
    }
}

pub const FIG1A_NS: [f64; 5] = [10.0, 50.0, 100.0, 500.0, 1000.0];
pub const FIG2_LEVELS: [f64; 4] = [2.0, 2.25, 2.5, 3.0];
pub const FIG2C_LEVEL: f64 = 2.25;
pub const FIG3_CYCLES: [(f64, f64); 2] = [(1.0, 2.0), (2.0, 4.0)];
pub const FIG4_NS: [f64; 4] = [10.0, 20.0, 50.0, 100.0];

/// Builds the named tables for one figure: `fig1a`, ..., `fig3_paths` and
/// `fig3_summary`, `fig4`.
pub fn build_figure(model: &Model, which: Figure, opts: &FigureOptions) -> Result<Vec<(String, Table)>> {
    let one = |t: Table| Ok(vec![(format!("fig{}", which.id()), t)]);
    match which {
        Figure::F1a => one(fig1a(model)?),
        Figure::F1b => one(fig1b(model)?),
        Figure::F1c => one(fig1c(model)?),
        Figure::F2a => one(fig2(model, false)?),
        Figure::F2b => one(fig2(model, true)?),
        Figure::F2c => one(fig2c(model)?),
        Figure::F3 => {
            let (paths, summary) = fig3(model, opts)?;
            Ok(vec![("fig3_paths".into(), paths), ("fig3_summary".into(), summary)])
        }
        Figure::F4 => one(fig4(model)?),
    }
}

fn fig1a(model: &Model) -> Result<Table> {
    let mut t = Table::new(&["n", "x_over_n", "E"]);
    for n in FIG1A_NS {
        for i in 0..=100 {
            let u = i as f64 * 0.005;
            t.push(vec![n.into(), u.into(), model.state(n, u * n)?.e().into()]);
        }
    }
    Ok(t)
}

fn fig1b(model: &Model) -> Result<Table> {
    let mut t = Table::new(&["n", "x_over_n_at_trp"]);
    for i in 0..=16 {
        let n = 10f64.powf(i as f64 / 4.0);
        let p = transition_point(model, n, model.solver.residual_tol)?;
        t.push(vec![n.into(), p.ratio().into()]);
    }
    Ok(t)
}

fn fig1c(model: &Model) -> Result<Table> {
    let mut t = Table::new(&["n", "x", "E"]);
    for i in 1..=100 {
        let n = 10.0 * i as f64;
        for j in 0..=25 {
            let x = n * j as f64 * 0.02;
            t.push(vec![n.into(), x.into(), model.state(n, x)?.e().into()]);
        }
    }
    Ok(t)
}

fn fig2(model: &Model, ratio: bool) -> Result<Table> {
    let mut t = Table::new(&["e_level", "n", if ratio { "x_over_n" } else { "x" }]);
    for e in FIG2_LEVELS {
        let j = isotherm_junction(model, e)?;
        let iso = trace_isotherm(model, e, j.n / 100.0, j.n, 100)?;
        for (_, s) in iso.curve() {
            let col = if ratio { s.x / s.n } else { s.x };
            t.push(vec![e.into(), s.n.into(), col.into()]);
        }
    }
    Ok(t)
}

fn fig2c(model: &Model) -> Result<Table> {
    let j = isotherm_junction(model, FIG2C_LEVEL)?;
    let iso = trace_isotherm(model, FIG2C_LEVEL, j.n / 200.0, j.n, 200)?;
    let mut t = Table::new(&["V_E", "P_E"]);
    for (_, s) in iso.curve() {
        t.push(vec![s.v_e.into(), s.p_e.into()]);
    }
    Ok(t)
}

fn fig3(model: &Model, opts: &FigureOptions) -> Result<(Table, Table)> {
    let k = opts.carnot_k.unwrap_or(-model.consts.c_v * LN_2);
    let m = Model { consts: model.consts.with_entropy_offset(k), ..*model };
    let mut paths = Table::new(&["cycle_id", "stroke", "V_E", "P_E"]);
    let mut summary = Table::new(&[
        "cycle_id",
        "e1",
        "e2",
        "k",
        "expansion_ratio",
        "W_A",
        "W_B",
        "W_C",
        "W_D",
        "q1_over_q2",
        "efficiency",
        "audit",
    ]);
    for (id, (e1, e2)) in FIG3_CYCLES.into_iter().enumerate() {
        let id = (id + 1) as f64;
        let start = start_on_isotherm(&m, e2, k)?;
        let cycle = build_cycle(&m, e1, e2, &start, opts.expansion_ratio, opts.path_samples)?;
        for s in &cycle.strokes {
            for p in &s.path {
                paths.push(vec![id.into(), s.label.to_string().into(), p.v_e.into(), p.p_e.into()]);
            }
        }
        let audit = audit_cycle(&cycle);
        let mut row: Vec<Cell> = vec![id.into(), e1.into(), e2.into(), k.into(), opts.expansion_ratio.into()];
        row.extend(cycle.strokes.iter().map(|s| Cell::Num(s.w_analytic)));
        row.extend([cycle.q_ratio().into(), cycle.efficiency.into(), if audit.pass { "pass" } else { "fail" }.into()]);
        summary.push(row);
    }
    Ok((paths, summary))
}

fn fig4(model: &Model) -> Result<Table> {
    let c = model.consts;
    let m = Model { consts: crate::state::ModelConstants { c_v: 0.5 * c.r, ..c }, ..*model };
    let grid = ratio_grid(0.01)?;
    let mut t = Table::new(&["panel_n", "x_over_n", "E", "E_approx", "fi_over_2pi"]);
    for n in FIG4_NS {
        let rows = fisher_table(&m, n, &grid)?;
        for r in rows.rows {
            t.push(r[..5].to_vec());
        }
    }
    Ok(t)
}
