//! Tabular output shared by the command-line tool and the figure builders.
//!
//! Numbers are written with 12 significant digits in the style of C's `%g`,
//! so output is byte-for-byte reproducible for a fixed configuration.

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::solvers::{transition_point, Branch};
use crate::state::{Model, Side};

/// Formats `v` like `printf("%.12g", v)`.
///
/// ```
/// use evitherm::report::fmt_g12;
/// assert_eq!(fmt_g12(0.1), "0.1");
/// assert_eq!(fmt_g12(2.0 / 3.0), "0.666666666667");
/// assert_eq!(fmt_g12(1e-7), "1e-07");
/// assert_eq!(fmt_g12(123456789012345.0), "1.23456789012e+14");
/// ```
pub fn fmt_g12(v: f64) -> String {
    const P: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        let decimals = (P - 1 - exp) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            // JSON has no non-finite numbers; emit them as strings
            Cell::Num(v) if !v.is_finite() => s.serialize_str(&fmt_g12(*v)),
            Cell::Num(v) => s.serialize_f64(*v),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

/// Named columns and rows of cells. Serializes as a list of flat records.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// Column `name` as numbers; text cells are skipped.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .filter_map(|r| match r[i] {
                    Cell::Num(v) => Some(v),
                    Cell::Text(_) => None,
                })
                .collect(),
        )
    }

    /// Header line first, `,` separators, `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => fmt_g12(*v),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

struct Record<'a>(&'a [String], &'a [Cell]);

impl Serialize for Record<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows.len()))?;
        for row in &self.rows {
            seq.serialize_element(&Record(&self.columns, row))?;
        }
        seq.end()
    }
}

/// Position of `(n, x)` relative to the transition point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrpSide {
    Left,
    At,
    Right,
}

impl TrpSide {
    pub fn label(self) -> &'static str {
        match self {
            TrpSide::Left => "left",
            TrpSide::At => "at",
            TrpSide::Right => "right",
        }
    }
}

/// Classifies `x` against `x*(n)`; "at" means within `coord_rel_tol · n`.
pub fn trp_side(model: &Model, n: f64, x: f64) -> Result<TrpSide> {
    model.point(n, x)?;
    let t = transition_point(model, n, model.solver.residual_tol)?;
    let tol = model.solver.coord_rel_tol * n;
    Ok(if (x - t.x_star).abs() <= tol {
        TrpSide::At
    } else if x < t.x_star {
        TrpSide::Left
    } else {
        TrpSide::Right
    })
}

/// One-row state table with the transition-point annotation.
pub fn state_table(model: &Model, n: f64, x: f64) -> Result<Table> {
    let s = model.state(n, x)?;
    let side = match model.consts.side {
        Side::OneSided if n > 0.0 => trp_side(model, n, x)?.label(),
        _ => "n/a",
    };
    let mut t = Table::new(&["n", "x", "x_over_n", "S_E", "log_V_E", "V_E", "E", "P_E", "trp_side"]);
    t.push(vec![
        n.into(),
        x.into(),
        s.point.ratio().into(),
        s.s_e.into(),
        s.log_v_e.into(),
        s.v_e().into(),
        s.e().into(),
        s.p_e().into(),
        side.into(),
    ]);
    Ok(t)
}

/// Transition points at each `n`.
pub fn trp_table(model: &Model, ns: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["n", "x_star", "x_over_n_at_trp", "E_min", "residual"]);
    for &n in ns {
        let p = transition_point(model, n, model.solver.residual_tol)?;
        t.push(vec![n.into(), p.x_star.into(), p.ratio().into(), p.e_min.into(), p.residual.into()]);
    }
    Ok(t)
}

/// An isotherm as one curve: left branch outward in `n`, then the right
/// branch back.
pub fn isotherm_table(model: &Model, e_level: f64, n_lo: f64, n_hi: f64, samples: usize) -> Result<Table> {
    let iso = crate::solvers::trace_isotherm(model, e_level, n_lo, n_hi, samples)?;
    let mut t = Table::new(&["e_level", "branch", "n", "x", "x_over_n", "V_E", "P_E", "E", "S_E"]);
    for (b, s) in iso.curve() {
        t.push(vec![
            e_level.into(),
            b.label().into(),
            s.n.into(),
            s.x.into(),
            (s.x / s.n).into(),
            s.v_e.into(),
            s.p_e.into(),
            s.e.into(),
            s.s_e.into(),
        ]);
    }
    Ok(t)
}

pub fn adiabat_table(model: &Model, s_level: f64, n_lo: f64, n_hi: f64, samples: usize) -> Result<Table> {
    let ad = crate::solvers::trace_adiabat(model, s_level, n_lo, n_hi, samples)?;
    let mut t = Table::new(&["s_level", "n", "x", "x_over_n", "V_E", "P_E", "E", "S_E"]);
    for s in &ad.samples {
        t.push(vec![
            s_level.into(),
            s.n.into(),
            s.x.into(),
            (s.x / s.n).into(),
            s.v_e.into(),
            s.p_e.into(),
            s.e.into(),
            s.s_e.into(),
        ]);
    }
    Ok(t)
}

/// `x/n` from `step` to 0.5 in steps of `step`.
pub fn ratio_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::domain(format!("grid step must lie in (0, 0.5], got {step}")));
    }
    let m = (0.5 / step).round() as usize;
    Ok((1..=m).map(|i| (i as f64 * step).min(0.5)).collect())
}

pub fn fisher_table(model: &Model, n: f64, grid: &[f64]) -> Result<Table> {
    let rows = crate::fisher::compare_series(model, n, grid)?;
    let mut t = Table::new(&["n", "x_over_n", "E", "E_approx", "fi_over_2pi", "rel_gap"]);
    for r in rows {
        t.push(vec![
            n.into(),
            r.x_over_n.into(),
            r.e_exact.into(),
            r.e_approx.into(),
            r.fi_over_2pi.into(),
            r.rel_gap().into(),
        ]);
    }
    Ok(t)
}

impl From<Branch> for Cell {
    fn from(b: Branch) -> Self {
        Cell::Text(b.label().into())
    }
}
