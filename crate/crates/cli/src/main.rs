//! `evitherm`: evidence states, transition points, isotherms, adiabats,
//! Carnot cycles, Fisher comparisons and figure data from the command line.
//!
//! Exit status: 0 on success, 1 when a Carnot audit fails, 2 on any error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use evitherm::carnot::{audit_cycle, build_cycle, start_on_isotherm, DEFAULT_PATH_SAMPLES};
use evitherm::figures::{build_figure, Figure, FigureOptions};
use evitherm::report::{self, Table};
use evitherm::{Error, Model, ModelConstants, Side};

#[derive(Debug, Parser)]
#[command(name = "evitherm", version, about = "Statistical evidence as the temperature of an ideal gas")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    OneSided,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct RunConfig {
    /// Heat-capacity constant C_V.
    #[arg(long = "cv", global = true, default_value_t = 1.5)]
    c_v: f64,
    /// Gas constant R.
    #[arg(long = "r", global = true, default_value_t = 1.0)]
    r: f64,
    /// Integration range of the volume: theta in [0, 1/2] or [0, 1].
    #[arg(long, global = true, value_enum, default_value_t = SideArg::OneSided)]
    side: SideArg,
    /// Additive entropy constant k (figure 3 defaults to -C_V ln 2).
    #[arg(long, global = true, allow_hyphen_values = true)]
    k: Option<f64>,
    /// Relative tolerance of the quadrature and residual tolerance of the solvers.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (a directory for `figure`); standard output if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The thermodynamic state at (n, x).
    State { n: f64, x: f64 },
    /// Transition points (minimum of E over x) at one or more n.
    Trp {
        #[arg(required = true)]
        n: Vec<f64>,
    },
    /// Trace the isotherm E = e over n in [n-lo, n-hi].
    Isotherm {
        #[arg(long)]
        e: f64,
        #[arg(long, default_value_t = 0.5)]
        n_lo: f64,
        #[arg(long, default_value_t = 20.0)]
        n_hi: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Trace the adiabat S_E = s over n in [n-lo, n-hi].
    Adiabat {
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        n_lo: f64,
        #[arg(long, default_value_t = 100.0)]
        n_hi: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Build and audit a Carnot cycle between e1 < e2.
    Carnot {
        #[arg(long)]
        e1: f64,
        #[arg(long)]
        e2: f64,
        /// Start at (start-n, start-x); by default the zero-entropy state on the e2 isotherm.
        #[arg(long, requires = "start_x")]
        start_n: Option<f64>,
        #[arg(long, requires = "start_n")]
        start_x: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        ratio: f64,
        #[arg(long, default_value_t = DEFAULT_PATH_SAMPLES)]
        samples: usize,
    },
    /// Compare E with E_approx and FI_OBS/(2 pi) at C_V = R/2.
    Fisher {
        n: f64,
        /// Spacing of the x/n grid on (0, 0.5].
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Data for a figure panel: 1a 1b 1c 2a 2b 2c 3 4, or all.
    Figure {
        which: String,
        /// Samples per Carnot stroke for figure 3.
        #[arg(long, default_value_t = DEFAULT_PATH_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 2.0)]
        ratio: f64,
    },
}

impl RunConfig {
    fn model(&self) -> evitherm::Result<Model> {
        let side = match self.side {
            SideArg::OneSided => Side::OneSided,
            SideArg::TwoSided => Side::TwoSided,
        };
        let consts = ModelConstants::new(self.r, self.c_v)?.with_side(side).with_entropy_offset(self.k.unwrap_or(0.0));
        let mut model = Model::new(consts);
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("--tol must be positive, got {}", self.tol)));
        }
        model.quad.rel_tol = self.tol;
        model.solver.residual_tol = self.tol;
        Ok(model)
    }
}

enum Outcome {
    Ok,
    AuditFailed,
}

#[derive(Debug)]
enum CliError {
    Model(Error),
    Io(PathBuf, io::Error),
    Json(serde_json::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Json(e) => write!(f, "json: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(p.to_path_buf(), e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io("<stdout>".into(), e))
        }
    }
}

fn render(table: &Table, format: Format, single: bool) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut v = serde_json::to_value(table)?;
            if single && table.rows.len() == 1 {
                v = v.as_array_mut().map(|a| a.remove(0)).unwrap_or(v);
            }
            serde_json::to_string_pretty(&v)? + "\n"
        }
    })
}

fn emit(run: &RunConfig, table: &Table, single: bool) -> Result<(), CliError> {
    write_text(run.out.as_deref(), &render(table, run.format, single)?)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let run = &cli.run;
    let model = run.model()?;
    match &cli.command {
        Command::State { n, x } => emit(run, &report::state_table(&model, *n, *x)?, true)?,
        Command::Trp { n } => emit(run, &report::trp_table(&model, n)?, n.len() == 1)?,
        Command::Isotherm { e, n_lo, n_hi, samples } => {
            emit(run, &report::isotherm_table(&model, *e, *n_lo, *n_hi, *samples)?, false)?
        }
        Command::Adiabat { s, n_lo, n_hi, samples } => {
            emit(run, &report::adiabat_table(&model, *s, *n_lo, *n_hi, *samples)?, false)?
        }
        Command::Fisher { n, step } => {
            let mut m = model;
            m.consts.c_v = 0.5 * m.consts.r;
            emit(run, &report::fisher_table(&m, *n, &report::ratio_grid(*step)?)?, false)?
        }
        Command::Carnot { e1, e2, start_n, start_x, ratio, samples } => {
            if !(e2 > e1) {
                return Err(Error::Domain(format!("e2 must exceed e1, got e1 = {e1}, e2 = {e2}")).into());
            }
            let start = match (start_n, start_x) {
                (Some(n), Some(x)) => model.state(*n, *x)?,
                _ => start_on_isotherm(&model, *e2, model.consts.entropy_offset_k)?,
            };
            let cycle = build_cycle(&model, *e1, *e2, &start, *ratio, *samples)?;
            let audit = audit_cycle(&cycle);
            let text = match run.format {
                Format::Json => {
                    let v: Value = json!({
                        "e1": cycle.e1,
                        "e2": cycle.e2,
                        "k": model.consts.entropy_offset_k,
                        "expansion_ratio": cycle.expansion_ratio,
                        "q2": cycle.q2,
                        "q1": cycle.q1,
                        "q1_over_q2": cycle.q_ratio(),
                        "efficiency": cycle.efficiency,
                        "net_work": cycle.net_work(),
                        "closure_residual": cycle.closure_residual,
                        "strokes": cycle.strokes,
                        "audit": audit,
                    });
                    serde_json::to_string_pretty(&v)? + "\n"
                }
                Format::Csv => {
                    let mut t = Table::new(&[
                        "stroke",
                        "kind",
                        "n_start",
                        "x_start",
                        "n_end",
                        "x_end",
                        "V_start",
                        "V_end",
                        "E_start",
                        "E_end",
                        "w_analytic",
                        "w_numeric",
                    ]);
                    for s in &cycle.strokes {
                        let kind = serde_json::to_value(s.kind)?.as_str().unwrap_or_default().to_string();
                        t.push(vec![
                            s.label.to_string().into(),
                            kind.into(),
                            s.start.n().into(),
                            s.start.x().into(),
                            s.end.n().into(),
                            s.end.x().into(),
                            s.start.v_e().into(),
                            s.end.v_e().into(),
                            s.start.e().into(),
                            s.end.e().into(),
                            s.w_analytic.into(),
                            s.w_numeric.into(),
                        ]);
                    }
                    t.to_csv()
                }
            };
            write_text(run.out.as_deref(), &text)?;
            if !audit.pass {
                for c in audit.checks.iter().filter(|c| !c.pass) {
                    eprintln!("audit failed: {} residual {:e} > {:e}", c.name, c.residual, c.tolerance);
                }
                return Ok(Outcome::AuditFailed);
            }
        }
        Command::Figure { which, samples, ratio } => {
            let figures: Vec<Figure> =
                if which == "all" { Figure::ALL.to_vec() } else { vec![which.parse::<Figure>()?] };
            let opts = FigureOptions { carnot_k: run.k, path_samples: *samples, expansion_ratio: *ratio };
            let mut tables = Vec::new();
            for f in figures {
                tables.extend(build_figure(&model, f, &opts)?);
            }
            write_figures(run, &tables)?;
            if tables.iter().any(|(_, t)| t.rows.iter().any(|r| r.contains(&"fail".into()))) {
                eprintln!("audit failed for a figure-3 cycle");
                return Ok(Outcome::AuditFailed);
            }
        }
    }
    Ok(Outcome::Ok)
}

fn write_figures(run: &RunConfig, tables: &[(String, Table)]) -> Result<(), CliError> {
    let ext = match run.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    match &run.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
            for (name, t) in tables {
                let path = dir.join(format!("{name}.{ext}"));
                fs::write(&path, render(t, run.format, false)?).map_err(|e| CliError::Io(path, e))?;
            }
            Ok(())
        }
        None => {
            let text = match run.format {
                // tables separated by a blank line
                Format::Csv => tables.iter().map(|(_, t)| t.to_csv()).collect::<Vec<_>>().join("\n"),
                Format::Json => {
                    let map: serde_json::Map<String, Value> = tables
                        .iter()
                        .map(|(n, t)| Ok((n.clone(), serde_json::to_value(t)?)))
                        .collect::<Result<_, serde_json::Error>>()?;
                    serde_json::to_string_pretty(&map)? + "\n"
                }
            };
            write_text(None, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::AuditFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
