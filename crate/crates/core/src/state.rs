//! The thermodynamic state map `(n, x) -> (V_E, S_E, E, P_E)`.
//!
//! A binomial observation of `x` heads in `n` tosses is summarized by the
//! likelihood ratio against a fair coin,
//!
//! ```text
//! LR(θ; n, x) = θ^x (1-θ)^(n-x) / (1/2)^n .
//! ```
//!
//! The evidential volume `V_E` is the area under the LR over `θ ∈ [0, 1/2]`
//! (one-sided) or `[0, 1]` (two-sided); the evidential entropy `S_E` is the
//! log of the maximized LR plus an additive constant `k`. Requiring the
//! ideal-gas equation of state `P_E V_E = R E` together with
//! `S_E = C_V ln E + R ln V_E` then fixes the evidence
//!
//! ```text
//! E = exp(S_E / C_V) / V_E^(R / C_V),     P_E = R E / V_E .
//! ```
//!
//! Everything is held in the log domain; `2^n` is never formed. The linear
//! accessors ([`EvidentialState::e`] and friends) exponentiate on demand and
//! may overflow to `+inf` for extreme `n`; that is not treated as an error.
//!
//! The equation of state in entropy form is not adequate as `E` approaches its
//! lower bound (the analogue of `T -> 0`). States are still computed wherever
//! the formulas are defined.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    binomial_breaks, ln_half_beta_integral_scaled, ln_kernel_over_beta, log_quadrature_with_breaks, QuadratureConfig,
};

/// Integration range of the evidential volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `θ ∈ [0, 1/2]`, with `x <= n/2`.
    #[default]
    OneSided,
    /// `θ ∈ [0, 1]`, with `x <= n`.
    TwoSided,
}

impl Side {
    /// Upper integration limit in `θ`.
    pub fn upper(self) -> f64 {
        match self {
            Side::OneSided => 0.5,
            Side::TwoSided => 1.0,
        }
    }
}

/// The fixed physics-analogue constants of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelConstants {
    /// Scaling constant in `P_E V_E = R E`.
    pub r: f64,
    /// Heat-capacity constant.
    pub c_v: f64,
    pub side: Side,
    /// Additive constant of the entropy. Changing it rescales every `E` by
    /// `exp(k / C_V)`.
    pub entropy_offset_k: f64,
}

impl Default for ModelConstants {
    /// `R = 1`, `C_V = 3R/2` (the monatomic value), one-sided, `k = 0`.
    fn default() -> Self {
        ModelConstants { r: 1.0, c_v: 1.5, side: Side::OneSided, entropy_offset_k: 0.0 }
    }
}

impl ModelConstants {
    pub fn new(r: f64, c_v: f64) -> Result<Self> {
        let c = ModelConstants { r, c_v, ..Default::default() };
        c.validate()?;
        Ok(c)
    }

    /// `C_V = R/2`, the setting under which `E` approaches the observed
    /// Fisher information over `2π`.
    pub fn appendix() -> Self {
        ModelConstants { c_v: 0.5, ..Default::default() }
    }

    pub fn with_side(self, side: Side) -> Self {
        ModelConstants { side, ..self }
    }

    pub fn with_entropy_offset(self, k: f64) -> Self {
        ModelConstants { entropy_offset_k: k, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(Error::domain(format!("R must be positive, got {}", self.r)));
        }
        if !(self.c_v > 0.0) || !self.c_v.is_finite() {
            return Err(Error::domain(format!("C_V must be positive, got {}", self.c_v)));
        }
        if !self.entropy_offset_k.is_finite() {
            return Err(Error::domain("entropy offset k must be finite"));
        }
        Ok(())
    }

    /// `R / C_V`, the adiabatic exponent minus one.
    pub fn gamma_minus_one(&self) -> f64 {
        self.r / self.c_v
    }
}

/// Tolerances shared by the root finders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Target on equation residuals.
    pub residual_tol: f64,
    /// Relative tolerance on solved coordinates.
    pub coord_rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { residual_tol: 1e-10, coord_rel_tol: 1e-8, max_iter: 300 }
    }
}

/// Constants plus numerical configuration; the context every solver needs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Model {
    pub consts: ModelConstants,
    pub quad: QuadratureConfig,
    pub solver: SolverConfig,
}

impl Model {
    pub fn new(consts: ModelConstants) -> Self {
        Model { consts, ..Default::default() }
    }

    pub fn appendix() -> Self {
        Model::new(ModelConstants::appendix())
    }

    /// Validates `(n, x)` for this model's side.
    pub fn point(&self, n: f64, x: f64) -> Result<ObservationPoint> {
        ObservationPoint::new(n, x, self.consts.side)
    }

    /// The full state at `(n, x)`.
    pub fn state(&self, n: f64, x: f64) -> Result<EvidentialState> {
        make_state(self.point(n, x)?, &self.consts, &self.quad)
    }

    pub fn log_volume(&self, point: ObservationPoint) -> Result<f64> {
        log_volume(point, &self.consts, &self.quad)
    }

    /// `ln E` at `(n, x)`.
    pub fn log_e(&self, n: f64, x: f64) -> Result<f64> {
        Ok(self.state(n, x)?.log_e)
    }
}

/// A state of the binomial system. Both coordinates are continuous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservationPoint {
    pub n: f64,
    pub x: f64,
}

impl ObservationPoint {
    pub fn new(n: f64, x: f64, side: Side) -> Result<Self> {
        if !(n >= 0.0) || !n.is_finite() {
            return Err(Error::domain(format!("n must be finite and nonnegative, got {n}")));
        }
        let x_max = match side {
            Side::OneSided => 0.5 * n,
            Side::TwoSided => n,
        };
        if !(x >= 0.0 && x <= x_max) {
            return Err(Error::domain(format!("x must lie in [0, {x_max}] for n = {n} ({side:?}), got {x}")));
        }
        Ok(ObservationPoint { n, x })
    }

    /// `x / n`, or `1/2` for the empty experiment.
    pub fn ratio(&self) -> f64 {
        if self.n > 0.0 {
            self.x / self.n
        } else {
            0.5
        }
    }
}

/// A point together with every derived thermodynamic quantity (logs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "StateRecord")]
pub struct EvidentialState {
    pub point: ObservationPoint,
    pub log_v_e: f64,
    pub s_e: f64,
    pub log_e: f64,
    pub log_p_e: f64,
}

impl EvidentialState {
    pub fn n(&self) -> f64 {
        self.point.n
    }

    pub fn x(&self) -> f64 {
        self.point.x
    }

    pub fn v_e(&self) -> f64 {
        self.log_v_e.exp()
    }

    pub fn e(&self) -> f64 {
        self.log_e.exp()
    }

    pub fn p_e(&self) -> f64 {
        self.log_p_e.exp()
    }
}

#[derive(Serialize)]
struct StateRecord {
    n: f64,
    x: f64,
    #[serde(rename = "S_E")]
    s_e: f64,
    #[serde(rename = "log_V_E")]
    log_v_e: f64,
    #[serde(rename = "V_E")]
    v_e: f64,
    #[serde(rename = "log_E")]
    log_e: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "P_E")]
    p_e: f64,
}

impl From<EvidentialState> for StateRecord {
    fn from(s: EvidentialState) -> Self {
        StateRecord {
            n: s.n(),
            x: s.x(),
            s_e: s.s_e,
            log_v_e: s.log_v_e,
            v_e: s.v_e(),
            log_e: s.log_e,
            e: s.e(),
            p_e: s.p_e(),
        }
    }
}

/// `ln LR(θ; n, x) = n ln 2 + x ln θ + (n - x) ln(1 - θ)`, with `0 ln 0 = 0`.
///
/// ```
/// use evitherm::state::{log_lr, ObservationPoint, Side};
/// let p = ObservationPoint::new(4.0, 1.0, Side::OneSided).unwrap();
/// assert!((log_lr(0.25, p).unwrap() - (16.0 * 0.25 * 0.75f64.powi(3)).ln()).abs() < 1e-15);
/// assert_eq!(log_lr(0.0, p).unwrap(), f64::NEG_INFINITY);
/// ```
pub fn log_lr(theta: f64, point: ObservationPoint) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::domain(format!("theta must lie in [0, 1], got {theta}")));
    }
    Ok(log_lr_unchecked(theta, point.n, point.x))
}

pub(crate) fn log_lr_unchecked(theta: f64, n: f64, x: f64) -> f64 {
    if theta == 0.5 {
        return 0.0;
    }
    let heads = if x == 0.0 { 0.0 } else { x * theta.ln() };
    let tails = if n - x == 0.0 { 0.0 } else { (n - x) * (-theta).ln_1p() };
    n * LN_2 + heads + tails
}

/// `ln V_E` through the incomplete beta function.
///
/// One-sided: `n ln 2 + ln B(x+1, n-x+1) + ln I_{1/2}(x+1, n-x+1)`;
/// two-sided: `n ln 2 + ln B(x+1, n-x+1)`.
pub fn log_volume(point: ObservationPoint, consts: &ModelConstants, _cfg: &QuadratureConfig) -> Result<f64> {
    let a = point.x + 1.0;
    let b = point.n - point.x + 1.0;
    match consts.side {
        Side::OneSided => Ok(ln_half_beta_integral_scaled(a, b)? - 2.0 * LN_2),
        Side::TwoSided => Ok(-ln_kernel_over_beta(0.5, a, b) - 2.0 * LN_2),
    }
}

/// `ln V_E` by direct adaptive quadrature of the likelihood ratio; an
/// independent route used to cross-check [`log_volume`].
pub fn log_volume_by_quadrature(
    point: ObservationPoint,
    consts: &ModelConstants,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let hi = consts.side.upper();
    let (n, x) = (point.n, point.x);
    log_quadrature_with_breaks(|t| log_lr_unchecked(t, n, x), &binomial_breaks(n, x, hi), cfg)
}

/// Evidential entropy: `n [u ln u + (1-u) ln(1-u) + ln 2] + k` with `u = x/n`.
///
/// Computed as `x ln(1 - d/n) + (n - x) ln(1 + d/n)`, `d = n - 2x`, which
/// stays accurate as `x -> n/2` where the value goes to zero quadratically.
pub fn entropy(point: ObservationPoint, consts: &ModelConstants) -> f64 {
    raw_entropy(point.n, point.x) + consts.entropy_offset_k
}

/// Entropy with `k = 0`; symmetric under `x -> n - x`.
pub(crate) fn raw_entropy(n: f64, x: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let x = x.min(n - x);
    if x == 0.0 {
        return n * LN_2;
    }
    let d = n - 2.0 * x;
    let s = x * (-d / n).ln_1p() + (n - x) * (d / n).ln_1p();
    s.max(0.0)
}

/// Builds the full state: `ln E = (S_E - R ln V_E) / C_V`,
/// `ln P_E = ln R + ln E - ln V_E`.
///
/// ```
/// use evitherm::state::Model;
/// let s = Model::default().state(2.0, 0.0).unwrap();
/// // exp(2 ln 2 / 1.5) / (7/6)^(2/3)
/// assert!((s.e() - 2.273_746_975_940_795).abs() < 1e-12);
/// ```
pub fn make_state(point: ObservationPoint, consts: &ModelConstants, cfg: &QuadratureConfig) -> Result<EvidentialState> {
    consts.validate()?;
    let log_v_e = log_volume(point, consts, cfg)?;
    Ok(state_from_parts(point, log_v_e, consts))
}

pub(crate) fn state_from_parts(point: ObservationPoint, log_v_e: f64, consts: &ModelConstants) -> EvidentialState {
    let s_e = entropy(point, consts);
    let log_e = (s_e - consts.r * log_v_e) / consts.c_v;
    let log_p_e = consts.r.ln() + log_e - log_v_e;
    EvidentialState { point, log_v_e, s_e, log_e, log_p_e }
}
