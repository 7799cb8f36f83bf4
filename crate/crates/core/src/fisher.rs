//! Large-sample link between `E` and the observed Fisher information.
//!
//! With `C_V = R/2` and Stirling's formula applied to the full-range volume
//! `2^n x!(n-x)!/(n+1)!`, the evidence tends to `(n+1)^3 / (2π x(n-x))`,
//! which in turn tends to `FI_OBS / 2π` with `FI_OBS = n^3 / (x(n-x))`.
//! The comparison here always uses the exact one-sided `E`.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::ln_gamma;
use crate::state::Model;

fn interior(n: f64, x: f64, what: &str) -> Result<()> {
    if !(n > 0.0) || !n.is_finite() || !x.is_finite() {
        return Err(Error::domain(format!("{what} requires finite n > 0, got n = {n}, x = {x}")));
    }
    if x == 0.0 || x == n {
        return Err(Error::Infinite(format!("{what} is infinite at x = {x} for n = {n}")));
    }
    if !(x > 0.0 && x < n) {
        return Err(Error::domain(format!("{what} requires 0 < x < n, got x = {x} for n = {n}")));
    }
    Ok(())
}

/// Observed Fisher information at `θ = x/n`: `n^3 / (x (n - x))`.
///
/// ```
/// let fi = evitherm::fisher::fi_obs(100.0, 5.0).unwrap();
/// assert!((fi - 1e6 / 475.0).abs() < 1e-9);
/// ```
pub fn fi_obs(n: f64, x: f64) -> Result<f64> {
    interior(n, x, "observed Fisher information")?;
    Ok(n * n * n / (x * (n - x)))
}

/// `(n + 1)^3 / (2π x (n - x))`.
pub fn e_approx(n: f64, x: f64) -> Result<f64> {
    interior(n, x, "E_approx")?;
    let m = n + 1.0;
    Ok(m * m * m / (2.0 * PI * x * (n - x)))
}

/// `ln(2^n x! (n-x)! / (n+1)!)`, the exact full-range volume.
pub fn log_factorial_volume(n: u64, x: u64) -> Result<f64> {
    if x > n {
        return Err(Error::domain(format!("x = {x} exceeds n = {n}")));
    }
    let (n, x) = (n as f64, x as f64);
    Ok(n * LN_2 + ln_gamma(x + 1.0) + ln_gamma(n - x + 1.0) - ln_gamma(n + 2.0))
}

/// Stirling form of the full-range log volume,
/// `n ln 2 + x ln x + (n-x) ln(n-x) - (n+1) ln(n+1) + 1 + ½ ln(2π x(n-x)/(n+1))`.
pub fn stirling_log_volume(n: f64, x: f64) -> Result<f64> {
    interior(n, x, "the Stirling volume")?;
    let y = n - x;
    let m = n + 1.0;
    Ok(n * LN_2 + x * x.ln() + y * y.ln() - m * m.ln() + 1.0 + 0.5 * (2.0 * PI * x * y / m).ln())
}

/// `E` with the Stirling volume and `C_V = R/2, R = 1`:
/// `((n+1)/n)^(2n) (n+1)^3 / (e^2 2π x(n-x))`.
pub fn e_stirling(n: f64, x: f64) -> Result<f64> {
    interior(n, x, "E_stirling")?;
    let m = n + 1.0;
    let ln = 2.0 * n * (1.0 / n).ln_1p() + 3.0 * m.ln() - 2.0 - (2.0 * PI * x * (n - x)).ln();
    Ok(ln.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherComparison {
    pub n: f64,
    pub x: f64,
    pub x_over_n: f64,
    pub e_exact: f64,
    pub e_approx: f64,
    pub fi_over_2pi: f64,
}

impl FisherComparison {
    /// `|E - FI_OBS/2π| / E`.
    pub fn rel_gap(&self) -> f64 {
        (self.e_exact - self.fi_over_2pi).abs() / self.e_exact
    }
}

/// Compares exact `E`, `E_approx` and `FI_OBS/2π` at `x = ratio · n` for
/// each ratio in `(0, 0.5]`. The model must have `C_V = R/2`.
pub fn compare_series(model: &Model, n: f64, ratio_grid: &[f64]) -> Result<Vec<FisherComparison>> {
    let c = &model.consts;
    if (c.c_v - 0.5 * c.r).abs() > 1e-12 * c.r {
        return Err(Error::domain(format!("the Fisher comparison needs C_V = R/2, got C_V = {}, R = {}", c.c_v, c.r)));
    }
    ratio_grid
        .iter()
        .map(|&u| {
            if !(u > 0.0 && u <= 0.5) {
                return Err(Error::domain(format!("x/n must lie in (0, 0.5], got {u}")));
            }
            let x = u * n;
            Ok(FisherComparison {
                n,
                x,
                x_over_n: u,
                e_exact: model.state(n, x)?.e(),
                e_approx: e_approx(n, x)?,
                fi_over_2pi: fi_obs(n, x)? / (2.0 * PI),
            })
        })
        .collect()
}
