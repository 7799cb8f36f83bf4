//! Log-gamma, log-beta and the regularized incomplete beta function.
//!
//! Everything is evaluated in the log domain. For large arguments the
//! beta-function prefactor `p^a q^b / B(a, b)` is formed from the Stirling
//! remainder so that the `a ln a`-sized terms cancel analytically instead of
//! numerically; this keeps relative accuracy near machine precision for
//! `a, b` up to ~1e6.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Above this, Stirling's series with the remainder `stirling_delta` is used.
const STIRLING_MIN: f64 = 10.0;

/// `ζ(k) - 1` for `k = 2..=10`.
const ZETA_M1_LOW: [f64; 9] = [
    0.644_934_066_848_226_4,
    0.202_056_903_159_594_3,
    0.082_323_233_711_138_19,
    0.036_927_755_143_369_93,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_827,
    0.004_077_356_197_944_339,
    0.002_008_392_826_082_214,
    0.000_994_575_127_818_085_3,
];

const ZETA_TERMS: usize = 40;

fn zeta_minus_one() -> &'static [f64; ZETA_TERMS] {
    static TABLE: OnceLock<[f64; ZETA_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; ZETA_TERMS];
        for (i, slot) in t.iter_mut().enumerate() {
            let k = (i + 2) as i32;
            *slot = if k <= 10 {
                ZETA_M1_LOW[i]
            } else {
                // direct sum; the tail beyond 60 is below 1e-19 for k >= 11
                (2..=60).rev().map(|m| (m as f64).powi(-k)).sum()
            };
        }
        t
    })
}

/// `ln Γ(1 + e)` for `|e| <= 0.5`, accurate in the relative sense near `e = 0`.
fn ln_gamma_1p(e: f64) -> f64 {
    let zeta = zeta_minus_one();
    let mut sum = 0.0;
    let mut pow = e * e;
    for (i, z) in zeta.iter().enumerate() {
        let k = (i + 2) as f64;
        let term = z * pow / k;
        sum += if i % 2 == 0 { term } else { -term };
        if term.abs() < 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        pow *= e;
    }
    -e.ln_1p() + e * (1.0 - EULER_GAMMA) + sum
}

/// Remainder of Stirling's series, `ln Γ(z) - [(z - 1/2) ln z - z + ln √(2π)]`.
pub(crate) fn stirling_delta(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
                - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0 - r2 * (1.0 / 156.0)))))))
}

/// Unchecked `ln Γ(z)` for `z > 0`.
pub(crate) fn ln_gamma(z: f64) -> f64 {
    if z < 0.5 {
        return ln_gamma(z + 1.0) - z.ln();
    }
    if z <= 1.5 {
        return ln_gamma_1p(z - 1.0);
    }
    if z < 2.5 {
        // Γ(z) = (z - 1) Γ(z - 1); ln_1p keeps the root at z = 2 exact
        return (z - 2.0).ln_1p() + ln_gamma_1p(z - 2.0);
    }
    if z < STIRLING_MIN {
        let mut shifted = z;
        let mut prod = 1.0;
        while shifted >= 2.5 {
            shifted -= 1.0;
            prod *= shifted;
        }
        return prod.ln() + ln_gamma(shifted);
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + stirling_delta(z)
}

/// Natural log of the gamma function.
///
/// Relative error stays below 1e-13 on `[0.5, 1e6]`, including around the
/// zeros of `ln Γ` at 1 and 2.
pub fn log_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("log_gamma requires z > 0, got {z}")));
    }
    Ok(ln_gamma(z))
}

/// Unchecked `ln B(a, b)`.
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, large) = if a < b { (a, b) } else { (b, a) };
    if small >= STIRLING_MIN {
        let sum = a + b;
        (a - 0.5) * a.ln() + (b - 0.5) * b.ln() - (sum - 0.5) * sum.ln()
            + HALF_LN_2PI
            + stirling_delta(a)
            + stirling_delta(b)
            - stirling_delta(sum)
    } else if large >= STIRLING_MIN {
        // ln Γ(l) - ln Γ(l + s) without cancelling two huge values
        let sum = small + large;
        let diff = -(large - 0.5) * (small / large).ln_1p() - small * sum.ln() + small + stirling_delta(large)
            - stirling_delta(sum);
        ln_gamma(small) + diff
    } else {
        ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
    }
}

/// Natural log of the beta function, `ln Γ(a) + ln Γ(b) - ln Γ(a + b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("log_beta requires a, b > 0, got ({a}, {b})")));
    }
    Ok(ln_beta(a, b))
}

/// `a ln p + b ln(1 - p) - ln B(a, b)`, the log of the beta density's
/// kernel at `p` times its normalizer.
pub(crate) fn ln_kernel_over_beta(p: f64, a: f64, b: f64) -> f64 {
    let q = 1.0 - p;
    if a.min(b) >= STIRLING_MIN {
        let sum = a + b;
        // p (a + b) / a = 1 + (p b - q a) / a
        let shift = p * b - q * a;
        a * (shift / a).ln_1p() + b * (-shift / b).ln_1p() + 0.5 * (a * b / sum / (2.0 * PI)).ln()
            - (stirling_delta(a) + stirling_delta(b) - stirling_delta(sum))
    } else {
        let lp = if a == 0.0 { 0.0 } else { a * p.ln() };
        let lq = if b == 0.0 { 0.0 } else { b * q.ln() };
        lp + lq - ln_beta(a, b)
    }
}

/// Continued fraction for `I_p(a, b)` by the modified Lentz method.
fn beta_cf(p: f64, a: f64, b: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let eps = 4.0 * f64::EPSILON;
    let max_iter = (1000.0 + 20.0 * a.max(b).sqrt()) as usize;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * p / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=max_iter {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * p / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * p / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= eps {
            return Ok(h);
        }
    }
    Err(Error::Convergence { what: "incomplete beta continued fraction", best: h })
}

/// `ln I_p(a, b)` evaluated directly by the continued fraction; accurate when
/// `p <= (a + 1) / (a + b + 2)`.
fn ln_inc_beta_direct(p: f64, a: f64, b: f64) -> Result<f64> {
    Ok(ln_kernel_over_beta(p, a, b) - a.ln() + beta_cf(p, a, b)?.ln())
}

fn check_inc_beta_args(p: f64, a: f64, b: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("incomplete beta requires 0 <= p <= 1, got {p}")));
    }
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("incomplete beta requires a, b > 0, got ({a}, {b})")));
    }
    Ok(())
}

/// Natural log of the regularized incomplete beta function `I_p(a, b)`.
///
/// Returns `-inf` at `p = 0`.
pub fn ln_reg_inc_beta(p: f64, a: f64, b: f64) -> Result<f64> {
    check_inc_beta_args(p, a, b)?;
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    if p <= (a + 1.0) / (a + b + 2.0) {
        ln_inc_beta_direct(p, a, b)
    } else {
        let other = ln_inc_beta_direct(1.0 - p, b, a)?;
        Ok((-other.exp()).ln_1p())
    }
}

/// Regularized incomplete beta function `I_p(a, b)`.
///
/// Uses the continued fraction with the usual switch to `1 - I_{1-p}(b, a)`
/// for `p > (a + 1) / (a + b + 2)`.
///
/// ```
/// use evitherm::numerics::reg_inc_beta;
/// assert!((reg_inc_beta(0.5, 1.0, 3.0).unwrap() - 0.875).abs() < 1e-15);
/// ```
pub fn reg_inc_beta(p: f64, a: f64, b: f64) -> Result<f64> {
    check_inc_beta_args(p, a, b)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    if p <= (a + 1.0) / (a + b + 2.0) {
        Ok(ln_inc_beta_direct(p, a, b)?.exp())
    } else {
        Ok(1.0 - ln_inc_beta_direct(1.0 - p, b, a)?.exp())
    }
}

/// `ln ∫_0^{1/2} θ^(a-1) (1-θ)^(b-1) dθ + (a + b) ln 2`.
///
/// This is `ln[2^(a+b) B(a, b) I_{1/2}(a, b)]`, assembled without ever forming
/// `ln B` on its own.
pub(crate) fn ln_half_beta_integral_scaled(a: f64, b: f64) -> Result<f64> {
    // kernel at p = 1/2 is symmetric in (a, b)
    let kernel = ln_kernel_over_beta(0.5, a, b);
    let scale = -kernel; // = (a + b) ln 2 + ln B(a, b)
    if 0.5 <= (a + 1.0) / (a + b + 2.0) {
        Ok(scale + kernel - a.ln() + beta_cf(0.5, a, b)?.ln())
    } else {
        let other = kernel - b.ln() + beta_cf(0.5, b, a)?.ln();
        Ok(scale + (-other.exp()).ln_1p())
    }
}
