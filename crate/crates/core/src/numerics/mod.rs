//! Special functions, quadrature and root finding shared by the rest of the
//! crate. All functions are pure and deterministic for a fixed configuration.

mod quadrature;
mod root;
mod special;

pub use quadrature::{
    log_quadrature, log_quadrature_with_breaks, log_sum_exp, posterior_log_odds_mean, GaussLegendre, QuadratureConfig,
};
pub use root::brent;
pub use special::{ln_reg_inc_beta, log_beta, log_gamma, reg_inc_beta};

pub(crate) use quadrature::binomial_breaks;
pub(crate) use special::{ln_gamma, ln_half_beta_integral_scaled, ln_kernel_over_beta};
