//! Statistical evidence on an absolute scale for the binomial model.
//!
//! The crate treats the likelihood-ratio graph of a coin-tossing experiment
//! as one mole of ideal gas: the area under the graph is a volume, the log
//! of its maximum is an entropy, and the temperature that closes the
//! equation of state is the evidence `E`. On top of the state map it provides
//! transition points, isotherm and adiabat tracing, Carnot cycles between
//! evidence levels, and the large-sample link between `E` and the observed
//! Fisher information.
//!
//! ```
//! use evitherm::state::Model;
//!
//! let model = Model::default();
//! let s = model.state(10.0, 2.0).unwrap();
//! // the ideal-gas equation of state holds identically
//! assert!((s.p_e() * s.v_e() - model.consts.r * s.e()).abs() < 1e-12 * s.e());
//! ```
//!
//! The guide under `book/` walks through each piece; its code blocks are
//! compiled as doc-tests of this crate.

// `!(a > b)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carnot;
pub mod error;
pub mod figures;
pub mod fisher;
pub mod numerics;
pub mod report;
pub mod solvers;
pub mod state;

pub use error::{Error, Result};
pub use state::{EvidentialState, Model, ModelConstants, ObservationPoint, Side, SolverConfig};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/transition.md")]
    mod transition {}
    #[doc = include_str!("../../../book/src/paths.md")]
    mod paths {}
    #[doc = include_str!("../../../book/src/carnot.md")]
    mod carnot {}
    #[doc = include_str!("../../../book/src/fisher.md")]
    mod fisher {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
