use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method ran out of iterations or subdivisions.
    #[error("{what} did not converge (best estimate {best})")]
    Convergence { what: &'static str, best: f64 },

    /// A target value lies outside the range of the map being inverted.
    #[error("range error: {0}")]
    Range(String),

    /// The requested evidence level is below the minimum attainable at this `n`.
    #[error("no solution: E = {e_target} is below the minimum E = {e_min} at n = {n}")]
    NoSolution { n: f64, e_target: f64, e_min: f64 },

    /// A forced state has negative entropy or cannot be realized by any `(n, x)`.
    #[error("infeasible target{}: {reason}", node.map(|c| format!(" at node {c}")).unwrap_or_default())]
    Infeasible { node: Option<char>, reason: String },

    /// A root could not be bracketed or refined.
    #[error("solver error: {0}")]
    Solver(String),

    /// The quantity diverges at the requested point.
    #[error("infinite value: {0}")]
    Infinite(String),

    /// The operation is not defined for the configured model.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }

    /// Attaches a Carnot node label to an infeasibility, or converts a solver
    /// failure into an infeasibility at that node.
    pub(crate) fn at_node(self, label: char) -> Self {
        match self {
            Error::Infeasible { reason, .. } => Error::Infeasible { node: Some(label), reason },
            Error::Solver(reason) | Error::Range(reason) => Error::Infeasible { node: Some(label), reason },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
