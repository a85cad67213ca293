//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Constructor rejected parameters (α ≤ −1, q ≤ 1, N = 0, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Argument outside a function's mathematical domain (t ≤ 0, t ≤ τ, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation requested outside its existence regime
    /// (e.g. a very singular profile with q ≥ q_crit).
    #[error("regime error: {0}")]
    Regime(String),

    /// Iterative solver failed to converge.
    #[error("solver error in {method}: {message} (iterations: {iterations}, residual: {residual:.3e})")]
    Solver {
        method: &'static str,
        message: String,
        iterations: usize,
        residual: f64,
    },

    /// A bracketing/bisection search could not enclose a root.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// Returned object violates a structural invariant (sign, monotonicity).
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Requested asymptotic-fit window is unusable.
    #[error("window error: {0}")]
    Window(String),

    /// Sample point outside the stored grid/mesh.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// The time-stepping scheme produced values outside its positivity
    /// tolerance, or inconsistent shapes were supplied.
    #[error("scheme error: {0}")]
    Scheme(String),

    /// Integral condition required by the operation fails (divergent tail).
    #[error("condition error: {0}")]
    Condition(String),

    /// Keller–Osserman anchor lies in a region where H vanishes.
    #[error("anchor error: {0}")]
    Anchor(String),

    /// A linear-profile solve lost its requested asymptotic branch.
    #[error("branch loss: {0}")]
    BranchLoss(String),

    /// Mismatched grids/meshes or otherwise unusable run configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
