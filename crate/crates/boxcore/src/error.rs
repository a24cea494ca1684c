//! Error type shared by all modules.

use crate::spectrum::Mode;

/// Library result alias.
pub type Result<T> = std::result::Result<T, BoxError>;

/// Failures surfaced by the library.
///
/// Everything that is a legitimate outcome of the mathematics (an orbit
/// escaping a table, a mode pair that never crosses) is encoded in return
/// types, not here; these variants are genuine refusals.
#[derive(Debug, thiserror::Error)]
pub enum BoxError {
    /// A geometric or numeric parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An energy ordering contains ties within tolerance where a strict
    /// ordering is required (rank maps refuse to guess).
    #[error("degenerate ordering: ranks {0} and {1} differ by less than the tie tolerance")]
    DegenerateRanks(usize, usize),

    /// The implicit solver did not reach its tolerance within the iteration
    /// budget.
    #[error("implicit solve did not converge after {iters} iterations (residual {residual:.3e})")]
    SolverStalled { iters: usize, residual: f64 },

    /// Population leaked into the highest retained modes, so the Galerkin
    /// truncation no longer represents the state.
    #[error("truncation tail holds population {population:.3e} at t = {t:.6} (limit {limit:.1e})")]
    TailOverflow { t: f64, population: f64, limit: f64 },

    /// The auxiliary profile U dropped to zero or below; a larger U(0) is
    /// needed for a usable shape law.
    #[error("auxiliary profile not positive: min U = {min_u:.6e} at τ = {at_tau:.6}")]
    ProfileNotPositive { min_u: f64, at_tau: f64 },

    /// An adaptive ODE solve failed (step size underflow or budget).
    #[error("ODE integration failed: {0}")]
    OdeFailure(String),

    /// A bisection-based search was handed endpoints that do not bracket the
    /// target.
    #[error("bracketing failed: {0}")]
    NoBracket(String),

    /// The seeded symmetry breaker does not couple the tracked mode pair.
    #[error("breaker potential leaves modes ({},{}) and ({},{}) uncoupled (element {element:.3e}); choose another seed", pair.0.m, pair.0.n, pair.1.m, pair.1.n)]
    BreakerNotGeneric { pair: (Mode, Mode), element: f64 },
}
