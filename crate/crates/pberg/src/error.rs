use thiserror::Error;

/// Errors produced by the numerical operations in this crate.
#[derive(Debug, Error)]
pub enum PbergError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point {0} is outside the domain (or within the numeric floor of its boundary)")]
    Geometry(String),

    #[error("operation unsupported on this domain: {0}")]
    UnsupportedDomain(String),

    #[error("region is empty under the grid mask")]
    EmptyRegion,

    #[error("Gram matrix is ill-conditioned (cond ~ {cond:.3e} > {limit:.1e}); reduce the basis degree")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("constraint rows are rank deficient or the system is infeasible")]
    RankDeficient,

    #[error("solver did not converge after {iterations} iterations (last objective {:.6e})", last.objective)]
    Convergence {
        iterations: usize,
        /// Last iterate, so callers can inspect or salvage it.
        last: Box<crate::solver::LpSolution>,
    },

    #[error("finite-difference step unreliable: Richardson levels disagree ({0})")]
    StepSize(String),

    #[error("parameter outside the validity range of the formula: {0}")]
    Range(String),

    #[error("bisection bracket does not straddle the target: {0}")]
    Bisection(String),

    #[error("ascent iteration diverged: {0}")]
    Ascent(String),

    #[error("rank-deficient design matrix in least-squares fit")]
    FitRank,

    #[error("a random candidate beat the theoretical minimum distance ({found:.9} < {expected:.9}); this flags an implementation bug")]
    CounterexampleViolation { found: f64, expected: f64 },
}

pub type Result<T> = std::result::Result<T, PbergError>;
