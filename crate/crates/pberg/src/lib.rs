//! Numerical laboratory for p-Bergman kernels, p-Bergman metrics, weighted
//! Bergman kernels and p-Schwarz contents on planar model domains (discs,
//! annuli, the punctured disc).
//!
//! The central object is the constrained variational problem
//!
//! ```text
//! m_p(z) = inf { ||f||_p : f holomorphic, f(z) = 1 },   K_p(z) = m_p(z)^{-p}
//! ```
//!
//! solved over truncated holomorphic bases by iteratively reweighted least
//! squares. On top of the solver sit the kernel/metric estimators, the
//! weighted-kernel bridge to `L^2` theory, Schwarz contents with their exact
//! `p = 2` eigenvalue path, and a library of closed forms used as oracles.
//!
//! The `acceptance` module replays the full verification suite; the `pberg`
//! command-line tool exposes everything as subcommands.

pub mod acceptance;
pub mod basis;
pub mod domain;
pub mod error;
pub mod hardy;
pub mod kernels;
pub mod oracles;
pub mod quad;
pub mod schwarz;
pub mod solver;
pub mod util;
pub mod weighted;

pub use basis::{k_cut, make_basis, orthonormalize, Basis, BasisKind};
pub use domain::{Domain, Region};
pub use error::{PbergError, Result};
pub use quad::{boundary_grid, build_grid, build_grid_graded, mask, QuadGrid};
pub use solver::{
    metric_problem, point_problem, reproducing_residual, solve, solve_with_start, Constraint,
    LpProblem, LpSolution, SolveOptions,
};
