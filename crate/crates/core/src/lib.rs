//! Round-or-cut 3-approximation for the robust supplier problem.
//!
//! Customers and facilities live in a finite metric space. A set of centers
//! must be opened from a down-closed family (knapsack, several knapsacks, a
//! matroid, or a knapsack together with a matroid) so that at least `m`
//! customers are served within the smallest possible radius.
//!
//! The pipeline is:
//!
//! 1. [`instance`] loads and validates an instance and enumerates radius guesses.
//! 2. For every guess, [`roundcut`] runs a central-cut ellipsoid over customer
//!    coverage vectors. Each query point is turned into a partition-constrained
//!    maximization instance by [`partition`], which is solved exactly by one of
//!    the solvers in [`pcm`]. A large enough value rounds to a solution, a small
//!    one yields a separating hyperplane.
//! 3. [`solve`] sweeps the guesses and certifies the output independently.
//!
//! [`baseline`] provides brute-force optima for ratio certification,
//! [`generate`] and [`bench`] drive the benchmark harness.

pub mod baseline;
pub mod bench;
pub mod generate;
pub mod instance;
pub mod matroid;
pub mod partition;
pub mod pcm;
pub mod roundcut;
pub mod solution_file;
pub mod solve;

pub use instance::{ConstraintSpec, MetricSpace, RobustInstance};
pub use matroid::{Matroid, MatroidOracle};
pub use partition::{CoverageAssignment, PcmInstance};
pub use pcm::{ExactSolver, PcmSolution, PcmSolver};
pub use solve::{solve_bicriteria, solve_no_outliers, solve_robust, solve_violating, Solution};
