//! Deliberately weaker solvers, used to exercise the bicriteria and
//! budget-violating entry points.

use super::{ExactSolver, PcmSolution, PcmSolver, SolverQuality};
use crate::instance::ConstraintSpec;
use crate::partition::{PcmError, PcmInstance};

/// Returns a `rho`-approximate answer: the exact optimum, trimmed to the
/// fewest highest-value facilities whose value still reaches `rho` times it.
#[derive(Debug, Clone)]
pub struct HalvingSolver {
    exact: ExactSolver,
    rho: f64,
}

impl HalvingSolver {
    /// `rho` must lie in `(0, 1]`.
    pub fn new(spec: ConstraintSpec, rho: f64) -> Self {
        assert!(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1], got {rho}");
        Self {
            exact: ExactSolver::new(spec),
            rho,
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

impl PcmSolver for HalvingSolver {
    fn quality(&self) -> SolverQuality {
        SolverQuality::Approximate { rho: self.rho }
    }

    fn solve(&self, pcm: &PcmInstance) -> Result<PcmSolution, PcmError> {
        let best = self.exact.solve(pcm)?;
        let mut ranked = best.facilities.clone();
        ranked.sort_by_key(|&f| (std::cmp::Reverse(pcm.facility_value(f)), f));
        let target = self.rho * best.value as f64;
        let mut kept = Vec::new();
        let mut value = 0;
        for f in ranked {
            if value as f64 >= target {
                break;
            }
            value += pcm.facility_value(f);
            kept.push(f);
        }
        // Subsets of a family member stay in the family.
        PcmSolution::from_set(pcm, kept)
    }

    fn admits(&self, set: &[usize]) -> bool {
        self.exact.admits(set)
    }
}

/// Solves exactly against budgets inflated by `1 + epsilon`, so answers are
/// at least optimal but may overshoot the original budgets.
#[derive(Debug, Clone)]
pub struct InflatedBudgetSolver {
    relaxed: ExactSolver,
    original: ConstraintSpec,
    epsilon: f64,
}

impl InflatedBudgetSolver {
    pub fn new(spec: ConstraintSpec, epsilon: f64) -> Self {
        assert!(epsilon >= 0.0, "epsilon must be nonnegative, got {epsilon}");
        Self {
            relaxed: ExactSolver::new(spec.with_scaled_budgets(1.0 + epsilon)),
            original: spec,
            epsilon,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn original(&self) -> &ConstraintSpec {
        &self.original
    }
}

impl PcmSolver for InflatedBudgetSolver {
    fn quality(&self) -> SolverQuality {
        SolverQuality::Violating
    }

    fn solve(&self, pcm: &PcmInstance) -> Result<PcmSolution, PcmError> {
        self.relaxed.solve(pcm)
    }

    /// `w(S) <= (1 + epsilon) k` in every dimension, matroid part exact.
    fn admits(&self, set: &[usize]) -> bool {
        self.relaxed.admits(set)
    }
}
