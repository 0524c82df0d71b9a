use log::warn;

use super::{Cut, CutKind, CutSense};
use crate::instance::RobustInstance;
use crate::partition::{build_pcm, CoverageAssignment, PcmError, PcmInstance};
use crate::pcm::{PcmSolution, PcmSolver, SolverQuality};

/// The oracle tries to round once total coverage reaches `m - FEASIBILITY_SLACK`.
///
/// Any slack below 1/2 keeps the valuation cut strictly violated, and a
/// positive slack keeps a full-dimensional neighbourhood of every integral
/// point alive even when `m` equals the number of customers.
pub const FEASIBILITY_SLACK: f64 = 0.25;

#[derive(Debug, Clone)]
pub enum OracleOutcome {
    /// The partition instance has a solution of value at least the threshold.
    Valuable {
        solution: PcmSolution,
        pcm: PcmInstance,
    },
    Cut(Cut),
}

/// Value a solver answer must reach for the point to count as valuable:
/// `m` for exact and violating solvers, `ceil(rho * m)` for approximate ones.
pub fn valuable_threshold(quality: SolverQuality, m: usize) -> usize {
    match quality {
        SolverQuality::Exact | SolverQuality::Violating => m,
        SolverQuality::Approximate { rho } => ((rho * m as f64) - 1e-9).ceil().max(0.0) as usize,
    }
}

/// Classifies a coverage vector in `[0, 1]^C` at radius `r`: either the
/// greedy partition is valuable, or a cut separates the vector from every
/// coverage vector of the family.
pub fn separation_oracle(
    inst: &RobustInstance,
    cov: &[f64],
    r: f64,
    solver: &dyn PcmSolver,
) -> Result<OracleOutcome, PcmError> {
    let n = inst.num_customers();
    let m = inst.m;
    let cov = CoverageAssignment::new(cov.iter().copied());
    if m == 0 {
        let pcm = build_pcm(inst, &cov, r);
        return Ok(OracleOutcome::Valuable {
            solution: PcmSolution {
                facilities: vec![],
                value: 0,
            },
            pcm,
        });
    }
    if cov.total() < m as f64 - FEASIBILITY_SLACK {
        return Ok(OracleOutcome::Cut(Cut::feasibility(n, m)));
    }
    let pcm = build_pcm(inst, &cov, r);
    let solution = solver.solve(&pcm)?;
    if solution.value >= valuable_threshold(solver.quality(), m) {
        return Ok(OracleOutcome::Valuable { solution, pcm });
    }

    let alpha = m as f64 / (m as f64 - 0.5);
    let mut lambda = vec![0.0; n];
    let mut reps = Vec::new();
    let mut children = Vec::new();
    for part in pcm.parts() {
        lambda[part.rep] = alpha * part.children.len() as f64;
        reps.push(part.rep);
        children.push(part.children.len());
    }
    let cut = Cut {
        kind: CutKind::Valuation {
            alpha,
            reps,
            children,
        },
        lambda,
        rhs: m as f64,
        sense: CutSense::AtMost,
    };
    if cut.violation(cov.values()) <= 1e-9 {
        warn!(
            "valuation cut not violated at total coverage {}; using the feasibility cut",
            cov.total()
        );
        return Ok(OracleOutcome::Cut(Cut::feasibility(n, m)));
    }
    Ok(OracleOutcome::Cut(cut))
}
