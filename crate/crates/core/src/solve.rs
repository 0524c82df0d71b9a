//! Radius search: the round-or-cut algorithm, its bicriteria and
//! budget-violating forms, and the variant without outliers.

use log::{debug, info};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{candidate_radii, RobustInstance};
use crate::partition::{build_pcm, expand_solution, with_tolerance, CoverageAssignment, PcmError};
use crate::pcm::{solve_pcf, PcmSolver, SolverQuality};
use crate::roundcut::{
    ellipsoid_search, valuable_threshold, RoundCutError, SearchOptions, SearchOutcome,
};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no radius guess admits a solution")]
    Infeasible,
    #[error("solver quality {found:?} does not fit this entry point, which needs {expected}")]
    WrongSolver {
        expected: &'static str,
        found: SolverQuality,
    },
    #[error(transparent)]
    RoundCut(#[from] RoundCutError),
    #[error(transparent)]
    Pcm(#[from] PcmError),
    #[error("certification failed: {0}")]
    Certification(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SolutionMode {
    Exact,
    Bicriteria { rho: f64 },
    Violating,
}

impl SolutionMode {
    fn of(quality: SolverQuality) -> Self {
        match quality {
            SolverQuality::Exact => SolutionMode::Exact,
            SolverQuality::Approximate { rho } => SolutionMode::Bicriteria { rho },
            SolverQuality::Violating => SolutionMode::Violating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Opened facilities, ascending.
    pub open_facilities: Vec<usize>,
    /// The certified bound `3 * guess`.
    pub radius: f64,
    /// Largest distance from a covered customer to the open facilities.
    pub max_distance: f64,
    /// Customers within `radius` of the open facilities, ascending.
    pub covered: Vec<usize>,
    /// The radius guess the solution was found at.
    pub guess: f64,
    /// Number of customers the solution had to cover.
    pub required: usize,
    #[serde(flatten)]
    pub mode: SolutionMode,
    /// Ellipsoid iterations summed over all guesses tried.
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Ellipsoid iteration budget per guess.
    pub budget: Option<usize>,
    /// Keep the outcome of every guess, with its cuts.
    pub record: bool,
    /// Guesses evaluated concurrently; the smallest success wins either way.
    pub threads: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            budget: None,
            record: false,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GuessTrace {
    pub guess: f64,
    pub outcome: SearchOutcome,
}

#[derive(Debug, Clone)]
pub struct SolveRun {
    pub solution: Solution,
    /// One entry per guess searched, in ascending order (only when recording).
    pub trace: Vec<GuessTrace>,
}

/// The smallest radius any solution can have: every covered customer has an
/// admissible singleton within the radius, so the `m`-th smallest distance
/// to the nearest admissible singleton is a lower bound.
pub fn radius_lower_bound(inst: &RobustInstance) -> f64 {
    if inst.m == 0 {
        return 0.0;
    }
    let singles: Vec<usize> = (0..inst.num_facilities())
        .filter(|&f| inst.membership(&[f]))
        .collect();
    let mut nearest: Vec<f64> = (0..inst.num_customers())
        .map(|c| inst.space.customer_to_set(c, &singles))
        .collect();
    nearest.sort_by(f64::total_cmp);
    nearest[inst.m - 1]
}

/// Guesses worth searching: candidates at or above [`radius_lower_bound`].
fn guesses(inst: &RobustInstance) -> Vec<f64> {
    let lower = radius_lower_bound(inst);
    candidate_radii(inst)
        .into_iter()
        .filter(|&r| r >= lower)
        .collect()
}

/// The round-or-cut algorithm with an exact solver: covers at least `m`
/// customers within three times the optimal radius.
pub fn solve_robust(inst: &RobustInstance, solver: &dyn PcmSolver) -> Result<Solution, SolveError> {
    if solver.quality() != SolverQuality::Exact {
        return Err(SolveError::WrongSolver {
            expected: "an exact solver",
            found: solver.quality(),
        });
    }
    Ok(solve_with(inst, solver, &SolveOptions::default())?.solution)
}

/// With a `rho`-approximate solver: covers at least `ceil(rho m)` customers
/// within three times the optimal radius.
pub fn solve_bicriteria(
    inst: &RobustInstance,
    solver: &dyn PcmSolver,
) -> Result<Solution, SolveError> {
    if !matches!(
        solver.quality(),
        SolverQuality::Approximate { .. } | SolverQuality::Exact
    ) {
        return Err(SolveError::WrongSolver {
            expected: "an approximate solver",
            found: solver.quality(),
        });
    }
    Ok(solve_with(inst, solver, &SolveOptions::default())?.solution)
}

/// With a solver answering in a relaxed family: covers at least `m`
/// customers; the open set is checked against the solver's relaxed family.
pub fn solve_violating(
    inst: &RobustInstance,
    solver: &dyn PcmSolver,
) -> Result<Solution, SolveError> {
    if !matches!(
        solver.quality(),
        SolverQuality::Violating | SolverQuality::Exact
    ) {
        return Err(SolveError::WrongSolver {
            expected: "a violating solver",
            found: solver.quality(),
        });
    }
    Ok(solve_with(inst, solver, &SolveOptions::default())?.solution)
}

/// Sweeps the guesses in ascending order and returns the first success,
/// certified independently of the search.
pub fn solve_with(
    inst: &RobustInstance,
    solver: &dyn PcmSolver,
    options: &SolveOptions,
) -> Result<SolveRun, SolveError> {
    let required = valuable_threshold(solver.quality(), inst.m);
    let search = &SearchOptions {
        budget: options.budget,
        record_cuts: options.record,
    };
    let guesses = guesses(inst);
    let threads = options.threads.max(1);
    let mut trace = Vec::new();
    let mut iterations = 0;

    for batch in guesses.chunks(threads) {
        let outcomes: Vec<Result<SearchOutcome, RoundCutError>> = if threads == 1 {
            batch
                .iter()
                .map(|&r| ellipsoid_search(inst, r, solver, search))
                .collect()
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .iter()
                    .map(|&r| scope.spawn(move || ellipsoid_search(inst, r, solver, search)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("search thread panicked"))
                    .collect()
            })
        };
        for (&guess, outcome) in batch.iter().zip(outcomes) {
            let outcome = outcome?;
            iterations += outcome.iterations();
            debug!("guess {guess}: {} iterations", outcome.iterations());
            let found = match &outcome {
                SearchOutcome::Valuable { solution, pcm, .. } => Some((
                    solution.facilities.clone(),
                    expand_solution(inst, pcm, &solution.facilities, guess)?,
                )),
                SearchOutcome::Exhausted { .. } => None,
            };
            if options.record {
                trace.push(GuessTrace { guess, outcome });
            }
            if let Some((open, covered)) = found {
                if covered.len() < required {
                    return Err(SolveError::Certification(format!(
                        "valuable point at guess {guess} expands to {} customers, fewer than {required}",
                        covered.len()
                    )));
                }
                let solution = finish(
                    inst,
                    open,
                    covered,
                    guess,
                    required,
                    SolutionMode::of(solver.quality()),
                    iterations,
                );
                certify(inst, &solution, |s| solver.admits(s))?;
                info!("solved at guess {guess} after {iterations} iterations");
                return Ok(SolveRun { solution, trace });
            }
        }
    }
    Err(SolveError::Infeasible)
}

/// Every customer must be served: for each guess, the greedy partition with
/// unit coverage must admit a set hitting every part exactly once.
pub fn solve_no_outliers(inst: &RobustInstance) -> Result<Solution, SolveError> {
    let all = inst
        .with_demand(inst.num_customers())
        .expect("demand equal to the customer count is valid");
    let cov = CoverageAssignment::uniform(all.num_customers(), 1.0);
    for guess in guesses(&all) {
        let pcm = build_pcm(&all, &cov, guess);
        if pcm.parts().iter().any(|p| p.facilities.is_empty()) {
            continue;
        }
        let parts: Vec<Vec<usize>> = pcm.parts().iter().map(|p| p.facilities.clone()).collect();
        let Some(open) = solve_pcf(all.num_facilities(), &parts, &all.constraint)? else {
            continue;
        };
        let covered = expand_solution(&all, &pcm, &open, guess)?;
        let solution = finish(&all, open, covered, guess, all.m, SolutionMode::Exact, 0);
        certify(&all, &solution, |s| all.membership(s))?;
        return Ok(solution);
    }
    Err(SolveError::Infeasible)
}

fn finish(
    inst: &RobustInstance,
    open: Vec<usize>,
    covered: Vec<usize>,
    guess: f64,
    required: usize,
    mode: SolutionMode,
    iterations: usize,
) -> Solution {
    let max_distance = covered
        .iter()
        .map(|&c| inst.space.customer_to_set(c, &open))
        .fold(0.0, f64::max);
    Solution {
        open_facilities: open,
        radius: 3.0 * guess,
        max_distance,
        covered,
        guess,
        required,
        mode,
        iterations,
    }
}

/// Recomputes membership and every covered customer's distance from scratch.
pub fn certify(
    inst: &RobustInstance,
    solution: &Solution,
    admits: impl Fn(&[usize]) -> bool,
) -> Result<(), SolveError> {
    let fail = |msg: String| Err(SolveError::Certification(msg));
    if !admits(&solution.open_facilities) {
        return fail(format!(
            "open set {:?} is outside the family",
            solution.open_facilities
        ));
    }
    let bound = with_tolerance(solution.radius);
    for &c in &solution.covered {
        let d = inst.space.customer_to_set(c, &solution.open_facilities);
        if !(d <= bound) {
            return fail(format!(
                "customer {c} is at distance {d} > {}",
                solution.radius
            ));
        }
    }
    let mut distinct = solution.covered.clone();
    distinct.dedup();
    if distinct.len() < solution.required || solution.covered.len() != distinct.len() {
        return fail(format!(
            "{} distinct customers covered, {} required",
            distinct.len(),
            solution.required
        ));
    }
    Ok(())
}
