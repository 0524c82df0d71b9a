//! Exact solvers for partition-constrained maximization (take at most one
//! facility per part, stay in the family, maximize value) and for its
//! feasibility variant (take exactly one facility per part).

pub mod doubles;
mod knapsack;
mod matroid;
mod pcf;

use crate::instance::ConstraintSpec;
use crate::partition::{PcmError, PcmInstance};

pub use knapsack::{solve_knapsack, solve_multiknapsack, MULTIKNAPSACK_STATE_CAP};
pub use matroid::{solve_knapsack_matroid, solve_matroid, KNAPSACK_MATROID_BUDGET_CAP};
pub use pcf::solve_pcf;

/// Largest number of nonempty parts [`solve_bruteforce`] accepts.
pub const BRUTE_FORCE_PART_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcmSolution {
    /// Chosen facilities, ascending, at most one per part.
    pub facilities: Vec<usize>,
    pub value: usize,
}

impl PcmSolution {
    fn from_set(pcm: &PcmInstance, mut facilities: Vec<usize>) -> Result<Self, PcmError> {
        facilities.sort_unstable();
        let value = pcm.value(&facilities)?;
        Ok(Self { facilities, value })
    }
}

/// What a solver guarantees about its answers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverQuality {
    /// Optimal value, set in the family.
    Exact,
    /// Value at least `rho` times the optimum, set in the family.
    Approximate { rho: f64 },
    /// Value at least the optimum, set in a relaxed family.
    Violating,
}

pub trait PcmSolver: Send + Sync {
    fn quality(&self) -> SolverQuality;

    fn solve(&self, pcm: &PcmInstance) -> Result<PcmSolution, PcmError>;

    /// Whether a set belongs to the family this solver's answers live in:
    /// the constraint family itself, or its relaxation for violating solvers.
    fn admits(&self, set: &[usize]) -> bool;
}

/// The exact solver for each constraint family.
#[derive(Debug, Clone)]
pub struct ExactSolver {
    spec: ConstraintSpec,
}

impl ExactSolver {
    pub fn new(spec: ConstraintSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &ConstraintSpec {
        &self.spec
    }
}

impl PcmSolver for ExactSolver {
    fn quality(&self) -> SolverQuality {
        SolverQuality::Exact
    }

    fn solve(&self, pcm: &PcmInstance) -> Result<PcmSolution, PcmError> {
        match &self.spec {
            ConstraintSpec::Knapsack { weights, budget } => solve_knapsack(pcm, weights, *budget),
            ConstraintSpec::MultiKnapsack { weights, budgets } => {
                solve_multiknapsack(pcm, weights, budgets)
            }
            ConstraintSpec::Matroid(m) => solve_matroid(pcm, m),
            ConstraintSpec::KnapsackAndMatroid {
                weights,
                budget,
                matroid,
            } => solve_knapsack_matroid(pcm, weights, *budget, matroid),
        }
    }

    fn admits(&self, set: &[usize]) -> bool {
        self.spec.membership(set)
    }
}

/// Exhaustive search, usable as a solver for small instances.
#[derive(Debug, Clone)]
pub struct BruteForceSolver {
    spec: ConstraintSpec,
}

impl BruteForceSolver {
    pub fn new(spec: ConstraintSpec) -> Self {
        Self { spec }
    }
}

impl PcmSolver for BruteForceSolver {
    fn quality(&self) -> SolverQuality {
        SolverQuality::Exact
    }
    fn solve(&self, pcm: &PcmInstance) -> Result<PcmSolution, PcmError> {
        solve_bruteforce(pcm, &self.spec)
    }
    fn admits(&self, set: &[usize]) -> bool {
        self.spec.membership(set)
    }
}

/// Optimal value by trying, for every nonempty part, to skip it or to take
/// one of its candidate facilities. For a single knapsack the only candidate
/// is the lightest facility of the part; otherwise every facility is tried.
pub fn solve_bruteforce(pcm: &PcmInstance, spec: &ConstraintSpec) -> Result<PcmSolution, PcmError> {
    let parts: Vec<(usize, Vec<usize>)> = pcm
        .nonempty_parts()
        .map(|p| {
            let candidates = match spec {
                ConstraintSpec::Knapsack { weights, .. } => {
                    vec![*p
                        .facilities
                        .iter()
                        .min_by_key(|&&f| (weights[f], f))
                        .expect("nonempty part")]
                }
                _ => p.facilities.clone(),
            };
            (p.value(), candidates)
        })
        .collect();
    if parts.len() > BRUTE_FORCE_PART_CAP {
        return Err(PcmError::TooManyParts {
            parts: parts.len(),
            cap: BRUTE_FORCE_PART_CAP,
        });
    }
    let mut suffix = vec![0; parts.len() + 1];
    for i in (0..parts.len()).rev() {
        suffix[i] = suffix[i + 1] + parts[i].0;
    }

    struct Search<'a> {
        spec: &'a ConstraintSpec,
        parts: &'a [(usize, Vec<usize>)],
        suffix: &'a [usize],
        current: Vec<usize>,
        best: Option<(usize, Vec<usize>)>,
    }

    impl Search<'_> {
        fn visit(&mut self, i: usize, value: usize) {
            let best_value = self.best.as_ref().map(|b| b.0);
            if best_value.is_some_and(|b| value + self.suffix[i] <= b) {
                return;
            }
            if i == self.parts.len() {
                self.best = Some((value, self.current.clone()));
                return;
            }
            let (part_value, candidates) = &self.parts[i];
            for &f in candidates {
                self.current.push(f);
                if self.spec.membership(&self.current) {
                    self.visit(i + 1, value + part_value);
                }
                self.current.pop();
            }
            self.visit(i + 1, value);
        }
    }

    let mut search = Search {
        spec,
        parts: &parts,
        suffix: &suffix,
        current: Vec::new(),
        best: None,
    };
    search.visit(0, 0);
    let (_, set) = search.best.unwrap_or_default();
    PcmSolution::from_set(pcm, set)
}

/// A nonempty part as seen by the solvers.
#[derive(Debug, Clone)]
struct Item {
    facilities: Vec<usize>,
    value: usize,
}

fn items(pcm: &PcmInstance) -> Vec<Item> {
    pcm.nonempty_parts()
        .map(|p| Item {
            facilities: p.facilities.clone(),
            value: p.value(),
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::partition::Part;

    /// Parts with the given facility lists and values.
    pub(crate) fn pcm_from(num_facilities: usize, parts: &[(&[usize], usize)]) -> PcmInstance {
        let parts = parts
            .iter()
            .enumerate()
            .map(|(i, (facilities, value))| Part {
                rep: i,
                facilities: facilities.to_vec(),
                children: (0..*value).map(|c| i * 1000 + c).collect(),
            })
            .collect();
        PcmInstance::from_parts(num_facilities, parts, 1.0).unwrap()
    }

    #[test]
    fn no_parts() {
        let pcm = pcm_from(2, &[]);
        let spec = ConstraintSpec::Knapsack {
            weights: vec![1, 1],
            budget: 1,
        };
        assert_eq!(
            solve_bruteforce(&pcm, &spec).unwrap(),
            PcmSolution {
                facilities: vec![],
                value: 0
            }
        );
    }

    #[test]
    fn single_admissible_part() {
        let pcm = pcm_from(1, &[(&[0], 2)]);
        let spec = ConstraintSpec::Knapsack {
            weights: vec![1],
            budget: 1,
        };
        assert_eq!(
            solve_bruteforce(&pcm, &spec).unwrap(),
            PcmSolution {
                facilities: vec![0],
                value: 2
            }
        );
    }

    #[test]
    fn two_parts_tight_budget() {
        let pcm = pcm_from(2, &[(&[0], 3), (&[1], 2)]);
        let spec = ConstraintSpec::Knapsack {
            weights: vec![2, 3],
            budget: 4,
        };
        assert_eq!(solve_bruteforce(&pcm, &spec).unwrap().value, 3);
    }

    #[test]
    fn cap_is_enforced() {
        let parts: Vec<Vec<usize>> = (0..21).map(|i| vec![i]).collect();
        let spec: Vec<(&[usize], usize)> = parts.iter().map(|p| (p.as_slice(), 1)).collect();
        let pcm = pcm_from(21, &spec);
        let c = ConstraintSpec::Knapsack {
            weights: vec![1; 21],
            budget: 3,
        };
        assert!(matches!(
            solve_bruteforce(&pcm, &c),
            Err(PcmError::TooManyParts { parts: 21, .. })
        ));
    }
}
