use log::debug;
use nalgebra::{DMatrix, DVector};

use super::{separation_oracle, Cut, OracleOutcome, RoundCutError};
use crate::instance::RobustInstance;
use crate::partition::PcmInstance;
use crate::pcm::{PcmSolution, PcmSolver};

/// Below this width along the cut direction the ellipsoid counts as flat.
const FLAT_WIDTH: f64 = 1e-24;
const JITTER: f64 = 1e-12;

/// `ceil(8 n^2 ln(8n)) + 64` iterations.
pub fn default_budget(n: usize) -> usize {
    let n = n.max(1) as f64;
    (8.0 * n * n * (8.0 * n).ln()).ceil() as usize + 64
}

/// The ellipsoid `{ y : (y - x)^T B^{-1} (y - x) <= 1 }`.
#[derive(Debug, Clone)]
pub struct EllipsoidState {
    center: DVector<f64>,
    shape: DMatrix<f64>,
    log_det: f64,
    iterations: usize,
}

impl EllipsoidState {
    /// The ball of radius `sqrt(n) / 2` around the center of the unit cube,
    /// which contains the cube.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "ellipsoid needs at least one dimension");
        let nf = n as f64;
        Self {
            center: DVector::from_element(n, 0.5),
            shape: DMatrix::identity(n, n) * (nf / 4.0),
            log_det: nf * (nf / 4.0).ln(),
            iterations: 0,
        }
    }

    /// `shape` is row-major and must be positive definite.
    pub fn from_parts(center: Vec<f64>, shape: Vec<f64>) -> Self {
        let n = center.len();
        let shape = DMatrix::from_row_slice(n, n, &shape);
        let log_det = cholesky_log_det(&shape).expect("shape must be positive definite");
        Self {
            center: DVector::from_vec(center),
            shape,
            log_det,
            iterations: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        self.center.as_slice()
    }

    /// Entry `(i, j)` of the shape matrix.
    pub fn shape(&self, i: usize, j: usize) -> f64 {
        self.shape[(i, j)]
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `ln det B`. The shape is positive definite between updates.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `g^T B g` for a unit-normalized `g`.
    pub fn width(&self, g: &[f64]) -> f64 {
        let g = normalized(g);
        g.dot(&(&self.shape * &g))
    }

    /// Keeps the half `{ y : g . y <= g . x }` and replaces the ellipsoid by
    /// the smallest one containing it. On error the state is unchanged.
    pub fn update(&mut self, g: &[f64]) -> Result<(), ExhaustReason> {
        let n = self.dim();
        let g = normalized(g);
        let bg = &self.shape * &g;
        let gbg = g.dot(&bg);
        if !(gbg >= FLAT_WIDTH) {
            return Err(ExhaustReason::Flat);
        }
        let (center, shape) = if n == 1 {
            // Halve the interval.
            let half = self.shape[(0, 0)].sqrt();
            let mut center = self.center.clone();
            center[0] -= g[0].signum() * half / 2.0;
            (center, &self.shape / 4.0)
        } else {
            let nf = n as f64;
            let center = &self.center - &bg / ((nf + 1.0) * gbg.sqrt());
            let outer = &bg * bg.transpose();
            let shape =
                (&self.shape - outer * (2.0 / ((nf + 1.0) * gbg))) * (nf * nf / (nf * nf - 1.0));
            (center, (&shape + shape.transpose()) * 0.5)
        };
        let (shape, log_det) = match cholesky_log_det(&shape) {
            Some(d) => (shape, d),
            None => {
                let jittered = shape + DMatrix::identity(n, n) * JITTER;
                match cholesky_log_det(&jittered) {
                    Some(d) => (jittered, d),
                    None => return Err(ExhaustReason::NotPositiveDefinite),
                }
            }
        };
        if !(log_det < self.log_det) {
            return Err(ExhaustReason::Degenerate);
        }
        self.center = center;
        self.shape = shape;
        self.log_det = log_det;
        self.iterations += 1;
        Ok(())
    }
}

fn cholesky_log_det(shape: &DMatrix<f64>) -> Option<f64> {
    let chol = shape.clone().cholesky()?;
    Some(chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum())
}

fn normalized(g: &[f64]) -> DVector<f64> {
    let v = DVector::from_column_slice(g);
    let norm = v.norm();
    if norm > 0.0 {
        v / norm
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExhaustReason {
    /// The iteration budget ran out.
    Budget,
    /// The ellipsoid became too thin along a cut direction.
    Flat,
    /// The shape matrix stopped being positive definite.
    NotPositiveDefinite,
    /// Rounding kept the update from shrinking the volume.
    Degenerate,
}

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    /// Iteration budget; [`default_budget`] when `None`.
    pub budget: Option<usize>,
    /// Keep every cut with its violation and the log-determinant after it.
    pub record_cuts: bool,
}

#[derive(Debug, Clone)]
pub struct RecordedCut {
    pub cut: Cut,
    /// Center the cut was generated at.
    pub point: Vec<f64>,
    pub violation: f64,
    /// `ln det B` after the update; `None` when the update was rejected
    /// and the search stopped.
    pub log_det: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Valuable {
        solution: PcmSolution,
        pcm: PcmInstance,
        iterations: usize,
        cuts: Vec<RecordedCut>,
    },
    Exhausted {
        reason: ExhaustReason,
        iterations: usize,
        cuts: Vec<RecordedCut>,
    },
}

impl SearchOutcome {
    pub fn iterations(&self) -> usize {
        match self {
            SearchOutcome::Valuable { iterations, .. }
            | SearchOutcome::Exhausted { iterations, .. } => *iterations,
        }
    }

    pub fn cuts(&self) -> &[RecordedCut] {
        match self {
            SearchOutcome::Valuable { cuts, .. } | SearchOutcome::Exhausted { cuts, .. } => cuts,
        }
    }
}

/// Central-cut ellipsoid over coverage vectors at radius `r`.
///
/// A center outside the unit cube is cut by the violated bound; a center
/// inside it goes to the separation oracle.
pub fn ellipsoid_search(
    inst: &RobustInstance,
    r: f64,
    solver: &dyn PcmSolver,
    options: &SearchOptions,
) -> Result<SearchOutcome, RoundCutError> {
    let n = inst.num_customers();
    if n == 0 {
        // Only m = 0 passes validation here.
        let out = separation_oracle(inst, &[], r, solver)?;
        let OracleOutcome::Valuable { solution, pcm } = out else {
            unreachable!("no customers means m = 0")
        };
        return Ok(SearchOutcome::Valuable {
            solution,
            pcm,
            iterations: 0,
            cuts: Vec::new(),
        });
    }
    let budget = options.budget.unwrap_or_else(|| default_budget(n));
    let mut state = EllipsoidState::new(n);
    let mut cuts = Vec::new();
    for iteration in 0..budget {
        let x = state.center().to_vec();
        let cut = if let Some(i) = x.iter().position(|&v| v > 1.0) {
            Cut::upper_bound(n, i)
        } else if let Some(i) = x.iter().position(|&v| v < 0.0) {
            Cut::lower_bound(n, i)
        } else {
            match separation_oracle(inst, &x, r, solver)? {
                OracleOutcome::Valuable { solution, pcm } => {
                    return Ok(SearchOutcome::Valuable {
                        solution,
                        pcm,
                        iterations: iteration,
                        cuts,
                    });
                }
                OracleOutcome::Cut(cut) => cut,
            }
        };
        let updated = state.update(&cut.normal());
        if options.record_cuts {
            let violation = cut.violation(&x);
            cuts.push(RecordedCut {
                cut,
                point: x,
                violation,
                log_det: updated.is_ok().then(|| state.log_det()),
            });
        }
        if let Err(reason) = updated {
            debug!("ellipsoid at radius {r} stopped after {iteration} iterations: {reason:?}");
            return Ok(SearchOutcome::Exhausted {
                reason,
                iterations: iteration,
                cuts,
            });
        }
    }
    Ok(SearchOutcome::Exhausted {
        reason: ExhaustReason::Budget,
        iterations: budget,
        cuts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ConstraintSpec, MetricSpace};
    use crate::matroid::MatroidOracle;
    use crate::partition::tests::line_instance;
    use crate::pcm::ExactSolver;
    use crate::roundcut::CoverageFamily;

    #[test]
    fn two_dimensional_step() {
        let mut s = EllipsoidState::from_parts(vec![0.5, 0.5], vec![0.5, 0.0, 0.0, 0.5]);
        s.update(&[1.0, 0.0]).unwrap();
        // Independent evaluation of the update formulas.
        let x0 = 0.5 - 0.5 / (3.0 * 0.5f64.sqrt());
        assert!((s.center()[0] - x0).abs() < 1e-12);
        assert!((s.center()[0] - 0.2643).abs() < 5e-5);
        assert_eq!(s.center()[1], 0.5);
        assert!((s.shape(0, 0) - 2.0 / 9.0).abs() < 1e-12);
        assert!((s.shape(1, 1) - 2.0 / 3.0).abs() < 1e-12);
        assert!(s.shape(0, 1).abs() < 1e-15);
    }

    #[test]
    fn one_dimension_bisects() {
        let mut s = EllipsoidState::new(1);
        s.update(&[-1.0]).unwrap();
        assert_eq!(s.center(), &[0.75]);
        assert_eq!(s.shape(0, 0), 1.0 / 16.0);
    }

    #[test]
    fn volume_shrinks_every_step() {
        let mut s = EllipsoidState::new(4);
        let mut last = s.log_det();
        for k in 0..50 {
            let g: Vec<f64> = (0..4).map(|i| ((i * 7 + k * 3) % 5) as f64 - 2.0).collect();
            if g.iter().all(|v| *v == 0.0) {
                continue;
            }
            s.update(&g).unwrap();
            let now = s.log_det();
            assert!(now < last);
            last = now;
        }
    }

    #[test]
    fn budget_formula() {
        assert_eq!(default_budget(1), (8.0 * 8f64.ln()).ceil() as usize + 64);
        assert_eq!(default_budget(3), (72.0 * 24f64.ln()).ceil() as usize + 64);
    }

    #[test]
    fn zero_demand_needs_no_cut() {
        let spec = ConstraintSpec::Matroid(MatroidOracle::free(2));
        let inst = line_instance(0, spec.clone());
        let out = ellipsoid_search(
            &inst,
            0.0,
            &ExactSolver::new(spec),
            &SearchOptions::default(),
        )
        .unwrap();
        let SearchOutcome::Valuable {
            solution,
            iterations,
            ..
        } = out
        else {
            panic!("expected valuable")
        };
        assert!(solution.facilities.is_empty());
        assert_eq!(iterations, 0);
    }

    #[test]
    fn single_customer_below_optimum_exhausts_with_valid_cuts() {
        let space =
            MetricSpace::new(vec!["f".into()], vec!["c".into()], vec![0.0, 2.0, 2.0, 0.0]).unwrap();
        let spec = ConstraintSpec::Knapsack {
            weights: vec![1],
            budget: 1,
        };
        let inst = RobustInstance::new(space, 1, spec.clone()).unwrap();
        let options = SearchOptions {
            budget: None,
            record_cuts: true,
        };
        let out = ellipsoid_search(&inst, 1.0, &ExactSolver::new(spec.clone()), &options).unwrap();
        let SearchOutcome::Exhausted {
            iterations, cuts, ..
        } = out
        else {
            panic!("expected exhaustion")
        };
        assert!(iterations <= default_budget(1));
        let family = CoverageFamily::build(&inst, 1.0).unwrap();
        assert!(!cuts.is_empty());
        assert!(cuts
            .iter()
            .all(|c| family.satisfies(&c.cut) && c.violation > 0.0));

        let found = ellipsoid_search(&inst, 2.0, &ExactSolver::new(spec), &options).unwrap();
        assert!(matches!(found, SearchOutcome::Valuable { .. }));
    }

    #[test]
    fn full_demand_is_reached() {
        // m = |C| forces the search toward the corner of the cube.
        let spec = ConstraintSpec::Matroid(MatroidOracle::free(2));
        let inst = line_instance(3, spec.clone());
        let out = ellipsoid_search(
            &inst,
            1.0,
            &ExactSolver::new(spec),
            &SearchOptions::default(),
        )
        .unwrap();
        let SearchOutcome::Valuable { solution, .. } = out else {
            panic!("expected valuable")
        };
        assert_eq!(solution.value, 3);
    }
}
