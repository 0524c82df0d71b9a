//! Ellipsoid search over customer coverage vectors.
//!
//! The coverage polytope at radius `r` is never written down: it is reached
//! only through the cuts produced by [`separation_oracle`], each of which is
//! valid for every coverage vector induced by a center set in the family.

mod ellipsoid;
mod oracle;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::RobustInstance;
use crate::partition::{with_tolerance, PcmError};

pub use ellipsoid::{
    default_budget, ellipsoid_search, EllipsoidState, ExhaustReason, RecordedCut, SearchOptions,
    SearchOutcome,
};
pub use oracle::{separation_oracle, valuable_threshold, OracleOutcome, FEASIBILITY_SLACK};

/// Largest facility count for which cuts are verified by enumerating the family.
pub const VERIFY_FACILITY_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum RoundCutError {
    #[error(transparent)]
    Pcm(#[from] PcmError),
    #[error("{facilities} facilities exceed the enumeration cap of {cap}")]
    FamilyTooLarge { facilities: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutSense {
    /// `lambda . y <= rhs`
    AtMost,
    /// `lambda . y >= rhs`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CutKind {
    /// Total coverage must reach `m`.
    Feasibility,
    /// `y_i <= 1`.
    UpperBound(usize),
    /// `y_i >= 0`.
    LowerBound(usize),
    /// Weighted coverage of the representatives of a partition whose best
    /// one-per-part value stayed below `m`.
    Valuation {
        alpha: f64,
        reps: Vec<usize>,
        children: Vec<usize>,
    },
}

/// A linear inequality over coverage vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub kind: CutKind,
    pub lambda: Vec<f64>,
    pub rhs: f64,
    pub sense: CutSense,
}

impl Cut {
    pub fn feasibility(n: usize, m: usize) -> Self {
        Self {
            kind: CutKind::Feasibility,
            lambda: vec![1.0; n],
            rhs: m as f64,
            sense: CutSense::AtLeast,
        }
    }

    pub fn upper_bound(n: usize, i: usize) -> Self {
        Self {
            kind: CutKind::UpperBound(i),
            lambda: unit(n, i),
            rhs: 1.0,
            sense: CutSense::AtMost,
        }
    }

    pub fn lower_bound(n: usize, i: usize) -> Self {
        Self {
            kind: CutKind::LowerBound(i),
            lambda: unit(n, i),
            rhs: 0.0,
            sense: CutSense::AtLeast,
        }
    }

    pub fn dot(&self, y: &[f64]) -> f64 {
        self.lambda.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// How far `y` is on the wrong side; positive means violated.
    pub fn violation(&self, y: &[f64]) -> f64 {
        match self.sense {
            CutSense::AtMost => self.dot(y) - self.rhs,
            CutSense::AtLeast => self.rhs - self.dot(y),
        }
    }

    /// Outward normal: the kept side is `{ y : g . y <= g . x }`.
    pub fn normal(&self) -> Vec<f64> {
        match self.sense {
            CutSense::AtMost => self.lambda.clone(),
            CutSense::AtLeast => self.lambda.iter().map(|v| -v).collect(),
        }
    }

    /// One log line: kind, sparse `index:coefficient` pairs, violation at `y`.
    pub fn log_line(&self, y: &[f64]) -> String {
        let kind = match &self.kind {
            CutKind::Feasibility => "feasibility".to_string(),
            CutKind::UpperBound(i) => format!("upper-bound {i}"),
            CutKind::LowerBound(i) => format!("lower-bound {i}"),
            CutKind::Valuation { .. } => "valuation".to_string(),
        };
        let pairs: Vec<String> = self
            .lambda
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| format!("{i}:{v}"))
            .collect();
        format!("{kind} [{}] {}", pairs.join(" "), self.violation(y))
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Customers covered at radius `r` by each center set of the family,
/// deduplicated. Built once per instance and radius, then used to check any
/// number of cuts.
#[derive(Debug, Clone)]
pub struct CoverageFamily {
    covered: Vec<Vec<bool>>,
}

impl CoverageFamily {
    pub fn build(inst: &RobustInstance, r: f64) -> Result<Self, RoundCutError> {
        let nf = inst.num_facilities();
        if nf > VERIFY_FACILITY_CAP {
            return Err(RoundCutError::FamilyTooLarge {
                facilities: nf,
                cap: VERIFY_FACILITY_CAP,
            });
        }
        let bound = with_tolerance(r);
        let reach: Vec<Vec<bool>> = (0..nf)
            .map(|f| {
                (0..inst.num_customers())
                    .map(|c| inst.space.facility_customer(f, c) <= bound)
                    .collect()
            })
            .collect();
        let mut covered = BTreeSet::new();
        let mut current = Vec::new();
        let mut mask = vec![false; inst.num_customers()];
        collect(inst, &reach, 0, &mut current, &mut mask, &mut covered);
        Ok(Self {
            covered: covered.into_iter().collect(),
        })
    }

    /// Number of distinct coverage patterns.
    pub fn len(&self) -> usize {
        self.covered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covered.is_empty()
    }

    /// Whether every integral coverage vector of the family satisfies the
    /// cut. Lower-bound directions are implied by the polytope's definition.
    pub fn satisfies(&self, cut: &Cut) -> bool {
        match cut.sense {
            CutSense::AtLeast => true,
            CutSense::AtMost => self.covered.iter().all(|mask| {
                let total: f64 = mask
                    .iter()
                    .zip(&cut.lambda)
                    .filter(|(c, _)| **c)
                    .map(|(_, l)| l)
                    .sum();
                total <= cut.rhs + 1e-9 * cut.rhs.abs().max(1.0)
            }),
        }
    }

    /// The largest number of customers any member covers.
    pub fn max_covered(&self) -> usize {
        self.covered
            .iter()
            .map(|m| m.iter().filter(|c| **c).count())
            .max()
            .unwrap_or(0)
    }
}

fn collect(
    inst: &RobustInstance,
    reach: &[Vec<bool>],
    next: usize,
    current: &mut Vec<usize>,
    mask: &mut Vec<bool>,
    out: &mut BTreeSet<Vec<bool>>,
) {
    out.insert(mask.clone());
    for f in next..reach.len() {
        current.push(f);
        if inst.membership(current) {
            let saved = mask.clone();
            for (m, &r) in mask.iter_mut().zip(&reach[f]) {
                *m |= r;
            }
            collect(inst, reach, f + 1, current, mask, out);
            *mask = saved;
        }
        current.pop();
    }
}

/// Whether the cut holds for the coverage vector of every member of the
/// family at radius `r`.
pub fn verify_cut(inst: &RobustInstance, cut: &Cut, r: f64) -> Result<bool, RoundCutError> {
    Ok(CoverageFamily::build(inst, r)?.satisfies(cut))
}
