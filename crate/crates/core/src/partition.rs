//! Greedy partitioning of customers by coverage, producing a
//! partition-constrained maximization instance over facilities.

use thiserror::Error;

use crate::instance::{RobustInstance, METRIC_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PcmError {
    #[error("facilities {first} and {second} lie in the same part")]
    TwoInOnePart { first: usize, second: usize },
    #[error("facility {0} is out of range")]
    UnknownFacility(usize),
    #[error("facility {0} is listed twice")]
    Repeated(usize),
    #[error("{parts} nonempty parts exceed the brute-force cap of {cap}")]
    TooManyParts { parts: usize, cap: usize },
    #[error("dynamic-programming state space of {size} entries exceeds the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },
    #[error("knapsack budget {budget} exceeds the cap of {cap} for the exact-weight search")]
    BudgetTooLarge { budget: u64, cap: u64 },
    #[error("solver does not support the {0} family")]
    Unsupported(&'static str),
    #[error("{0} weight dimensions exceed the supported maximum of 3")]
    TooManyDimensions(usize),
    #[error(transparent)]
    Matroid(#[from] crate::matroid::MatroidError),
}

/// Fractional coverage per customer, clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageAssignment(Vec<f64>);

impl CoverageAssignment {
    /// Non-finite entries become `0`; everything else is clamped.
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        Self(
            values
                .into_iter()
                .map(|v| {
                    if v.is_finite() {
                        v.clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect(),
        )
    }

    pub fn uniform(customers: usize, value: f64) -> Self {
        Self::new(std::iter::repeat_n(value, customers))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// One representative customer and the facility ball around it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub rep: usize,
    /// Facilities within `r` of `rep`, ascending. May be empty.
    pub facilities: Vec<usize>,
    /// Uncovered customers within `2r` of `rep` at the time it was chosen,
    /// ascending; always contains `rep`.
    pub children: Vec<usize>,
}

impl Part {
    /// Value of every facility in this part.
    pub fn value(&self) -> usize {
        self.children.len()
    }
}

/// The sub-partition of facilities with per-part values.
#[derive(Debug, Clone, PartialEq)]
pub struct PcmInstance {
    parts: Vec<Part>,
    part_of: Vec<Option<usize>>,
    radius: f64,
}

impl PcmInstance {
    /// Builds an instance directly from parts, for callers that already hold
    /// a sub-partition. Facility sets must be disjoint subsets of
    /// `0..num_facilities`.
    pub fn from_parts(
        num_facilities: usize,
        parts: Vec<Part>,
        radius: f64,
    ) -> Result<Self, PcmError> {
        let mut part_of = vec![None; num_facilities];
        for (i, part) in parts.iter().enumerate() {
            for &f in &part.facilities {
                let slot = part_of.get_mut(f).ok_or(PcmError::UnknownFacility(f))?;
                if let Some(j) = slot.replace(i) {
                    let other = parts[j].facilities[0];
                    return Err(PcmError::TwoInOnePart {
                        first: other,
                        second: f,
                    });
                }
            }
        }
        Ok(Self {
            parts,
            part_of,
            radius,
        })
    }

    /// Parts in the order representatives were chosen.
    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    /// Parts with at least one facility; the only ones a solution can use.
    pub fn nonempty_parts(&self) -> impl Iterator<Item = &Part> {
        self.parts.iter().filter(|p| !p.facilities.is_empty())
    }

    pub fn num_facilities(&self) -> usize {
        self.part_of.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn part_of(&self, facility: usize) -> Option<usize> {
        self.part_of.get(facility).copied().flatten()
    }

    /// Value of a facility: its part's value, or `0` outside every part.
    pub fn facility_value(&self, facility: usize) -> usize {
        self.part_of(facility).map_or(0, |p| self.parts[p].value())
    }

    /// Sum of all part values, an upper bound on any solution's value.
    pub fn total_value(&self) -> usize {
        self.nonempty_parts().map(Part::value).sum()
    }

    /// Checks that the set takes at most one facility per part.
    pub fn check_feasible(&self, set: &[usize]) -> Result<(), PcmError> {
        let mut taken: Vec<Option<usize>> = vec![None; self.parts.len()];
        let mut seen = vec![false; self.num_facilities()];
        for &f in set {
            let flag = seen.get_mut(f).ok_or(PcmError::UnknownFacility(f))?;
            if std::mem::replace(flag, true) {
                return Err(PcmError::Repeated(f));
            }
            if let Some(p) = self.part_of[f] {
                if let Some(first) = taken[p].replace(f) {
                    return Err(PcmError::TwoInOnePart { first, second: f });
                }
            }
        }
        Ok(())
    }

    /// Total value of a feasible set.
    pub fn value(&self, set: &[usize]) -> Result<usize, PcmError> {
        self.check_feasible(set)?;
        Ok(set.iter().map(|&f| self.facility_value(f)).sum())
    }

    /// Representatives whose facility ball meets the set.
    pub fn reached_reps(&self, set: &[usize]) -> Vec<usize> {
        let mut reps: Vec<usize> = set
            .iter()
            .filter_map(|&f| self.part_of(f))
            .map(|p| self.parts[p].rep)
            .collect();
        reps.sort_unstable();
        reps.dedup();
        reps
    }
}

/// Runs the greedy partitioning at radius `r`.
///
/// Repeatedly picks the uncovered customer of largest coverage (ties to the
/// smaller index), records the facilities within `r` of it as a part and
/// removes the uncovered customers within `2r` as its children.
pub fn build_pcm(inst: &RobustInstance, cov: &CoverageAssignment, r: f64) -> PcmInstance {
    let space = &inst.space;
    let nc = space.num_customers();
    let nf = space.num_facilities();
    let cov = cov.values();
    let mut order: Vec<usize> = (0..nc).collect();
    order.sort_by(|&a, &b| cov[b].total_cmp(&cov[a]).then(a.cmp(&b)));

    let child_radius = 2.0 * r;
    let mut uncovered = vec![true; nc];
    let mut parts = Vec::new();
    let mut part_of = vec![None; nf];
    for &rep in &order {
        if !uncovered[rep] {
            continue;
        }
        // In a metric, balls of representatives are disjoint; the `part_of`
        // check keeps the sub-partition well formed on non-metric input.
        let facilities: Vec<usize> = (0..nf)
            .filter(|&f| part_of[f].is_none() && space.facility_customer(f, rep) <= r)
            .collect();
        let children: Vec<usize> = (0..nc)
            .filter(|&u| uncovered[u] && space.customer_customer(rep, u) <= child_radius)
            .collect();
        for &u in &children {
            uncovered[u] = false;
        }
        for &f in &facilities {
            part_of[f] = Some(parts.len());
        }
        parts.push(Part {
            rep,
            facilities,
            children,
        });
    }
    PcmInstance {
        parts,
        part_of,
        radius: r,
    }
}

/// `bound` plus the slack used for every derived-radius comparison.
pub fn with_tolerance(bound: f64) -> f64 {
    bound + METRIC_TOLERANCE * bound.max(1.0)
}

/// Customers within `3r` of the set. Every child of a representative whose
/// ball meets the set is among them.
pub fn expand_solution(
    inst: &RobustInstance,
    pcm: &PcmInstance,
    set: &[usize],
    r: f64,
) -> Result<Vec<usize>, PcmError> {
    pcm.check_feasible(set)?;
    let bound = with_tolerance(3.0 * r);
    Ok((0..inst.num_customers())
        .filter(|&c| inst.space.customer_to_set(c, set) <= bound)
        .collect())
}
