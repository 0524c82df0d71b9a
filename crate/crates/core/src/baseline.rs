//! Exhaustive optima for small instances, and the reduction from
//! partition-constrained maximization to robust supplier.

use thiserror::Error;

use crate::instance::{
    candidate_radii, ConstraintSpec, InstanceError, MetricSpace, RobustInstance, INFINITE_DISTANCE,
};
use crate::partition::{Part, PcmError, PcmInstance};

/// Largest facility count [`brute_optimum`] enumerates.
pub const BRUTE_FACILITY_CAP: usize = 16;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("m = {m} outside [1, {customers}]")]
    DemandOutOfRange { m: usize, customers: usize },
    #[error("{facilities} facilities exceed the brute-force cap of {cap}")]
    TooManyFacilities { facilities: usize, cap: usize },
    #[error("no admissible set covers {m} customers")]
    Infeasible { m: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Pcm(#[from] PcmError),
}

/// The `m`-th smallest customer distance to `set`: the radius at which the
/// set serves `m` customers. Infinite for the empty set.
pub fn mth_closest_distance(
    inst: &RobustInstance,
    set: &[usize],
    m: usize,
) -> Result<f64, BaselineError> {
    let n = inst.num_customers();
    if m == 0 || m > n {
        return Err(BaselineError::DemandOutOfRange { m, customers: n });
    }
    let mut d: Vec<f64> = (0..n).map(|c| inst.space.customer_to_set(c, set)).collect();
    d.sort_by(f64::total_cmp);
    Ok(d[m - 1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub radius: f64,
    pub facilities: Vec<usize>,
    /// Every candidate radius with whether some admissible set achieves it.
    pub feasibility: Vec<(f64, bool)>,
}

/// Minimizes [`mth_closest_distance`] over every admissible set.
pub fn brute_optimum(inst: &RobustInstance) -> Result<ExactResult, BaselineError> {
    let nf = inst.num_facilities();
    if nf > BRUTE_FACILITY_CAP {
        return Err(BaselineError::TooManyFacilities {
            facilities: nf,
            cap: BRUTE_FACILITY_CAP,
        });
    }
    let (radius, facilities) = if inst.m == 0 {
        (0.0, Vec::new())
    } else {
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut current = Vec::new();
        search(inst, 0, &mut current, &mut best)?;
        match best {
            Some(b) if b.0 < INFINITE_DISTANCE => b,
            _ => return Err(BaselineError::Infeasible { m: inst.m }),
        }
    };
    let feasibility = candidate_radii(inst)
        .into_iter()
        .map(|r| (r, r >= radius))
        .collect();
    Ok(ExactResult {
        radius,
        facilities,
        feasibility,
    })
}

fn search(
    inst: &RobustInstance,
    next: usize,
    current: &mut Vec<usize>,
    best: &mut Option<(f64, Vec<usize>)>,
) -> Result<(), BaselineError> {
    let value = mth_closest_distance(inst, current, inst.m)?;
    if best.as_ref().is_none_or(|b| value < b.0) {
        *best = Some((value, current.clone()));
    }
    for f in next..inst.num_facilities() {
        current.push(f);
        if inst.membership(current) {
            search(inst, f + 1, current, best)?;
        }
        current.pop();
    }
    Ok(())
}

/// A partition-constrained maximization instance given directly: disjoint
/// facility parts with a value each, and the family of allowed sets.
#[derive(Debug, Clone, PartialEq)]
pub struct PcmDescription {
    pub num_facilities: usize,
    pub parts: Vec<Vec<usize>>,
    pub values: Vec<usize>,
    pub constraint: ConstraintSpec,
}

impl PcmDescription {
    /// Parts extended by a zero-value singleton for every facility outside
    /// all parts, so that they partition the facilities.
    pub fn full_partition(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut parts = self.parts.clone();
        let mut values = self.values.clone();
        let mut used = vec![false; self.num_facilities];
        for &f in self.parts.iter().flatten() {
            used[f] = true;
        }
        for f in (0..self.num_facilities).filter(|&f| !used[f]) {
            parts.push(vec![f]);
            values.push(0);
        }
        (parts, values)
    }

    /// The same instance as a [`PcmInstance`]; part `i` gets `values[i]`
    /// placeholder children.
    pub fn to_pcm(&self) -> Result<PcmInstance, PcmError> {
        let mut next = 0;
        let parts = self
            .parts
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (facilities, &value))| {
                let children = (next..next + value).collect();
                next += value;
                Part {
                    rep: i,
                    facilities: facilities.clone(),
                    children,
                }
            })
            .collect();
        PcmInstance::from_parts(self.num_facilities, parts, 1.0)
    }

    /// Keeps the first chosen facility of every part; by down-closedness the
    /// result stays in the family.
    pub fn dedup(&self, set: &[usize]) -> Vec<usize> {
        let (parts, _) = self.full_partition();
        let mut taken = vec![false; parts.len()];
        let mut part_of = vec![0; self.num_facilities];
        for (i, p) in parts.iter().enumerate() {
            for &f in p {
                part_of[f] = i;
            }
        }
        let mut kept: Vec<usize> = Vec::new();
        for &f in set {
            if !std::mem::replace(&mut taken[part_of[f]], true) {
                kept.push(f);
            }
        }
        kept.sort_unstable();
        kept
    }

    pub fn value(&self, set: &[usize]) -> usize {
        let (parts, values) = self.full_partition();
        parts
            .iter()
            .zip(&values)
            .filter(|(p, _)| p.iter().any(|f| set.contains(f)))
            .map(|(_, v)| v)
            .sum()
    }
}

/// Supplier instance of the reduction: every part `A` brings `values[A]`
/// customers at distance 1 from each facility of `A`, at distance 0 from one
/// another and at the sentinel distance from everything else. A set serving
/// `m` customers within radius 1 has value at least `m` after deduplication.
pub fn reduce_pcm_to_supplier(
    desc: &PcmDescription,
    m: usize,
) -> Result<RobustInstance, BaselineError> {
    let (parts, values) = desc.full_partition();
    let nf = desc.num_facilities;
    let mut facility_part = vec![0; nf];
    for (i, p) in parts.iter().enumerate() {
        for &f in p {
            facility_part[f] = i;
        }
    }
    let customer_part: Vec<usize> = values
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| std::iter::repeat_n(i, v))
        .collect();
    let nc = customer_part.len();
    let n = nf + nc;
    let part_of_point = |p: usize| {
        if p < nf {
            facility_part[p]
        } else {
            customer_part[p - nf]
        }
    };
    let mut dist = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            dist[a * n + b] = if a == b {
                0.0
            } else if part_of_point(a) != part_of_point(b) {
                INFINITE_DISTANCE
            } else if a >= nf && b >= nf {
                0.0
            } else {
                1.0
            };
        }
    }
    let space = MetricSpace::new(
        (0..nf).map(|f| format!("f{f}")).collect(),
        (0..nc).map(|c| format!("c{c}")).collect(),
        dist,
    )?;
    Ok(RobustInstance::new(space, m, desc.constraint.clone())?)
}

/// The optimum of a partition-constrained instance recovered through the
/// reduction: the largest `m` for which the supplier instance has radius at
/// most 1, with the deduplicated witness.
pub fn pcm_optimum_via_reduction(
    desc: &PcmDescription,
) -> Result<(usize, Vec<usize>), BaselineError> {
    let total: usize = desc.values.iter().sum();
    let mut best = (0, Vec::new());
    for m in 1..=total {
        let inst = reduce_pcm_to_supplier(desc, m)?;
        match brute_optimum(&inst) {
            Ok(r) if r.radius <= 1.0 => best = (m, desc.dedup(&r.facilities)),
            Ok(_) | Err(BaselineError::Infeasible { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}
