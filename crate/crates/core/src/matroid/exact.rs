use std::collections::BTreeMap;

use super::{Matroid, MatroidError};

/// Largest ground set the exhaustive exact-weight search accepts.
pub const EXACT_WEIGHT_CAP: usize = 20;

/// All weights attained by common independent sets of two matroids, each
/// with the first witness found in lexicographic search order.
///
/// Built once by depth-first enumeration (pruned by heredity), then queried
/// for any number of target weights.
#[derive(Debug, Clone)]
pub struct ExactWeightIndex {
    by_weight: BTreeMap<u128, Vec<usize>>,
}

impl ExactWeightIndex {
    pub fn build<A, B>(m1: &A, m2: &B, weights: &[u128]) -> Result<Self, MatroidError>
    where
        A: Matroid + ?Sized,
        B: Matroid + ?Sized,
    {
        let n = m1.ground_size();
        if n != m2.ground_size() {
            return Err(MatroidError::GroundSetMismatch {
                left: n,
                right: m2.ground_size(),
            });
        }
        if weights.len() != n {
            return Err(MatroidError::WeightLength {
                expected: n,
                got: weights.len(),
            });
        }
        if n > EXACT_WEIGHT_CAP {
            return Err(MatroidError::CapExceeded {
                size: n,
                cap: EXACT_WEIGHT_CAP,
            });
        }
        let mut by_weight = BTreeMap::new();
        let mut current = Vec::new();
        enumerate(m1, m2, weights, 0, 0, &mut current, &mut by_weight)?;
        Ok(Self { by_weight })
    }

    pub fn witness(&self, target: u128) -> Option<&[usize]> {
        self.by_weight.get(&target).map(Vec::as_slice)
    }

    pub fn weights(&self) -> impl Iterator<Item = u128> + '_ {
        self.by_weight.keys().copied()
    }
}

fn enumerate<A, B>(
    m1: &A,
    m2: &B,
    weights: &[u128],
    next: usize,
    weight: u128,
    current: &mut Vec<usize>,
    out: &mut BTreeMap<u128, Vec<usize>>,
) -> Result<(), MatroidError>
where
    A: Matroid + ?Sized,
    B: Matroid + ?Sized,
{
    out.entry(weight).or_insert_with(|| current.clone());
    for e in next..weights.len() {
        current.push(e);
        if m1.is_independent(current) && m2.is_independent(current) {
            let w = weight
                .checked_add(weights[e])
                .ok_or(MatroidError::Overflow)?;
            enumerate(m1, m2, weights, e + 1, w, current, out)?;
        }
        current.pop();
    }
    Ok(())
}

/// Some common independent set of total weight exactly `target`, by
/// exhaustive search over a ground set of at most [`EXACT_WEIGHT_CAP`]
/// elements.
pub fn exact_weight_common_base_bruteforce<A, B>(
    m1: &A,
    m2: &B,
    weights: &[u128],
    target: u128,
) -> Result<Option<Vec<usize>>, MatroidError>
where
    A: Matroid + ?Sized,
    B: Matroid + ?Sized,
{
    let index = ExactWeightIndex::build(m1, m2, weights)?;
    Ok(index.witness(target).map(<[usize]>::to_vec))
}
