//! Matroids given by independence oracles, and matroid intersection.
//!
//! Elements of every ground set are the indices `0..ground_size()`. For the
//! matroids attached to an instance, element `i` is facility `i`.

mod exact;
mod intersection;

use num::{BigRational, Zero};
use thiserror::Error;

pub use exact::{exact_weight_common_base_bruteforce, ExactWeightIndex, EXACT_WEIGHT_CAP};
pub use intersection::{max_common_independent_set, max_weight_common_independent_set};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatroidError {
    #[error("element {element} is outside the ground set of size {ground_size}")]
    OutsideGroundSet { element: usize, ground_size: usize },
    #[error("ground sets differ: {left} vs {right} elements")]
    GroundSetMismatch { left: usize, right: usize },
    #[error("negative weight {weight} on element {element}")]
    NegativeWeight { element: usize, weight: i128 },
    #[error("weight vector has {got} entries, ground set has {expected}")]
    WeightLength { expected: usize, got: usize },
    #[error("ground set of {size} elements exceeds the exhaustive-search cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("weight arithmetic overflowed")]
    Overflow,
}

/// An independence oracle over the ground set `0..ground_size()`.
///
/// Implementations must describe a matroid: the empty set is independent,
/// subsets of independent sets are independent, and the exchange property
/// holds. Callers guarantee that queried sets contain distinct in-range
/// elements.
pub trait Matroid {
    fn ground_size(&self) -> usize;

    fn is_independent(&self, set: &[usize]) -> bool;

    /// Rank of the whole ground set, computed greedily.
    fn rank(&self) -> usize {
        let mut basis = Vec::new();
        for e in 0..self.ground_size() {
            basis.push(e);
            if !self.is_independent(&basis) {
                basis.pop();
            }
        }
        basis.len()
    }
}

impl<M: Matroid + ?Sized> Matroid for &M {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn is_independent(&self, set: &[usize]) -> bool {
        (**self).is_independent(set)
    }
}

/// At most `rank` elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformMatroid {
    pub size: usize,
    pub rank: usize,
}

impl Matroid for UniformMatroid {
    fn ground_size(&self) -> usize {
        self.size
    }
    fn is_independent(&self, set: &[usize]) -> bool {
        set.len() <= self.rank
    }
}

/// Elements are grouped; a set is independent when it takes at most the
/// group's capacity from every group. Ungrouped elements are unconstrained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatroid {
    group_of: Vec<Option<usize>>,
    capacities: Vec<usize>,
}

impl PartitionMatroid {
    /// `groups` must be pairwise disjoint subsets of `0..size`.
    pub fn new(size: usize, groups: &[Vec<usize>], capacities: Vec<usize>) -> Result<Self, String> {
        if groups.len() != capacities.len() {
            return Err(format!(
                "{} groups but {} capacities",
                groups.len(),
                capacities.len()
            ));
        }
        let mut group_of = vec![None; size];
        for (g, members) in groups.iter().enumerate() {
            for &e in members {
                if e >= size {
                    return Err(format!("element {e} outside ground set of size {size}"));
                }
                if group_of[e].is_some() {
                    return Err(format!("element {e} appears in two groups"));
                }
                group_of[e] = Some(g);
            }
        }
        Ok(Self {
            group_of,
            capacities,
        })
    }

    /// The matroid taking at most one element from every part. Elements in
    /// no part get capacity zero.
    pub fn at_most_one_per_part(size: usize, parts: &[Vec<usize>]) -> Self {
        let mut group_of = vec![Some(parts.len()); size];
        for (g, part) in parts.iter().enumerate() {
            for &e in part {
                group_of[e] = Some(g);
            }
        }
        let mut capacities = vec![1; parts.len()];
        capacities.push(0);
        Self {
            group_of,
            capacities,
        }
    }

    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.capacities.len()];
        for (e, g) in self.group_of.iter().enumerate() {
            if let Some(g) = g {
                groups[*g].push(e);
            }
        }
        groups
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn group_of(&self, element: usize) -> Option<usize> {
        self.group_of[element]
    }
}

impl Matroid for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.group_of.len()
    }
    fn is_independent(&self, set: &[usize]) -> bool {
        let mut used = vec![0usize; self.capacities.len()];
        for &e in set {
            if let Some(g) = self.group_of[e] {
                used[g] += 1;
                if used[g] > self.capacities[g] {
                    return false;
                }
            }
        }
        true
    }
}

/// Element `i` is the edge `edges[i]`; independent sets are forests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphicMatroid {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Matroid for GraphicMatroid {
    fn ground_size(&self) -> usize {
        self.edges.len()
    }
    fn is_independent(&self, set: &[usize]) -> bool {
        let mut parent: Vec<usize> = (0..self.num_vertices).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &e in set {
            let (u, v) = self.edges[e];
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return false;
            }
            parent[ru] = rv;
        }
        true
    }
}

/// Element `i` is the column vector `columns[i]`, all of the same length.
/// Independence is linear independence over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMatroid {
    pub columns: Vec<Vec<BigRational>>,
}

impl LinearMatroid {
    fn column_rank(&self, set: &[usize]) -> usize {
        let mut rows: Vec<Vec<BigRational>> =
            set.iter().map(|&e| self.columns[e].clone()).collect();
        let width = rows.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in 0..width {
            let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, pivot);
            let head = rows[rank][col].clone();
            for r in rank + 1..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let factor = &rows[r][col] / &head;
                for c in col..width {
                    let delta = &factor * &rows[rank][c];
                    rows[r][c] -= delta;
                }
            }
            rank += 1;
        }
        rank
    }
}

impl Matroid for LinearMatroid {
    fn ground_size(&self) -> usize {
        self.columns.len()
    }
    fn is_independent(&self, set: &[usize]) -> bool {
        let dim = self.columns.first().map_or(0, Vec::len);
        set.len() <= dim && self.column_rank(set) == set.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatroidKind {
    Uniform(UniformMatroid),
    Partition(PartitionMatroid),
    Graphic(GraphicMatroid),
    Linear(LinearMatroid),
}

/// One of the concrete matroids, with the rank of its ground set cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidOracle {
    kind: MatroidKind,
    rank: usize,
}

impl MatroidOracle {
    pub fn new(kind: MatroidKind) -> Self {
        let rank = match &kind {
            MatroidKind::Uniform(m) => m.rank(),
            MatroidKind::Partition(m) => m.rank(),
            MatroidKind::Graphic(m) => m.rank(),
            MatroidKind::Linear(m) => m.rank(),
        };
        Self { kind, rank }
    }

    pub fn uniform(size: usize, rank: usize) -> Self {
        Self::new(MatroidKind::Uniform(UniformMatroid { size, rank }))
    }

    /// The free matroid: every subset is independent.
    pub fn free(size: usize) -> Self {
        Self::uniform(size, size)
    }

    pub fn kind(&self) -> &MatroidKind {
        &self.kind
    }

    pub fn ground_rank(&self) -> usize {
        self.rank
    }

    /// Independence query that rejects out-of-range elements.
    pub fn check_independent(&self, set: &[usize]) -> Result<bool, MatroidError> {
        let n = self.ground_size();
        if let Some(&element) = set.iter().find(|&&e| e >= n) {
            return Err(MatroidError::OutsideGroundSet {
                element,
                ground_size: n,
            });
        }
        Ok(self.is_independent(set))
    }

    fn inner(&self) -> &dyn Matroid {
        match &self.kind {
            MatroidKind::Uniform(m) => m,
            MatroidKind::Partition(m) => m,
            MatroidKind::Graphic(m) => m,
            MatroidKind::Linear(m) => m,
        }
    }
}

impl Matroid for MatroidOracle {
    fn ground_size(&self) -> usize {
        self.inner().ground_size()
    }
    fn is_independent(&self, set: &[usize]) -> bool {
        self.inner().is_independent(set)
    }
    fn rank(&self) -> usize {
        self.rank
    }
}

/// The restriction of a matroid to a subset of its ground set. Local element
/// `i` stands for `elements[i]` of the underlying matroid.
pub struct Restriction<'a, M: Matroid + ?Sized> {
    base: &'a M,
    elements: Vec<usize>,
}

impl<'a, M: Matroid + ?Sized> Restriction<'a, M> {
    pub fn new(base: &'a M, elements: Vec<usize>) -> Self {
        Self { base, elements }
    }

    pub fn to_base(&self, local: &[usize]) -> Vec<usize> {
        local.iter().map(|&i| self.elements[i]).collect()
    }
}

impl<M: Matroid + ?Sized> Matroid for Restriction<'_, M> {
    fn ground_size(&self) -> usize {
        self.elements.len()
    }
    fn is_independent(&self, set: &[usize]) -> bool {
        self.base.is_independent(&self.to_base(set))
    }
}
