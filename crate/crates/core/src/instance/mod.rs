//! Problem instances: metric, coverage demand and center constraints.

mod format;

use std::collections::HashSet;

use thiserror::Error;

use crate::matroid::{Matroid, MatroidOracle};

pub use format::{load_instance, InstanceFile, LoadedInstance, MetricSource, ParseError};

/// Distances at or above this value stand for "unreachable". They are never
/// radius guesses.
pub const INFINITE_DISTANCE: f64 = 1e18;

/// Absolute slack for metric checks and for comparing derived radii.
pub const METRIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("duplicate point id `{0}`")]
    DuplicateId(String),
    #[error("distance matrix has {got} entries, expected {expected}")]
    MatrixShape { expected: usize, got: usize },
    #[error("d({a},{a}) = {value}, expected 0")]
    NonzeroDiagonal { a: String, value: f64 },
    #[error("d({a},{b}) = {value} is negative or not a number")]
    InvalidDistance { a: String, b: String, value: f64 },
    #[error("asymmetric distance: d({a},{b}) = {ab} but d({b},{a}) = {ba}")]
    Asymmetric {
        a: String,
        b: String,
        ab: f64,
        ba: f64,
    },
    #[error("triangle inequality violated: d({a},{c}) = {ac} > d({a},{b}) + d({b},{c}) = {via}")]
    TriangleViolation {
        a: String,
        b: String,
        c: String,
        ac: f64,
        via: f64,
    },
    #[error("coverage demand m = {m} outside [0, {customers}]")]
    DemandOutOfRange { m: usize, customers: usize },
    #[error("constraint does not match {facilities} facilities: {reason}")]
    ConstraintShape { facilities: usize, reason: String },
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
}

/// A finite metric over facilities followed by customers.
///
/// Point `i < facilities` is facility `i`; point `facilities + j` is customer `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    facility_ids: Vec<String>,
    customer_ids: Vec<String>,
    dist: Vec<f64>,
}

impl MetricSpace {
    /// Checks ids, shape, diagonal, sign and symmetry. The triangle
    /// inequality is checked separately by [`MetricSpace::triangle_violation`].
    pub fn new(
        facility_ids: Vec<String>,
        customer_ids: Vec<String>,
        dist: Vec<f64>,
    ) -> Result<Self, InstanceError> {
        let mut seen = HashSet::new();
        for id in facility_ids.iter().chain(&customer_ids) {
            if !seen.insert(id.as_str()) {
                return Err(InstanceError::DuplicateId(id.clone()));
            }
        }
        let n = facility_ids.len() + customer_ids.len();
        if dist.len() != n * n {
            return Err(InstanceError::MatrixShape {
                expected: n * n,
                got: dist.len(),
            });
        }
        let space = Self {
            facility_ids,
            customer_ids,
            dist,
        };
        for a in 0..n {
            let value = space.point_distance(a, a);
            if value != 0.0 {
                return Err(InstanceError::NonzeroDiagonal {
                    a: space.point_id(a).into(),
                    value,
                });
            }
            for b in 0..n {
                let ab = space.point_distance(a, b);
                if !(ab >= 0.0) || ab.is_infinite() {
                    return Err(InstanceError::InvalidDistance {
                        a: space.point_id(a).into(),
                        b: space.point_id(b).into(),
                        value: ab,
                    });
                }
                let ba = space.point_distance(b, a);
                if ab != ba {
                    return Err(InstanceError::Asymmetric {
                        a: space.point_id(a).into(),
                        b: space.point_id(b).into(),
                        ab,
                        ba,
                    });
                }
            }
        }
        Ok(space)
    }

    /// Euclidean distances between coordinate vectors of equal length.
    pub fn euclidean(
        facilities: Vec<(String, Vec<f64>)>,
        customers: Vec<(String, Vec<f64>)>,
    ) -> Result<Self, InstanceError> {
        let points: Vec<&Vec<f64>> = facilities
            .iter()
            .chain(&customers)
            .map(|(_, p)| p)
            .collect();
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for a in 0..n {
            for b in a + 1..n {
                let d = points[a]
                    .iter()
                    .zip(points[b])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                dist[a * n + b] = d;
                dist[b * n + a] = d;
            }
        }
        let facility_ids = facilities.into_iter().map(|(id, _)| id).collect();
        let customer_ids = customers.into_iter().map(|(id, _)| id).collect();
        Self::new(facility_ids, customer_ids, dist)
    }

    pub fn num_facilities(&self) -> usize {
        self.facility_ids.len()
    }

    pub fn num_customers(&self) -> usize {
        self.customer_ids.len()
    }

    pub fn num_points(&self) -> usize {
        self.facility_ids.len() + self.customer_ids.len()
    }

    pub fn facility_ids(&self) -> &[String] {
        &self.facility_ids
    }

    pub fn customer_ids(&self) -> &[String] {
        &self.customer_ids
    }

    pub fn point_id(&self, point: usize) -> &str {
        let nf = self.facility_ids.len();
        if point < nf {
            &self.facility_ids[point]
        } else {
            &self.customer_ids[point - nf]
        }
    }

    pub fn point_distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.num_points() + b]
    }

    pub fn facility_customer(&self, facility: usize, customer: usize) -> f64 {
        self.point_distance(facility, self.facility_ids.len() + customer)
    }

    pub fn customer_customer(&self, a: usize, b: usize) -> f64 {
        let nf = self.facility_ids.len();
        self.point_distance(nf + a, nf + b)
    }

    pub fn facility_facility(&self, a: usize, b: usize) -> f64 {
        self.point_distance(a, b)
    }

    /// `d(customer, set)`, or `f64::INFINITY` for the empty set.
    pub fn customer_to_set(&self, customer: usize, facilities: &[usize]) -> f64 {
        facilities
            .iter()
            .map(|&f| self.facility_customer(f, customer))
            .fold(f64::INFINITY, f64::min)
    }

    /// The first triple with `d(a,c) > d(a,b) + d(b,c)` beyond the tolerance.
    pub fn triangle_violation(&self) -> Option<InstanceError> {
        let n = self.num_points();
        for a in 0..n {
            for c in a + 1..n {
                let ac = self.point_distance(a, c);
                for b in 0..n {
                    let via = self.point_distance(a, b) + self.point_distance(b, c);
                    if ac > via + METRIC_TOLERANCE * via.max(1.0) {
                        return Some(InstanceError::TriangleViolation {
                            a: self.point_id(a).into(),
                            b: self.point_id(b).into(),
                            c: self.point_id(c).into(),
                            ac,
                            via,
                        });
                    }
                }
            }
        }
        None
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            facility_ids: self.facility_ids.clone(),
            customer_ids: self.customer_ids.clone(),
            dist: self
                .dist
                .iter()
                .map(|&d| {
                    if d >= INFINITE_DISTANCE {
                        d
                    } else {
                        d / factor
                    }
                })
                .collect(),
        }
    }
}

/// The down-closed family of allowed center sets.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSpec {
    /// `w(S) <= budget`.
    Knapsack {
        weights: Vec<u64>,
        budget: u64,
    },
    /// `w_i(S) <= budgets[i]` for every dimension; `weights[i][f]`.
    MultiKnapsack {
        weights: Vec<Vec<u64>>,
        budgets: Vec<u64>,
    },
    Matroid(MatroidOracle),
    KnapsackAndMatroid {
        weights: Vec<u64>,
        budget: u64,
        matroid: MatroidOracle,
    },
}

impl ConstraintSpec {
    /// Membership of a facility set (distinct, in-range indices) in the family.
    pub fn membership(&self, set: &[usize]) -> bool {
        match self {
            ConstraintSpec::Knapsack { weights, budget } => within_budget(weights, *budget, set),
            ConstraintSpec::MultiKnapsack { weights, budgets } => weights
                .iter()
                .zip(budgets)
                .all(|(w, &k)| within_budget(w, k, set)),
            ConstraintSpec::Matroid(m) => m.is_independent(set),
            ConstraintSpec::KnapsackAndMatroid {
                weights,
                budget,
                matroid,
            } => within_budget(weights, *budget, set) && matroid.is_independent(set),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ConstraintSpec::Knapsack { .. } => "knapsack",
            ConstraintSpec::MultiKnapsack { .. } => "multiknapsack",
            ConstraintSpec::Matroid(_) => "matroid",
            ConstraintSpec::KnapsackAndMatroid { .. } => "knapsack-matroid",
        }
    }

    /// Knapsack weight vectors with their budgets, empty for pure matroids.
    pub fn knapsacks(&self) -> Vec<(&[u64], u64)> {
        match self {
            ConstraintSpec::Knapsack { weights, budget } => vec![(weights.as_slice(), *budget)],
            ConstraintSpec::MultiKnapsack { weights, budgets } => weights
                .iter()
                .map(Vec::as_slice)
                .zip(budgets.iter().copied())
                .collect(),
            ConstraintSpec::Matroid(_) => Vec::new(),
            ConstraintSpec::KnapsackAndMatroid {
                weights, budget, ..
            } => vec![(weights.as_slice(), *budget)],
        }
    }

    pub fn matroid(&self) -> Option<&MatroidOracle> {
        match self {
            ConstraintSpec::Matroid(m) | ConstraintSpec::KnapsackAndMatroid { matroid: m, .. } => {
                Some(m)
            }
            _ => None,
        }
    }

    /// The same family with every knapsack budget multiplied by `factor`
    /// (rounded down); matroids are unchanged.
    pub fn with_scaled_budgets(&self, factor: f64) -> Self {
        let scale = |k: u64| (k as f64 * factor).floor() as u64;
        match self {
            ConstraintSpec::Knapsack { weights, budget } => ConstraintSpec::Knapsack {
                weights: weights.clone(),
                budget: scale(*budget),
            },
            ConstraintSpec::MultiKnapsack { weights, budgets } => ConstraintSpec::MultiKnapsack {
                weights: weights.clone(),
                budgets: budgets.iter().map(|&k| scale(k)).collect(),
            },
            ConstraintSpec::Matroid(m) => ConstraintSpec::Matroid(m.clone()),
            ConstraintSpec::KnapsackAndMatroid {
                weights,
                budget,
                matroid,
            } => ConstraintSpec::KnapsackAndMatroid {
                weights: weights.clone(),
                budget: scale(*budget),
                matroid: matroid.clone(),
            },
        }
    }

    fn check_shape(&self, facilities: usize) -> Result<(), InstanceError> {
        let fail = |reason: String| Err(InstanceError::ConstraintShape { facilities, reason });
        for (i, (weights, _)) in self.knapsacks().iter().enumerate() {
            if weights.len() != facilities {
                return fail(format!("weight vector {i} has {} entries", weights.len()));
            }
        }
        if let ConstraintSpec::MultiKnapsack { weights, budgets } = self {
            if weights.is_empty() || weights.len() != budgets.len() {
                return fail(format!(
                    "{} weight vectors for {} budgets",
                    weights.len(),
                    budgets.len()
                ));
            }
        }
        if let Some(m) = self.matroid() {
            if m.ground_size() != facilities {
                return fail(format!(
                    "matroid ground set has {} elements",
                    m.ground_size()
                ));
            }
        }
        Ok(())
    }
}

fn within_budget(weights: &[u64], budget: u64, set: &[usize]) -> bool {
    let mut total: u64 = 0;
    for &f in set {
        total = match total.checked_add(weights[f]) {
            Some(t) => t,
            None => return false,
        };
    }
    total <= budget
}

/// A validated robust supplier instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustInstance {
    pub space: MetricSpace,
    pub m: usize,
    pub constraint: ConstraintSpec,
}

impl RobustInstance {
    pub fn new(
        space: MetricSpace,
        m: usize,
        constraint: ConstraintSpec,
    ) -> Result<Self, InstanceError> {
        if m > space.num_customers() {
            return Err(InstanceError::DemandOutOfRange {
                m,
                customers: space.num_customers(),
            });
        }
        constraint.check_shape(space.num_facilities())?;
        Ok(Self {
            space,
            m,
            constraint,
        })
    }

    pub fn num_facilities(&self) -> usize {
        self.space.num_facilities()
    }

    pub fn num_customers(&self) -> usize {
        self.space.num_customers()
    }

    pub fn membership(&self, set: &[usize]) -> bool {
        self.constraint.membership(set)
    }

    /// The same instance with a different coverage demand.
    pub fn with_demand(&self, m: usize) -> Result<Self, InstanceError> {
        Self::new(self.space.clone(), m, self.constraint.clone())
    }
}

/// Radius guesses: `0` and every distinct finite facility-customer distance,
/// ascending.
pub fn candidate_radii(inst: &RobustInstance) -> Vec<f64> {
    let space = &inst.space;
    let mut radii = vec![0.0];
    for f in 0..space.num_facilities() {
        for c in 0..space.num_customers() {
            let d = space.facility_customer(f, c);
            if d < INFINITE_DISTANCE {
                radii.push(d);
            }
        }
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
}

/// Divides every finite distance by `r`, so that a guess of `r` becomes `1`.
pub fn scale_to_unit(inst: &RobustInstance, r: f64) -> Result<RobustInstance, InstanceError> {
    if !(r > 0.0) {
        return Err(InstanceError::NonPositiveScale(r));
    }
    Ok(RobustInstance {
        space: inst.space.scaled(r),
        m: inst.m,
        constraint: inst.constraint.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{MatroidKind, PartitionMatroid};

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn two_by_two() -> RobustInstance {
        // f1 f2 c1 c2
        #[rustfmt::skip]
        let dist = vec![
            0.0, 1.0, 0.5, 1.0,
            1.0, 0.0, 1.0, 0.5,
            0.5, 1.0, 0.0, 1.0,
            1.0, 0.5, 1.0, 0.0,
        ];
        let space = MetricSpace::new(ids("f", 2), ids("c", 2), dist).unwrap();
        RobustInstance::new(
            space,
            1,
            ConstraintSpec::Knapsack {
                weights: vec![1, 1],
                budget: 1,
            },
        )
        .unwrap()
    }

    #[test]
    fn cardinality_knapsack_membership() {
        let spec = ConstraintSpec::Knapsack {
            weights: vec![1; 3],
            budget: 2,
        };
        assert!(spec.membership(&[0, 2]));
        assert!(!spec.membership(&[0, 1, 2]));
    }

    #[test]
    fn uniform_rank_one_membership() {
        let spec = ConstraintSpec::Matroid(MatroidOracle::uniform(2, 1));
        assert!(!spec.membership(&[0, 1]));
    }

    #[test]
    fn knapsack_and_partition_membership() {
        let p = PartitionMatroid::new(2, &[vec![0, 1]], vec![1]).unwrap();
        let spec = ConstraintSpec::KnapsackAndMatroid {
            weights: vec![3, 1],
            budget: 3,
            matroid: MatroidOracle::new(MatroidKind::Partition(p)),
        };
        assert!(spec.membership(&[0]));
        assert!(!spec.membership(&[0, 1]));
    }

    #[test]
    fn multiknapsack_checks_every_dimension() {
        let spec = ConstraintSpec::MultiKnapsack {
            weights: vec![vec![1, 5], vec![5, 1]],
            budgets: vec![5, 5],
        };
        assert!(spec.membership(&[0]));
        assert!(!spec.membership(&[0, 1]));
    }

    #[test]
    fn candidate_radii_dedup_and_zero() {
        let inst = two_by_two();
        assert_eq!(candidate_radii(&inst), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn candidate_radii_single_pair() {
        let space = MetricSpace::new(ids("f", 1), ids("c", 1), vec![0.0, 2.0, 2.0, 0.0]).unwrap();
        let inst =
            RobustInstance::new(space, 1, ConstraintSpec::Matroid(MatroidOracle::free(1))).unwrap();
        assert_eq!(candidate_radii(&inst), vec![0.0, 2.0]);
    }

    #[test]
    fn candidate_radii_skip_infinite() {
        let dist = vec![0.0, INFINITE_DISTANCE, INFINITE_DISTANCE, 0.0];
        let space = MetricSpace::new(ids("f", 1), ids("c", 1), dist).unwrap();
        let inst =
            RobustInstance::new(space, 0, ConstraintSpec::Matroid(MatroidOracle::free(1))).unwrap();
        assert_eq!(candidate_radii(&inst), vec![0.0]);
    }

    #[test]
    fn scaling() {
        let space = MetricSpace::new(ids("f", 1), ids("c", 1), vec![0.0, 3.0, 3.0, 0.0]).unwrap();
        let inst =
            RobustInstance::new(space, 1, ConstraintSpec::Matroid(MatroidOracle::free(1))).unwrap();
        let unit = scale_to_unit(&inst, 3.0).unwrap();
        assert_eq!(unit.space.facility_customer(0, 0), 1.0);
        assert_eq!(scale_to_unit(&inst, 1.0).unwrap(), inst);
        assert!(matches!(
            scale_to_unit(&inst, 0.0),
            Err(InstanceError::NonPositiveScale(_))
        ));
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            MetricSpace::new(ids("f", 1), ids("c", 1), vec![0.0, 1.0, 2.0, 0.0]),
            Err(InstanceError::Asymmetric { .. })
        ));
        assert!(matches!(
            MetricSpace::new(ids("f", 1), ids("c", 1), vec![1.0, 1.0, 1.0, 0.0]),
            Err(InstanceError::NonzeroDiagonal { .. })
        ));
        assert!(matches!(
            MetricSpace::new(ids("f", 1), ids("c", 1), vec![0.0, -1.0, -1.0, 0.0]),
            Err(InstanceError::InvalidDistance { .. })
        ));
        assert!(matches!(
            MetricSpace::new(vec!["x".into()], vec!["x".into()], vec![0.0; 4]),
            Err(InstanceError::DuplicateId(_))
        ));
        let space = MetricSpace::new(ids("f", 1), ids("c", 1), vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            RobustInstance::new(
                space.clone(),
                2,
                ConstraintSpec::Matroid(MatroidOracle::free(1))
            ),
            Err(InstanceError::DemandOutOfRange { m: 2, customers: 1 })
        ));
        assert!(matches!(
            RobustInstance::new(
                space,
                1,
                ConstraintSpec::Knapsack {
                    weights: vec![1, 1],
                    budget: 1
                }
            ),
            Err(InstanceError::ConstraintShape { .. })
        ));
    }

    #[test]
    fn triangle_check() {
        // a=f1, b=c1, c=c2 with d(a,b)=1, d(b,c)=1, d(a,c)=5.
        #[rustfmt::skip]
        let dist = vec![
            0.0, 1.0, 5.0,
            1.0, 0.0, 1.0,
            5.0, 1.0, 0.0,
        ];
        let space = MetricSpace::new(ids("f", 1), ids("c", 2), dist).unwrap();
        assert!(matches!(
            space.triangle_violation(),
            Some(InstanceError::TriangleViolation { .. })
        ));
        assert!(two_by_two().space.triangle_violation().is_none());
    }
}
