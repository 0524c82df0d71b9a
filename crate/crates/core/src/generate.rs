//! Seeded random instances.

use std::fmt;
use std::str::FromStr;

use petgraph::algo::floyd_warshall;
use petgraph::graph::UnGraph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{ConstraintSpec, InstanceFile, MetricSource};
use crate::matroid::{GraphicMatroid, MatroidKind, MatroidOracle, PartitionMatroid};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error(
        "unknown family `{0}` (expected knapsack, multiknapsack, matroid or knapsack-matroid)"
    )]
    UnknownFamily(String),
    #[error("unknown metric `{0}` (expected euclidean or graph)")]
    UnknownMetric(String),
    #[error("need at least one facility and one customer, got {facilities} and {customers}")]
    Empty { facilities: usize, customers: usize },
    #[error("m = {m} exceeds {customers} customers")]
    DemandOutOfRange { m: usize, customers: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Knapsack,
    /// Two knapsack dimensions.
    MultiKnapsack,
    Matroid,
    KnapsackMatroid,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Knapsack,
        Family::MultiKnapsack,
        Family::Matroid,
        Family::KnapsackMatroid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Knapsack => "knapsack",
            Family::MultiKnapsack => "multiknapsack",
            Family::Matroid => "matroid",
            Family::KnapsackMatroid => "knapsack-matroid",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = GenerateError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| GenerateError::UnknownFamily(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// Uniform points in `[0, 10]^2`, coordinates with two decimals.
    Euclidean,
    /// Shortest paths in a random connected graph with integer edge lengths.
    Graph,
}

impl FromStr for MetricKind {
    type Err = GenerateError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(MetricKind::Euclidean),
            "graph" => Ok(MetricKind::Graph),
            _ => Err(GenerateError::UnknownMetric(s.into())),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Graph => "graph",
        })
    }
}

#[derive(Debug, Clone)]
pub struct GenerateConfig {
    pub family: Family,
    pub facilities: usize,
    pub customers: usize,
    /// Drawn uniformly from `1..=customers` when `None`.
    pub m: Option<usize>,
    pub seed: u64,
    pub metric: MetricKind,
}

pub fn generate(cfg: &GenerateConfig) -> Result<InstanceFile, GenerateError> {
    let (nf, nc) = (cfg.facilities, cfg.customers);
    if nf == 0 || nc == 0 {
        return Err(GenerateError::Empty {
            facilities: nf,
            customers: nc,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = match cfg.m {
        Some(m) if m > nc => return Err(GenerateError::DemandOutOfRange { m, customers: nc }),
        Some(m) => m,
        None => rng.gen_range(1..=nc),
    };
    let constraint = match cfg.family {
        Family::Knapsack => {
            let (weights, budget) = knapsack(&mut rng, nf);
            ConstraintSpec::Knapsack { weights, budget }
        }
        Family::MultiKnapsack => {
            let (w1, k1) = knapsack(&mut rng, nf);
            let (w2, k2) = knapsack(&mut rng, nf);
            ConstraintSpec::MultiKnapsack {
                weights: vec![w1, w2],
                budgets: vec![k1, k2],
            }
        }
        Family::Matroid => ConstraintSpec::Matroid(matroid(&mut rng, nf)),
        Family::KnapsackMatroid => {
            let (weights, budget) = knapsack(&mut rng, nf);
            ConstraintSpec::KnapsackAndMatroid {
                weights,
                budget,
                matroid: matroid(&mut rng, nf),
            }
        }
    };
    let metric = match cfg.metric {
        MetricKind::Euclidean => MetricSource::Euclidean(
            (0..nf + nc)
                .map(|_| {
                    (0..2)
                        .map(|_| rng.gen_range(0..=1000) as f64 / 100.0)
                        .collect()
                })
                .collect(),
        ),
        MetricKind::Graph => MetricSource::Explicit(graph_metric(&mut rng, nf + nc)),
    };
    Ok(InstanceFile {
        facilities: (1..=nf).map(|i| format!("f{i}")).collect(),
        customers: (1..=nc).map(|i| format!("c{i}")).collect(),
        m,
        constraint,
        metric,
    })
}

/// Weights in `1..=10`; the budget lies between the heaviest weight and half
/// the total, so single facilities fit but not all of them together.
fn knapsack(rng: &mut ChaCha8Rng, n: usize) -> (Vec<u64>, u64) {
    let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=10)).collect();
    let max = *weights.iter().max().expect("n >= 1");
    let total: u64 = weights.iter().sum();
    let budget = rng.gen_range(max..=max.max(total / 2));
    (weights, budget)
}

fn matroid(rng: &mut ChaCha8Rng, n: usize) -> MatroidOracle {
    match rng.gen_range(0..3) {
        0 => MatroidOracle::uniform(n, rng.gen_range(1..=n.div_ceil(2))),
        1 => {
            let groups_count = rng.gen_range(1..=n.div_ceil(2));
            let mut groups = vec![Vec::new(); groups_count];
            for f in 0..n {
                groups[rng.gen_range(0..groups_count)].push(f);
            }
            groups.retain(|g| !g.is_empty());
            let caps = groups
                .iter()
                .map(|g| rng.gen_range(1..=g.len().min(2)))
                .collect();
            let p =
                PartitionMatroid::new(n, &groups, caps).expect("groups partition the facilities");
            MatroidOracle::new(MatroidKind::Partition(p))
        }
        _ => {
            let vertices = n / 2 + 2;
            let edges = (0..n)
                .map(|_| {
                    let a = rng.gen_range(0..vertices);
                    let b = (a + rng.gen_range(1..vertices)) % vertices;
                    (a, b)
                })
                .collect();
            MatroidOracle::new(MatroidKind::Graphic(GraphicMatroid {
                num_vertices: vertices,
                edges,
            }))
        }
    }
}

/// Row-major shortest-path distances of a random connected graph: a random
/// spanning tree plus about `n / 2` extra edges, lengths in `1..=20`.
fn graph_metric(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut graph = UnGraph::<(), u32>::with_capacity(n, 2 * n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        graph.add_edge(nodes[order[i]], nodes[parent], rng.gen_range(1..=20));
    }
    for _ in 0..n / 2 {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            graph.add_edge(nodes[a], nodes[b], rng.gen_range(1..=20));
        }
    }
    let paths = floyd_warshall(&graph, |e| *e.weight()).expect("lengths are positive");
    let mut dist = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            dist[a * n + b] = paths[&(nodes[a], nodes[b])] as f64;
        }
    }
    dist
}
