use super::{Matroid, MatroidError};

/// A maximum-cardinality set independent in both matroids.
pub fn max_common_independent_set<A, B>(m1: &A, m2: &B) -> Result<Vec<usize>, MatroidError>
where
    A: Matroid + ?Sized,
    B: Matroid + ?Sized,
{
    check_ground_sets(m1, m2)?;
    let weights = vec![0; m1.ground_size()];
    Ok(augment(m1, m2, &weights, Stop::WhenNoPath))
}

/// A common independent set of maximum total weight.
///
/// Weights must be nonnegative. The result is not necessarily of maximum
/// cardinality: augmentation stops as soon as the best path no longer gains
/// weight, which is optimal because the best weight per cardinality is
/// concave.
pub fn max_weight_common_independent_set<A, B>(
    m1: &A,
    m2: &B,
    weights: &[i128],
) -> Result<Vec<usize>, MatroidError>
where
    A: Matroid + ?Sized,
    B: Matroid + ?Sized,
{
    check_ground_sets(m1, m2)?;
    if weights.len() != m1.ground_size() {
        return Err(MatroidError::WeightLength {
            expected: m1.ground_size(),
            got: weights.len(),
        });
    }
    if let Some((element, &weight)) = weights.iter().enumerate().find(|(_, w)| **w < 0) {
        return Err(MatroidError::NegativeWeight { element, weight });
    }
    Ok(augment(m1, m2, weights, Stop::WhenNoGain))
}

fn check_ground_sets<A, B>(m1: &A, m2: &B) -> Result<(), MatroidError>
where
    A: Matroid + ?Sized,
    B: Matroid + ?Sized,
{
    if m1.ground_size() != m2.ground_size() {
        return Err(MatroidError::GroundSetMismatch {
            left: m1.ground_size(),
            right: m2.ground_size(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stop {
    WhenNoPath,
    WhenNoGain,
}

/// Path labels compare lexicographically: total vertex length first, then
/// number of arcs.
type Label = (i128, usize);

/// Repeatedly augments along a shortest path of the exchange graph.
///
/// For the current common independent set `I`, arcs run `y -> x` when
/// `I - y + x` is independent in `m1` and `x -> y` when it is independent in
/// `m2` (`y` in `I`, `x` outside). Paths start where `I + x` stays
/// independent in `m1` and end where it stays independent in `m2`. Vertices
/// outside `I` have length `-w`, those inside `+w`, so the cheapest path is
/// the one with the largest weight gain; among cheapest paths the one with
/// the fewest arcs is taken, then the smallest sink index.
fn augment<A, B>(m1: &A, m2: &B, weights: &[i128], stop: Stop) -> Vec<usize>
where
    A: Matroid + ?Sized,
    B: Matroid + ?Sized,
{
    let n = m1.ground_size();
    let mut in_set = vec![false; n];
    let mut total: i128 = 0;

    loop {
        let current: Vec<usize> = (0..n).filter(|&e| in_set[e]).collect();
        let outside: Vec<usize> = (0..n).filter(|&e| !in_set[e]).collect();

        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut scratch = Vec::with_capacity(current.len() + 1);
        let mut sources = Vec::new();
        let mut is_sink = vec![false; n];
        for &x in &outside {
            scratch.clear();
            scratch.extend_from_slice(&current);
            scratch.push(x);
            if m1.is_independent(&scratch) {
                sources.push(x);
            }
            if m2.is_independent(&scratch) {
                is_sink[x] = true;
            }
        }
        for (pos, &y) in current.iter().enumerate() {
            for &x in &outside {
                scratch.clear();
                scratch.extend(
                    current
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != pos)
                        .map(|(_, &e)| e),
                );
                scratch.push(x);
                if m1.is_independent(&scratch) {
                    adjacency[y].push(x);
                }
                if m2.is_independent(&scratch) {
                    adjacency[x].push(y);
                }
            }
        }

        let length = |e: usize| if in_set[e] { weights[e] } else { -weights[e] };
        let mut label: Vec<Option<Label>> = vec![None; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        for &s in &sources {
            label[s] = Some((length(s), 0));
        }
        // Bellman-Ford; the exchange graph of an extreme set has no negative cycles.
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                let Some((cost, arcs)) = label[u] else {
                    continue;
                };
                for &v in &adjacency[u] {
                    let candidate = (cost + length(v), arcs + 1);
                    if label[v].is_none_or(|old| candidate < old) {
                        label[v] = Some(candidate);
                        pred[v] = Some(u);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let best = (0..n)
            .filter(|&t| is_sink[t])
            .filter_map(|t| label[t].map(|l| (l, t)))
            .min();
        let Some(((cost, _), sink)) = best else { break };
        let gain = -cost;
        if stop == Stop::WhenNoGain && gain <= 0 {
            break;
        }

        let mut v = sink;
        loop {
            in_set[v] = !in_set[v];
            match pred[v] {
                Some(u) => v = u,
                None => break,
            }
        }
        let next_total = total + gain;
        debug_assert!(next_total >= total || stop == Stop::WhenNoPath);
        total = next_total;
    }

    let result: Vec<usize> = (0..n).filter(|&e| in_set[e]).collect();
    assert!(
        m1.is_independent(&result) && m2.is_independent(&result),
        "intersection output must be independent in both matroids"
    );
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{GraphicMatroid, MatroidOracle, PartitionMatroid};

    fn weight_of(set: &[usize], w: &[i128]) -> i128 {
        set.iter().map(|&e| w[e]).sum()
    }

    #[test]
    fn identical_uniform_rank_two() {
        let m = MatroidOracle::uniform(3, 2);
        assert_eq!(max_common_independent_set(&m, &m).unwrap().len(), 2);
    }

    #[test]
    fn partition_against_uniform() {
        let p = PartitionMatroid::new(2, &[vec![0, 1]], vec![1]).unwrap();
        let u = MatroidOracle::uniform(2, 2);
        assert_eq!(max_common_independent_set(&p, &u).unwrap().len(), 1);
    }

    #[test]
    fn bipartite_perfect_matching() {
        // Edge e = (row, col) for a 3x3 grid minus the anti-diagonal pairs (0,2),(2,0).
        let edges: Vec<(usize, usize)> =
            [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 2)].to_vec();
        let rows: Vec<Vec<usize>> = (0..3)
            .map(|r| (0..edges.len()).filter(|&e| edges[e].0 == r).collect())
            .collect();
        let cols: Vec<Vec<usize>> = (0..3)
            .map(|c| (0..edges.len()).filter(|&e| edges[e].1 == c).collect())
            .collect();
        let m1 = PartitionMatroid::new(edges.len(), &rows, vec![1; 3]).unwrap();
        let m2 = PartitionMatroid::new(edges.len(), &cols, vec![1; 3]).unwrap();
        assert_eq!(max_common_independent_set(&m1, &m2).unwrap().len(), 3);
    }

    #[test]
    fn zero_weights_give_the_empty_set() {
        let m = MatroidOracle::free(4);
        assert!(max_weight_common_independent_set(&m, &m, &[0; 4])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn per_part_argmax_against_free() {
        let p = PartitionMatroid::new(2, &[vec![0, 1]], vec![1]).unwrap();
        let free = MatroidOracle::free(2);
        let w = [3, 2];
        let s = max_weight_common_independent_set(&p, &free, &w).unwrap();
        assert_eq!(s, vec![0]);
    }

    #[test]
    fn weighted_prefers_heavy_pair_over_three_light() {
        // Graphic: path a-b-c-d plus chord; partition groups limit choices.
        let g = GraphicMatroid {
            num_vertices: 3,
            edges: vec![(0, 1), (1, 2), (0, 2), (0, 1)],
        };
        let p = PartitionMatroid::new(4, &[vec![0, 1], vec![2, 3]], vec![1, 1]).unwrap();
        let w = [1, 5, 4, 7];
        let s = max_weight_common_independent_set(&g, &p, &w).unwrap();
        // {1,3}: edges (1,2),(0,1) form a forest, one per group, weight 12.
        assert_eq!(weight_of(&s, &w), 12);
    }

    #[test]
    fn errors() {
        let a = MatroidOracle::free(2);
        let b = MatroidOracle::free(3);
        assert!(matches!(
            max_common_independent_set(&a, &b),
            Err(MatroidError::GroundSetMismatch { .. })
        ));
        assert!(matches!(
            max_weight_common_independent_set(&a, &a, &[1, -1]),
            Err(MatroidError::NegativeWeight { element: 1, .. })
        ));
    }
}
