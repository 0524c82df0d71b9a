use super::{items, Item, PcmSolution};
use crate::matroid::{
    max_weight_common_independent_set, ExactWeightIndex, Matroid, MatroidOracle, PartitionMatroid,
    Restriction,
};
use crate::partition::{PcmError, PcmInstance};

/// Largest effective knapsack budget the exact-weight search scans.
pub const KNAPSACK_MATROID_BUDGET_CAP: u64 = 10_000;

/// Ground elements of all parts, ascending, and the parts in local indices.
fn local_parts(items: &[Item], keep: impl Fn(usize) -> bool) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut elements: Vec<usize> = items
        .iter()
        .flat_map(|i| i.facilities.iter().copied())
        .filter(|&f| keep(f))
        .collect();
    elements.sort_unstable();
    let local = |f: usize| elements.binary_search(&f).expect("element was collected");
    let groups = items
        .iter()
        .map(|i| {
            i.facilities
                .iter()
                .copied()
                .filter(|&f| keep(f))
                .map(local)
                .collect()
        })
        .collect();
    (elements, groups)
}

/// Matroid constraint: a max-weight common independent set of the matroid
/// and the one-per-part partition matroid, each facility weighted by its
/// part's value.
pub fn solve_matroid(pcm: &PcmInstance, matroid: &MatroidOracle) -> Result<PcmSolution, PcmError> {
    let items = items(pcm);
    let (elements, groups) = local_parts(&items, |_| true);
    let restricted = Restriction::new(matroid, elements);
    let partition = PartitionMatroid::at_most_one_per_part(restricted.ground_size(), &groups);
    let mut weights = vec![0i128; restricted.ground_size()];
    for (item, group) in items.iter().zip(&groups) {
        for &e in group {
            weights[e] = item.value as i128;
        }
    }
    let local = max_weight_common_independent_set(&restricted, &partition, &weights)?;
    PcmSolution::from_set(pcm, restricted.to_base(&local))
}

/// Knapsack plus matroid. With `phi` exceeding the total weight, combined
/// weights `phi * value + weight` separate value from weight, so a common
/// independent set of combined weight exactly `phi * V + k` has value `V`
/// and weight `k`. Targets are scanned by decreasing value, then increasing
/// weight, against an index of all attainable combined weights.
pub fn solve_knapsack_matroid(
    pcm: &PcmInstance,
    weights: &[u64],
    budget: u64,
    matroid: &MatroidOracle,
) -> Result<PcmSolution, PcmError> {
    if weights.len() != pcm.num_facilities() {
        return Err(PcmError::UnknownFacility(
            weights.len().min(pcm.num_facilities()),
        ));
    }
    let items = items(pcm);
    let (elements, groups) = local_parts(&items, |f| weights[f] <= budget);
    let local_weight: Vec<u64> = elements.iter().map(|&f| weights[f]).collect();
    let total_weight: u64 = local_weight.iter().sum();
    let budget = budget.min(total_weight);
    if budget > KNAPSACK_MATROID_BUDGET_CAP {
        return Err(PcmError::BudgetTooLarge {
            budget,
            cap: KNAPSACK_MATROID_BUDGET_CAP,
        });
    }

    let restricted = Restriction::new(matroid, elements);
    let partition = PartitionMatroid::at_most_one_per_part(restricted.ground_size(), &groups);
    let phi = total_weight as u128 + 1;
    let mut combined = vec![0u128; restricted.ground_size()];
    for (item, group) in items.iter().zip(&groups) {
        for &e in group {
            combined[e] = phi * item.value as u128 + local_weight[e] as u128;
        }
    }
    let index = ExactWeightIndex::build(&restricted, &partition, &combined)?;

    let max_value: usize = items.iter().map(|i| i.value).sum();
    for value in (0..=max_value as u128).rev() {
        for k in 0..=budget as u128 {
            if let Some(local) = index.witness(phi * value + k) {
                return PcmSolution::from_set(pcm, restricted.to_base(local));
            }
        }
    }
    unreachable!("the empty set has combined weight zero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ConstraintSpec;
    use crate::matroid::MatroidKind;
    use crate::pcm::solve_bruteforce;
    use crate::pcm::tests::pcm_from;
    use proptest::prelude::*;

    #[test]
    fn uniform_rank_picks_heaviest_parts() {
        let pcm = pcm_from(4, &[(&[0, 1], 1), (&[2], 5), (&[3], 3)]);
        let sol = solve_matroid(&pcm, &MatroidOracle::uniform(4, 2)).unwrap();
        assert_eq!(sol.facilities, vec![2, 3]);
        assert_eq!(sol.value, 8);
    }

    #[test]
    fn partition_matroid_across_parts() {
        // Facilities 1 and 2 share a matroid group of capacity 1, so parts
        // 0 and 1 can both be served only through facility 0.
        let m = MatroidOracle::new(MatroidKind::Partition(
            PartitionMatroid::new(3, &[vec![1, 2], vec![0]], vec![1, 1]).unwrap(),
        ));
        let pcm = pcm_from(3, &[(&[0, 1], 2), (&[2], 2)]);
        let sol = solve_matroid(&pcm, &m).unwrap();
        assert_eq!(sol.facilities, vec![0, 2]);
    }

    #[test]
    fn knapsack_matroid_small() {
        let pcm = pcm_from(3, &[(&[0], 3), (&[1], 2), (&[2], 2)]);
        let m = MatroidOracle::uniform(3, 2);
        let sol = solve_knapsack_matroid(&pcm, &[4, 1, 1], 4, &m).unwrap();
        // {0} has value 3, {1, 2} value 4 within budget and rank.
        assert_eq!(sol.facilities, vec![1, 2]);
        let sol = solve_knapsack_matroid(&pcm, &[4, 1, 1], 5, &m).unwrap();
        assert_eq!(sol.value, 5);
    }

    #[test]
    fn knapsack_matroid_budget_cap() {
        let pcm = pcm_from(2, &[(&[0], 1), (&[1], 1)]);
        let m = MatroidOracle::free(2);
        let err = solve_knapsack_matroid(&pcm, &[6_000, 6_000], 20_000, &m).unwrap_err();
        assert!(matches!(
            err,
            PcmError::BudgetTooLarge { budget: 12_000, .. }
        ));
    }

    fn random_case() -> impl Strategy<Value = (usize, Vec<(Vec<usize>, usize)>, Vec<u64>, usize)> {
        (2usize..=7).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(0usize..4, n),
                proptest::collection::vec(1usize..5, 4),
                proptest::collection::vec(0u64..5, n),
                0usize..=n,
            )
                .prop_map(|(n, assign, values, weights, rank)| {
                    let mut parts: Vec<(Vec<usize>, usize)> =
                        (0..4).map(|p| (vec![], values[p])).collect();
                    for (f, &p) in assign.iter().enumerate() {
                        if p < 3 {
                            parts[p].0.push(f);
                        }
                    }
                    (n, parts, weights, rank)
                })
        })
    }

    fn graphic(n: usize) -> MatroidOracle {
        // A triangle-heavy graph: edge f joins f % 3 and (f + 1) % 4.
        let edges = (0..n).map(|f| (f % 3, (f + 1) % 4)).collect();
        MatroidOracle::new(MatroidKind::Graphic(crate::matroid::GraphicMatroid {
            num_vertices: 4,
            edges,
        }))
    }

    proptest! {
        #[test]
        fn matroid_matches_bruteforce((n, parts, _, rank) in random_case(), use_graphic in any::<bool>()) {
            let spec_parts: Vec<(&[usize], usize)> = parts.iter().map(|(f, v)| (f.as_slice(), *v)).collect();
            let pcm = pcm_from(n, &spec_parts);
            let m = if use_graphic { graphic(n) } else { MatroidOracle::uniform(n, rank) };
            let sol = solve_matroid(&pcm, &m).unwrap();
            let spec = ConstraintSpec::Matroid(m);
            prop_assert!(spec.membership(&sol.facilities));
            pcm.check_feasible(&sol.facilities).unwrap();
            prop_assert_eq!(sol.value, solve_bruteforce(&pcm, &spec).unwrap().value);
        }

        #[test]
        fn knapsack_matroid_matches_bruteforce(
            (n, parts, weights, rank) in random_case(),
            budget in 0u64..10,
            use_graphic in any::<bool>(),
        ) {
            let spec_parts: Vec<(&[usize], usize)> = parts.iter().map(|(f, v)| (f.as_slice(), *v)).collect();
            let pcm = pcm_from(n, &spec_parts);
            let m = if use_graphic { graphic(n) } else { MatroidOracle::uniform(n, rank) };
            let sol = solve_knapsack_matroid(&pcm, &weights, budget, &m).unwrap();
            let spec = ConstraintSpec::KnapsackAndMatroid { weights, budget, matroid: m };
            prop_assert!(spec.membership(&sol.facilities));
            pcm.check_feasible(&sol.facilities).unwrap();
            prop_assert_eq!(sol.value, solve_bruteforce(&pcm, &spec).unwrap().value);
        }
    }
}
