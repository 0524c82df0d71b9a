use super::knapsack::multiknapsack_items;
use super::Item;
use crate::instance::ConstraintSpec;
use crate::matroid::{
    max_common_independent_set, max_weight_common_independent_set, Matroid, PartitionMatroid,
    Restriction,
};
use crate::partition::{Part, PcmError, PcmInstance};

/// A set in the family holding exactly one facility of every part, if one
/// exists. Parts must be disjoint facility sets; an empty part makes the
/// problem infeasible.
pub fn solve_pcf(
    num_facilities: usize,
    parts: &[Vec<usize>],
    spec: &ConstraintSpec,
) -> Result<Option<Vec<usize>>, PcmError> {
    let as_parts = parts
        .iter()
        .enumerate()
        .map(|(i, fs)| Part {
            rep: i,
            facilities: fs.clone(),
            children: vec![i],
        })
        .collect();
    // Validates disjointness and range.
    PcmInstance::from_parts(num_facilities, as_parts, 0.0)?;
    if parts.iter().any(Vec::is_empty) {
        return Ok(None);
    }
    let mut elements: Vec<usize> = parts.iter().flatten().copied().collect();
    elements.sort_unstable();
    let local = |f: usize| elements.binary_search(&f).expect("element was collected");
    let groups: Vec<Vec<usize>> = parts
        .iter()
        .map(|p| p.iter().copied().map(local).collect())
        .collect();

    let found = match spec {
        ConstraintSpec::Knapsack { weights, budget } => {
            let lightest: Vec<usize> = parts
                .iter()
                .map(|p| {
                    *p.iter()
                        .min_by_key(|&&f| (weights[f], f))
                        .expect("nonempty")
                })
                .collect();
            let total = lightest
                .iter()
                .try_fold(0u64, |acc, &f| acc.checked_add(weights[f]));
            total.filter(|&t| t <= *budget).map(|_| lightest)
        }
        ConstraintSpec::MultiKnapsack { weights, budgets } => {
            if budgets.len() > 3 {
                return Err(PcmError::TooManyDimensions(budgets.len()));
            }
            // Maximizing the number of served parts answers feasibility.
            let items: Vec<Item> = parts
                .iter()
                .map(|p| Item {
                    facilities: p.clone(),
                    value: 1,
                })
                .collect();
            let set = multiknapsack_items(&items, weights, budgets)?;
            (set.len() == parts.len()).then_some(set)
        }
        ConstraintSpec::Matroid(m) => {
            let restricted = Restriction::new(m, elements.clone());
            let partition =
                PartitionMatroid::at_most_one_per_part(restricted.ground_size(), &groups);
            let set = max_common_independent_set(&restricted, &partition)?;
            (set.len() == parts.len()).then(|| restricted.to_base(&set))
        }
        ConstraintSpec::KnapsackAndMatroid {
            weights,
            budget,
            matroid,
        } => {
            // With weights L - w(f) and L above the total weight, a max-weight
            // common independent set is a largest one and, among those, the
            // lightest.
            let restricted = Restriction::new(matroid, elements.clone());
            let partition =
                PartitionMatroid::at_most_one_per_part(restricted.ground_size(), &groups);
            let total: i128 = elements.iter().map(|&f| weights[f] as i128).sum();
            let big = total + 1;
            let shifted: Vec<i128> = elements.iter().map(|&f| big - weights[f] as i128).collect();
            let set = restricted.to_base(&max_weight_common_independent_set(
                &restricted,
                &partition,
                &shifted,
            )?);
            let weight: u128 = set.iter().map(|&f| weights[f] as u128).sum();
            (set.len() == parts.len() && weight <= *budget as u128).then_some(set)
        }
    };
    Ok(found.map(|mut s| {
        s.sort_unstable();
        s
    }))
}
