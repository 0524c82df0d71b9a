use super::{items, Item, PcmSolution};
use crate::partition::{PcmError, PcmInstance};

/// Largest table (layers times states) the multi-knapsack program builds.
pub const MULTIKNAPSACK_STATE_CAP: u128 = 50_000_000;

/// Single knapsack: each part contributes at most its lightest facility, so a
/// minimum-weight-per-value table over parts is exact.
pub fn solve_knapsack(
    pcm: &PcmInstance,
    weights: &[u64],
    budget: u64,
) -> Result<PcmSolution, PcmError> {
    check_len(pcm, weights)?;
    let dims = [weights.to_vec()];
    solve_multiknapsack(pcm, &dims, &[budget])
}

/// Knapsacks in up to three dimensions. The table is indexed by value and
/// by the used budget in every dimension but the last, and stores the least
/// weight used in the last dimension.
pub fn solve_multiknapsack(
    pcm: &PcmInstance,
    weights: &[Vec<u64>],
    budgets: &[u64],
) -> Result<PcmSolution, PcmError> {
    let d = budgets.len();
    if d == 0 || weights.len() != d {
        return Err(PcmError::Unsupported("knapsack without dimensions"));
    }
    if d > 3 {
        return Err(PcmError::TooManyDimensions(d));
    }
    for w in weights {
        check_len(pcm, w)?;
    }
    let set = multiknapsack_items(&items(pcm), weights, budgets)?;
    PcmSolution::from_set(pcm, set)
}

fn check_len(pcm: &PcmInstance, weights: &[u64]) -> Result<(), PcmError> {
    if weights.len() != pcm.num_facilities() {
        return Err(PcmError::UnknownFacility(
            weights.len().min(pcm.num_facilities()),
        ));
    }
    Ok(())
}

/// Optimal set for the items; ties go to the lexicographically first table
/// state, preferring to skip a part over taking it.
pub(super) fn multiknapsack_items(
    items: &[Item],
    weights: &[Vec<u64>],
    budgets: &[u64],
) -> Result<Vec<usize>, PcmError> {
    let d = budgets.len();
    let fits = |f: usize| (0..d).all(|i| weights[i][f] <= budgets[i]);

    // Pareto-minimal candidates per item; a dominated facility never helps.
    let candidates: Vec<Vec<usize>> = items
        .iter()
        .map(|item| {
            let mut fs: Vec<usize> = item
                .facilities
                .iter()
                .copied()
                .filter(|&f| fits(f))
                .collect();
            fs.sort_by_key(|&f| ((0..d).map(|i| weights[i][f]).collect::<Vec<_>>(), f));
            let mut kept: Vec<usize> = Vec::new();
            for f in fs {
                let dominated = kept
                    .iter()
                    .any(|&g| (0..d).all(|i| weights[i][g] <= weights[i][f]));
                if !dominated {
                    kept.push(f);
                }
            }
            kept
        })
        .collect();

    let total_value: usize = items.iter().map(|i| i.value).sum();
    // Budgets never need to exceed what all candidates together weigh.
    let caps: Vec<u64> = (0..d)
        .map(|i| budgets[i].min(candidates.iter().flatten().map(|&f| weights[i][f]).sum()))
        .collect();

    let mut radix = vec![total_value as u128 + 1];
    for &c in &caps[..d - 1] {
        radix.push(c as u128 + 1);
    }
    let states: u128 = radix.iter().product();
    let table = states * (items.len() as u128 + 1);
    if table > MULTIKNAPSACK_STATE_CAP {
        return Err(PcmError::StateSpaceTooLarge {
            size: table,
            cap: MULTIKNAPSACK_STATE_CAP,
        });
    }
    let states = states as usize;
    let radix: Vec<usize> = radix.into_iter().map(|r| r as usize).collect();

    let decode = |s: usize| -> Vec<usize> {
        let mut coords = Vec::with_capacity(radix.len());
        let mut rest = s;
        for &r in &radix {
            coords.push(rest % r);
            rest /= r;
        }
        coords
    };
    let encode = |coords: &[usize]| -> usize {
        coords
            .iter()
            .zip(&radix)
            .rev()
            .fold(0, |acc, (&c, &r)| acc * r + c)
    };

    const UNREACHED: u64 = u64::MAX;
    let last = d - 1;
    let mut table = vec![UNREACHED; states];
    table[0] = 0;
    // choice[layer][state]: 0 = skipped, c = took candidates[layer][c - 1].
    let mut choices: Vec<Vec<u16>> = Vec::with_capacity(items.len());

    for (item, cands) in items.iter().zip(&candidates) {
        let mut next = table.clone();
        let mut choice = vec![0u16; states];
        for s in 0..states {
            let used_last = table[s];
            if used_last == UNREACHED {
                continue;
            }
            let coords = decode(s);
            'cand: for (c, &f) in cands.iter().enumerate() {
                let mut moved = coords.clone();
                moved[0] += item.value;
                for i in 0..last {
                    let u = moved[i + 1] as u64 + weights[i][f];
                    if u > caps[i] {
                        continue 'cand;
                    }
                    moved[i + 1] = u as usize;
                }
                let u = used_last + weights[last][f];
                if u > caps[last] {
                    continue;
                }
                let t = encode(&moved);
                if u < next[t] {
                    next[t] = u;
                    choice[t] = c as u16 + 1;
                }
            }
        }
        table = next;
        choices.push(choice);
    }

    let best = (0..states)
        .filter(|&s| table[s] != UNREACHED)
        .max_by_key(|&s| (decode(s)[0], std::cmp::Reverse(s)))
        .expect("the empty state is always reachable");

    let mut set = Vec::new();
    let mut s = best;
    for layer in (0..items.len()).rev() {
        let c = choices[layer][s];
        if c == 0 {
            continue;
        }
        let f = candidates[layer][c as usize - 1];
        set.push(f);
        let mut coords = decode(s);
        coords[0] -= items[layer].value;
        for i in 0..last {
            coords[i + 1] -= weights[i][f] as usize;
        }
        s = encode(&coords);
    }
    set.sort_unstable();
    Ok(set)
}
