//! Apriori-style candidate generation and counting over the support-based
//! projection.

use std::collections::{HashMap, HashSet};

use crate::access::{support_projection, TreeAccess};
use crate::error::Result;
use crate::mining::{canonicalize, ItemsetResult};

/// `needle` ⊆ `hay`, both strictly increasing.
fn is_subset(needle: &[u32], hay: &[u32]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.by_ref().any(|h| h == n))
}

/// Same contract as [`mine_fp`](crate::mining::mine_fp).
pub fn mine_levelwise<A: TreeAccess + ?Sized>(acc: &mut A, min_support: u64) -> Result<Vec<ItemsetResult>> {
    let min_support = min_support.max(1);
    let pdb = support_projection(acc, min_support)?;
    let order = acc.order().clone();

    // work in rank space so sorted vectors compare cheaply
    let transactions: Vec<(Vec<u32>, u64)> = pdb
        .entries
        .iter()
        .map(|(items, m)| (items.iter().map(|&i| order.rank_of(i)).collect(), *m))
        .collect();

    let mut singles: HashMap<u32, u64> = HashMap::new();
    for (t, m) in &transactions {
        for &r in t {
            *singles.entry(r).or_default() += m;
        }
    }
    let mut level: Vec<(Vec<u32>, u64)> = singles
        .into_iter()
        .filter(|&(_, s)| s >= min_support)
        .map(|(r, s)| (vec![r], s))
        .collect();
    level.sort();

    let mut found: Vec<(Vec<u32>, u64)> = Vec::new();
    while !level.is_empty() {
        let known: HashSet<&[u32]> = level.iter().map(|(s, _)| s.as_slice()).collect();
        let mut candidates: Vec<Vec<u32>> = Vec::new();
        for (i, (a, _)) in level.iter().enumerate() {
            for (b, _) in &level[i + 1..] {
                let k = a.len();
                if a[..k - 1] != b[..k - 1] {
                    // level is sorted, so no later b shares a's prefix
                    break;
                }
                let mut cand = a.clone();
                cand.push(b[k - 1]);
                let closed = (0..cand.len()).all(|skip| {
                    let sub: Vec<u32> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &r)| r)
                        .collect();
                    known.contains(sub.as_slice())
                });
                if closed {
                    candidates.push(cand);
                }
            }
        }
        let mut next = Vec::new();
        for cand in candidates {
            let support: u64 = transactions
                .iter()
                .filter(|(t, _)| t.len() >= cand.len() && is_subset(&cand, t))
                .map(|(_, m)| m)
                .sum();
            if support >= min_support {
                next.push((cand, support));
            }
        }
        next.sort();
        found.append(&mut level);
        level = next;
    }

    let mut out: Vec<ItemsetResult> = found
        .into_iter()
        .map(|(ranks, support)| ItemsetResult {
            items: ranks.iter().map(|&r| order.items()[r as usize]).collect(),
            support,
        })
        .collect();
    canonicalize(&mut out, &order);
    Ok(out)
}
