//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::HashSet;

/// Straight-from-the-definition metrics, written without sharing code with
/// the library.
pub fn brute_precision(recs: &[usize], relevant: &HashSet<usize>, k: usize) -> f64 {
    let mut hits = 0;
    for pos in 0..k {
        if pos < recs.len() && relevant.contains(&recs[pos]) {
            hits += 1;
        }
    }
    hits as f64 / k as f64
}

pub fn brute_recall(recs: &[usize], relevant: &HashSet<usize>, k: usize) -> f64 {
    let top: HashSet<usize> = recs.iter().take(k).copied().collect();
    top.intersection(relevant).count() as f64 / relevant.len() as f64
}

pub fn brute_ndcg(recs: &[usize], relevant: &HashSet<usize>, k: usize) -> f64 {
    let mut dcg = 0.0;
    for (pos, item) in recs.iter().enumerate().take(k) {
        if relevant.contains(item) {
            dcg += 1.0 / (pos as f64 + 2.0).log2();
        }
    }
    let ideal_hits = relevant.len().min(k);
    let mut idcg = 0.0;
    for pos in 0..ideal_hits {
        idcg += 1.0 / (pos as f64 + 2.0).log2();
    }
    dcg / idcg
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: &mut Vec<usize>, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(current.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            current.push(x);
            go(rest, current, out);
            current.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// Every non-empty subset of `0..n`.
pub fn nonempty_subsets(n: usize) -> Vec<HashSet<usize>> {
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
