//! Canonical symmetric multi-indices.
//!
//! A symmetric multi-index of order `n` over `m` slots is stored as a count vector
//! `α` with `Σα = n`; equivalently, a sorted index list. Ranking uses the
//! combinatorial number system on the sorted list, which is dense and gapless.

use crate::special::binomial;

/// Number of canonical multi-indices of order `n` over `m` slots.
pub fn count(m: usize, n: usize) -> usize {
    if m == 0 {
        return usize::from(n == 0);
    }
    binomial(m + n - 1, n) as usize
}

/// Rank of a count vector among all count vectors of the same order.
pub fn rank(counts: &[u8]) -> usize {
    let mut r = 0u64;
    let mut k = 0usize;
    for (slot, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            r += binomial(slot + k, k + 1);
            k += 1;
        }
    }
    r as usize
}

/// Sorted index list of a count vector.
pub fn to_sorted(counts: &[u8]) -> Vec<usize> {
    let mut out = Vec::with_capacity(counts.iter().map(|&c| c as usize).sum());
    for (slot, &c) in counts.iter().enumerate() {
        out.extend(std::iter::repeat_n(slot, c as usize));
    }
    out
}

/// Count vector of an arbitrary (unsorted) index list.
pub fn from_indices(m: usize, indices: &[usize]) -> Vec<u8> {
    let mut counts = vec![0u8; m];
    for &i in indices {
        counts[i] += 1;
    }
    counts
}

/// Number of distinct orderings of the multiset: `n! / Π α_c!`.
pub fn multiplicity(counts: &[u8]) -> f64 {
    let n: u32 = counts.iter().map(|&c| c as u32).sum();
    counts.iter().fold(crate::special::factorial(n), |acc, &c| acc / crate::special::factorial(c as u32))
}

/// Multi-index factorial `Π α_c!`.
pub fn factorial(counts: &[u8]) -> f64 {
    counts.iter().fold(1.0, |acc, &c| acc * crate::special::factorial(c as u32))
}

/// All count vectors of order `n` over `m` slots, listed in rank order.
pub fn enumerate(m: usize, n: usize) -> Vec<Vec<u8>> {
    let total = count(m, n);
    let mut out = vec![Vec::new(); total];
    let mut current = vec![0u8; m];
    fill(&mut current, 0, n, &mut out);
    out
}

fn fill(current: &mut Vec<u8>, slot: usize, remaining: usize, out: &mut Vec<Vec<u8>>) {
    let m = current.len();
    if m == 0 {
        if remaining == 0 {
            out[0] = Vec::new();
        }
        return;
    }
    if slot == m - 1 {
        current[slot] = remaining as u8;
        let r = rank(current);
        out[r] = current.clone();
        current[slot] = 0;
        return;
    }
    for c in 0..=remaining {
        current[slot] = c as u8;
        fill(current, slot + 1, remaining - c, out);
    }
    current[slot] = 0;
}

/// All sub-multisets `α1 ≤ α` with `|α1| = k`, each with the probability
/// `Π C(α_c, α1_c) / C(|α|, k)` that a uniformly random `k`-subset of the
/// underlying positions has that content.
pub fn splits(counts: &[u8], k: usize) -> Vec<(Vec<u8>, f64)> {
    let n: usize = counts.iter().map(|&c| c as usize).sum();
    if k > n {
        return Vec::new();
    }
    let denom = binomial(n, k) as f64;
    let mut out = Vec::new();
    let mut part = vec![0u8; counts.len()];
    split_rec(counts, 0, k, &mut part, 1.0, denom, &mut out);
    out
}

fn split_rec(
    counts: &[u8],
    slot: usize,
    remaining: usize,
    part: &mut Vec<u8>,
    numer: f64,
    denom: f64,
    out: &mut Vec<(Vec<u8>, f64)>,
) {
    if slot == counts.len() {
        if remaining == 0 {
            out.push((part.clone(), numer / denom));
        }
        return;
    }
    let top = (counts[slot] as usize).min(remaining);
    for c in 0..=top {
        part[slot] = c as u8;
        let w = binomial(counts[slot] as usize, c) as f64;
        split_rec(counts, slot + 1, remaining - c, part, numer * w, denom, out);
    }
    part[slot] = 0;
}
