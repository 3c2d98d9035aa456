//! Fill-reducing ordering: minimum degree on the supervariable quotient graph.
//!
//! Rows with identical closed sparsity patterns that are numbered consecutively
//! (the vector components of one Lagrange node) are merged into a supervariable
//! and ordered together. Ties are broken by supervariable index so the ordering
//! is a deterministic function of the pattern.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::sparse::CsrMatrix;

/// Returns `perm` with `perm[new] = old`.
pub fn minimum_degree(m: &CsrMatrix) -> Vec<usize> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    // supervariables: maximal runs of consecutive rows with equal patterns
    let mut group_of = vec![0usize; n];
    let mut group_start = vec![0usize];
    for r in 1..n {
        if m.row(r).0 == m.row(r - 1).0 {
            group_of[r] = group_of[r - 1];
        } else {
            group_of[r] = group_start.len();
            group_start.push(r);
        }
    }
    let ng = group_start.len();
    group_start.push(n);
    let weight: Vec<u64> = (0..ng).map(|g| (group_start[g + 1] - group_start[g]) as u64).collect();

    let mut adj: Vec<Vec<u32>> = (0..ng)
        .map(|g| {
            let (cols, _) = m.row(group_start[g]);
            let mut list: Vec<u32> = cols.iter().map(|&c| group_of[c as usize] as u32).filter(|&h| h as usize != g).collect();
            list.dedup();
            list
        })
        .collect();
    // patterns may be unsymmetric in structure only through explicit zeros; symmetrize
    let mut extra: Vec<Vec<u32>> = vec![Vec::new(); ng];
    for g in 0..ng {
        for &h in &adj[g] {
            extra[h as usize].push(g as u32);
        }
    }
    for g in 0..ng {
        if !extra[g].is_empty() {
            let mut merged = std::mem::take(&mut adj[g]);
            merged.append(&mut extra[g]);
            merged.sort_unstable();
            merged.dedup();
            adj[g] = merged;
        }
    }

    let degree_of = |list: &[u32]| -> u64 { list.iter().map(|&u| weight[u as usize]).sum() };
    let mut degree: Vec<u64> = adj.iter().map(|l| degree_of(l)).collect();
    let mut heap: BinaryHeap<Reverse<(u64, u32)>> = (0..ng).map(|g| Reverse((degree[g], g as u32))).collect();
    let mut eliminated = vec![false; ng];
    let mut order = Vec::with_capacity(ng);
    let mut merged: Vec<u32> = Vec::new();

    while let Some(Reverse((deg, v))) = heap.pop() {
        let v = v as usize;
        if eliminated[v] || deg != degree[v] {
            continue;
        }
        eliminated[v] = true;
        order.push(v);
        let nbrs = std::mem::take(&mut adj[v]);
        for &u in &nbrs {
            let u = u as usize;
            let current = std::mem::take(&mut adj[u]);
            merged.clear();
            let (mut i, mut j) = (0, 0);
            while i < current.len() || j < nbrs.len() {
                let a = current.get(i).copied().unwrap_or(u32::MAX);
                let b = nbrs.get(j).copied().unwrap_or(u32::MAX);
                let next = a.min(b);
                if a == next {
                    i += 1;
                }
                if b == next {
                    j += 1;
                }
                if next as usize != u && next as usize != v && !eliminated[next as usize] {
                    merged.push(next);
                }
            }
            adj[u] = merged.clone();
            degree[u] = degree_of(&adj[u]);
            heap.push(Reverse((degree[u], u as u32)));
        }
    }

    let mut perm = Vec::with_capacity(n);
    for g in order {
        perm.extend(group_start[g]..group_start[g + 1]);
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn is_a_permutation() {
        let m = laplacian_1d(17);
        let mut p = minimum_degree(&m);
        p.sort_unstable();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic() {
        let m = laplacian_1d(40);
        assert_eq!(minimum_degree(&m), minimum_degree(&m));
    }

    #[test]
    fn arrow_matrix_hub_last() {
        // star graph: eliminating the hub first would fill everything
        let n = 10;
        let mut t: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 10.0)).collect();
        for i in 1..n {
            t.push((0, i, 1.0));
            t.push((i, 0, 1.0));
        }
        let m = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let p = minimum_degree(&m);
        let hub = p.iter().position(|&v| v == 0).unwrap();
        assert!(hub >= n - 2);
    }
}
