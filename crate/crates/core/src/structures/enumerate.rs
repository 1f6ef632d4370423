use std::collections::BTreeSet;

use super::Digraph;

/// All digraphs on `n ≤ 4` vertices up to isomorphism, optionally only the
/// reflexive ones. Each class is represented by the labelling with the
/// smallest adjacency code; the list is sorted by that code.
pub fn nonisomorphic_digraphs(n: usize, reflexive_only: bool) -> Vec<Digraph> {
    assert!(n <= 4, "exhaustive digraph enumeration is limited to 4 vertices");
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).filter(|&(u, v)| !reflexive_only || u != v).collect();
    let loops: Vec<(usize, usize)> = if reflexive_only { (0..n).map(|v| (v, v)).collect() } else { Vec::new() };
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    for mask in 0u32..(1 << pairs.len()) {
        let mut adj = vec![false; n * n];
        for &(u, v) in &loops {
            adj[u * n + v] = true;
        }
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                adj[u * n + v] = true;
            }
        }
        let code = perms
            .iter()
            .map(|p| {
                let mut c = 0u32;
                for u in 0..n {
                    for v in 0..n {
                        c = c << 1 | u32::from(adj[p[u] * n + p[v]]);
                    }
                }
                c
            })
            .min()
            .unwrap_or(0);
        seen.insert(code);
    }
    seen.into_iter()
        .map(|code| {
            let edges = (0..n * n).filter(|i| code >> (n * n - 1 - i) & 1 == 1).map(|i| (i / n, i % n));
            Digraph::new(n, edges).expect("decoded edges are in range")
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut result = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            result.push(q);
        }
    }
    result
}
