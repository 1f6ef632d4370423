use std::collections::BTreeMap;

use super::{Digraph, VertexMap};

/// Searches for an isomorphism `g -> h` by individualization and
/// refinement.
///
/// Both digraphs are coloured jointly (loop flag and degrees, refined by
/// neighbour colours until stable). While some colour class of `g` has
/// several vertices, its least vertex is given a fresh colour together with
/// each equally coloured vertex of `h` in ascending order, and the
/// refinement is rerun. The result is deterministic.
pub fn is_isomorphic(g: &Digraph, h: &Digraph) -> Option<VertexMap> {
    let n = g.vertex_count();
    if n != h.vertex_count() || g.edge_count() != h.edge_count() {
        return None;
    }
    let initial = |d: &Digraph| -> Vec<usize> {
        (0..d.vertex_count())
            .map(|v| {
                usize::from(d.has_edge(v, v))
                    + 2 * (d.out_neighbors(v).len() * (d.vertex_count() + 1) + d.in_neighbors(v).len())
            })
            .collect()
    };
    let (cg, ch) = refine(g, h, initial(g), initial(h));
    individualize(g, h, cg, ch).map(|image| VertexMap::new(n, image).expect("isomorphism image is in range"))
}

fn same_multiset(a: &[usize], b: &[usize]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

fn individualize(g: &Digraph, h: &Digraph, cg: Vec<usize>, ch: Vec<usize>) -> Option<Vec<usize>> {
    if !same_multiset(&cg, &ch) {
        return None;
    }
    let mut class_size: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &cg {
        *class_size.entry(c).or_default() += 1;
    }
    let split = class_size.iter().filter(|&(_, &size)| size > 1).min_by_key(|&(&c, &size)| (size, c));
    let Some((&color, _)) = split else {
        let mut vertex_of = BTreeMap::new();
        for (w, &c) in ch.iter().enumerate() {
            vertex_of.insert(c, w);
        }
        let image: Vec<usize> = cg.iter().map(|c| vertex_of[c]).collect();
        let preserved = g.edges().all(|(u, v)| h.has_edge(image[u], image[v]));
        return preserved.then_some(image);
    };
    let fresh = class_size.keys().next_back().map_or(0, |&c| c + 1);
    let u = (0..cg.len()).find(|&v| cg[v] == color).expect("class is non-empty");
    for w in (0..ch.len()).filter(|&w| ch[w] == color) {
        let mut next_g = cg.clone();
        let mut next_h = ch.clone();
        next_g[u] = fresh;
        next_h[w] = fresh;
        let (next_g, next_h) = refine(g, h, next_g, next_h);
        if let Some(image) = individualize(g, h, next_g, next_h) {
            return Some(image);
        }
    }
    None
}

/// Stable colour refinement run on the disjoint union of `g` and `h`, so
/// colour ids are comparable across the two digraphs.
/// A vertex colour with the sorted colours of its out- and in-neighbours.
type Signature = (usize, Vec<usize>, Vec<usize>);

fn refine(g: &Digraph, h: &Digraph, cg: Vec<usize>, ch: Vec<usize>) -> (Vec<usize>, Vec<usize>) {
    let graphs = [g, h];
    let mut colors = vec![cg, ch];
    let mut classes = usize::MAX;
    loop {
        let signatures: Vec<Vec<Signature>> = graphs
            .iter()
            .zip(&colors)
            .map(|(d, col)| {
                (0..d.vertex_count())
                    .map(|v| {
                        let mut outs: Vec<usize> = d.out_neighbors(v).iter().map(|&w| col[w]).collect();
                        let mut ins: Vec<usize> = d.in_neighbors(v).iter().map(|&w| col[w]).collect();
                        outs.sort_unstable();
                        ins.sort_unstable();
                        (col[v], outs, ins)
                    })
                    .collect()
            })
            .collect();
        // BTreeMap order makes the ids independent of discovery order.
        let rank: BTreeMap<&(usize, Vec<usize>, Vec<usize>), usize> = signatures
            .iter()
            .flatten()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        let count = rank.len();
        colors = signatures.iter().map(|s| s.iter().map(|k| rank[k]).collect()).collect();
        if count == classes {
            break;
        }
        classes = count;
    }
    let mut it = colors.into_iter();
    (it.next().unwrap(), it.next().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{disjoint_union, power};

    #[test]
    fn c_is_isomorphic_to_itself_by_identity() {
        let c = Digraph::make_c();
        assert_eq!(is_isomorphic(&c, &c).unwrap(), VertexMap::identity(3));
    }

    #[test]
    fn c_and_its_reverse() {
        let c = Digraph::make_c();
        let map = is_isomorphic(&c, &c.reversed()).unwrap();
        assert_eq!(map.image(), &[0, 2, 1]);
    }

    #[test]
    fn size_mismatch() {
        assert!(is_isomorphic(&Digraph::make_c(), &Digraph::make_c1()).is_none());
    }

    #[test]
    fn relabelled_power_is_found() {
        let g = power(&Digraph::make_c(), 2).unwrap();
        let perm = [4, 7, 1, 0, 8, 3, 2, 6, 5];
        let h = Digraph::new(9, g.edges().map(|(u, v)| (perm[u], perm[v]))).unwrap();
        let map = is_isomorphic(&g, &h).unwrap();
        assert!(map.is_isomorphism(&g, &h).unwrap());
        assert!(is_isomorphic(&g, &disjoint_union(&vec![Digraph::make_c(); 3])).is_none());
    }
}
