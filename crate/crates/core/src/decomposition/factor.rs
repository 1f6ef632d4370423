//! Backtracking search for an isomorphism `A -> B_1 x ... x B_k` with the
//! factor sizes fixed in advance.
//!
//! Vertices of `A` receive distinct coordinate tuples one at a time. The
//! factor edge relations are kept as three-valued matrices: an edge of `A`
//! between placed vertices forces every coordinate pair to be an edge, and
//! a non-edge becomes a clause asking some coordinate pair to be a non-edge.
//! Clauses with a single undecided pair left are propagated.

use std::collections::VecDeque;

use crate::structures::{decode, Digraph};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cell {
    Unknown,
    No,
    Yes,
}

struct Search<'a> {
    a: &'a Digraph,
    radices: &'a [usize],
    shared: bool,
    order: Vec<usize>,
    digits: Vec<Vec<usize>>,
    adjacent: Vec<bool>,
    cells: Vec<Vec<Cell>>,
    trail: Vec<(usize, usize)>,
    clauses: Vec<(usize, usize)>,
    assigned: Vec<Option<usize>>,
    used: Vec<bool>,
}

/// Searches for an isomorphism from `a` to a product of digraphs on
/// `radices[i]` vertices. With `shared`, all factors must be the same
/// digraph (all radices must then agree). The product of the radices must
/// equal the vertex count of `a`. Returns the coordinate tuple of each
/// vertex, lexicographically encoded.
pub(crate) fn search(a: &Digraph, radices: &[usize], shared: bool) -> Option<Vec<usize>> {
    let count = a.vertex_count();
    debug_assert_eq!(radices.iter().product::<usize>(), count);
    debug_assert!(!shared || radices.windows(2).all(|w| w[0] == w[1]));
    let matrices = if shared { 1 } else { radices.len() };
    let mut adjacent = vec![false; count * count];
    for (u, v) in a.edges() {
        adjacent[u * count + v] = true;
    }
    let mut search = Search {
        a,
        radices,
        shared,
        order: bfs_order(a),
        digits: (0..count).map(|t| decode(t, radices)).collect(),
        adjacent,
        cells: (0..matrices).map(|i| vec![Cell::Unknown; radices[i] * radices[i]]).collect(),
        trail: Vec::new(),
        clauses: Vec::new(),
        assigned: vec![None; count],
        used: vec![false; count],
    };
    let fresh = vec![0; matrices];
    if !search.extend(0, &fresh) {
        return None;
    }
    Some(search.assigned.iter().map(|t| t.expect("every vertex is placed")).collect())
}

/// Vertices in breadth-first order of the underlying graph, each component
/// started from its vertex of largest degree.
fn bfs_order(a: &Digraph) -> Vec<usize> {
    let count = a.vertex_count();
    let degree = |v: usize| a.out_neighbors(v).len() + a.in_neighbors(v).len();
    let mut starts: Vec<usize> = (0..count).collect();
    starts.sort_by_key(|&v| std::cmp::Reverse(degree(v)));
    let mut seen = vec![false; count];
    let mut order = Vec::with_capacity(count);
    for start in starts {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in a.out_neighbors(u).iter().chain(a.in_neighbors(u)) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

impl Search<'_> {
    fn matrix(&self, coordinate: usize) -> usize {
        if self.shared {
            0
        } else {
            coordinate
        }
    }

    fn cell_index(&self, coordinate: usize, from: usize, to: usize) -> (usize, usize) {
        let m = self.radices[coordinate];
        (self.matrix(coordinate), self.digits[from][coordinate] * m + self.digits[to][coordinate])
    }

    fn extend(&mut self, position: usize, fresh: &[usize]) -> bool {
        let Some(&u) = self.order.get(position) else {
            return true;
        };
        for tuple in 0..self.used.len() {
            if self.used[tuple] {
                continue;
            }
            let Some(next_fresh) = self.canonical_fresh(tuple, fresh) else {
                continue;
            };
            let (trail_mark, clause_mark) = (self.trail.len(), self.clauses.len());
            self.used[tuple] = true;
            self.assigned[u] = Some(tuple);
            if self.place(u, position) && self.extend(position + 1, &next_fresh) {
                return true;
            }
            for (m, c) in self.trail.drain(trail_mark..) {
                self.cells[m][c] = Cell::Unknown;
            }
            self.clauses.truncate(clause_mark);
            self.used[tuple] = false;
            self.assigned[u] = None;
        }
        false
    }

    /// Factor vertices are interchangeable, so values are introduced in
    /// increasing order. With a shared factor the order runs across all
    /// coordinates; otherwise each coordinate has its own.
    fn canonical_fresh(&self, tuple: usize, fresh: &[usize]) -> Option<Vec<usize>> {
        let mut next = fresh.to_vec();
        for (coordinate, &d) in self.digits[tuple].iter().enumerate() {
            let slot = &mut next[self.matrix(coordinate)];
            if d > *slot {
                return None;
            }
            if d == *slot {
                *slot += 1;
            }
        }
        Some(next)
    }

    fn set(&mut self, (m, c): (usize, usize), value: Cell) -> bool {
        match self.cells[m][c] {
            Cell::Unknown => {
                self.cells[m][c] = value;
                self.trail.push((m, c));
                true
            }
            current => current == value,
        }
    }

    /// Records the constraints between `u` and every placed vertex, then
    /// propagates the clauses.
    fn place(&mut self, u: usize, position: usize) -> bool {
        let count = self.a.vertex_count();
        let tu = self.assigned[u].expect("u was just placed");
        for index in 0..=position {
            let w = self.order[index];
            let tw = self.assigned[w].expect("earlier vertices are placed");
            let pairs = if w == u { vec![(tu, tu, u, u)] } else { vec![(tw, tu, w, u), (tu, tw, u, w)] };
            for (from, to, p, q) in pairs {
                if self.adjacent[p * count + q] {
                    for coordinate in 0..self.radices.len() {
                        if !self.set(self.cell_index(coordinate, from, to), Cell::Yes) {
                            return false;
                        }
                    }
                } else {
                    self.clauses.push((from, to));
                }
            }
        }
        self.propagate()
    }

    fn propagate(&mut self) -> bool {
        for index in 0..self.clauses.len() {
            let (from, to) = self.clauses[index];
            let mut open: Vec<(usize, usize)> = Vec::new();
            let mut satisfied = false;
            for coordinate in 0..self.radices.len() {
                let cell = self.cell_index(coordinate, from, to);
                match self.cells[cell.0][cell.1] {
                    Cell::No => {
                        satisfied = true;
                        break;
                    }
                    Cell::Unknown if !open.contains(&cell) => open.push(cell),
                    _ => {}
                }
            }
            if satisfied {
                continue;
            }
            match open.as_slice() {
                [] => return false,
                [cell] => {
                    self.set(*cell, Cell::No);
                }
                _ => {}
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{disjoint_union, power, product};

    #[test]
    fn coordinates_are_a_bijection() {
        let square = power(&Digraph::make_c(), 2).unwrap();
        let mut coordinates = search(&square, &[3, 3], true).unwrap();
        coordinates.sort_unstable();
        assert_eq!(coordinates, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn unions_with_c() {
        let c = Digraph::make_c();
        assert!(search(&disjoint_union(&[c.clone(), c.clone()]), &[2, 3], false).is_some());
        let four = disjoint_union(&[c, Digraph::point()]);
        assert!(search(&four, &[2, 2], true).is_none());
        assert!(search(&four, &[2, 2], false).is_none());
        let mixed = product(&[Digraph::make_c(), Digraph::make_edge()]).unwrap();
        assert!(search(&mixed, &[3, 2], false).is_some());
        assert!(search(&mixed, &[2, 3], false).is_some());
    }
}
