//! Polymorphism search: one variable per table cell.
//!
//! Linear identities (each side a variable or a symbol applied to variables)
//! are compiled before the search: cell-cell instances merge cells in a
//! union-find, cell-variable instances fix a cell's value. The remaining
//! identities are checked instance by instance on the partial tables and
//! narrow the top-level cells they reach. Edge preservation is enforced by
//! arc consistency between classes along the arcs of the power `g^k`,
//! generated on demand. Domains are `u64` bitmasks, so the universe is
//! limited to 64 elements.

use std::collections::VecDeque;

use super::table::{advance, check_identities, table_len, Compiled, IdentityCheck, OperationTable, Tables};
use super::term::{IdentitySystem, Term};
use crate::error::{Error, Result};
use crate::structures::{Digraph, UnionFind};

const MAX_CELLS: usize = 1 << 22;
const MAX_INSTANCES: usize = 1 << 26;
const LEXICOGRAPHIC_BUDGET: u64 = 1_000;
const FIRST_RESTART_BUDGET: u64 = 100;

/// Result of a polymorphism search. `nodes` counts the values tried during
/// branching; it is reported for both outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub tables: Option<Tables>,
    pub nodes: u64,
}

/// A configurable search for polymorphisms of `digraph` satisfying `system`.
#[derive(Clone, Debug)]
pub struct PolymorphismSearch<'a> {
    digraph: &'a Digraph,
    system: &'a IdentitySystem,
    node_limit: Option<u64>,
    fixed: Vec<(String, Vec<usize>, usize)>,
}

impl<'a> PolymorphismSearch<'a> {
    pub fn new(digraph: &'a Digraph, system: &'a IdentitySystem) -> Self {
        PolymorphismSearch { digraph, system, node_limit: None, fixed: Vec::new() }
    }

    /// Fail with [`Error::NodeLimit`] once more than `limit` nodes are explored.
    pub fn node_limit(mut self, limit: u64) -> Self {
        self.node_limit = Some(limit);
        self
    }

    /// Requires `symbol(args) = value`.
    pub fn fix(mut self, symbol: &str, args: &[usize], value: usize) -> Self {
        self.fixed.push((symbol.to_string(), args.to_vec(), value));
        self
    }

    pub fn run(&self) -> Result<SearchOutcome> {
        let Some(mut engine) = Engine::build(self)? else {
            return Ok(SearchOutcome { tables: None, nodes: 0 });
        };
        let solution = engine.solve()?;
        let tables = match solution {
            Some(domains) => Some(engine.verified_tables(&domains, self.system)?),
            None => None,
        };
        Ok(SearchOutcome { tables, nodes: engine.nodes })
    }
}

/// Searches for polymorphisms of `g` interpreting every symbol of `sys`
/// so that all identities hold. `tables: None` certifies nonexistence.
pub fn find_polymorphisms(g: &Digraph, sys: &IdentitySystem) -> Result<SearchOutcome> {
    PolymorphismSearch::new(g, sys).run()
}

/// A binary polymorphism `f` of `g` with a unit `e`: `f(e,x) = f(x,e) = x`.
/// Units are tried in ascending order.
pub fn find_binary_with_unit(g: &Digraph) -> Result<Option<(OperationTable, usize)>> {
    let sys = IdentitySystem::new(vec![("f".to_string(), 2)], Vec::new())?;
    for unit in 0..g.vertex_count() {
        let mut search = PolymorphismSearch::new(g, &sys);
        for x in 0..g.vertex_count() {
            search = search.fix("f", &[unit, x], x).fix("f", &[x, unit], x);
        }
        if let Some(mut tables) = search.run()?.tables {
            return Ok(Some((tables.remove("f").expect("symbol f is declared"), unit)));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug)]
struct SymbolCells {
    arity: usize,
    offset: usize,
}

struct Nested {
    lhs: Compiled,
    rhs: Compiled,
    vars: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Order {
    Lexicographic,
    Weighted,
}

/// Classes involved in a wipe-out.
struct Conflict(Vec<usize>);

type Propagation = std::result::Result<(), Conflict>;

enum Partial {
    Known(usize),
    Blocked(usize),
    Unknown,
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Domain(usize),
    Sent(usize),
}

/// Domains with an undo trail. `sent[2c + d]` is the support last pushed
/// from class `c` to its out- (`d = 0`) or in-neighbours (`d = 1`).
struct State {
    domains: Vec<u64>,
    sent: Vec<u64>,
    trail: Vec<(Slot, u64)>,
}

impl State {
    fn new(domains: Vec<u64>, full: u64) -> Self {
        let sent = vec![full; 2 * domains.len()];
        State { domains, sent, trail: Vec::new() }
    }

    /// Narrows class `c` to `mask`; returns `None` on wipe-out and
    /// `Some(changed)` otherwise.
    fn narrow(&mut self, c: usize, mask: u64) -> Option<bool> {
        let old = self.domains[c];
        let new = old & mask;
        if new == 0 {
            return None;
        }
        if new != old {
            self.trail.push((Slot::Domain(c), old));
            self.domains[c] = new;
        }
        Some(new != old)
    }

    fn send(&mut self, slot: usize, support: u64) {
        self.trail.push((Slot::Sent(slot), self.sent[slot]));
        self.sent[slot] = support;
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("trail is longer than mark") {
                (Slot::Domain(c), old) => self.domains[c] = old,
                (Slot::Sent(slot), old) => self.sent[slot] = old,
            }
        }
    }
}

struct Engine<'a> {
    g: &'a Digraph,
    n: usize,
    full: u64,
    out_mask: Vec<u64>,
    in_mask: Vec<u64>,
    symbols: Vec<SymbolCells>,
    class_of: Vec<usize>,
    class_start: Vec<usize>,
    class_cells: Vec<usize>,
    nested: Vec<Nested>,
    root: Vec<u64>,
    /// Classes split into groups that share no constraint, each ascending.
    groups: Vec<Vec<usize>>,
    node_limit: Option<u64>,
    nodes: u64,
}

fn bit(v: usize) -> u64 {
    1u64 << v
}

fn single(mask: u64) -> Option<usize> {
    (mask.count_ones() == 1).then(|| mask.trailing_zeros() as usize)
}

fn is_linear(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::App(_, args) => args.iter().all(|a| matches!(a, Term::Var(_))),
    }
}

enum Side {
    Cell(usize),
    Value(usize),
}

impl<'a> Engine<'a> {
    fn build(search: &PolymorphismSearch<'a>) -> Result<Option<Self>> {
        let g = search.digraph;
        let sys = search.system;
        let n = g.vertex_count();
        if n > 64 {
            return Err(Error::UniverseTooLarge(n));
        }
        let full = if n == 64 { u64::MAX } else { bit(n) - 1 };
        let mask_of = |list: &[usize]| list.iter().fold(0u64, |m, &v| m | bit(v));
        let out_mask: Vec<u64> = (0..n).map(|v| mask_of(g.out_neighbors(v))).collect();
        let in_mask: Vec<u64> = (0..n).map(|v| mask_of(g.in_neighbors(v))).collect();
        let loops = (0..n).filter(|&v| g.has_edge(v, v)).fold(0u64, |m, v| m | bit(v));

        let mut symbols = Vec::new();
        let mut total = 0usize;
        for s in sys.signature() {
            symbols.push(SymbolCells { arity: s.arity, offset: total });
            total = total
                .checked_add(table_len(s.arity, n)?)
                .filter(|&t| t <= MAX_CELLS)
                .ok_or_else(|| Error::SizeOverflow(format!("more than {MAX_CELLS} table cells")))?;
        }
        let names: Vec<String> = sys.signature().iter().map(|s| s.name.clone()).collect();

        let mut uf = UnionFind::new(total);
        let mut cell_domain = vec![full; total];
        let mut nested = Vec::new();
        let mut consistent = true;
        for identity in sys.identities() {
            let vars = identity.variables();
            let lhs = Compiled::new(&identity.lhs, &names, &vars)?;
            let rhs = Compiled::new(&identity.rhs, &names, &vars)?;
            let instances = table_len(vars.len(), n)?;
            if instances > MAX_INSTANCES {
                return Err(Error::SizeOverflow(format!("identity `{identity}` has {instances} instances")));
            }
            if !(is_linear(&identity.lhs) && is_linear(&identity.rhs)) {
                nested.push(Nested { lhs, rhs, vars: vars.len() });
                continue;
            }
            let side = |t: &Compiled, values: &[usize]| match t {
                Compiled::Var(i) => Side::Value(values[*i]),
                Compiled::App(s, args) => {
                    let index = args.iter().fold(0, |acc, a| match a {
                        Compiled::Var(i) => acc * n + values[*i],
                        Compiled::App(..) => unreachable!("linear terms have variable arguments"),
                    });
                    Side::Cell(symbols[*s].offset + index)
                }
            };
            let mut values = vec![0usize; vars.len()];
            for _ in 0..instances {
                match (side(&lhs, &values), side(&rhs, &values)) {
                    (Side::Cell(a), Side::Cell(b)) => {
                        uf.union(a, b);
                    }
                    (Side::Cell(a), Side::Value(v)) | (Side::Value(v), Side::Cell(a)) => cell_domain[a] &= bit(v),
                    (Side::Value(a), Side::Value(b)) => consistent &= a == b,
                }
                advance(&mut values, n);
            }
        }
        for (symbol, args, value) in &search.fixed {
            let s = names.iter().position(|x| x == symbol).ok_or_else(|| Error::MissingSymbol(symbol.clone()))?;
            if args.len() != symbols[s].arity {
                return Err(Error::ArityMismatch { symbol: symbol.clone(), expected: symbols[s].arity, found: args.len() });
            }
            if let Some(&bad) = args.iter().chain(std::iter::once(value)).find(|&&a| a >= n) {
                return Err(Error::VertexOutOfRange { vertex: bad, count: n });
            }
            let index = args.iter().fold(0, |acc, &a| acc * n + a);
            cell_domain[symbols[s].offset + index] &= bit(*value);
        }
        if !consistent {
            return Ok(None);
        }

        let partition = uf.into_partition();
        let class_of = partition.labels().to_vec();
        let classes = partition.num_blocks();
        let mut root = vec![full; classes];
        let mut class_start = vec![0usize; classes + 1];
        for (cell, &c) in class_of.iter().enumerate() {
            root[c] &= cell_domain[cell];
            class_start[c + 1] += 1;
        }
        for c in 0..classes {
            class_start[c + 1] += class_start[c];
        }
        let mut fill = class_start.clone();
        let mut class_cells = vec![0usize; total];
        for (cell, &c) in class_of.iter().enumerate() {
            class_cells[fill[c]] = cell;
            fill[c] += 1;
        }

        let mut engine = Engine {
            g,
            n,
            full,
            out_mask,
            in_mask,
            symbols,
            class_of,
            class_start,
            class_cells,
            nested,
            root,
            groups: Vec::new(),
            node_limit: search.node_limit,
            nodes: 0,
        };
        let mut link = UnionFind::new(classes);
        if loops == full {
            // Arcs of g^k join exactly the tuples that agree componentwise.
            let mut component = vec![0usize; n];
            let components = g.components();
            for (id, members) in components.iter().enumerate() {
                members.iter().for_each(|&v| component[v] = id);
            }
            for s in &engine.symbols {
                let mut first_class = std::collections::HashMap::new();
                let len = table_len(s.arity, n)?;
                let mut digits = vec![0usize; s.arity];
                for local in 0..len {
                    let key = digits.iter().fold(0usize, |acc, &d| acc * components.len() + component[d]);
                    let c = engine.class_of[s.offset + local];
                    link.union(*first_class.entry(key).or_insert(c), c);
                    advance(&mut digits, n);
                }
            }
        } else {
            for cell in 0..total {
                let c = engine.class_of[cell];
                let mut inner = false;
                engine.for_each_neighbor(cell, true, |b| {
                    let cb = engine.class_of[b];
                    inner |= cb == c;
                    link.union(c, cb);
                    true
                });
                if inner {
                    // An arc inside one class forces a looped value.
                    engine.root[c] &= loops;
                }
            }
        }
        let mut nested_symbols = Vec::new();
        for identity in &engine.nested {
            identity.lhs.collect_symbols(&mut nested_symbols);
            identity.rhs.collect_symbols(&mut nested_symbols);
        }
        let mut anchor = None;
        for &s in &nested_symbols {
            let cells = engine.symbols[s];
            for cell in cells.offset..cells.offset + table_len(cells.arity, n)? {
                let c = engine.class_of[cell];
                link.union(*anchor.get_or_insert(c), c);
            }
        }
        engine.groups = link.into_partition().blocks();
        if engine.root.contains(&0) {
            return Ok(None);
        }
        Ok(Some(engine))
    }

    fn symbol_of(&self, cell: usize) -> SymbolCells {
        let i = self.symbols.partition_point(|s| s.offset <= cell) - 1;
        self.symbols[i]
    }

    /// Calls `visit` on every out- (or in-) neighbour of `cell` in `g^k`
    /// until it returns false.
    fn for_each_neighbor(&self, cell: usize, forward: bool, mut visit: impl FnMut(usize) -> bool) {
        let symbol = self.symbol_of(cell);
        let mut local = cell - symbol.offset;
        let mut lists: Vec<&[usize]> = vec![&[]; symbol.arity];
        for list in lists.iter_mut().rev() {
            let v = local % self.n;
            local /= self.n;
            *list = if forward { self.g.out_neighbors(v) } else { self.g.in_neighbors(v) };
            if list.is_empty() {
                return;
            }
        }
        let mut strides = vec![1usize; symbol.arity];
        for i in (1..symbol.arity).rev() {
            strides[i - 1] = strides[i] * self.n;
        }
        let mut index: usize = lists.iter().zip(&strides).map(|(l, s)| l[0] * s).sum();
        let mut choice = vec![0usize; symbol.arity];
        loop {
            if !visit(symbol.offset + index) {
                return;
            }
            let mut i = symbol.arity;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                let list = lists[i];
                index -= list[choice[i]] * strides[i];
                choice[i] += 1;
                if choice[i] < list.len() {
                    index += list[choice[i]] * strides[i];
                    break;
                }
                choice[i] = 0;
                index += list[0] * strides[i];
            }
        }
    }

    fn support(&self, domain: u64, masks: &[u64]) -> u64 {
        let mut d = domain;
        let mut sup = 0;
        while d != 0 {
            sup |= masks[d.trailing_zeros() as usize];
            d &= d - 1;
        }
        sup
    }

    fn arc_consistency(&self, state: &mut State, queue: &mut VecDeque<usize>, queued: &mut [bool]) -> Propagation {
        while let Some(c) = queue.pop_front() {
            queued[c] = false;
            let domain = state.domains[c];
            for (direction, forward) in [(0, true), (1, false)] {
                let sup = self.support(domain, if forward { &self.out_mask } else { &self.in_mask });
                if sup == state.sent[2 * c + direction] {
                    continue;
                }
                state.send(2 * c + direction, sup);
                for &cell in &self.class_cells[self.class_start[c]..self.class_start[c + 1]] {
                    let mut wiped = None;
                    self.for_each_neighbor(cell, forward, |b| {
                        let cb = self.class_of[b];
                        match state.narrow(cb, sup) {
                            None => wiped = Some(cb),
                            Some(true) if !queued[cb] => {
                                queued[cb] = true;
                                queue.push_back(cb);
                            }
                            Some(_) => {}
                        }
                        wiped.is_none()
                    });
                    if let Some(cb) = wiped {
                        return Err(Conflict(vec![c, cb]));
                    }
                }
            }
        }
        Ok(())
    }

    fn eval_partial(&self, t: &Compiled, values: &[usize], domains: &[u64]) -> Partial {
        match t {
            Compiled::Var(i) => Partial::Known(values[*i]),
            Compiled::App(s, args) => {
                let mut index = 0;
                for a in args {
                    match self.eval_partial(a, values, domains) {
                        Partial::Known(v) => index = index * self.n + v,
                        _ => return Partial::Unknown,
                    }
                }
                let c = self.class_of[self.symbols[*s].offset + index];
                match single(domains[c]) {
                    Some(v) => Partial::Known(v),
                    None => Partial::Blocked(c),
                }
            }
        }
    }

    /// One sweep over all instances of the nested identities.
    fn nested_pass(&self, state: &mut State, changed: &mut Vec<usize>) -> Propagation {
        for identity in &self.nested {
            let mut values = vec![0usize; identity.vars];
            let instances = self.n.pow(identity.vars as u32);
            for _ in 0..instances {
                let l = self.eval_partial(&identity.lhs, &values, &state.domains);
                let r = self.eval_partial(&identity.rhs, &values, &state.domains);
                let narrowed = match (l, r) {
                    (Partial::Known(a), Partial::Known(b)) => {
                        if a != b {
                            return Err(Conflict(Vec::new()));
                        }
                        Vec::new()
                    }
                    (Partial::Known(v), Partial::Blocked(c)) | (Partial::Blocked(c), Partial::Known(v)) => {
                        vec![(c, bit(v))]
                    }
                    (Partial::Blocked(a), Partial::Blocked(b)) if a != b => {
                        let both = state.domains[a] & state.domains[b];
                        vec![(a, both), (b, both)]
                    }
                    _ => Vec::new(),
                };
                for (c, mask) in narrowed {
                    match state.narrow(c, mask) {
                        None => return Err(Conflict(vec![c])),
                        Some(true) => changed.push(c),
                        Some(false) => {}
                    }
                }
                advance(&mut values, self.n);
            }
        }
        Ok(())
    }

    fn propagate(&self, state: &mut State, start: Vec<usize>) -> Propagation {
        let mut queued = vec![false; state.domains.len()];
        let mut queue = VecDeque::new();
        let mut pending = start;
        loop {
            for c in pending.drain(..) {
                if !std::mem::replace(&mut queued[c], true) {
                    queue.push_back(c);
                }
            }
            self.arc_consistency(state, &mut queue, &mut queued)?;
            if self.nested.is_empty() {
                return Ok(());
            }
            self.nested_pass(state, &mut pending)?;
            if pending.is_empty() {
                return Ok(());
            }
        }
    }

    /// Solves each group in turn. Groups are independent, so when every
    /// group is settled by the lexicographic pass the solution is the
    /// lexicographically least one.
    fn solve(&mut self) -> Result<Option<Vec<u64>>> {
        let mut state = State::new(self.root.clone(), self.full);
        let all: Vec<usize> = (0..state.domains.len()).collect();
        if self.propagate(&mut state, all).is_err() {
            return Ok(None);
        }
        let mut weights = vec![1u64; state.domains.len()];
        for group in std::mem::take(&mut self.groups) {
            if !self.solve_group(&mut state, &group, &mut weights)? {
                return Ok(None);
            }
        }
        Ok(Some(state.domains))
    }

    /// Lexicographic depth-first search first; if it meets too many
    /// conflicts, restarts with conflict-weighted variable choice and a
    /// growing conflict budget.
    fn solve_group(&mut self, state: &mut State, group: &[usize], weights: &mut [u64]) -> Result<bool> {
        let mark = state.trail.len();
        let mut order = Order::Lexicographic;
        let mut budget = LEXICOGRAPHIC_BUDGET;
        loop {
            match self.dfs(state, group, order, budget, weights)? {
                Some(solved) => return Ok(solved),
                None => {
                    state.undo_to(mark);
                    if order == Order::Weighted {
                        budget += budget / 2;
                    } else {
                        order = Order::Weighted;
                        budget = FIRST_RESTART_BUDGET;
                    }
                }
            }
        }
    }

    fn choose(&self, domains: &[u64], group: &[usize], from: usize, order: Order, weights: &[u64]) -> Option<usize> {
        match order {
            Order::Lexicographic => (from..group.len()).find(|&i| domains[group[i]].count_ones() > 1),
            Order::Weighted => (0..group.len())
                .filter(|&i| domains[group[i]].count_ones() > 1)
                .min_by(|&i, &j| {
                    let (a, b) = (group[i], group[j]);
                    let lhs = u128::from(domains[a].count_ones()) * u128::from(weights[b]);
                    let rhs = u128::from(domains[b].count_ones()) * u128::from(weights[a]);
                    lhs.cmp(&rhs).then(i.cmp(&j))
                }),
        }
    }

    /// `Some(true)` solved, `Some(false)` refuted, `None` once `budget`
    /// conflicts have been met.
    fn dfs(
        &mut self,
        state: &mut State,
        group: &[usize],
        order: Order,
        budget: u64,
        weights: &mut [u64],
    ) -> Result<Option<bool>> {
        let mut conflicts = 0u64;
        // (position in group, untried values, trail mark before the decision)
        let mut stack: Vec<(usize, u64, usize)> = Vec::new();
        match self.choose(&state.domains, group, 0, order, weights) {
            None => return Ok(Some(true)),
            Some(i) => stack.push((i, state.domains[group[i]], state.trail.len())),
        }
        while let Some(top) = stack.last_mut() {
            let (i, remaining, mark) = *top;
            state.undo_to(mark);
            if remaining == 0 {
                stack.pop();
                continue;
            }
            let v = remaining.trailing_zeros() as usize;
            top.1 = remaining & (remaining - 1);
            self.nodes += 1;
            if self.node_limit.is_some_and(|limit| self.nodes > limit) {
                return Err(Error::NodeLimit(self.node_limit.unwrap_or_default()));
            }
            state.narrow(group[i], bit(v)).expect("value is in the domain");
            if let Err(Conflict(culprits)) = self.propagate(state, vec![group[i]]) {
                culprits.into_iter().for_each(|c| weights[c] += 1);
                conflicts += 1;
                if conflicts == budget {
                    return Ok(None);
                }
                continue;
            }
            match self.choose(&state.domains, group, i, order, weights) {
                None => return Ok(Some(true)),
                Some(next) => stack.push((next, state.domains[group[next]], state.trail.len())),
            }
        }
        Ok(Some(false))
    }

    fn verified_tables(&self, domains: &[u64], sys: &IdentitySystem) -> Result<Tables> {
        let mut tables = Tables::new();
        for (s, cells) in sys.signature().iter().zip(&self.symbols) {
            let len = table_len(cells.arity, self.n)?;
            let values = (cells.offset..cells.offset + len)
                .map(|cell| single(domains[self.class_of[cell]]).expect("solution domains are singletons"))
                .collect();
            tables.insert(s.name.clone(), OperationTable::new(cells.arity, self.n, values)?);
        }
        if let IdentityCheck::Fails(c) = check_identities(&tables, sys, self.n)? {
            return Err(Error::Invariant(format!("search returned tables violating identity {}", c.identity)));
        }
        for (name, table) in &tables {
            if let Some(edges) = table.edge_violation(self.g)? {
                return Err(Error::Invariant(format!("search returned `{name}` breaking edges {edges:?}")));
            }
        }
        Ok(tables)
    }
}
