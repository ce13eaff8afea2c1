//! Walks, loop erasure and directed cycles.
//!
//! Walks are sequences of vertex indices. Indices into a walk are 0-based
//! here; the walk `(w_0, .., w_{k-1})` has length `k` (its vertex count).

use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::graph::{StepWeightMatrix, WeightedGraph};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Walk(Vec<usize>);

/// A walk whose vertices are pairwise distinct.
pub type SelfAvoidingWalk = Walk;

impl Walk {
    pub fn new(steps: Vec<usize>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidWalk("empty walk".into()));
        }
        Ok(Walk(steps))
    }

    /// Walk on `g`: every step must follow a positive-weight edge.
    pub fn on(g: &WeightedGraph, steps: Vec<usize>) -> Result<Self> {
        let walk = Self::new(steps)?;
        if let Some(&x) = walk.0.iter().find(|&&x| x >= g.len()) {
            return Err(Error::InvalidWalk(format!("vertex index {x} out of range")));
        }
        for pair in walk.0.windows(2) {
            if !g.is_edge(pair[0], pair[1]) {
                return Err(Error::InvalidWalk(format!(
                    "no edge {} -> {}",
                    g.name(pair[0]),
                    g.name(pair[1])
                )));
            }
        }
        Ok(walk)
    }

    pub fn from_names(g: &WeightedGraph, names: &[&str]) -> Result<Self> {
        let steps = names.iter().map(|n| g.vertex(n)).collect::<Result<Vec<_>>>()?;
        Self::on(g, steps)
    }

    pub fn steps(&self) -> &[usize] {
        &self.0
    }

    pub fn into_steps(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    pub fn last(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.contains(&x)
    }

    pub fn is_self_avoiding(&self) -> bool {
        first_repeat(&self.0).is_none()
    }

    /// `q(w) = prod_i q_{w_i w_{i+1}}`.
    pub fn weight(&self, q: &StepWeightMatrix) -> Rational {
        self.0
            .windows(2)
            .fold(Rational::one(), |acc, p| acc * q.get(p[0], p[1]))
    }

    pub fn display(&self, g: &WeightedGraph) -> String {
        let names: Vec<&str> = self.0.iter().map(|&x| g.name(x)).collect();
        format!("({})", names.join(","))
    }
}

/// First index `k` such that `w[..=k]` is not self-avoiding, together with
/// the unique earlier index `k' < k` with `w[k'] == w[k]`.
fn first_repeat(w: &[usize]) -> Option<(usize, usize)> {
    for k in 1..w.len() {
        if let Some(k_prime) = w[..k].iter().position(|&x| x == w[k]) {
            return Some((k, k_prime));
        }
    }
    None
}

/// An equivalence class of rooted directed cycles under cyclic shift.
///
/// Stored as the vertex sequence without the closing repeat, rotated so the
/// sequence is lexicographically minimal. The 2-cycle `(x, y, x)` that uses
/// one edge twice is stored as `[x, y]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedCycle(Vec<usize>);

impl DirectedCycle {
    /// From a closed walk `(w_0, .., w_k)` with `w_0 == w_k` whose first `k`
    /// vertices are distinct.
    pub fn from_rooted(closed: &[usize]) -> Result<Self> {
        if closed.len() < 2 || closed[0] != closed[closed.len() - 1] {
            return Err(Error::InvalidWalk("cycle must start and end at the same vertex".into()));
        }
        let open = &closed[..closed.len() - 1];
        if first_repeat(open).is_some() {
            return Err(Error::InvalidWalk("cycle interior is not self-avoiding".into()));
        }
        Ok(Self::from_open(open.to_vec()))
    }

    fn from_open(mut open: Vec<usize>) -> Self {
        let best = (0..open.len())
            .min_by(|&i, &j| {
                let a = open[i..].iter().chain(&open[..i]);
                let b = open[j..].iter().chain(&open[..j]);
                a.cmp(b)
            })
            .unwrap_or(0);
        open.rotate_left(best);
        DirectedCycle(open)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Number of directed edges.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.contains(&x)
    }

    pub fn intersects(&self, other: &DirectedCycle) -> bool {
        self.0.iter().any(|x| other.contains(*x))
    }

    pub fn meets(&self, set: &[usize]) -> bool {
        self.0.iter().any(|x| set.contains(x))
    }

    /// Directed edges `(x, y)` in cyclic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.0.len();
        (0..k).map(move |i| (self.0[i], self.0[(i + 1) % k]))
    }

    /// `w(C) = prod_{xy in C} q_xy`.
    pub fn weight(&self, q: &StepWeightMatrix) -> Rational {
        self.edges().fold(Rational::one(), |acc, (x, y)| acc * q.get(x, y))
    }

    /// The closed walk of this cycle rooted at `root`.
    pub fn rooted_at(&self, root: usize) -> Option<Vec<usize>> {
        let pos = self.0.iter().position(|&x| x == root)?;
        let mut walk: Vec<usize> = self.0[pos..].iter().chain(&self.0[..pos]).copied().collect();
        walk.push(root);
        Some(walk)
    }

    pub fn display(&self, g: &WeightedGraph) -> String {
        let mut names: Vec<&str> = self.0.iter().map(|&x| g.name(x)).collect();
        names.push(g.name(self.0[0]));
        format!("({})", names.join(","))
    }
}

impl fmt::Display for DirectedCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().chain(self.0.first()).map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// One application of the loop-erasure map `L`: removes the first loop closed
/// by the walk. Returns `None` when the walk is already self-avoiding.
pub fn erase_first_loop(w: &Walk) -> Option<(Walk, usize, DirectedCycle)> {
    let (k, k_prime) = first_repeat(&w.0)?;
    let cycle = DirectedCycle::from_rooted(&w.0[k_prime..=k]).expect("first repeat closes a simple loop");
    let mut rest = w.0[..=k_prime].to_vec();
    rest.extend_from_slice(&w.0[k + 1..]);
    Some((Walk(rest), k_prime, cycle))
}

/// The map `L`; identity on self-avoiding walks.
pub fn erase_one_loop(w: &Walk) -> Walk {
    match erase_first_loop(w) {
        Some((rest, _, _)) => rest,
        None => w.clone(),
    }
}

/// Iterates [`erase_one_loop`] to its fixpoint.
pub fn loop_erase(w: &Walk) -> SelfAvoidingWalk {
    loop_erase_with_history(w).0
}

/// A loop removed by one application of `L`: the index (into the walk as it
/// stood at that moment) of the vertex it was rooted at, and the cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasedLoop {
    pub position: usize,
    pub cycle: DirectedCycle,
}

pub fn loop_erase_with_history(w: &Walk) -> (SelfAvoidingWalk, Vec<ErasedLoop>) {
    let mut current = w.clone();
    let mut history = Vec::new();
    while let Some((rest, position, cycle)) = erase_first_loop(&current) {
        history.push(ErasedLoop { position, cycle });
        current = rest;
    }
    (current, history)
}

/// Chronological loop erasure, one step at a time.
///
/// Feeding the vertices of a walk through [`push`](Self::push) leaves
/// `path()` equal to `loop_erase` of the prefix seen so far, and the loops
/// returned by `push` are those recorded by [`loop_erase_with_history`], in
/// the same order.
#[derive(Debug, Clone)]
pub struct LoopErasure {
    path: Vec<usize>,
    /// `slot[x]` is the position of `x` on the current path, if any.
    slot: Vec<Option<usize>>,
}

impl LoopErasure {
    pub fn new(n_vertices: usize, start: usize) -> Self {
        let mut slot = vec![None; n_vertices];
        slot[start] = Some(0);
        LoopErasure { path: vec![start], slot }
    }

    pub fn push(&mut self, y: usize) -> Option<(usize, Vec<usize>)> {
        match self.slot[y] {
            Some(pos) => {
                let mut closed: Vec<usize> = self.path[pos..].to_vec();
                closed.push(y);
                for &x in &self.path[pos + 1..] {
                    self.slot[x] = None;
                }
                self.path.truncate(pos + 1);
                Some((pos, closed))
            }
            None => {
                self.slot[y] = Some(self.path.len());
                self.path.push(y);
                None
            }
        }
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    pub fn contains(&self, x: usize) -> bool {
        self.slot[x].is_some()
    }
}

/// Appends `y` to a loop-erased path, cutting back to `y` if it is already
/// on the path.
pub fn extend_erased(path: &[usize], y: usize) -> Vec<usize> {
    match path.iter().position(|&x| x == y) {
        Some(pos) => path[..=pos].to_vec(),
        None => {
            let mut next = path.to_vec();
            next.push(y);
            next
        }
    }
}

/// All self-avoiding walks from `from` to `to` along positive-weight edges,
/// in depth-first order.
pub fn self_avoiding_walks(g: &WeightedGraph, from: usize, to: usize) -> Vec<SelfAvoidingWalk> {
    fn dfs(g: &WeightedGraph, to: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Walk>) {
        let x = *path.last().unwrap();
        if x == to {
            out.push(Walk(path.clone()));
            return;
        }
        for &(y, _) in g.neighbours(x) {
            if !on[y] {
                on[y] = true;
                path.push(y);
                dfs(g, to, path, on, out);
                path.pop();
                on[y] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on = vec![false; g.len()];
    on[from] = true;
    dfs(g, to, &mut vec![from], &mut on, &mut out);
    out
}

/// Visits every walk starting at `start` with at most `max_len` vertices.
pub fn for_each_walk(g: &WeightedGraph, start: usize, max_len: usize, mut visit: impl FnMut(&[usize])) {
    fn dfs(g: &WeightedGraph, max_len: usize, walk: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        visit(walk);
        if walk.len() == max_len {
            return;
        }
        let x = *walk.last().unwrap();
        for &(y, _) in g.neighbours(x) {
            walk.push(y);
            dfs(g, max_len, walk, visit);
            walk.pop();
        }
    }
    if max_len == 0 {
        return;
    }
    dfs(g, max_len, &mut vec![start], &mut visit);
}

/// Every directed cycle of `g` (including 2-cycles on a single edge) whose
/// vertices all satisfy `allowed`.
pub fn directed_cycles(g: &WeightedGraph, allowed: impl Fn(usize) -> bool) -> Vec<DirectedCycle> {
    fn dfs(
        g: &WeightedGraph,
        root: usize,
        allowed: &dyn Fn(usize) -> bool,
        path: &mut Vec<usize>,
        on: &mut [bool],
        out: &mut Vec<DirectedCycle>,
    ) {
        let x = *path.last().unwrap();
        for &(y, _) in g.neighbours(x) {
            if y == root && path.len() >= 2 {
                out.push(DirectedCycle(path.clone()));
            } else if y > root && !on[y] && allowed(y) {
                on[y] = true;
                path.push(y);
                dfs(g, root, allowed, path, on, out);
                path.pop();
                on[y] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on = vec![false; g.len()];
    for root in (0..g.len()).filter(|&v| allowed(v)) {
        dfs(g, root, &allowed, &mut vec![root], &mut on, &mut out);
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_graphs::{k3, p3};

    fn w(g: &WeightedGraph, names: &[&str]) -> Walk {
        Walk::from_names(g, names).unwrap()
    }

    #[test]
    fn erase_one_loop_examples() {
        let g = p3();
        assert_eq!(erase_one_loop(&w(&g, &["a", "b", "c"])), w(&g, &["a", "b", "c"]));
        assert_eq!(erase_one_loop(&w(&g, &["a", "b", "a", "b", "c"])), w(&g, &["a", "b", "c"]));
        assert_eq!(erase_one_loop(&w(&g, &["a", "b", "a"])), w(&g, &["a"]));
    }

    #[test]
    fn loop_erase_examples() {
        let g = p3();
        assert_eq!(loop_erase(&w(&g, &["a"])), w(&g, &["a"]));
        assert_eq!(loop_erase(&w(&g, &["a", "b", "a", "b", "c"])), w(&g, &["a", "b", "c"]));
        assert_eq!(loop_erase(&w(&g, &["c", "b", "a"])), w(&g, &["c", "b", "a"]));
    }

    #[test]
    fn history_examples() {
        let g = p3();
        let (saw, hist) = loop_erase_with_history(&w(&g, &["a", "b", "c"]));
        assert_eq!(saw, w(&g, &["a", "b", "c"]));
        assert!(hist.is_empty());

        let (saw, hist) = loop_erase_with_history(&w(&g, &["a", "b", "a", "b", "c"]));
        assert_eq!(saw, w(&g, &["a", "b", "c"]));
        assert_eq!(hist.len(), 1);
        assert_eq!(hist[0].position, 0);
        assert_eq!(hist[0].cycle.display(&g), "(a,b,a)");

        let (saw, hist) = loop_erase_with_history(&w(&g, &["b", "c", "b", "a"]));
        assert_eq!(saw, w(&g, &["b", "a"]));
        assert_eq!(hist.len(), 1);
        assert_eq!(hist[0].position, 0);
        assert_eq!(hist[0].cycle.display(&g), "(b,c,b)");
    }

    #[test]
    fn cycle_canonical_form() {
        let c1 = DirectedCycle::from_rooted(&[2, 0, 1, 2]).unwrap();
        let c2 = DirectedCycle::from_rooted(&[0, 1, 2, 0]).unwrap();
        let c3 = DirectedCycle::from_rooted(&[0, 2, 1, 0]).unwrap();
        assert_eq!(c1, c2);
        assert_ne!(c2, c3);
        assert_eq!(c1.vertices(), &[0, 1, 2]);
        assert_eq!(DirectedCycle::from_rooted(&[1, 0, 1]).unwrap().vertices(), &[0, 1]);
        assert!(DirectedCycle::from_rooted(&[0, 1, 0, 1, 0]).is_err());
        assert_eq!(c3.rooted_at(1), Some(vec![1, 0, 2, 1]));
    }

    #[test]
    fn chronological_erasure_matches_iterated_l() {
        let g = k3();
        let n = g.len();
        for_each_walk(&g, 0, 9, |steps| {
            let walk = Walk(steps.to_vec());
            let (saw, hist) = loop_erase_with_history(&walk);
            let mut le = LoopErasure::new(n, steps[0]);
            let mut loops = Vec::new();
            for &y in &steps[1..] {
                if let Some((pos, closed)) = le.push(y) {
                    loops.push((pos, DirectedCycle::from_rooted(&closed).unwrap()));
                }
            }
            assert_eq!(le.path(), saw.steps());
            let expected: Vec<_> = hist.into_iter().map(|h| (h.position, h.cycle)).collect();
            assert_eq!(loops, expected);
        });
    }

    #[test]
    fn saws_and_cycles_on_k3() {
        let g = k3();
        let saws = self_avoiding_walks(&g, 0, 2);
        assert_eq!(saws.len(), 2);
        let cycles = directed_cycles(&g, |_| true);
        // three 2-cycles and two orientations of the triangle
        assert_eq!(cycles.len(), 5);
        let restricted = directed_cycles(&g, |v| v != 0);
        assert_eq!(restricted.len(), 1);
    }

    #[test]
    fn walk_validation() {
        let g = p3();
        assert!(Walk::from_names(&g, &["a", "c"]).is_err());
        assert!(Walk::new(vec![]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_walk() -> impl Strategy<Value = Walk> {
            (0usize..5, proptest::collection::vec(1usize..5, 0..30)).prop_map(|(start, hops)| {
                let mut steps = vec![start];
                for h in hops {
                    let last = *steps.last().unwrap();
                    steps.push((last + h) % 5);
                }
                Walk::new(steps).unwrap()
            })
        }

        proptest! {
            #[test]
            fn loop_erasure_is_idempotent(w in arb_walk()) {
                let once = loop_erase(&w);
                prop_assert!(once.is_self_avoiding());
                prop_assert_eq!(once.first(), w.first());
                prop_assert_eq!(once.last(), w.last());
                prop_assert_eq!(loop_erase(&once), once);
            }

            #[test]
            fn incremental_erasure_matches(w in arb_walk()) {
                let mut le = LoopErasure::new(5, w.first());
                for &y in &w.steps()[1..] {
                    le.push(y);
                }
                let erased = loop_erase(&w);
                prop_assert_eq!(le.path(), erased.steps());
            }
        }
    }
}
