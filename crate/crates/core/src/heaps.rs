//! Heaps of cycles and the walk <-> (self-avoiding walk, heap) bijection.
//!
//! A heap is stored as one of its linear extensions (a word of cycles, bottom
//! first); the order is recovered by stacking: a piece lies above every
//! earlier piece it shares a vertex with. Canonical form is the lex-minimal
//! linear extension, so heap equality is word equality.

use std::collections::BTreeSet;

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{StepWeightMatrix, WeightedGraph};
use crate::loop_model::{for_each_collection, mask_of, VertexSet};
use crate::rational::Rational;
use crate::series::TruncatedSeries;
use crate::walks::{directed_cycles, for_each_walk, loop_erase_with_history, DirectedCycle, SelfAvoidingWalk, Walk};

pub const MAX_DEGREE: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeapOfCycles {
    pieces: Vec<DirectedCycle>,
}

/// `less[i][j]`: piece `i` lies strictly below piece `j` in the stacking of
/// `word`.
fn stacking_order(word: &[DirectedCycle]) -> Vec<Vec<bool>> {
    let n = word.len();
    let masks: Vec<VertexSet> = word.iter().map(|c| mask_of(c.vertices())).collect();
    let mut less = vec![vec![false; n]; n];
    for j in 0..n {
        for i in 0..j {
            if masks[i] & masks[j] != 0 {
                less[i][j] = true;
            }
        }
        // close transitively through earlier pieces
        for i in (0..j).rev() {
            if less[i][j] {
                for k in 0..i {
                    if less[k][i] {
                        less[k][j] = true;
                    }
                }
            }
        }
    }
    less
}

impl HeapOfCycles {
    pub fn empty() -> Self {
        HeapOfCycles { pieces: Vec::new() }
    }

    /// Stacks the cycles of `word` in order, bottom first.
    pub fn from_word(word: Vec<DirectedCycle>) -> Self {
        let less = stacking_order(&word);
        // greedy lex-minimal linear extension
        let n = word.len();
        let mut placed = vec![false; n];
        let mut pieces = Vec::with_capacity(n);
        for _ in 0..n {
            let next = (0..n)
                .filter(|&j| !placed[j] && (0..n).all(|i| placed[i] || !less[i][j]))
                .min_by(|&i, &j| word[i].cmp(&word[j]))
                .unwrap();
            placed[next] = true;
            pieces.push(word[next].clone());
        }
        HeapOfCycles { pieces }
    }

    /// A trivial heap; errors if two of the cycles share a vertex.
    pub fn trivial(cycles: Vec<DirectedCycle>) -> Result<Self> {
        let h = Self::from_word(cycles);
        if !h.is_trivial() {
            return Err(Error::Invalid("cycles of a trivial heap must be vertex-disjoint".into()));
        }
        Ok(h)
    }

    /// The canonical word, bottom first.
    pub fn pieces(&self) -> &[DirectedCycle] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Total number of edges over all pieces (the series grading).
    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|c| c.len()).sum()
    }

    pub fn order(&self) -> Vec<Vec<bool>> {
        stacking_order(&self.pieces)
    }

    pub fn is_trivial(&self) -> bool {
        self.order().iter().all(|row| row.iter().all(|&b| !b))
    }

    pub fn maximal(&self) -> Vec<usize> {
        let less = self.order();
        (0..self.len()).filter(|&i| !less[i].iter().any(|&b| b)).collect()
    }

    pub fn minimal(&self) -> Vec<usize> {
        let less = self.order();
        (0..self.len()).filter(|&j| !(0..self.len()).any(|i| less[i][j])).collect()
    }

    pub fn weight(&self, q: &StepWeightMatrix) -> Rational {
        self.pieces.iter().fold(Rational::one(), |acc, c| acc * c.weight(q))
    }

    /// Whether every maximal piece meets `v` (membership in `H_V`).
    pub fn in_h(&self, v: VertexSet) -> bool {
        self.maximal().iter().all(|&i| mask_of(self.pieces[i].vertices()) & v != 0)
    }

    /// Checks the heap axioms on the stored order: a strict partial order in
    /// which intersecting pieces are comparable and covering pairs intersect.
    pub fn audit(&self) -> Result<()> {
        let less = self.order();
        let n = self.len();
        let masks: Vec<VertexSet> = self.pieces.iter().map(|c| mask_of(c.vertices())).collect();
        let bad = |m: &str| Err(Error::Invalid(format!("heap audit: {m}")));
        for i in 0..n {
            if less[i][i] {
                return bad("reflexive");
            }
            for j in 0..n {
                if less[i][j] && less[j][i] {
                    return bad("not antisymmetric");
                }
                for k in 0..n {
                    if less[i][j] && less[j][k] && !less[i][k] {
                        return bad("not transitive");
                    }
                }
                if i != j && masks[i] & masks[j] != 0 && !less[i][j] && !less[j][i] {
                    return bad("intersecting pieces are incomparable");
                }
                let covers = less[i][j] && !(0..n).any(|k| less[i][k] && less[k][j]);
                if covers && masks[i] & masks[j] == 0 {
                    return bad("covering pair does not intersect");
                }
            }
        }
        Ok(())
    }

    /// The pieces with indices in `keep`, as a heap with the induced order.
    fn restrict(&self, keep: &[bool]) -> Self {
        // a sub-word of a linear extension is a linear extension of the
        // induced order
        Self::from_word(
            self.pieces.iter().zip(keep).filter(|(_, &k)| k).map(|(c, _)| c.clone()).collect(),
        )
    }

    /// Indices of the pieces meeting `v` together with everything below them.
    fn down_closure(&self, v: VertexSet) -> Vec<bool> {
        let less = self.order();
        let n = self.len();
        let hit: Vec<bool> = self.pieces.iter().map(|c| mask_of(c.vertices()) & v != 0).collect();
        (0..n).map(|i| hit[i] || (0..n).any(|j| hit[j] && less[i][j])).collect()
    }
}

/// `L1 (.) L2`: `L2` placed on top of `L1`.
pub fn superpose(l1: &HeapOfCycles, l2: &HeapOfCycles) -> HeapOfCycles {
    HeapOfCycles::from_word(l1.pieces.iter().chain(&l2.pieces).cloned().collect())
}

/// Splits `L` in `H_{V1 u V2}` as `L1 (.) L2`: `L1` holds the pieces meeting
/// `V1` and everything below them, `L2` the rest. Then `L1` is in `H_{V1}`
/// and `L2` in `H_{V2}`.
pub fn split(l: &HeapOfCycles, v1: VertexSet, v2: VertexSet) -> Result<(HeapOfCycles, HeapOfCycles)> {
    if !l.in_h(v1 | v2) {
        return Err(Error::HeapNotCompatible("maximal piece misses V1 u V2".into()));
    }
    let lower = l.down_closure(v1);
    let upper: Vec<bool> = lower.iter().map(|b| !b).collect();
    Ok((l.restrict(&lower), l.restrict(&upper)))
}

/// The loop erasure of `w` and the heap of its erased loops, stacked in
/// erasure order.
pub fn decompose(w: &Walk) -> (SelfAvoidingWalk, HeapOfCycles) {
    let (gamma, history) = loop_erase_with_history(w);
    (gamma, HeapOfCycles::from_word(history.into_iter().map(|l| l.cycle).collect()))
}

/// The unique walk `w` with `decompose(w) == (gamma, h)`.
///
/// The heap splits along `gamma` into pieces `H_0 (.) H_1 (.) ..`, where
/// `H_i` is everything left that meets `gamma_i` or lies below such a piece;
/// `H_i` is replayed as a loop at `gamma_i`. A loop at `x` with heap `P` has
/// top piece `T` through `x`: it is the walk rebuilt from the path `T`
/// (rooted at `x`, closing step removed) with heap `P \ T`, then one step
/// back to `x`.
pub fn reconstruct(gamma: &SelfAvoidingWalk, h: &HeapOfCycles) -> Result<Walk> {
    if !gamma.is_self_avoiding() {
        return Err(Error::InvalidWalk("gamma is not self-avoiding".into()));
    }
    let mut out = Vec::new();
    replay(gamma.steps(), h, &mut out)?;
    Walk::new(out)
}

fn replay(path: &[usize], h: &HeapOfCycles, out: &mut Vec<usize>) -> Result<()> {
    let mut rest = h.clone();
    for &x in path {
        let part = rest.down_closure(1 << x);
        let loop_heap = rest.restrict(&part);
        rest = rest.restrict(&part.iter().map(|b| !b).collect::<Vec<_>>());
        replay_loop(x, &loop_heap, out)?;
    }
    if !rest.is_empty() {
        return Err(Error::HeapNotCompatible(format!("{} pieces do not reach the path", rest.len())));
    }
    Ok(())
}

fn replay_loop(x: usize, p: &HeapOfCycles, out: &mut Vec<usize>) -> Result<()> {
    if p.is_empty() {
        out.push(x);
        return Ok(());
    }
    // pieces through x form a chain; the top one is the last in the word
    let top = p.pieces.iter().rposition(|c| c.contains(x)).unwrap();
    let rooted = p.pieces[top].rooted_at(x).unwrap();
    let mut keep = vec![true; p.len()];
    keep[top] = false;
    replay(&rooted[..rooted.len() - 1], &p.restrict(&keep), out)?;
    out.push(x);
    Ok(())
}

/// Result of a degree-by-degree series comparison.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesCheck {
    pub degree: usize,
    pub first_mismatch: Option<usize>,
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
}

impl SeriesCheck {
    fn new(lhs: &TruncatedSeries, rhs: &TruncatedSeries) -> Self {
        let show = |s: &TruncatedSeries| s.coefficients().iter().map(crate::rational::format_rational).collect();
        SeriesCheck {
            degree: lhs.degree(),
            first_mismatch: lhs.first_mismatch(rhs),
            lhs: show(lhs),
            rhs: show(rhs),
        }
    }

    pub fn holds(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::Invalid(format!("truncation degree {n} exceeds {MAX_DEGREE}")));
    }
    Ok(())
}

/// `sum_{L in L_V} (-1)^|L| q(L) t^{deg L}` over trivial heaps avoiding `avoid`.
pub fn signed_trivial_series(g: &WeightedGraph, avoid: VertexSet, n: usize) -> TruncatedSeries {
    let q = g.step_matrix();
    let cycles: Vec<DirectedCycle> =
        directed_cycles(g, |x| avoid & (1 << x) == 0).into_iter().filter(|c| c.len() <= n).collect();
    let weights: Vec<Rational> = cycles.iter().map(|c| c.weight(&q)).collect();
    let mut s = TruncatedSeries::zero(n);
    for_each_collection(&cycles, |chosen| {
        let deg: usize = chosen.iter().map(|&k| cycles[k].len()).sum();
        let w = chosen.iter().fold(Rational::one(), |acc, &k| acc * &weights[k]);
        s.add_term(deg, &if chosen.len() % 2 == 0 { w } else { -w });
    });
    s
}

/// Every heap of cycles of `g` with total degree at most `n`, generated by
/// stacking one cycle at a time on top and deduplicating canonical forms.
pub fn all_heaps(g: &WeightedGraph, n: usize) -> Vec<HeapOfCycles> {
    let cycles: Vec<DirectedCycle> = directed_cycles(g, |_| true).into_iter().filter(|c| c.len() <= n).collect();
    let mut seen: BTreeSet<HeapOfCycles> = BTreeSet::new();
    seen.insert(HeapOfCycles::empty());
    let mut frontier = vec![HeapOfCycles::empty()];
    while !frontier.is_empty() {
        let next: BTreeSet<HeapOfCycles> = frontier
            .par_iter()
            .flat_map_iter(|h| {
                let d = h.degree();
                cycles.iter().filter(move |c| d + c.len() <= n).map(move |c| {
                    let mut word = h.pieces.clone();
                    word.push(c.clone());
                    HeapOfCycles::from_word(word)
                })
            })
            .collect();
        frontier = next.into_iter().filter(|h| seen.insert(h.clone())).collect();
    }
    seen.into_iter().collect()
}

/// Compares `sum_{L in H_V} q(L) t^{deg L}` (heaps generated directly)
/// with the ratio of signed trivial-heap sums `D_V / D` to degree `n`.
pub fn verify_heaps_ratio(g: &WeightedGraph, v: VertexSet, n: usize) -> Result<SeriesCheck> {
    check_degree(n)?;
    let q = g.step_matrix();
    let mut lhs = TruncatedSeries::zero(n);
    for h in all_heaps(g, n) {
        if h.in_h(v) {
            lhs.add_term(h.degree(), &h.weight(&q));
        }
    }
    let rhs = signed_trivial_series(g, v, n).div(&signed_trivial_series(g, 0, n))?;
    Ok(SeriesCheck::new(&lhs, &rhs))
}

/// Compares `sum_{LE(w) = gamma} q(w) t^|w|` (walk enumeration) with
/// `q(gamma) t^|gamma| D_gamma / D` to degree `n`.
pub fn verify_viennot(g: &WeightedGraph, gamma: &SelfAvoidingWalk, n: usize) -> Result<SeriesCheck> {
    check_degree(n)?;
    if !gamma.is_self_avoiding() {
        return Err(Error::InvalidWalk("gamma is not self-avoiding".into()));
    }
    let q = g.step_matrix();
    let mut lhs = TruncatedSeries::zero(n);
    for_each_walk(g, gamma.first(), n + 1, |w| {
        if w.last() == Some(&gamma.last()) {
            let walk = Walk::new(w.to_vec()).unwrap();
            if crate::walks::loop_erase(&walk) == *gamma {
                lhs.add_term(w.len() - 1, &walk.weight(&q));
            }
        }
    });
    let steps = gamma.len() - 1;
    let head = TruncatedSeries::monomial(n, steps, gamma.weight(&q));
    let ratio = signed_trivial_series(g, mask_of(gamma.steps()), n).div(&signed_trivial_series(g, 0, n))?;
    Ok(SeriesCheck::new(&lhs, &(&head * &ratio)))
}

/// Summary of the exhaustive bijection check over walks with at most
/// `max_steps` steps.
#[derive(Debug, Clone, Serialize)]
pub struct BijectionReport {
    pub walks: usize,
    pub round_trip_failures: usize,
    pub weight_failures: usize,
    pub collisions: usize,
    pub audit_failures: usize,
    pub outside_h_gamma: usize,
}

impl BijectionReport {
    pub fn holds(&self) -> bool {
        self.round_trip_failures + self.weight_failures + self.collisions + self.audit_failures + self.outside_h_gamma
            == 0
    }
}

pub fn verify_bijection(g: &WeightedGraph, max_steps: usize) -> BijectionReport {
    let q = g.step_matrix();
    let per_start: Vec<(BijectionReport, Vec<(Walk, HeapOfCycles)>)> = (0..g.len())
        .into_par_iter()
        .map(|start| {
            let mut r = BijectionReport {
                walks: 0,
                round_trip_failures: 0,
                weight_failures: 0,
                collisions: 0,
                audit_failures: 0,
                outside_h_gamma: 0,
            };
            let mut images = Vec::new();
            for_each_walk(g, start, max_steps + 1, |steps| {
                let w = Walk::new(steps.to_vec()).unwrap();
                let (gamma, h) = decompose(&w);
                r.walks += 1;
                if reconstruct(&gamma, &h).ok().as_ref() != Some(&w) {
                    r.round_trip_failures += 1;
                }
                if w.weight(&q) != gamma.weight(&q) * h.weight(&q) {
                    r.weight_failures += 1;
                }
                if h.audit().is_err() {
                    r.audit_failures += 1;
                }
                if !h.in_h(mask_of(gamma.steps())) {
                    r.outside_h_gamma += 1;
                }
                images.push((gamma, h));
            });
            (r, images)
        })
        .collect();
    let mut total = BijectionReport {
        walks: 0,
        round_trip_failures: 0,
        weight_failures: 0,
        collisions: 0,
        audit_failures: 0,
        outside_h_gamma: 0,
    };
    let mut distinct = BTreeSet::new();
    for (r, images) in per_start {
        total.walks += r.walks;
        total.round_trip_failures += r.round_trip_failures;
        total.weight_failures += r.weight_failures;
        total.audit_failures += r.audit_failures;
        total.outside_h_gamma += r.outside_h_gamma;
        distinct.extend(images);
    }
    total.collisions = total.walks - distinct.len();
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::test_graphs::{k3, p3};
    use proptest::prelude::*;

    fn cyc(v: &[usize]) -> DirectedCycle {
        DirectedCycle::from_rooted(v).unwrap()
    }

    fn walk(v: &[usize]) -> Walk {
        Walk::new(v.to_vec()).unwrap()
    }

    #[test]
    fn decompose_examples() {
        let (g, h) = decompose(&walk(&[0, 1, 2]));
        assert_eq!(g, walk(&[0, 1, 2]));
        assert!(h.is_empty());

        let (g, h) = decompose(&walk(&[0, 1, 0, 1, 2]));
        assert_eq!(g, walk(&[0, 1, 2]));
        assert_eq!(h.pieces(), &[cyc(&[0, 1, 0])]);

        let (g, h) = decompose(&walk(&[0, 1, 0, 1, 0, 1, 2]));
        assert_eq!(g, walk(&[0, 1, 2]));
        assert_eq!(h.len(), 2);
        assert!(h.order()[0][1]);
    }

    #[test]
    fn reconstruct_examples() {
        let gamma = walk(&[0, 1, 2]);
        assert_eq!(reconstruct(&gamma, &HeapOfCycles::empty()).unwrap(), gamma);
        let h = HeapOfCycles::from_word(vec![cyc(&[0, 1, 0])]);
        assert_eq!(reconstruct(&gamma, &h).unwrap(), walk(&[0, 1, 0, 1, 2]));
        // a heap whose top misses gamma is rejected
        let off = HeapOfCycles::from_word(vec![cyc(&[1, 2, 1])]);
        assert!(matches!(reconstruct(&walk(&[0]), &off), Err(Error::HeapNotCompatible(_))));
    }

    #[test]
    fn bijection_on_p3_and_k3() {
        for g in [p3(), k3()] {
            let r = verify_bijection(&g, 10);
            assert!(r.holds(), "{r:?}");
        }
        // 3 starts, 2 choices per step on K3
        assert_eq!(verify_bijection(&k3(), 10).walks, 3 * ((1 << 11) - 1));
    }

    #[test]
    fn superposition_unit_and_disjoint() {
        let g = k3();
        let heaps = all_heaps(&g, 6);
        let e = HeapOfCycles::empty();
        for l in &heaps {
            assert_eq!(&superpose(l, &e), l);
            assert_eq!(&superpose(&e, l), l);
        }
        let a = HeapOfCycles::from_word(vec![cyc(&[0, 1, 0])]);
        let b = HeapOfCycles::trivial(vec![cyc(&[2, 3, 2])]).unwrap();
        let ab = superpose(&a, &b);
        assert!(ab.is_trivial());
        assert_eq!(ab, superpose(&b, &a));
        assert!(HeapOfCycles::trivial(vec![cyc(&[0, 1, 0]), cyc(&[1, 2, 1])]).is_err());
    }

    #[test]
    fn superposition_associative_and_multiplicative() {
        let g = k3();
        let q = g.step_matrix();
        let heaps: Vec<HeapOfCycles> = all_heaps(&g, 6).into_iter().filter(|h| h.degree() <= 4).collect();
        for x in &heaps {
            for y in &heaps {
                let xy = superpose(x, y);
                assert_eq!(xy.weight(&q), x.weight(&q) * y.weight(&q));
                for z in &heaps {
                    assert_eq!(superpose(&xy, z), superpose(x, &superpose(y, z)));
                }
            }
        }
    }

    #[test]
    fn split_recovers_heap() {
        let g = k3();
        let all = all_heaps(&g, 8);
        let (v1, v2) = (1 << 0, (1 << 1) | (1 << 2));
        for l in all.iter().filter(|l| l.in_h(v1 | v2)) {
            let (l1, l2) = split(l, v1, v2).unwrap();
            assert!(l1.in_h(v1) && l2.in_h(v2));
            assert_eq!(&superpose(&l1, &l2), l);
        }
    }

    #[test]
    fn every_generated_heap_is_a_heap() {
        for h in all_heaps(&k3(), 8) {
            h.audit().unwrap();
        }
    }

    #[test]
    fn viennot_identities() {
        let g = p3();
        assert!(verify_viennot(&g, &walk(&[0, 1, 2]), 10).unwrap().holds());
        let g = k3();
        for gamma in crate::walks::self_avoiding_walks(&g, 0, 2) {
            let check = verify_viennot(&g, &gamma, 10).unwrap();
            assert!(check.holds(), "{gamma:?}: {:?}", check.first_mismatch);
            for k in 0..gamma.len() - 1 {
                assert_eq!(check.lhs[k], "0");
            }
        }
    }

    #[test]
    fn heaps_ratio_identities() {
        let check = verify_heaps_ratio(&p3(), 0, 8).unwrap();
        assert!(check.holds());
        assert_eq!(check.lhs[0], "1");
        assert!(check.lhs[1..].iter().all(|c| c == "0"));
        assert!(verify_heaps_ratio(&p3(), 1 << 1, 8).unwrap().holds());
        assert!(verify_heaps_ratio(&k3(), 0b111, 8).unwrap().holds());
        assert!(verify_heaps_ratio(&k3(), 17, 30).is_err());
    }

    #[test]
    fn trivial_series_constant_term() {
        assert_eq!(signed_trivial_series(&k3(), 0, 4).coefficient(0), &int(1));
    }

    proptest! {
        #[test]
        fn canonical_form_ignores_commuting_order(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
            // four 2-cycles on the edges of a 4-vertex star: all share the hub
            // except none; use two disjoint pairs so some swaps commute
            let word = [cyc(&[0, 1, 0]), cyc(&[2, 3, 2]), cyc(&[4, 5, 4]), cyc(&[6, 7, 6])];
            let shuffled: Vec<DirectedCycle> = perm.iter().map(|&i| word[i].clone()).collect();
            prop_assert_eq!(HeapOfCycles::from_word(shuffled), HeapOfCycles::from_word(word.to_vec()));
        }

        #[test]
        fn decompose_reconstruct_on_random_k3_walks(steps in proptest::collection::vec(0usize..2, 0..14), start in 0usize..3) {
            let g = k3();
            let mut v = vec![start];
            for s in steps {
                let x = *v.last().unwrap();
                v.push(g.neighbours(x)[s].0);
            }
            let w = walk(&v);
            let (gamma, h) = decompose(&w);
            prop_assert_eq!(reconstruct(&gamma, &h).unwrap(), w);
        }
    }
}
