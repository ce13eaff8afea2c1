//! Exact loop-erased random walk probabilities for the killed walk.
//!
//! The walk jumps from `x` to `y` with probability `q_xy = beta_xy / r_x` and
//! to the cemetery with probability `m^2_x / r_x`. Probabilities are exact
//! rationals, bracketed by the survival mass of the unexplored tail.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{identity_minus, solve};
use crate::rational::{serde_string, to_f64, Rational};
use crate::walks::{extend_erased, for_each_walk, loop_erase, Walk};

/// Cap on distinct loop-erasure states kept by the exact propagation.
pub const MAX_STATES: usize = 2_000_000;

/// A closed interval `[lower, upper]` inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityInterval {
    #[serde(with = "serde_string")]
    pub lower: Rational,
    #[serde(with = "serde_string")]
    pub upper: Rational,
}

impl ProbabilityInterval {
    pub fn new(lower: Rational, upper: Rational) -> Self {
        debug_assert!(lower <= upper);
        ProbabilityInterval { lower, upper }
    }

    /// `lower + [0, tail]`, clipped to 1.
    pub fn with_tail(lower: Rational, tail: Rational) -> Self {
        let upper = (&lower + tail).min(Rational::one());
        Self::new(lower, upper)
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    pub fn is_within(&self, other: &ProbabilityInterval) -> bool {
        other.lower <= self.lower && self.upper <= other.upper
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lower + &self.upper) / Rational::from_integer(2.into())
    }

    pub fn midpoint_f64(&self) -> f64 {
        to_f64(&self.midpoint())
    }
}

/// Law of `(LE, exit vertex)` for walks with at most `n` vertices, plus the
/// survival mass of everything longer.
#[derive(Debug, Clone)]
pub struct LerwDistribution {
    pub start: usize,
    pub max_vertices: usize,
    /// Final loop-erased path (ending at the exit vertex) → probability.
    pub paths: BTreeMap<Vec<usize>, Rational>,
    /// `sum_y (q^n)_{start, y}`.
    pub tail: Rational,
}

impl LerwDistribution {
    /// `P[b in LE and exit = c]`, bracketed.
    pub fn one_point(&self, b: usize, c: usize) -> ProbabilityInterval {
        let mass = self
            .paths
            .iter()
            .filter(|(p, _)| p.last() == Some(&c) && p.contains(&b))
            .fold(Rational::zero(), |acc, (_, m)| acc + m);
        ProbabilityInterval::with_tail(mass, self.tail.clone())
    }

    /// `P[exit = c]`, bracketed.
    pub fn exit(&self, c: usize) -> ProbabilityInterval {
        let mass = self
            .paths
            .iter()
            .filter(|(p, _)| p.last() == Some(&c))
            .fold(Rational::zero(), |acc, (_, m)| acc + m);
        ProbabilityInterval::with_tail(mass, self.tail.clone())
    }

    pub fn accounted(&self) -> Rational {
        self.paths.values().fold(Rational::zero(), |acc, m| acc + m)
    }
}

/// Propagates the walk from `a` for `n - 1` steps, tracking the chronological
/// loop erasure of each prefix. Since the erasure of a prefix determines the
/// erasure of every extension, walks sharing an erased path are merged and
/// only their total mass is carried.
pub fn lerw_distribution(g: &WeightedGraph, a: usize, n: usize) -> Result<LerwDistribution> {
    g.require_absorption()?;
    if a >= g.len() {
        return Err(Error::Invalid("start vertex out of range".into()));
    }
    if n == 0 {
        return Err(Error::Invalid("walk length bound must be positive".into()));
    }
    let q = g.step_matrix();
    let mut paths: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    let mut states: HashMap<Vec<usize>, Rational> = HashMap::new();
    states.insert(vec![a], Rational::one());
    for len in 1..=n {
        for (path, mass) in &states {
            let x = *path.last().unwrap();
            let death = q.death(x);
            if !death.is_zero() {
                *paths.entry(path.clone()).or_insert_with(Rational::zero) += mass * death;
            }
        }
        if len == n {
            break;
        }
        let mut next: HashMap<Vec<usize>, Rational> = HashMap::with_capacity(states.len());
        for (path, mass) in &states {
            let x = *path.last().unwrap();
            for (y, qxy) in q.row(x) {
                *next.entry(extend_erased(path, *y)).or_insert_with(Rational::zero) += mass * qxy;
            }
        }
        if next.len() > MAX_STATES {
            return Err(Error::TooLarge { method: "lerw_exact", vertices: g.len(), limit: MAX_STATES });
        }
        states = next;
    }
    Ok(LerwDistribution { start: a, max_vertices: n, paths, tail: survival_mass(g, a, n) })
}

/// `sum_y (q^n)_{a,y}`: probability the walk from `a` survives `n` steps.
pub fn survival_mass(g: &WeightedGraph, a: usize, n: usize) -> Rational {
    let q = g.step_matrix();
    let mut v = vec![Rational::zero(); g.len()];
    v[a] = Rational::one();
    for _ in 0..n {
        let mut next = vec![Rational::zero(); g.len()];
        for (x, mass) in v.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            for (y, qxy) in q.row(x) {
                next[*y] += mass * qxy;
            }
        }
        v = next;
    }
    v.into_iter().fold(Rational::zero(), |acc, m| acc + m)
}

fn check_triple(g: &WeightedGraph, a: usize, b: usize, c: usize) -> Result<()> {
    g.require_absorption()?;
    if a == b || b == c || a == c {
        return Err(Error::NotDistinct);
    }
    if a.max(b).max(c) >= g.len() {
        return Err(Error::Invalid("vertex index out of range".into()));
    }
    Ok(())
}

/// Bracket for `P_a[b in LE((X_k)_{k < h}) and X_{h-1} = c]` from walks with
/// at most `n` vertices.
pub fn lerw_exact(g: &WeightedGraph, a: usize, b: usize, c: usize, n: usize) -> Result<ProbabilityInterval> {
    check_triple(g, a, b, c)?;
    Ok(lerw_distribution(g, a, n)?.one_point(b, c))
}

/// The same bracket by explicit depth-first enumeration of every walk with
/// at most `n` vertices. Exponential in `n`; kept as an independent check.
pub fn lerw_enumerate(g: &WeightedGraph, a: usize, b: usize, c: usize, n: usize) -> Result<ProbabilityInterval> {
    check_triple(g, a, b, c)?;
    let q = g.step_matrix();
    let death = q.death(c).clone();
    let mut total = Rational::zero();
    for_each_walk(g, a, n, |steps| {
        if *steps.last().unwrap() != c {
            return;
        }
        let walk = Walk::new(steps.to_vec()).unwrap();
        if loop_erase(&walk).contains(b) {
            total += walk.weight(&q) * &death;
        }
    });
    Ok(ProbabilityInterval::with_tail(total, survival_mass(g, a, n)))
}

/// `G = (I - q)^{-1}`, row by row; `G_xy` is the expected number of visits
/// to `y` before absorption, starting from `x`.
pub fn green_row(g: &WeightedGraph, a: usize) -> Result<Vec<Rational>> {
    g.require_absorption()?;
    let m = identity_minus(&g.step_matrix().to_dense());
    // row a of G solves G^T e... i.e. (I - q)^T x = e_a
    let n = g.len();
    let transposed: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| m[j][i].clone()).collect()).collect();
    let mut e = vec![Rational::zero(); n];
    e[a] = Rational::one();
    solve(&transposed, &e)
}

/// `P_a[X_{h-1} = c] = G_ac m^2_c / r_c` for every `c`.
pub fn exit_distribution(g: &WeightedGraph, a: usize) -> Result<Vec<Rational>> {
    let q = g.step_matrix();
    Ok(green_row(g, a)?.into_iter().enumerate().map(|(c, gac)| gac * q.death(c)).collect())
}

/// `E_v[h]`, the expected number of vertices visited (with multiplicity)
/// before absorption, for every start `v`: `(I - q)^{-1} 1`.
pub fn expected_absorption_times(g: &WeightedGraph) -> Result<Vec<Rational>> {
    g.require_absorption()?;
    let m = identity_minus(&g.step_matrix().to_dense());
    solve(&m, &vec![Rational::one(); g.len()])
}

/// `max_v E_v[h^-]` with `h^- = h - 1` the last time before absorption.
pub fn expected_steps_bound(g: &WeightedGraph) -> Result<Rational> {
    let times = expected_absorption_times(g)?;
    Ok(times.into_iter().max().unwrap() - Rational::one())
}

/// Cap on loop-erasure states for the absorbing-chain solvers.
pub const MAX_CHAIN_STATES: usize = 20_000;

/// An absorbing chain on chronological loop-erasure states. A state is the
/// current erased path; its last vertex is the walker's position.
///
/// `step(x)` lists `(y, p)` moves that stay in the chain; `exit(path, x)`
/// is the probability of leaving the chain from `x` times the indicator of
/// the event being measured. Returns the event probability from `[a]`.
fn solve_erasure_chain(
    g: &WeightedGraph,
    a: usize,
    step: impl Fn(usize) -> Vec<(usize, Rational)>,
    exit: impl Fn(&[usize]) -> Rational,
) -> Result<Rational> {
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut states: Vec<Vec<usize>> = vec![vec![a]];
    index.insert(vec![a], 0);
    let mut moves: Vec<Vec<(usize, Rational)>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let x = *states[i].last().unwrap();
        let mut row = Vec::new();
        for (y, p) in step(x) {
            let next = extend_erased(&states[i], y);
            let t = match index.get(&next) {
                Some(&t) => t,
                None => {
                    if states.len() >= MAX_CHAIN_STATES {
                        return Err(Error::TooLarge { method: "erasure_chain", vertices: g.len(), limit: MAX_CHAIN_STATES });
                    }
                    index.insert(next.clone(), states.len());
                    states.push(next);
                    states.len() - 1
                }
            };
            row.push((t, p));
        }
        moves.push(row);
        i += 1;
    }
    // x_s - sum_t p(s, t) x_t = exit(s)
    let n = states.len();
    let mut m = vec![vec![Rational::zero(); n]; n];
    let mut rhs = Vec::with_capacity(n);
    for (s, row) in moves.into_iter().enumerate() {
        m[s][s] += Rational::one();
        for (t, p) in row {
            m[s][t] -= p;
        }
        rhs.push(exit(&states[s]));
    }
    Ok(solve(&m, &rhs)?[0].clone())
}

/// `P_a[b in LE((X_k)_{k < h}) and X_{h-1} = c]` exactly, by solving the
/// absorbing chain on loop-erasure states. Independent of the truncated
/// bracket of [`lerw_exact`].
pub fn lerw_probability(g: &WeightedGraph, a: usize, b: usize, c: usize) -> Result<Rational> {
    check_triple(g, a, b, c)?;
    let q = g.step_matrix();
    solve_erasure_chain(
        g,
        a,
        |x| q.row(x).to_vec(),
        |path| {
            if *path.last().unwrap() == c && path.contains(&b) {
                q.death(c).clone()
            } else {
                Rational::zero()
            }
        },
    )
}

/// `P_a[b in LE(X_0..X_T)]` for the walk without killing (steps
/// `beta_xy / sum_z beta_xz`) stopped at the first time `T` it reaches
/// `boundary`.
pub fn stopped_walk_probability(g: &WeightedGraph, boundary: &[bool], a: usize, b: usize) -> Result<Rational> {
    if boundary.len() != g.len() {
        return Err(Error::Invalid("boundary mask has the wrong length".into()));
    }
    if boundary[a] {
        return Err(Error::Invalid("start vertex lies on the boundary".into()));
    }
    let hop = |x: usize| -> Vec<(usize, Rational)> {
        let degree = g.neighbours(x).iter().fold(Rational::zero(), |acc, (_, w)| acc + w);
        g.neighbours(x).iter().map(|(y, w)| (*y, w / &degree)).collect()
    };
    solve_erasure_chain(
        g,
        a,
        |x| hop(x).into_iter().filter(|(y, _)| !boundary[*y]).collect(),
        |path| {
            let x = *path.last().unwrap();
            hop(x)
                .into_iter()
                .filter(|(y, _)| boundary[*y] && (*y == b || path.contains(&b)))
                .fold(Rational::zero(), |acc, (_, p)| acc + p)
        },
    )
}
