//! Euclidean balls in `Z^d` with nearest-neighbour edges.
//!
//! `B_R = {x : |x|^2 <= R^2}`; the boundary is the inner vertex boundary,
//! i.e. ball vertices with a lattice neighbour outside the ball.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::actions::c_bc_prime;
use crate::lerw::stopped_walk_probability;
use crate::loop_model::{gamma_prime, z_cycle_sum, Method};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rational::{abs, serde_string, to_f64, Rational};

pub type Point = [i32; 3];

#[derive(Debug, Clone)]
pub struct Ball {
    pub dimension: usize,
    pub radius: u32,
    points: Vec<Point>,
    index: HashMap<Point, usize>,
    boundary: Vec<bool>,
    neighbours: Vec<Vec<usize>>,
}

impl Ball {
    pub fn new(dimension: usize, radius: u32) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::Invalid(format!("dimension {dimension} not in 1..=3")));
        }
        if radius == 0 {
            return Err(Error::Invalid("radius must be positive".into()));
        }
        let r = radius as i32;
        let span = |k: usize| if k < dimension { -r..=r } else { 0..=0 };
        let inside = |p: &Point| p.iter().map(|c| (c * c) as i64).sum::<i64>() <= (r as i64) * (r as i64);
        let mut points = Vec::new();
        for x in span(0) {
            for y in span(1) {
                for z in span(2) {
                    let p = [x, y, z];
                    if inside(&p) {
                        points.push(p);
                    }
                }
            }
        }
        let index: HashMap<Point, usize> = points.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut boundary = vec![false; points.len()];
        let mut neighbours = vec![Vec::new(); points.len()];
        for (i, p) in points.iter().enumerate() {
            for k in 0..dimension {
                for s in [-1, 1] {
                    let mut q = *p;
                    q[k] += s;
                    match index.get(&q) {
                        Some(&j) => neighbours[i].push(j),
                        None => boundary[i] = true,
                    }
                }
            }
        }
        Ok(Ball { dimension, radius, points, index, boundary, neighbours })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn index_of(&self, p: Point) -> Result<usize> {
        self.index.get(&p).copied().ok_or_else(|| Error::UnknownVertex(format!("{p:?}")))
    }

    /// `(k, 0, ..)`: the point at distance `k` along the first axis.
    pub fn on_axis(&self, k: i32) -> Result<usize> {
        self.index_of([k, 0, 0])
    }

    pub fn origin(&self) -> usize {
        self.index[&[0, 0, 0]]
    }

    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.boundary[i]).collect()
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.neighbours[i]
    }

    pub fn name(&self, i: usize) -> String {
        let p = self.points[i];
        p[..self.dimension].iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Unit weights on ball edges, killing `m2` on the boundary and 0 inside.
    pub fn to_graph(&self, m2: &Rational) -> Result<WeightedGraph> {
        if *m2 <= Rational::zero() {
            return Err(Error::Invalid("boundary killing must be positive".into()));
        }
        let names: Vec<String> = (0..self.len()).map(|i| self.name(i)).collect();
        let mut edges = Vec::new();
        for i in 0..self.len() {
            for &j in &self.neighbours[i] {
                if i < j {
                    edges.push((names[i].clone(), names[j].clone(), Rational::one()));
                }
            }
        }
        let kills: Vec<(String, Rational)> =
            self.boundary_vertices().into_iter().map(|i| (names[i].clone(), m2.clone())).collect();
        let edges: Vec<(&str, &str, Rational)> =
            edges.iter().map(|(x, y, w)| (x.as_str(), y.as_str(), w.clone())).collect();
        let kills: Vec<(&str, Rational)> = kills.iter().map(|(x, w)| (x.as_str(), w.clone())).collect();
        WeightedGraph::from_parts(&names, &edges, &kills)
    }
}

/// One schedule entry of the limit experiment.
#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    #[serde(with = "serde_string")]
    pub m2: Rational,
    /// `sum_{c in boundary} U'_{m2}(a, b, c)`, through the loop model.
    #[serde(with = "serde_string")]
    pub sum_uprime: Rational,
    #[serde(with = "serde_string")]
    pub error: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub a: String,
    pub b: String,
    /// `P_a[b in LE]` for the walk stopped at the boundary.
    #[serde(with = "serde_string")]
    pub target: Rational,
    pub rows: Vec<LimitRow>,
    /// `error_k / error_{k+1}`; `None` when the later error is zero.
    pub ratios: Vec<Option<f64>>,
}

/// Compares `sum_c U'_{m2}(a,b,c)` with its `m2 -> infinity` limit, the
/// stopped-walk one-point probability, for each `m2` in `schedule`.
pub fn limit_run(ball: &Ball, a: usize, b: usize, schedule: &[Rational]) -> Result<LimitReport> {
    if a == b {
        return Err(Error::NotDistinct);
    }
    if ball.boundary[a] || ball.boundary[b] {
        return Err(Error::Invalid("a and b must be interior vertices of the ball".into()));
    }
    let first = ball.to_graph(&Rational::one())?;
    let target = stopped_walk_probability(&first, &ball.boundary, a, b)?;
    let mut rows = Vec::new();
    for m2 in schedule {
        let g = ball.to_graph(m2)?;
        let z = z_cycle_sum(&g, Method::Determinant)?;
        let mut sum = Rational::zero();
        for c in ball.boundary_vertices() {
            sum += c_bc_prime(&g, b, c) * gamma_prime(&g, a, b, c, Method::Determinant)? / &z;
        }
        rows.push(LimitRow { m2: m2.clone(), error: abs(&(&sum - &target)), sum_uprime: sum });
    }
    let ratios = rows
        .windows(2)
        .map(|w| if w[1].error.is_zero() { None } else { Some(to_f64(&(&w[0].error / &w[1].error))) })
        .collect();
    Ok(LimitReport { a: ball.name(a), b: ball.name(b), target, rows, ratios })
}
