//! Weighted graphs with killing rates, and the substochastic step weights
//! `q_xy = beta_xy / r_x` derived from them.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

/// JSON graph description: vertices in canonical order, undirected edges
/// with string-rational `beta`, and optional per-vertex killing rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeDocument>,
    #[serde(default)]
    pub kill: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDocument {
    pub u: String,
    pub v: String,
    pub beta: String,
}

/// A finite graph with symmetric edge weights `beta` and killing rates `m^2`.
///
/// Vertex indices are dense, `0..n`, in the order the vertices were listed.
/// That order is the canonical generator and matrix order everywhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    /// Positive-weight neighbours of each vertex, sorted by index.
    adjacency: Vec<Vec<(usize, Rational)>>,
    kill: Vec<Rational>,
    mass: Vec<Rational>,
}

impl WeightedGraph {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_document(&doc)
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self> {
        let mut edges = Vec::with_capacity(doc.edges.len());
        for e in &doc.edges {
            edges.push((e.u.as_str(), e.v.as_str(), parse_rational(&e.beta)?));
        }
        let mut kill = Vec::with_capacity(doc.kill.len());
        for (v, m2) in &doc.kill {
            kill.push((v.as_str(), parse_rational(m2)?));
        }
        Self::from_parts(&doc.vertices, &edges, &kill)
    }

    /// Builds and validates a graph. Edges may be listed in either or both
    /// orientations; both listings must agree. Zero-weight edges are dropped.
    pub fn from_parts<S: AsRef<str>>(
        vertices: &[S],
        edges: &[(&str, &str, Rational)],
        kill: &[(&str, Rational)],
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Malformed("no vertices".into()));
        }
        let names: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Malformed(format!("duplicate vertex '{name}'")));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(name.to_string()))
        };

        let n = names.len();
        let mut beta: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (u, v, w) in edges {
            let (x, y) = (lookup(u)?, lookup(v)?);
            if w.is_negative() {
                return Err(Error::NegativeWeight(format!("beta_{u}{v} = {}", format_rational(w))));
            }
            if x == y {
                if w.is_zero() {
                    continue;
                }
                return Err(Error::SelfLoop(u.to_string()));
            }
            for key in [(x, y), (y, x)] {
                match beta.get(&key) {
                    Some(existing) if existing != w => {
                        return Err(Error::Asymmetric(u.to_string(), v.to_string()))
                    }
                    _ => {
                        beta.insert(key, w.clone());
                    }
                }
            }
        }

        let mut kill_rates = vec![Rational::zero(); n];
        for (v, m2) in kill {
            if m2.is_negative() {
                return Err(Error::NegativeWeight(format!("m^2_{v} = {}", format_rational(m2))));
            }
            kill_rates[lookup(v)?] = m2.clone();
        }

        let mut adjacency = vec![Vec::new(); n];
        for ((x, y), w) in beta {
            if w.is_positive() {
                adjacency[x].push((y, w));
            }
        }
        let mass = (0..n)
            .map(|x| {
                adjacency[x]
                    .iter()
                    .fold(kill_rates[x].clone(), |acc, (_, w)| acc + w)
            })
            .collect();

        let graph = WeightedGraph { names, index, adjacency, kill: kill_rates, mass };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(v) => Err(Error::Disconnected(self.names[v].clone(), self.names[0].clone())),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn neighbours(&self, x: usize) -> &[(usize, Rational)] {
        &self.adjacency[x]
    }

    pub fn beta(&self, x: usize, y: usize) -> Rational {
        match self.adjacency[x].binary_search_by_key(&y, |(v, _)| *v) {
            Ok(pos) => self.adjacency[x][pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        self.adjacency[x].binary_search_by_key(&y, |(v, _)| *v).is_ok()
    }

    /// Killing rate `m^2_x`.
    pub fn kill(&self, x: usize) -> &Rational {
        &self.kill[x]
    }

    /// Vertex mass `r_x = m^2_x + sum_y beta_xy`.
    pub fn mass(&self, x: usize) -> &Rational {
        &self.mass[x]
    }

    pub fn has_absorption(&self) -> bool {
        self.kill.iter().any(|m| m.is_positive())
    }

    pub fn require_absorption(&self) -> Result<()> {
        if self.has_absorption() {
            Ok(())
        } else {
            Err(Error::NoAbsorption)
        }
    }

    /// Unordered positive-weight edges `(x, y)` with `x < y`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(x, row)| {
            row.iter().filter(move |(y, _)| x < *y).map(move |(y, w)| (x, *y, w))
        })
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self.names.clone(),
            edges: self
                .edges()
                .map(|(x, y, w)| EdgeDocument {
                    u: self.names[x].clone(),
                    v: self.names[y].clone(),
                    beta: format_rational(w),
                })
                .collect(),
            kill: self
                .kill
                .iter()
                .enumerate()
                .filter(|(_, m)| !m.is_zero())
                .map(|(x, m)| (self.names[x].clone(), format_rational(m)))
                .collect(),
        }
    }

    /// Same labelled graph with the vertex list reordered.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let names: Vec<&str> = order.iter().map(|&x| self.names[x].as_str()).collect();
        let edges: Vec<(&str, &str, Rational)> = self
            .edges()
            .map(|(x, y, w)| (self.names[x].as_str(), self.names[y].as_str(), w.clone()))
            .collect();
        let kill: Vec<(&str, Rational)> = (0..self.len())
            .map(|x| (self.names[x].as_str(), self.kill[x].clone()))
            .collect();
        Self::from_parts(&names, &edges, &kill)
    }

    /// Copy of the graph with the killing rate at `x` replaced.
    pub fn with_kill(&self, x: usize, m2: Rational) -> Result<Self> {
        let mut kill: Vec<(&str, Rational)> = (0..self.len())
            .map(|v| (self.names[v].as_str(), self.kill[v].clone()))
            .collect();
        kill[x].1 = m2;
        let edges: Vec<(&str, &str, Rational)> = self
            .edges()
            .map(|(x, y, w)| (self.names[x].as_str(), self.names[y].as_str(), w.clone()))
            .collect();
        Self::from_parts(&self.names, &edges, &kill)
    }

    pub fn step_matrix(&self) -> StepWeightMatrix {
        let rows = (0..self.len())
            .map(|x| {
                self.adjacency[x]
                    .iter()
                    .map(|(y, w)| (*y, w / &self.mass[x]))
                    .collect()
            })
            .collect();
        let death = (0..self.len())
            .map(|x| {
                if self.mass[x].is_zero() {
                    Rational::one()
                } else {
                    &self.kill[x] / &self.mass[x]
                }
            })
            .collect();
        StepWeightMatrix { rows, death }
    }
}

/// `q_xy = beta_xy / r_x`, stored sparsely by row.
#[derive(Debug, Clone, PartialEq)]
pub struct StepWeightMatrix {
    rows: Vec<Vec<(usize, Rational)>>,
    death: Vec<Rational>,
}

impl StepWeightMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, x: usize) -> &[(usize, Rational)] {
        &self.rows[x]
    }

    pub fn get(&self, x: usize, y: usize) -> Rational {
        match self.rows[x].binary_search_by_key(&y, |(v, _)| *v) {
            Ok(pos) => self.rows[x][pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Probability `m^2_x / r_x` of jumping from `x` to the cemetery.
    pub fn death(&self, x: usize) -> &Rational {
        &self.death[x]
    }

    pub fn row_sum(&self, x: usize) -> Rational {
        self.rows[x].iter().fold(Rational::zero(), |acc, (_, q)| acc + q)
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let n = self.len();
        let mut dense = vec![vec![Rational::zero(); n]; n];
        for (x, row) in self.rows.iter().enumerate() {
            for (y, q) in row {
                dense[x][*y] = q.clone();
            }
        }
        dense
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    const P3: &str = r#"{"vertices":["a","b","c"],
        "edges":[{"u":"a","v":"b","beta":"1"},{"u":"b","v":"c","beta":"1"}],
        "kill":{"c":"1"}}"#;

    #[test]
    fn p3_masses() {
        let g = WeightedGraph::from_json(P3).unwrap();
        assert_eq!(g.mass(0), &int(1));
        assert_eq!(g.mass(1), &int(2));
        assert_eq!(g.mass(2), &int(2));
        assert_eq!(g.kill(0), &int(0));
    }

    #[test]
    fn p3_step_matrix() {
        let g = WeightedGraph::from_json(P3).unwrap();
        let q = g.step_matrix();
        // brute force: every ordered pair against beta / r
        for x in 0..3 {
            for y in 0..3 {
                let expected = g.beta(x, y) / g.mass(x);
                assert_eq!(q.get(x, y), expected);
            }
        }
        assert_eq!(q.get(0, 1), int(1));
        assert_eq!(q.get(1, 0), ratio(1, 2));
        assert_eq!(q.get(1, 2), ratio(1, 2));
        assert_eq!(q.get(2, 1), ratio(1, 2));
        assert_eq!(q.get(0, 2), int(0));
        for x in 0..3 {
            assert_eq!(q.row_sum(x) + q.death(x), int(1));
        }
    }

    #[test]
    fn rejects_self_loop() {
        let doc = r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"a","beta":"1"},{"u":"a","v":"b","beta":"1"}]}"#;
        let err = WeightedGraph::from_json(doc).unwrap_err();
        assert!(err.to_string().contains("self-loop weight"), "{err}");
    }

    #[test]
    fn rejects_disconnected() {
        let doc = r#"{"vertices":["a","b","c","d"],
            "edges":[{"u":"a","v":"b","beta":"1"},{"u":"c","v":"d","beta":"1"}]}"#;
        let err = WeightedGraph::from_json(doc).unwrap_err();
        assert!(err.to_string().contains("disconnected"), "{err}");
    }

    #[test]
    fn rejects_asymmetric_and_negative() {
        let doc = r#"{"vertices":["a","b"],
            "edges":[{"u":"a","v":"b","beta":"1"},{"u":"b","v":"a","beta":"2"}]}"#;
        assert!(matches!(WeightedGraph::from_json(doc), Err(Error::Asymmetric(..))));
        let doc = r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b","beta":"-1"}]}"#;
        assert!(matches!(WeightedGraph::from_json(doc), Err(Error::NegativeWeight(_))));
        let doc = r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b","beta":"1"}],"kill":{"a":"-1/2"}}"#;
        assert!(matches!(WeightedGraph::from_json(doc), Err(Error::NegativeWeight(_))));
        let doc = r#"{"vertices":["a"],"edges":[{"u":"a","v":"z","beta":"1"}]}"#;
        assert!(matches!(WeightedGraph::from_json(doc), Err(Error::UnknownVertex(_))));
        assert!(matches!(WeightedGraph::from_json("{"), Err(Error::Malformed(_))));
    }

    #[test]
    fn zero_beta_edges_do_not_connect() {
        let doc = r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b","beta":"0"}],"kill":{"a":"1"}}"#;
        assert!(matches!(WeightedGraph::from_json(doc), Err(Error::Disconnected(..))));
    }

    #[test]
    fn single_vertex_is_connected() {
        let doc = r#"{"vertices":["x"],"kill":{"x":"1"}}"#;
        let g = WeightedGraph::from_json(doc).unwrap();
        assert_eq!(g.mass(0), &int(1));
        assert_eq!(g.step_matrix().death(0), &int(1));
    }

    #[test]
    fn document_round_trip() {
        let g = WeightedGraph::from_json(P3).unwrap();
        let again = WeightedGraph::from_document(&g.to_document()).unwrap();
        assert_eq!(g, again);
    }
}
