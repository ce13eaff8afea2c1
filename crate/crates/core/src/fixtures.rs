//! Small graphs used throughout the tests and by `lerw verify`.

use crate::graph::WeightedGraph;

pub const P3: &str = include_str!("../../../fixtures/p3.json");
pub const K3: &str = include_str!("../../../fixtures/k3.json");
pub const S3: &str = include_str!("../../../fixtures/s3.json");
pub const P4: &str = include_str!("../../../fixtures/p4.json");
pub const C4: &str = include_str!("../../../fixtures/c4.json");

/// `(name, document)` for every fixture with at most four vertices.
pub const ALL: [(&str, &str); 5] = [("p3", P3), ("k3", K3), ("s3", S3), ("p4", P4), ("c4", C4)];

pub fn load(document: &str) -> WeightedGraph {
    WeightedGraph::from_json(document).expect("fixture graphs are valid")
}

pub fn all() -> Vec<(&'static str, WeightedGraph)> {
    ALL.iter().map(|(name, doc)| (*name, load(doc))).collect()
}
