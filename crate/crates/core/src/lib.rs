//! Exact spin-system representations of loop-erased random walk.
//!
//! The crate computes loop-erased random walk one-point probabilities on
//! finite weighted graphs in three independent ways and checks that they
//! agree as exact rationals:
//!
//! * directly from the killed random walk ([`lerw`]),
//! * through Berezin integrals of two fermionic/nilpotent spin systems
//!   ([`grassmann`], [`actions`]),
//! * through signed sums over coloured graphs and cycle collections
//!   ([`loop_model`]), linked to walks by heaps of cycles ([`heaps`]).

pub mod actions;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod grassmann;
pub mod heaps;
pub mod lattice;
pub mod lerw;
pub mod linalg;
pub mod loop_model;
pub mod rational;
pub mod sampler;
pub mod series;
pub mod walks;

pub use error::{Error, Result};
pub use graph::{StepWeightMatrix, WeightedGraph};
pub use rational::Rational;
