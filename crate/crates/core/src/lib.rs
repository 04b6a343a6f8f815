//! Randomized gradient tracking for decentralized optimization.
//!
//! Nodes of an undirected network each hold a smooth strongly convex
//! `f_i` and cooperate to minimize their average. At every iteration one
//! global coin decides whether the nodes run `n_c` rounds of neighbour
//! averaging or take a purely local step. The crate simulates these methods
//! and the usual baselines, evaluates the 3×3 rate matrices that bound
//! their linear convergence, and drives experiments from a small CLI.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod harness;
pub mod network;
pub mod problems;

pub use error::{Error, Result};
