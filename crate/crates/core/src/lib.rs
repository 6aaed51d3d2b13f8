//! Cascade size and user personality prediction with coupled graph neural
//! networks, where each side gates the other's message passing.
//!
//! - [`diffcore`]: reverse-mode tape, tensors and a finite-difference check.
//! - [`graph`]: graph storage and six structural node measures.
//! - [`datasets`]: cascades, personalities, splits, file I/O and a synthetic
//!   personality-driven cascade generator.
//! - [`models`]: GCN, GAT and state-based layers with optional personality gates.
//! - [`training`]: losses, metrics, Adam and the early-stopping loop.
//! - [`baselines`]: feature-based linear and MLP regressors.
//! - [`cli`]: the `casper` command-line front end.

pub mod diffcore;
pub mod error;
pub mod graph;
pub mod datasets;
pub mod models;
pub mod training;
pub mod baselines;
pub mod cli;
