//! Dense tensors with define-by-run reverse-mode differentiation.
//!
//! A [`Tape`] is rebuilt for every forward pass. Ops are methods on the tape
//! that return [`Var`] handles; [`Tape::backward`] sweeps the records in
//! reverse and returns [`Gradients`] for every node reachable from a
//! parameter leaf.

mod check;
mod tape;
mod tensor;

pub use check::finite_diff_check;
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;

pub(crate) use tape::logistic;
