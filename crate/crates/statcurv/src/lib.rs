//! statcurv: a numerical laboratory for statistical manifolds.
//!
//! A statistical structure is a Riemannian metric g together with a
//! torsion-free connection ∇ whose cubic tensor ∇g is totally symmetric.
//! This crate evaluates such structures on coordinate charts with exact
//! second-order forward-mode derivatives, derives the dual connection ∇*,
//! computes curvature tensors of both connections, assembles the
//! conformal-projective curvature tensor W by two independent routes, and
//! checks the identities that relate them: equality of the two scalar
//! curvatures, the pairing g(W(X,Y)Z,U) + g(W*(X,Y)U,Z) = 0, and the
//! implication from constant curvature to conformal-projective flatness.
//!
//! Pointwise evaluation is pure; sweeps over sample points run in parallel
//! under the default `parallel` feature and sequentially without it, with
//! identical results either way.

// Index loops are kept where they mirror the i,j,k structure of the tensor
// formulas, and jet arithmetic uses plain methods on references rather than
// operator overloads.
#![allow(clippy::needless_range_loop, clippy::should_implement_trait)]

pub mod cli;
pub mod conformal;
pub mod curvature;
pub mod error;
pub mod exec;
pub mod expr;
pub mod gallery;
pub mod jet;
pub mod report;
pub mod sample;
pub mod spec;
pub mod structure;
pub mod tensor;
pub mod transform;

pub use error::{Error, Result};
