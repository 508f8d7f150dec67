//! Exact proximal mappings for the non-convex 1-path-norm regularizer of
//! shallow networks, together with the surrounding machinery needed to train
//! and evaluate such networks:
//!
//! - [`numerics`]: dense row-major matrices, magnitude sorting with prefix
//!   sums, and a seeded reproducible RNG.
//! - [`pathnorm`]: the 1-path-norm, the layer-wise operator-norm product
//!   bound, and empirical Lipschitz-ratio estimates.
//! - [`prox_single`] / [`prox_multi`]: exact proximal mappings of
//!   `lam * ||vec(Diag(v) W)||_1` per hidden neuron for single- and
//!   multi-output blocks, each paired with a brute-force oracle.
//! - [`baselines`]: elementwise soft thresholding and row-wise l1-ball
//!   projection (layer-wise operator-norm constraint).
//! - [`model`]: shallow forward/backward passes with smooth activations,
//!   losses, and the paired multilayer extension.
//! - [`optimizer`]: the proximal-gradient loop, a stochastic minibatch
//!   variant, a subgradient baseline, and descent diagnostics.
//! - [`attack`]: l-infinity PGD attacks and robust-error evaluation.
//! - [`checks`]: randomized verification suites pitting the fast proximal
//!   mappings against their oracles and the structural invariants they must
//!   satisfy.
//!
//! Row-level and sample-level loops run on rayon when the default `parallel`
//! feature is enabled; disabling it yields a dependency-free sequential
//! build with identical outputs.

pub mod attack;
pub mod baselines;
pub mod checks;
mod error;
pub mod model;
pub mod numerics;
pub mod optimizer;
pub mod pathnorm;
pub(crate) mod par;
pub mod prox_multi;
pub mod prox_single;

pub use error::{Error, Result};
pub use numerics::{DenseMatrix, MagnitudeOrder, Rng};
pub use pathnorm::ShallowParams;
