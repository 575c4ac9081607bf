//! A numerical laboratory for wave equations on Lorentzian manifolds whose
//! metric is too rough for classical PDE theory.
//!
//! Rough metrics and distributional data are represented as ε-indexed nets of
//! smooth sampled fields (the computational stand-in for a Colombeau
//! representative). The crate provides
//!
//! * [`nets`] — the ε-net algebra: asymptotic exponent estimation
//!   (moderateness / negligibility), test-function pairing, association with a
//!   distributional shadow, and mollifier embedding of distributions;
//! * [`spacetime`] — generalized Lorentz metrics in globally hyperbolic split
//!   form −β dt² + hₜ on a flat torus, example spacetimes (Minkowski,
//!   Robertson–Walker, impulsive pp-wave in Rosen form), and numerical
//!   verifiers for the weak-singularity and splitting conditions;
//! * [`riesz`] — Riesz distributions on a Lorentz vector space: exact
//!   constants, pairing via analytic continuation, the wave-operator
//!   recursion, and the order-zero Hadamard transport equation;
//! * [`solver`] — per-ε leapfrog solution of the Cauchy problem on
//!   [0,T] × Tᵈ with closed-form oracles and convergence studies;
//! * [`energy`] — energy–momentum tensors, ε-dependent Sobolev norms, energy
//!   integrals, and empirical Gronwall constants;
//! * [`scenario`] — a config-driven runner binding everything together,
//!   backing the `colwave` command-line tool.

pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod nets;
pub mod report;
pub mod riesz;
pub mod scenario;
pub mod solver;
pub mod spacetime;
pub mod testfn;

pub use error::{Error, Result};
pub use grid::{EpsGrid, Mesh, SpaceAxis, TimeAxis};
pub use nets::{AsymptoticEstimate, ScalarNet};
pub use spacetime::MetricSplit;
