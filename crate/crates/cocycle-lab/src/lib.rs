//! A numerical laboratory for quasi-periodic analytic Jacobi operators.
//!
//! The crate builds, from the bottom up:
//!
//! * continued-fraction and Brjuno-Rüssmann frequency arithmetic ([`freq`]),
//! * finite Fourier observables on the torus and its complex annulus ([`analytic`]),
//! * log-scaled transfer-matrix cocycles and finite-scale Lyapunov exponents
//!   ([`cocycle`]),
//! * Dirichlet determinants in log-scaled form ([`determinant`]),
//! * a certified Sturm eigensolver, eigenvalue window counts and Jensen-formula
//!   zero counting ([`spectrum`]),
//! * Birkhoff sums, exceptional-set measure estimation and large-deviation
//!   experiments ([`ergodic`]),
//! * experiment orchestration, caching and report emission ([`harness`]).
//!
//! Everything is deterministic: all randomness flows from a single 64-bit seed
//! through per-block splittable streams, and parallel reductions are ordered,
//! so reports are byte-identical across runs and thread counts.
//!
//! The `cocycle-lab` binary exposes the module operations and the end-to-end
//! experiment scenarios; see the book under `book/` (also compiled into the
//! [`guide`] module) for a narrative tour.

pub mod analytic;
pub mod cocycle;
pub mod determinant;
pub mod ergodic;
pub mod freq;
pub mod guide;
pub mod harness;
pub mod spectrum;

/// Library version embedded into every report bundle.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
