//! Numerical laboratory for first-order Hamilton–Jacobi–Bellman equations
//! regularized by a fractional Laplacian,
//!
//! ```text
//! u_t + H(t, x, u, ∇u) + ε (-Δ)^{s/2} u = 0,   u(0, ·) = u₀,   1 ≤ s ≤ 2,
//! ```
//!
//! on a periodic domain: a monotone explicit solver, exact reference
//! solutions, and estimators for Hölder regularity, oscillation decay and
//! vanishing-viscosity error rates.

pub mod analysis;
pub mod error;
pub mod fracops;
pub mod grid;
pub mod hamiltonians;
pub mod harness;
pub mod oracles;
pub mod solver;

pub use error::{Error, Result};
