//! Numerics for sign-changing two-bubble solutions of the pure Neumann problem
//! `-Δu = |u|^{p-1+ε} u` in the unit ball (and annuli) of ℝⁿ, n ∈ {4, 5, 6}.
//!
//! Everything lives in meridian coordinates `(s, t) = (|x'|, x_n)` or their
//! polar form `(ρ, θ)` with θ measured from the positive `x_n` axis. The crate
//! is `no_std` and only needs `alloc`.
#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form of the input guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod banded;
pub mod bubble;
pub mod constants;
pub mod corrector;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod grid;
pub mod neumann;
pub mod quadrature;
pub mod solver;
pub mod special;

pub use bubble::{BubbleParams, Dimension, Exponent};

pub use constants::{ReducedConstants, ReducedProfile};
pub use error::{Error, Result};
pub use grid::{DomainKind, DomainSpec, GridField, GridSpec, MeridianGrid};

