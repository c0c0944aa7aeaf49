//! Numerical laboratory for finite-time blowup of
//! `u_t = J ∗ u − u + F(u)` and of the fractional model
//! `u_t = −(−Δ)^{α/2} u + u^p`.
//!
//! The crate builds dispersal and semigroup kernels, evaluates the
//! moment-functional blowup criterion `W_T(0) / h⁻¹(T) > 1`, computes Morrey
//! norms and radial concentrations, reproduces the singular stationary
//! solution and its dimension asymptotics, and confronts all of it with a
//! spectral integrating-factor solver on periodic grids.

// `!(x > 0.0)` is how NaN is rejected alongside the range check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod blowup;
pub mod csvio;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod nonlinearity;
pub mod norms;
pub mod quad;
pub mod solver;
pub mod specfun;
pub mod stationary;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use kernels::{KernelKind, KernelSpec, SemigroupKernel, StableProfile};
pub use nonlinearity::{Nonlinearity, OsgoodTransform};
pub use norms::RadialProfile;
pub use specfun::Dimension;
