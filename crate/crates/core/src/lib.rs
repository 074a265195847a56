//! Regularized moment method (NRxx) for the Boltzmann–Shakhov equation in
//! one spatial dimension, with Maxwell wall boundary conditions at arbitrary
//! moment order and a conservative discrete-velocity reference solver.
//!
//! The distribution function is represented by Hermite coefficients about a
//! local velocity `u` and temperature `theta` ([`moments::MomentState`]).
//! A time step is split into transport (HLL finite volumes on the
//! coefficients, closed by the regularization of the highest order),
//! analytic Shakhov relaxation and force-driven acceleration.
//!
//! Solvers are looked up by name through [`strategy::SolverRegistry`], so
//! the moment solver and the discrete-velocity reference can be swapped at
//! run time.

#![allow(clippy::needless_range_loop)]

pub mod boundary;
pub mod cdvm;
pub mod closure;
pub mod collision;
pub mod error;
pub mod hermite;
pub mod io;
pub mod limiter;
pub mod moments;
pub mod projection;
pub mod scenario;
pub mod solver1d;
pub mod strategy;

pub use error::{Error, Result};
pub use moments::{MomentSpace, MomentState, MultiIndex};
