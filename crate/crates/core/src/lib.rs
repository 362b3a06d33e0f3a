//! Multivariate subexponential claim models and ruin probability asymptotics.
//!
//! A distribution `F` on `[0, ∞)^d` is scalarized through a ruin set `A`
//! (open, increasing, convex complement, origin outside its closure) into
//! the one-dimensional law of `Y(X) = sup{u > 0 : X ∈ uA}`. The crate
//! provides
//!
//! - exact polyhedral geometry for ruin sets ([`ruinsets`]),
//! - heavy-tailed claim models with seeded samplers ([`claims`]),
//! - finite-sample diagnostics for subexponential tails ([`diagnostics`]),
//! - deterministic and Monte Carlo evaluation of the ruin asymptote
//!   `H(u) = ∫₀^∞ F(uA + v c) dv` ([`asymptotics`]),
//! - a renewal risk-process simulator for the ruin probability
//!   ([`simulator`]).
//!
//! All Monte Carlo work is driven by [`rng::RngStream`] values, so results
//! depend only on `(seed, configuration)` and never on the number of worker
//! threads.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod claims;
pub mod diagnostics;
mod error;
pub mod lp;
mod parallel;
pub mod quad;
pub mod rng;
pub mod ruinsets;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
