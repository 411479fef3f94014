//! Quantal response and focal quantal response equilibria for finite normal-form games.
//!
//! The crate covers four layers:
//!
//! * [`game`]: games, mixed profiles, expected utilities and the CRRA payoff transform.
//! * [`focality`]: explicit, regret-averse and Hurwicz focal sets, and focality-adjusted utilities.
//! * [`solver`]: focal logit equilibria by damped fixed-point iteration and lambda continuation.
//! * [`inference`]: calibration of `(lambda, delta)` from observed play, identification of
//!   focal strategies, falsification patterns and maximum-likelihood fits.
//!
//! [`dataset`] bundles the experimental games used throughout, and [`reproduce`] recomputes the
//! published quantities from them.

pub mod config;
pub mod dataset;
pub mod error;
pub mod focality;
pub mod game;
pub mod inference;
pub mod io;
pub mod observed;
pub mod reproduce;
pub mod solver;

pub use error::{Error, Result};
pub use focality::FocalSpec;
pub use game::{Game, MixedProfile};
pub use observed::ObservedPlay;
pub use solver::{EquilibriumResult, SolverConfig};
