//! Multi-microgrid day-ahead pricing and storage dispatch learned with
//! multi-objective tabular Q-learning.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] — the economic and physical primitives: demand response,
//!   user utility, social welfare, grid power balance, generation cost,
//!   profit, and the operating-constraint penalty. All pure functions.
//! * [`config`] — system and run configuration, including the TOML run
//!   file understood by the CLI.
//! * [`env`] — the day-ahead episode environment: a 24-hour Markov
//!   decision process over (time-of-day, storage level) states and
//!   (price level, storage command) actions, plus day-profile I/O and a
//!   synthetic-day generator.
//! * [`learner`] — vector-valued Q-learning with linear and Chebyshev
//!   scalarization and an online utopian reference point.
//! * [`pareto`] — dominance filtering, the simplex weight grid, the
//!   parallel policy sweep that builds an approximate Pareto archive,
//!   and max-min fair-point selection.
//! * [`report`] — CSV writers and readers for convergence logs,
//!   policies, trajectories, and archives.

// Validation guards are written `!(x > 0.0)` rather than `x <= 0.0` so
// that NaN fails them too; the suggested rewrite would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod env;
mod error;
pub mod learner;
pub mod model;
pub mod pareto;
pub mod report;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
