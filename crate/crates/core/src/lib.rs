//! Growth-transform dynamics on the probability simplex.
//!
//! A single multiplicative update, `dp_i/dt = p_i [(f_i / fbar) g(p) - g(p)]`,
//! reproduces replicator, quasispecies, replicator-mutator, logit, BNN and
//! selector-weighted dynamics once the engine fitness `f_i` and time scale
//! `g(p)` are chosen per family. This crate provides
//!
//! * validated simplex points and payoff models ([`simplex`], [`game`]),
//! * the named fields and the engine that reproduces them ([`dynamics`]),
//! * cost functions whose gradients drive the fields ([`energy`]),
//! * RK4 integration, equilibrium classification and Motzkin-Straus clique
//!   search ([`solver`]),
//! * JSON configuration and CSV/JSON output for the `evodyn` binary ([`io`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod dynamics;
pub mod energy;
pub mod error;
pub mod game;
pub mod io;
pub mod linalg;
pub mod par;
pub mod quadrature;
pub mod simplex;
pub mod solver;

pub use error::{Error, Result};
pub use simplex::{SimplexPoint, Tolerance};
