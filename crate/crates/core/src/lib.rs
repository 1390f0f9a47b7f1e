//! Annealed Ising models on random graphs.
//!
//! Three graph ensembles are covered: the generalized random graph `GRG_N(w)`,
//! the 2-regular configuration model `CM_N(2)` and the configuration model with
//! degrees in `{1,2}`, `CM_N(1,2)`. For each, the crate computes annealed
//! pressure, magnetization and susceptibility (or CLT variance), and provides
//! exact enumeration oracles and MCMC samplers to check them.

pub mod cm12;
pub mod cm2;
pub mod error;
pub mod exact;
pub mod graph_models;
pub mod grg;
pub mod numeric;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use numeric::LogValue;
