//! Wage dynamics of workers under random supervision.
//!
//! A firm evaluates its worker each period with probability `p`. An evaluated
//! worker's wage moves to the deserved wage for observed effort, plus a bonus
//! `α` times the move. Unevaluated workers keep their previous wage. This crate
//! solves the worker's effort problem, propagates the resulting wage
//! distribution and lets the firm search over contracts `(p, α, w0)`.

pub mod additive;
pub mod cobb_douglas;
pub mod distribution;
pub mod employer;
pub mod error;
pub mod model;
pub mod optimize;
pub mod reference;
pub mod statics;

pub use error::{ModelError, Result};
pub use model::{ContractParams, FirmParams, Horizon, UtilityFamily, WorkerPrefs};
