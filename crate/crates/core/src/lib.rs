//! Fire-aware asset protection routing under wind-change uncertainty.

pub mod casestudy;
pub mod error;
pub mod firespread;
pub mod generator;
pub mod instance;
pub mod io;
pub mod multiscenario;
pub mod plan;
pub mod report;
pub mod rerouting;
pub mod solve;
pub mod stochastic;
pub mod validator;

pub use error::{Error, Result};
pub use instance::Instance;
pub use plan::{evaluate, Evaluation, Plan};
