//! Scenario runner for foam algebras: JSON scenario files, a registry of
//! check generators, and JSON/CSV reports.

pub mod corpus;
pub mod dto;
pub mod generators;
pub mod runner;
pub mod scenario;
pub mod sexpr;

use foam_core::FoamError;

pub use generators::{find_generator, generators, Outcome, Status};
pub use runner::{run_scenario, Report, RunOptions};
pub use scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Sexpr(#[from] sexpr::SexprError),
    #[error(transparent)]
    Core(#[from] FoamError),
}

impl ScenarioError {
    /// Process exit code: 2 for anything wrong with the input.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
