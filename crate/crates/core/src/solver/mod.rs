mod config;
mod iterate;
mod problem;
mod schedule;

pub use config::{
    validate_config, ConfigErrors, ConfigViolation, Constraint, SolverConfig, ValidatedConfig, DEFAULT_W_WEIGHT,
};
pub use iterate::{run, step, IterateState, RunOutcome, Termination};
pub use problem::ProblemSpec;
pub use schedule::Schedule;
