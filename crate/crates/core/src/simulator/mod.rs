//! Dry-run execution of upgrade plans over a modeled configuration.

mod apply;
mod deploy;
mod eval;
mod run;

pub use apply::{apply_statement, Applied};
pub use deploy::{deploy_files, deploy_statements, Direction};
pub use eval::{evaluate_predicate, GuardMemo, ScriptEnv, Truth};
pub use run::{
    simulate_many, simulate_upgrade, ArgTable, SimulationOptions, SimulationResult, Step,
};
