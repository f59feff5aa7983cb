//! Shared domain types: packages, statements, configurations, logs.

mod config;
mod consistency;
mod diagnostic;
pub mod document;
mod log;
mod package;
mod plan;
mod relations;
mod script;
mod statement;
mod version;

pub use config::{
    canonical_bytes, config_hash, content_digest, ConfigId, Environment, FileEntry,
    InstalledPackage, ServiceState, SettingKey, SystemConfiguration, DIGEST_ALGORITHM,
};
pub use consistency::{
    check_consistency, check_consistency_with, init_script, module_file, ConsistencyChecks,
};
pub use diagnostic::{has_errors, Diagnostic, DiagnosticCode, Location, Severity};
pub use log::{ExecutedStatement, LogModel, Phase, Transaction, Trigger, TxnStatus};
pub use package::{
    ConstraintOp, Dialect, FileKind, PackageFile, PackageId, PackageModel, PackageRelationships,
    Relation, ScriptKind, ScriptSlot, Universe, VersionConstraint,
};
pub use plan::{PlanAction, UpgradePlan};
pub use relations::{final_installed_set, validate_plan_relationships};
pub use script::{GuardTerm, GuardedBlock, ModeledStatement, Predicate, Provenance, ScriptModel};
pub use statement::{
    Action, EnvOp, Family, FileOp, Image, PackageOp, Registry, SettingOp, StateKey, Statement,
};
pub use version::Version;
