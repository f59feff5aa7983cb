//! Statement models for package maintainer scripts.
//!
//! The crate turns maintainer-script text into explicit statement models,
//! mines a script corpus for helper-generated code and recurring templates,
//! and dry-runs upgrade plans over a modeled system configuration while
//! recording a transaction log that supports rollback to any logged
//! configuration.
//!
//! Module map:
//!
//! - [`model`]: shared domain types, configuration hashing, consistency
//!   checks and relationship validation.
//! - [`injector`]: shell-subset parser, generated-region detection, inert
//!   stripping, command classification and RPM spec scriptlet extraction.
//! - [`corpus`]: manifest-driven collection, identical-script clustering,
//!   template occurrence counting, template classes and statistics.
//! - [`simulator`]: dry-run execution of upgrade plans.
//! - [`logrollback`]: transaction log, statement inversion and rollback.
//! - [`par`]: data-parallel helpers with a sequential fallback.

pub mod corpus;
pub mod error;
pub mod injector;
pub mod logrollback;
pub mod model;
pub mod par;
pub mod simulator;

pub use error::{Error, Result};
