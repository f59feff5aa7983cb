use std::fmt;

use serde::{Deserialize, Serialize};

use super::package::ScriptKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

/// Closed set of diagnostic codes.
///
/// | code | raised by |
/// |------|-----------|
/// | `DANGLING_SETTING` | a setting whose owner or named module/package is gone |
/// | `ORPHAN_FILE` | a file owned by a package that is not installed |
/// | `MISSING_FILE` | an installed package's declared file is absent |
/// | `DEAD_SERVICE` | a running service whose package is not installed |
/// | `MISSING_DEP` | an unsatisfied depends clause after a plan |
/// | `CONFLICT` | a violated conflicts entry after a plan |
/// | `UNEVALUABLE_GUARD` | a guard that evaluated to unknown and was skipped |
/// | `OPAQUE_COMMAND` | a command or loop the injector could not model |
/// | `UNEXPANDED_VARIABLE` | a reference to a variable without a literal binding |
/// | `UNMATCHED_MARKER` | a generated-region begin marker without its end |
/// | `INVALID_UTF8` | script bytes replaced during decoding |
/// | `FILE_EXISTS`, `NO_SUCH_FILE` | filesystem statement preconditions |
/// | `ENTITY_EXISTS`, `NO_SUCH_ENTITY` | environment statement preconditions |
/// | `SETTING_EXISTS`, `NO_SUCH_SETTING` | package-setting statement preconditions |
/// | `PACKAGE_INSTALLED`, `PACKAGE_NOT_INSTALLED` | package mark preconditions |
/// | `FILE_CONFLICT` | unpacking over a path owned by another package |
/// | `UNKNOWN_PACKAGE` | a plan names a package the universe does not know |
/// | `INVALID_PLAN` | a plan that names a package twice or an action that cannot start |
/// | `IO_ERROR` | an unreadable corpus file |
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    DanglingSetting,
    OrphanFile,
    MissingFile,
    DeadService,
    MissingDep,
    Conflict,
    UnevaluableGuard,
    OpaqueCommand,
    UnexpandedVariable,
    UnmatchedMarker,
    InvalidUtf8,
    FileExists,
    NoSuchFile,
    EntityExists,
    NoSuchEntity,
    SettingExists,
    NoSuchSetting,
    PackageInstalled,
    PackageNotInstalled,
    FileConflict,
    UnknownPackage,
    InvalidPlan,
    IoError,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        use DiagnosticCode::*;
        match self {
            DanglingSetting => "DANGLING_SETTING",
            OrphanFile => "ORPHAN_FILE",
            MissingFile => "MISSING_FILE",
            DeadService => "DEAD_SERVICE",
            MissingDep => "MISSING_DEP",
            Conflict => "CONFLICT",
            UnevaluableGuard => "UNEVALUABLE_GUARD",
            OpaqueCommand => "OPAQUE_COMMAND",
            UnexpandedVariable => "UNEXPANDED_VARIABLE",
            UnmatchedMarker => "UNMATCHED_MARKER",
            InvalidUtf8 => "INVALID_UTF8",
            FileExists => "FILE_EXISTS",
            NoSuchFile => "NO_SUCH_FILE",
            EntityExists => "ENTITY_EXISTS",
            NoSuchEntity => "NO_SUCH_ENTITY",
            SettingExists => "SETTING_EXISTS",
            NoSuchSetting => "NO_SUCH_SETTING",
            PackageInstalled => "PACKAGE_INSTALLED",
            PackageNotInstalled => "PACKAGE_NOT_INSTALLED",
            FileConflict => "FILE_CONFLICT",
            UnknownPackage => "UNKNOWN_PACKAGE",
            InvalidPlan => "INVALID_PLAN",
            IoError => "IO_ERROR",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script_kind: Option<ScriptKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

impl Diagnostic {
    pub fn new(severity: Severity, code: DiagnosticCode, message: impl Into<String>) -> Self {
        Diagnostic {
            severity,
            code,
            message: message.into(),
            location: None,
        }
    }

    pub fn error(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Self::new(Severity::Error, code, message)
    }

    pub fn warning(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Self::new(Severity::Warning, code, message)
    }

    pub fn at(
        mut self,
        package: Option<&str>,
        kind: Option<ScriptKind>,
        line: Option<usize>,
    ) -> Self {
        self.location = Some(Location {
            package: package.map(str::to_string),
            script_kind: kind,
            line,
        });
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let severity = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        };
        write!(f, "{severity}[{}]", self.code)?;
        if let Some(loc) = &self.location {
            if let Some(pkg) = &loc.package {
                write!(f, " {pkg}")?;
            }
            if let Some(kind) = loc.script_kind {
                write!(f, " {kind}")?;
            }
            if let Some(line) = loc.line {
                write!(f, ":{line}")?;
            }
        }
        write!(f, ": {}", self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}
