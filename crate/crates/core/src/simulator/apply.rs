use std::path::Path;

use crate::model::{
    content_digest, Diagnostic, DiagnosticCode, EnvOp, ExecutedStatement, FileEntry, FileKind,
    FileOp, Image, InstalledPackage, Registry, ServiceState, SettingOp, Statement,
    SystemConfiguration,
};

/// Outcome of a statement that applied, or whose failure was tolerated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub executed: ExecutedStatement,
    /// Tolerated precondition failure or opaque command.
    pub warning: Option<Diagnostic>,
}

/// Commands whose update creates the destination when it is absent.
fn creates_on_absent(command: &str) -> bool {
    let base = Path::new(command)
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or(command);
    matches!(base, "cp" | "mv")
}

fn new_file_entry(
    config: &SystemConfiguration,
    op: &FileOp,
    current: Option<&FileEntry>,
) -> FileEntry {
    if let Some(entry) = &op.entry {
        return entry.clone();
    }
    let content_hash = match &op.payload {
        Some(src) => config
            .filesystem
            .get(src)
            .and_then(|e| e.content_hash.clone())
            .or_else(|| Some(content_digest(src.as_bytes()))),
        None if op.kind == FileKind::Directory => None,
        None => Some(content_digest(
            format!("{}:{}", op.command, op.path).as_bytes(),
        )),
    };
    FileEntry {
        owner: current.and_then(|e| e.owner.clone()),
        kind: current.map_or(op.kind, |e| e.kind),
        content_hash,
    }
}

enum Change {
    To(Image),
    Fail(DiagnosticCode, String),
}

fn file_change(config: &SystemConfiguration, st: &Statement, op: &FileOp) -> Change {
    let current = config.filesystem.get(&op.path);
    match (st, current) {
        (Statement::FileSystemAdd(_), Some(_)) => Change::Fail(
            DiagnosticCode::FileExists,
            format!("{} already exists", op.path),
        ),
        (Statement::FileSystemAdd(_), None) => {
            Change::To(Image::File(new_file_entry(config, op, None)))
        }
        (Statement::FileSystemDelete(_), Some(_)) => Change::To(Image::Absent),
        (Statement::FileSystemUpdate(_), None)
            if creates_on_absent(&op.command) || op.entry.is_some() =>
        {
            Change::To(Image::File(new_file_entry(config, op, None)))
        }
        (_, None) => Change::Fail(
            DiagnosticCode::NoSuchFile,
            format!("{} does not exist", op.path),
        ),
        (_, Some(e)) => Change::To(Image::File(new_file_entry(config, op, Some(e)))),
    }
}

fn env_change(config: &SystemConfiguration, st: &Statement, op: &EnvOp) -> Change {
    let present = match config.environment.set(op.registry) {
        Some(set) => set.contains(&op.entity),
        None => config.environment.services.contains_key(&op.entity),
    };
    let value = if op.registry == Registry::Services {
        Image::Service(op.state.unwrap_or(ServiceState::Running))
    } else {
        Image::Present
    };
    let what = format!("{} {}", op.registry.as_str(), op.entity);
    match st {
        Statement::EnvironmentAdd(_) if present => Change::Fail(
            DiagnosticCode::EntityExists,
            format!("{what} already exists"),
        ),
        Statement::EnvironmentAdd(_) => Change::To(value),
        Statement::EnvironmentDelete(_) if present => Change::To(Image::Absent),
        // A set registry has no value to update; an update refreshes membership.
        Statement::EnvironmentUpdate(_) if present || op.registry != Registry::Services => {
            Change::To(value)
        }
        _ => Change::Fail(
            DiagnosticCode::NoSuchEntity,
            format!("{what} does not exist"),
        ),
    }
}

fn setting_change(config: &SystemConfiguration, st: &Statement, op: &SettingOp) -> Change {
    let key = crate::model::SettingKey::new(op.owner_package.as_str(), op.setting_key.as_str());
    let present = config.settings.contains_key(&key);
    let what = format!("setting {}/{}", op.owner_package, op.setting_key);
    match (st, present) {
        (Statement::PackageSettingAdd(_), true) => Change::Fail(
            DiagnosticCode::SettingExists,
            format!("{what} already exists"),
        ),
        (Statement::PackageSettingAdd(_), false) | (Statement::PackageSettingUpdate(_), true) => {
            Change::To(Image::Setting(op.value.clone()))
        }
        (Statement::PackageSettingDelete(_), true) => Change::To(Image::Absent),
        _ => Change::Fail(
            DiagnosticCode::NoSuchSetting,
            format!("{what} does not exist"),
        ),
    }
}

fn change(config: &SystemConfiguration, st: &Statement) -> Change {
    match st {
        Statement::FileSystemAdd(op)
        | Statement::FileSystemDelete(op)
        | Statement::FileSystemUpdate(op) => file_change(config, st, op),
        Statement::EnvironmentAdd(op)
        | Statement::EnvironmentDelete(op)
        | Statement::EnvironmentUpdate(op) => env_change(config, st, op),
        Statement::PackageSettingAdd(op)
        | Statement::PackageSettingDelete(op)
        | Statement::PackageSettingUpdate(op) => setting_change(config, st, op),
        Statement::PackageAdd(op) => match (config.packages.contains_key(&op.name), &op.version) {
            (true, _) => Change::Fail(
                DiagnosticCode::PackageInstalled,
                format!("{} is already installed", op.name),
            ),
            (false, Some(version)) => Change::To(Image::Package(InstalledPackage {
                version: version.clone(),
                architecture: op.architecture.clone().unwrap_or_else(|| "all".into()),
            })),
            (false, None) => Change::Fail(
                DiagnosticCode::InvalidPlan,
                format!("{} has no version to install", op.name),
            ),
        },
        Statement::PackageDelete(op) if config.packages.contains_key(&op.name) => {
            Change::To(Image::Absent)
        }
        Statement::PackageDelete(op) => Change::Fail(
            DiagnosticCode::PackageNotInstalled,
            format!("{} is not installed", op.name),
        ),
        Statement::Neutral { .. } | Statement::Opaque { .. } => Change::To(Image::Absent),
    }
}

/// Applies one statement to `config` in place.
///
/// A failed precondition is an error, or a warning with no change when
/// `tolerant` is set. On error `config` is left untouched. Opaque commands
/// change nothing and produce a warning.
pub fn apply_statement(
    config: &mut SystemConfiguration,
    stmt: &Statement,
    tolerant: bool,
) -> Result<Applied, Diagnostic> {
    let Some(key) = stmt.key() else {
        let warning = match stmt {
            Statement::Opaque { raw } => Some(Diagnostic::warning(
                DiagnosticCode::OpaqueCommand,
                format!("not modeled: {raw}"),
            )),
            _ => None,
        };
        return Ok(Applied {
            executed: ExecutedStatement {
                statement: stmt.clone(),
                pre_image: Image::Absent,
                post_image: Image::Absent,
            },
            warning,
        });
    };
    let pre_image = config.image(&key);
    match change(config, stmt) {
        Change::To(post_image) => {
            config.set_image(&key, &post_image).map_err(|e| {
                Diagnostic::error(DiagnosticCode::InvalidPlan, format!("{stmt}: {e}"))
            })?;
            Ok(Applied {
                executed: ExecutedStatement {
                    statement: stmt.clone(),
                    pre_image,
                    post_image,
                },
                warning: None,
            })
        }
        Change::Fail(code, message) if tolerant => Ok(Applied {
            executed: ExecutedStatement {
                statement: stmt.clone(),
                pre_image: pre_image.clone(),
                post_image: pre_image,
            },
            warning: Some(Diagnostic::warning(
                code,
                format!("{stmt}: {message} (ignored)"),
            )),
        }),
        Change::Fail(code, message) => Err(Diagnostic::error(code, format!("{stmt}: {message}"))),
    }
}
