use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::apply::apply_statement;
use crate::model::{
    config_hash, Diagnostic, DiagnosticCode, ExecutedStatement, FileEntry, FileKind, FileOp,
    PackageFile, PackageModel, PackageOp, Phase, Statement, SystemConfiguration, Transaction,
    Trigger, TxnStatus,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Install the package's files and mark it installed.
    Unpack,
    /// Remove the package's non-config files; config files stay, disowned.
    Delete,
    /// Remove the package's leftover config files.
    PurgeConfig,
    /// Swap the installed version's files for this model's.
    Replace,
}

const COMMAND: &str = "dpkg-deploy";

fn entry_op(path: &str, entry: FileEntry) -> FileOp {
    FileOp {
        path: path.to_string(),
        payload: None,
        command: COMMAND.into(),
        kind: entry.kind,
        entry: Some(entry),
    }
}

fn delete_op(path: &str, kind: FileKind) -> FileOp {
    FileOp {
        path: path.to_string(),
        payload: None,
        command: COMMAND.into(),
        kind,
        entry: None,
    }
}

fn package_op(pkg: &PackageModel) -> PackageOp {
    PackageOp {
        name: pkg.id.name.clone(),
        version: Some(pkg.id.version.clone()),
        architecture: Some(pkg.id.architecture.clone()),
        command: COMMAND.into(),
    }
}

fn conflict(pkg: &PackageModel, path: &str, owner: &str) -> Diagnostic {
    Diagnostic::error(
        DiagnosticCode::FileConflict,
        format!("{path} from {} is owned by {owner}", pkg.id.name),
    )
    .at(Some(&pkg.id.name), None, None)
}

/// Statements that place `files` for `pkg`. Existing entries owned by the
/// package, or by nobody, are taken over; a leftover config file keeps its
/// content. Shared directories stay with their owner.
fn place_files(
    config: &SystemConfiguration,
    pkg: &PackageModel,
    files: &[PackageFile],
) -> Result<Vec<Statement>, Diagnostic> {
    let name = &pkg.id.name;
    let mut out = Vec::new();
    let mut sorted: Vec<&PackageFile> = files.iter().collect();
    sorted.sort_by(|a, b| a.path.cmp(&b.path));
    for file in sorted {
        let fresh = FileEntry {
            owner: Some(name.clone()),
            kind: file.kind,
            content_hash: file.content_hash.clone(),
        };
        match config.filesystem.get(&file.path) {
            None => out.push(Statement::FileSystemAdd(entry_op(&file.path, fresh))),
            Some(e) if e.kind == FileKind::Directory && file.kind == FileKind::Directory => {
                if e.owner.is_none() {
                    out.push(Statement::FileSystemUpdate(entry_op(&file.path, fresh)));
                }
            }
            Some(e) => match e.owner.as_deref() {
                Some(other) if other != name => return Err(conflict(pkg, &file.path, other)),
                _ => {
                    let keep_content =
                        e.kind == FileKind::ConfigFile && file.kind == FileKind::ConfigFile;
                    let entry = FileEntry {
                        content_hash: if keep_content {
                            e.content_hash.clone()
                        } else {
                            fresh.content_hash.clone()
                        },
                        ..fresh
                    };
                    if &entry != e {
                        out.push(Statement::FileSystemUpdate(entry_op(&file.path, entry)));
                    }
                }
            },
        }
    }
    Ok(out)
}

/// Statements that drop the package's files, keeping the paths in `keep`.
/// Deepest paths go first.
fn drop_files(config: &SystemConfiguration, name: &str, keep: &BTreeSet<&str>) -> Vec<Statement> {
    config
        .filesystem
        .iter()
        .rev()
        .filter(|(path, e)| e.owner.as_deref() == Some(name) && !keep.contains(path.as_str()))
        .map(|(path, e)| {
            if e.kind == FileKind::ConfigFile {
                let disowned = FileEntry {
                    owner: None,
                    ..e.clone()
                };
                Statement::FileSystemUpdate(entry_op(path, disowned))
            } else {
                Statement::FileSystemDelete(delete_op(path, e.kind))
            }
        })
        .collect()
}

/// Statements for one deployment step.
pub fn deploy_statements(
    config: &SystemConfiguration,
    pkg: &PackageModel,
    direction: Direction,
) -> Result<Vec<Statement>, Diagnostic> {
    let name = &pkg.id.name;
    let not_installed = || {
        Diagnostic::error(
            DiagnosticCode::PackageNotInstalled,
            format!("{name} is not installed"),
        )
        .at(Some(name), None, None)
    };
    match direction {
        Direction::Unpack => {
            if let Some(installed) = config.packages.get(name) {
                return Err(Diagnostic::error(
                    DiagnosticCode::PackageInstalled,
                    format!("{name} {} is already installed", installed.version),
                )
                .at(Some(name), None, None));
            }
            let mut out = place_files(config, pkg, &pkg.files)?;
            out.push(Statement::PackageAdd(package_op(pkg)));
            Ok(out)
        }
        Direction::Delete => {
            if !config.is_installed(name) {
                return Err(not_installed());
            }
            let mut out = drop_files(config, name, &BTreeSet::new());
            out.push(Statement::PackageDelete(package_op(pkg)));
            Ok(out)
        }
        Direction::PurgeConfig => Ok(pkg
            .config_files()
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .filter(|f| {
                config
                    .filesystem
                    .get(&f.path)
                    .is_some_and(|e| e.owner.is_none() || e.owner.as_deref() == Some(name))
            })
            .map(|f| Statement::FileSystemDelete(delete_op(&f.path, f.kind)))
            .collect()),
        Direction::Replace => {
            if !config.is_installed(name) {
                return Err(not_installed());
            }
            let keep: BTreeSet<&str> = pkg.files.iter().map(|f| f.path.as_str()).collect();
            let mut out = drop_files(config, name, &keep);
            out.extend(place_files(config, pkg, &pkg.files)?);
            out.push(Statement::PackageDelete(package_op(pkg)));
            out.push(Statement::PackageAdd(package_op(pkg)));
            Ok(out)
        }
    }
}

/// Applies `statements` to a copy of `config`; nothing changes on error.
pub(crate) fn apply_all(
    config: &mut SystemConfiguration,
    statements: &[Statement],
) -> Result<Vec<ExecutedStatement>, Diagnostic> {
    let mut scratch = config.clone();
    let mut executed = Vec::with_capacity(statements.len());
    for st in statements {
        executed.push(apply_statement(&mut scratch, st, false)?.executed);
    }
    *config = scratch;
    Ok(executed)
}

/// Runs one deployment step. The transaction's id is assigned when it is
/// recorded in a log.
pub fn deploy_files(
    config: &SystemConfiguration,
    pkg: &PackageModel,
    direction: Direction,
) -> Result<(SystemConfiguration, Transaction), Diagnostic> {
    let statements = deploy_statements(config, pkg, direction)?;
    let mut next = config.clone();
    let executed = apply_all(&mut next, &statements)?;
    let txn = Transaction {
        id: 0,
        from_config: config_hash(config),
        to_config: config_hash(&next),
        trigger: Trigger {
            package: Some(pkg.id.clone()),
            action: None,
            script_kind: None,
            phase: Phase::FileDeploy,
        },
        executed,
        status: TxnStatus::Committed,
    };
    Ok((next, txn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_consistency, PackageId};

    fn pkg(name: &str) -> PackageModel {
        PackageModel::new(PackageId::new(name, "1.0", "amd64").unwrap())
            .with_file(&format!("/etc/{name}.conf"), FileKind::ConfigFile)
            .with_file(&format!("/usr/bin/{name}"), FileKind::Regular)
            .with_file(&format!("/usr/share/{name}/data"), FileKind::Regular)
    }

    #[test]
    fn unpack_onto_empty() {
        let (c, txn) =
            deploy_files(&SystemConfiguration::new(), &pkg("a"), Direction::Unpack).unwrap();
        assert_eq!(c.filesystem.len(), 3);
        assert!(c.is_installed("a"));
        assert_eq!(txn.executed.len(), 4);
        assert!(check_consistency(&c).is_empty());
        txn.verify_replay(&SystemConfiguration::new()).unwrap();
    }

    #[test]
    fn delete_keeps_config_files_disowned() {
        let p = pkg("a");
        let (c, _) = deploy_files(&SystemConfiguration::new(), &p, Direction::Unpack).unwrap();
        let (c, _) = deploy_files(&c, &p, Direction::Delete).unwrap();
        assert!(!c.is_installed("a"));
        assert_eq!(c.filesystem.len(), 1);
        assert_eq!(c.filesystem["/etc/a.conf"].owner, None);
        assert!(check_consistency(&c).is_empty());
        let (c, _) = deploy_files(&c, &p, Direction::PurgeConfig).unwrap();
        assert_eq!(c, SystemConfiguration::new());
    }

    #[test]
    fn reinstall_keeps_edited_config() {
        let p = pkg("a");
        let (mut c, _) = deploy_files(&SystemConfiguration::new(), &p, Direction::Unpack).unwrap();
        c.filesystem.get_mut("/etc/a.conf").unwrap().content_hash = Some("edited".into());
        let (c, _) = deploy_files(&c, &p, Direction::Delete).unwrap();
        let (c, _) = deploy_files(&c, &p, Direction::Unpack).unwrap();
        assert_eq!(
            c.filesystem["/etc/a.conf"].content_hash.as_deref(),
            Some("edited")
        );
        assert_eq!(c.filesystem["/etc/a.conf"].owner.as_deref(), Some("a"));
    }

    #[test]
    fn foreign_paths_conflict() {
        let (c, _) =
            deploy_files(&SystemConfiguration::new(), &pkg("a"), Direction::Unpack).unwrap();
        let intruder = PackageModel::new(PackageId::new("b", "1", "all").unwrap())
            .with_file("/usr/bin/a", FileKind::Regular);
        let err = deploy_files(&c, &intruder, Direction::Unpack).unwrap_err();
        assert_eq!(err.code, DiagnosticCode::FileConflict);
        let shared = PackageModel::new(PackageId::new("c", "1", "all").unwrap())
            .with_file("/usr/share/a", FileKind::Directory);
        let (c, _) = deploy_files(
            &c,
            &PackageModel::new(PackageId::new("d", "1", "all").unwrap())
                .with_file("/usr/share/a", FileKind::Directory),
            Direction::Unpack,
        )
        .unwrap();
        assert!(deploy_files(&c, &shared, Direction::Unpack).is_ok());
    }

    #[test]
    fn replace_swaps_files() {
        let old = pkg("a");
        let (c, _) = deploy_files(&SystemConfiguration::new(), &old, Direction::Unpack).unwrap();
        let new = PackageModel::new(PackageId::new("a", "2.0", "amd64").unwrap())
            .with_file("/etc/a.conf", FileKind::ConfigFile)
            .with_file("/usr/bin/a", FileKind::Regular)
            .with_file("/usr/lib/a.so", FileKind::Regular);
        let before_conf = c.filesystem["/etc/a.conf"].clone();
        let (c, _) = deploy_files(&c, &new, Direction::Replace).unwrap();
        assert_eq!(c.packages["a"].version.to_string(), "2.0");
        assert!(!c.filesystem.contains_key("/usr/share/a/data"));
        assert!(c.filesystem.contains_key("/usr/lib/a.so"));
        assert_eq!(c.filesystem["/etc/a.conf"], before_conf);
        assert_ne!(
            c.filesystem["/usr/bin/a"].content_hash,
            old.files[1].content_hash
        );
    }
}
