//! Transaction log, statement inversion and rollback.

mod file;

pub use file::{
    append_transaction, read_log, read_log_file, write_log, write_log_file, LOG_FORMAT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    config_hash, ConfigId, EnvOp, ExecutedStatement, FileKind, FileOp, Image, LogModel, PackageOp,
    Phase, Registry, SettingOp, StateKey, Statement, SystemConfiguration, Transaction, Trigger,
    TxnStatus,
};
use crate::simulator::apply_statement;

/// Appends `txn`, which must start at the log head. An empty log without
/// an origin adopts the transaction's start as its origin. The log assigns
/// the transaction id.
pub fn record_transaction(log: &mut LogModel, mut txn: Transaction) -> Result<()> {
    match log.head() {
        Some(head) if *head != txn.from_config => {
            return Err(Error::LogDiscontinuity {
                expected: head.clone(),
                found: txn.from_config,
            })
        }
        Some(_) => {}
        None => {
            log.origin = Some(txn.from_config.clone());
            log.checkpoints.insert(txn.from_config.clone(), 0);
        }
    }
    if !txn.is_committed() && txn.to_config != txn.from_config {
        return Err(Error::invalid(
            "transaction",
            "an aborted transaction must end where it started",
        ));
    }
    txn.id = log.next_id();
    if txn.is_committed() {
        log.checkpoints
            .insert(txn.to_config.clone(), log.transactions.len() + 1);
    }
    log.transactions.push(txn);
    Ok(())
}

const UNDO: &str = "rollback";

fn missing(exec: &ExecutedStatement) -> Error {
    Error::MissingPreimage(format!(
        "{} recorded {:?} before and {:?} after",
        exec.statement, exec.pre_image, exec.post_image
    ))
}

/// Statements that take the entry touched by `exec` from its post-image
/// back to its pre-image. Derived from the recorded images, so the result
/// is exact whatever command produced the change.
pub fn invert_statement(exec: &ExecutedStatement) -> Result<Vec<Statement>> {
    if exec.is_noop() {
        return Ok(Vec::new());
    }
    let Some(key) = exec.statement.key() else {
        return Err(missing(exec));
    };
    let (pre, post) = (&exec.pre_image, &exec.post_image);
    let out = match (&key, pre) {
        (StateKey::File { path }, Image::Absent) => {
            let kind = match post {
                Image::File(e) => e.kind,
                _ => FileKind::Regular,
            };
            vec![Statement::FileSystemDelete(FileOp {
                path: path.clone(),
                payload: None,
                command: UNDO.into(),
                kind,
                entry: None,
            })]
        }
        (StateKey::File { path }, Image::File(entry)) => {
            let op = FileOp {
                path: path.clone(),
                payload: None,
                command: UNDO.into(),
                kind: entry.kind,
                entry: Some(entry.clone()),
            };
            vec![if *post == Image::Absent {
                Statement::FileSystemAdd(op)
            } else {
                Statement::FileSystemUpdate(op)
            }]
        }
        (
            StateKey::Environment { registry, entity },
            Image::Absent | Image::Present | Image::Service(_),
        ) => {
            let state = match pre {
                Image::Service(s) => Some(*s),
                _ => None,
            };
            if matches!(pre, Image::Present) && *registry == Registry::Services {
                return Err(missing(exec));
            }
            let op = EnvOp {
                registry: *registry,
                entity: entity.clone(),
                command: UNDO.into(),
                state,
            };
            vec![match (pre, post) {
                (Image::Absent, _) => Statement::EnvironmentDelete(op),
                (_, Image::Absent) => Statement::EnvironmentAdd(op),
                _ => Statement::EnvironmentUpdate(op),
            }]
        }
        (
            StateKey::Setting {
                owner_package,
                setting_key,
            },
            Image::Absent | Image::Setting(_),
        ) => {
            let op = SettingOp {
                owner_package: owner_package.clone(),
                setting_key: setting_key.clone(),
                value: match pre {
                    Image::Setting(v) => v.clone(),
                    _ => None,
                },
                command: UNDO.into(),
            };
            vec![match (pre, post) {
                (Image::Absent, _) => Statement::PackageSettingDelete(op),
                (_, Image::Absent) => Statement::PackageSettingAdd(op),
                _ => Statement::PackageSettingUpdate(op),
            }]
        }
        (StateKey::Package { name }, Image::Absent | Image::Package(_)) => {
            let op = |version, architecture| PackageOp {
                name: name.clone(),
                version,
                architecture,
                command: UNDO.into(),
            };
            match pre {
                Image::Package(p) => {
                    let add = Statement::PackageAdd(op(
                        Some(p.version.clone()),
                        Some(p.architecture.clone()),
                    ));
                    if *post == Image::Absent {
                        vec![add]
                    } else {
                        vec![Statement::PackageDelete(op(None, None)), add]
                    }
                }
                _ => vec![Statement::PackageDelete(op(None, None))],
            }
        }
        _ => return Err(missing(exec)),
    };
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollbackPlan {
    pub target: ConfigId,
    /// Log head the plan starts from.
    pub head: ConfigId,
    /// Inverse statements, newest change first.
    pub steps: Vec<Statement>,
    /// Indices of the first and last transaction undone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_span: Option<(usize, usize)>,
}

/// Plan that undoes every committed transaction after the checkpoint
/// `target`, newest first.
pub fn rollback_plan(log: &LogModel, target: &ConfigId) -> Result<RollbackPlan> {
    let &position = log
        .checkpoints
        .get(target)
        .ok_or_else(|| Error::UnknownConfig(target.clone()))?;
    let head = log.head().cloned().unwrap_or_else(|| target.clone());
    let mut steps = Vec::new();
    let mut span: Option<(usize, usize)> = None;
    for (i, txn) in log.transactions.iter().enumerate().skip(position).rev() {
        if !txn.is_committed() {
            continue;
        }
        span = Some((i, span.map_or(i, |(_, last)| last)));
        for exec in txn.executed.iter().rev() {
            steps.extend(invert_statement(exec)?);
        }
    }
    Ok(RollbackPlan {
        target: target.clone(),
        head,
        steps,
        source_span: span,
    })
}

/// Applies the plan to `config`, all or nothing, and returns the restored
/// configuration with one compensating transaction.
pub fn execute_rollback(
    config: &SystemConfiguration,
    plan: &RollbackPlan,
) -> Result<(SystemConfiguration, Transaction)> {
    let from = config_hash(config);
    if from != plan.head {
        return Err(Error::RollbackFailed {
            step: 0,
            reason: format!(
                "configuration {} is not the plan's head {}",
                from.short(),
                plan.head.short()
            ),
        });
    }
    let mut next = config.clone();
    let mut executed = Vec::with_capacity(plan.steps.len());
    for (i, step) in plan.steps.iter().enumerate() {
        let applied =
            apply_statement(&mut next, step, false).map_err(|d| Error::RollbackFailed {
                step: i,
                reason: d.to_string(),
            })?;
        executed.push(applied.executed);
    }
    let to = config_hash(&next);
    if to != plan.target {
        return Err(Error::RollbackFailed {
            step: plan.steps.len(),
            reason: format!("reached {} instead of {}", to.short(), plan.target.short()),
        });
    }
    let txn = Transaction {
        id: 0,
        from_config: from,
        to_config: to,
        trigger: Trigger {
            package: None,
            action: None,
            script_kind: None,
            phase: Phase::Rollback,
        },
        executed,
        status: TxnStatus::Committed,
    };
    Ok((next, txn))
}

/// Plans, executes and records a rollback to `target`.
pub fn rollback_to(
    log: &mut LogModel,
    config: &SystemConfiguration,
    target: &ConfigId,
) -> Result<SystemConfiguration> {
    let plan = rollback_plan(log, target)?;
    let (restored, txn) = execute_rollback(config, &plan)?;
    record_transaction(log, txn)?;
    Ok(restored)
}
