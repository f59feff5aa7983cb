use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{config_hash, ConfigId, SystemConfiguration};
use super::package::{PackageId, ScriptKind};
use super::plan::PlanAction;
use super::statement::{Image, Statement};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutedStatement {
    pub statement: Statement,
    pub pre_image: Image,
    pub post_image: Image,
}

impl ExecutedStatement {
    /// Neutral and opaque statements, and updates that rewrote an entry
    /// with its current value, leave the configuration untouched.
    pub fn is_noop(&self) -> bool {
        self.pre_image == self.post_image
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Script,
    FileDeploy,
    /// Compensating transaction written by a rollback.
    Rollback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trigger {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package: Option<PackageId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<PlanAction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script_kind: Option<ScriptKind>,
    pub phase: Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxnStatus {
    Committed,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub id: u64,
    pub from_config: ConfigId,
    pub to_config: ConfigId,
    pub trigger: Trigger,
    pub executed: Vec<ExecutedStatement>,
    pub status: TxnStatus,
}

impl Transaction {
    pub fn is_committed(&self) -> bool {
        self.status == TxnStatus::Committed
    }

    /// Writes each executed post-image over `from`. Aborted transactions
    /// changed nothing and replay to `from` unchanged.
    pub fn replay(&self, from: &SystemConfiguration) -> Result<SystemConfiguration> {
        let mut config = from.clone();
        if !self.is_committed() {
            return Ok(config);
        }
        for exec in &self.executed {
            if let Some(key) = exec.statement.key() {
                config.set_image(&key, &exec.post_image)?;
            }
        }
        Ok(config)
    }

    /// Checks the replay of `from` lands on `to_config`.
    pub fn verify_replay(&self, from: &SystemConfiguration) -> Result<SystemConfiguration> {
        if config_hash(from) != self.from_config {
            return Err(Error::invalid(
                "transaction",
                format!(
                    "transaction {} does not start at the given configuration",
                    self.id
                ),
            ));
        }
        let to = self.replay(from)?;
        if config_hash(&to) != self.to_config {
            return Err(Error::invalid(
                "transaction",
                format!(
                    "transaction {} replays to a different configuration",
                    self.id
                ),
            ));
        }
        Ok(to)
    }
}

/// Ordered transactions plus the checkpoint index.
///
/// `checkpoints` maps each configuration that ever held to the number of
/// transactions applied at that moment (0 is the origin). A configuration
/// seen more than once keeps its latest position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<ConfigId>,
    pub transactions: Vec<Transaction>,
    pub checkpoints: BTreeMap<ConfigId, usize>,
}

impl LogModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Empty log anchored at `origin`, which is immediately a checkpoint.
    pub fn starting_at(origin: ConfigId) -> Self {
        let mut checkpoints = BTreeMap::new();
        checkpoints.insert(origin.clone(), 0);
        LogModel {
            origin: Some(origin),
            transactions: Vec::new(),
            checkpoints,
        }
    }

    pub fn head(&self) -> Option<&ConfigId> {
        self.transactions
            .last()
            .map(|t| &t.to_config)
            .or(self.origin.as_ref())
    }

    pub fn next_id(&self) -> u64 {
        self.transactions.last().map_or(1, |t| t.id + 1)
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn committed(&self) -> impl Iterator<Item = &Transaction> {
        self.transactions.iter().filter(|t| t.is_committed())
    }

    /// Rebuilds the checkpoint index from the transaction chain.
    pub fn rebuild_checkpoints(&mut self) {
        self.checkpoints.clear();
        let origin = self
            .origin
            .clone()
            .or_else(|| self.transactions.first().map(|t| t.from_config.clone()));
        if let Some(origin) = origin {
            self.checkpoints.insert(origin, 0);
        }
        for (i, txn) in self.transactions.iter().enumerate() {
            if txn.is_committed() {
                self.checkpoints.insert(txn.to_config.clone(), i + 1);
            }
        }
    }

    /// Replays every committed transaction over `origin`, checking hashes.
    pub fn replay(&self, origin: &SystemConfiguration) -> Result<SystemConfiguration> {
        let mut config = origin.clone();
        for txn in &self.transactions {
            config = txn.verify_replay(&config)?;
        }
        Ok(config)
    }
}
