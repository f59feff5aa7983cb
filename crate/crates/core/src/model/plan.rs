use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::package::PackageId;
use super::version::Version;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum PlanAction {
    Install {
        package: PackageId,
    },
    Remove {
        name: String,
    },
    Purge {
        name: String,
    },
    Upgrade {
        name: String,
        from_version: Version,
        to_version: Version,
    },
}

impl PlanAction {
    pub fn package_name(&self) -> &str {
        match self {
            PlanAction::Install { package } => &package.name,
            PlanAction::Remove { name }
            | PlanAction::Purge { name }
            | PlanAction::Upgrade { name, .. } => name,
        }
    }

    pub fn verb(&self) -> &'static str {
        match self {
            PlanAction::Install { .. } => "install",
            PlanAction::Remove { .. } => "remove",
            PlanAction::Purge { .. } => "purge",
            PlanAction::Upgrade { .. } => "upgrade",
        }
    }
}

/// Ordered package actions. Serializes as a bare JSON list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UpgradePlan {
    pub actions: Vec<PlanAction>,
}

impl UpgradePlan {
    pub fn new(actions: Vec<PlanAction>) -> Result<Self> {
        let plan = UpgradePlan { actions };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for action in &self.actions {
            if !seen.insert(action.package_name()) {
                return Err(Error::invalid(
                    "upgrade plan",
                    format!("{} appears more than once", action.package_name()),
                ));
            }
        }
        Ok(())
    }
}
