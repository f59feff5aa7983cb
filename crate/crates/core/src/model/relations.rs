use std::collections::BTreeMap;

use super::config::SystemConfiguration;
use super::diagnostic::{Diagnostic, DiagnosticCode};
use super::package::{PackageModel, Relation, Universe};
use super::plan::{PlanAction, UpgradePlan};
use super::version::Version;
use crate::error::{Error, Result};

/// Installed set reached by applying `plan` to `config`, name → version.
pub fn final_installed_set(
    config: &SystemConfiguration,
    plan: &UpgradePlan,
    universe: &Universe,
) -> Result<BTreeMap<String, Version>> {
    let mut installed: BTreeMap<String, Version> = config
        .packages
        .iter()
        .map(|(name, pkg)| (name.clone(), pkg.version.clone()))
        .collect();
    for action in &plan.actions {
        match action {
            PlanAction::Install { package } => {
                if universe
                    .find(&package.name, Some(&package.version))
                    .is_none()
                {
                    return Err(Error::UnknownPackage(package.to_string()));
                }
                installed.insert(package.name.clone(), package.version.clone());
            }
            PlanAction::Remove { name } | PlanAction::Purge { name } => {
                if !universe.contains_name(name) && !config.is_installed(name) {
                    return Err(Error::UnknownPackage(name.clone()));
                }
                installed.remove(name);
            }
            PlanAction::Upgrade {
                name, to_version, ..
            } => {
                if universe.find(name, Some(to_version)).is_none() {
                    return Err(Error::UnknownPackage(format!("{name} {to_version}")));
                }
                installed.insert(name.clone(), to_version.clone());
            }
        }
    }
    Ok(installed)
}

struct InstalledView<'a> {
    versions: &'a BTreeMap<String, Version>,
    models: BTreeMap<&'a str, &'a PackageModel>,
}

impl<'a> InstalledView<'a> {
    fn new(versions: &'a BTreeMap<String, Version>, universe: &'a Universe) -> Self {
        let models = versions
            .iter()
            .filter_map(|(name, v)| universe.find(name, Some(v)).map(|m| (name.as_str(), m)))
            .collect();
        InstalledView { versions, models }
    }

    /// Installed packages other than `except` that match `rel`, directly or,
    /// for unversioned relations, through `provides`.
    fn matches<'b>(
        &'b self,
        rel: &'b Relation,
        except: Option<&'b str>,
    ) -> impl Iterator<Item = &'a str> + 'b {
        self.versions.iter().filter_map(move |(name, version)| {
            if Some(name.as_str()) == except {
                return None;
            }
            let direct =
                name == &rel.name && rel.constraint.as_ref().is_none_or(|c| c.admits(version));
            let provided = rel.constraint.is_none()
                && self
                    .models
                    .get(name.as_str())
                    .is_some_and(|m| m.relationships.provides.iter().any(|p| p == &rel.name));
            (direct || provided).then_some(name.as_str())
        })
    }
}

fn describe(rel: &Relation) -> String {
    match &rel.constraint {
        Some(c) => format!(
            "{} ({} {})",
            rel.name,
            serde_json::to_value(c.op)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            c.version
        ),
        None => rel.name.clone(),
    }
}

/// Reports `MISSING_DEP` and `CONFLICT` for the installed set the plan
/// would produce. No alternative plan is searched for.
pub fn validate_plan_relationships(
    config: &SystemConfiguration,
    plan: &UpgradePlan,
    universe: &Universe,
) -> Result<Vec<Diagnostic>> {
    let installed = final_installed_set(config, plan, universe)?;
    let view = InstalledView::new(&installed, universe);
    let mut out = Vec::new();
    for (name, model) in &view.models {
        for clause in &model.relationships.depends {
            let satisfied = clause
                .iter()
                .any(|rel| view.matches(rel, None).next().is_some());
            if !satisfied {
                let alternatives: Vec<_> = clause.iter().map(describe).collect();
                out.push(
                    Diagnostic::error(
                        DiagnosticCode::MissingDep,
                        format!("{name} depends on {}", alternatives.join(" | ")),
                    )
                    .at(Some(name), None, None),
                );
            }
        }
        for rel in &model.relationships.conflicts {
            for other in view.matches(rel, Some(name)) {
                out.push(
                    Diagnostic::error(
                        DiagnosticCode::Conflict,
                        format!(
                            "{name} conflicts with {} (installed: {other})",
                            describe(rel)
                        ),
                    )
                    .at(Some(name), None, None),
                );
            }
        }
    }
    Ok(out)
}
