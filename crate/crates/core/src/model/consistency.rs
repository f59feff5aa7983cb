use serde::{Deserialize, Serialize};

use super::config::{ServiceState, SystemConfiguration};
use super::diagnostic::{Diagnostic, DiagnosticCode};
use super::package::Universe;

/// Switches for the individual checks; all on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConsistencyChecks {
    pub dangling_setting: bool,
    pub orphan_file: bool,
    pub missing_file: bool,
    pub dead_service: bool,
}

impl Default for ConsistencyChecks {
    fn default() -> Self {
        ConsistencyChecks {
            dangling_setting: true,
            orphan_file: true,
            missing_file: true,
            dead_service: true,
        }
    }
}

/// Path whose presence makes the module `name` of `owner` available, e.g.
/// `/etc/apache2/mods-available/php5.load`.
pub fn module_file(owner: &str, name: &str) -> String {
    format!("/etc/{owner}/mods-available/{name}.load")
}

pub fn init_script(service: &str) -> String {
    format!("/etc/init.d/{service}")
}

pub fn check_consistency(config: &SystemConfiguration) -> Vec<Diagnostic> {
    check_consistency_with(config, None, &ConsistencyChecks::default())
}

/// Runs the enabled checks. `MISSING_FILE` needs `universe` and is skipped
/// without it.
///
/// A setting key of the form `module:<m>` is live only while the module
/// file of its owner (see [`module_file`]) exists and is owned by an
/// installed package; `package:<p>` requires `p` to be installed. A
/// service belongs to the owner of its init script, or to the package of
/// the same name when there is no init script.
pub fn check_consistency_with(
    config: &SystemConfiguration,
    universe: Option<&Universe>,
    checks: &ConsistencyChecks,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let owned_by_installed = |path: &str| {
        config
            .filesystem
            .get(path)
            .and_then(|e| e.owner.as_deref())
            .is_some_and(|owner| config.is_installed(owner))
    };

    if checks.dangling_setting {
        for key in config.settings.keys() {
            let owner = &key.owner_package;
            let reason = if !config.is_installed(owner) {
                Some(format!("owner package {owner} is not installed"))
            } else if let Some(module) = key.setting_key.strip_prefix("module:") {
                let path = module_file(owner, module);
                (!owned_by_installed(&path)).then(|| {
                    format!("module {module} is not provided by any installed package ({path})")
                })
            } else if let Some(pkg) = key.setting_key.strip_prefix("package:") {
                (!config.is_installed(pkg)).then(|| format!("package {pkg} is not installed"))
            } else {
                None
            };
            if let Some(reason) = reason {
                out.push(
                    Diagnostic::error(
                        DiagnosticCode::DanglingSetting,
                        format!("setting {owner}/{}: {reason}", key.setting_key),
                    )
                    .at(Some(owner), None, None),
                );
            }
        }
    }

    if checks.orphan_file {
        for (path, entry) in &config.filesystem {
            if let Some(owner) = &entry.owner {
                if !config.is_installed(owner) {
                    out.push(
                        Diagnostic::error(
                            DiagnosticCode::OrphanFile,
                            format!("{path} is owned by {owner}, which is not installed"),
                        )
                        .at(Some(owner), None, None),
                    );
                }
            }
        }
    }

    if checks.missing_file {
        if let Some(universe) = universe {
            for (name, installed) in &config.packages {
                let Some(model) = universe.find(name, Some(&installed.version)) else {
                    continue;
                };
                for file in &model.files {
                    if !config.filesystem.contains_key(&file.path) {
                        out.push(
                            Diagnostic::warning(
                                DiagnosticCode::MissingFile,
                                format!("{} declared by {name} is absent", file.path),
                            )
                            .at(Some(name), None, None),
                        );
                    }
                }
            }
        }
    }

    if checks.dead_service {
        for (service, state) in &config.environment.services {
            if *state != ServiceState::Running {
                continue;
            }
            let script = init_script(service);
            let alive = match config.filesystem.get(&script) {
                Some(entry) => entry
                    .owner
                    .as_deref()
                    .is_some_and(|owner| config.is_installed(owner)),
                None => config.is_installed(service),
            };
            if !alive {
                out.push(Diagnostic::error(
                    DiagnosticCode::DeadService,
                    format!("service {service} is running but its package is not installed"),
                ));
            }
        }
    }

    out
}
