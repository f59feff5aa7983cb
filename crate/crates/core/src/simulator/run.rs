use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::apply::apply_statement;
use super::deploy::{apply_all, deploy_statements, Direction};
use super::eval::{GuardMemo, ScriptEnv, Truth};
use crate::logrollback::record_transaction;
use crate::model::{
    check_consistency_with, config_hash, has_errors, validate_plan_relationships, ConfigId,
    ConsistencyChecks, Diagnostic, DiagnosticCode, Dialect, LogModel, PackageId, PackageModel,
    Phase, PlanAction, ScriptKind, ScriptSlot, SystemConfiguration, Transaction, Trigger,
    TxnStatus, Universe, UpgradePlan,
};
use crate::par::{self, ExecMode};

/// A maintainer-script invocation within a plan action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    InstallPreinst,
    InstallPostinst,
    RemovePrerm,
    RemovePostrm,
    PurgePrerm,
    PurgePostrm,
    UpgradePrerm,
    UpgradePreinst,
    UpgradePostinst,
}

impl Step {
    pub fn slot(self) -> ScriptSlot {
        use Step::*;
        match self {
            InstallPreinst | UpgradePreinst => ScriptSlot::PreInstall,
            InstallPostinst | UpgradePostinst => ScriptSlot::PostInstall,
            RemovePrerm | PurgePrerm | UpgradePrerm => ScriptSlot::PreRemove,
            RemovePostrm | PurgePostrm => ScriptSlot::PostRemove,
        }
    }
}

/// Value of `$1` for each step, per dialect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgTable {
    pub debian: BTreeMap<Step, String>,
    pub rpm: BTreeMap<Step, String>,
}

impl Default for ArgTable {
    fn default() -> Self {
        use Step::*;
        let table =
            |pairs: [(Step, &str); 9]| pairs.into_iter().map(|(s, a)| (s, a.to_string())).collect();
        ArgTable {
            debian: table([
                (InstallPreinst, "install"),
                (InstallPostinst, "configure"),
                (RemovePrerm, "remove"),
                (RemovePostrm, "remove"),
                (PurgePrerm, "remove"),
                (PurgePostrm, "purge"),
                (UpgradePrerm, "upgrade"),
                (UpgradePreinst, "upgrade"),
                (UpgradePostinst, "configure"),
            ]),
            // Number of package instances left after the operation.
            rpm: table([
                (InstallPreinst, "1"),
                (InstallPostinst, "1"),
                (RemovePrerm, "0"),
                (RemovePostrm, "0"),
                (PurgePrerm, "0"),
                (PurgePostrm, "0"),
                (UpgradePrerm, "1"),
                (UpgradePreinst, "2"),
                (UpgradePostinst, "2"),
            ]),
        }
    }
}

impl ArgTable {
    pub fn arg(&self, dialect: Dialect, step: Step) -> &str {
        let table = match dialect {
            Dialect::Debian => &self.debian,
            Dialect::Rpm => &self.rpm,
        };
        table.get(&step).map_or("", String::as_str)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationOptions {
    #[serde(default)]
    pub args: ArgTable,
    #[serde(default)]
    pub checks: ConsistencyChecks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum SimulationResult {
    Valid {
        #[serde(rename = "final")]
        final_config: SystemConfiguration,
        log: LogModel,
        warnings: Vec<Diagnostic>,
    },
    NotValid {
        diagnostics: Vec<Diagnostic>,
        partial_log: LogModel,
        /// Latest action boundary whose configuration passed the
        /// consistency check; the starting configuration if none did.
        last_good: ConfigId,
    },
}

impl SimulationResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, SimulationResult::Valid { .. })
    }

    pub fn log(&self) -> &LogModel {
        match self {
            SimulationResult::Valid { log, .. } => log,
            SimulationResult::NotValid { partial_log, .. } => partial_log,
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            SimulationResult::Valid { warnings, .. } => warnings,
            SimulationResult::NotValid { diagnostics, .. } => diagnostics,
        }
    }
}

struct Session<'a> {
    config: SystemConfiguration,
    log: LogModel,
    diags: Vec<Diagnostic>,
    universe: &'a Universe,
    options: &'a SimulationOptions,
    /// Set once the current action produced an error.
    failed: bool,
}

impl Session<'_> {
    fn error(&mut self, d: Diagnostic) {
        self.failed = true;
        self.diags.push(d);
    }

    fn record(
        &mut self,
        from: ConfigId,
        next: Option<SystemConfiguration>,
        trigger: Trigger,
        executed: Vec<crate::model::ExecutedStatement>,
    ) {
        let (to, status) = match next {
            Some(next) => {
                let to = config_hash(&next);
                self.config = next;
                (to, TxnStatus::Committed)
            }
            None => (from.clone(), TxnStatus::Aborted),
        };
        let txn = Transaction {
            id: 0,
            from_config: from,
            to_config: to,
            trigger,
            executed,
            status,
        };
        record_transaction(&mut self.log, txn).expect("the session appends at its own head");
    }

    fn run_script(&mut self, pkg: &PackageModel, step: Step, action: &PlanAction) {
        let dialect = pkg.dialect();
        let kind = ScriptKind::for_slot(dialect, step.slot());
        let env = ScriptEnv::new(self.options.args.arg(dialect, step));
        let name = pkg.id.name.clone();
        let from = config_hash(&self.config);
        let mut scratch = self.config.clone();
        let mut executed = Vec::new();
        let mut ok = true;
        if let Some(script) = pkg.scripts.get(&kind) {
            let mut memo = GuardMemo::default();
            for block in &script.blocks {
                match memo.evaluate(&scratch, &block.guard, &env) {
                    Truth::True => {}
                    Truth::False => continue,
                    Truth::Unknown => {
                        let line = block.statements.first().map(|s| s.line);
                        let terms: Vec<String> = block
                            .guard
                            .iter()
                            .map(|t| t.predicate.to_string())
                            .collect();
                        self.diags.push(
                            Diagnostic::warning(
                                DiagnosticCode::UnevaluableGuard,
                                format!(
                                    "skipped {} statement(s) under [{}]",
                                    block.statements.len(),
                                    terms.join(" && ")
                                ),
                            )
                            .at(Some(&name), Some(kind), line),
                        );
                        continue;
                    }
                }
                for ms in &block.statements {
                    match apply_statement(&mut scratch, &ms.statement, ms.tolerant) {
                        Ok(applied) => {
                            executed.push(applied.executed);
                            if let Some(w) = applied.warning {
                                self.diags
                                    .push(w.at(Some(&name), Some(kind), Some(ms.line)));
                            }
                        }
                        Err(d) => {
                            ok = false;
                            self.error(d.at(Some(&name), Some(kind), Some(ms.line)));
                        }
                    }
                }
            }
        }
        let trigger = Trigger {
            package: Some(pkg.id.clone()),
            action: Some(action.clone()),
            script_kind: Some(kind),
            phase: Phase::Script,
        };
        self.record(from, ok.then_some(scratch), trigger, executed);
    }

    fn deploy(&mut self, pkg: &PackageModel, direction: Direction, action: &PlanAction) {
        let from = config_hash(&self.config);
        let trigger = Trigger {
            package: Some(pkg.id.clone()),
            action: Some(action.clone()),
            script_kind: None,
            phase: Phase::FileDeploy,
        };
        let mut next = self.config.clone();
        let outcome = deploy_statements(&self.config, pkg, direction)
            .and_then(|sts| apply_all(&mut next, &sts));
        match outcome {
            Ok(executed) => self.record(from, Some(next), trigger, executed),
            Err(d) => {
                self.error(d);
                self.record(from, None, trigger, Vec::new());
            }
        }
    }

    /// Model for an installed package the universe may not know: no
    /// scripts, and its files are whatever the configuration says it owns.
    fn installed_model(&self, name: &str) -> Option<PackageModel> {
        let installed = self.config.packages.get(name)?;
        Some(
            self.universe
                .find(name, Some(&installed.version))
                .cloned()
                .unwrap_or_else(|| {
                    PackageModel::new(PackageId {
                        name: name.to_string(),
                        version: installed.version.clone(),
                        architecture: installed.architecture.clone(),
                    })
                }),
        )
    }

    fn unknown(&mut self, what: String) {
        self.error(Diagnostic::error(
            DiagnosticCode::UnknownPackage,
            format!("{what} is not in the universe"),
        ));
    }

    fn not_installed(&mut self, name: &str) {
        self.error(
            Diagnostic::error(
                DiagnosticCode::PackageNotInstalled,
                format!("{name} is not installed"),
            )
            .at(Some(name), None, None),
        );
    }

    fn run_action(&mut self, action: &PlanAction) {
        match action {
            PlanAction::Install { package } => {
                let Some(model) = self.universe.find(&package.name, Some(&package.version)) else {
                    return self.unknown(package.to_string());
                };
                self.run_script(model, Step::InstallPreinst, action);
                self.deploy(model, Direction::Unpack, action);
                self.run_script(model, Step::InstallPostinst, action);
            }
            PlanAction::Remove { name } => {
                let Some(model) = self.installed_model(name) else {
                    return self.not_installed(name);
                };
                self.run_script(&model, Step::RemovePrerm, action);
                self.deploy(&model, Direction::Delete, action);
                self.run_script(&model, Step::RemovePostrm, action);
            }
            PlanAction::Purge { name } => {
                if let Some(model) = self.installed_model(name) {
                    self.run_script(&model, Step::PurgePrerm, action);
                    self.deploy(&model, Direction::Delete, action);
                    self.deploy(&model, Direction::PurgeConfig, action);
                    self.run_script(&model, Step::PurgePostrm, action);
                } else if let Some(model) = self.universe.find(name, None) {
                    // Removed earlier; only its config files are left.
                    self.deploy(model, Direction::PurgeConfig, action);
                    self.run_script(model, Step::PurgePostrm, action);
                } else {
                    self.not_installed(name);
                }
            }
            PlanAction::Upgrade {
                name,
                from_version,
                to_version,
            } => {
                let Some(old) = self.installed_model(name) else {
                    return self.not_installed(name);
                };
                if &old.id.version != from_version {
                    return self.error(
                        Diagnostic::error(
                            DiagnosticCode::InvalidPlan,
                            format!("{name} is at {}, not {from_version}", old.id.version),
                        )
                        .at(Some(name), None, None),
                    );
                }
                let Some(new) = self.universe.find(name, Some(to_version)) else {
                    return self.unknown(format!("{name} {to_version}"));
                };
                self.run_script(&old, Step::UpgradePrerm, action);
                self.run_script(new, Step::UpgradePreinst, action);
                self.deploy(new, Direction::Replace, action);
                self.run_script(new, Step::UpgradePostinst, action);
            }
        }
    }
}

/// Dry-runs `plan` over `config`.
///
/// Each script slot and each deployment step becomes one transaction; a
/// step with an error is logged as aborted and leaves the configuration
/// as it was. The remaining steps of a failing action still run so that
/// their diagnostics are reported, but no later action starts.
pub fn simulate_upgrade(
    config: &SystemConfiguration,
    plan: &UpgradePlan,
    universe: &Universe,
    options: &SimulationOptions,
) -> SimulationResult {
    let origin = config_hash(config);
    let not_valid = |diagnostics: Vec<Diagnostic>| SimulationResult::NotValid {
        diagnostics,
        partial_log: LogModel::starting_at(origin.clone()),
        last_good: origin.clone(),
    };
    if let Err(e) = plan.validate() {
        return not_valid(vec![Diagnostic::error(
            DiagnosticCode::InvalidPlan,
            e.to_string(),
        )]);
    }
    let mut diags = match validate_plan_relationships(config, plan, universe) {
        Ok(d) => d,
        Err(e) => vec![Diagnostic::error(
            DiagnosticCode::UnknownPackage,
            e.to_string(),
        )],
    };
    if has_errors(&diags) {
        return not_valid(diags);
    }
    let mut session = Session {
        config: config.clone(),
        log: LogModel::starting_at(origin.clone()),
        diags: std::mem::take(&mut diags),
        universe,
        options,
        failed: false,
    };
    let mut last_good = origin;
    for action in &plan.actions {
        session.run_action(action);
        if session.failed {
            break;
        }
        if !has_errors(&check_consistency_with(
            &session.config,
            Some(universe),
            &options.checks,
        )) {
            last_good = config_hash(&session.config);
        }
    }
    let mut diags = session.diags;
    if !session.failed {
        diags.extend(check_consistency_with(
            &session.config,
            Some(universe),
            &options.checks,
        ));
    }
    if has_errors(&diags) {
        SimulationResult::NotValid {
            diagnostics: diags,
            partial_log: session.log,
            last_good,
        }
    } else {
        SimulationResult::Valid {
            final_config: session.config,
            log: session.log,
            warnings: diags,
        }
    }
}

/// Independent simulations; sessions run in parallel in
/// [`ExecMode::Parallel`], each one sequentially.
pub fn simulate_many(
    mode: ExecMode,
    sessions: &[(SystemConfiguration, UpgradePlan)],
    universe: &Universe,
    options: &SimulationOptions,
) -> Vec<SimulationResult> {
    par::map(mode, sessions, |(config, plan)| {
        simulate_upgrade(config, plan, universe, options)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::injector::{inject_script, ClassifierTable, MarkerConfig};
    use crate::model::{
        FileEntry, FileKind, InstalledPackage, PackageId, ScriptModel, ServiceState, SettingKey,
        Version,
    };

    const POSTINST: &str = include_str!("../../tests/fixtures/php5/postinst");
    const PRERM: &str = include_str!("../../tests/fixtures/php5/prerm");
    const POSTRM: &str = include_str!("../../tests/fixtures/php5/postrm");

    fn script(text: &str, kind: ScriptKind) -> ScriptModel {
        inject_script(
            text,
            kind,
            &ClassifierTable::default(),
            &MarkerConfig::default(),
        )
        .0
    }

    fn php5(prerm: &str) -> PackageModel {
        PackageModel::new(PackageId::new("libapache2-mod-php5", "5.2.6", "amd64").unwrap())
            .with_file(
                "/etc/apache2/mods-available/php5.load",
                FileKind::ConfigFile,
            )
            .with_file("/usr/lib/apache2/modules/libphp5.so", FileKind::Regular)
            .with_file("/usr/share/php5/php.ini-dist", FileKind::Regular)
            .with_script(script(POSTINST, ScriptKind::DebPostinst))
            .with_script(script(prerm, ScriptKind::DebPrerm))
            .with_script(script(POSTRM, ScriptKind::DebPostrm))
    }

    fn base() -> SystemConfiguration {
        let mut c = SystemConfiguration::new();
        c.packages.insert(
            "apache2".into(),
            InstalledPackage {
                version: Version::new("2.2.9"),
                architecture: "amd64".into(),
            },
        );
        for path in ["/etc/apache2/apache2.conf", "/etc/init.d/apache2"] {
            c.filesystem.insert(
                path.into(),
                FileEntry {
                    owner: Some("apache2".into()),
                    kind: FileKind::ConfigFile,
                    content_hash: None,
                },
            );
        }
        c.environment
            .services
            .insert("apache2".into(), ServiceState::Running);
        c
    }

    fn universe(prerm: &str) -> Universe {
        [php5(prerm)].into_iter().collect()
    }

    fn install() -> UpgradePlan {
        UpgradePlan::new(vec![PlanAction::Install {
            package: php5("").id,
        }])
        .unwrap()
    }

    fn purge() -> UpgradePlan {
        UpgradePlan::new(vec![PlanAction::Purge {
            name: "libapache2-mod-php5".into(),
        }])
        .unwrap()
    }

    fn run(config: &SystemConfiguration, plan: &UpgradePlan, prerm: &str) -> SimulationResult {
        simulate_upgrade(
            config,
            plan,
            &universe(prerm),
            &SimulationOptions::default(),
        )
    }

    fn installed() -> SystemConfiguration {
        match run(&base(), &install(), PRERM) {
            SimulationResult::Valid { final_config, .. } => final_config,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn install_enables_the_module() {
        let result = run(&base(), &install(), PRERM);
        let SimulationResult::Valid {
            final_config,
            log,
            warnings,
        } = &result
        else {
            panic!("{result:?}");
        };
        assert!(warnings.is_empty(), "{warnings:?}");
        assert!(final_config
            .settings
            .contains_key(&SettingKey::new("apache2", "module:php5")));
        assert!(final_config
            .filesystem
            .contains_key("/etc/php5/apache2/php.ini"));
        assert_eq!(log.len(), 3);
        assert!(log.transactions.iter().all(|t| t.is_committed()));
        assert_eq!(log.head(), Some(&config_hash(final_config)));
        assert_eq!(&log.replay(&base()).unwrap(), final_config);
    }

    #[test]
    fn remove_disables_the_module() {
        let plan = UpgradePlan::new(vec![PlanAction::Remove {
            name: "libapache2-mod-php5".into(),
        }])
        .unwrap();
        let result = run(&installed(), &plan, PRERM);
        assert!(result.is_valid(), "{result:?}");
    }

    #[test]
    fn remove_without_prerm_leaves_a_dangling_setting() {
        let plan = UpgradePlan::new(vec![PlanAction::Remove {
            name: "libapache2-mod-php5".into(),
        }])
        .unwrap();
        let start = installed();
        let result = run(&start, &plan, "#!/bin/sh\n");
        let SimulationResult::NotValid {
            diagnostics,
            partial_log,
            last_good,
        } = &result
        else {
            panic!("{result:?}");
        };
        assert!(diagnostics
            .iter()
            .any(|d| d.code == DiagnosticCode::DanglingSetting));
        assert_eq!(partial_log.len(), 3);
        assert_eq!(last_good, &config_hash(&start));
    }

    #[test]
    fn install_then_purge_restores_the_start() {
        let result = run(&installed(), &purge(), PRERM);
        let SimulationResult::Valid {
            final_config, log, ..
        } = &result
        else {
            panic!("{result:?}");
        };
        assert_eq!(config_hash(final_config), config_hash(&base()));
        assert_eq!(log.len(), 4);
    }

    #[test]
    fn failing_step_aborts_and_halts() {
        let plan = UpgradePlan::new(vec![
            PlanAction::Remove {
                name: "libapache2-mod-php5".into(),
            },
            PlanAction::Purge {
                name: "apache2".into(),
            },
        ])
        .unwrap();
        let result = run(&base(), &plan, PRERM);
        let SimulationResult::NotValid {
            diagnostics,
            partial_log,
            ..
        } = &result
        else {
            panic!("{result:?}");
        };
        assert_eq!(diagnostics[0].code, DiagnosticCode::PackageNotInstalled);
        assert!(partial_log.is_empty());
    }

    #[test]
    fn aborted_transactions_keep_the_configuration() {
        let mut start = installed();
        // A stray copy of the module file makes the reinstall conflict.
        start.packages.remove("libapache2-mod-php5");
        start.settings.clear();
        start
            .filesystem
            .get_mut("/usr/lib/apache2/modules/libphp5.so")
            .unwrap()
            .owner = Some("apache2".into());
        let result = run(&start, &install(), PRERM);
        let SimulationResult::NotValid {
            diagnostics,
            partial_log,
            last_good,
        } = &result
        else {
            panic!("{result:?}");
        };
        assert!(diagnostics
            .iter()
            .any(|d| d.code == DiagnosticCode::FileConflict));
        let aborted: Vec<_> = partial_log
            .transactions
            .iter()
            .filter(|t| !t.is_committed())
            .collect();
        assert_eq!(aborted.len(), 1);
        assert_eq!(aborted[0].from_config, aborted[0].to_config);
        assert_eq!(last_good, &config_hash(&start));
    }

    #[test]
    fn simulation_is_deterministic() {
        let sessions = vec![(base(), install()); 4];
        let u = universe(PRERM);
        let seq = simulate_many(
            ExecMode::Sequential,
            &sessions,
            &u,
            &SimulationOptions::default(),
        );
        let par = simulate_many(
            ExecMode::Parallel,
            &sessions,
            &u,
            &SimulationOptions::default(),
        );
        assert_eq!(seq, par);
        assert!(seq.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn rpm_arguments_are_counts() {
        let args = ArgTable::default();
        assert_eq!(args.arg(Dialect::Rpm, Step::UpgradePreinst), "2");
        assert_eq!(args.arg(Dialect::Debian, Step::PurgePostrm), "purge");
    }
}
