use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::parse::CommandInvocation;
use super::word::literal_text;
use crate::error::{Error, Result};
use crate::model::{
    Action, EnvOp, Family, FileKind, FileOp, Registry, ServiceState, SettingOp, Statement,
};

/// Which operands (non-option arguments) a rule reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgSpec {
    /// One statement per operand.
    Each,
    First,
    Last,
    /// No operand; the rule's fixed `entity` is used.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierRule {
    pub family: Family,
    pub variant: Action,
    pub arg_spec: ArgSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry: Option<Registry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_kind: Option<FileKind>,
    /// Setting owner for package-setting rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<String>,
    /// Setting key with `{}` standing for the operand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity: Option<String>,
    /// Flags that make absence or presence errors harmless (`rm -f`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub force_flags: Vec<String>,
    /// Operand position holding a service action such as `stop`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_arg: Option<usize>,
}

impl ClassifierRule {
    fn new(family: Family, variant: Action, arg_spec: ArgSpec) -> Self {
        ClassifierRule {
            family,
            variant,
            arg_spec,
            registry: None,
            file_kind: None,
            owner: None,
            key_template: None,
            entity: None,
            force_flags: Vec::new(),
            state_arg: None,
        }
    }

    fn registry(mut self, r: Registry) -> Self {
        self.registry = Some(r);
        self
    }

    fn kind(mut self, k: FileKind) -> Self {
        self.file_kind = Some(k);
        self
    }

    fn entity(mut self, e: &str) -> Self {
        self.entity = Some(e.to_string());
        self
    }

    fn setting(mut self, owner: &str, template: &str) -> Self {
        self.owner = Some(owner.to_string());
        self.key_template = Some(template.to_string());
        self
    }

    fn force(mut self, flags: &[&str]) -> Self {
        self.force_flags = flags.iter().map(|f| f.to_string()).collect();
        self
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::invalid(
                "classifier rule",
                format!("{name}: {reason}"),
            ))
        };
        match (self.family, self.variant) {
            (Family::Neutral | Family::Opaque, Action::None) => {}
            (Family::FileSystem | Family::Environment | Family::PackageSetting, Action::None) => {
                return bad("variant must be add, delete or update".into())
            }
            (Family::FileSystem | Family::Environment | Family::PackageSetting, _) => {}
            (family, variant) => {
                return bad(format!("{family:?}/{variant:?} is not a script statement"))
            }
        }
        match self.family {
            Family::Environment if self.registry.is_none() => {
                return bad("environment rule needs a registry".into())
            }
            Family::PackageSetting if self.owner.as_deref().is_none_or(str::is_empty) => {
                return bad("package-setting rule needs an owner".into())
            }
            Family::FileSystem if self.arg_spec == ArgSpec::None => {
                return bad("file-system rule needs an operand".into())
            }
            _ => {}
        }
        if self.arg_spec == ArgSpec::None
            && matches!(self.family, Family::Environment | Family::PackageSetting)
            && self.entity.is_none()
        {
            return bad("rule without operands needs a fixed entity".into());
        }
        Ok(())
    }

    fn forced(&self, args: &[String]) -> bool {
        self.force_flags.iter().any(|flag| {
            args.iter().any(|a| {
                a == flag
                    || (flag.len() == 2
                        && flag.starts_with('-')
                        && a.starts_with('-')
                        && !a.starts_with("--")
                        && a[1..].contains(&flag[1..]))
            })
        })
    }
}

/// Command name to statement rule, looked up by basename.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassifierTable(pub BTreeMap<String, ClassifierRule>);

impl Default for ClassifierTable {
    fn default() -> Self {
        use Action::*;
        use Family::*;
        let rules = [
            ("touch", ClassifierRule::new(FileSystem, Add, ArgSpec::Each)),
            (
                "mkdir",
                ClassifierRule::new(FileSystem, Add, ArgSpec::Each)
                    .kind(FileKind::Directory)
                    .force(&["-p"]),
            ),
            (
                "rm",
                ClassifierRule::new(FileSystem, Delete, ArgSpec::Each).force(&["-f", "--force"]),
            ),
            (
                "rmdir",
                ClassifierRule::new(FileSystem, Delete, ArgSpec::Each)
                    .kind(FileKind::Directory)
                    .force(&["--ignore-fail-on-non-empty"]),
            ),
            ("cp", ClassifierRule::new(FileSystem, Update, ArgSpec::Last)),
            ("mv", ClassifierRule::new(FileSystem, Update, ArgSpec::Last)),
            (
                "install-menu",
                ClassifierRule::new(Environment, Add, ArgSpec::Each)
                    .registry(Registry::MenuEntries),
            ),
            (
                "rmmod",
                ClassifierRule::new(Environment, Delete, ArgSpec::Each)
                    .registry(Registry::KernelModules),
            ),
            (
                "ldconfig",
                ClassifierRule::new(Environment, Update, ArgSpec::None)
                    .registry(Registry::SharedLibs)
                    .entity("ld.so.cache"),
            ),
            (
                "a2enmod",
                ClassifierRule::new(PackageSetting, Add, ArgSpec::Each)
                    .setting("apache2", "module:{}"),
            ),
            (
                "a2dismod",
                ClassifierRule::new(PackageSetting, Delete, ArgSpec::Each)
                    .setting("apache2", "module:{}"),
            ),
            (
                "reload_apache",
                ClassifierRule::new(Environment, Update, ArgSpec::None)
                    .registry(Registry::Services)
                    .entity("apache2"),
            ),
            ("invoke-rc.d", {
                let mut rule = ClassifierRule::new(Environment, Update, ArgSpec::First)
                    .registry(Registry::Services);
                rule.state_arg = Some(1);
                rule
            }),
            ("echo", ClassifierRule::new(Neutral, None, ArgSpec::None)),
            ("true", ClassifierRule::new(Neutral, None, ArgSpec::None)),
            (":", ClassifierRule::new(Neutral, None, ArgSpec::None)),
            ("set", ClassifierRule::new(Neutral, None, ArgSpec::None)),
            ("exit", ClassifierRule::new(Neutral, None, ArgSpec::None)),
            ("printf", ClassifierRule::new(Neutral, None, ArgSpec::None)),
        ];
        ClassifierTable(rules.into_iter().map(|(n, r)| (n.to_string(), r)).collect())
    }
}

impl ClassifierTable {
    pub fn from_json(text: &str) -> Result<Self> {
        let table: ClassifierTable = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        self.0
            .iter()
            .try_for_each(|(name, rule)| rule.validate(name))
    }

    pub fn lookup(&self, command: &str) -> Option<&ClassifierRule> {
        let base = Path::new(command)
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or(command);
        self.0.get(base)
    }
}

/// Statements built from one command, plus whether a forcing flag was seen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classified {
    pub statements: Vec<Statement>,
    pub forced: bool,
    /// Set when the command matched a rule but its operands did not fit.
    pub problem: Option<String>,
}

fn operands(args: &[String]) -> Vec<&String> {
    let mut out = Vec::new();
    let mut options_done = false;
    for a in args {
        if !options_done && a == "--" {
            options_done = true;
        } else if options_done || !a.starts_with('-') || a == "-" {
            out.push(a);
        }
    }
    out
}

/// Collapses repeated slashes and drops a trailing one.
fn normalize_path(path: &str) -> String {
    let mut out = String::with_capacity(path.len());
    for c in path.chars() {
        if c == '/' && out.ends_with('/') {
            continue;
        }
        out.push(c);
    }
    if out.len() > 1 && out.ends_with('/') {
        out.pop();
    }
    out
}

/// Classifies a command whose arguments are already expanded.
pub fn classify_words(
    name: &str,
    args: &[String],
    raw: &str,
    table: &ClassifierTable,
) -> Classified {
    let opaque = |problem: Option<String>| Classified {
        statements: vec![Statement::Opaque {
            raw: raw.to_string(),
        }],
        forced: false,
        problem,
    };
    let Some(rule) = table.lookup(name) else {
        return opaque(None);
    };
    let command = name.to_string();
    let ops = operands(args);
    let targets: Vec<String> = match rule.arg_spec {
        ArgSpec::Each => ops.iter().map(|s| s.to_string()).collect(),
        ArgSpec::First => ops.first().map(|s| s.to_string()).into_iter().collect(),
        ArgSpec::Last => ops.last().map(|s| s.to_string()).into_iter().collect(),
        ArgSpec::None => rule.entity.clone().into_iter().collect(),
    };
    if rule.family == Family::Neutral {
        return Classified {
            statements: vec![Statement::Neutral {
                text: raw.to_string(),
            }],
            forced: false,
            problem: None,
        };
    }
    if rule.family == Family::Opaque {
        return opaque(None);
    }
    if targets.is_empty() {
        return opaque(Some(format!("{name}: no operand to model")));
    }
    let mut statements = Vec::with_capacity(targets.len());
    for target in targets {
        let st = match rule.family {
            Family::FileSystem => {
                if !target.starts_with('/') {
                    return opaque(Some(format!("{name}: relative path {target:?}")));
                }
                let payload =
                    (rule.variant == Action::Update && ops.len() >= 2).then(|| ops[0].to_string());
                let op = FileOp {
                    path: normalize_path(&target),
                    payload,
                    command: command.clone(),
                    kind: rule.file_kind.unwrap_or_default(),
                    entry: None,
                };
                match rule.variant {
                    Action::Add => Statement::FileSystemAdd(op),
                    Action::Delete => Statement::FileSystemDelete(op),
                    _ => Statement::FileSystemUpdate(op),
                }
            }
            Family::Environment => {
                let registry = rule.registry.unwrap_or(Registry::Services);
                let state = (registry == Registry::Services).then(|| {
                    match rule.state_arg.and_then(|i| ops.get(i)).map(|s| s.as_str()) {
                        Some("stop") => ServiceState::Stopped,
                        _ => ServiceState::Running,
                    }
                });
                let op = EnvOp {
                    registry,
                    entity: target,
                    command: command.clone(),
                    state,
                };
                match rule.variant {
                    Action::Add => Statement::EnvironmentAdd(op),
                    Action::Delete => Statement::EnvironmentDelete(op),
                    _ => Statement::EnvironmentUpdate(op),
                }
            }
            _ => {
                let template = rule.key_template.as_deref().unwrap_or("{}");
                let op = SettingOp {
                    owner_package: rule.owner.clone().unwrap_or_default(),
                    setting_key: template.replace("{}", &target),
                    value: None,
                    command: command.clone(),
                };
                match rule.variant {
                    Action::Add => Statement::PackageSettingAdd(op),
                    Action::Delete => Statement::PackageSettingDelete(op),
                    _ => Statement::PackageSettingUpdate(op),
                }
            }
        };
        statements.push(st);
    }
    Classified {
        statements,
        forced: rule.forced(args),
        problem: None,
    }
}

/// Classifies a parsed invocation, taking its words literally.
pub fn classify_command(cmd: &CommandInvocation, table: &ClassifierTable) -> Classified {
    let args: Vec<String> = cmd.args.iter().map(|a| literal_text(a)).collect();
    classify_words(&cmd.name, &args, &cmd.raw_line, table)
}
