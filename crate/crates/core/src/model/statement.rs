use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::{FileEntry, InstalledPackage, ServiceState};
use super::package::{validate_package_name, FileKind};
use super::version::Version;
use crate::error::{Error, Result};

/// Environment sub-registry touched by an environment statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Registry {
    Services,
    SharedLibs,
    KernelModules,
    MenuEntries,
}

impl Registry {
    pub const ALL: [Registry; 4] = [
        Registry::Services,
        Registry::SharedLibs,
        Registry::KernelModules,
        Registry::MenuEntries,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Registry::Services => "services",
            Registry::SharedLibs => "shared_libs",
            Registry::KernelModules => "kernel_modules",
            Registry::MenuEntries => "menu_entries",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileOp {
    pub path: String,
    #[serde(default)]
    pub payload: Option<String>,
    pub command: String,
    #[serde(default)]
    pub kind: FileKind,
    /// Exact entry to install; file deployment and inverses set this so the
    /// owner and kind are restored as well as the content.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvOp {
    pub registry: Registry,
    pub entity: String,
    pub command: String,
    /// Target state for services; ignored by the set registries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<ServiceState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingOp {
    pub owner_package: String,
    pub setting_key: String,
    #[serde(default)]
    pub value: Option<String>,
    pub command: String,
}

/// Installed-package mark, written by file deployment only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageOp {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<Version>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<String>,
    pub command: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Statement {
    FileSystemAdd(FileOp),
    FileSystemDelete(FileOp),
    FileSystemUpdate(FileOp),
    EnvironmentAdd(EnvOp),
    EnvironmentDelete(EnvOp),
    EnvironmentUpdate(EnvOp),
    PackageSettingAdd(SettingOp),
    PackageSettingDelete(SettingOp),
    PackageSettingUpdate(SettingOp),
    PackageAdd(PackageOp),
    PackageDelete(PackageOp),
    Neutral { text: String },
    Opaque { raw: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    FileSystem,
    Environment,
    PackageSetting,
    Package,
    Neutral,
    Opaque,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Add,
    Delete,
    Update,
    None,
}

/// Address of the single configuration entry a statement touches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateKey {
    File {
        path: String,
    },
    Environment {
        registry: Registry,
        entity: String,
    },
    Setting {
        owner_package: String,
        setting_key: String,
    },
    Package {
        name: String,
    },
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateKey::File { path } => write!(f, "file {path}"),
            StateKey::Environment { registry, entity } => {
                write!(f, "{} {entity}", registry.as_str())
            }
            StateKey::Setting {
                owner_package,
                setting_key,
            } => write!(f, "setting {owner_package}/{setting_key}"),
            StateKey::Package { name } => write!(f, "package {name}"),
        }
    }
}

/// Value held at a [`StateKey`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Image {
    Absent,
    File(FileEntry),
    Service(ServiceState),
    /// Membership in one of the set registries.
    Present,
    Setting(Option<String>),
    Package(InstalledPackage),
}

impl Statement {
    pub fn family(&self) -> Family {
        use Statement::*;
        match self {
            FileSystemAdd(_) | FileSystemDelete(_) | FileSystemUpdate(_) => Family::FileSystem,
            EnvironmentAdd(_) | EnvironmentDelete(_) | EnvironmentUpdate(_) => Family::Environment,
            PackageSettingAdd(_) | PackageSettingDelete(_) | PackageSettingUpdate(_) => {
                Family::PackageSetting
            }
            PackageAdd(_) | PackageDelete(_) => Family::Package,
            Neutral { .. } => Family::Neutral,
            Opaque { .. } => Family::Opaque,
        }
    }

    pub fn action(&self) -> Action {
        use Statement::*;
        match self {
            FileSystemAdd(_) | EnvironmentAdd(_) | PackageSettingAdd(_) | PackageAdd(_) => {
                Action::Add
            }
            FileSystemDelete(_)
            | EnvironmentDelete(_)
            | PackageSettingDelete(_)
            | PackageDelete(_) => Action::Delete,
            FileSystemUpdate(_) | EnvironmentUpdate(_) | PackageSettingUpdate(_) => Action::Update,
            Neutral { .. } | Opaque { .. } => Action::None,
        }
    }

    /// Variant name as used in the JSON `type` tag.
    pub fn variant_name(&self) -> &'static str {
        use Statement::*;
        match self {
            FileSystemAdd(_) => "FileSystemAdd",
            FileSystemDelete(_) => "FileSystemDelete",
            FileSystemUpdate(_) => "FileSystemUpdate",
            EnvironmentAdd(_) => "EnvironmentAdd",
            EnvironmentDelete(_) => "EnvironmentDelete",
            EnvironmentUpdate(_) => "EnvironmentUpdate",
            PackageSettingAdd(_) => "PackageSettingAdd",
            PackageSettingDelete(_) => "PackageSettingDelete",
            PackageSettingUpdate(_) => "PackageSettingUpdate",
            PackageAdd(_) => "PackageAdd",
            PackageDelete(_) => "PackageDelete",
            Neutral { .. } => "Neutral",
            Opaque { .. } => "Opaque",
        }
    }

    pub fn key(&self) -> Option<StateKey> {
        use Statement::*;
        match self {
            FileSystemAdd(op) | FileSystemDelete(op) | FileSystemUpdate(op) => {
                Some(StateKey::File {
                    path: op.path.clone(),
                })
            }
            EnvironmentAdd(op) | EnvironmentDelete(op) | EnvironmentUpdate(op) => {
                Some(StateKey::Environment {
                    registry: op.registry,
                    entity: op.entity.clone(),
                })
            }
            PackageSettingAdd(op) | PackageSettingDelete(op) | PackageSettingUpdate(op) => {
                Some(StateKey::Setting {
                    owner_package: op.owner_package.clone(),
                    setting_key: op.setting_key.clone(),
                })
            }
            PackageAdd(op) | PackageDelete(op) => Some(StateKey::Package {
                name: op.name.clone(),
            }),
            Neutral { .. } | Opaque { .. } => None,
        }
    }

    pub fn command(&self) -> &str {
        use Statement::*;
        match self {
            FileSystemAdd(op) | FileSystemDelete(op) | FileSystemUpdate(op) => &op.command,
            EnvironmentAdd(op) | EnvironmentDelete(op) | EnvironmentUpdate(op) => &op.command,
            PackageSettingAdd(op) | PackageSettingDelete(op) | PackageSettingUpdate(op) => {
                &op.command
            }
            PackageAdd(op) | PackageDelete(op) => &op.command,
            Neutral { .. } => "",
            Opaque { .. } => "",
        }
    }

    pub fn validate(&self) -> Result<()> {
        use Statement::*;
        match self {
            FileSystemAdd(op) | FileSystemDelete(op) | FileSystemUpdate(op) => {
                if !op.path.starts_with('/') {
                    return Err(Error::invalid(
                        "statement",
                        format!("{} path {:?} is not absolute", self.variant_name(), op.path),
                    ));
                }
            }
            EnvironmentAdd(op) | EnvironmentDelete(op) | EnvironmentUpdate(op) => {
                if op.entity.is_empty() {
                    return Err(Error::invalid("statement", "environment entity is empty"));
                }
            }
            PackageSettingAdd(op) | PackageSettingDelete(op) | PackageSettingUpdate(op) => {
                if op.owner_package.is_empty() {
                    return Err(Error::invalid("statement", "setting owner is empty"));
                }
            }
            PackageAdd(op) | PackageDelete(op) => validate_package_name(&op.name)?,
            Neutral { .. } | Opaque { .. } => {}
        }
        Ok(())
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.key() {
            Some(key) => write!(f, "{}({key})", self.variant_name()),
            None => match self {
                Statement::Neutral { text } => write!(f, "Neutral({text})"),
                Statement::Opaque { raw } => write!(f, "Opaque({raw})"),
                _ => unreachable!("keyed variants handled above"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_add(path: &str) -> Statement {
        Statement::FileSystemAdd(FileOp {
            path: path.into(),
            payload: None,
            command: "touch".into(),
            kind: FileKind::Regular,
            entry: None,
        })
    }

    #[test]
    fn relative_paths_are_rejected() {
        assert!(file_add("/etc/x").validate().is_ok());
        assert!(file_add("etc/x").validate().is_err());
    }

    #[test]
    fn empty_entities_are_rejected() {
        let st = Statement::EnvironmentDelete(EnvOp {
            registry: Registry::KernelModules,
            entity: String::new(),
            command: "rmmod".into(),
            state: None,
        });
        assert!(st.validate().is_err());
    }

    #[test]
    fn json_tag_is_variant_name() {
        let st = Statement::PackageSettingAdd(SettingOp {
            owner_package: "apache2".into(),
            setting_key: "module:php5".into(),
            value: None,
            command: "a2enmod".into(),
        });
        let json = serde_json::to_value(&st).unwrap();
        assert_eq!(json["type"], "PackageSettingAdd");
        let back: Statement = serde_json::from_value(json).unwrap();
        assert_eq!(back, st);
        assert_eq!(st.family(), Family::PackageSetting);
        assert_eq!(st.action(), Action::Add);
    }
}
