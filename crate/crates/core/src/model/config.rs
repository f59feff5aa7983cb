use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::package::FileKind;
use super::statement::{Image, Registry, StateKey};
use super::version::Version;
use crate::error::{Error, Result};

/// Digest used for configuration identities and synthetic content hashes.
pub const DIGEST_ALGORITHM: &str = "sha256";

pub fn content_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstalledPackage {
    pub version: Version,
    pub architecture: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    #[serde(default)]
    pub owner: Option<String>,
    pub kind: FileKind,
    #[serde(default)]
    pub content_hash: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceState {
    Running,
    Stopped,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    #[serde(default)]
    pub services: BTreeMap<String, ServiceState>,
    #[serde(default)]
    pub shared_libs: BTreeSet<String>,
    #[serde(default)]
    pub kernel_modules: BTreeSet<String>,
    #[serde(default)]
    pub menu_entries: BTreeSet<String>,
}

impl Environment {
    pub fn set(&self, registry: Registry) -> Option<&BTreeSet<String>> {
        match registry {
            Registry::Services => None,
            Registry::SharedLibs => Some(&self.shared_libs),
            Registry::KernelModules => Some(&self.kernel_modules),
            Registry::MenuEntries => Some(&self.menu_entries),
        }
    }

    pub fn set_mut(&mut self, registry: Registry) -> Option<&mut BTreeSet<String>> {
        match registry {
            Registry::Services => None,
            Registry::SharedLibs => Some(&mut self.shared_libs),
            Registry::KernelModules => Some(&mut self.kernel_modules),
            Registry::MenuEntries => Some(&mut self.menu_entries),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SettingKey {
    pub owner_package: String,
    pub setting_key: String,
}

impl SettingKey {
    pub fn new(owner: impl Into<String>, key: impl Into<String>) -> Self {
        SettingKey {
            owner_package: owner.into(),
            setting_key: key.into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SettingRow {
    owner_package: String,
    setting_key: String,
    #[serde(default)]
    value: Option<String>,
}

fn serialize_settings<S: Serializer>(
    settings: &BTreeMap<SettingKey, Option<String>>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_seq(settings.iter().map(|(k, v)| SettingRow {
        owner_package: k.owner_package.clone(),
        setting_key: k.setting_key.clone(),
        value: v.clone(),
    }))
}

fn deserialize_settings<'de, D: Deserializer<'de>>(
    deserializer: D,
) -> std::result::Result<BTreeMap<SettingKey, Option<String>>, D::Error> {
    let rows = Vec::<SettingRow>::deserialize(deserializer)?;
    Ok(rows
        .into_iter()
        .map(|r| (SettingKey::new(r.owner_package, r.setting_key), r.value))
        .collect())
}

/// Modeled machine state. Every collection is ordered, so the JSON form is
/// canonical and [`config_hash`] is stable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfiguration {
    #[serde(default)]
    pub packages: BTreeMap<String, InstalledPackage>,
    #[serde(default)]
    pub filesystem: BTreeMap<String, FileEntry>,
    #[serde(default)]
    pub environment: Environment,
    #[serde(
        default,
        serialize_with = "serialize_settings",
        deserialize_with = "deserialize_settings"
    )]
    pub settings: BTreeMap<SettingKey, Option<String>>,
}

impl SystemConfiguration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_installed(&self, name: &str) -> bool {
        self.packages.contains_key(name)
    }

    pub fn image(&self, key: &StateKey) -> Image {
        match key {
            StateKey::File { path } => self
                .filesystem
                .get(path)
                .cloned()
                .map_or(Image::Absent, Image::File),
            StateKey::Environment { registry, entity } => match self.environment.set(*registry) {
                None => self
                    .environment
                    .services
                    .get(entity)
                    .copied()
                    .map_or(Image::Absent, Image::Service),
                Some(set) if set.contains(entity) => Image::Present,
                Some(_) => Image::Absent,
            },
            StateKey::Setting {
                owner_package,
                setting_key,
            } => self
                .settings
                .get(&SettingKey::new(
                    owner_package.as_str(),
                    setting_key.as_str(),
                ))
                .cloned()
                .map_or(Image::Absent, Image::Setting),
            StateKey::Package { name } => self
                .packages
                .get(name)
                .cloned()
                .map_or(Image::Absent, Image::Package),
        }
    }

    /// Writes `image` at `key` verbatim. Used to replay logged post-images.
    pub fn set_image(&mut self, key: &StateKey, image: &Image) -> Result<()> {
        let mismatch = || Error::invalid("image", format!("{image:?} cannot be stored at {key}"));
        match (key, image) {
            (StateKey::File { path }, Image::Absent) => {
                self.filesystem.remove(path);
            }
            (StateKey::File { path }, Image::File(entry)) => {
                self.filesystem.insert(path.clone(), entry.clone());
            }
            (StateKey::Environment { registry, entity }, Image::Absent) => {
                match self.environment.set_mut(*registry) {
                    Some(set) => {
                        set.remove(entity);
                    }
                    None => {
                        self.environment.services.remove(entity);
                    }
                }
            }
            (StateKey::Environment { registry, entity }, Image::Present) => {
                let set = self.environment.set_mut(*registry).ok_or_else(mismatch)?;
                set.insert(entity.clone());
            }
            (StateKey::Environment { registry, entity }, Image::Service(state)) => {
                if *registry != Registry::Services {
                    return Err(mismatch());
                }
                self.environment.services.insert(entity.clone(), *state);
            }
            (
                StateKey::Setting {
                    owner_package,
                    setting_key,
                },
                Image::Absent,
            ) => {
                self.settings.remove(&SettingKey::new(
                    owner_package.as_str(),
                    setting_key.as_str(),
                ));
            }
            (
                StateKey::Setting {
                    owner_package,
                    setting_key,
                },
                Image::Setting(value),
            ) => {
                self.settings.insert(
                    SettingKey::new(owner_package.as_str(), setting_key.as_str()),
                    value.clone(),
                );
            }
            (StateKey::Package { name }, Image::Absent) => {
                self.packages.remove(name);
            }
            (StateKey::Package { name }, Image::Package(pkg)) => {
                self.packages.insert(name.clone(), pkg.clone());
            }
            _ => return Err(mismatch()),
        }
        Ok(())
    }

    /// Every filesystem owner must be installed; violations are reported by
    /// the consistency checker rather than rejected here.
    pub fn validate(&self) -> Result<()> {
        for name in self.packages.keys() {
            super::package::validate_package_name(name)?;
        }
        for path in self.filesystem.keys() {
            if !path.starts_with('/') {
                return Err(Error::invalid(
                    "configuration",
                    format!("{path} is not absolute"),
                ));
            }
        }
        Ok(())
    }
}

/// Hex digest identifying a [`SystemConfiguration`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfigId(pub String);

impl ConfigId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// First twelve hex digits, for human-readable output.
    pub fn short(&self) -> &str {
        &self.0[..self.0.len().min(12)]
    }
}

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical serialization: compact JSON with object keys sorted.
pub fn canonical_bytes(config: &SystemConfiguration) -> Vec<u8> {
    // serde_json's Value map is ordered by key, which sorts struct fields too.
    let value = serde_json::to_value(config).expect("configuration is always serializable");
    serde_json::to_vec(&value).expect("JSON values always serialize")
}

pub fn config_hash(config: &SystemConfiguration) -> ConfigId {
    ConfigId(content_digest(&canonical_bytes(config)))
}
