use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::script::ScriptModel;
use super::version::Version;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PackageId {
    pub name: String,
    pub version: Version,
    pub architecture: String,
}

impl PackageId {
    pub fn new(
        name: impl Into<String>,
        version: impl Into<Version>,
        architecture: impl Into<String>,
    ) -> Result<Self> {
        let id = PackageId {
            name: name.into(),
            version: version.into(),
            architecture: architecture.into(),
        };
        id.validate()?;
        Ok(id)
    }

    pub fn validate(&self) -> Result<()> {
        validate_package_name(&self.name)
    }
}

pub(crate) fn validate_package_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(Error::invalid(
            "package name",
            format!("{name:?} must be non-empty and free of whitespace"),
        ));
    }
    Ok(())
}

impl fmt::Display for PackageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}_{}", self.name, self.version, self.architecture)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dialect {
    Debian,
    Rpm,
}

impl Dialect {
    pub fn script_kinds(self) -> &'static [ScriptKind] {
        use ScriptKind::*;
        match self {
            Dialect::Debian => &[DebPreinst, DebPostinst, DebPrerm, DebPostrm, DebConfig],
            Dialect::Rpm => &[RpmPre, RpmPost, RpmPreun, RpmPostun],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScriptKind {
    DebPreinst,
    DebPostinst,
    DebPrerm,
    DebPostrm,
    DebConfig,
    RpmPre,
    RpmPost,
    RpmPreun,
    RpmPostun,
}

/// The four execution points shared by both dialects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScriptSlot {
    PreInstall,
    PostInstall,
    PreRemove,
    PostRemove,
}

impl ScriptKind {
    pub const ALL: [ScriptKind; 9] = [
        ScriptKind::DebPreinst,
        ScriptKind::DebPostinst,
        ScriptKind::DebPrerm,
        ScriptKind::DebPostrm,
        ScriptKind::DebConfig,
        ScriptKind::RpmPre,
        ScriptKind::RpmPost,
        ScriptKind::RpmPreun,
        ScriptKind::RpmPostun,
    ];

    pub fn dialect(self) -> Dialect {
        use ScriptKind::*;
        match self {
            DebPreinst | DebPostinst | DebPrerm | DebPostrm | DebConfig => Dialect::Debian,
            RpmPre | RpmPost | RpmPreun | RpmPostun => Dialect::Rpm,
        }
    }

    /// `None` for debconf `config` scripts, which never run during a dry run.
    pub fn slot(self) -> Option<ScriptSlot> {
        use ScriptKind::*;
        match self {
            DebPreinst | RpmPre => Some(ScriptSlot::PreInstall),
            DebPostinst | RpmPost => Some(ScriptSlot::PostInstall),
            DebPrerm | RpmPreun => Some(ScriptSlot::PreRemove),
            DebPostrm | RpmPostun => Some(ScriptSlot::PostRemove),
            DebConfig => None,
        }
    }

    pub fn for_slot(dialect: Dialect, slot: ScriptSlot) -> ScriptKind {
        use ScriptKind::*;
        match (dialect, slot) {
            (Dialect::Debian, ScriptSlot::PreInstall) => DebPreinst,
            (Dialect::Debian, ScriptSlot::PostInstall) => DebPostinst,
            (Dialect::Debian, ScriptSlot::PreRemove) => DebPrerm,
            (Dialect::Debian, ScriptSlot::PostRemove) => DebPostrm,
            (Dialect::Rpm, ScriptSlot::PreInstall) => RpmPre,
            (Dialect::Rpm, ScriptSlot::PostInstall) => RpmPost,
            (Dialect::Rpm, ScriptSlot::PreRemove) => RpmPreun,
            (Dialect::Rpm, ScriptSlot::PostRemove) => RpmPostun,
        }
    }

    pub fn as_str(self) -> &'static str {
        use ScriptKind::*;
        match self {
            DebPreinst => "deb-preinst",
            DebPostinst => "deb-postinst",
            DebPrerm => "deb-prerm",
            DebPostrm => "deb-postrm",
            DebConfig => "deb-config",
            RpmPre => "rpm-pre",
            RpmPost => "rpm-post",
            RpmPreun => "rpm-preun",
            RpmPostun => "rpm-postun",
        }
    }

    /// File-name suffix used in corpus source ids, e.g. `preinst` or `postun`.
    pub fn suffix(self) -> &'static str {
        let s = self.as_str();
        &s[4..]
    }
}

impl fmt::Display for ScriptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScriptKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScriptKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid("script kind", s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintOp {
    #[serde(rename = "<<")]
    Less,
    #[serde(rename = "<=")]
    LessEq,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    GreaterEq,
    #[serde(rename = ">>")]
    Greater,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionConstraint {
    pub op: ConstraintOp,
    pub version: Version,
}

impl VersionConstraint {
    pub fn admits(&self, candidate: &Version) -> bool {
        let ord = candidate.cmp(&self.version);
        use std::cmp::Ordering::*;
        match self.op {
            ConstraintOp::Less => ord == Less,
            ConstraintOp::LessEq => ord != Greater,
            ConstraintOp::Eq => ord == Equal,
            ConstraintOp::GreaterEq => ord != Less,
            ConstraintOp::Greater => ord == Greater,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<VersionConstraint>,
}

impl Relation {
    pub fn any(name: impl Into<String>) -> Self {
        Relation {
            name: name.into(),
            constraint: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageRelationships {
    /// Conjunction of clauses; each clause is a disjunction of relations.
    #[serde(default)]
    pub depends: Vec<Vec<Relation>>,
    #[serde(default)]
    pub conflicts: Vec<Relation>,
    #[serde(default)]
    pub provides: Vec<String>,
}

impl PackageRelationships {
    pub fn validate(&self) -> Result<()> {
        for conflict in &self.conflicts {
            if self
                .depends
                .iter()
                .flatten()
                .any(|rel| rel.name == conflict.name)
            {
                return Err(Error::invalid(
                    "relationships",
                    format!("{} is both depended on and conflicted with", conflict.name),
                ));
            }
        }
        Ok(())
    }
}

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum FileKind {
    #[default]
    Regular,
    Directory,
    ConfigFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageFile {
    pub path: String,
    pub kind: FileKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackageModel {
    pub id: PackageId,
    #[serde(default)]
    pub relationships: PackageRelationships,
    #[serde(default)]
    pub files: Vec<PackageFile>,
    #[serde(default)]
    pub scripts: BTreeMap<ScriptKind, ScriptModel>,
}

impl PackageModel {
    pub fn new(id: PackageId) -> Self {
        PackageModel {
            id,
            relationships: PackageRelationships::default(),
            files: Vec::new(),
            scripts: BTreeMap::new(),
        }
    }

    pub fn with_file(mut self, path: &str, kind: FileKind) -> Self {
        self.files.push(PackageFile {
            path: path.to_string(),
            kind,
            content_hash: Some(super::config::content_digest(
                format!("{}:{}", self.id, path).as_bytes(),
            )),
        });
        self
    }

    pub fn with_script(mut self, script: ScriptModel) -> Self {
        self.scripts.insert(script.kind, script);
        self
    }

    /// Dialect implied by the scripts; packages without scripts count as Debian.
    pub fn dialect(&self) -> Dialect {
        self.scripts
            .keys()
            .next()
            .map(|k| k.dialect())
            .unwrap_or(Dialect::Debian)
    }

    pub fn config_files(&self) -> impl Iterator<Item = &PackageFile> {
        self.files.iter().filter(|f| f.kind == FileKind::ConfigFile)
    }

    pub fn validate(&self) -> Result<()> {
        self.id.validate()?;
        self.relationships.validate()?;
        let dialect = self.dialect();
        for (kind, script) in &self.scripts {
            if kind.dialect() != dialect {
                return Err(Error::DialectMismatch(*kind));
            }
            if script.kind != *kind {
                return Err(Error::invalid(
                    "package scripts",
                    format!("script filed under {kind} declares kind {}", script.kind),
                ));
            }
        }
        for file in &self.files {
            if !file.path.starts_with('/') {
                return Err(Error::invalid(
                    "package file",
                    format!("{} is not absolute", file.path),
                ));
            }
        }
        Ok(())
    }
}

/// Package models addressable by name and version. Keys are labels only;
/// lookups go through the models' ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Universe(pub BTreeMap<String, PackageModel>);

impl Universe {
    pub fn new() -> Self {
        Universe::default()
    }

    pub fn insert(&mut self, model: PackageModel) {
        let key = if self.0.contains_key(&model.id.name) {
            format!("{}={}", model.id.name, model.id.version)
        } else {
            model.id.name.clone()
        };
        self.0.insert(key, model);
    }

    pub fn models(&self) -> impl Iterator<Item = &PackageModel> {
        self.0.values()
    }

    /// Exact version match when `version` is given, otherwise the highest
    /// version carrying `name`.
    pub fn find(&self, name: &str, version: Option<&Version>) -> Option<&PackageModel> {
        let candidates = self.0.values().filter(|m| m.id.name == name);
        match version {
            Some(v) => candidates.into_iter().find(|m| &m.id.version == v),
            None => candidates.max_by(|a, b| a.id.version.cmp(&b.id.version)),
        }
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.0.values().any(|m| m.id.name == name)
    }
}

impl FromIterator<PackageModel> for Universe {
    fn from_iter<I: IntoIterator<Item = PackageModel>>(iter: I) -> Self {
        let mut universe = Universe::new();
        for model in iter {
            universe.insert(model);
        }
        universe
    }
}
