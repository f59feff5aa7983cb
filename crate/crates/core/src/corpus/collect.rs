use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::record::ScriptRecord;
use crate::error::{Error, Result};
use crate::injector::{parse_rpm_spec, MarkerConfig};
use crate::model::{Diagnostic, DiagnosticCode, Dialect, ScriptKind};
use crate::par::{self, ExecMode};

/// Path value marking a script the package does not ship.
pub const MISSING: &str = "missing";

/// One manifest line: either a single script (`kind` + `path`) or an RPM
/// spec file (`spec`) that yields all four scriptlet kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub package: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ScriptKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniverseCounts {
    pub package_count: usize,
    /// Packages times the script kinds of their dialect.
    pub potential_scripts: usize,
    pub missing_count: usize,
    pub unreadable_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<ScriptRecord>,
    pub universe: UniverseCounts,
}

impl Corpus {
    /// True when the counts account for every potential script.
    pub fn fully_covered(&self) -> bool {
        let u = &self.universe;
        self.records.len() + u.missing_count + u.unreadable_count == u.potential_scripts
    }
}

enum Outcome {
    Present(Box<ScriptRecord>, Vec<Diagnostic>),
    Missing,
    /// The diagnostic is reported once per unreadable file.
    Unreadable(Option<Diagnostic>),
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedManifest(msg.into())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

/// Checks the entries and returns each package's dialect.
fn validate(entries: &[ManifestEntry]) -> Result<BTreeMap<&str, Dialect>> {
    let mut dialects: BTreeMap<&str, Dialect> = BTreeMap::new();
    let mut seen: BTreeSet<(&str, ScriptKind)> = BTreeSet::new();
    for (i, e) in entries.iter().enumerate() {
        if e.package.trim().is_empty() {
            return Err(malformed(format!("entry {i}: empty package name")));
        }
        let (dialect, kinds): (Dialect, Vec<ScriptKind>) = match (&e.kind, &e.path, &e.spec) {
            (Some(kind), Some(_), None) => (kind.dialect(), vec![*kind]),
            (None, None, Some(_)) => (Dialect::Rpm, Dialect::Rpm.script_kinds().to_vec()),
            _ => {
                return Err(malformed(format!(
                    "entry {i} ({}): give either kind and path, or spec",
                    e.package
                )))
            }
        };
        match dialects.insert(&e.package, dialect) {
            Some(d) if d != dialect => {
                return Err(malformed(format!(
                    "package {} mixes Debian and RPM scripts",
                    e.package
                )))
            }
            _ => {}
        }
        for kind in kinds {
            if !seen.insert((&e.package, kind)) {
                return Err(malformed(format!(
                    "package {} lists {kind} twice",
                    e.package
                )));
            }
        }
    }
    Ok(dialects)
}

fn read(path: &Path) -> std::result::Result<String, Diagnostic> {
    std::fs::read(path)
        .map(|bytes| String::from_utf8_lossy(&bytes).into_owned())
        .map_err(|e| Diagnostic::error(DiagnosticCode::IoError, format!("{}: {e}", path.display())))
}

fn load(entry: &ManifestEntry, base: &Path, markers: &MarkerConfig) -> Result<Vec<Outcome>> {
    let stem = entry
        .source_id
        .clone()
        .unwrap_or_else(|| entry.package.clone());
    if let Some(spec) = &entry.spec {
        let text = match read(&base.join(spec)) {
            Ok(t) => t,
            Err(d) => {
                let mut out = vec![Outcome::Unreadable(Some(d.at(
                    Some(&entry.package),
                    None,
                    None,
                )))];
                out.extend(
                    (1..Dialect::Rpm.script_kinds().len()).map(|_| Outcome::Unreadable(None)),
                );
                return Ok(out);
            }
        };
        let sections = parse_rpm_spec(&text)?;
        return Ok(Dialect::Rpm
            .script_kinds()
            .iter()
            .map(|kind| match sections.get(kind) {
                Some(body) => {
                    let id = format!("{stem}.{}", kind.suffix());
                    let (r, d) =
                        ScriptRecord::new(id, &entry.package, *kind, body.clone(), markers);
                    Outcome::Present(Box::new(r), d)
                }
                None => Outcome::Missing,
            })
            .collect());
    }
    let kind = entry.kind.expect("validated");
    let path = entry.path.as_deref().expect("validated");
    if path == MISSING {
        return Ok(vec![Outcome::Missing]);
    }
    let id = entry
        .source_id
        .clone()
        .unwrap_or_else(|| format!("{}.{}", entry.package, kind.suffix()));
    Ok(vec![match read(&base.join(path)) {
        Ok(text) => {
            let (r, d) = ScriptRecord::new(id, &entry.package, kind, text, markers);
            let d = d
                .into_iter()
                .map(|d| {
                    let line = d.location.as_ref().and_then(|l| l.line);
                    d.at(Some(&entry.package), Some(kind), line)
                })
                .collect();
            Outcome::Present(Box::new(r), d)
        }
        Err(d) => Outcome::Unreadable(Some(d.at(Some(&entry.package), Some(kind), None))),
    }])
}

/// Builds a corpus from parsed manifest entries; relative paths resolve
/// against `base`.
pub fn collect_entries(
    entries: &[ManifestEntry],
    base: &Path,
    markers: &MarkerConfig,
    mode: ExecMode,
) -> Result<(Corpus, Vec<Diagnostic>)> {
    let dialects = validate(entries)?;
    let outcomes = par::map(mode, entries, |e| load(e, base, markers));
    let mut corpus = Corpus {
        records: Vec::new(),
        universe: UniverseCounts {
            package_count: dialects.len(),
            potential_scripts: dialects.values().map(|d| d.script_kinds().len()).sum(),
            ..UniverseCounts::default()
        },
    };
    let mut diags = Vec::new();
    for outcome in outcomes {
        for o in outcome? {
            match o {
                Outcome::Present(record, d) => {
                    corpus.records.push(*record);
                    diags.extend(d);
                }
                Outcome::Missing => {}
                Outcome::Unreadable(d) => {
                    corpus.universe.unreadable_count += 1;
                    diags.extend(d);
                }
            }
        }
    }
    // Slots a manifest leaves out are missing as much as those it marks so.
    let u = &mut corpus.universe;
    u.missing_count = u.potential_scripts - corpus.records.len() - u.unreadable_count;
    Ok((corpus, diags))
}

/// Loads every script a manifest file lists.
pub fn collect_corpus(
    manifest: &Path,
    markers: &MarkerConfig,
    mode: ExecMode,
) -> Result<(Corpus, Vec<Diagnostic>)> {
    let entries = read_manifest(manifest)?;
    let base: PathBuf = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    collect_entries(&entries, &base, markers, mode)
}
