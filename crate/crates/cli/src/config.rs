use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use pkgmodeler::injector::{ClassifierTable, MarkerConfig};
use pkgmodeler::model::ConsistencyChecks;
use pkgmodeler::simulator::ArgTable;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

/// Settings file named by `PKGMODELER_CONFIG` or `--config`. Every field
/// is optional; command-line flags win over the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    /// Relative paths resolve against the config file's directory.
    pub classifier: Option<PathBuf>,
    pub marker_begin: Option<String>,
    pub marker_end: Option<String>,
    pub threshold: Option<f64>,
    pub checks: ConsistencyChecks,
    pub format: Option<Format>,
    pub args: Option<ArgTable>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: CliConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let (Some(c), Some(dir)) = (&config.classifier, path.parent()) {
            config.classifier = Some(dir.join(c));
        }
        Ok(config)
    }
}

/// Flags shared by every subcommand, before merging with the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub classifier: Option<PathBuf>,
    pub marker_begin: Option<String>,
    pub marker_end: Option<String>,
    pub threshold: Option<f64>,
    pub format: Option<Format>,
    pub disabled_checks: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub classifier: ClassifierTable,
    pub markers: MarkerConfig,
    pub threshold: f64,
    pub checks: ConsistencyChecks,
    pub format: Format,
    pub args: ArgTable,
}

impl Settings {
    pub fn resolve(file: CliConfig, flags: Overrides) -> Result<Self> {
        let classifier = match flags.classifier.or(file.classifier) {
            Some(path) => {
                let text = fs::read_to_string(&path)
                    .with_context(|| format!("reading classifier table {}", path.display()))?;
                ClassifierTable::from_json(&text)
                    .with_context(|| format!("parsing classifier table {}", path.display()))?
            }
            None => ClassifierTable::default(),
        };
        let defaults = MarkerConfig::default();
        let markers = MarkerConfig::new(
            flags
                .marker_begin
                .or(file.marker_begin)
                .unwrap_or(defaults.begin_pattern),
            flags
                .marker_end
                .or(file.marker_end)
                .unwrap_or(defaults.end_pattern),
        )?;
        let threshold = flags.threshold.or(file.threshold).unwrap_or(0.8);
        anyhow::ensure!(
            (0.0..=1.0).contains(&threshold),
            "threshold must lie in [0, 1], got {threshold}"
        );
        let mut checks = file.checks;
        for name in &flags.disabled_checks {
            match name.as_str() {
                "dangling-setting" => checks.dangling_setting = false,
                "orphan-file" => checks.orphan_file = false,
                "missing-file" => checks.missing_file = false,
                "dead-service" => checks.dead_service = false,
                other => anyhow::bail!("unknown consistency check {other:?}"),
            }
        }
        Ok(Settings {
            classifier,
            markers,
            threshold,
            checks,
            format: flags.format.or(file.format).unwrap_or_default(),
            args: file.args.unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_need_no_flags() {
        let s = Settings::resolve(CliConfig::default(), Overrides::default()).unwrap();
        assert_eq!(s.threshold, 0.8);
        assert_eq!(s.format, Format::Json);
        assert_eq!(s.markers, MarkerConfig::default());
        assert_eq!(s.checks, ConsistencyChecks::default());
    }

    #[test]
    fn flags_override_the_file() {
        let file = CliConfig {
            threshold: Some(0.5),
            format: Some(Format::Text),
            ..CliConfig::default()
        };
        let flags = Overrides {
            threshold: Some(0.9),
            disabled_checks: vec!["missing-file".into()],
            ..Overrides::default()
        };
        let s = Settings::resolve(file, flags).unwrap();
        assert_eq!(s.threshold, 0.9);
        assert_eq!(s.format, Format::Text);
        assert!(!s.checks.missing_file);
    }

    #[test]
    fn bad_values_are_rejected() {
        let flags = Overrides {
            threshold: Some(1.5),
            ..Overrides::default()
        };
        assert!(Settings::resolve(CliConfig::default(), flags).is_err());
        let flags = Overrides {
            disabled_checks: vec!["nope".into()],
            ..Overrides::default()
        };
        assert!(Settings::resolve(CliConfig::default(), flags).is_err());
        assert!(serde_json::from_str::<CliConfig>(r#"{"treshold": 1}"#).is_err());
    }
}
