use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Diagnostic, DiagnosticCode, Provenance};

pub const DEFAULT_BEGIN_MARKER: &str = "# Automatically added by";
pub const DEFAULT_END_MARKER: &str = "# End automatically added section";

/// Comment prefixes that delimit helper-generated code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerConfig {
    pub begin_pattern: String,
    pub end_pattern: String,
}

impl Default for MarkerConfig {
    fn default() -> Self {
        MarkerConfig {
            begin_pattern: DEFAULT_BEGIN_MARKER.to_string(),
            end_pattern: DEFAULT_END_MARKER.to_string(),
        }
    }
}

impl MarkerConfig {
    pub fn new(begin: impl Into<String>, end: impl Into<String>) -> Result<Self> {
        let markers = MarkerConfig {
            begin_pattern: begin.into(),
            end_pattern: end.into(),
        };
        markers.validate()?;
        Ok(markers)
    }

    pub fn validate(&self) -> Result<()> {
        if self.begin_pattern.trim().is_empty() || self.end_pattern.trim().is_empty() {
            return Err(Error::invalid("markers", "patterns must be non-empty"));
        }
        if self.begin_pattern == self.end_pattern {
            return Err(Error::invalid(
                "markers",
                "begin and end patterns must differ",
            ));
        }
        Ok(())
    }

    fn is_begin(&self, line: &str) -> bool {
        line.trim_start().starts_with(&self.begin_pattern)
    }

    fn is_end(&self, line: &str) -> bool {
        line.trim_start().starts_with(&self.end_pattern)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub start_line: usize,
    /// Inclusive.
    pub end_line: usize,
    pub origin: Provenance,
}

impl Region {
    pub fn line_count(&self) -> usize {
        self.end_line + 1 - self.start_line
    }

    pub fn contains(&self, line: usize) -> bool {
        (self.start_line..=self.end_line).contains(&line)
    }
}

/// Splits the script's lines into generated and by-hand regions.
pub fn detect_generated_regions(
    text: &str,
    markers: &MarkerConfig,
) -> (Vec<Region>, Vec<Diagnostic>) {
    let mut regions: Vec<Region> = Vec::new();
    let mut diags = Vec::new();
    let push = |regions: &mut Vec<Region>, line: usize, origin: Provenance| match regions.last_mut()
    {
        Some(r) if r.origin == origin && r.end_line + 1 == line => r.end_line = line,
        _ => regions.push(Region {
            start_line: line,
            end_line: line,
            origin,
        }),
    };
    let mut open: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let n = idx + 1;
        match open {
            None if markers.is_begin(line) => {
                open = Some(n);
                // A fresh block directly after another stays one region.
                push(&mut regions, n, Provenance::Generated);
            }
            None => {
                if markers.is_end(line) {
                    diags.push(
                        Diagnostic::warning(
                            DiagnosticCode::UnmatchedMarker,
                            "end marker without a begin marker",
                        )
                        .at(None, None, Some(n)),
                    );
                }
                push(&mut regions, n, Provenance::ByHand);
            }
            Some(_) => {
                push(&mut regions, n, Provenance::Generated);
                if markers.is_end(line) {
                    open = None;
                }
            }
        }
    }
    if let Some(start) = open {
        diags.push(
            Diagnostic::warning(
                DiagnosticCode::UnmatchedMarker,
                "begin marker never closed; generated region runs to end of file",
            )
            .at(None, None, Some(start)),
        );
    }
    (regions, diags)
}

/// Origin of a 1-based line; lines outside every region are by hand.
pub fn origin_of(regions: &[Region], line: usize) -> Provenance {
    let idx = regions.partition_point(|r| r.end_line < line);
    match regions.get(idx) {
        Some(r) if r.contains(line) => r.origin,
        _ => Provenance::ByHand,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn script(lines: &[&str]) -> String {
        lines.iter().map(|l| format!("{l}\n")).collect()
    }

    #[test]
    fn one_marked_block() {
        let text = script(&[
            "#!/bin/sh",
            "set -e",
            "",
            "# Automatically added by dh_installmenu",
            "if [ \"$1\" = configure ]; then",
            "  update-menus",
            "fi",
            "# End automatically added section",
            "",
            "echo done",
            "",
            "exit 0",
        ]);
        let (regions, diags) = detect_generated_regions(&text, &MarkerConfig::default());
        assert!(diags.is_empty());
        let spans: Vec<_> = regions
            .iter()
            .map(|r| (r.start_line, r.end_line, r.origin))
            .collect();
        assert_eq!(
            spans,
            vec![
                (1, 3, Provenance::ByHand),
                (4, 8, Provenance::Generated),
                (9, 12, Provenance::ByHand)
            ]
        );
        assert_eq!(origin_of(&regions, 6), Provenance::Generated);
        assert_eq!(origin_of(&regions, 9), Provenance::ByHand);
    }

    #[test]
    fn no_markers_is_all_by_hand() {
        let (regions, _) = detect_generated_regions("a\nb\nc\n", &MarkerConfig::default());
        assert_eq!(
            regions,
            vec![Region {
                start_line: 1,
                end_line: 3,
                origin: Provenance::ByHand
            }]
        );
    }

    #[test]
    fn unmatched_begin_runs_to_eof() {
        let text = "a\n# Automatically added by dh_foo\nb\nc\n";
        let (regions, diags) = detect_generated_regions(text, &MarkerConfig::default());
        assert_eq!(regions.last().unwrap().end_line, 4);
        assert_eq!(regions.last().unwrap().origin, Provenance::Generated);
        assert_eq!(diags[0].code, DiagnosticCode::UnmatchedMarker);
    }

    #[test]
    fn markers_are_validated() {
        assert!(MarkerConfig::new("", "x").is_err());
        assert!(MarkerConfig::new("#x", "#x").is_err());
        assert!(MarkerConfig::new("#>>", "#<<").is_ok());
    }

    proptest! {
        #[test]
        fn regions_partition_the_lines(lines in proptest::collection::vec(
            prop_oneof![
                Just("# Automatically added by dh_x".to_string()),
                Just("# End automatically added section".to_string()),
                "[a-z ]{0,8}",
            ],
            0..40,
        )) {
            let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
            let (regions, _) = detect_generated_regions(&text, &MarkerConfig::default());
            let mut next = 1;
            for r in &regions {
                prop_assert_eq!(r.start_line, next);
                prop_assert!(r.end_line >= r.start_line);
                next = r.end_line + 1;
            }
            prop_assert_eq!(next, lines.len() + 1);
        }
    }
}
