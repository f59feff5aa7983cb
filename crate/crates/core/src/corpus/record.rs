use serde::{Deserialize, Serialize};

use crate::injector::{code_line_mask, detect_generated_regions, origin_of, MarkerConfig};
use crate::model::{Diagnostic, Provenance, ScriptKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCounts {
    pub total: usize,
    /// Lines holding code: not blank, not a comment, not the shebang.
    pub non_blank: usize,
    pub generated: usize,
    pub by_hand: usize,
}

impl std::ops::AddAssign for LineCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.total += rhs.total;
        self.non_blank += rhs.non_blank;
        self.generated += rhs.generated;
        self.by_hand += rhs.by_hand;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRecord {
    pub source_id: String,
    pub package: String,
    pub kind: ScriptKind,
    pub raw_text: String,
    /// Code lines outside generated regions, whitespace-collapsed.
    pub normalized_text: String,
    pub lines: LineCounts,
}

impl ScriptRecord {
    pub fn new(
        source_id: impl Into<String>,
        package: impl Into<String>,
        kind: ScriptKind,
        raw_text: impl Into<String>,
        markers: &MarkerConfig,
    ) -> (Self, Vec<Diagnostic>) {
        let raw_text = raw_text.into();
        let (lines, normalized_text, diags) = analyze_text(&raw_text, markers);
        let record = ScriptRecord {
            source_id: source_id.into(),
            package: package.into(),
            kind,
            raw_text,
            normalized_text,
            lines,
        };
        (record, diags)
    }

    pub fn is_entirely_generated(&self) -> bool {
        self.lines.non_blank > 0 && self.lines.by_hand == 0
    }

    pub fn contains_by_hand(&self) -> bool {
        self.lines.by_hand > 0
    }
}

/// Collapses runs of spaces and tabs and trims the line.
pub fn collapse_whitespace(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    for word in line.split([' ', '\t']).filter(|w| !w.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Normalized form of a script or template body: code lines only, each
/// whitespace-collapsed, joined with newlines. Generated regions are kept.
pub fn normalize(text: &str) -> String {
    let mask = code_line_mask(text);
    text.lines()
        .zip(mask)
        .filter(|(_, code)| *code)
        .map(|(line, _)| collapse_whitespace(line))
        .collect::<Vec<_>>()
        .join("\n")
}

fn analyze_text(text: &str, markers: &MarkerConfig) -> (LineCounts, String, Vec<Diagnostic>) {
    let mask = code_line_mask(text);
    let (regions, diags) = detect_generated_regions(text, markers);
    let mut counts = LineCounts {
        total: mask.len(),
        ..LineCounts::default()
    };
    let mut kept = Vec::new();
    for (idx, (line, code)) in text.lines().zip(&mask).enumerate() {
        if !code {
            continue;
        }
        counts.non_blank += 1;
        match origin_of(&regions, idx + 1) {
            Provenance::Generated => counts.generated += 1,
            Provenance::ByHand => {
                counts.by_hand += 1;
                kept.push(collapse_whitespace(line));
            }
        }
    }
    (counts, kept.join("\n"), diags)
}
