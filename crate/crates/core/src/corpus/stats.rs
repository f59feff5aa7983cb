use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::collect::Corpus;
use super::record::LineCounts;
use crate::model::ScriptKind;

/// A count and its percentage of some base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Share {
    pub count: usize,
    pub percent: f64,
}

impl Share {
    pub fn of(count: usize, base: usize) -> Self {
        let percent = if base == 0 {
            0.0
        } else {
            count as f64 * 100.0 / base as f64
        };
        Share { count, percent }
    }

    /// Percentage rounded to one decimal, as printed in reports.
    pub fn rounded(&self) -> f64 {
        (self.percent * 10.0).round() / 10.0
    }
}

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:.1}%)", self.count, self.percent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindStats {
    /// Share of the actual scripts.
    pub scripts: Share,
    pub entirely_generated: Share,
    pub containing_by_hand: Share,
    pub lines: LineCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub packages: usize,
    pub potential: usize,
    /// Of potential.
    pub missing: Share,
    /// Of potential.
    pub actual: Share,
    pub unreadable: usize,
    /// Of actual.
    pub entirely_generated: Share,
    /// Of actual.
    pub containing_by_hand: Share,
    /// Scripts without a single code line, of actual.
    pub inert_only: Share,
    pub loc_non_blank: usize,
    /// Of non-blank lines.
    pub loc_generated: Share,
    /// Of non-blank lines.
    pub loc_by_hand: Share,
    pub per_kind: BTreeMap<ScriptKind, KindStats>,
    /// Scripts matched by at least one template, of actual.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_coverable: Option<Share>,
}

impl CorpusStats {
    pub fn with_template_coverage(mut self, covered: usize) -> Self {
        self.template_coverable = Some(Share::of(covered, self.actual.count));
        self
    }
}

/// Aggregates per-record counts. Unreadable scripts count as actual but
/// contribute no lines.
pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let u = corpus.universe;
    let actual = u.potential_scripts.saturating_sub(u.missing_count);
    let mut lines = LineCounts::default();
    let (mut generated, mut by_hand) = (0, 0);
    let mut kinds: BTreeMap<ScriptKind, (usize, usize, usize, LineCounts)> = BTreeMap::new();
    for r in &corpus.records {
        lines += r.lines;
        generated += r.is_entirely_generated() as usize;
        by_hand += r.contains_by_hand() as usize;
        let k = kinds.entry(r.kind).or_default();
        k.0 += 1;
        k.1 += r.is_entirely_generated() as usize;
        k.2 += r.contains_by_hand() as usize;
        k.3 += r.lines;
    }
    let inert = corpus.records.len() - generated - by_hand;
    CorpusStats {
        packages: u.package_count,
        potential: u.potential_scripts,
        missing: Share::of(u.missing_count, u.potential_scripts),
        actual: Share::of(actual, u.potential_scripts),
        unreadable: u.unreadable_count,
        entirely_generated: Share::of(generated, actual),
        containing_by_hand: Share::of(by_hand, actual),
        inert_only: Share::of(inert, actual),
        loc_non_blank: lines.non_blank,
        loc_generated: Share::of(lines.generated, lines.non_blank),
        loc_by_hand: Share::of(lines.by_hand, lines.non_blank),
        per_kind: kinds
            .into_iter()
            .map(|(kind, (n, g, h, l))| {
                let stats = KindStats {
                    scripts: Share::of(n, actual),
                    entirely_generated: Share::of(g, n),
                    containing_by_hand: Share::of(h, n),
                    lines: l,
                };
                (kind, stats)
            })
            .collect(),
        template_coverable: None,
    }
}
