//! Corpus analysis: collection, generated/by-hand accounting, identical
//! script groups, template occurrences, template classes and statistics.

mod classes;
mod cluster;
mod collect;
mod record;
mod report;
mod stats;
mod template;

pub use classes::{attach_coverage, group_template_classes, similarity, tokenize, TemplateClass};
pub use cluster::{cluster_identical, Group};
pub use collect::{
    collect_corpus, collect_entries, read_manifest, Corpus, ManifestEntry, UniverseCounts, MISSING,
};
pub use record::{collapse_whitespace, normalize, LineCounts, ScriptRecord};
pub use report::{
    classes_table, groups_table, occurrences_table, stats_table, text_table, CorpusReport,
};
pub use stats::{corpus_stats, CorpusStats, KindStats, Share};
pub use template::{
    count_template_occurrences, match_templates, template_coverage, templates_from_groups,
    OccurrenceRow, OccurrenceTable, Template, TemplateMatcher,
};

use crate::error::Result;
use crate::par::ExecMode;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub threshold: f64,
    /// Smallest group that becomes a derived template.
    pub min_group_occurrence: usize,
    /// Templates to count instead of the ones derived from groups.
    pub templates: Option<Vec<Template>>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            threshold: 0.8,
            min_group_occurrence: 2,
            templates: None,
        }
    }
}

/// Runs grouping, template counting, classes and statistics over a corpus.
pub fn analyze_corpus(
    corpus: &Corpus,
    options: &AnalysisOptions,
    mode: ExecMode,
) -> Result<CorpusReport> {
    let groups = cluster_identical(corpus);
    let templates = match &options.templates {
        Some(t) => t.clone(),
        None => templates_from_groups(&groups, corpus, options.min_group_occurrence),
    };
    let mut stats = corpus_stats(corpus);
    let (occurrences, classes) = if templates.is_empty() {
        (OccurrenceTable::default(), Vec::new())
    } else {
        let occurrences = count_template_occurrences(&templates, corpus, mode)?;
        let mut classes = group_template_classes(&templates, options.threshold, mode)?;
        attach_coverage(&mut classes, &occurrences);
        stats = stats.with_template_coverage(template_coverage(&templates, corpus, mode)?);
        (occurrences, classes)
    };
    Ok(CorpusReport {
        stats,
        groups,
        occurrences,
        classes,
    })
}
