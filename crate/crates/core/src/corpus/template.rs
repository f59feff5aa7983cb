use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::cluster::Group;
use super::collect::Corpus;
use super::record::normalize;
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};

static HOLE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#([A-Z][A-Z0-9_]*)#").unwrap());

/// A script body, possibly with `#NAME#` holes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_group: Option<String>,
}

impl Template {
    pub fn new(id: impl Into<String>, body: impl Into<String>) -> Self {
        Template {
            id: id.into(),
            body: body.into(),
            origin_group: None,
        }
    }

    /// Hole names in order of appearance, repeats included.
    pub fn holes(&self) -> Vec<String> {
        HOLE.captures_iter(&self.body)
            .map(|c| c[1].to_string())
            .collect()
    }

    /// Compiles the normalized body into an anchored matcher.
    pub fn matcher(&self) -> Result<TemplateMatcher> {
        let normalized = normalize(&self.body);
        if normalized.is_empty() {
            return Err(Error::invalid(
                "template",
                format!("{} has no code lines", self.id),
            ));
        }
        let lines: Vec<String> = normalized.lines().map(line_pattern).collect();
        let pattern = format!("^{}$", lines.join("\n"));
        let regex = Regex::new(&pattern)
            .map_err(|e| Error::invalid("template", format!("{}: {e}", self.id)))?;
        Ok(TemplateMatcher {
            literal: (!HOLE.is_match(&normalized)).then_some(normalized),
            regex,
        })
    }
}

/// Regex for one normalized template line. A hole matches a run of
/// non-blank characters, or any run without quotes inside a double-quoted
/// string.
fn line_pattern(line: &str) -> String {
    let mut out = String::new();
    let mut last = 0;
    for m in HOLE.find_iter(line) {
        let before = &line[last..m.start()];
        out.push_str(&regex::escape(before));
        let quotes =
            line[..m.start()].matches('"').count() - line[..m.start()].matches("\\\"").count();
        out.push_str(if quotes % 2 == 1 {
            r#"[^"\n]+"#
        } else {
            r"\S+"
        });
        last = m.end();
    }
    out.push_str(&regex::escape(&line[last..]));
    out
}

pub struct TemplateMatcher {
    literal: Option<String>,
    regex: Regex,
}

impl TemplateMatcher {
    pub fn is_match(&self, normalized: &str) -> bool {
        match &self.literal {
            Some(lit) => lit == normalized,
            None => self.regex.is_match(normalized),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceRow {
    pub template: String,
    pub occurrences: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_group: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceTable {
    pub rows: Vec<OccurrenceRow>,
}

impl OccurrenceTable {
    pub fn get(&self, template: &str) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.template == template)
            .map(|r| r.occurrences)
    }
}

/// Indices of the non-empty records each template matches.
pub fn match_templates(
    templates: &[Template],
    corpus: &Corpus,
    mode: ExecMode,
) -> Result<Vec<Vec<usize>>> {
    let matchers = templates
        .iter()
        .map(Template::matcher)
        .collect::<Result<Vec<_>>>()?;
    Ok(par::map(mode, &matchers, |m| {
        corpus
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.normalized_text.is_empty() && m.is_match(&r.normalized_text))
            .map(|(i, _)| i)
            .collect()
    }))
}

/// Counts, per template, the records it matches exactly. Rows are sorted
/// by occurrences, descending; ties keep the input order.
pub fn count_template_occurrences(
    templates: &[Template],
    corpus: &Corpus,
    mode: ExecMode,
) -> Result<OccurrenceTable> {
    if templates.is_empty() {
        return Err(Error::invalid("templates", "no templates given"));
    }
    let matches = match_templates(templates, corpus, mode)?;
    let mut rows: Vec<OccurrenceRow> = templates
        .iter()
        .zip(&matches)
        .map(|(t, m)| OccurrenceRow {
            template: t.id.clone(),
            occurrences: m.len(),
            origin_group: t.origin_group.clone(),
        })
        .collect();
    rows.sort_by_key(|r| std::cmp::Reverse(r.occurrences));
    Ok(OccurrenceTable { rows })
}

/// Number of non-empty records matched by at least one template.
pub fn template_coverage(templates: &[Template], corpus: &Corpus, mode: ExecMode) -> Result<usize> {
    let mut covered = vec![false; corpus.records.len()];
    for m in match_templates(templates, corpus, mode)? {
        for i in m {
            covered[i] = true;
        }
    }
    Ok(covered.into_iter().filter(|c| *c).count())
}

/// One hole-free template per group with at least `min_occurrence`
/// members, named `Template1`, `Template2`, ... in group order.
pub fn templates_from_groups(
    groups: &[Group],
    corpus: &Corpus,
    min_occurrence: usize,
) -> Vec<Template> {
    groups
        .iter()
        .filter(|g| g.occurrence >= min_occurrence.max(1))
        .filter_map(|g| {
            let rep = corpus
                .records
                .iter()
                .find(|r| r.source_id == g.representative)?;
            Some((g, rep.normalized_text.clone()))
        })
        .enumerate()
        .map(|(i, (g, body))| Template {
            id: format!("Template{}", i + 1),
            body,
            origin_group: Some(g.id.clone()),
        })
        .collect()
}
