use serde::{Deserialize, Serialize};

use super::classes::TemplateClass;
use super::cluster::Group;
use super::stats::CorpusStats;
use super::template::OccurrenceTable;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub stats: CorpusStats,
    pub groups: Vec<Group>,
    pub occurrences: OccurrenceTable,
    pub classes: Vec<TemplateClass>,
}

impl CorpusReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Renders rows as a left-aligned plain-text table; numeric columns are
/// right-aligned.
pub fn text_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let numeric: Vec<bool> = (0..headers.len())
        .map(|c| {
            !rows.is_empty()
                && rows
                    .iter()
                    .all(|r| r.get(c).is_some_and(|s| s.parse::<f64>().is_ok()))
        })
        .collect();
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if numeric[c] {
                    format!("{s:>w$}", w = widths[c])
                } else {
                    format!("{s:<w$}", w = widths[c])
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    out += &line(
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str)
            .collect(),
    );
    for row in rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}

pub fn groups_table(groups: &[Group]) -> String {
    let rows: Vec<Vec<String>> = groups
        .iter()
        .map(|g| {
            vec![
                g.id.clone(),
                g.occurrence.to_string(),
                g.representative.clone(),
            ]
        })
        .collect();
    text_table(&["Group", "Occurrences", "Representative"], &rows)
}

pub fn occurrences_table(table: &OccurrenceTable) -> String {
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.template.clone(),
                r.occurrences.to_string(),
                r.origin_group.clone().unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    text_table(&["Template", "Occurrences", "Origin"], &rows)
}

pub fn classes_table(classes: &[TemplateClass]) -> String {
    let rows: Vec<Vec<String>> = classes
        .iter()
        .map(|c| {
            vec![
                c.id.clone(),
                c.members.len().to_string(),
                c.total_scripts_covered.to_string(),
                c.members.join(" "),
            ]
        })
        .collect();
    text_table(&["Class", "Templates", "Scripts", "Members"], &rows)
}

pub fn stats_table(s: &CorpusStats) -> String {
    let pct = |p: f64| format!("{p:.1}");
    let mut rows = vec![
        vec!["packages".into(), s.packages.to_string(), String::new()],
        vec![
            "potential scripts".into(),
            s.potential.to_string(),
            "100.0".into(),
        ],
        vec![
            "missing".into(),
            s.missing.count.to_string(),
            pct(s.missing.percent),
        ],
        vec![
            "actual".into(),
            s.actual.count.to_string(),
            pct(s.actual.percent),
        ],
        vec!["unreadable".into(), s.unreadable.to_string(), String::new()],
        vec![
            "entirely generated".into(),
            s.entirely_generated.count.to_string(),
            pct(s.entirely_generated.percent),
        ],
        vec![
            "containing by hand".into(),
            s.containing_by_hand.count.to_string(),
            pct(s.containing_by_hand.percent),
        ],
        vec![
            "inert only".into(),
            s.inert_only.count.to_string(),
            pct(s.inert_only.percent),
        ],
    ];
    if let Some(t) = &s.template_coverable {
        rows.push(vec![
            "template coverable".into(),
            t.count.to_string(),
            pct(t.percent),
        ]);
    }
    rows.extend([
        vec![
            "non-blank lines".into(),
            s.loc_non_blank.to_string(),
            String::new(),
        ],
        vec![
            "generated lines".into(),
            s.loc_generated.count.to_string(),
            pct(s.loc_generated.percent),
        ],
        vec![
            "by-hand lines".into(),
            s.loc_by_hand.count.to_string(),
            pct(s.loc_by_hand.percent),
        ],
    ]);
    let mut out = text_table(&["Measure", "Count", "%"], &rows);
    if !s.per_kind.is_empty() {
        let kinds: Vec<Vec<String>> = s
            .per_kind
            .iter()
            .map(|(k, v)| {
                vec![
                    k.to_string(),
                    v.scripts.count.to_string(),
                    pct(v.scripts.percent),
                    v.entirely_generated.count.to_string(),
                    v.containing_by_hand.count.to_string(),
                    v.lines.non_blank.to_string(),
                ]
            })
            .collect();
        out.push('\n');
        out += &text_table(
            &["Kind", "Scripts", "%", "Generated", "By hand", "Lines"],
            &kinds,
        );
    }
    out
}

impl CorpusReport {
    pub fn to_text(&self) -> String {
        [
            stats_table(&self.stats),
            groups_table(&self.groups),
            occurrences_table(&self.occurrences),
            classes_table(&self.classes),
        ]
        .join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_align() {
        let groups = vec![
            Group {
                id: "G1".into(),
                representative: "libk/x.preinst".into(),
                members: vec![],
                occurrence: 93,
            },
            Group {
                id: "G10".into(),
                representative: "a".into(),
                members: vec![],
                occurrence: 7,
            },
        ];
        let text = groups_table(&groups);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Group  Occurrences  Representative");
        assert_eq!(lines[2], "G1              93  libk/x.preinst");
        assert_eq!(lines[3], "G10              7  a");
    }
}
