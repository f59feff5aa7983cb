use std::collections::BTreeMap;
use std::sync::LazyLock;

use petgraph::unionfind::UnionFind;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::record::normalize;
use super::template::{OccurrenceTable, Template};
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateClass {
    pub id: String,
    pub members: Vec<String>,
    pub total_scripts_covered: usize,
}

static TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(concat!(
        r"(?P<var>\$\{?[A-Za-z_][A-Za-z0-9_]*\}?)",
        r"|(?P<hole>#[A-Z][A-Z0-9_]*#)",
        r"|(?P<assign>[A-Za-z_][A-Za-z0-9_]*=)",
        r"|(?P<word>[^\s;|&()<>`'\x22$#]+)",
        r"|(?P<punct>\S)",
    ))
    .unwrap()
});

const IDENT: &str = "$ID";

/// Token stream of a template body. Variable references and holes become
/// one token class; assignment targets keep only the `=`.
pub fn tokenize(body: &str) -> Vec<String> {
    let text = normalize(body);
    TOKEN
        .captures_iter(&text)
        .map(|c| {
            if c.name("var").is_some() || c.name("hole").is_some() {
                IDENT.to_string()
            } else if c.name("assign").is_some() {
                format!("{IDENT}=")
            } else {
                c[0].to_string()
            }
        })
        .collect()
}

/// `1 - distance / longer length` over token streams; two empty streams are
/// identical.
#[allow(clippy::ptr_arg)]
pub fn similarity(a: &Vec<String>, b: &Vec<String>) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - strsim::generic_levenshtein(a, b) as f64 / longest as f64
}

/// Single-linkage classes of templates whose pairwise similarity reaches
/// `threshold`. Class ids follow the position of each class's first member
/// in `templates`.
pub fn group_template_classes(
    templates: &[Template],
    threshold: f64,
    mode: ExecMode,
) -> Result<Vec<TemplateClass>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(
            "threshold",
            format!("{threshold} is outside [0, 1]"),
        ));
    }
    let n = templates.len();
    let streams = par::map(mode, templates, |t| tokenize(&t.body));
    let edges: Vec<Vec<usize>> = par::map_range(mode, n, |i| {
        (i + 1..n)
            .filter(|&j| similarity(&streams[i], &streams[j]) >= threshold)
            .collect()
    });
    let mut sets = UnionFind::<usize>::new(n);
    for (i, js) in edges.iter().enumerate() {
        for &j in js {
            sets.union(i, j);
        }
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        by_root.entry(sets.find(i)).or_default().push(i);
    }
    let mut classes: Vec<Vec<usize>> = by_root.into_values().collect();
    classes.sort_by_key(|members| members[0]);
    Ok(classes
        .into_iter()
        .enumerate()
        .map(|(k, members)| TemplateClass {
            id: format!("C{}", k + 1),
            members: members
                .into_iter()
                .map(|i| templates[i].id.clone())
                .collect(),
            total_scripts_covered: 0,
        })
        .collect())
}

/// Fills `total_scripts_covered` with the summed occurrences of each
/// class's members.
pub fn attach_coverage(classes: &mut [TemplateClass], table: &OccurrenceTable) {
    for class in classes {
        class.total_scripts_covered = class.members.iter().filter_map(|m| table.get(m)).sum();
    }
}
