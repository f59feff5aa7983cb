use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::collect::Corpus;

/// Records with byte-identical normalized text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub id: String,
    pub representative: String,
    /// Sorted source ids.
    pub members: Vec<String>,
    pub occurrence: usize,
}

/// Groups non-empty normalized records by exact equality. Groups come out
/// by occurrence (descending), then representative; ids are `G1`, `G2`, ...
/// in that order.
pub fn cluster_identical(corpus: &Corpus) -> Vec<Group> {
    let mut by_text: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for r in corpus
        .records
        .iter()
        .filter(|r| !r.normalized_text.is_empty())
    {
        by_text
            .entry(&r.normalized_text)
            .or_default()
            .push(&r.source_id);
    }
    let mut groups: Vec<Group> = by_text
        .into_values()
        .map(|mut members| {
            members.sort_unstable();
            Group {
                id: String::new(),
                representative: members[0].to_string(),
                occurrence: members.len(),
                members: members.into_iter().map(str::to_string).collect(),
            }
        })
        .collect();
    groups.sort_by(|a, b| {
        b.occurrence
            .cmp(&a.occurrence)
            .then_with(|| a.representative.cmp(&b.representative))
    });
    for (i, g) in groups.iter_mut().enumerate() {
        g.id = format!("G{}", i + 1);
    }
    groups
}
