use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Package version with a simplified total order.
///
/// Versions are split on `.`, `-` and `+`. All-digit components compare
/// numerically, anything else lexicographically, and a numeric component
/// sorts before a textual one. The shorter tuple is padded with `0`.
/// Equality follows the order, so `1.0` and `1` are equal versions even
/// though their raw strings differ; the raw string is what gets hashed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Version(String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Component<'a> {
    Num(&'a str),
    Text(&'a str),
}

impl<'a> Component<'a> {
    fn parse(raw: &'a str) -> Self {
        if !raw.is_empty() && raw.bytes().all(|b| b.is_ascii_digit()) {
            let trimmed = raw.trim_start_matches('0');
            Component::Num(if trimmed.is_empty() { "0" } else { trimmed })
        } else {
            Component::Text(raw)
        }
    }

    fn cmp(self, other: Self) -> Ordering {
        match (self, other) {
            (Component::Num(a), Component::Num(b)) => a.len().cmp(&b.len()).then_with(|| a.cmp(b)),
            (Component::Num(_), Component::Text(_)) => Ordering::Less,
            (Component::Text(_), Component::Num(_)) => Ordering::Greater,
            (Component::Text(a), Component::Text(b)) => a.cmp(b),
        }
    }
}

const ZERO: Component<'static> = Component::Num("0");

impl Version {
    pub fn new(raw: impl Into<String>) -> Self {
        Version(raw.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn components(&self) -> impl Iterator<Item = Component<'_>> {
        self.0.split(['.', '-', '+']).map(Component::parse)
    }
}

impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut left = self.components();
        let mut right = other.components();
        loop {
            match (left.next(), right.next()) {
                (None, None) => return Ordering::Equal,
                (a, b) => {
                    let ord = a.unwrap_or(ZERO).cmp(b.unwrap_or(ZERO));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
            }
        }
    }
}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Version {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Version {}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Version {
    fn from(raw: &str) -> Self {
        Version::new(raw)
    }
}

impl From<String> for Version {
    fn from(raw: String) -> Self {
        Version(raw)
    }
}
