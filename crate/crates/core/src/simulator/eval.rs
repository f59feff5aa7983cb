use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::injector::{resolve, Bindings};
use crate::model::{FileKind, GuardTerm, Predicate, SystemConfiguration};

/// Values visible to a running script.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEnv {
    /// Value of `$1`.
    pub positional_arg: String,
    #[serde(default)]
    pub bindings: Bindings,
}

impl ScriptEnv {
    pub fn new(positional_arg: impl Into<String>) -> Self {
        ScriptEnv {
            positional_arg: positional_arg.into(),
            bindings: Bindings::new(),
        }
    }

    fn resolve(&self, text: &str) -> Option<String> {
        let mut specials = Bindings::new();
        specials.insert("1".into(), self.positional_arg.clone());
        specials.insert("#".into(), "1".into());
        resolve(text, &specials, &self.bindings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn from_bool(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

impl std::ops::Not for Truth {
    type Output = Truth;

    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }
}

pub fn evaluate_predicate(
    config: &SystemConfiguration,
    pred: &Predicate,
    env: &ScriptEnv,
) -> Truth {
    let path_test = |p: &str, test: fn(FileKind) -> bool| match env.resolve(p) {
        Some(path) => Truth::from_bool(config.filesystem.get(&path).is_some_and(|e| test(e.kind))),
        None => Truth::Unknown,
    };
    let compare = |a: &str, b: &str, eq: bool| match (env.resolve(a), env.resolve(b)) {
        (Some(a), Some(b)) => Truth::from_bool((a == b) == eq),
        _ => Truth::Unknown,
    };
    match pred {
        Predicate::FileExists(p) => path_test(p, |_| true),
        Predicate::DirExists(p) => path_test(p, |k| k == FileKind::Directory),
        Predicate::FileRegular(p) => path_test(p, |k| k != FileKind::Directory),
        Predicate::StrEq(a, b) => compare(a, b, true),
        Predicate::StrNeq(a, b) => compare(a, b, false),
        Predicate::Not(inner) => !evaluate_predicate(config, inner, env),
        Predicate::Unknown(_) => Truth::Unknown,
    }
}

/// Condition values of one script run. A condition is evaluated against
/// the configuration current when it is first consulted and then reused.
#[derive(Debug, Default)]
pub struct GuardMemo {
    seen: BTreeMap<usize, Truth>,
}

impl GuardMemo {
    /// Conjunction of `guard`. A false term decides the result and stops
    /// the evaluation of later terms.
    pub fn evaluate(
        &mut self,
        config: &SystemConfiguration,
        guard: &[GuardTerm],
        env: &ScriptEnv,
    ) -> Truth {
        let mut result = Truth::True;
        for term in guard {
            let value = *self
                .seen
                .entry(term.condition)
                .or_insert_with(|| evaluate_predicate(config, &term.predicate, env));
            let value = if term.negated { !value } else { value };
            match value {
                Truth::False => return Truth::False,
                Truth::Unknown => result = Truth::Unknown,
                Truth::True => {}
            }
        }
        result
    }
}
