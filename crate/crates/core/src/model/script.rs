use std::fmt;

use serde::{Deserialize, Serialize};

use super::package::ScriptKind;
use super::statement::Statement;

/// A `[ ... ]` / `test` condition. Operands keep `$1` and any variable the
/// injector could not bind as literal `$NAME` text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Predicate {
    FileExists(String),
    DirExists(String),
    FileRegular(String),
    StrEq(String, String),
    StrNeq(String, String),
    Not(Box<Predicate>),
    /// Verbatim test text the parser does not model.
    Unknown(String),
}

impl Predicate {
    /// Rewrites every operand; used to substitute variable bindings.
    pub fn map_operands(&self, f: &mut impl FnMut(&str) -> String) -> Predicate {
        match self {
            Predicate::FileExists(p) => Predicate::FileExists(f(p)),
            Predicate::DirExists(p) => Predicate::DirExists(f(p)),
            Predicate::FileRegular(p) => Predicate::FileRegular(f(p)),
            Predicate::StrEq(a, b) => Predicate::StrEq(f(a), f(b)),
            Predicate::StrNeq(a, b) => Predicate::StrNeq(f(a), f(b)),
            Predicate::Not(inner) => Predicate::Not(Box::new(inner.map_operands(f))),
            Predicate::Unknown(raw) => Predicate::Unknown(raw.clone()),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::FileExists(p) => write!(f, "-e {p}"),
            Predicate::DirExists(p) => write!(f, "-d {p}"),
            Predicate::FileRegular(p) => write!(f, "-f {p}"),
            Predicate::StrEq(a, b) => write!(f, "{a} = {b}"),
            Predicate::StrNeq(a, b) => write!(f, "{a} != {b}"),
            Predicate::Not(inner) => write!(f, "! {inner}"),
            Predicate::Unknown(raw) => write!(f, "?{raw}"),
        }
    }
}

/// One conjunct of a block guard. `condition` identifies the `if`/`elif`
/// test it came from so that a test shared by several blocks is evaluated
/// once, when control first reaches it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardTerm {
    pub condition: usize,
    pub predicate: Predicate,
    #[serde(default)]
    pub negated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Generated,
    ByHand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeledStatement {
    pub statement: Statement,
    /// 1-based source line.
    pub line: usize,
    pub provenance: Provenance,
    /// Set for `cmd || true` and for forcing flags such as `rm -f`.
    #[serde(default)]
    pub tolerant: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardedBlock {
    /// Conjunction; empty means unconditional.
    #[serde(default)]
    pub guard: Vec<GuardTerm>,
    pub statements: Vec<ModeledStatement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptModel {
    pub kind: ScriptKind,
    pub blocks: Vec<GuardedBlock>,
}

impl ScriptModel {
    pub fn empty(kind: ScriptKind) -> Self {
        ScriptModel {
            kind,
            blocks: Vec::new(),
        }
    }

    pub fn statements(&self) -> impl Iterator<Item = &ModeledStatement> {
        self.blocks.iter().flat_map(|b| b.statements.iter())
    }

    /// Wraps plain statements in a single unguarded block.
    pub fn unguarded(kind: ScriptKind, statements: Vec<Statement>) -> Self {
        let statements = statements
            .into_iter()
            .enumerate()
            .map(|(i, statement)| ModeledStatement {
                statement,
                line: i + 1,
                provenance: Provenance::ByHand,
                tolerant: false,
            })
            .collect();
        ScriptModel {
            kind,
            blocks: vec![GuardedBlock {
                guard: Vec::new(),
                statements,
            }],
        }
    }
}
