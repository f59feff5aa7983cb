//! Maintainer-script front end: shell-subset parsing, generated-region
//! detection, command classification and statement-model injection.

mod classify;
mod inject;
mod lexer;
mod parse;
mod regions;
mod rpm;
mod word;

pub use classify::{
    classify_command, classify_words, ArgSpec, Classified, ClassifierRule, ClassifierTable,
};
pub use inject::{inject_script, inject_script_bytes};
pub use parse::{
    code_line_mask, parse_script, parse_script_bytes, strip_inert, AstNode, CommandInvocation,
    ElifBranch, NodeKind, ScriptAst,
};
pub use regions::{
    detect_generated_regions, origin_of, MarkerConfig, Region, DEFAULT_BEGIN_MARKER,
    DEFAULT_END_MARKER,
};
pub use rpm::parse_rpm_spec;
pub use word::{expand_fields, literal_text, resolve, Bindings, Unexpandable};
