use serde::Serialize;

use super::lexer::{tokenize, Tok, Token};
use super::word::literal_text;
use crate::model::{Diagnostic, DiagnosticCode, Predicate};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommandInvocation {
    pub name: String,
    /// Raw words, quotes intact; the injector expands them against its
    /// bindings.
    pub args: Vec<String>,
    pub raw_line: String,
    pub line_no: usize,
    /// `cmd || true` and friends.
    pub tolerant: bool,
    pub redirects: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElifBranch {
    pub predicate: Predicate,
    pub body: Vec<AstNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "node")]
pub enum NodeKind {
    Command(CommandInvocation),
    Assignment {
        var: String,
        value: String,
    },
    If {
        predicate: Predicate,
        then: Vec<AstNode>,
        elifs: Vec<ElifBranch>,
        else_: Vec<AstNode>,
    },
    For {
        var: String,
        words: Vec<String>,
        body: Vec<AstNode>,
    },
    Comment {
        text: String,
    },
    Blank,
    OpaqueLine {
        raw: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AstNode {
    pub line_no: usize,
    pub end_line: usize,
    #[serde(flatten)]
    pub kind: NodeKind,
}

impl AstNode {
    fn new(line_no: usize, end_line: usize, kind: NodeKind) -> Self {
        AstNode {
            line_no,
            end_line: end_line.max(line_no),
            kind,
        }
    }

    pub fn is_inert(&self) -> bool {
        matches!(self.kind, NodeKind::Comment { .. } | NodeKind::Blank)
    }

    /// Direct child lists, in source order.
    pub fn children(&self) -> Vec<&[AstNode]> {
        match &self.kind {
            NodeKind::If {
                then, elifs, else_, ..
            } => {
                let mut out = vec![then.as_slice()];
                out.extend(elifs.iter().map(|e| e.body.as_slice()));
                out.push(else_.as_slice());
                out
            }
            NodeKind::For { body, .. } => vec![body.as_slice()],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScriptAst {
    pub items: Vec<AstNode>,
    pub line_count: usize,
}

impl ScriptAst {
    /// Visits every node depth-first in source order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a AstNode)) {
        fn go<'a>(nodes: &'a [AstNode], f: &mut impl FnMut(&'a AstNode)) {
            for node in nodes {
                f(node);
                for child in node.children() {
                    go(child, f);
                }
            }
        }
        go(&self.items, f);
    }

    /// Sorted, de-duplicated lines covered by the top-level node spans.
    pub fn covered_lines(&self) -> Vec<usize> {
        let mut lines: Vec<usize> = self
            .items
            .iter()
            .flat_map(|n| n.line_no..=n.end_line)
            .collect();
        lines.sort_unstable();
        lines.dedup();
        lines
    }
}

const RESERVED: &[&str] = &[
    "then", "elif", "else", "fi", "do", "done", "esac", "}", "in",
];

#[derive(Debug)]
struct ParseError;

type PResult<T> = Result<T, ParseError>;

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    lines: Vec<&'a str>,
}

/// Parses the supported shell subset. Total: constructs outside the subset
/// and anything malformed become `OpaqueLine` nodes.
pub fn parse_script(text: &str) -> ScriptAst {
    let mut parser = Parser {
        tokens: tokenize(text),
        pos: 0,
        lines: text.lines().collect(),
    };
    let mut items = Vec::new();
    while !parser.eof() {
        if matches!(parser.peek_tok(), Some(Tok::Newline)) {
            parser.pos += 1;
            continue;
        }
        let start = parser.pos;
        match parser.item() {
            Ok(nodes) => {
                items.extend(nodes);
                parser.separator();
            }
            Err(ParseError) => {
                parser.pos = start;
                items.push(parser.opaque_logical_line());
            }
        }
    }
    ScriptAst {
        items,
        line_count: parser.lines.len(),
    }
}

/// Decodes bytes lossily and parses them, warning when bytes were replaced.
pub fn parse_script_bytes(bytes: &[u8]) -> (ScriptAst, Vec<Diagnostic>) {
    let text = String::from_utf8_lossy(bytes);
    let mut diags = Vec::new();
    if let std::borrow::Cow::Owned(_) = text {
        diags.push(Diagnostic::warning(
            DiagnosticCode::InvalidUtf8,
            "invalid UTF-8 sequences were replaced",
        ));
    }
    (parse_script(&text), diags)
}

/// For each source line, whether it holds code rather than only blanks,
/// comments or the shebang. Heredoc bodies and continuation lines count
/// as code.
pub fn code_line_mask(text: &str) -> Vec<bool> {
    let mut mask = vec![false; text.lines().count()];
    for tok in tokenize(text) {
        if matches!(tok.tok, Tok::Comment(_) | Tok::Blank | Tok::Newline) {
            continue;
        }
        for line in tok.line..=tok.end_line {
            if let Some(slot) = mask.get_mut(line - 1) {
                *slot = true;
            }
        }
    }
    mask
}

fn token_text(tok: &Tok) -> String {
    match tok {
        Tok::Word(w) => w.clone(),
        Tok::Newline | Tok::Blank => String::new(),
        Tok::Semi => ";".into(),
        Tok::DoubleSemi => ";;".into(),
        Tok::AndIf => "&&".into(),
        Tok::OrIf => "||".into(),
        Tok::Pipe => "|".into(),
        Tok::Amp => "&".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
        Tok::Redirect(r) => r.clone(),
        Tok::Comment(c) => c.clone(),
        Tok::HereDoc => "<heredoc>".into(),
    }
}

fn join_tokens(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(|t| token_text(&t.tok))
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_test_command(words: &[String]) -> bool {
    match words.first().map(String::as_str) {
        Some("[") => words.len() >= 2 && words.last().map(String::as_str) == Some("]"),
        Some("test") => true,
        _ => false,
    }
}

/// Builds a predicate from the words of a `[ ... ]` or `test ...` command.
pub(crate) fn test_predicate(words: &[String]) -> Predicate {
    let raw = words.join(" ");
    let operands: &[String] = match words.first().map(String::as_str) {
        Some("[") if is_test_command(words) => &words[1..words.len() - 1],
        Some("test") => &words[1..],
        _ => return Predicate::Unknown(raw),
    };
    predicate_from_operands(operands).unwrap_or(Predicate::Unknown(raw))
}

fn predicate_from_operands(ops: &[String]) -> Option<Predicate> {
    let strs: Vec<&str> = ops.iter().map(String::as_str).collect();
    match strs.as_slice() {
        ["!", rest @ ..] if !rest.is_empty() => {
            predicate_from_operands(&ops[1..]).map(|p| Predicate::Not(Box::new(p)))
        }
        ["-e", path] => Some(Predicate::FileExists(literal_text(path))),
        ["-d", path] => Some(Predicate::DirExists(literal_text(path))),
        ["-f", path] => Some(Predicate::FileRegular(literal_text(path))),
        [lhs, "=" | "==", rhs] => Some(Predicate::StrEq(literal_text(lhs), literal_text(rhs))),
        [lhs, "!=", rhs] => Some(Predicate::StrNeq(literal_text(lhs), literal_text(rhs))),
        _ => None,
    }
}

/// One pipeline inside an and-or list.
struct Stage {
    nodes: Vec<AstNode>,
    test: Option<Vec<String>>,
    raw: String,
    line: usize,
    end_line: usize,
    is_true: bool,
}

impl Stage {
    fn opaque(line: usize, end_line: usize, raw: String) -> Self {
        Stage {
            nodes: vec![AstNode::new(
                line,
                end_line,
                NodeKind::OpaqueLine { raw: raw.clone() },
            )],
            test: None,
            raw,
            line,
            end_line,
            is_true: false,
        }
    }
}

impl<'a> Parser<'a> {
    fn eof(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_tok(&self) -> Option<&Tok> {
        self.peek().map(|t| &t.tok)
    }

    fn peek_word(&self) -> Option<&str> {
        self.peek().and_then(Token::word)
    }

    fn last_end(&self) -> usize {
        self.tokens[..self.pos].last().map_or(1, |t| t.end_line)
    }

    fn source(&self, line: usize, end_line: usize) -> String {
        let lo = line.saturating_sub(1).min(self.lines.len());
        let hi = end_line.min(self.lines.len()).max(lo);
        self.lines[lo..hi].join("\n")
    }

    fn opaque_logical_line(&mut self) -> AstNode {
        let first = self.tokens[self.pos].line;
        let mut end = first;
        while let Some(tok) = self.tokens.get(self.pos) {
            self.pos += 1;
            end = end.max(tok.end_line);
            if matches!(tok.tok, Tok::Newline | Tok::Blank) {
                break;
            }
        }
        AstNode::new(
            first,
            end,
            NodeKind::OpaqueLine {
                raw: self.source(first, end),
            },
        )
    }

    fn skip_while(&mut self, pred: impl Fn(&Tok) -> bool) {
        while self.peek_tok().is_some_and(&pred) {
            self.pos += 1;
        }
    }

    /// Consumes the `;` or `&` ending a command, if present. A separator
    /// after a blank or comment line starts a line of its own.
    fn separator(&mut self) {
        let after_line = self.pos > 0
            && matches!(
                self.tokens[self.pos - 1].tok,
                Tok::Blank | Tok::Comment(_) | Tok::Newline
            );
        if !after_line && matches!(self.peek_tok(), Some(Tok::Semi | Tok::Amp)) {
            self.pos += 1;
        }
    }

    /// Parses items until one of `terms` appears in command position.
    fn list(&mut self, terms: &[&str]) -> PResult<Vec<AstNode>> {
        let mut nodes = Vec::new();
        loop {
            self.skip_while(|t| matches!(t, Tok::Newline));
            if self.eof() {
                return Err(ParseError);
            }
            if self.peek_word().is_some_and(|w| terms.contains(&w)) {
                return Ok(nodes);
            }
            nodes.extend(self.item()?);
            self.separator();
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<()> {
        if self.peek_word() == Some(word) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError)
        }
    }

    /// Redirections after a compound command, then the end of the command.
    fn compound_tail(&mut self) -> PResult<usize> {
        let mut end = self.last_end();
        while let Some(Tok::Redirect(_)) = self.peek_tok() {
            end = end.max(self.tokens[self.pos].end_line);
            self.pos += 1;
        }
        match self.peek_tok() {
            None | Some(Tok::Newline | Tok::Semi | Tok::Amp | Tok::Comment(_) | Tok::Blank) => {
                Ok(end)
            }
            _ => Err(ParseError),
        }
    }

    fn item(&mut self) -> PResult<Vec<AstNode>> {
        let Some(tok) = self.peek().cloned() else {
            return Ok(Vec::new());
        };
        match &tok.tok {
            Tok::Blank => {
                self.pos += 1;
                Ok(vec![AstNode::new(tok.line, tok.end_line, NodeKind::Blank)])
            }
            Tok::Comment(text) => {
                self.pos += 1;
                Ok(vec![AstNode::new(
                    tok.line,
                    tok.line,
                    NodeKind::Comment { text: text.clone() },
                )])
            }
            Tok::Newline => {
                self.pos += 1;
                Ok(Vec::new())
            }
            Tok::LParen => self.opaque_parens(),
            Tok::Word(w) => match w.as_str() {
                "if" => self.if_clause().map(|n| vec![n]),
                "for" => self.for_clause().map(|n| vec![n]),
                "while" | "until" | "select" => self.opaque_balanced("do", "done", true),
                "case" => self.opaque_balanced("case", "esac", false),
                "{" => self.opaque_balanced("{", "}", false),
                "function" => self.opaque_function(),
                w if RESERVED.contains(&w) => Err(ParseError),
                _ if matches!(
                    self.tokens.get(self.pos + 1).map(|t| &t.tok),
                    Some(Tok::LParen)
                ) =>
                {
                    self.opaque_function()
                }
                _ => self.and_or(),
            },
            Tok::Redirect(_) => self.and_or(),
            _ => Err(ParseError),
        }
    }

    /// Finishes an opaque construct that started at token `start`.
    fn opaque_from(&mut self, start: usize) -> PResult<Vec<AstNode>> {
        let end = match self.compound_tail() {
            Ok(end) => end,
            Err(ParseError) => {
                let mut end = self.last_end();
                while let Some(t) = self.peek() {
                    if matches!(t.tok, Tok::Newline | Tok::Blank) {
                        break;
                    }
                    end = end.max(t.end_line);
                    self.pos += 1;
                }
                end
            }
        };
        let line = self.tokens[start].line;
        Ok(vec![AstNode::new(
            line,
            end,
            NodeKind::OpaqueLine {
                raw: self.source(line, end),
            },
        )])
    }

    /// Skips to the keyword closing the construct at `self.pos`. With
    /// `need_open` counting starts at the first `open` (loops).
    fn opaque_balanced(
        &mut self,
        open: &str,
        close: &str,
        need_open: bool,
    ) -> PResult<Vec<AstNode>> {
        let start = self.pos;
        let mut depth = 0usize;
        let mut opened = false;
        if !need_open {
            self.pos += 1;
            depth = 1;
            opened = true;
        }
        while let Some(tok) = self.peek() {
            let word = tok.word().map(str::to_string);
            self.pos += 1;
            match word.as_deref() {
                Some(w) if w == open => {
                    depth += 1;
                    opened = true;
                }
                Some(w) if w == close && opened => {
                    depth -= 1;
                    if depth == 0 {
                        return self.opaque_from(start);
                    }
                }
                _ => {}
            }
        }
        Err(ParseError)
    }

    fn opaque_parens(&mut self) -> PResult<Vec<AstNode>> {
        let start = self.pos;
        let mut depth = 0usize;
        while let Some(tok) = self.peek() {
            let tok = tok.tok.clone();
            self.pos += 1;
            match tok {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        return self.opaque_from(start);
                    }
                }
                _ => {}
            }
        }
        Err(ParseError)
    }

    fn opaque_function(&mut self) -> PResult<Vec<AstNode>> {
        let start = self.pos;
        // Step over `name ( )` or `function name`, then balance the body.
        loop {
            match self.peek_tok() {
                Some(Tok::Word(w)) if w == "{" => {
                    self.opaque_balanced("{", "}", true)?;
                    break;
                }
                Some(Tok::LParen)
                    if !matches!(
                        self.tokens.get(self.pos + 1).map(|t| &t.tok),
                        Some(Tok::RParen)
                    ) =>
                {
                    self.opaque_parens()?;
                    break;
                }
                None | Some(Tok::Blank) => return Err(ParseError),
                _ => self.pos += 1,
            }
        }
        let line = self.tokens[start].line;
        let end = self.last_end();
        Ok(vec![AstNode::new(
            line,
            end,
            NodeKind::OpaqueLine {
                raw: self.source(line, end),
            },
        )])
    }

    fn if_clause(&mut self) -> PResult<AstNode> {
        let line = self.tokens[self.pos].line;
        self.pos += 1;
        let predicate = self.condition()?;
        self.expect_word("then")?;
        let then = self.list(&["elif", "else", "fi"])?;
        let mut elifs = Vec::new();
        let mut else_ = Vec::new();
        loop {
            match self.peek_word() {
                Some("elif") => {
                    self.pos += 1;
                    let predicate = self.condition()?;
                    self.expect_word("then")?;
                    let body = self.list(&["elif", "else", "fi"])?;
                    elifs.push(ElifBranch { predicate, body });
                }
                Some("else") => {
                    self.pos += 1;
                    else_ = self.list(&["fi"])?;
                    self.expect_word("fi")?;
                    break;
                }
                Some("fi") => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(ParseError),
            }
        }
        let end = self.compound_tail()?;
        Ok(AstNode::new(
            line,
            end,
            NodeKind::If {
                predicate,
                then,
                elifs,
                else_,
            },
        ))
    }

    /// Tokens up to the separator before `then`, turned into a predicate.
    fn condition(&mut self) -> PResult<Predicate> {
        let start = self.pos;
        while let Some(tok) = self.peek() {
            match &tok.tok {
                Tok::Semi | Tok::Newline => break,
                Tok::Word(w) if w == "then" => break,
                Tok::Blank | Tok::HereDoc | Tok::Comment(_) => return Err(ParseError),
                _ => self.pos += 1,
            }
        }
        let cond: Vec<Token> = self.tokens[start..self.pos].to_vec();
        self.skip_while(|t| matches!(t, Tok::Semi | Tok::Newline | Tok::Blank | Tok::Comment(_)));
        if cond.is_empty() {
            return Err(ParseError);
        }
        let words: Option<Vec<String>> = cond
            .iter()
            .filter(|t| !matches!(t.tok, Tok::Redirect(_)))
            .map(|t| t.word().map(str::to_string))
            .collect();
        Ok(match words {
            Some(words)
                if words.first().is_some_and(|w| w == "!") && is_test_command(&words[1..]) =>
            {
                Predicate::Not(Box::new(test_predicate(&words[1..])))
            }
            Some(words) if is_test_command(&words) => test_predicate(&words),
            _ => Predicate::Unknown(join_tokens(&cond)),
        })
    }

    fn for_clause(&mut self) -> PResult<AstNode> {
        let line = self.tokens[self.pos].line;
        self.pos += 1;
        let var = match self.peek_word() {
            Some(v) if is_name(v) => v.to_string(),
            _ => return Err(ParseError),
        };
        self.pos += 1;
        self.skip_while(|t| matches!(t, Tok::Newline));
        let mut words = Vec::new();
        if self.peek_word() == Some("in") {
            self.pos += 1;
            while let Some(tok) = self.peek() {
                match &tok.tok {
                    Tok::Word(w) => {
                        words.push(w.clone());
                        self.pos += 1;
                    }
                    Tok::Semi | Tok::Newline => break,
                    _ => return Err(ParseError),
                }
            }
        } else {
            words.push("\"$@\"".to_string());
        }
        self.skip_while(|t| matches!(t, Tok::Semi | Tok::Newline | Tok::Blank | Tok::Comment(_)));
        self.expect_word("do")?;
        let body = self.list(&["done"])?;
        self.expect_word("done")?;
        let end = self.compound_tail()?;
        Ok(AstNode::new(line, end, NodeKind::For { var, words, body }))
    }

    fn and_or(&mut self) -> PResult<Vec<AstNode>> {
        let mut stages = vec![self.pipeline()?];
        let mut ops = Vec::new();
        while let Some(op) = self.peek_tok().cloned() {
            if !matches!(op, Tok::AndIf | Tok::OrIf) {
                break;
            }
            self.pos += 1;
            self.skip_while(|t| matches!(t, Tok::Newline));
            ops.push(op);
            stages.push(self.pipeline()?);
        }
        let mut tolerant = false;
        if ops.last() == Some(&Tok::OrIf) && stages.last().is_some_and(|s| s.is_true) {
            stages.pop();
            ops.pop();
            tolerant = true;
        }
        Ok(fold_and_or(stages, &ops, tolerant))
    }

    fn pipeline(&mut self) -> PResult<Stage> {
        let start = self.pos;
        let first = self.simple_command()?;
        if !matches!(self.peek_tok(), Some(Tok::Pipe)) {
            return Ok(first);
        }
        while matches!(self.peek_tok(), Some(Tok::Pipe)) {
            self.pos += 1;
            self.skip_while(|t| matches!(t, Tok::Newline));
            self.simple_command()?;
        }
        let raw = join_tokens(&self.tokens[start..self.pos]);
        Ok(Stage::opaque(first.line, self.last_end(), raw))
    }

    fn simple_command(&mut self) -> PResult<Stage> {
        let start = self.pos;
        let line = self.peek().ok_or(ParseError)?.line;
        let mut words = Vec::new();
        let mut redirects = Vec::new();
        let mut heredoc = false;
        while let Some(tok) = self.peek() {
            match &tok.tok {
                Tok::Word(w) => words.push(w.clone()),
                Tok::Redirect(r) => redirects.push(r.clone()),
                Tok::HereDoc => heredoc = true,
                Tok::LParen | Tok::RParen | Tok::DoubleSemi => return Err(ParseError),
                _ => break,
            }
            self.pos += 1;
        }
        let end = self.last_end();
        let raw = join_tokens(&self.tokens[start..self.pos]);
        if words.is_empty() && redirects.is_empty() && !heredoc {
            return Err(ParseError);
        }
        if heredoc || words.is_empty() || words[0] == "!" {
            return Ok(Stage::opaque(line, end, raw));
        }
        let prefix = words
            .iter()
            .take_while(|w| split_assignment(w).is_some())
            .count();
        let assignment_stage = |assigns: &[String], raw: String| Stage {
            nodes: assigns
                .iter()
                .filter_map(|w| split_assignment(w))
                .map(|(var, value)| {
                    AstNode::new(
                        line,
                        end,
                        NodeKind::Assignment {
                            var: var.to_string(),
                            value: value.to_string(),
                        },
                    )
                })
                .collect(),
            test: None,
            raw,
            line,
            end_line: end,
            is_true: false,
        };
        if prefix == words.len() {
            return Ok(assignment_stage(&words, raw));
        }
        let mut cmd_words = words[prefix..].to_vec();
        if matches!(cmd_words[0].as_str(), "export" | "readonly" | "local")
            && cmd_words.len() > 1
            && cmd_words[1..]
                .iter()
                .all(|w| split_assignment(w).is_some() || is_name(w))
        {
            return Ok(assignment_stage(&cmd_words[1..], raw));
        }
        let test = is_test_command(&cmd_words).then(|| cmd_words.clone());
        let name = cmd_words.remove(0);
        let is_true = matches!(name.as_str(), "true" | ":") && cmd_words.is_empty();
        let cmd = CommandInvocation {
            name,
            args: cmd_words,
            raw_line: self.source(line, line).trim().to_string(),
            line_no: line,
            tolerant: false,
            redirects,
        };
        Ok(Stage {
            nodes: vec![AstNode::new(line, end, NodeKind::Command(cmd))],
            test,
            raw,
            line,
            end_line: end,
            is_true,
        })
    }
}

fn set_tolerant(nodes: &mut [AstNode]) {
    for node in nodes {
        match &mut node.kind {
            NodeKind::Command(cmd) => cmd.tolerant = true,
            NodeKind::If {
                then, elifs, else_, ..
            } => {
                set_tolerant(then);
                for e in elifs {
                    set_tolerant(&mut e.body);
                }
                set_tolerant(else_);
            }
            _ => {}
        }
    }
}

/// `[ t ] && cmd` becomes a guarded node, `a || b` runs `b` under an
/// unknown guard and `a && b` runs both.
fn fold_and_or(mut stages: Vec<Stage>, ops: &[Tok], tolerant: bool) -> Vec<AstNode> {
    if stages.len() == 1 {
        let mut nodes = stages.pop().unwrap().nodes;
        if tolerant {
            set_tolerant(&mut nodes);
        }
        return nodes;
    }
    let rest = stages.split_off(1);
    let first = stages.pop().unwrap();
    let line = first.line;
    let end = rest.last().map_or(first.end_line, |s| s.end_line);
    let tail = fold_and_or(rest, &ops[1..], tolerant);
    let guarded = |predicate| {
        AstNode::new(
            line,
            end,
            NodeKind::If {
                predicate,
                then: tail.clone(),
                elifs: Vec::new(),
                else_: Vec::new(),
            },
        )
    };
    match (&ops[0], first.test) {
        (Tok::AndIf, Some(words)) => vec![guarded(test_predicate(&words))],
        (_, Some(words)) => vec![guarded(Predicate::Not(Box::new(test_predicate(&words))))],
        (Tok::AndIf, None) => {
            let mut nodes = first.nodes;
            if tolerant {
                set_tolerant(&mut nodes);
            }
            nodes.extend(tail.iter().cloned());
            nodes
        }
        (_, None) => {
            let mut nodes = first.nodes;
            set_tolerant(&mut nodes);
            nodes.push(guarded(Predicate::Not(Box::new(Predicate::Unknown(
                first.raw,
            )))));
            nodes
        }
    }
}

pub(crate) fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn split_assignment(word: &str) -> Option<(&str, &str)> {
    let (var, value) = word.split_once('=')?;
    is_name(var).then_some((var, value))
}

/// Removes comments, blank lines and the shebang, at every depth.
pub fn strip_inert(ast: &ScriptAst) -> ScriptAst {
    fn strip(nodes: &[AstNode]) -> Vec<AstNode> {
        nodes
            .iter()
            .filter(|n| !n.is_inert())
            .map(|n| {
                let kind = match &n.kind {
                    NodeKind::If {
                        predicate,
                        then,
                        elifs,
                        else_,
                    } => NodeKind::If {
                        predicate: predicate.clone(),
                        then: strip(then),
                        elifs: elifs
                            .iter()
                            .map(|e| ElifBranch {
                                predicate: e.predicate.clone(),
                                body: strip(&e.body),
                            })
                            .collect(),
                        else_: strip(else_),
                    },
                    NodeKind::For { var, words, body } => NodeKind::For {
                        var: var.clone(),
                        words: words.clone(),
                        body: strip(body),
                    },
                    other => other.clone(),
                };
                AstNode {
                    line_no: n.line_no,
                    end_line: n.end_line,
                    kind,
                }
            })
            .collect()
    }
    ScriptAst {
        items: strip(&ast.items),
        line_count: ast.line_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const POSTINST: &str = "#!/bin/sh\nif [ -e /etc/apache2/apache2.conf ] ; then\n    a2enmod php5 >/dev/null || true\n    reload_apache\nfi\n";

    const GCONF: &str = r##"if [ "$1" = purge ]; then
    OLD_DIR=/etc/gconf/schemas
    SCHEMA_FILES="#SCHEMAS#"
    if [ -d $OLD_DIR ]; then
        for SCHEMA in $SCHEMA_FILES; do
            rm -f $OLD_DIR/$SCHEMA
        done
        rmdir -p --ignore-fail-on-non-empty $OLD_DIR
    fi
fi
"##;

    fn command(node: &AstNode) -> &CommandInvocation {
        match &node.kind {
            NodeKind::Command(c) => c,
            other => panic!("expected command, got {other:?}"),
        }
    }

    #[test]
    fn empty_script_has_no_items() {
        let ast = parse_script("");
        assert!(ast.items.is_empty());
        assert_eq!(ast.line_count, 0);
    }

    #[test]
    fn php5_postinst_structure() {
        let ast = strip_inert(&parse_script(POSTINST));
        assert_eq!(ast.items.len(), 1);
        let NodeKind::If {
            predicate,
            then,
            elifs,
            else_,
        } = &ast.items[0].kind
        else {
            panic!("expected if");
        };
        assert_eq!(
            predicate,
            &Predicate::FileExists("/etc/apache2/apache2.conf".into())
        );
        assert!(elifs.is_empty() && else_.is_empty());
        assert_eq!(then.len(), 2);
        let a2enmod = command(&then[0]);
        assert_eq!(a2enmod.name, "a2enmod");
        assert_eq!(a2enmod.args, vec!["php5"]);
        assert!(a2enmod.tolerant);
        assert_eq!(a2enmod.redirects, vec![">/dev/null"]);
        assert_eq!(a2enmod.line_no, 3);
        let reload = command(&then[1]);
        assert_eq!(reload.name, "reload_apache");
        assert!(!reload.tolerant);
        assert_eq!((ast.items[0].line_no, ast.items[0].end_line), (2, 5));
    }

    #[test]
    fn gconf_template_structure() {
        let ast = parse_script(GCONF);
        assert_eq!(ast.items.len(), 1);
        let NodeKind::If {
            predicate, then, ..
        } = &ast.items[0].kind
        else {
            panic!("expected if");
        };
        assert_eq!(predicate, &Predicate::StrEq("$1".into(), "purge".into()));
        assert_eq!(
            then[0].kind,
            NodeKind::Assignment {
                var: "OLD_DIR".into(),
                value: "/etc/gconf/schemas".into()
            }
        );
        assert_eq!(
            then[1].kind,
            NodeKind::Assignment {
                var: "SCHEMA_FILES".into(),
                value: "\"#SCHEMAS#\"".into()
            }
        );
        let NodeKind::If {
            predicate,
            then: inner,
            ..
        } = &then[2].kind
        else {
            panic!("expected nested if");
        };
        assert_eq!(predicate, &Predicate::DirExists("$OLD_DIR".into()));
        let NodeKind::For { var, words, body } = &inner[0].kind else {
            panic!("expected for");
        };
        assert_eq!(var, "SCHEMA");
        assert_eq!(words, &vec!["$SCHEMA_FILES".to_string()]);
        assert_eq!(command(&body[0]).name, "rm");
        assert_eq!(command(&body[0]).args, vec!["-f", "$OLD_DIR/$SCHEMA"]);
        let rmdir = command(&inner[1]);
        assert_eq!(rmdir.name, "rmdir");
        assert_eq!(
            rmdir.args,
            vec!["-p", "--ignore-fail-on-non-empty", "$OLD_DIR"]
        );
    }

    #[test]
    fn unsupported_constructs_become_opaque() {
        let text =
            "case \"$1\" in\n  configure) echo hi ;;\nesac\nfoo() {\n  echo x\n}\necho after\n";
        let ast = parse_script(text);
        let spans: Vec<_> = ast
            .items
            .iter()
            .map(|n| {
                (
                    n.line_no,
                    n.end_line,
                    matches!(n.kind, NodeKind::OpaqueLine { .. }),
                )
            })
            .collect();
        assert_eq!(spans, vec![(1, 3, true), (4, 6, true), (7, 7, false)]);
    }

    #[test]
    fn test_and_command_becomes_guard() {
        let ast = parse_script("[ -x /usr/sbin/invoke-rc.d ] && invoke-rc.d foo stop || true\n");
        let NodeKind::If {
            predicate, then, ..
        } = &ast.items[0].kind
        else {
            panic!("expected if");
        };
        assert_eq!(
            predicate,
            &Predicate::Unknown("[ -x /usr/sbin/invoke-rc.d ]".into())
        );
        assert!(command(&then[0]).tolerant);
    }

    #[test]
    fn generic_or_list_guards_the_fallback() {
        let ast = parse_script("rmdir /a || rm -rf /a\n");
        assert!(command(&ast.items[0]).tolerant);
        let NodeKind::If { predicate, .. } = &ast.items[1].kind else {
            panic!("expected if");
        };
        assert_eq!(
            predicate,
            &Predicate::Not(Box::new(Predicate::Unknown("rmdir /a".into())))
        );
    }

    #[test]
    fn stray_keywords_are_opaque() {
        let ast = parse_script("fi\necho ok\nif [ -e /x ]; then\n");
        assert!(matches!(ast.items[0].kind, NodeKind::OpaqueLine { .. }));
        assert_eq!(command(&ast.items[1]).name, "echo");
        assert!(matches!(ast.items[2].kind, NodeKind::OpaqueLine { .. }));
        assert_eq!(ast.covered_lines(), vec![1, 2, 3]);
    }

    #[test]
    fn pipelines_and_heredocs_are_opaque() {
        let ast = parse_script("ls /etc | grep foo\ncat > /etc/x <<EOF\nbody\nEOF\ntouch /y\n");
        assert!(matches!(ast.items[0].kind, NodeKind::OpaqueLine { .. }));
        assert!(matches!(ast.items[1].kind, NodeKind::OpaqueLine { .. }));
        assert_eq!((ast.items[1].line_no, ast.items[1].end_line), (2, 4));
        assert_eq!(command(&ast.items[2]).line_no, 5);
    }

    #[test]
    fn strip_inert_removes_comments_everywhere() {
        let ast =
            parse_script("#!/bin/sh\n# note\n\nif [ -e /a ]; then\n  # inner\n  touch /b\nfi\n");
        let stripped = strip_inert(&ast);
        assert_eq!(stripped.items.len(), 1);
        let NodeKind::If { then, .. } = &stripped.items[0].kind else {
            panic!("expected if");
        };
        assert_eq!(then.len(), 1);
        assert_eq!(strip_inert(&stripped), stripped);
    }

    #[test]
    fn comment_only_script_strips_to_nothing() {
        let ast = parse_script("#!/bin/sh\n\n# nothing to do\n   \n");
        assert_eq!(ast.items.len(), 4);
        assert!(strip_inert(&ast).items.is_empty());
    }

    #[test]
    fn elif_and_else_branches() {
        let ast = parse_script(
            "if [ \"$1\" = configure ]; then\n touch /a\nelif [ \"$1\" = upgrade ]; then\n touch /b\nelse\n touch /c\nfi\n",
        );
        let NodeKind::If { elifs, else_, .. } = &ast.items[0].kind else {
            panic!("expected if");
        };
        assert_eq!(elifs.len(), 1);
        assert_eq!(
            elifs[0].predicate,
            Predicate::StrEq("$1".into(), "upgrade".into())
        );
        assert_eq!(command(&else_[0]).args, vec!["/c"]);
    }

    #[test]
    fn stray_separators_are_opaque() {
        let ast = parse_script(
            "touch /a;
;
touch /b ; touch /c
",
        );
        assert_eq!(ast.items.len(), 4);
        assert!(matches!(ast.items[1].kind, NodeKind::OpaqueLine { .. }));
        assert_eq!(ast.covered_lines(), vec![1, 2, 3]);
    }

    #[test]
    fn continuations_into_blank_lines() {
        for text in ["\\\n\nE\n", "\nE\n\\\n", "infor \\\n\nE\n", "\n;\nE\n"] {
            let ast = parse_script(text);
            assert_eq!(ast.covered_lines(), vec![1, 2, 3], "{text:?}");
        }
    }

    proptest! {
        #[test]
        fn every_line_is_covered(text in r#"([a-z/\\$"' ;&|()<>#\[\]=-]|if |then|fi|for |in|do|done|case|esac|<<E|\nE\n|\n){0,60}"#) {
            let ast = parse_script(&text);
            let expected: Vec<usize> = (1..=ast.line_count).collect();
            prop_assert_eq!(ast.covered_lines(), expected);
        }

        #[test]
        fn strip_inert_is_idempotent(text in "(#c|touch /a|if [ -e /x ]; then|fi| |\n){0,30}") {
            let once = strip_inert(&parse_script(&text));
            prop_assert_eq!(strip_inert(&once), once.clone());
            let mut inert = 0;
            once.walk(&mut |n| if n.is_inert() { inert += 1 });
            prop_assert_eq!(inert, 0);
        }
    }

    #[test]
    fn code_lines_ignore_comments_and_blanks() {
        let mask = code_line_mask("#!/bin/sh\n\n# c\ntouch /a # trailing\necho a \\\n  b\n");
        assert_eq!(mask, vec![false, false, false, true, true, true]);
    }

    #[test]
    fn invalid_utf8_is_reported() {
        let (ast, diags) = parse_script_bytes(b"touch /a\xff\n");
        assert_eq!(ast.items.len(), 1);
        assert_eq!(diags[0].code, DiagnosticCode::InvalidUtf8);
    }
}
