//! Tokenizer for the shell subset. Never fails: unterminated quotes run to
//! the end of input and unknown characters become part of words.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Word(String),
    Newline,
    Blank,
    Semi,
    DoubleSemi,
    AndIf,
    OrIf,
    Pipe,
    Amp,
    LParen,
    RParen,
    Redirect(String),
    Comment(String),
    /// `<<` body lines, swallowed up to the delimiter.
    HereDoc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub end_line: usize,
}

impl Token {
    pub fn word(&self) -> Option<&str> {
        match &self.tok {
            Tok::Word(w) => Some(w),
            _ => None,
        }
    }
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    tokens: Vec<Token>,
    pending_heredocs: Vec<(String, bool)>,
    at_line_start: bool,
    /// First line of a pending backslash-newline continuation.
    continued_from: Option<usize>,
    _src: &'a str,
}

pub(crate) fn tokenize(src: &str) -> Vec<Token> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        tokens: Vec::new(),
        pending_heredocs: Vec::new(),
        at_line_start: true,
        continued_from: None,
        _src: src,
    };
    lx.run();
    if let Some(from) = lx.continued_from.take() {
        let end = lx.line;
        match lx.tokens.last_mut() {
            Some(t) if t.end_line >= from => t.end_line = t.end_line.max(end),
            _ => lx.tokens.push(Token {
                tok: Tok::Blank,
                line: from,
                end_line: end,
            }),
        }
    }
    // An unterminated quote may run past the final newline.
    let last = src.lines().count().max(1);
    for t in &mut lx.tokens {
        t.line = t.line.min(last);
        t.end_line = t.end_line.min(last);
    }
    lx.tokens
}

fn is_meta(c: char) -> bool {
    matches!(c, ';' | '&' | '|' | '<' | '>' | '(' | ')') || c.is_whitespace()
}

impl Lexer<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn push(&mut self, tok: Tok, line: usize) {
        let end_line = if matches!(tok, Tok::Newline) {
            line
        } else {
            self.line
        };
        let covered = self.tokens.last().map_or(0, |t| t.end_line);
        let (tok, line) = match self.continued_from.take() {
            // Only continued lines before this newline: an empty logical line.
            Some(c) if c > covered && matches!(tok, Tok::Newline) => (Tok::Blank, c.min(line)),
            Some(c) if c > covered => (tok, c.min(line)),
            Some(_) if matches!(tok, Tok::Newline) => {
                // The continued command runs on to this line.
                if let Some(last) = self.tokens.last_mut() {
                    last.end_line = last.end_line.max(line);
                }
                (tok, line)
            }
            _ => (tok, line),
        };
        self.tokens.push(Token {
            tok,
            line,
            end_line,
        });
    }

    fn run(&mut self) {
        while self.pos < self.chars.len() {
            if self.at_line_start {
                self.at_line_start = false;
                if self.rest_of_line_is_blank() {
                    let line = self.line;
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                    self.push(Tok::Blank, line);
                    if self.peek() == Some('\n') {
                        self.bump();
                        self.at_line_start = true;
                    }
                    continue;
                }
            }
            let c = self.peek().unwrap();
            let line = self.line;
            match c {
                '\n' => {
                    self.bump();
                    self.push(Tok::Newline, line);
                    self.at_line_start = true;
                    self.read_heredoc_bodies();
                }
                '\\' if self.peek_at(1) == Some('\n') => {
                    self.continued_from.get_or_insert(line);
                    self.bump();
                    self.bump();
                }
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    let mut text = String::new();
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        text.push(c);
                        self.bump();
                    }
                    self.push(Tok::Comment(text), line);
                }
                ';' => {
                    self.bump();
                    if self.peek() == Some(';') {
                        self.bump();
                        self.push(Tok::DoubleSemi, line);
                    } else {
                        self.push(Tok::Semi, line);
                    }
                }
                '&' => {
                    self.bump();
                    match self.peek() {
                        Some('&') => {
                            self.bump();
                            self.push(Tok::AndIf, line);
                        }
                        Some('>') => {
                            self.bump();
                            self.redirect("&>".to_string(), line);
                        }
                        _ => self.push(Tok::Amp, line),
                    }
                }
                '|' => {
                    self.bump();
                    if self.peek() == Some('|') {
                        self.bump();
                        self.push(Tok::OrIf, line);
                    } else {
                        self.push(Tok::Pipe, line);
                    }
                }
                '(' => {
                    self.bump();
                    self.push(Tok::LParen, line);
                }
                ')' => {
                    self.bump();
                    self.push(Tok::RParen, line);
                }
                '<' | '>' => self.redirect(String::new(), line),
                c if c.is_ascii_digit() && self.digits_then_redirect() => {
                    let mut prefix = String::new();
                    while let Some(d) = self.peek().filter(char::is_ascii_digit) {
                        prefix.push(d);
                        self.bump();
                    }
                    self.redirect(prefix, line);
                }
                _ => {
                    let word = self.word();
                    self.push(Tok::Word(word), line);
                }
            }
        }
    }

    fn rest_of_line_is_blank(&self) -> bool {
        self.chars[self.pos..]
            .iter()
            .take_while(|c| **c != '\n')
            .all(|c| c.is_whitespace())
    }

    fn digits_then_redirect(&self) -> bool {
        let mut i = self.pos;
        while i < self.chars.len() && self.chars[i].is_ascii_digit() {
            i += 1;
        }
        matches!(self.chars.get(i), Some('<') | Some('>'))
    }

    /// Reads the operator (after an optional fd prefix already consumed)
    /// and its target word.
    fn redirect(&mut self, mut op: String, line: usize) {
        if !op.ends_with('>') {
            let first = self.bump().unwrap_or('>');
            op.push(first);
        }
        let mut heredoc = false;
        match (op.chars().last(), self.peek()) {
            (Some('>'), Some('>')) | (Some('>'), Some('&')) | (Some('>'), Some('|')) => {
                op.push(self.bump().unwrap());
            }
            (Some('<'), Some('<')) => {
                op.push(self.bump().unwrap());
                heredoc = true;
                if self.peek() == Some('-') {
                    op.push(self.bump().unwrap());
                }
            }
            (Some('<'), Some('&')) | (Some('<'), Some('>')) => {
                op.push(self.bump().unwrap());
            }
            _ => {}
        }
        while matches!(self.peek(), Some(c) if c == ' ' || c == '\t') {
            self.bump();
        }
        let target = match self.peek() {
            Some(c) if !is_meta(c) => self.word(),
            _ => String::new(),
        };
        if heredoc {
            let delim: String = target
                .chars()
                .filter(|c| !matches!(c, '\'' | '"' | '\\'))
                .collect();
            self.pending_heredocs.push((delim, op.ends_with('-')));
        }
        op.push_str(&target);
        self.push(Tok::Redirect(op), line);
    }

    fn read_heredoc_bodies(&mut self) {
        let pending = std::mem::take(&mut self.pending_heredocs);
        for (delim, strip_tabs) in pending {
            let start = self.line;
            let mut consumed = 0usize;
            while self.pos < self.chars.len() {
                let mut text = String::new();
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                consumed += 1;
                self.bump();
                let candidate = if strip_tabs {
                    text.trim_start_matches('\t')
                } else {
                    &text
                };
                if candidate == delim {
                    break;
                }
            }
            if consumed > 0 {
                // Keep the body inside the command it belongs to.
                let at = match self.tokens.last() {
                    Some(t) if t.tok == Tok::Newline => self.tokens.len() - 1,
                    _ => self.tokens.len(),
                };
                self.tokens.insert(
                    at,
                    Token {
                        tok: Tok::HereDoc,
                        line: start,
                        end_line: start + consumed - 1,
                    },
                );
            }
        }
        self.at_line_start = true;
    }

    fn word(&mut self) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            match c {
                '\\' => {
                    self.bump();
                    match self.bump() {
                        Some('\n') => {}
                        Some(next) => {
                            out.push('\\');
                            out.push(next);
                        }
                        None => out.push('\\'),
                    }
                }
                '\'' => {
                    out.push(c);
                    self.bump();
                    while let Some(q) = self.bump() {
                        out.push(q);
                        if q == '\'' {
                            break;
                        }
                    }
                }
                '"' => {
                    out.push(c);
                    self.bump();
                    self.double_quoted(&mut out);
                }
                '`' => {
                    out.push(c);
                    self.bump();
                    while let Some(q) = self.bump() {
                        out.push(q);
                        if q == '\\' {
                            if let Some(n) = self.bump() {
                                out.push(n);
                            }
                        } else if q == '`' {
                            break;
                        }
                    }
                }
                '$' if matches!(self.peek_at(1), Some('(') | Some('{')) => {
                    out.push(c);
                    self.bump();
                    self.balanced(&mut out);
                }
                c if is_meta(c) => break,
                _ => {
                    out.push(c);
                    self.bump();
                }
            }
        }
        out
    }

    fn double_quoted(&mut self, out: &mut String) {
        while let Some(c) = self.peek() {
            match c {
                '\\' => {
                    out.push(c);
                    self.bump();
                    if let Some(n) = self.bump() {
                        out.push(n);
                    }
                }
                '"' => {
                    out.push(c);
                    self.bump();
                    return;
                }
                '$' if matches!(self.peek_at(1), Some('(') | Some('{')) => {
                    out.push(c);
                    self.bump();
                    self.balanced(out);
                }
                '`' => {
                    out.push(c);
                    self.bump();
                    while let Some(q) = self.bump() {
                        out.push(q);
                        if q == '`' {
                            break;
                        }
                    }
                }
                _ => {
                    out.push(c);
                    self.bump();
                }
            }
        }
    }

    /// Copies a `(...)` or `{...}` group, honoring nesting and quotes.
    fn balanced(&mut self, out: &mut String) {
        let open = self.bump().unwrap();
        out.push(open);
        let close = if open == '(' { ')' } else { '}' };
        let mut depth = 1usize;
        while let Some(c) = self.bump() {
            out.push(c);
            match c {
                '\\' => {
                    if let Some(n) = self.bump() {
                        out.push(n);
                    }
                }
                '\'' => {
                    while let Some(q) = self.bump() {
                        out.push(q);
                        if q == '\'' {
                            break;
                        }
                    }
                }
                '"' => self.double_quoted(out),
                c if c == open => depth += 1,
                c if c == close => {
                    depth -= 1;
                    if depth == 0 {
                        return;
                    }
                }
                _ => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).into_iter().map(|t| t.tok).collect()
    }

    fn w(s: &str) -> Tok {
        Tok::Word(s.to_string())
    }

    #[test]
    fn redirections_and_or_list() {
        assert_eq!(
            toks("a2enmod php5 >/dev/null || true"),
            vec![
                w("a2enmod"),
                w("php5"),
                Tok::Redirect(">/dev/null".into()),
                Tok::OrIf,
                w("true")
            ]
        );
        assert_eq!(
            toks("foo 2>&1 >> log"),
            vec![
                w("foo"),
                Tok::Redirect("2>&1".into()),
                Tok::Redirect(">>log".into())
            ]
        );
    }

    #[test]
    fn quotes_keep_metacharacters() {
        assert_eq!(
            toks(r#"echo "a; b" 'c|d'"#),
            vec![w("echo"), w(r#""a; b""#), w("'c|d'")]
        );
        assert_eq!(toks("x=$(ls | wc -l)"), vec![w("x=$(ls | wc -l)")]);
    }

    #[test]
    fn blank_lines_and_comments() {
        assert_eq!(
            toks("#!/bin/sh\n\n  \necho hi # trailing\n"),
            vec![
                Tok::Comment("#!/bin/sh".into()),
                Tok::Newline,
                Tok::Blank,
                Tok::Blank,
                w("echo"),
                w("hi"),
                Tok::Comment("# trailing".into()),
                Tok::Newline,
            ]
        );
    }

    #[test]
    fn heredoc_swallows_body() {
        let tokens = tokenize("cat <<EOF >/tmp/x\nline one\nEOF\necho done\n");
        assert_eq!(tokens[0].tok, w("cat"));
        assert!(matches!(tokens[1].tok, Tok::Redirect(ref r) if r == "<<EOF"));
        let heredoc = tokens.iter().find(|t| t.tok == Tok::HereDoc).unwrap();
        assert_eq!((heredoc.line, heredoc.end_line), (2, 3));
        assert!(tokens.iter().any(|t| t.tok == w("echo") && t.line == 4));
    }

    #[test]
    fn continuation_lines_join() {
        let tokens = tokenize("rm -f \\\n  /a\n");
        assert_eq!(tokens[2].tok, w("/a"));
        assert_eq!(tokens[2].line, 2);
    }
}
