use std::collections::BTreeMap;
use std::fmt;

/// Variables assigned earlier in the same script, already expanded.
pub type Bindings = BTreeMap<String, String>;

/// Reason a word could not be expanded statically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Unexpandable {
    /// `$1`, `$@` and other script arguments.
    Positional(String),
    Unbound(String),
    Substitution,
    Glob,
}

impl fmt::Display for Unexpandable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unexpandable::Positional(p) => write!(f, "script argument ${p}"),
            Unexpandable::Unbound(v) => write!(f, "unbound variable ${v}"),
            Unexpandable::Substitution => f.write_str("command substitution or arithmetic"),
            Unexpandable::Glob => f.write_str("pathname pattern"),
        }
    }
}

enum Reference {
    Name(String),
    Special(String),
    Substitution,
    /// A lone `$`.
    Literal,
}

fn is_special(inner: &str) -> bool {
    let all_digits = !inner.is_empty() && inner.chars().all(|c| c.is_ascii_digit());
    all_digits || (inner.len() == 1 && "@*#?$!-".contains(inner))
}

/// Reads the reference after a `$` at `chars[i]`; returns it with the index
/// just past it.
fn reference(chars: &[char], i: usize) -> (Reference, usize) {
    match chars.get(i) {
        Some('{') => {
            let close = chars[i..].iter().position(|&c| c == '}').map(|p| i + p);
            let Some(close) = close else {
                return (Reference::Substitution, chars.len());
            };
            let inner: String = chars[i + 1..close].iter().collect();
            let r = if super::parse::is_name(&inner) {
                Reference::Name(inner)
            } else if is_special(&inner) {
                Reference::Special(inner)
            } else {
                // Parameter operators such as ${X:-y}.
                Reference::Substitution
            };
            (r, close + 1)
        }
        Some('(') => (Reference::Substitution, chars.len()),
        Some(c) if c.is_ascii_digit() || "@*#?$!-".contains(*c) => {
            (Reference::Special(c.to_string()), i + 1)
        }
        Some(c) if c.is_ascii_alphabetic() || *c == '_' => {
            let end = chars[i..]
                .iter()
                .position(|c| !(c.is_ascii_alphanumeric() || *c == '_'))
                .map_or(chars.len(), |p| i + p);
            (Reference::Name(chars[i..end].iter().collect()), end)
        }
        _ => (Reference::Literal, i),
    }
}

fn lookup(r: Reference, vars: &Bindings) -> Result<Option<String>, Unexpandable> {
    match r {
        Reference::Name(n) => vars
            .get(&n)
            .cloned()
            .map(Some)
            .ok_or(Unexpandable::Unbound(n)),
        Reference::Special(s) => Err(Unexpandable::Positional(s)),
        Reference::Substitution => Err(Unexpandable::Substitution),
        Reference::Literal => Ok(None),
    }
}

/// Expands a raw word into fields: quotes removed, bound variables
/// substituted, unquoted expansions split on whitespace.
pub fn expand_fields(word: &str, vars: &Bindings) -> Result<Vec<String>, Unexpandable> {
    let chars: Vec<char> = word.chars().collect();
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut has_field = false;
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '\'' => {
                let close = chars[i + 1..]
                    .iter()
                    .position(|&c| c == '\'')
                    .map_or(chars.len(), |p| i + 1 + p);
                current.extend(&chars[i + 1..close.min(chars.len())]);
                has_field = true;
                i = close + 1;
            }
            '"' => {
                has_field = true;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    match chars[i] {
                        '\\' if matches!(chars.get(i + 1), Some('"' | '\\' | '$' | '`')) => {
                            current.push(chars[i + 1]);
                            i += 2;
                        }
                        '`' => return Err(Unexpandable::Substitution),
                        '$' => {
                            let (r, next) = reference(&chars, i + 1);
                            match lookup(r, vars)? {
                                Some(v) => current.push_str(&v),
                                None => current.push('$'),
                            }
                            i = next;
                        }
                        c => {
                            current.push(c);
                            i += 1;
                        }
                    }
                }
                i += 1;
            }
            '\\' => {
                if let Some(&c) = chars.get(i + 1) {
                    current.push(c);
                    has_field = true;
                }
                i += 2;
            }
            '`' => return Err(Unexpandable::Substitution),
            '*' | '?' => return Err(Unexpandable::Glob),
            '$' => {
                let (r, next) = reference(&chars, i + 1);
                match lookup(r, vars)? {
                    Some(v) => {
                        let starts_blank = v.starts_with(char::is_whitespace);
                        let ends_blank = v.ends_with(char::is_whitespace);
                        let mut parts = v.split_whitespace().peekable();
                        if starts_blank && has_field {
                            fields.push(std::mem::take(&mut current));
                            has_field = false;
                        }
                        while let Some(part) = parts.next() {
                            current.push_str(part);
                            has_field = true;
                            if parts.peek().is_some() {
                                fields.push(std::mem::take(&mut current));
                            }
                        }
                        if ends_blank && has_field {
                            fields.push(std::mem::take(&mut current));
                            has_field = false;
                        }
                    }
                    None => {
                        current.push('$');
                        has_field = true;
                    }
                }
                i = next;
            }
            c => {
                current.push(c);
                has_field = true;
                i += 1;
            }
        }
    }
    if has_field {
        fields.push(current);
    }
    Ok(fields)
}

/// Expands a word that must produce exactly one value (assignments and
/// test operands): no field splitting.
pub fn expand_single(word: &str, vars: &Bindings) -> Result<String, Unexpandable> {
    let quoted = format!("\"{}\"", word.replace('"', "\\\""));
    // Reuse the double-quote rules unless the word has its own quoting.
    if word.contains(['\'', '"', '\\']) {
        return expand_fields(word, vars).map(|f| f.join(" "));
    }
    expand_fields(&quoted, vars).map(|f| f.join(" "))
}

/// Removes quoting but leaves every `$` reference as written.
pub fn literal_text(word: &str) -> String {
    let mut out = String::new();
    let mut chars = word.chars().peekable();
    let mut in_double = false;
    while let Some(c) = chars.next() {
        match c {
            '\'' if !in_double => {
                for c in chars.by_ref() {
                    if c == '\'' {
                        break;
                    }
                    out.push(c);
                }
            }
            '"' => in_double = !in_double,
            '\\' => {
                if let Some(next) = chars.next() {
                    if in_double && !matches!(next, '"' | '\\' | '$' | '`') {
                        out.push('\\');
                    }
                    out.push(next);
                }
            }
            c => out.push(c),
        }
    }
    out
}

/// Substitutes bound variables in already-unquoted text, leaving anything
/// else (script arguments, unbound names) as written.
pub fn substitute_known(text: &str, vars: &Bindings) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '$' {
            let (r, next) = reference(&chars, i + 1);
            if let Reference::Name(n) = &r {
                if let Some(v) = vars.get(n) {
                    out.push_str(v);
                    i = next;
                    continue;
                }
            }
            if matches!(r, Reference::Literal | Reference::Substitution) {
                out.push('$');
                i += 1;
                continue;
            }
            out.extend(&chars[i..next]);
            i = next;
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    out
}

/// Fully substitutes `text`, taking special parameters such as `1` from
/// `specials` and names from `vars`. `None` when any reference stays
/// unresolved.
pub fn resolve(text: &str, specials: &Bindings, vars: &Bindings) -> Option<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] != '$' {
            out.push(chars[i]);
            i += 1;
            continue;
        }
        let (r, next) = reference(&chars, i + 1);
        match r {
            Reference::Name(n) => out.push_str(vars.get(&n)?),
            Reference::Special(n) => out.push_str(specials.get(&n)?),
            Reference::Substitution => return None,
            Reference::Literal => {
                out.push('$');
                i += 1;
                continue;
            }
        }
        i = next;
    }
    Some(out)
}
