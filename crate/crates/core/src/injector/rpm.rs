use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::ScriptKind;

/// Section keywords that end a scriptlet body.
const SECTIONS: &[&str] = &[
    "package",
    "description",
    "prep",
    "build",
    "install",
    "check",
    "clean",
    "files",
    "changelog",
    "pre",
    "post",
    "preun",
    "postun",
    "pretrans",
    "posttrans",
    "verifyscript",
    "triggerin",
    "triggerun",
    "triggerpostun",
    "triggerprein",
    "filetriggerin",
    "filetriggerun",
    "filetriggerpostun",
    "transfiletriggerin",
    "transfiletriggerun",
    "transfiletriggerpostun",
];

fn scriptlet(keyword: &str) -> Option<(ScriptKind, &'static str)> {
    match keyword {
        "pre" => Some((ScriptKind::RpmPre, "pre")),
        "post" => Some((ScriptKind::RpmPost, "post")),
        "preun" => Some((ScriptKind::RpmPreun, "preun")),
        "postun" => Some((ScriptKind::RpmPostun, "postun")),
        _ => None,
    }
}

fn section_keyword(line: &str) -> Option<&str> {
    let rest = line.strip_prefix('%')?;
    let end = rest
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(rest.len());
    let keyword = &rest[..end];
    SECTIONS.contains(&keyword).then_some(keyword)
}

const SHELLS: &[&str] = &["/bin/sh", "/bin/bash", "/usr/bin/sh", "/usr/bin/bash"];

struct Open {
    kind: ScriptKind,
    /// `-p` interpreter other than a shell.
    program: Option<String>,
    body: Vec<String>,
}

fn finish(open: Open, out: &mut BTreeMap<ScriptKind, String>) {
    let mut body = open.body;
    while body.last().is_some_and(|l| l.trim().is_empty()) {
        body.pop();
    }
    let start = body
        .iter()
        .position(|l| !l.trim().is_empty())
        .unwrap_or(body.len());
    let text = body[start..].join("\n");
    let text = match open.program {
        // `%post -p /sbin/ldconfig` runs the program itself.
        Some(program) if text.is_empty() => program,
        _ => text,
    };
    out.insert(open.kind, text);
}

/// Extracts the main package's install and removal scriptlets from an RPM
/// spec file. Subpackage scriptlets (`%post -n foo`, `%post foo`) are
/// skipped.
pub fn parse_rpm_spec(text: &str) -> Result<BTreeMap<ScriptKind, String>> {
    let mut out = BTreeMap::new();
    let mut seen: BTreeMap<ScriptKind, usize> = BTreeMap::new();
    let mut open: Option<Open> = None;
    for (idx, line) in text.lines().enumerate() {
        let Some(keyword) = section_keyword(line) else {
            if let Some(o) = open.as_mut() {
                o.body.push(line.to_string());
            }
            continue;
        };
        if let Some(o) = open.take() {
            finish(o, &mut out);
        }
        let Some((kind, name)) = scriptlet(keyword) else {
            continue;
        };
        let mut args = line[1 + keyword.len()..].split_whitespace();
        let mut program = None;
        let mut subpackage = false;
        while let Some(arg) = args.next() {
            match arg {
                "-n" => {
                    subpackage = true;
                    args.next();
                }
                "-p" => program = args.next().map(str::to_string),
                "-f" => {
                    args.next();
                }
                a if a.starts_with('-') => {}
                _ => subpackage = true,
            }
        }
        if subpackage {
            continue;
        }
        if seen.insert(kind, idx + 1).is_some() {
            return Err(Error::MalformedSpec {
                section: name,
                line: idx + 1,
            });
        }
        open = Some(Open {
            kind,
            program: program.filter(|p| !SHELLS.contains(&p.as_str())),
            body: Vec::new(),
        });
    }
    if let Some(o) = open.take() {
        finish(o, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn post_only() {
        let map = parse_rpm_spec("%post\nldconfig").unwrap();
        assert_eq!(
            map,
            BTreeMap::from([(ScriptKind::RpmPost, "ldconfig".to_string())])
        );
    }

    #[test]
    fn no_scriptlets() {
        let spec = "Name: foo\nVersion: 1\n%description\nfoo\n%files\n/usr/bin/foo\n";
        assert!(parse_rpm_spec(spec).unwrap().is_empty());
    }

    #[test]
    fn all_four_sections() {
        let spec = "Name: foo\n%pre\ngetent group foo || groupadd foo\n%post\n/sbin/ldconfig\ntouch /var/log/foo\n\n%preun\nrm -f /var/cache/foo\n%postun\nldconfig\n%files\n/usr/lib/libfoo.so\n";
        let map = parse_rpm_spec(spec).unwrap();
        assert_eq!(map.len(), 4);
        assert_eq!(
            map[&ScriptKind::RpmPost],
            "/sbin/ldconfig\ntouch /var/log/foo"
        );
        assert_eq!(map[&ScriptKind::RpmPostun], "ldconfig");
    }

    #[test]
    fn repeated_section_is_malformed() {
        let err = parse_rpm_spec("%post\na\n%post\nb\n").unwrap_err();
        assert!(matches!(
            err,
            Error::MalformedSpec {
                section: "post",
                line: 3
            }
        ));
    }

    #[test]
    fn subpackages_and_programs() {
        let spec = "%post -p /sbin/ldconfig\n\n%post -n libfoo-devel\ntouch /x\n%postun devel\ntouch /y\n%preun -p /bin/sh\nrm -f /z\n";
        let map = parse_rpm_spec(spec).unwrap();
        assert_eq!(map[&ScriptKind::RpmPost], "/sbin/ldconfig");
        assert_eq!(map[&ScriptKind::RpmPreun], "rm -f /z");
        assert!(!map.contains_key(&ScriptKind::RpmPostun));
    }

    #[test]
    fn macros_do_not_end_a_body() {
        let map = parse_rpm_spec("%post\n%{__rm} -f /a\n%if 0\nx\n%endif\n").unwrap();
        assert_eq!(map[&ScriptKind::RpmPost], "%{__rm} -f /a\n%if 0\nx\n%endif");
    }
}
