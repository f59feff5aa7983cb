use super::classify::{classify_words, ClassifierTable};
use super::parse::{parse_script, strip_inert, AstNode, NodeKind};
use super::regions::{detect_generated_regions, origin_of, MarkerConfig, Region};
use super::word::{expand_fields, expand_single, substitute_known, Bindings};
use crate::model::{
    Diagnostic, DiagnosticCode, GuardTerm, GuardedBlock, ModeledStatement, Predicate, ScriptKind,
    ScriptModel, Statement,
};

struct Injector<'a> {
    kind: ScriptKind,
    table: &'a ClassifierTable,
    regions: Vec<Region>,
    next_condition: usize,
    blocks: Vec<GuardedBlock>,
    diags: Vec<Diagnostic>,
}

impl Injector<'_> {
    fn warn(&mut self, code: DiagnosticCode, line: usize, message: String) {
        self.diags
            .push(Diagnostic::warning(code, message).at(None, Some(self.kind), Some(line)));
    }

    fn emit(&mut self, guard: &[GuardTerm], statement: Statement, line: usize, tolerant: bool) {
        let modeled = ModeledStatement {
            statement,
            line,
            provenance: origin_of(&self.regions, line),
            tolerant,
        };
        match self.blocks.last_mut() {
            Some(block) if block.guard == guard => block.statements.push(modeled),
            _ => self.blocks.push(GuardedBlock {
                guard: guard.to_vec(),
                statements: vec![modeled],
            }),
        }
    }

    fn opaque(&mut self, guard: &[GuardTerm], raw: String, line: usize) {
        self.warn(
            DiagnosticCode::OpaqueCommand,
            line,
            format!("not modeled: {raw}"),
        );
        self.emit(guard, Statement::Opaque { raw }, line, false);
    }

    fn condition(&mut self) -> usize {
        self.next_condition += 1;
        self.next_condition
    }

    fn nodes(&mut self, nodes: &[AstNode], guard: &[GuardTerm], vars: &mut Bindings) {
        for node in nodes {
            self.node(node, guard, vars);
        }
    }

    fn node(&mut self, node: &AstNode, guard: &[GuardTerm], vars: &mut Bindings) {
        match &node.kind {
            NodeKind::Command(cmd) => {
                let mut words = Vec::with_capacity(cmd.args.len() + 1);
                let mut failure = None;
                for word in std::iter::once(&cmd.name).chain(&cmd.args) {
                    match expand_fields(word, vars) {
                        Ok(fields) => words.extend(fields),
                        Err(e) => {
                            failure = Some(e);
                            break;
                        }
                    }
                }
                if let Some(e) = failure {
                    self.warn(
                        DiagnosticCode::UnexpandedVariable,
                        cmd.line_no,
                        format!("{e} in `{}`", cmd.raw_line),
                    );
                    self.emit(
                        guard,
                        Statement::Opaque {
                            raw: cmd.raw_line.clone(),
                        },
                        cmd.line_no,
                        cmd.tolerant,
                    );
                    return;
                }
                if words.is_empty() {
                    return;
                }
                let name = words.remove(0);
                let classified = classify_words(&name, &words, &cmd.raw_line, self.table);
                let tolerant = cmd.tolerant || classified.forced;
                for statement in classified.statements {
                    if let Statement::Opaque { raw } = &statement {
                        let message = match &classified.problem {
                            Some(p) => p.clone(),
                            None => format!("no classifier rule for `{raw}`"),
                        };
                        self.warn(DiagnosticCode::OpaqueCommand, cmd.line_no, message);
                    }
                    self.emit(guard, statement, cmd.line_no, tolerant);
                }
            }
            NodeKind::Assignment { var, value } => match expand_single(value, vars) {
                Ok(v) => {
                    vars.insert(var.clone(), v);
                }
                Err(_) => {
                    vars.remove(var);
                }
            },
            NodeKind::If {
                predicate,
                then,
                elifs,
                else_,
            } => {
                let mut branches: Vec<(Vec<GuardTerm>, &[AstNode])> = Vec::new();
                let mut failed: Vec<GuardTerm> = Vec::new();
                let conds = std::iter::once((predicate, then.as_slice()))
                    .chain(elifs.iter().map(|e| (&e.predicate, e.body.as_slice())));
                for (pred, body) in conds {
                    let term = GuardTerm {
                        condition: self.condition(),
                        predicate: bind_predicate(pred, vars),
                        negated: false,
                    };
                    let mut g = guard.to_vec();
                    g.extend(failed.iter().cloned());
                    g.push(term.clone());
                    branches.push((g, body));
                    failed.push(GuardTerm {
                        negated: true,
                        ..term
                    });
                }
                let mut g = guard.to_vec();
                g.extend(failed);
                branches.push((g, else_.as_slice()));

                let mut outcomes = Vec::with_capacity(branches.len());
                for (g, body) in branches {
                    let mut local = vars.clone();
                    self.nodes(body, &g, &mut local);
                    outcomes.push(local);
                }
                // Keep only bindings every branch agrees on.
                vars.retain(|k, v| outcomes.iter().all(|o| o.get(k) == Some(v)));
                if let Some(first) = outcomes.first() {
                    for (k, v) in first {
                        if outcomes.iter().all(|o| o.get(k) == Some(v)) {
                            vars.insert(k.clone(), v.clone());
                        }
                    }
                }
            }
            NodeKind::For { var, words, body } => {
                let mut values = Vec::new();
                for word in words {
                    match expand_fields(word, vars) {
                        Ok(fields) => values.extend(fields),
                        Err(e) => {
                            let raw = format!("for {var} in {}", words.join(" "));
                            self.warn(
                                DiagnosticCode::UnexpandedVariable,
                                node.line_no,
                                format!("{e} in `{raw}`"),
                            );
                            self.opaque(guard, raw, node.line_no);
                            vars.remove(var);
                            return;
                        }
                    }
                }
                for value in values {
                    vars.insert(var.clone(), value);
                    self.nodes(body, guard, vars);
                }
            }
            NodeKind::OpaqueLine { raw } => self.opaque(guard, raw.clone(), node.line_no),
            NodeKind::Comment { .. } | NodeKind::Blank => {}
        }
    }
}

fn bind_predicate(pred: &Predicate, vars: &Bindings) -> Predicate {
    pred.map_operands(&mut |s| substitute_known(s, vars))
}

/// Parses a maintainer script and builds its statement model.
pub fn inject_script(
    text: &str,
    kind: ScriptKind,
    table: &ClassifierTable,
    markers: &MarkerConfig,
) -> (ScriptModel, Vec<Diagnostic>) {
    let ast = strip_inert(&parse_script(text));
    let (regions, region_diags) = detect_generated_regions(text, markers);
    let mut injector = Injector {
        kind,
        table,
        regions,
        next_condition: 0,
        blocks: Vec::new(),
        diags: region_diags
            .into_iter()
            .map(|d| {
                let line = d.location.as_ref().and_then(|l| l.line);
                d.at(None, Some(kind), line)
            })
            .collect(),
    };
    let mut vars = Bindings::new();
    injector.nodes(&ast.items, &[], &mut vars);
    (
        ScriptModel {
            kind,
            blocks: injector.blocks,
        },
        injector.diags,
    )
}

/// Like [`inject_script`] for raw bytes; invalid UTF-8 is replaced and
/// reported.
pub fn inject_script_bytes(
    bytes: &[u8],
    kind: ScriptKind,
    table: &ClassifierTable,
    markers: &MarkerConfig,
) -> (ScriptModel, Vec<Diagnostic>) {
    let text = String::from_utf8_lossy(bytes);
    let (model, mut diags) = inject_script(&text, kind, table, markers);
    if matches!(text, std::borrow::Cow::Owned(_)) {
        diags.insert(
            0,
            Diagnostic::warning(
                DiagnosticCode::InvalidUtf8,
                "invalid UTF-8 sequences were replaced",
            )
            .at(None, Some(kind), None),
        );
    }
    (model, diags)
}
