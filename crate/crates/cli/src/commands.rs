use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use pkgmodeler::corpus::{
    analyze_corpus, collect_corpus, corpus_stats, match_templates, stats_table, AnalysisOptions,
    Corpus, Template,
};
use pkgmodeler::injector::inject_script_bytes;
use pkgmodeler::logrollback::{read_log_file, rollback_to, write_log_file};
use pkgmodeler::model::document::{from_document_str, to_document_string, Document};
use pkgmodeler::model::{
    ConfigId, Diagnostic, LogModel, ScriptKind, SystemConfiguration, Universe, UpgradePlan,
};
use pkgmodeler::par::ExecMode;
use pkgmodeler::simulator::{simulate_upgrade, SimulationOptions, SimulationResult};
use serde::Serialize;

use crate::config::{Format, Settings};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_document<T: Document>(path: &Path) -> Result<T> {
    from_document_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn report_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}

fn load_corpus(settings: &Settings, manifest: &Path) -> Result<Corpus> {
    let (corpus, diags) = collect_corpus(manifest, &settings.markers, ExecMode::Parallel)
        .with_context(|| format!("collecting {}", manifest.display()))?;
    report_diagnostics(&diags);
    Ok(corpus)
}

/// Template named after its file stem.
fn load_template(path: &Path) -> Result<Template> {
    let id = path
        .file_stem()
        .map_or_else(|| "template".into(), |s| s.to_string_lossy().into_owned());
    Ok(Template::new(id, read(path)?))
}

pub fn inject(settings: &Settings, script: &Path, kind: &str) -> Result<ExitCode> {
    let kind: ScriptKind = kind.parse()?;
    let bytes = fs::read(script).with_context(|| format!("reading {}", script.display()))?;
    let (model, diags) = inject_script_bytes(&bytes, kind, &settings.classifier, &settings.markers);
    report_diagnostics(&diags);
    match settings.format {
        Format::Json => print!("{}", json(&model)?),
        Format::Text => {
            for block in &model.blocks {
                let guard: Vec<String> = block
                    .guard
                    .iter()
                    .map(|t| format!("{}{}", if t.negated { "!" } else { "" }, t.predicate))
                    .collect();
                let indent = if guard.is_empty() { "" } else { "  " };
                if !guard.is_empty() {
                    println!("if {}", guard.join(" && "));
                }
                for s in &block.statements {
                    println!("{indent}{:>4}  {}", s.line, s.statement);
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn analyze(
    settings: &Settings,
    manifest: &Path,
    templates: &[PathBuf],
    out_dir: Option<&Path>,
) -> Result<ExitCode> {
    let corpus = load_corpus(settings, manifest)?;
    let templates = if templates.is_empty() {
        None
    } else {
        Some(
            templates
                .iter()
                .map(|p| load_template(p))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    let options = AnalysisOptions {
        threshold: settings.threshold,
        templates,
        ..AnalysisOptions::default()
    };
    let report = analyze_corpus(&corpus, &options, ExecMode::Parallel)?;
    let (json_text, text) = (report.to_json()?, report.to_text());
    if let Some(dir) = out_dir {
        write(&dir.join("report.json"), &json_text)?;
        write(&dir.join("report.txt"), &text)?;
    }
    match settings.format {
        Format::Json => print!("{json_text}"),
        Format::Text => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn stats(settings: &Settings, manifest: &Path) -> Result<ExitCode> {
    let stats = corpus_stats(&load_corpus(settings, manifest)?);
    match settings.format {
        Format::Json => print!("{}", json(&stats)?),
        Format::Text => print!("{}", stats_table(&stats)),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    verdict: &'static str,
    diagnostics: &'a [Diagnostic],
    log_path: Option<PathBuf>,
}

pub fn simulate(
    settings: &Settings,
    system: &Path,
    plan: &Path,
    universe: &Path,
    out_dir: Option<&Path>,
) -> Result<ExitCode> {
    let config: SystemConfiguration = read_document(system)?;
    let universe: Universe = read_document(universe)?;
    let plan: UpgradePlan = serde_json::from_str(&read(plan)?)
        .with_context(|| format!("parsing plan {}", plan.display()))?;
    let options = SimulationOptions {
        args: settings.args.clone(),
        checks: settings.checks,
    };
    let result = simulate_upgrade(&config, &plan, &universe, &options);
    let log_path = match out_dir {
        Some(dir) => {
            write(&dir.join("result.json"), &json(&result)?)?;
            if let SimulationResult::Valid { final_config, .. } = &result {
                write(
                    &dir.join("final.json"),
                    &(to_document_string(final_config)? + "\n"),
                )?;
            }
            let path = dir.join("log.jsonl");
            write_log_file(&path, result.log())?;
            Some(path)
        }
        None => None,
    };
    let verdict = if result.is_valid() {
        "Valid"
    } else {
        "NotValid"
    };
    match settings.format {
        Format::Json => print!(
            "{}",
            json(&SimulationSummary {
                verdict,
                diagnostics: result.diagnostics(),
                log_path,
            })?
        ),
        Format::Text => {
            println!("verdict: {verdict}");
            println!("transactions: {}", result.log().len());
            if let SimulationResult::NotValid { last_good, .. } = &result {
                println!("last good configuration: {last_good}");
            }
            if let Some(p) = log_path {
                println!("log: {}", p.display());
            }
            for d in result.diagnostics() {
                println!("{d}");
            }
        }
    }
    Ok(if result.is_valid() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

/// Full id, or the unique logged id starting with `prefix`.
fn resolve_target(log: &LogModel, prefix: &str) -> Result<ConfigId> {
    let matches: Vec<&ConfigId> = log
        .checkpoints
        .keys()
        .filter(|id| id.as_str().starts_with(prefix))
        .collect();
    match matches.as_slice() {
        [one] => Ok((*one).clone()),
        [] => bail!("no logged configuration matches {prefix:?}"),
        _ => bail!("{prefix:?} matches {} logged configurations", matches.len()),
    }
}

pub fn rollback(
    system: &Path,
    log_path: &Path,
    target: &str,
    out_dir: Option<&Path>,
) -> Result<ExitCode> {
    let config: SystemConfiguration = read_document(system)?;
    let mut log = read_log_file(log_path)?;
    let target = resolve_target(&log, target)?;
    let restored = rollback_to(&mut log, &config, &target)?;
    let document = to_document_string(&restored)? + "\n";
    match out_dir {
        Some(dir) => {
            write(&dir.join("config.json"), &document)?;
            write_log_file(&dir.join("log.jsonl"), &log)?;
        }
        None => print!("{document}"),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct TemplateMatches<'a> {
    template: &'a str,
    occurrences: usize,
    scripts: Vec<&'a str>,
}

pub fn match_template(settings: &Settings, template: &Path, manifest: &Path) -> Result<ExitCode> {
    let template = load_template(template)?;
    let corpus = load_corpus(settings, manifest)?;
    let hits = match_templates(std::slice::from_ref(&template), &corpus, ExecMode::Parallel)?;
    let scripts: Vec<&str> = hits[0]
        .iter()
        .map(|&i| corpus.records[i].source_id.as_str())
        .collect();
    let matches = TemplateMatches {
        template: &template.id,
        occurrences: scripts.len(),
        scripts,
    };
    match settings.format {
        Format::Json => print!("{}", json(&matches)?),
        Format::Text => {
            println!(
                "{}: {} occurrence(s)",
                matches.template, matches.occurrences
            );
            for s in &matches.scripts {
                println!("  {s}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
