//! `pkgmodeler` command-line tool.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{CliConfig, Format, Overrides, Settings};

#[derive(Parser, Debug)]
#[command(
    name = "pkgmodeler",
    version,
    about = "Model, mine and dry-run package maintainer scripts"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Settings file (JSON).
    #[arg(long, global = true, env = "PKGMODELER_CONFIG")]
    settings: Option<PathBuf>,
    /// Classifier table (JSON map from command name to rule).
    #[arg(long, global = true)]
    classifier: Option<PathBuf>,
    /// Comment prefix opening a helper-generated block.
    #[arg(long, global = true)]
    marker_begin: Option<String>,
    /// Comment prefix closing a helper-generated block.
    #[arg(long, global = true)]
    marker_end: Option<String>,
    /// Similarity threshold for template classes.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write result files here instead of only printing.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Turn off a consistency check: dangling-setting, orphan-file,
    /// missing-file or dead-service. Repeatable.
    #[arg(long = "disable-check", global = true, value_name = "CHECK")]
    disabled_checks: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the statement model of one maintainer script.
    Inject {
        script: PathBuf,
        /// Script kind, e.g. deb-postinst or rpm-preun.
        #[arg(long)]
        kind: String,
    },
    /// Cluster, count templates and group classes over a manifest's corpus.
    Analyze {
        manifest: PathBuf,
        /// Template files to count instead of templates derived from groups.
        #[arg(long = "template")]
        templates: Vec<PathBuf>,
    },
    /// Print corpus statistics.
    Stats { manifest: PathBuf },
    /// Dry-run an upgrade plan.
    Simulate {
        /// System configuration document.
        #[arg(long = "config")]
        system: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        universe: PathBuf,
    },
    /// Restore a logged configuration.
    Rollback {
        /// System configuration document.
        #[arg(long = "config")]
        system: PathBuf,
        #[arg(long)]
        log: PathBuf,
        /// Target configuration id, or a unique prefix of one.
        #[arg(long)]
        target: String,
    },
    /// Count the scripts a template matches.
    MatchTemplate {
        template: PathBuf,
        manifest: PathBuf,
    },
}

fn run(cli: Cli) -> Result<ExitCode> {
    let g = cli.global;
    let file = match &g.settings {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    let settings = Settings::resolve(
        file,
        Overrides {
            classifier: g.classifier,
            marker_begin: g.marker_begin,
            marker_end: g.marker_end,
            threshold: g.threshold,
            format: g.format,
            disabled_checks: g.disabled_checks,
        },
    )?;
    let out = g.out_dir.as_deref();
    match cli.command {
        Command::Inject { script, kind } => commands::inject(&settings, &script, &kind),
        Command::Analyze {
            manifest,
            templates,
        } => commands::analyze(&settings, &manifest, &templates, out),
        Command::Stats { manifest } => commands::stats(&settings, &manifest),
        Command::Simulate {
            system,
            plan,
            universe,
        } => commands::simulate(&settings, &system, &plan, &universe, out),
        Command::Rollback {
            system,
            log,
            target,
        } => commands::rollback(&system, &log, &target, out),
        Command::MatchTemplate { template, manifest } => {
            commands::match_template(&settings, &template, &manifest)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
