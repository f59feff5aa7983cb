//! Generators shared by the integration suites. Every generator records the
//! ground truth that the tests compare against.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use pkgmodeler::corpus::{Corpus, ScriptRecord, Template, UniverseCounts};
use pkgmodeler::injector::{inject_script, ClassifierTable, MarkerConfig};
use pkgmodeler::logrollback::record_transaction;
use pkgmodeler::model::{
    config_hash, module_file, EnvOp, FileEntry, FileKind, FileOp, InstalledPackage, LogModel,
    PackageId, PackageModel, Phase, PlanAction, Registry, ScriptKind, ScriptModel, ServiceState,
    SettingKey, SettingOp, Statement, SystemConfiguration, Transaction, Trigger, TxnStatus,
    Universe, UpgradePlan, Version,
};
use pkgmodeler::simulator::apply_statement;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PHP5_POSTINST: &str = include_str!("../fixtures/php5/postinst");
pub const PHP5_PRERM: &str = include_str!("../fixtures/php5/prerm");
pub const PHP5_POSTRM: &str = include_str!("../fixtures/php5/postrm");
pub const GCONF: &str = include_str!("../fixtures/gconf-template.sh");

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn inject(text: &str, kind: ScriptKind) -> ScriptModel {
    inject_script(
        text,
        kind,
        &ClassifierTable::default(),
        &MarkerConfig::default(),
    )
    .0
}

fn installed(version: &str) -> InstalledPackage {
    InstalledPackage {
        version: Version::new(version),
        architecture: "amd64".into(),
    }
}

fn owned(owner: &str, kind: FileKind) -> FileEntry {
    FileEntry {
        owner: Some(owner.into()),
        kind,
        content_hash: None,
    }
}

// ---------------------------------------------------------------- php5

pub fn php5(prerm: &str) -> PackageModel {
    PackageModel::new(PackageId::new("libapache2-mod-php5", "5.2.6", "amd64").unwrap())
        .with_file(&module_file("apache2", "php5"), FileKind::ConfigFile)
        .with_file("/usr/lib/apache2/modules/libphp5.so", FileKind::Regular)
        .with_file("/usr/share/php5/php.ini-dist", FileKind::Regular)
        .with_script(inject(PHP5_POSTINST, ScriptKind::DebPostinst))
        .with_script(inject(prerm, ScriptKind::DebPrerm))
        .with_script(inject(PHP5_POSTRM, ScriptKind::DebPostrm))
}

/// apache2 installed and running, with its config file and init script.
pub fn apache_base() -> SystemConfiguration {
    let mut c = SystemConfiguration::new();
    c.packages.insert("apache2".into(), installed("2.2.9"));
    c.filesystem.insert(
        "/etc/apache2/apache2.conf".into(),
        owned("apache2", FileKind::ConfigFile),
    );
    c.filesystem.insert(
        "/etc/init.d/apache2".into(),
        owned("apache2", FileKind::ConfigFile),
    );
    c.filesystem.insert(
        "/usr/sbin/apache2".into(),
        owned("apache2", FileKind::Regular),
    );
    c.environment
        .services
        .insert("apache2".into(), ServiceState::Running);
    c
}

// ---------------------------------------------------------------- corpus

pub const BEGIN: &str = "# Automatically added by dh_installmenu";
pub const END: &str = "# End automatically added section";

/// A generated script with its planted line counts.
#[derive(Debug, Clone)]
pub struct Planted {
    pub source_id: String,
    pub package: String,
    pub kind: ScriptKind,
    pub text: String,
    pub non_blank: usize,
    pub generated: usize,
    pub by_hand: usize,
    /// The by-hand lines as planted, before indentation.
    pub body: Vec<String>,
}

const GENERATED_BLOCKS: [&[&str]; 3] = [
    &[
        "if [ -x \"`which update-menus 2>/dev/null`\" ]; then",
        "\tupdate-menus",
        "fi",
    ],
    &["if [ \"$1\" = \"configure\" ]; then", "\tldconfig", "fi"],
    &["update-rc.d foo defaults >/dev/null"],
];

fn filler(rng: &mut ChaCha8Rng, lines: &mut Vec<String>) {
    match rng.gen_range(0..4) {
        0 => lines.push(String::new()),
        1 => lines.push(format!("# note {}", rng.gen_range(0..1000))),
        _ => {}
    }
}

/// Interleaves `by_hand` (kept in order) with comments, blank lines and
/// `blocks` marked generated blocks.
pub fn compose(
    rng: &mut ChaCha8Rng,
    source_id: &str,
    by_hand: &[String],
    blocks: usize,
) -> Planted {
    let mut lines = vec!["#!/bin/sh".to_string()];
    let mut generated = 0;
    let mut slots: Vec<usize> = (0..blocks)
        .map(|_| rng.gen_range(0..=by_hand.len()))
        .collect();
    slots.sort_unstable();
    let mut next_block = 0;
    for i in 0..=by_hand.len() {
        while next_block < slots.len() && slots[next_block] == i {
            let body = GENERATED_BLOCKS.choose(rng).unwrap();
            lines.push(BEGIN.to_string());
            lines.extend(body.iter().map(|l| l.to_string()));
            lines.push(END.to_string());
            generated += body.len();
            next_block += 1;
        }
        filler(rng, &mut lines);
        if let Some(line) = by_hand.get(i) {
            let indent = if rng.gen_bool(0.2) { "    " } else { "" };
            lines.push(format!("{indent}{line}"));
        }
    }
    let package = source_id.split('.').next().unwrap_or(source_id).to_string();
    Planted {
        source_id: source_id.to_string(),
        package,
        kind: ScriptKind::DebPostinst,
        text: lines.join("\n") + "\n",
        non_blank: generated + by_hand.len(),
        generated,
        by_hand: by_hand.len(),
        body: by_hand.to_vec(),
    }
}

pub fn lines_of(body: &str) -> Vec<String> {
    body.lines().map(str::to_string).collect()
}

pub fn gconf_instance(schemas: &str) -> String {
    GCONF.replace("#SCHEMAS#", schemas)
}

pub fn random_schemas(rng: &mut ChaCha8Rng, tag: usize) -> String {
    let n = rng.gen_range(1..=3);
    (0..n)
        .map(|k| format!("app{tag}-{k}.schemas"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn corpus_of(planted: &[Planted]) -> Corpus {
    let markers = MarkerConfig::default();
    let packages: BTreeSet<&str> = planted.iter().map(|p| p.package.as_str()).collect();
    Corpus {
        records: planted
            .iter()
            .map(|p| ScriptRecord::new(&p.source_id, &p.package, p.kind, &p.text, &markers).0)
            .collect(),
        universe: UniverseCounts {
            package_count: packages.len(),
            potential_scripts: packages.len() * 5,
            missing_count: packages.len() * 5 - planted.len(),
            unreadable_count: 0,
        },
    }
}

// ---------------------------------------------------------------- packages

/// A random Debian package whose scripts only use commands the default
/// classifier knows. With `reversible`, everything the postinst adds is
/// removed again by the prerm and the purge branch of the postrm.
pub fn random_package(
    rng: &mut ChaCha8Rng,
    name: &str,
    version: &str,
    max_statements: usize,
    reversible: bool,
) -> PackageModel {
    let mut model = PackageModel::new(PackageId::new(name, version, "amd64").unwrap())
        .with_file(&format!("/usr/bin/{name}"), FileKind::Regular)
        .with_file(&format!("/usr/share/{name}/default"), FileKind::Regular)
        .with_file(&format!("/etc/{name}/{name}.conf"), FileKind::ConfigFile);
    let module = rng.gen_bool(0.4);
    if module {
        model = model.with_file(&module_file("apache2", name), FileKind::ConfigFile);
    }
    let mut post = Vec::new();
    let mut undo = Vec::new();
    let mut pre_remove = Vec::new();
    let budget = rng.gen_range(1..=max_statements.max(1));
    let mut used = 0;
    let mut touched = 0;
    if module && used < budget {
        post.push(format!("a2enmod {name}"));
        pre_remove.push(format!("a2dismod {name}"));
        used += 2;
    }
    while used < budget {
        match rng.gen_range(0..if reversible { 4 } else { 7 }) {
            0 => {
                post.push(format!("touch /var/lib/{name}/state{touched}"));
                undo.push(format!("rm -f /var/lib/{name}/state{touched}"));
                touched += 1;
                used += 2;
            }
            1 => {
                let j = rng.gen_range(0..100);
                if post
                    .iter()
                    .any(|l: &String| l.ends_with(&format!("local{j}")))
                {
                    continue;
                }
                post.push(format!("cp /usr/share/{name}/default /etc/{name}/local{j}"));
                undo.push(format!("rm -f /etc/{name}/local{j}"));
                used += 2;
            }
            2 => {
                post.push(format!("echo configuring {name}"));
                used += 1;
            }
            3 => {
                if post.iter().any(|l| l.starts_with("mkdir")) {
                    continue;
                }
                post.push(format!("mkdir -p /var/cache/{name}"));
                undo.push(format!("rmdir /var/cache/{name}"));
                used += 2;
            }
            4 => {
                post.push(format!("install-menu {name}-{}", rng.gen_range(0..3)));
                used += 1;
            }
            5 => {
                post.push("ldconfig".into());
                used += 1;
            }
            _ => {
                post.push(format!(
                    "rm -f /var/lib/{name}/state{}",
                    rng.gen_range(0..4)
                ));
                used += 1;
            }
        }
    }
    // Undo in reverse so directories empty before they go.
    undo.reverse();
    let guarded = rng.gen_bool(0.5);
    let mut postinst = String::from("#!/bin/sh\nset -e\n");
    if guarded {
        postinst += "if [ \"$1\" = \"configure\" ]; then\n";
        for l in &post {
            postinst += &format!("    {l}\n");
        }
        postinst += "fi\n";
    } else {
        for l in &post {
            postinst += &format!("{l}\n");
        }
    }
    let mut prerm = String::from("#!/bin/sh\n");
    for l in &pre_remove {
        prerm += &format!("{l} || true\n");
    }
    let mut postrm = String::from("#!/bin/sh\nif [ \"$1\" = purge ]; then\n");
    for l in &undo {
        postrm += &format!("    {l}\n");
    }
    postrm += "    :\nfi\n";
    model
        .with_script(inject(&postinst, ScriptKind::DebPostinst))
        .with_script(inject(&prerm, ScriptKind::DebPrerm))
        .with_script(inject(&postrm, ScriptKind::DebPostrm))
}

/// apache2 plus up to `max_packages` random packages, some of them in two
/// versions.
pub fn random_universe(
    rng: &mut ChaCha8Rng,
    max_packages: usize,
    max_statements: usize,
    reversible: bool,
) -> Universe {
    let n = rng.gen_range(1..=max_packages);
    let mut universe = Universe::new();
    for i in 0..n {
        let name = format!("pkg{i}");
        universe.insert(random_package(
            rng,
            &name,
            "1.0",
            max_statements,
            reversible,
        ));
        if rng.gen_bool(0.3) {
            universe.insert(random_package(
                rng,
                &name,
                "2.0",
                max_statements,
                reversible,
            ));
        }
    }
    universe
}

/// A plan of distinct-package actions that are applicable in order.
pub fn random_plan(
    rng: &mut ChaCha8Rng,
    config: &SystemConfiguration,
    universe: &Universe,
) -> UpgradePlan {
    let mut names: Vec<String> = universe
        .models()
        .map(|m| m.id.name.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    names.shuffle(rng);
    let take = rng.gen_range(1..=names.len());
    let mut actions = Vec::new();
    for name in names.into_iter().take(take) {
        let action = match config.packages.get(&name) {
            None => {
                let versions: Vec<&PackageModel> =
                    universe.models().filter(|m| m.id.name == name).collect();
                PlanAction::Install {
                    package: versions.choose(rng).unwrap().id.clone(),
                }
            }
            Some(pkg) => {
                let newer = universe
                    .models()
                    .find(|m| m.id.name == name && m.id.version > pkg.version);
                match (rng.gen_range(0..3), newer) {
                    (0, Some(m)) => PlanAction::Upgrade {
                        name: name.clone(),
                        from_version: pkg.version.clone(),
                        to_version: m.id.version.clone(),
                    },
                    (1, _) => PlanAction::Purge { name },
                    _ => PlanAction::Remove { name },
                }
            }
        };
        actions.push(action);
    }
    UpgradePlan::new(actions).unwrap()
}

// ---------------------------------------------------------------- configurations

/// A configuration that satisfies every consistency check by construction:
/// owners are installed, module settings have their module file, running
/// services have an installed init-script owner.
pub fn consistent_config(rng: &mut ChaCha8Rng) -> SystemConfiguration {
    let mut c = SystemConfiguration::new();
    let n = rng.gen_range(0..8);
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    for name in &names {
        c.packages.insert(
            name.clone(),
            installed(&format!("{}.{}", rng.gen_range(0..4), rng.gen_range(0..10))),
        );
        for f in 0..rng.gen_range(0..5) {
            let kind =
                [FileKind::Regular, FileKind::ConfigFile, FileKind::Directory][rng.gen_range(0..3)];
            c.filesystem
                .insert(format!("/usr/share/{name}/f{f}"), owned(name, kind));
        }
        if rng.gen_bool(0.4) {
            c.filesystem.insert(
                format!("/etc/init.d/{name}"),
                owned(name, FileKind::ConfigFile),
            );
            let state = if rng.gen_bool(0.5) {
                ServiceState::Running
            } else {
                ServiceState::Stopped
            };
            c.environment.services.insert(name.clone(), state);
        }
    }
    for _ in 0..rng.gen_range(0..4) {
        // Unowned files are always fine.
        c.filesystem.insert(
            format!("/var/lib/free{}", rng.gen_range(0..100)),
            FileEntry {
                owner: None,
                kind: FileKind::Regular,
                content_hash: Some(format!("{:x}", rng.gen::<u32>())),
            },
        );
    }
    if let Some(owner) = names.choose(rng) {
        for m in 0..rng.gen_range(0..3) {
            let module = format!("m{m}");
            c.filesystem.insert(
                module_file(owner, &module),
                owned(owner, FileKind::ConfigFile),
            );
            c.settings.insert(
                SettingKey::new(owner.clone(), format!("module:{module}")),
                None,
            );
        }
        if let Some(other) = names.choose(rng) {
            c.settings.insert(
                SettingKey::new(owner.clone(), format!("package:{other}")),
                Some("on".into()),
            );
        }
        c.settings.insert(
            SettingKey::new(owner.clone(), "plain"),
            Some(format!("{}", rng.gen_range(0..9))),
        );
    }
    for lib in 0..rng.gen_range(0..3) {
        c.environment.shared_libs.insert(format!("lib{lib}.so"));
    }
    c
}

const PATHS: [&str; 6] = [
    "/etc/a.conf",
    "/etc/b",
    "/var/lib/x",
    "/var/lib/y/z",
    "/opt/d",
    "/usr/bin/t",
];
const ENTITIES: [&str; 3] = ["alpha", "beta", "gamma"];
const SETTINGS: [(&str, &str); 3] = [
    ("apache2", "module:php5"),
    ("apache2", "module:ssl"),
    ("exim", "mailname"),
];
const PACKAGES: [&str; 3] = ["p0", "p1", "q"];

/// Any statement over a small key space, so that random sequences collide
/// on keys often. Preconditions are not guaranteed.
pub fn random_statement(rng: &mut ChaCha8Rng) -> Statement {
    let path = PATHS.choose(rng).unwrap().to_string();
    let command = "gen".to_string();
    let kind = [FileKind::Regular, FileKind::ConfigFile, FileKind::Directory][rng.gen_range(0..3)];
    let payload = rng
        .gen_bool(0.5)
        .then(|| format!("v{}", rng.gen_range(0..5)));
    let entry = rng.gen_bool(0.3).then(|| FileEntry {
        owner: PACKAGES
            .choose(rng)
            .map(|s| s.to_string())
            .filter(|_| rng.gen_bool(0.5)),
        kind,
        content_hash: payload.clone(),
    });
    let file = FileOp {
        path,
        payload,
        command: command.clone(),
        kind,
        entry,
    };
    let registry = Registry::ALL[rng.gen_range(0..4)];
    let env = EnvOp {
        registry,
        entity: ENTITIES.choose(rng).unwrap().to_string(),
        command: command.clone(),
        state: (registry == Registry::Services).then(|| {
            if rng.gen_bool(0.5) {
                ServiceState::Running
            } else {
                ServiceState::Stopped
            }
        }),
    };
    let (owner, key) = SETTINGS.choose(rng).unwrap();
    let setting = SettingOp {
        owner_package: owner.to_string(),
        setting_key: key.to_string(),
        value: rng
            .gen_bool(0.5)
            .then(|| format!("s{}", rng.gen_range(0..3))),
        command: command.clone(),
    };
    let package = pkgmodeler::model::PackageOp {
        name: PACKAGES.choose(rng).unwrap().to_string(),
        version: Some(Version::new(format!("1.{}", rng.gen_range(0..3)))),
        architecture: Some("amd64".into()),
        command,
    };
    match rng.gen_range(0..13) {
        0 => Statement::FileSystemAdd(file),
        1 => Statement::FileSystemDelete(file),
        2 => Statement::FileSystemUpdate(file),
        3 => Statement::EnvironmentAdd(env),
        4 => Statement::EnvironmentDelete(env),
        5 => Statement::EnvironmentUpdate(env),
        6 => Statement::PackageSettingAdd(setting),
        7 => Statement::PackageSettingDelete(setting),
        8 => Statement::PackageSettingUpdate(setting),
        9 => Statement::PackageAdd(package),
        10 => Statement::PackageDelete(package),
        11 => Statement::Neutral {
            text: "echo".into(),
        },
        _ => Statement::Opaque {
            raw: "frob --x".into(),
        },
    }
}

/// Configuration holding some of every key `random_statement` touches.
pub fn seeded_config(rng: &mut ChaCha8Rng) -> SystemConfiguration {
    let mut c = SystemConfiguration::new();
    for path in PATHS {
        if rng.gen_bool(0.5) {
            c.filesystem.insert(
                path.into(),
                FileEntry {
                    owner: None,
                    kind: FileKind::Regular,
                    content_hash: Some("seed".into()),
                },
            );
        }
    }
    for e in ENTITIES {
        if rng.gen_bool(0.5) {
            c.environment
                .services
                .insert(e.into(), ServiceState::Running);
        }
        if rng.gen_bool(0.5) {
            c.environment.menu_entries.insert(e.into());
        }
    }
    for (owner, key) in SETTINGS {
        if rng.gen_bool(0.5) {
            c.settings.insert(SettingKey::new(owner, key), None);
        }
    }
    if rng.gen_bool(0.5) {
        c.packages.insert("q".into(), installed("1.0"));
    }
    c
}

/// Applies `len` applicable random statements as one committed
/// transaction appended to `log`; returns the new configuration.
pub fn random_transaction(
    rng: &mut ChaCha8Rng,
    log: &mut LogModel,
    config: &SystemConfiguration,
    len: usize,
) -> SystemConfiguration {
    let mut next = config.clone();
    let mut executed = Vec::new();
    while executed.len() < len {
        if let Ok(applied) = apply_statement(&mut next, &random_statement(rng), false) {
            executed.push(applied.executed);
        }
    }
    let txn = Transaction {
        id: 0,
        from_config: config_hash(config),
        to_config: config_hash(&next),
        trigger: Trigger {
            package: None,
            action: None,
            script_kind: None,
            phase: Phase::Script,
        },
        executed,
        status: TxnStatus::Committed,
    };
    record_transaction(log, txn).unwrap();
    next
}

/// A log of `n` random transactions from a seeded configuration; returns
/// the log and every configuration along the chain, origin first.
pub fn random_log(rng: &mut ChaCha8Rng, n: usize) -> (LogModel, Vec<SystemConfiguration>) {
    let start = seeded_config(rng);
    let mut log = LogModel::starting_at(config_hash(&start));
    let mut chain = vec![start];
    for _ in 0..n {
        let len = rng.gen_range(0..6);
        let next = random_transaction(rng, &mut log, chain.last().unwrap(), len);
        chain.push(next);
    }
    (log, chain)
}

pub const ALT_TEMPLATE: &str =
    "update-alternatives --install /usr/bin/#NAME# #NAME# /usr/lib/#NAME#/bin 50\n";
pub const LDCONFIG_TEMPLATE: &str = "if [ \"$1\" = \"configure\" ]; then\n\tldconfig\nfi\n";

/// A corpus with known groups and template matches.
pub struct PlantedCorpus {
    pub scripts: Vec<Planted>,
    pub templates: Vec<Template>,
    /// Template id to the source ids it must match.
    pub hits: BTreeMap<String, BTreeSet<String>>,
    /// Member sets of every group of identical non-empty by-hand text.
    pub groups: BTreeSet<BTreeSet<String>>,
}

pub const DUPLICATES: [usize; 6] = [12, 9, 7, 5, 3, 2];

/// `n` scripts (at least 330): gconf, alternatives and ldconfig template
/// instances, near-miss decoys, planted duplicates, entirely generated and
/// inert scripts; the rest are unique.
pub fn planted_corpus(rng: &mut ChaCha8Rng, n: usize) -> PlantedCorpus {
    let mut bodies: Vec<(Vec<String>, usize, Option<&str>)> = Vec::new();
    let blocks = |rng: &mut ChaCha8Rng| rng.gen_range(0..3);
    for i in 0..60 {
        let b = blocks(rng);
        bodies.push((
            lines_of(&gconf_instance(&random_schemas(rng, i))),
            b,
            Some("gconf"),
        ));
    }
    for i in 0..40 {
        let b = blocks(rng);
        bodies.push((
            lines_of(&ALT_TEMPLATE.replace("#NAME#", &format!("tool{i}"))),
            b,
            Some("alternatives"),
        ));
    }
    for _ in 0..30 {
        let b = blocks(rng);
        bodies.push((lines_of(LDCONFIG_TEMPLATE), b, Some("ldconfig")));
    }
    for i in 0..30 {
        let mut body = lines_of(&gconf_instance(&random_schemas(rng, 1000 + i)));
        body.push(format!("echo decoy{i}"));
        let b = blocks(rng);
        bodies.push((body, b, None));
    }
    for i in 0..10 {
        let b = blocks(rng);
        bodies.push((
            vec![format!(
                "update-alternatives --remove tool{i} /usr/lib/tool{i}/bin"
            )],
            b,
            None,
        ));
    }
    for (g, &copies) in DUPLICATES.iter().enumerate() {
        let mut body: Vec<String> = (0..rng.gen_range(1..5))
            .map(|k| format!("touch /var/lib/dup{g}/f{k}"))
            .collect();
        body.push(format!("echo dup{g}"));
        for _ in 0..copies {
            let b = blocks(rng);
            bodies.push((body.clone(), b, None));
        }
    }
    for _ in 0..40 {
        let b = rng.gen_range(1..4);
        bodies.push((Vec::new(), b, None));
    }
    for _ in 0..20 {
        bodies.push((Vec::new(), 0, None));
    }
    assert!(
        bodies.len() <= n,
        "corpus too small for the planted families"
    );
    let mut i = 0;
    while bodies.len() < n {
        let mut body: Vec<String> = (0..rng.gen_range(0..4))
            .map(|k| format!("mkdir -p /srv/u{i}/{k}"))
            .collect();
        body.push(format!("echo unique{i}"));
        let b = blocks(rng);
        bodies.push((body, b, None));
        i += 1;
    }
    bodies.shuffle(rng);

    let mut scripts = Vec::new();
    let mut hits: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut by_text: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
    for (k, (body, blocks, template)) in bodies.into_iter().enumerate() {
        let p = compose(rng, &format!("pkg{k:03}.postinst"), &body, blocks);
        if let Some(t) = template {
            hits.entry(t.to_string())
                .or_default()
                .insert(p.source_id.clone());
        }
        let trimmed: Vec<String> = body.iter().map(|l| l.trim().to_string()).collect();
        if !trimmed.is_empty() {
            by_text
                .entry(trimmed)
                .or_default()
                .insert(p.source_id.clone());
        }
        scripts.push(p);
    }
    PlantedCorpus {
        scripts,
        templates: vec![
            Template::new("gconf", GCONF),
            Template::new("alternatives", ALT_TEMPLATE),
            Template::new("ldconfig", LDCONFIG_TEMPLATE),
        ],
        hits,
        groups: by_text.into_values().collect(),
    }
}

/// Line counts by a plain scan: code lines are non-empty lines that do not
/// start with `#`; lines between the markers are generated.
pub fn naive_counts(text: &str) -> (usize, usize, usize) {
    let (mut code, mut generated, mut inside) = (0, 0, false);
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with(BEGIN) {
            inside = true;
        } else if t.starts_with(END) {
            inside = false;
        } else if !t.is_empty() && !t.starts_with('#') {
            code += 1;
            generated += inside as usize;
        }
    }
    (code, generated, code - generated)
}
