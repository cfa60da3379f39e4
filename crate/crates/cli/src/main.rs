//! `sprintlint`: lint a team's sprint history against agile conformance
//! metrics.
//!
//! Exit codes: 0 ok, 1 a score fell below `--fail-below`, 2 bad input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sprintlint::fixtures::{generate, inject, write_fixture, FixtureHeader, FixtureSpec, InjectionSpec, Ledger};
use sprintlint::ingest::{load_project, snapshot_json, IngestManifest};
use sprintlint::report::{lint, LintOptions};
use sprintlint::scoring::{score_all, trend, trend_csv_string};
use sprintlint::time::Timestamp;
use sprintlint::{run_all, MetricConfig, ProjectHistory};

#[derive(Debug, Parser)]
#[command(name = "sprintlint", version, about = "Agile process conformance lint over development exports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate exported files and write one snapshot file.
    Ingest(IngestArgs),
    /// Run every enabled metric and print a report.
    Lint(LintArgs),
    /// Write per-sprint metric and overall scores as a trend CSV.
    Score(ScoreArgs),
    /// Write a seeded synthetic history, optionally with planted violations.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// JSON manifest with file paths, team and alias maps and a roster.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Directory holding commits.ndjson, issues.json, sprints.json, pulls.json and stats.csv.
    #[arg(long)]
    dir: Option<PathBuf>,
    #[arg(long)]
    commits: Option<PathBuf>,
    #[arg(long)]
    issues: Option<PathBuf>,
    #[arg(long)]
    sprints: Option<PathBuf>,
    #[arg(long)]
    pulls: Option<PathBuf>,
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Snapshot file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Metric config JSON; absent fields take their defaults.
    #[arg(long, env = "SPRINTLINT_CONFIG")]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

#[derive(Debug, Args)]
struct LintArgs {
    /// Snapshot file or directory of exported files.
    #[arg(long)]
    project: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    /// Sprint title to report, or `all`.
    #[arg(long, default_value = "all")]
    sprint: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with 1 when any reported overall score is below this value.
    #[arg(long)]
    fail_below: Option<f64>,
    /// Reference time for deadline checks (RFC 3339, UTC); defaults to the latest record.
    #[arg(long)]
    now: Option<String>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    project: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    /// Trend CSV to write; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Fixture spec JSON; absent fields take their defaults.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Injection spec JSON.
    #[arg(long)]
    inject: Option<PathBuf>,
    /// Overrides the seed in the spec; also seeds the injection.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl ToString) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Lint(args) => cmd_lint(args),
        Command::Score(args) => cmd_score(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sprintlint: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(arg: &ConfigArg) -> Result<MetricConfig, Failure> {
    match &arg.config {
        None => Ok(MetricConfig::default()),
        Some(path) => MetricConfig::from_json(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display()))),
    }
}

fn load(project: &Path) -> Result<ProjectHistory, Failure> {
    load_project(project).map_err(input_error)
}

fn cmd_ingest(args: IngestArgs) -> Result<(), Failure> {
    let mut manifest = match &args.manifest {
        Some(path) => {
            let mut m = serde_json::from_str::<IngestManifest>(&read(path)?)
                .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            // Relative paths in a manifest are relative to the manifest itself.
            let base = path.parent().unwrap_or(Path::new(""));
            for slot in [&mut m.commits_path, &mut m.issues_path, &mut m.sprints_path, &mut m.pulls_path, &mut m.stats_path] {
                if let Some(p) = slot.as_mut().filter(|p| p.is_relative()) {
                    *p = base.join(&*p);
                }
            }
            m
        }
        None => IngestManifest::default(),
    };
    if let Some(dir) = &args.dir {
        let found = IngestManifest::from_dir(dir);
        manifest.commits_path = manifest.commits_path.or(found.commits_path);
        manifest.issues_path = manifest.issues_path.or(found.issues_path);
        manifest.sprints_path = manifest.sprints_path.or(found.sprints_path);
        manifest.pulls_path = manifest.pulls_path.or(found.pulls_path);
        manifest.stats_path = manifest.stats_path.or(found.stats_path);
    }
    for (flag, slot) in [
        (args.commits, &mut manifest.commits_path),
        (args.issues, &mut manifest.issues_path),
        (args.sprints, &mut manifest.sprints_path),
        (args.pulls, &mut manifest.pulls_path),
        (args.stats, &mut manifest.stats_path),
    ] {
        if flag.is_some() {
            *slot = flag;
        }
    }
    let history = manifest.ingest().map_err(input_error)?;
    write(&args.out, &snapshot_json(&history))?;
    println!("commits: {}", history.commits().len());
    println!("stories: {}", history.stories().len());
    println!("sprints: {}", history.sprints().len());
    println!("pulls: {}", history.pulls().len());
    println!("build_stats: {}", history.build_stats().len());
    for p in history.shallow_parents() {
        eprintln!("note: commit {} references parent {} outside the export", p.commit, p.missing_parent);
    }
    Ok(())
}

fn cmd_lint(args: LintArgs) -> Result<(), Failure> {
    let history = load(&args.project)?;
    let config = load_config(&args.config)?;
    let now = args
        .now
        .as_deref()
        .map(Timestamp::parse)
        .transpose()
        .map_err(|e| input_error(format!("--now: {e}")))?;
    let sprint_title = (args.sprint != "all").then(|| args.sprint.clone());
    let report = lint(&history, &config, &LintOptions { sprint_title, now }).map_err(input_error)?;
    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Markdown => report.to_markdown(),
    };
    emit(args.out.as_deref(), &text)?;
    if let (Some(limit), Some(lowest)) = (args.fail_below, report.min_overall()) {
        if lowest < limit {
            return Err(Failure { code: 1, message: format!("overall score {lowest:.1} is below {limit}") });
        }
    }
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> Result<(), Failure> {
    let history = load(&args.project)?;
    if history.sprints().is_empty() {
        return Err(input_error("project has no sprints"));
    }
    let config = load_config(&args.config)?;
    let results = run_all(&history, &config);
    let scores = score_all(&history, &results, &config).map_err(input_error)?;
    emit(args.out.as_deref(), &trend_csv_string(&trend(&history, &results, &scores)))
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let mut spec = match &args.spec {
        Some(path) => FixtureSpec::from_json(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))?,
        None => FixtureSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let injection = match &args.inject {
        Some(path) => {
            Some(InjectionSpec::from_json(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let fixture = generate(&spec).map_err(input_error)?;
    let mut header = FixtureHeader::new(&spec, &fixture.certificate);
    let (history, ledger) = match injection {
        Some(injection) => {
            let (history, ledger) = inject(&fixture.history, &injection, spec.seed).map_err(input_error)?;
            header.injection = Some(injection);
            header.injection_seed = Some(spec.seed);
            (history, ledger)
        }
        None => (fixture.history, Ledger::default()),
    };
    write_fixture(&args.out_dir, &history, &header, Some(&ledger)).map_err(input_error)?;
    let planted: usize = ledger.0.values().map(|s| s.len()).sum();
    println!(
        "wrote {} commits, {} stories, {} sprints, {} pulls to {}; {planted} planted violation(s)",
        history.commits().len(),
        history.stories().len(),
        history.sprints().len(),
        history.pulls().len(),
        args.out_dir.display()
    );
    Ok(())
}
