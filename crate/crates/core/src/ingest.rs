//! Readers and writers for the export formats:
//!
//! * commits: newline-delimited JSON objects
//! * issues, sprints, pulls: one JSON array per file
//! * build stats: CSV with header `commit_id,coverage_percent,complexity`

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::model::history::check_stats;
use crate::model::{build_history, BuildStats, Commit, HistoryError, ProjectHistory, PullRequest, RawRecords, Sprint, TeamId, UserStory};

/// One malformed record, located by 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordError {
    pub line: usize,
    pub message: String,
}

/// Records that parsed, plus the ones that did not.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub errors: Vec<RecordError>,
}

impl<T> Parsed<T> {
    fn new() -> Self {
        Self { records: Vec::new(), errors: Vec::new() }
    }

    /// Records if no line failed, otherwise the collected errors.
    pub fn into_result(self, path: &Path) -> Result<Vec<T>, IngestError> {
        if self.errors.is_empty() {
            Ok(self.records)
        } else {
            Err(IngestError::Records { path: path.to_path_buf(), errors: self.errors })
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}", RecordList(path, errors))]
    Records { path: PathBuf, errors: Vec<RecordError> },
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    History(#[from] HistoryError),
}

struct RecordList<'a>(&'a PathBuf, &'a Vec<RecordError>);

impl fmt::Display for RecordList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.1.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}:{}: {}", self.0.display(), e.line, e.message)?;
        }
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|e| IngestError::Io { path: path.to_path_buf(), message: e.to_string() })
}

fn io_error(path: &Path, e: impl fmt::Display) -> IngestError {
    IngestError::Io { path: path.to_path_buf(), message: e.to_string() }
}

/// Counts task-list items: optional indentation, `-` or `*`, a space, then
/// `[ ]`, `[x]` or `[X]`.
pub fn count_checkboxes(body: &str) -> usize {
    body.lines()
        .filter(|line| {
            let rest = line.trim_start();
            let Some(rest) = rest.strip_prefix(['-', '*']) else { return false };
            let Some(rest) = rest.strip_prefix(' ') else { return false };
            rest.starts_with("[ ]") || rest.starts_with("[x]") || rest.starts_with("[X]")
        })
        .count()
}

pub fn parse_commits(text: &str) -> Parsed<Commit> {
    let mut out = Parsed::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Commit>(line) {
            Ok(c) => out.records.push(c),
            Err(e) => out.errors.push(RecordError { line: i + 1, message: e.to_string() }),
        }
    }
    out
}

/// Reads newline-delimited commit records; blank lines are skipped.
pub fn read_commits(path: impl AsRef<Path>) -> Result<Parsed<Commit>, IngestError> {
    Ok(parse_commits(&read_text(path.as_ref())?))
}

fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset].iter().filter(|&&b| b == b'\n').count() + 1
}

/// Parses a JSON array element by element so that one bad record does not
/// hide the others. A document that is not an array at all is one error.
pub fn parse_array<T: DeserializeOwned>(text: &str) -> Parsed<T> {
    let mut out = Parsed::new();
    if text.trim().is_empty() {
        return out;
    }
    let items: Vec<&RawValue> = match serde_json::from_str(text) {
        Ok(items) => items,
        Err(e) => {
            out.errors.push(RecordError { line: e.line().max(1), message: e.to_string() });
            return out;
        }
    };
    let base = text.as_ptr() as usize;
    for raw in items {
        let offset = raw.get().as_ptr() as usize - base;
        match serde_json::from_str::<T>(raw.get()) {
            Ok(r) => out.records.push(r),
            Err(e) => {
                let line = line_of(text, offset) + e.line().saturating_sub(1);
                out.errors.push(RecordError { line, message: e.to_string() });
            }
        }
    }
    out
}

pub fn read_issues(path: impl AsRef<Path>) -> Result<Parsed<UserStory>, IngestError> {
    Ok(parse_array(&read_text(path.as_ref())?))
}

pub fn read_sprints(path: impl AsRef<Path>) -> Result<Parsed<Sprint>, IngestError> {
    Ok(parse_array(&read_text(path.as_ref())?))
}

pub fn read_pulls(path: impl AsRef<Path>) -> Result<Parsed<PullRequest>, IngestError> {
    Ok(parse_array(&read_text(path.as_ref())?))
}

pub const STATS_HEADER: [&str; 3] = ["commit_id", "coverage_percent", "complexity"];

/// Parses the stats table. Rows with coverage outside [0, 100] are errors
/// naming the commit; references to unknown commits are left to
/// [`build_history`].
pub fn parse_stats(text: &str) -> Parsed<BuildStats> {
    let mut out = Parsed::new();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => {
            out.errors.push(RecordError { line: 1, message: e.to_string() });
            return out;
        }
    };
    if headers.is_empty() {
        return out;
    }
    for column in STATS_HEADER {
        if !headers.iter().any(|h| h == column) {
            out.errors.push(RecordError { line: 1, message: format!("missing column '{column}'") });
        }
    }
    if !out.errors.is_empty() {
        return out;
    }
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                out.errors.push(RecordError { line, message: e.to_string() });
                continue;
            }
        };
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        match row.deserialize::<BuildStats>(Some(&headers)) {
            Ok(s) => match check_stats(&s) {
                Ok(()) => out.records.push(s),
                Err(e) => out.errors.push(RecordError { line, message: e.to_string() }),
            },
            Err(e) => out.errors.push(RecordError { line, message: e.to_string() }),
        }
    }
    out
}

pub fn read_stats(path: impl AsRef<Path>) -> Result<Parsed<BuildStats>, IngestError> {
    Ok(parse_stats(&read_text(path.as_ref())?))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, IngestError> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

pub fn write_commits(path: impl AsRef<Path>, commits: &[Commit]) -> Result<(), IngestError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for c in commits {
        serde_json::to_writer(&mut w, c).map_err(|e| io_error(path, e))?;
        w.write_all(b"\n").map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn write_array<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<(), IngestError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, records).map_err(|e| io_error(path, e))?;
    w.write_all(b"\n").map_err(|e| io_error(path, e))?;
    w.flush().map_err(|e| io_error(path, e))
}

pub fn write_stats(path: impl AsRef<Path>, stats: &[BuildStats]) -> Result<(), IngestError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(STATS_HEADER).map_err(|e| io_error(path, e))?;
    for s in stats {
        let row = [s.commit_id.clone(), s.coverage_percent.to_string(), s.complexity.to_string()];
        w.write_record(&row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Where the exports live and how to map their identities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestManifest {
    pub commits_path: Option<PathBuf>,
    pub issues_path: Option<PathBuf>,
    pub sprints_path: Option<PathBuf>,
    pub pulls_path: Option<PathBuf>,
    pub stats_path: Option<PathBuf>,
    /// Repository name (as found in the `team` field) to team id.
    pub team_map: BTreeMap<String, String>,
    /// Author string to canonical developer id.
    pub alias_map: BTreeMap<String, String>,
    /// Explicit developers per team, replacing the derived set.
    pub roster: Option<BTreeMap<TeamId, std::collections::BTreeSet<String>>>,
}

impl IngestManifest {
    /// The standard file names inside one directory; missing files are skipped.
    pub fn from_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        let pick = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        Self {
            commits_path: pick("commits.ndjson"),
            issues_path: pick("issues.json"),
            sprints_path: pick("sprints.json"),
            pulls_path: pick("pulls.json"),
            stats_path: pick("stats.csv"),
            ..Self::default()
        }
    }

    fn paths(&self) -> Vec<&PathBuf> {
        [&self.commits_path, &self.issues_path, &self.sprints_path, &self.pulls_path, &self.stats_path]
            .into_iter()
            .flatten()
            .collect()
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.commits_path.is_none() && self.issues_path.is_none() {
            return Err(IngestError::Manifest("a commits or issues file is required".into()));
        }
        let paths = self.paths();
        for (i, a) in paths.iter().enumerate() {
            if paths[i + 1..].contains(a) {
                return Err(IngestError::Manifest(format!("{} is listed more than once", a.display())));
            }
        }
        Ok(())
    }

    /// Reads every listed file. Record errors from all files are reported
    /// together so one run shows every problem.
    pub fn load(&self) -> Result<RawRecords, IngestError> {
        self.validate()?;
        let mut raw = RawRecords::default();
        let mut failures: Vec<IngestError> = Vec::new();

        fn take<T>(
            path: &Option<PathBuf>,
            read: fn(&Path) -> Result<Parsed<T>, IngestError>,
            into: &mut Vec<T>,
            failures: &mut Vec<IngestError>,
        ) -> Result<(), IngestError> {
            if let Some(p) = path {
                match read(p)?.into_result(p) {
                    Ok(records) => *into = records,
                    Err(e) => failures.push(e),
                }
            }
            Ok(())
        }
        take(&self.commits_path, |p| read_commits(p), &mut raw.commits, &mut failures)?;
        take(&self.issues_path, |p| read_issues(p), &mut raw.stories, &mut failures)?;
        take(&self.sprints_path, |p| read_sprints(p), &mut raw.sprints, &mut failures)?;
        take(&self.pulls_path, |p| read_pulls(p), &mut raw.pulls, &mut failures)?;
        take(&self.stats_path, |p| read_stats(p), &mut raw.build_stats, &mut failures)?;
        if let Some(first) = merge_failures(failures) {
            return Err(first);
        }
        self.apply_maps(&mut raw);
        raw.roster = self.roster.clone();
        Ok(raw)
    }

    pub fn ingest(&self) -> Result<ProjectHistory, IngestError> {
        Ok(build_history(self.load()?)?)
    }

    fn apply_maps(&self, raw: &mut RawRecords) {
        let team = |t: &mut TeamId| {
            if let Some(mapped) = self.team_map.get(t.as_str()) {
                *t = TeamId::from(mapped.as_str());
            }
        };
        let aliases: BTreeMap<String, &String> =
            self.alias_map.iter().map(|(k, v)| (k.trim().to_lowercase(), v)).collect();
        let alias = |a: &str| -> String {
            let key = a.trim().to_lowercase();
            aliases.get(&key).map(|v| v.to_string()).unwrap_or_else(|| a.to_string())
        };
        for c in &mut raw.commits {
            team(&mut c.team);
            c.author = alias(&c.author);
        }
        for s in &mut raw.stories {
            team(&mut s.team);
            s.assignees = s.assignees.iter().map(|a| alias(a)).collect();
        }
        for s in &mut raw.sprints {
            team(&mut s.team);
        }
        for p in &mut raw.pulls {
            team(&mut p.team);
        }
    }
}

/// Joins record errors from several files into one error.
fn merge_failures(failures: Vec<IngestError>) -> Option<IngestError> {
    if failures.len() <= 1 {
        return failures.into_iter().next();
    }
    let text = failures.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("\n");
    Some(IngestError::Manifest(format!("record errors in several files:\n{text}")))
}

/// Writes records in the standard layout under `dir`; empty collections
/// still produce their file.
pub fn write_dir(dir: impl AsRef<Path>, raw: &RawRecords) -> Result<(), IngestError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    write_commits(dir.join("commits.ndjson"), &raw.commits)?;
    write_array(dir.join("issues.json"), &raw.stories)?;
    write_array(dir.join("sprints.json"), &raw.sprints)?;
    write_array(dir.join("pulls.json"), &raw.pulls)?;
    write_stats(dir.join("stats.csv"), &raw.build_stats)
}

/// Canonical JSON of a validated history: sorted keys, records in the
/// history's stored order.
pub fn snapshot_json(history: &ProjectHistory) -> String {
    let value = serde_json::to_value(history.records()).expect("records serialize");
    let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
    text.push('\n');
    text
}

pub fn parse_snapshot(text: &str) -> Result<ProjectHistory, IngestError> {
    let raw: RawRecords =
        serde_json::from_str(text).map_err(|e| IngestError::Manifest(format!("malformed snapshot: {e}")))?;
    Ok(build_history(raw)?)
}

/// A snapshot file, or a directory in the standard layout.
pub fn load_project(path: impl AsRef<Path>) -> Result<ProjectHistory, IngestError> {
    let path = path.as_ref();
    if path.is_dir() {
        return IngestManifest::from_dir(path).ingest();
    }
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_snapshot(&text).map_err(|e| match e {
        IngestError::Manifest(m) => IngestError::Manifest(format!("{}: {m}", path.display())),
        other => other,
    })
}
