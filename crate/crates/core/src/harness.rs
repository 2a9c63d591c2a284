//! Reproducible experiment sweeps: grid expansion, per-cell runs, and CSV/JSON
//! result tables.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    compute_params_with, find_minor, scaling_ratio, verify_witness, Mode, Outcome, Overrides, ParamError, RunOptions,
};
use crate::generators::{Family, GenSpec};
use crate::rng::{mix, RngStream};
use crate::spectral::gate_theorem_hypotheses;

pub const SCHEMA_VERSION: u32 = 1;

/// Stream id for engine randomness; the CLI uses the same one, so a row can
/// be replayed from its seed.
pub const ENGINE_STREAM: u64 = 0x656e67;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("config parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub families: Vec<Family>,
    pub n: Vec<usize>,
    /// Degree for `regular`, average degree for `gnp`, and the small side for
    /// `complete-bipartite` (whose large side is `n`). Ignored by the other families.
    #[serde(default)]
    pub d: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub eps: f64,
    pub mode: Mode,
    #[serde(default)]
    pub overrides: Overrides,
    /// Iteration cap; defaults to `2n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    /// Directory for one witness file per successful row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub grid: Grid,
    pub engine: EngineConfig,
    pub seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub budget_secs: f64,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg = Self::from_json(&text)?;
        // relative output paths are taken relative to the config file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.output.csv, &mut cfg.output.json, &mut cfg.output.witnesses].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.schema != SCHEMA_VERSION {
            return bad(&format!("schema {} is not the supported version {SCHEMA_VERSION}", self.schema));
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1");
        }
        if !(self.budget_secs > 0.0 && self.budget_secs.is_finite()) {
            return bad("budget_secs must be positive");
        }
        if self.cells().is_empty() {
            return bad("the instance grid is empty");
        }
        Ok(())
    }

    /// Grid cells in order, with duplicates (families that ignore a
    /// dimension) removed.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out: Vec<Cell> = Vec::new();
        let ds: Vec<usize> = if self.grid.d.is_empty() { vec![0] } else { self.grid.d.clone() };
        for &family in &self.grid.families {
            for &n in &self.grid.n {
                for &d in &ds {
                    let cell = Cell::new(family, n, d);
                    if !out.contains(&cell) {
                        out.push(cell);
                    }
                }
            }
        }
        out
    }

    /// Seed for the `k`-th run of a cell.
    pub fn seed_for(&self, cell: &Cell, k: usize) -> u64 {
        let key = cell.instance().bytes().fold(0u64, |h, b| mix(h, b as u64));
        mix(mix(self.base_seed, key), k as u64)
    }
}

/// One instance family with its size parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub family: Family,
    pub n: usize,
    pub d: usize,
}

impl Cell {
    fn new(family: Family, n: usize, d: usize) -> Self {
        match family {
            Family::Regular | Family::Gnp | Family::CompleteBipartite => Cell { family, n, d },
            Family::Cycle | Family::Complete => Cell { family, n, d: 0 },
            Family::Petersen | Family::TwoTriangles => Cell { family, n: 0, d: 0 },
        }
    }

    pub fn instance(&self) -> String {
        match self.family {
            Family::Regular | Family::Gnp => format!("{}(n={},d={})", self.family, self.n, self.d),
            Family::CompleteBipartite => format!("{}(a={},b={})", self.family, self.d, self.n),
            Family::Cycle | Family::Complete => format!("{}(n={})", self.family, self.n),
            Family::Petersen | Family::TwoTriangles => self.family.to_string(),
        }
    }

    pub fn spec(&self, seed: u64) -> GenSpec {
        let p = if self.n > 1 { (self.d as f64 / (self.n - 1) as f64).min(1.0) } else { 0.0 };
        GenSpec { family: self.family, n: self.n, d: self.d, p, a: self.d, b: self.n, seed }
    }
}

/// One line of the result table. `wall_ms` is last so that it can be dropped
/// for determinism checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance: String,
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    /// `success`, `failure`, `timeout`, `regime-error` or `error`.
    pub outcome: String,
    pub achieved_order: usize,
    pub target_order: usize,
    pub iterations: usize,
    /// Hypothesis route: `exact`, `eigenvalue` or `uncertified`.
    pub route: String,
    /// `achieved_order / sqrt(n d / ln d)`.
    pub ratio: Option<f64>,
    pub detail: String,
    pub wall_ms: u64,
}

/// Column names, in order.
pub const CSV_HEADER: [&str; 13] = [
    "instance",
    "family",
    "n",
    "d",
    "seed",
    "outcome",
    "achieved_order",
    "target_order",
    "iterations",
    "route",
    "ratio",
    "detail",
    "wall_ms",
];

/// Runs one grid cell with one seed. Errors are recorded in the row.
pub fn run_cell(cfg: &ExperimentConfig, cell: &Cell, seed: u64, witness_dir: Option<&Path>) -> ResultRow {
    let start = Instant::now();
    let mut row = ResultRow {
        instance: cell.instance(),
        family: cell.family,
        n: cell.n,
        d: cell.d,
        seed,
        outcome: "error".into(),
        achieved_order: 0,
        target_order: 0,
        iterations: 0,
        route: "uncertified".into(),
        ratio: None,
        detail: String::new(),
        wall_ms: 0,
    };
    let finish = |mut row: ResultRow| {
        row.wall_ms = start.elapsed().as_millis() as u64;
        row
    };
    let g = match cell.spec(seed).generate() {
        Ok(g) => g,
        Err(e) => {
            row.detail = format!("generation: {e}");
            return finish(row);
        }
    };
    row.n = g.n();
    row.d = g.max_degree();
    row.route = gate_theorem_hypotheses(&g, cfg.engine.eps).route.name().into();
    let d = row.d.max(3);
    let params = match compute_params_with(g.n(), d, cfg.engine.eps, cfg.engine.mode, &cfg.engine.overrides) {
        Ok(p) => p,
        Err(e @ ParamError::Regime(_)) => {
            row.outcome = "regime-error".into();
            row.detail = e.to_string();
            return finish(row);
        }
        Err(e) => {
            row.detail = e.to_string();
            return finish(row);
        }
    };
    row.target_order = params.r;
    let opts = RunOptions {
        max_iterations: cfg.engine.max_iterations,
        deadline: Some(start + Duration::from_secs_f64(cfg.budget_secs)),
        ..RunOptions::default()
    };
    let report = match find_minor(&g, &params, &RngStream::new(seed, ENGINE_STREAM), opts) {
        Ok(r) => r,
        Err(e) => {
            row.detail = format!("engine: {e}");
            return finish(row);
        }
    };
    row.iterations = report.iterations;
    row.achieved_order = report.achieved_order;
    row.ratio = Some(scaling_ratio(report.achieved_order, g.n(), d));
    row.outcome = match report.outcome {
        Outcome::Success => "success",
        Outcome::Failure => "failure",
        Outcome::Timeout => "timeout",
    }
    .into();
    row.detail = report.reason.unwrap_or_default();
    if report.outcome == Outcome::Success {
        let w = report.witness.as_ref().expect("success carries a witness");
        if let Some(v) = verify_witness(&g, w).violation {
            row.outcome = "failure".into();
            row.detail = format!("witness rejected: {v}");
        } else if let Some(dir) = witness_dir {
            let path = dir.join(witness_file_name(&row.instance, seed));
            if let Err(e) = fs::write(&path, w.to_json()) {
                row.detail = format!("could not write {}: {e}", path.display());
            }
        }
    }
    finish(row)
}

pub fn witness_file_name(instance: &str, seed: u64) -> String {
    let clean: String = instance.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    format!("{clean}_{seed}.json")
}

/// Runs every cell and seed with up to `jobs` workers. Rows come back in grid
/// order. When `resume` is set and the CSV output already holds rows, those
/// cells are skipped and kept. Rows are appended to the CSV output as soon
/// as every earlier row is done.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize, resume: bool) -> Result<Vec<ResultRow>, HarnessError> {
    cfg.validate()?;
    let mut tasks = Vec::new();
    for cell in cfg.cells() {
        for k in 0..cfg.seeds {
            let seed = cfg.seed_for(&cell, k);
            tasks.push((cell.clone(), seed));
        }
    }

    let previous = match (&cfg.output.csv, resume) {
        (Some(path), true) if path.exists() => read_csv(path)?,
        _ => Vec::new(),
    };
    let done: HashSet<(String, u64)> = previous.iter().map(|r| (r.instance.clone(), r.seed)).collect();
    let pending: Vec<(usize, &Cell, u64)> = tasks
        .iter()
        .enumerate()
        .filter(|(_, (c, s))| !done.contains(&(c.instance(), *s)))
        .map(|(i, (c, s))| (i, c, *s))
        .collect();

    if let Some(dir) = &cfg.output.witnesses {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut sink = match &cfg.output.csv {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            let fresh = !(resume && path.exists());
            let file = if fresh { File::create(path) } else { OpenOptions::new().append(true).open(path) }
                .map_err(io_err(path))?;
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
            if fresh {
                w.write_record(CSV_HEADER)?;
                w.flush().map_err(io_err(path))?;
            }
            Some((w, path.clone()))
        }
        None => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let witness_dir = cfg.output.witnesses.as_deref();
    let (tx, rx) = mpsc::channel();
    let mut fresh_rows: Vec<Option<ResultRow>> = vec![None; pending.len()];
    std::thread::scope(|scope| -> Result<(), HarnessError> {
        let pending = &pending;
        scope.spawn(move || {
            pool.install(|| {
                pending.par_iter().enumerate().for_each_with(tx, |tx, (slot, &(_, cell, seed))| {
                    let row = run_cell(cfg, cell, seed, witness_dir);
                    let _ = tx.send((slot, row));
                });
            });
        });
        let mut next = 0;
        for (slot, row) in rx {
            fresh_rows[slot] = Some(row);
            while next < fresh_rows.len() {
                let Some(row) = &fresh_rows[next] else { break };
                if let Some((w, path)) = sink.as_mut() {
                    w.serialize(row)?;
                    w.flush().map_err(io_err(path))?;
                }
                next += 1;
            }
        }
        Ok(())
    })?;

    let mut rows: Vec<Option<ResultRow>> = vec![None; tasks.len()];
    let mut prev =
        previous.into_iter().map(|r| ((r.instance.clone(), r.seed), r)).collect::<std::collections::HashMap<_, _>>();
    for (i, (cell, seed)) in tasks.iter().enumerate() {
        if let Some(r) = prev.remove(&(cell.instance(), *seed)) {
            rows[i] = Some(r);
        }
    }
    for ((i, _, _), row) in pending.iter().zip(fresh_rows) {
        rows[*i] = row;
    }
    let rows: Vec<ResultRow> = rows.into_iter().flatten().collect();
    if let Some(path) = &cfg.output.json {
        fs::write(path, to_json(&rows)).map_err(io_err(path))?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn emit(rows: &[ResultRow], format: Format) -> Result<String, HarnessError> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => Ok(to_json(rows)),
    }
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String, HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_json(rows: &[ResultRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(HarnessError::Config(format!("unexpected CSV header {header:?}")));
    }
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn parse_json(text: &str) -> Result<Vec<ResultRow>, HarnessError> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    parse_csv(&fs::read_to_string(path).map_err(io_err(path))?)
}

/// The CSV with the wall-time column removed, for determinism comparisons.
pub fn strip_timing(csv_text: &str) -> String {
    csv_text.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head)).collect::<Vec<_>>().join("\n")
}

/// Exit status for a finished sweep: 0 when every row succeeded, 2 otherwise.
pub fn exit_code(rows: &[ResultRow]) -> i32 {
    if rows.iter().all(|r| r.outcome == "success") {
        0
    } else {
        2
    }
}

pub fn write_all(path: &Path, text: &str) -> Result<(), HarnessError> {
    let mut f = File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4_config() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"schema": 1, "grid": {"families": ["complete"], "n": [4]},
                "engine": {"eps": 0.3, "mode": "constd"}, "seeds": 1, "budget_secs": 10}"#,
        )
        .unwrap()
    }

    #[test]
    fn single_fixture_cell() {
        let rows = run_experiment(&k4_config(), 1, false).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].outcome, "success", "{}", rows[0].detail);
        assert!(rows[0].achieved_order >= 1);
        assert_eq!(rows[0].instance, "complete(n=4)");
    }

    #[test]
    fn config_errors() {
        let base = r#"{"schema": 1, "grid": {"families": [], "n": [4]},
                      "engine": {"eps": 0.3, "mode": "sparse"}, "seeds": 1, "budget_secs": 10}"#;
        assert!(matches!(ExperimentConfig::from_json(base), Err(HarnessError::Config(m)) if m.contains("empty")));
        let unknown = base.replace("\"seeds\"", "\"colour\": 1, \"seeds\"");
        assert!(matches!(ExperimentConfig::from_json(&unknown), Err(HarnessError::Parse(_))));
        let version = base.replace("\"schema\": 1", "\"schema\": 9").replace("[]", "[\"cycle\"]");
        assert!(matches!(ExperimentConfig::from_json(&version), Err(HarnessError::Config(_))));
        let seeds = base.replace("\"seeds\": 1", "\"seeds\": 0").replace("[]", "[\"cycle\"]");
        assert!(matches!(ExperimentConfig::from_json(&seeds), Err(HarnessError::Config(_))));
    }

    #[test]
    fn grid_cells_dedupe() {
        let cfg = ExperimentConfig::from_json(
            r#"{"schema": 1, "grid": {"families": ["petersen", "regular", "cycle"], "n": [10, 20], "d": [3, 4]},
                "engine": {"eps": 0.3, "mode": "constd"}, "seeds": 2, "budget_secs": 10}"#,
        )
        .unwrap();
        let names: Vec<String> = cfg.cells().iter().map(Cell::instance).collect();
        assert_eq!(
            names,
            [
                "petersen",
                "regular(n=10,d=3)",
                "regular(n=10,d=4)",
                "regular(n=20,d=3)",
                "regular(n=20,d=4)",
                "cycle(n=10)",
                "cycle(n=20)"
            ]
        );
    }

    #[test]
    fn emit_and_parse() {
        let rows = run_experiment(&k4_config(), 1, false).unwrap();
        let csv = to_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(parse_csv(&csv).unwrap(), rows);
        assert_eq!(parse_json(&to_json(&rows)).unwrap(), rows);
        assert_eq!(to_json(&[]).trim(), "[]");
        assert_eq!(to_csv(&[]).unwrap().lines().count(), 1);
    }

    #[test]
    fn resume_skips_finished_cells() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::from_json(
            r#"{"schema": 1, "grid": {"families": ["cycle"], "n": [6, 7, 8]},
                "engine": {"eps": 0.3, "mode": "constd"}, "seeds": 1, "budget_secs": 10}"#,
        )
        .unwrap();
        cfg.output.csv = Some(dir.path().join("out.csv"));
        let full = run_experiment(&cfg, 2, false).unwrap();
        let text = fs::read_to_string(cfg.output.csv.as_ref().unwrap()).unwrap();
        // drop the last row, then resume
        let truncated: Vec<&str> = text.lines().take(3).collect();
        fs::write(cfg.output.csv.as_ref().unwrap(), truncated.join("\n") + "\n").unwrap();
        let resumed = run_experiment(&cfg, 2, true).unwrap();
        let after = fs::read_to_string(cfg.output.csv.as_ref().unwrap()).unwrap();
        assert_eq!(strip_timing(&after), strip_timing(&text));
        assert_eq!(resumed.len(), full.len());
    }

    #[test]
    fn exit_codes() {
        let mut rows = run_experiment(&k4_config(), 1, false).unwrap();
        assert_eq!(exit_code(&rows), 0);
        rows[0].outcome = "failure".into();
        assert_eq!(exit_code(&rows), 2);
    }
}
