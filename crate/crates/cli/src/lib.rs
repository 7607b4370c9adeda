//! Manifest-driven campaigns over the `coopbandit` engine.
//!
//! A campaign reads one TOML manifest and writes `result.csv` and `meta.json`
//! (plus optional per-replicate traces) into the output directory.

pub mod manifest;
pub mod output;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use coopbandit::{
    run_batch, run_replicate, sweep_b, sweep_pq, time_course, tune_hyperparameters, ModelError, ReplicateTrace,
    SimConfig, SweepResult,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub use manifest::{parse_manifest, parse_manifest_with, Campaign, ExperimentManifest, ManifestError, Overrides};
use output::{ResultRow, META_FILE, RESULT_COLUMNS, RESULT_FILE, TRACE_DIR};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("campaign {requested} does not match the manifest campaign {declared}")]
    CampaignMismatch { requested: Campaign, declared: Campaign },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Manifest(ManifestError::Syntax { .. }) => "manifest-syntax",
            CliError::Manifest(ManifestError::Missing { .. }) => "manifest-missing",
            CliError::Manifest(ManifestError::Invalid { .. }) => "manifest-invalid",
            CliError::Model(_) => "model",
            CliError::CampaignMismatch { .. } => "campaign-mismatch",
            CliError::Io { .. } => "io",
            CliError::Csv { .. } => "csv",
            CliError::ThreadPool(_) => "worker-pool",
        }
    }

    /// Exit status: 2 for input problems, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Manifest(_) | CliError::CampaignMismatch { .. } => 2,
            _ => 1,
        }
    }

    /// Single-line JSON description for stderr.
    pub fn to_json(&self) -> String {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        match self {
            CliError::Manifest(ManifestError::Invalid { field, .. }) => v["field"] = json!(field),
            CliError::Manifest(ManifestError::Missing { fields }) => v["fields"] = json!(fields),
            CliError::Manifest(ManifestError::Syntax { line, column, .. }) => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            CliError::Io { path, .. } | CliError::Csv { path, .. } => v["path"] = json!(path),
            _ => {}
        }
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningSummary {
    pub policy: &'static str,
    pub parameter: &'static str,
    pub best_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output_dir: PathBuf,
    pub rows: Vec<ResultRow>,
    pub tuning: Vec<TuningSummary>,
    pub traces_written: usize,
    pub workers: usize,
}

struct Computed {
    rows: Vec<ResultRow>,
    tuning: Vec<TuningSummary>,
    traces: Vec<(PathBuf, ReplicateTrace)>,
}

/// Run the campaign and write its files. `workers = None` uses rayon's
/// default pool. On failure nothing written by this call is left behind.
pub fn execute(manifest: &ExperimentManifest, manifest_text: &str, workers: Option<usize>) -> Result<Outcome, CliError> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let (computed, workers) = match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            pool.install(|| compute(manifest).map(|c| (c, rayon::current_num_threads())))?
        }
        None => (compute(manifest)?, rayon::current_num_threads()),
    };
    let elapsed = clock.elapsed().as_secs_f64();

    let meta = json!({
        "engine_version": coopbandit::VERSION,
        "cli_version": env!("CARGO_PKG_VERSION"),
        "campaign": manifest.campaign,
        "master_seed": manifest.master_seed(),
        "seed_source": manifest.seed_source,
        "manifest": manifest,
        "manifest_text": manifest_text,
        "result_columns": RESULT_COLUMNS,
        "rows": computed.rows.len(),
        "tuning": computed.tuning,
        "traces": computed.traces.len(),
        "workers": workers,
        "started_unix_seconds": started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "wall_clock_seconds": elapsed,
    });

    let dir = &manifest.output_dir;
    let mut written = Written::new(dir);
    if let Err(e) = write_outputs(dir, &computed, &meta, &mut written) {
        written.roll_back();
        return Err(e);
    }

    Ok(Outcome {
        output_dir: dir.clone(),
        traces_written: computed.traces.len(),
        rows: computed.rows,
        tuning: computed.tuning,
        workers,
    })
}

fn compute(manifest: &ExperimentManifest) -> Result<Computed, CliError> {
    let campaign = manifest.campaign;
    let grids = &manifest.grids;
    let mut rows = Vec::new();
    let mut tuning = Vec::new();
    let mut traces = Vec::new();
    let single_policy = manifest.configs.len() == 1;

    for (k, config) in manifest.configs.iter().enumerate() {
        match campaign {
            Campaign::Run => {
                let run = run_batch(config)?;
                rows.push(ResultRow {
                    campaign,
                    config: *config,
                    window: None,
                    i: run.cooperation_index,
                    i_r: run.received_cooperation_index,
                    stderr_i: Some(run.stderr_i),
                });
            }
            Campaign::TimeCourse => {
                for w in time_course(config)? {
                    rows.push(ResultRow {
                        campaign,
                        config: *config,
                        window: Some(w.window_index),
                        i: w.mean_i,
                        i_r: w.mean_i_r,
                        stderr_i: None,
                    });
                }
            }
            Campaign::SweepB => push_sweep(&mut rows, campaign, sweep_b(config, grid(&grids.b))?),
            Campaign::SweepPq => push_sweep(
                &mut rows,
                campaign,
                sweep_pq(config, grid(&grids.p), grid(&grids.q))?,
            ),
            Campaign::Tune => {
                let values = match config.policy {
                    coopbandit::PolicySpec::EpsilonGreedy { .. } => grid(&grids.epsilon),
                    _ => grid(&grids.c),
                };
                let t = tune_hyperparameters(config, values)?;
                tuning.push(TuningSummary {
                    policy: config.policy.name(),
                    parameter: t.parameter,
                    best_value: t.best_value,
                });
                push_sweep(&mut rows, campaign, t.table);
            }
        }

        if manifest.emit_traces {
            let sub = if single_policy {
                PathBuf::from(TRACE_DIR)
            } else {
                Path::new(TRACE_DIR).join(format!("{k}_{}", config.policy.name()))
            };
            traces.extend(replicate_traces(config)?.into_iter().enumerate().map(|(r, t)| {
                (sub.join(output::trace_file_name(r as u32)), t)
            }));
        }
    }
    Ok(Computed { rows, tuning, traces })
}

fn grid(g: &Option<Vec<f64>>) -> &[f64] {
    g.as_deref().expect("manifest resolves every grid the campaign uses")
}

fn push_sweep(rows: &mut Vec<ResultRow>, campaign: Campaign, sweep: SweepResult) {
    rows.extend(sweep.cells.into_iter().map(|cell| ResultRow {
        campaign,
        config: cell.config,
        window: None,
        i: cell.cooperation_index,
        i_r: cell.received_cooperation_index,
        stderr_i: Some(cell.stderr_i),
    }));
}

fn replicate_traces(config: &SimConfig) -> Result<Vec<ReplicateTrace>, ModelError> {
    (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(config, r))
        .collect()
}

/// Tracks what this run created so a failure can undo it.
struct Written {
    created_dir: Option<PathBuf>,
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
}

impl Written {
    fn new(dir: &Path) -> Self {
        Self {
            created_dir: (!dir.exists()).then(|| dir.to_path_buf()),
            files: Vec::new(),
            dirs: Vec::new(),
        }
    }

    fn roll_back(self) {
        if let Some(dir) = self.created_dir {
            let _ = fs::remove_dir_all(dir);
            return;
        }
        for f in self.files.iter().rev() {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

fn create_dir(path: &Path, written: &mut Written) -> Result<(), CliError> {
    let mut missing = Vec::new();
    let mut p = Some(path);
    while let Some(d) = p {
        if d.as_os_str().is_empty() || d.exists() {
            break;
        }
        missing.push(d.to_path_buf());
        p = d.parent();
    }
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    written.dirs.extend(missing.into_iter().rev());
    Ok(())
}

fn create_file(path: &Path, written: &mut Written) -> Result<BufWriter<fs::File>, CliError> {
    let f = fs::File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    written.files.push(path.to_path_buf());
    Ok(BufWriter::new(f))
}

fn write_outputs(
    dir: &Path,
    computed: &Computed,
    meta: &serde_json::Value,
    written: &mut Written,
) -> Result<(), CliError> {
    create_dir(dir, written)?;

    let path = dir.join(RESULT_FILE);
    let f = create_file(&path, written)?;
    output::write_results(f, &computed.rows).map_err(|source| CliError::Csv { path, source })?;

    for (rel, trace) in &computed.traces {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            create_dir(parent, written)?;
        }
        let f = create_file(&path, written)?;
        output::write_trace(f, trace).map_err(|source| CliError::Csv { path, source })?;
    }

    let path = dir.join(META_FILE);
    let mut text = serde_json::to_string_pretty(meta).expect("meta is plain JSON");
    text.push('\n');
    let mut f = create_file(&path, written)?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|source| CliError::Io { path, source })?;
    Ok(())
}
