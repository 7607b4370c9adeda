//! Result files: `result.csv`, `traces/replicate_<k>.csv` and their readers.

use std::io;
use std::path::Path;

use coopbandit::{PolicySpec, ReplicateTrace, SimConfig};
use serde::Deserialize;

use crate::manifest::Campaign;

pub const RESULT_FILE: &str = "result.csv";
pub const META_FILE: &str = "meta.json";
pub const TRACE_DIR: &str = "traces";

pub const RESULT_COLUMNS: [&str; 14] = [
    "campaign",
    "policy",
    "epsilon",
    "c",
    "prior",
    "p",
    "q",
    "b",
    "rounds",
    "replicates",
    "window",
    "I",
    "I_R",
    "stderr_I",
];

pub const TRACE_COLUMNS: [&str; 4] = ["round", "action", "opponent_action", "reward"];

/// Six significant digits, shortest decimal form, no exponent.
pub fn format_number(x: f64) -> String {
    let rounded: f64 = format!("{x:.5e}").parse().expect("scientific form parses");
    // Avoid "-0".
    if rounded == 0.0 {
        return "0".into();
    }
    rounded.to_string()
}

fn optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// One line of `result.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub campaign: Campaign,
    pub config: SimConfig,
    pub window: Option<usize>,
    pub i: f64,
    pub i_r: f64,
    pub stderr_i: Option<f64>,
}

impl ResultRow {
    fn record(&self) -> [String; 14] {
        let policy: &PolicySpec = &self.config.policy;
        [
            self.campaign.as_str().to_string(),
            policy.name().to_string(),
            optional(policy.epsilon()),
            optional(policy.c()),
            optional(policy.prior()),
            format_number(self.config.strategy.p()),
            format_number(self.config.strategy.q()),
            format_number(self.config.game.b()),
            self.config.rounds.to_string(),
            self.config.replicates.to_string(),
            self.window.map(|w| w.to_string()).unwrap_or_default(),
            format_number(self.i),
            format_number(self.i_r),
            optional(self.stderr_i),
        ]
    }
}

pub fn write_results<W: io::Write>(out: W, rows: &[ResultRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_COLUMNS)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: io::Write>(out: W, trace: &ReplicateTrace) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for (round, ((a, o), r)) in trace
        .actions
        .iter()
        .zip(&trace.opponent_actions)
        .zip(&trace.rewards)
        .enumerate()
    {
        w.write_record([
            round.to_string(),
            a.as_str().to_string(),
            o.as_str().to_string(),
            format_number(*r),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_file_name(replicate: u32) -> String {
    format!("replicate_{replicate}.csv")
}

/// A parsed line of `result.csv`. Empty cells read as `None`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResultRecord {
    pub campaign: String,
    pub policy: String,
    pub epsilon: Option<f64>,
    pub c: Option<f64>,
    pub prior: Option<f64>,
    pub p: f64,
    pub q: f64,
    pub b: f64,
    pub rounds: u32,
    pub replicates: u32,
    pub window: Option<usize>,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "I_R")]
    pub i_r: f64,
    #[serde(rename = "stderr_I")]
    pub stderr_i: Option<f64>,
}

pub fn read_results(path: &Path) -> csv::Result<Vec<ResultRecord>> {
    csv::Reader::from_path(path)?.deserialize().collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceRecord {
    pub round: u32,
    pub action: String,
    pub opponent_action: String,
    pub reward: f64,
}

pub fn read_trace(path: &Path) -> csv::Result<Vec<TraceRecord>> {
    csv::Reader::from_path(path)?.deserialize().collect()
}
