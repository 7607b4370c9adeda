//! Parameter sweeps over `b` and over the `(p, q)` plane, hyperparameter
//! tuning and windowed time courses.
//!
//! Every grid point runs as its own cell with its own derived seeds, so a
//! point's result depends only on its position in the grid, never on the
//! other points.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run_cell, RunResult, SimConfig, WindowStat};
use crate::env::OpponentStrategy;
use crate::error::ModelError;
use crate::game::GameParams;
use crate::policy::PolicySpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepAxis {
    pub name: &'static str,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    /// Coordinates of the cell, one per axis.
    pub point: Vec<f64>,
    pub config: SimConfig,
    pub cooperation_index: f64,
    pub received_cooperation_index: f64,
    pub stderr_i: f64,
}

impl SweepCell {
    fn from_run(point: Vec<f64>, run: RunResult) -> Self {
        Self {
            point,
            config: run.config,
            cooperation_index: run.cooperation_index,
            received_cooperation_index: run.received_cooperation_index,
            stderr_i: run.stderr_i,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axes: Vec<SweepAxis>,
    /// Row-major over `axes`: the first axis varies slowest.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    /// Cooperation indices in cell order.
    pub fn indices(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.cooperation_index).collect()
    }
}

fn check_grid(axis: &'static str, grid: &[f64]) -> Result<(), ModelError> {
    if grid.is_empty() {
        return Err(ModelError::EmptyGrid { axis });
    }
    if grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(ModelError::UnorderedGrid { axis });
    }
    Ok(())
}

fn run_cells(configs: Vec<(Vec<f64>, SimConfig)>) -> Result<Vec<SweepCell>, ModelError> {
    configs
        .into_par_iter()
        .enumerate()
        .map(|(i, (point, cfg))| run_cell(&cfg, i as u32).map(|run| SweepCell::from_run(point, run)))
        .collect()
}

/// One batch per value of `b`, everything else fixed.
pub fn sweep_b(base: &SimConfig, b_grid: &[f64]) -> Result<SweepResult, ModelError> {
    check_grid("b", b_grid)?;
    base.validate()?;
    let configs = b_grid
        .iter()
        .map(|&b| {
            let game = GameParams::new(b)?;
            Ok((vec![b], SimConfig { game, ..*base }))
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok(SweepResult {
        axes: vec![SweepAxis { name: "b", values: b_grid.to_vec() }],
        cells: run_cells(configs)?,
    })
}

/// Full `p x q` product, `p` outer.
pub fn sweep_pq(base: &SimConfig, p_grid: &[f64], q_grid: &[f64]) -> Result<SweepResult, ModelError> {
    check_grid("p", p_grid)?;
    check_grid("q", q_grid)?;
    base.validate()?;
    let mut configs = Vec::with_capacity(p_grid.len() * q_grid.len());
    for &p in p_grid {
        for &q in q_grid {
            let strategy = OpponentStrategy::new(p, q)?;
            configs.push((vec![p, q], SimConfig { strategy, ..*base }));
        }
    }
    Ok(SweepResult {
        axes: vec![
            SweepAxis { name: "p", values: p_grid.to_vec() },
            SweepAxis { name: "q", values: q_grid.to_vec() },
        ],
        cells: run_cells(configs)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tuning {
    pub parameter: &'static str,
    pub best_value: f64,
    pub table: SweepResult,
}

/// Grid search over ε (ε-greedy) or `c` (UCB1) at the base point.
///
/// The largest cooperation index wins; equal indices go to the smaller
/// parameter value.
pub fn tune_hyperparameters(base: &SimConfig, grid: &[f64]) -> Result<Tuning, ModelError> {
    let parameter = match base.policy {
        PolicySpec::EpsilonGreedy { .. } => "epsilon",
        PolicySpec::Ucb1 { .. } => "c",
        PolicySpec::ThompsonSampling { .. } => {
            return Err(ModelError::UnsupportedTuning {
                policy: base.policy.name(),
            })
        }
    };
    let make = |v: f64| -> Result<PolicySpec, ModelError> {
        let spec = match base.policy {
            PolicySpec::EpsilonGreedy { start, .. } => PolicySpec::EpsilonGreedy { epsilon: v, start },
            _ => PolicySpec::Ucb1 { c: v },
        };
        spec.validate()?;
        Ok(spec)
    };
    check_grid(parameter, grid)?;
    base.validate()?;
    let configs = grid
        .iter()
        .map(|&v| Ok((vec![v], SimConfig { policy: make(v)?, ..*base })))
        .collect::<Result<Vec<_>, ModelError>>()?;
    let cells = run_cells(configs)?;

    // Grid is increasing, so a strict comparison keeps the smaller value on ties.
    let mut best = &cells[0];
    for cell in &cells[1..] {
        if cell.cooperation_index > best.cooperation_index {
            best = cell;
        }
    }
    Ok(Tuning {
        parameter,
        best_value: best.point[0],
        table: SweepResult {
            axes: vec![SweepAxis { name: parameter, values: grid.to_vec() }],
            cells,
        },
    })
}

/// Windowed policy and received cooperation, in round order.
pub fn time_course(config: &SimConfig) -> Result<Vec<WindowStat>, ModelError> {
    Ok(run_cell(config, 0)?.windows)
}
