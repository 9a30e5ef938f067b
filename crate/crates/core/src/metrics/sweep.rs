//! Parameter sweeps: run the full simulation for every (value, seed) pair
//! and aggregate satisfied ratios and reward statistics per value.
//!
//! Cells are completely independent (each run owns its seed and its state),
//! so with the `parallel` feature they execute on the rayon pool; the
//! sequential path is always available and produces identical output.

use serde::Serialize;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::currency::Currency;
use crate::sim::{run_simulation, ConfigError, SimConfig, SimResult};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("sweep output failed: {0}")]
    Io(#[from] std::io::Error),
}

/// The parameters a sweep may vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    MinPersons,
    NumAgents,
    FreshnessWindow,
}

impl SweepParam {
    pub const ALL: [SweepParam; 3] = [
        SweepParam::MinPersons,
        SweepParam::NumAgents,
        SweepParam::FreshnessWindow,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SweepParam::MinPersons => "min_persons",
            SweepParam::NumAgents => "num_agents",
            SweepParam::FreshnessWindow => "freshness_window",
        }
    }

    pub fn parse(s: &str) -> Option<SweepParam> {
        Self::ALL.into_iter().find(|p| p.key() == s)
    }
}

impl std::fmt::Display for SweepParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

/// Returns a copy of `template` with the swept parameter overridden.
/// Zone-level parameters apply to every zone.
pub fn apply_param(template: &SimConfig, param: SweepParam, value: u64) -> SimConfig {
    let mut cfg = template.clone();
    match param {
        SweepParam::MinPersons => {
            for zone in &mut cfg.zones {
                zone.min_persons = value as u32;
            }
        }
        SweepParam::NumAgents => cfg.num_agents = value as usize,
        SweepParam::FreshnessWindow => {
            for zone in &mut cfg.zones {
                zone.freshness_window = value;
            }
        }
    }
    cfg
}

/// Aggregates of one simulation run within a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct CellOutcome {
    pub value: u64,
    pub seed: u64,
    pub satisfied_ratio: f64,
    pub mean_reward_milli: f64,
    pub p90_reward: Currency,
    pub total_paid: Currency,
}

/// One aggregated sweep row (one swept value, statistics across seeds).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: String,
    pub value: u64,
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub seeds: usize,
    pub mean_reward_milli: f64,
    pub mean_p90_reward_milli: f64,
    pub min_reward_milli: f64,
    pub max_reward_milli: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub cells: Vec<CellOutcome>,
}

fn run_cell<F>(
    template: &SimConfig,
    param: SweepParam,
    value: u64,
    seed: u64,
    sink: &F,
) -> Result<CellOutcome, SweepError>
where
    F: Fn(&CellOutcome, &SimResult) -> Result<(), SweepError> + Sync,
{
    let mut cfg = apply_param(template, param, value);
    cfg.rng_seed = seed;
    let result = run_simulation(&cfg)?;
    let outcome = CellOutcome {
        value,
        seed,
        satisfied_ratio: result.overall_satisfied_ratio(),
        mean_reward_milli: result.mean_reward_milli(),
        p90_reward: result.p90_reward(),
        total_paid: result.total_paid_by_zones(),
    };
    sink(&outcome, &result)?;
    Ok(outcome)
}

fn validate_sweep_args(values: &[u64], seeds: &[u64]) -> Result<(), SweepError> {
    if values.is_empty() {
        return Err(ConfigError::Invalid {
            key: "values".into(),
            reason: "sweep needs at least one value".into(),
        }
        .into());
    }
    if seeds.is_empty() {
        return Err(ConfigError::Invalid {
            key: "seeds".into(),
            reason: "sweep needs at least one seed".into(),
        }
        .into());
    }
    Ok(())
}

fn aggregate(param: SweepParam, values: &[u64], cells: Vec<CellOutcome>) -> SweepOutput {
    let rows = values
        .iter()
        .map(|&value| {
            let group: Vec<&CellOutcome> = cells.iter().filter(|c| c.value == value).collect();
            let n = group.len() as f64;
            let ratios: Vec<f64> = group.iter().map(|c| c.satisfied_ratio).collect();
            let rewards: Vec<f64> = group.iter().map(|c| c.mean_reward_milli).collect();
            SweepRow {
                param: param.key().to_string(),
                value,
                mean_ratio: ratios.iter().sum::<f64>() / n,
                min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
                max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                seeds: group.len(),
                mean_reward_milli: rewards.iter().sum::<f64>() / n,
                mean_p90_reward_milli: group.iter().map(|c| c.p90_reward.milli() as f64).sum::<f64>()
                    / n,
                min_reward_milli: rewards.iter().copied().fold(f64::INFINITY, f64::min),
                max_reward_milli: rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    SweepOutput { rows, cells }
}

fn cell_list(values: &[u64], seeds: &[u64]) -> Vec<(u64, u64)> {
    values
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect()
}

/// Runs the sweep, invoking `sink` once per finished cell (cells may run
/// concurrently; each sink call receives a distinct cell).
pub fn sweep_with<F>(
    template: &SimConfig,
    param: SweepParam,
    values: &[u64],
    seeds: &[u64],
    sink: &F,
) -> Result<SweepOutput, SweepError>
where
    F: Fn(&CellOutcome, &SimResult) -> Result<(), SweepError> + Sync,
{
    validate_sweep_args(values, seeds)?;
    let cells = cell_list(values, seeds);
    #[cfg(feature = "parallel")]
    let outcomes: Result<Vec<CellOutcome>, SweepError> = cells
        .par_iter()
        .map(|&(value, seed)| run_cell(template, param, value, seed, sink))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Result<Vec<CellOutcome>, SweepError> = cells
        .iter()
        .map(|&(value, seed)| run_cell(template, param, value, seed, sink))
        .collect();
    Ok(aggregate(param, values, outcomes?))
}

/// Sequential twin of `sweep_with`, available regardless of features; the
/// benchmark suite compares the two.
pub fn sweep_with_sequential<F>(
    template: &SimConfig,
    param: SweepParam,
    values: &[u64],
    seeds: &[u64],
    sink: &F,
) -> Result<SweepOutput, SweepError>
where
    F: Fn(&CellOutcome, &SimResult) -> Result<(), SweepError> + Sync,
{
    validate_sweep_args(values, seeds)?;
    let outcomes: Result<Vec<CellOutcome>, SweepError> = cell_list(values, seeds)
        .iter()
        .map(|&(value, seed)| run_cell(template, param, value, seed, sink))
        .collect();
    Ok(aggregate(param, values, outcomes?))
}

pub fn sweep(
    template: &SimConfig,
    param: SweepParam,
    values: &[u64],
    seeds: &[u64],
) -> Result<SweepOutput, SweepError> {
    sweep_with(template, param, values, seeds, &|_, _| Ok(()))
}

pub fn sweep_sequential(
    template: &SimConfig,
    param: SweepParam,
    values: &[u64],
    seeds: &[u64],
) -> Result<SweepOutput, SweepError> {
    sweep_with_sequential(template, param, values, seeds, &|_, _| Ok(()))
}
