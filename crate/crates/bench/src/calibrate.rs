//! Coordinate descent over the simulator knobs against the calibration targets.

use std::collections::BTreeMap;

use log::info;
use planlab::calibration::{estimate, loss, CalibrationProfile, CalibrationStats, CalibrationTargets, Suite, PROFILE_VERSION};
use planlab::simgen::GeneratorConfig;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Candidate values per searched parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub eta0: Vec<f64>,
    pub gamma: Vec<f64>,
    pub goal_pull: Vec<f64>,
    pub avoid_prob: Vec<f64>,
    pub horizon_cells: Vec<usize>,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            eta0: vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.45, 0.6],
            gamma: vec![1.0, 2.0, 3.0, 4.0],
            goal_pull: vec![0.25, 0.35, 0.45, 0.55, 0.7],
            avoid_prob: vec![0.7, 0.8, 0.9, 0.95],
            horizon_cells: vec![8, 9, 10, 11, 12],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub convergence: f64,
    pub refine_diversity: f64,
    pub cross_seed_diversity: f64,
    pub long_horizon_success: f64,
}

impl Residuals {
    pub fn new(stats: &CalibrationStats, targets: &CalibrationTargets) -> Self {
        Residuals {
            convergence: stats.convergence - targets.convergence,
            refine_diversity: stats.refine_diversity - targets.refine_diversity,
            cross_seed_diversity: stats.cross_seed_diversity - targets.cross_seed_diversity,
            long_horizon_success: stats.long_horizon_success - targets.long_horizon_success,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRun {
    pub profile: CalibrationProfile,
    pub stats: CalibrationStats,
    pub loss: f64,
    pub residuals: Residuals,
    /// Distinct parameter points evaluated.
    pub evaluations: usize,
}

const PARAMS: usize = 5;

fn grid_len(grid: &SearchGrid, p: usize) -> usize {
    match p {
        0 => grid.eta0.len(),
        1 => grid.gamma.len(),
        2 => grid.goal_pull.len(),
        3 => grid.avoid_prob.len(),
        _ => grid.horizon_cells.len(),
    }
}

fn apply(base: &GeneratorConfig, grid: &SearchGrid, at: &[usize; PARAMS]) -> GeneratorConfig {
    let mut cfg = base.clone();
    cfg.noise.eta0 = grid.eta0[at[0]];
    cfg.noise.gamma = grid.gamma[at[1]];
    cfg.goal_pull = grid.goal_pull[at[2]];
    cfg.avoid_prob = grid.avoid_prob[at[3]];
    cfg.horizon_cells = grid.horizon_cells[at[4]];
    cfg
}

/// Grid index closest to `value`.
fn nearest<T: Copy>(values: &[T], value: T, dist: impl Fn(T, T) -> f64) -> usize {
    (0..values.len())
        .min_by(|&a, &b| dist(values[a], value).total_cmp(&dist(values[b], value)))
        .unwrap_or(0)
}

/// Coordinate descent from the grid point nearest `start`.
///
/// Each sweep visits the parameters in order and moves one to its best grid
/// value with the others held fixed; ties keep the current value. Stops after
/// a sweep without change or after `max_sweeps`. Non-searched fields keep
/// their values from `start`.
pub fn run_calibration(
    start: &GeneratorConfig,
    grid: &SearchGrid,
    suite: &Suite,
    max_sweeps: usize,
    master_seed: u64,
) -> Result<CalibrationRun> {
    start.validate()?;
    for p in 0..PARAMS {
        if grid_len(grid, p) == 0 {
            return Err(BenchError::Config("calibration grid has an empty axis".into()));
        }
    }
    let abs = |a: f64, b: f64| (a - b).abs();
    let mut at = [
        nearest(&grid.eta0, start.noise.eta0, abs),
        nearest(&grid.gamma, start.noise.gamma, abs),
        nearest(&grid.goal_pull, start.goal_pull, abs),
        nearest(&grid.avoid_prob, start.avoid_prob, abs),
        nearest(&grid.horizon_cells, start.horizon_cells, |a, b| a.abs_diff(b) as f64),
    ];
    let mut cache: BTreeMap<[usize; PARAMS], (f64, CalibrationStats)> = BTreeMap::new();
    let mut eval = |at: [usize; PARAMS]| -> Result<(f64, CalibrationStats)> {
        if let Some(&hit) = cache.get(&at) {
            return Ok(hit);
        }
        let stats = estimate(&apply(start, grid, &at), suite)?;
        let l = loss(&stats, &suite.targets);
        cache.insert(at, (l, stats));
        Ok((l, stats))
    };

    let (mut best, mut best_stats) = eval(at)?;
    for sweep in 0..max_sweeps {
        let mut changed = false;
        for p in 0..PARAMS {
            for v in 0..grid_len(grid, p) {
                let mut trial = at;
                trial[p] = v;
                let (l, stats) = eval(trial)?;
                if l < best {
                    best = l;
                    best_stats = stats;
                    at = trial;
                    changed = true;
                }
            }
        }
        info!("calibration sweep {}: loss {best:.6}", sweep + 1);
        if !changed {
            break;
        }
    }
    let evaluations = cache.len();
    Ok(CalibrationRun {
        profile: CalibrationProfile {
            version: PROFILE_VERSION,
            generator: apply(start, grid, &at),
            targets: suite.targets,
            stats: Some(best_stats),
            master_seed,
        },
        stats: best_stats,
        loss: best,
        residuals: Residuals::new(&best_stats, &suite.targets),
        evaluations,
    })
}
