//! Monte-Carlo estimators for the simulator's target statistics and the
//! versioned calibration profile.

use serde::{Deserialize, Serialize};

use crate::maze::{bfs_distances, generate_maze, GridMaze, Variant};
use crate::metrics::{convergence, trajectory_iou};
use crate::render::{motion_energy, rasterize, EnergyMap, RenderOptions, Scene};
use crate::search::Evaluator;
use crate::seed::{self, tag};
use crate::simgen::{predict_x0, refine_branch, sample_plan, GeneratorConfig, SeedPlan};
use crate::{Error, Result};

const SHIPPED: &str = include_str!("../profiles/default.json");

pub const PROFILE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    /// Mean convergence at step `ceil(probe_fraction * T)`.
    pub convergence: f64,
    pub probe_fraction: f64,
    /// Mean refinement diversity at the first step.
    pub refine_diversity: f64,
    pub cross_seed_diversity: f64,
    /// Single-generation success ceiling once BFS moves reach `long_horizon_moves`.
    pub long_horizon_success: f64,
    pub long_horizon_moves: u32,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            convergence: 0.93,
            probe_fraction: 0.125,
            refine_diversity: 0.25,
            cross_seed_diversity: 0.68,
            long_horizon_success: 0.10,
            long_horizon_moves: 13,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStats {
    pub rollouts: usize,
    pub probe_step: u32,
    pub convergence: f64,
    pub refine_diversity: f64,
    pub cross_seed_diversity: f64,
    /// `1 - IoU` between visited-cell sets of independent seeds.
    pub cross_seed_iou_diversity: f64,
    pub long_horizon_success: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile {
    pub version: u32,
    pub generator: GeneratorConfig,
    pub targets: CalibrationTargets,
    /// Statistics measured when the profile was produced.
    pub stats: Option<CalibrationStats>,
    pub master_seed: u64,
}

impl CalibrationProfile {
    /// The profile bundled with the crate.
    pub fn shipped() -> Self {
        Self::from_json(SHIPPED).expect("bundled calibration profile is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serialisation cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        if p.version != PROFILE_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported profile version {}",
                p.version
            )));
        }
        p.generator.validate()?;
        Ok(p)
    }
}

/// Monte-Carlo settings for [`estimate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub rollouts: usize,
    pub master_seed: u64,
    pub targets: CalibrationTargets,
    pub eval: Evaluator,
}

impl Suite {
    pub fn new(rollouts: usize, master_seed: u64) -> Self {
        Suite {
            rollouts,
            master_seed,
            targets: CalibrationTargets::default(),
            eval: Evaluator::default(),
        }
    }
}

/// Sizes over which cross-seed diversity is averaged.
pub const CROSS_SEED_SIZES: [usize; 4] = [4, 6, 8, 10];

/// Maze for rollout `i`: densities 0.2-0.4, norm and vary layouts.
fn rollout_maze(master: u64, i: usize, size: usize) -> Result<GridMaze> {
    let density = [0.2, 0.3, 0.4][i % 3];
    let variant = if (i / 3).is_multiple_of(2) {
        Variant::Norm
    } else {
        Variant::Vary
    };
    generate_maze(size, density, variant, seed::derive(master, &[tag::CALIBRATION, tag::MAZE, i as u64]))
}

fn small_maze(master: u64, i: usize) -> Result<GridMaze> {
    rollout_maze(master, i, 4)
}

fn plan_seed(master: u64, i: usize, j: u64) -> u64 {
    seed::derive(master, &[tag::CALIBRATION, tag::PLAN, i as u64, j])
}

/// Goal-masked motion energy of a scene, rendered at the evaluator's frame count.
pub fn scene_energy(maze: &GridMaze, scene: &Scene, opts: &RenderOptions) -> Result<EnergyMap> {
    let moves = scene.trajectory.len().saturating_sub(1);
    let frames = opts.frames.max(RenderOptions::frames_for_moves(moves));
    Ok(motion_energy(&rasterize(maze, scene, frames, opts)?, true))
}

fn energy_at(plan: &SeedPlan, maze: &GridMaze, t: u32, cfg: &GeneratorConfig, opts: &RenderOptions) -> Result<EnergyMap> {
    let pred = predict_x0(plan, maze, t, cfg, 0)?;
    scene_energy(maze, &Scene::from_prediction(&pred, maze), opts)
}

fn mean_of(values: impl Iterator<Item = Result<f64>>) -> Result<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v?;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyInput("no rollouts".into()));
    }
    Ok(sum / n as f64)
}

/// Mean convergence of the step-`t` estimate to the final video.
pub fn convergence_at(cfg: &GeneratorConfig, t: u32, suite: &Suite) -> Result<f64> {
    let opts = &suite.eval.render;
    mean_of((0..suite.rollouts).map(|i| {
        let maze = small_maze(suite.master_seed, i)?;
        let plan = sample_plan(&maze, plan_seed(suite.master_seed, i, 0), cfg);
        let e_t = energy_at(&plan, &maze, t, cfg, opts)?;
        let e_final = energy_at(&plan, &maze, cfg.steps(), cfg, opts)?;
        convergence(&e_t, &e_final)
    }))
}

/// Mean per-step convergence curve, `curve[t - 1]` for `t = 1..=T`.
pub fn convergence_curve(cfg: &GeneratorConfig, suite: &Suite) -> Result<Vec<f64>> {
    (1..=cfg.steps()).map(|t| convergence_at(cfg, t, suite)).collect()
}

/// Mean diversity between `k` branches re-noised at `t_branch` and the
/// original final video.
pub fn refinement_diversity(cfg: &GeneratorConfig, t_branch: u32, k: usize, suite: &Suite) -> Result<f64> {
    let opts = &suite.eval.render;
    mean_of((0..suite.rollouts).map(|i| {
        let maze = small_maze(suite.master_seed, i)?;
        let plan = sample_plan(&maze, plan_seed(suite.master_seed, i, 0), cfg);
        let e_final = energy_at(&plan, &maze, cfg.steps(), cfg, opts)?;
        let branches = refine_branch(&plan, &maze, t_branch, k, cfg, i as u64)?;
        mean_of(branches.iter().map(|b| {
            let e = energy_at(b, &maze, cfg.steps(), cfg, opts)?;
            Ok(1.0 - convergence(&e, &e_final)?)
        }))
    }))
}

/// Mean `(1 - C, 1 - IoU)` between final videos of two independent seeds,
/// over mazes of sizes [`CROSS_SEED_SIZES`].
pub fn cross_seed_diversity(cfg: &GeneratorConfig, suite: &Suite) -> Result<(f64, f64)> {
    let opts = &suite.eval.render;
    let mut pairs = Vec::with_capacity(suite.rollouts);
    for i in 0..suite.rollouts {
        let size = CROSS_SEED_SIZES[(i / 6) % CROSS_SEED_SIZES.len()];
        let maze = rollout_maze(suite.master_seed, i, size)?;
        let a = sample_plan(&maze, plan_seed(suite.master_seed, i, 1), cfg);
        let b = sample_plan(&maze, plan_seed(suite.master_seed, i, 2), cfg);
        let ea = energy_at(&a, &maze, cfg.steps(), cfg, opts)?;
        let eb = energy_at(&b, &maze, cfg.steps(), cfg, opts)?;
        let pa = predict_x0(&a, &maze, cfg.steps(), cfg, 0)?.trajectory;
        let pb = predict_x0(&b, &maze, cfg.steps(), cfg, 0)?.trajectory;
        pairs.push((1.0 - convergence(&ea, &eb)?, 1.0 - trajectory_iou(&pa, &pb)?));
    }
    let n = pairs.len().max(1) as f64;
    Ok((
        pairs.iter().map(|p| p.0).sum::<f64>() / n,
        pairs.iter().map(|p| p.1).sum::<f64>() / n,
    ))
}

/// Mazes of size 8-10 whose shortest path has at least `min_moves` moves.
pub fn long_horizon_mazes(count: usize, min_moves: u32, master: u64) -> Result<Vec<GridMaze>> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        if i > 1000 * count as u64 + 1000 {
            return Err(Error::GenerationFailed {
                retries: i as usize,
                reason: format!("too few mazes with >= {min_moves} moves"),
            });
        }
        let size = [8, 10][(i % 2) as usize];
        let density = [0.2, 0.3, 0.4][((i / 2) % 3) as usize];
        let variant = if (i / 6).is_multiple_of(2) {
            Variant::Norm
        } else {
            Variant::Vary
        };
        let maze = generate_maze(size, density, variant, seed::derive(master, &[tag::CALIBRATION, tag::CORPUS, i]))?;
        i += 1;
        let d = bfs_distances(&maze, maze.goal())[maze.index(maze.start())];
        if d.is_some_and(|d| d >= min_moves) {
            out.push(maze);
        }
    }
    Ok(out)
}

/// Single-generation success rate on long-horizon mazes.
pub fn long_horizon_success(cfg: &GeneratorConfig, suite: &Suite) -> Result<f64> {
    let mazes = long_horizon_mazes(suite.rollouts, suite.targets.long_horizon_moves, suite.master_seed)?;
    let hits = mazes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let plan = sample_plan(m, plan_seed(suite.master_seed, i, 3), cfg);
            Ok(suite.eval.complete(m, &plan, 0, 0, cfg)?.0.verdict.success)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
}

/// All four target statistics.
pub fn estimate(cfg: &GeneratorConfig, suite: &Suite) -> Result<CalibrationStats> {
    cfg.validate()?;
    let probe_step = cfg.schedule.step_at(suite.targets.probe_fraction);
    let (cross, cross_iou) = cross_seed_diversity(cfg, suite)?;
    Ok(CalibrationStats {
        rollouts: suite.rollouts,
        probe_step,
        convergence: convergence_at(cfg, probe_step, suite)?,
        refine_diversity: refinement_diversity(cfg, 1, 5, suite)?,
        cross_seed_diversity: cross,
        cross_seed_iou_diversity: cross_iou,
        long_horizon_success: long_horizon_success(cfg, suite)?,
    })
}

/// Squared deviation from the targets; the success ceiling only counts when exceeded.
pub fn loss(stats: &CalibrationStats, targets: &CalibrationTargets) -> f64 {
    let over = (stats.long_horizon_success - targets.long_horizon_success).max(0.0);
    let over_refine = (stats.refine_diversity - targets.refine_diversity).max(0.0);
    (stats.convergence - targets.convergence).powi(2)
        + over_refine.powi(2)
        + (stats.cross_seed_diversity - targets.cross_seed_diversity).powi(2)
        + over.powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_profile_round_trips() {
        let p = CalibrationProfile::shipped();
        assert_eq!(CalibrationProfile::from_json(&p.to_json()).unwrap(), p);
        assert_eq!(GeneratorConfig::default(), p.generator);
        let bad = p.to_json().replace("\"version\": 1", "\"version\": 9");
        assert!(CalibrationProfile::from_json(&bad).is_err());
    }

    #[test]
    fn noiseless_limit() {
        let mut cfg = GeneratorConfig::default();
        cfg.noise.eta0 = 0.0;
        cfg.commit_floor = 1.0;
        let suite = Suite::new(20, 3);
        assert!((convergence_at(&cfg, 1, &suite).unwrap() - 1.0).abs() < 1e-12);
        assert!(refinement_diversity(&cfg, 1, 3, &suite).unwrap().abs() < 1e-12);
    }

    #[test]
    fn loss_zero_at_targets() {
        let t = CalibrationTargets::default();
        let s = CalibrationStats {
            rollouts: 1,
            probe_step: 5,
            convergence: t.convergence,
            refine_diversity: 0.1,
            cross_seed_diversity: t.cross_seed_diversity,
            cross_seed_iou_diversity: 0.5,
            long_horizon_success: 0.0,
        };
        assert_eq!(loss(&s, &t), 0.0);
    }

    #[test]
    fn long_horizon_mazes_meet_threshold() {
        for m in long_horizon_mazes(10, 13, 1).unwrap() {
            let d = bfs_distances(&m, m.goal())[m.index(m.start())].unwrap();
            assert!(d >= 13);
        }
    }
}
