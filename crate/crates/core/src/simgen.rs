//! Stochastic denoising simulator standing in for a video generator.
//!
//! Each seed owns a latent route (a goal-biased random walk through the maze)
//! that is fixed from the first step. Intermediate clean-sample estimates at
//! step `t` show that route with per-cell neighbour noise whose rate anneals to
//! zero at `t = T`. Refinement re-noises at a step, keeps the committed prefix
//! and resamples the rest. Under horizon pressure (shortest path longer than
//! the generation window) a seed may cheat by dragging the goal toward the
//! agent or by spawning a second agent next to the goal.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::maze::{bfs_distances, manhattan, Cell, GridMaze};
use crate::seed::{self, tag};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenoiseSchedule {
    pub steps: u32,
}

impl DenoiseSchedule {
    pub fn check_step(&self, t: u32) -> Result<()> {
        if (1..=self.steps).contains(&t) {
            Ok(())
        } else {
            Err(Error::StepOutOfRange {
                step: t,
                steps: self.steps,
            })
        }
    }

    /// Step `ceil(fraction * T)`, at least 1.
    pub fn step_at(&self, fraction: f64) -> u32 {
        ((fraction * self.steps as f64).ceil() as u32).clamp(1, self.steps)
    }
}

/// Per-cell perturbation rate `eta(t) = eta0 * (1 - t/T)^gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseCurve {
    pub eta0: f64,
    pub gamma: f64,
}

impl NoiseCurve {
    pub fn rate(&self, t: u32, steps: u32) -> f64 {
        let remaining = 1.0 - t as f64 / steps as f64;
        (self.eta0 * remaining.max(0.0).powf(self.gamma)).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub schedule: DenoiseSchedule,
    /// Fraction of the schedule after which the whole route is committed.
    pub commit_fraction: f64,
    /// Fraction of the route already committed at the first step.
    pub commit_floor: f64,
    pub noise: NoiseCurve,
    /// Maximum moves the agent can make in one generation.
    pub horizon_cells: usize,
    pub goal_pull: f64,
    pub avoid_prob: f64,
    pub cheat_goal_drift_prob: f64,
    pub cheat_spawn_prob: f64,
    pub degenerate_prob: f64,
    /// Log-scale spread of per-cell dwell times; 0 walks at constant speed.
    pub pace_jitter: f64,
    /// Upper bound on mean refinement diversity the profile was calibrated to.
    pub refine_diversity_ceiling: f64,
}

impl Default for GeneratorConfig {
    /// The shipped calibration profile.
    fn default() -> Self {
        crate::calibration::CalibrationProfile::shipped().generator
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("commit_fraction", self.commit_fraction),
            ("commit_floor", self.commit_floor),
            ("eta0", self.noise.eta0),
            ("goal_pull", self.goal_pull),
            ("avoid_prob", self.avoid_prob),
            ("cheat_goal_drift_prob", self.cheat_goal_drift_prob),
            ("cheat_spawn_prob", self.cheat_spawn_prob),
            ("degenerate_prob", self.degenerate_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.cheat_goal_drift_prob + self.cheat_spawn_prob > 1.0 {
            return Err(Error::InvalidArgument("cheat probabilities sum above 1".into()));
        }
        if self.schedule.steps == 0 {
            return Err(Error::InvalidArgument("schedule needs at least one step".into()));
        }
        if !(0.0..=5.0).contains(&self.pace_jitter) {
            return Err(Error::InvalidArgument(format!("pace_jitter = {} outside [0, 5]", self.pace_jitter)));
        }
        if self.horizon_cells == 0 {
            return Err(Error::InvalidArgument("horizon must be at least one cell".into()));
        }
        if !(self.noise.gamma >= 0.0) || self.commit_fraction <= 0.0 {
            return Err(Error::InvalidArgument("gamma must be >= 0 and commit_fraction > 0".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> u32 {
        self.schedule.steps
    }

    pub fn noise_rate(&self, t: u32) -> f64 {
        self.noise.rate(t, self.schedule.steps)
    }

    /// Fraction of the route fixed once denoising has reached step `t`.
    pub fn committed_fraction(&self, t: u32) -> f64 {
        let progress = t as f64 / self.schedule.steps as f64;
        let ramp = (progress / self.commit_fraction).min(1.0);
        self.commit_floor + (1.0 - self.commit_floor) * ramp
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialisation cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cheat {
    None,
    GoalDrift { new_goal: Cell },
    AgentSpawn { spawn: Cell },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub seed: u64,
    /// The route the agent executes, including the step onto a drifted goal.
    pub route: Vec<Cell>,
    /// Relative time the agent lingers on each route cell.
    pub pace: Vec<f64>,
    /// Rank of each direction (up, down, left, right) when greedy moves tie.
    pub heading: [u8; 4],
    pub cheat: Cheat,
    pub degenerate: bool,
}

impl SeedPlan {
    /// Route without the cheat step onto a drifted goal.
    fn walk_route(&self) -> &[Cell] {
        match self.cheat {
            Cheat::GoalDrift { .. } => &self.route[..self.route.len() - 1],
            _ => &self.route,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntermediatePrediction {
    pub step: u32,
    pub trajectory: Vec<Cell>,
    pub pace: Vec<f64>,
    pub is_final: bool,
    pub cheat: Cheat,
}

/// A fully denoised sample with its cheat effects and the NFEs it cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalSample {
    pub prediction: IntermediatePrediction,
    pub goal_drift: Option<Cell>,
    pub spawn_fragment: Option<Vec<Cell>>,
    pub nfe_cost: u32,
}

/// Commutative NFE accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NfeLedger {
    total: u64,
}

impl NfeLedger {
    pub fn charge(&mut self, nfe: u64) {
        self.total += nfe;
    }

    pub fn merge(self, other: NfeLedger) -> NfeLedger {
        NfeLedger {
            total: self.total + other.total,
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

impl std::iter::Sum for NfeLedger {
    fn sum<I: Iterator<Item = NfeLedger>>(iter: I) -> Self {
        iter.fold(NfeLedger::default(), NfeLedger::merge)
    }
}

/// Sample the latent route of `seed` on `maze`.
pub fn sample_plan(maze: &GridMaze, seed: u64, cfg: &GeneratorConfig) -> SeedPlan {
    let mut rng = seed::rng(seed, &[tag::PLAN]);
    let degenerate_roll: f64 = rng.gen();
    let cheat_roll: f64 = rng.gen();
    let mut heading = [0u8, 1, 2, 3];
    heading.shuffle(&mut rng);
    let start = maze.start();
    if degenerate_roll < cfg.degenerate_prob {
        return SeedPlan {
            seed,
            route: vec![start],
            pace: vec![1.0],
            heading,
            cheat: Cheat::None,
            degenerate: true,
        };
    }
    let to_goal = bfs_distances(maze, maze.goal());
    let mut route = walk(maze, &to_goal, vec![start], heading, cfg, &mut rng);
    let pressure = to_goal[maze.index(start)].is_none_or(|d| d as usize > cfg.horizon_cells);
    let cheat = if !pressure {
        Cheat::None
    } else if cheat_roll < cfg.cheat_goal_drift_prob {
        let new_goal = drift_target(maze, *route.last().unwrap());
        route.push(new_goal);
        Cheat::GoalDrift { new_goal }
    } else if cheat_roll < cfg.cheat_goal_drift_prob + cfg.cheat_spawn_prob {
        Cheat::AgentSpawn {
            spawn: spawn_cell(maze),
        }
    } else {
        Cheat::None
    };
    let pace = draw_pace(route.len(), cfg, &mut seed::rng(seed, &[tag::PACE]));
    SeedPlan {
        seed,
        route,
        pace,
        heading,
        cheat,
        degenerate: false,
    }
}

/// Log-normal dwell weights with log-scale `pace_jitter`.
fn draw_pace(n: usize, cfg: &GeneratorConfig, rng: &mut seed::Rng) -> Vec<f64> {
    let dist = LogNormal::new(0.0, cfg.pace_jitter).expect("validated pace_jitter");
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Extend `route` with goal-biased lazy-walk steps until the goal or the horizon.
fn walk(
    maze: &GridMaze,
    to_goal: &[Option<u32>],
    mut route: Vec<Cell>,
    heading: [u8; 4],
    cfg: &GeneratorConfig,
    rng: &mut seed::Rng,
) -> Vec<Cell> {
    let size = maze.size();
    let goal = maze.goal();
    let mut options = Vec::with_capacity(4);
    while route.len() <= cfg.horizon_cells {
        let cur = *route.last().unwrap();
        if cur == goal {
            break;
        }
        let greedy = rng.gen::<f64>() < cfg.goal_pull;
        let may_enter = rng.gen::<f64>() >= cfg.avoid_prob;

        let mut allowed: Vec<Cell> = cur
            .neighbors(size)
            .filter(|&n| may_enter || maze.is_open(n))
            .collect();
        if allowed.is_empty() {
            allowed = cur.neighbors(size).collect();
        }
        options.clear();
        if greedy {
            if !may_enter {
                // Descend the obstacle-aware distance field.
                let best = allowed
                    .iter()
                    .filter_map(|&n| to_goal[maze.index(n)])
                    .min();
                let here = to_goal[maze.index(cur)];
                if let Some(b) = best.filter(|&b| here.is_none_or(|h| b < h)) {
                    options.extend(allowed.iter().filter(|&&n| to_goal[maze.index(n)] == Some(b)));
                }
            }
            if options.is_empty() {
                // Beeline: straight toward the goal, obstacles permitting.
                let d = manhattan(cur, goal);
                options.extend(allowed.iter().filter(|&&n| manhattan(n, goal) < d));
            }
        }
        if options.is_empty() {
            options.extend_from_slice(&allowed);
            route.push(options[rng.gen_range(0..options.len())]);
        } else {
            let rank = |n: &Cell| heading[direction(cur, *n)];
            route.push(*options.iter().min_by_key(|n| rank(n)).unwrap());
        }
    }
    route
}

/// Index of the move `from -> to` in up, down, left, right order.
fn direction(from: Cell, to: Cell) -> usize {
    match (to.row.cmp(&from.row), to.col.cmp(&from.col)) {
        (std::cmp::Ordering::Less, _) => 0,
        (std::cmp::Ordering::Greater, _) => 1,
        (_, std::cmp::Ordering::Less) => 2,
        _ => 3,
    }
}

fn drift_target(maze: &GridMaze, end: Cell) -> Cell {
    let goal = maze.goal();
    let pick = |open_only: bool| {
        end.neighbors(maze.size())
            .filter(|&n| !open_only || maze.is_open(n))
            .min_by_key(|&n| manhattan(n, goal))
    };
    pick(true).or_else(|| pick(false)).unwrap_or(end)
}

fn spawn_cell(maze: &GridMaze) -> Cell {
    let goal = maze.goal();
    goal.neighbors(maze.size())
        .find(|&n| maze.is_open(n))
        .or_else(|| goal.neighbors(maze.size()).next())
        .unwrap_or(goal)
}

/// The simulator's clean-sample estimate at step `t`.
///
/// Every cell after the first is replaced by a uniformly random in-grid
/// neighbour with probability `eta(t)`; the first cell is pinned by the
/// conditioning frame. The noise stream is keyed by `(plan.seed, noise_seed, t)`.
pub fn predict_x0(
    plan: &SeedPlan,
    maze: &GridMaze,
    t: u32,
    cfg: &GeneratorConfig,
    noise_seed: u64,
) -> Result<IntermediatePrediction> {
    cfg.schedule.check_step(t)?;
    let eta = cfg.noise_rate(t);
    let mut rng = seed::rng(plan.seed, &[tag::NOISE, noise_seed, t as u64]);
    let size = maze.size();
    let trajectory = plan
        .route
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if i == 0 || eta <= 0.0 || rng.gen::<f64>() >= eta {
                return c;
            }
            let nbrs: Vec<Cell> = c.neighbors(size).collect();
            nbrs[rng.gen_range(0..nbrs.len())]
        })
        .collect();
    Ok(IntermediatePrediction {
        step: t,
        trajectory,
        pace: plan.pace.clone(),
        is_final: t == cfg.steps(),
        cheat: plan.cheat,
    })
}

/// Re-noise `plan` at `t_branch` and resample `k` continuations.
///
/// Branches keep the committed prefix (see [`GeneratorConfig::committed_fraction`])
/// and redraw the remainder of the walk from a fresh stream.
pub fn refine_branch(
    plan: &SeedPlan,
    maze: &GridMaze,
    t_branch: u32,
    k: usize,
    cfg: &GeneratorConfig,
    seed: u64,
) -> Result<Vec<SeedPlan>> {
    cfg.schedule.check_step(t_branch)?;
    if k == 0 {
        return Err(Error::InvalidArgument("refine_branch needs k >= 1".into()));
    }
    let base = plan.walk_route();
    let keep = committed_len(base.len(), cfg.committed_fraction(t_branch));
    let to_goal = bfs_distances(maze, maze.goal());

    Ok((0..k as u64)
        .map(|i| {
            let branch_seed = seed::derive(plan.seed, &[tag::BRANCH, seed, i]);
            if plan.degenerate || keep >= base.len() {
                return SeedPlan {
                    seed: branch_seed,
                    ..plan.clone()
                };
            }
            let mut rng = seed::rng(branch_seed, &[tag::PLAN]);
            let mut route = walk(maze, &to_goal, base[..keep].to_vec(), plan.heading, cfg, &mut rng);
            let mut pace = plan.pace[..keep].to_vec();
            let cheat = match plan.cheat {
                Cheat::GoalDrift { .. } => {
                    let new_goal = drift_target(maze, *route.last().unwrap());
                    route.push(new_goal);
                    Cheat::GoalDrift { new_goal }
                }
                other => other,
            };
            let mut pace_rng = seed::rng(branch_seed, &[tag::PACE]);
            pace.extend(draw_pace(route.len() - keep, cfg, &mut pace_rng));
            SeedPlan {
                seed: branch_seed,
                route,
                pace,
                heading: plan.heading,
                cheat,
                degenerate: false,
            }
        })
        .collect())
}

/// Number of route cells shared with the parent when a fraction is committed.
pub fn committed_len(route_len: usize, fraction: f64) -> usize {
    if route_len == 0 {
        return 0;
    }
    let moves = route_len - 1;
    1 + ((fraction.clamp(0.0, 1.0) * moves as f64).round() as usize).min(moves)
}

/// Run the remaining schedule after `probed_steps` steps and materialise cheats.
pub fn full_denoise(
    plan: &SeedPlan,
    maze: &GridMaze,
    cfg: &GeneratorConfig,
    probed_steps: u32,
) -> Result<FinalSample> {
    let steps = cfg.steps();
    if probed_steps > steps {
        return Err(Error::StepOutOfRange {
            step: probed_steps,
            steps,
        });
    }
    let prediction = predict_x0(plan, maze, steps, cfg, 0)?;
    let (goal_drift, spawn_fragment) = match plan.cheat {
        Cheat::None => (None, None),
        Cheat::GoalDrift { new_goal } => (Some(new_goal), None),
        Cheat::AgentSpawn { spawn } => (None, Some(vec![spawn, maze.goal()])),
    };
    Ok(FinalSample {
        prediction,
        goal_drift,
        spawn_fragment,
        nfe_cost: steps - probed_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::{bfs_shortest_path, generate_maze, Variant};

    fn cfg() -> GeneratorConfig {
        GeneratorConfig {
            schedule: DenoiseSchedule { steps: 40 },
            commit_fraction: 0.25,
            commit_floor: 0.6,
            noise: NoiseCurve {
                eta0: 0.6,
                gamma: 3.0,
            },
            horizon_cells: 10,
            goal_pull: 0.7,
            avoid_prob: 0.95,
            cheat_goal_drift_prob: 0.3,
            cheat_spawn_prob: 0.1,
            degenerate_prob: 0.05,
            pace_jitter: 0.5,
            refine_diversity_ceiling: 0.25,
        }
    }

    fn is_shortest(m: &GridMaze, route: &[Cell]) -> bool {
        let l = bfs_shortest_path(m).unwrap().moves();
        route.len() == l + 1
            && route[0] == m.start()
            && *route.last().unwrap() == m.goal()
            && route.windows(2).all(|w| w[0].is_adjacent(w[1]))
            && route.iter().all(|&c| m.is_open(c))
    }

    #[test]
    fn greedy_limit_follows_a_shortest_path() {
        let c = GeneratorConfig {
            goal_pull: 1.0,
            avoid_prob: 1.0,
            degenerate_prob: 0.0,
            ..cfg()
        };
        for s in 0..50 {
            let m = generate_maze(5, 0.3, Variant::Vary, s).unwrap();
            if bfs_shortest_path(&m).unwrap().moves() > c.horizon_cells {
                continue;
            }
            let plan = sample_plan(&m, s * 31 + 1, &c);
            assert!(is_shortest(&m, &plan.route), "seed {s}: {:?}", plan.route);
        }
    }

    #[test]
    fn forced_degenerate_is_static() {
        let c = GeneratorConfig {
            degenerate_prob: 1.0,
            ..cfg()
        };
        let m = generate_maze(4, 0.3, Variant::Norm, 1).unwrap();
        let plan = sample_plan(&m, 5, &c);
        assert_eq!(plan.route, vec![m.start()]);
        assert!(plan.degenerate);
    }

    #[test]
    fn plans_are_deterministic() {
        let m = generate_maze(6, 0.3, Variant::Norm, 2).unwrap();
        let a = sample_plan(&m, 77, &cfg());
        assert_eq!(a, sample_plan(&m, 77, &cfg()));
        let pa = predict_x0(&a, &m, 5, &cfg(), 3).unwrap();
        assert_eq!(pa, predict_x0(&a, &m, 5, &cfg(), 3).unwrap());
    }

    #[test]
    fn final_step_is_noise_free() {
        let m = generate_maze(6, 0.3, Variant::Norm, 2).unwrap();
        for s in 0..30 {
            let plan = sample_plan(&m, s, &cfg());
            let p = predict_x0(&plan, &m, 40, &cfg(), 9).unwrap();
            assert!(p.is_final);
            assert_eq!(p.trajectory, plan.route);
            let f = full_denoise(&plan, &m, &cfg(), 0).unwrap();
            assert_eq!(f.prediction, p);
            assert_eq!(f.nfe_cost, 40);
        }
    }

    #[test]
    fn noiseless_curve_reproduces_route_everywhere() {
        let c = GeneratorConfig {
            noise: NoiseCurve {
                eta0: 0.0,
                gamma: 3.0,
            },
            ..cfg()
        };
        let m = generate_maze(5, 0.2, Variant::Norm, 4).unwrap();
        let plan = sample_plan(&m, 8, &c);
        for t in 1..=40 {
            assert_eq!(predict_x0(&plan, &m, t, &c, 0).unwrap().trajectory, plan.route);
        }
    }

    #[test]
    fn step_range_is_checked() {
        let m = generate_maze(4, 0.0, Variant::Norm, 0).unwrap();
        let plan = sample_plan(&m, 0, &cfg());
        assert!(predict_x0(&plan, &m, 0, &cfg(), 0).is_err());
        assert!(predict_x0(&plan, &m, 41, &cfg(), 0).is_err());
        assert!(refine_branch(&plan, &m, 0, 1, &cfg(), 0).is_err());
        assert!(full_denoise(&plan, &m, &cfg(), 41).is_err());
    }

    #[test]
    fn probe_then_complete_costs_full_schedule() {
        let m = generate_maze(4, 0.0, Variant::Norm, 0).unwrap();
        let plan = sample_plan(&m, 0, &cfg());
        let probe_cost = 5;
        let f = full_denoise(&plan, &m, &cfg(), probe_cost).unwrap();
        let mut ledger = NfeLedger::default();
        ledger.charge(probe_cost as u64);
        ledger.charge(f.nfe_cost as u64);
        assert_eq!(ledger.total(), 40);
    }

    #[test]
    fn horizon_bounds_routes_without_cheats() {
        let c = GeneratorConfig {
            cheat_goal_drift_prob: 0.0,
            cheat_spawn_prob: 0.0,
            ..cfg()
        };
        for s in 0..200 {
            let m = generate_maze(10, 0.2, Variant::Norm, s % 7).unwrap();
            let plan = sample_plan(&m, s, &c);
            assert!(plan.route.len() <= c.horizon_cells + 1);
            assert_eq!(plan.cheat, Cheat::None);
        }
    }

    #[test]
    fn cheats_only_under_horizon_pressure() {
        let c = GeneratorConfig {
            cheat_goal_drift_prob: 0.5,
            cheat_spawn_prob: 0.5,
            ..cfg()
        };
        let short = generate_maze(4, 0.0, Variant::Norm, 0).unwrap();
        let long = generate_maze(10, 0.0, Variant::Norm, 0).unwrap();
        let mut drifts = 0;
        for s in 0..100 {
            assert_eq!(sample_plan(&short, s, &c).cheat, Cheat::None);
            let plan = sample_plan(&long, s, &c);
            match plan.cheat {
                Cheat::GoalDrift { new_goal } => {
                    drifts += 1;
                    assert_eq!(*plan.route.last().unwrap(), new_goal);
                    let end = plan.route[plan.route.len() - 2];
                    assert!(end.is_adjacent(new_goal));
                    let f = full_denoise(&plan, &long, &c, 0).unwrap();
                    assert_eq!(f.goal_drift, Some(new_goal));
                }
                Cheat::AgentSpawn { spawn } => {
                    assert!(spawn.is_adjacent(long.goal()));
                    let f = full_denoise(&plan, &long, &c, 0).unwrap();
                    assert_eq!(f.spawn_fragment, Some(vec![spawn, long.goal()]));
                }
                Cheat::None => {}
            }
        }
        assert!(drifts > 0);
    }

    #[test]
    fn branches_share_committed_prefix() {
        let m = generate_maze(6, 0.2, Variant::Norm, 3).unwrap();
        let c = cfg();
        for s in 0..40 {
            let plan = sample_plan(&m, s, &c);
            for t in [1, 5, 10, 40] {
                let keep = committed_len(plan.walk_route().len(), c.committed_fraction(t));
                for b in refine_branch(&plan, &m, t, 5, &c, 11).unwrap() {
                    assert_eq!(b.route[..keep], plan.route[..keep]);
                    if t == 40 {
                        assert_eq!(b.route, plan.route);
                    }
                }
            }
        }
    }

    #[test]
    fn annealing_reduces_expected_distance() {
        let m = generate_maze(8, 0.2, Variant::Norm, 1).unwrap();
        let c = cfg();
        let plan = sample_plan(&m, 12, &c);
        let mean_err = |t: u32| {
            (0..400u64)
                .map(|n| {
                    let p = predict_x0(&plan, &m, t, &c, n).unwrap();
                    p.trajectory
                        .iter()
                        .zip(&plan.route)
                        .filter(|(a, b)| a != b)
                        .count() as f64
                })
                .sum::<f64>()
                / 400.0
        };
        let errs: Vec<f64> = [1, 5, 10, 20, 30, 40].iter().map(|&t| mean_err(t)).collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] + 0.05, "{errs:?}");
        }
        assert_eq!(*errs.last().unwrap(), 0.0);
    }

    #[test]
    fn config_json_round_trip_and_validation() {
        let c = cfg();
        assert_eq!(GeneratorConfig::from_json(&c.to_json()).unwrap(), c);
        let bad = GeneratorConfig {
            goal_pull: 1.5,
            ..cfg()
        };
        assert!(GeneratorConfig::from_json(&bad.to_json()).is_err());
    }
}
