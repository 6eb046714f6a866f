//! Probe verifier, success judgement and the failure taxonomy.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::maze::{bfs_distances, manhattan, Cell, GridMaze};
use crate::{Error, Result};

/// Obstacle penalty weight of the confidence score.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Alternations between two cells that mark an oscillating agent.
pub const OSCILLATION_ALTERNATIONS: usize = 6;

#[derive(Clone, Copy, Debug)]
pub struct ConfidenceInputs<'a> {
    /// Agent cell per frame; `None` where tracking found no agent.
    pub estimates: &'a [Option<Cell>],
    pub maze: &'a GridMaze,
    pub alpha: f64,
}

/// `1 - d(end, goal) / d(start, goal) - alpha * lambda`.
///
/// `end` is the last frame with an agent estimate (the start cell if there is
/// none) and `lambda` is the share of all frames whose estimate sits on an
/// obstacle. Absent frames count in the denominator but never as hits.
pub fn confidence(input: &ConfidenceInputs<'_>) -> Result<f64> {
    let maze = input.maze;
    let d0 = manhattan(maze.start(), maze.goal());
    if d0 == 0 {
        return Err(Error::DegenerateMaze);
    }
    if input.estimates.is_empty() {
        return Err(Error::EmptyInput("confidence needs at least one frame".into()));
    }
    if !(input.alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha = {} < 0", input.alpha)));
    }
    let end = input
        .estimates
        .iter()
        .rev()
        .find_map(|c| *c)
        .unwrap_or(maze.start());
    let hits = input
        .estimates
        .iter()
        .flatten()
        .filter(|&&c| maze.is_obstacle(c))
        .count();
    let lambda = hits as f64 / input.estimates.len() as f64;
    Ok(1.0 - manhattan(end, maze.goal()) as f64 / d0 as f64 - input.alpha * lambda)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    pub ids: Vec<usize>,
    /// Fewer than K candidates were available.
    pub short_pool: bool,
}

/// Top-`k` ids by descending score; equal scores keep the lower id first.
pub fn rank_candidates(scores: &[(usize, f64)], k: usize) -> Result<Ranking> {
    if k == 0 {
        return Err(Error::InvalidArgument("beam size must be at least 1".into()));
    }
    let mut order: Vec<(usize, f64)> = scores.to_vec();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(Ranking {
        short_pool: order.len() < k,
        ids: order.into_iter().take(k).map(|(id, _)| id).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureClass {
    None,
    ConstraintLakeEntry,
    ConstraintGoalDrift,
    ConstraintIllegalMove,
    HorizonValidStall,
    HorizonWrongRoute,
    DegenerateStatic,
    DegenerateTracking,
    DegenerateCorrupt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureGroup {
    None,
    Constraint,
    Horizon,
    Degenerate,
}

impl FailureGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureGroup::None => "none",
            FailureGroup::Constraint => "constraint",
            FailureGroup::Horizon => "horizon",
            FailureGroup::Degenerate => "degenerate",
        }
    }
}

impl FailureClass {
    pub const FAILURES: [FailureClass; 8] = [
        FailureClass::ConstraintGoalDrift,
        FailureClass::ConstraintLakeEntry,
        FailureClass::ConstraintIllegalMove,
        FailureClass::DegenerateTracking,
        FailureClass::DegenerateCorrupt,
        FailureClass::DegenerateStatic,
        FailureClass::HorizonValidStall,
        FailureClass::HorizonWrongRoute,
    ];

    pub fn group(self) -> FailureGroup {
        use FailureClass::*;
        match self {
            None => FailureGroup::None,
            ConstraintLakeEntry | ConstraintGoalDrift | ConstraintIllegalMove => {
                FailureGroup::Constraint
            }
            HorizonValidStall | HorizonWrongRoute => FailureGroup::Horizon,
            DegenerateStatic | DegenerateTracking | DegenerateCorrupt => FailureGroup::Degenerate,
        }
    }

    pub fn as_str(self) -> &'static str {
        use FailureClass::*;
        match self {
            None => "none",
            ConstraintLakeEntry => "constraint_lake_entry",
            ConstraintGoalDrift => "constraint_goal_drift",
            ConstraintIllegalMove => "constraint_illegal_move",
            HorizonValidStall => "horizon_valid_stall",
            HorizonWrongRoute => "horizon_wrong_route",
            DegenerateStatic => "degenerate_static",
            DegenerateTracking => "degenerate_tracking",
            DegenerateCorrupt => "degenerate_corrupt",
        }
    }
}

impl fmt::Display for FailureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scene-level facts recovered alongside the trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub goal_drift: bool,
    pub extra_agent: bool,
    pub tracking_failed: bool,
}

impl From<&crate::render::Extraction> for TrajectoryMeta {
    fn from(ex: &crate::render::Extraction) -> Self {
        TrajectoryMeta {
            goal_drift: ex.goal_drift.is_some(),
            extra_agent: ex.extra_agent,
            tracking_failed: ex.tracking_failed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub success: bool,
    pub failure_class: FailureClass,
    pub truncated_at_goal: bool,
}

/// Cut the trajectory at its first goal visit.
pub fn truncate_at_goal(traj: &[Cell], goal: Cell) -> (&[Cell], bool) {
    match traj.iter().position(|&c| c == goal) {
        Some(i) => (&traj[..=i], i + 1 < traj.len()),
        None => (traj, false),
    }
}

fn structurally_clean(traj: &[Cell], maze: &GridMaze) -> bool {
    traj.first() == Some(&maze.start())
        && traj.iter().all(|&c| maze.is_open(c))
        && traj.windows(2).all(|w| manhattan(w[0], w[1]) <= 1)
}

/// Success means: after truncation at the first goal visit the trajectory
/// starts at the start, ends on the goal, only crosses open cells with unit
/// moves, and the scene shows no goal drift, extra agent or tracking loss.
pub fn judge_success(traj: &[Cell], maze: &GridMaze, meta: &TrajectoryMeta) -> Verdict {
    let (cut, truncated) = truncate_at_goal(traj, maze.goal());
    let success = cut.last() == Some(&maze.goal())
        && structurally_clean(cut, maze)
        && !meta.goal_drift
        && !meta.extra_agent
        && !meta.tracking_failed;
    Verdict {
        success,
        failure_class: if success {
            FailureClass::None
        } else {
            classify_failure(cut, maze, meta)
        },
        truncated_at_goal: truncated,
    }
}

/// Assign exactly one failure class, by priority: goal drift, lake entry,
/// illegal move, degenerate (tracking, corrupt start, static/oscillating),
/// then horizon-limited (valid stall if the last cell lies on some shortest
/// path, wrong route otherwise).
pub fn classify_failure(traj: &[Cell], maze: &GridMaze, meta: &TrajectoryMeta) -> FailureClass {
    let (traj, _) = truncate_at_goal(traj, maze.goal());
    if meta.goal_drift {
        return FailureClass::ConstraintGoalDrift;
    }
    if traj.iter().any(|&c| maze.is_obstacle(c)) {
        return FailureClass::ConstraintLakeEntry;
    }
    let off_grid = traj.iter().any(|&c| !maze.contains(c));
    let jump = traj.windows(2).any(|w| manhattan(w[0], w[1]) > 1);
    if off_grid || jump || meta.extra_agent {
        return FailureClass::ConstraintIllegalMove;
    }
    if meta.tracking_failed {
        return FailureClass::DegenerateTracking;
    }
    let Some(&end) = traj.last() else {
        return FailureClass::DegenerateCorrupt;
    };
    if traj[0] != maze.start() {
        return FailureClass::DegenerateCorrupt;
    }
    if is_static(traj, maze) || oscillates(traj) {
        return FailureClass::DegenerateStatic;
    }
    let from_start = bfs_distances(maze, maze.start());
    let to_goal = bfs_distances(maze, maze.goal());
    let on_shortest = match (
        from_start[maze.index(end)],
        to_goal[maze.index(end)],
        to_goal[maze.index(maze.start())],
    ) {
        (Some(a), Some(b), Some(l)) => a + b == l,
        _ => false,
    };
    if on_shortest {
        FailureClass::HorizonValidStall
    } else {
        FailureClass::HorizonWrongRoute
    }
}

fn is_static(traj: &[Cell], maze: &GridMaze) -> bool {
    let mut distinct: Vec<Cell> = traj.to_vec();
    distinct.sort();
    distinct.dedup();
    let end = *traj.last().unwrap();
    distinct.len() <= 2 && manhattan(end, maze.goal()) >= manhattan(maze.start(), maze.goal())
}

/// At least [`OSCILLATION_ALTERNATIONS`] consecutive moves bouncing between two cells.
fn oscillates(traj: &[Cell]) -> bool {
    let mut run = 0;
    for i in 1..traj.len() {
        let bounce = traj[i] != traj[i - 1] && (i < 2 || traj[i] == traj[i - 2]);
        run = if bounce { run + 1 } else if traj[i] != traj[i - 1] { 1 } else { 0 };
        if run >= OSCILLATION_ALTERNATIONS {
            return true;
        }
    }
    false
}

/// One-line verdict record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub maze_id: String,
    pub candidate_id: usize,
    pub success: bool,
    pub class: FailureClass,
    pub confidence: f64,
    /// Moves in the judged trajectory.
    pub path_len: usize,
}

impl VerdictRecord {
    pub const HEADER: &'static str = "maze_id,candidate_id,success,class,confidence,path_len";

    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{}",
            self.maze_id, self.candidate_id, self.success, self.class, self.confidence, self.path_len
        )
    }
}
