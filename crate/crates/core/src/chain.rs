//! Chained generation: finish a round of search, move the start to the most
//! advanced valid cell, search again.

use serde::{Deserialize, Serialize};

use crate::maze::{manhattan, Cell, GridMaze};
use crate::search::{epbs, Budget, CompletedCandidate, Evaluator};
use crate::simgen::GeneratorConfig;
use crate::verify::{judge_success, truncate_at_goal, TrajectoryMeta, Verdict};
use crate::{Error, Result};

pub const DEFAULT_MAX_DEPTH: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainState {
    pub current_start: Cell,
    pub depth: usize,
    pub segments: Vec<Vec<Cell>>,
    pub nfe_total: u64,
}

impl ChainState {
    /// Segments joined with each seam cell kept once.
    pub fn stitched(&self) -> Vec<Cell> {
        stitch(&self.segments)
    }
}

pub fn stitch(segments: &[Vec<Cell>]) -> Vec<Cell> {
    let mut out: Vec<Cell> = Vec::new();
    for seg in segments {
        let skip = usize::from(!out.is_empty() && out.last() == seg.first());
        out.extend_from_slice(&seg[skip.min(seg.len())..]);
    }
    out
}

/// Transcript entry for one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRound {
    pub depth: usize,
    pub pivot: Option<Cell>,
    pub segment: Vec<Cell>,
    pub round_nfe: u64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOutcome {
    pub state: ChainState,
    pub rounds: Vec<ChainRound>,
    /// Stitched trajectory judged against the original maze.
    pub verdict: Verdict,
}

/// Longest prefix that starts at `start`, stays on open cells, moves one
/// cell at a time and stops at the first goal visit.
pub fn valid_prefix<'a>(traj: &'a [Cell], maze: &GridMaze, start: Cell) -> &'a [Cell] {
    let (traj, _) = truncate_at_goal(traj, maze.goal());
    if traj.first() != Some(&start) {
        return &[];
    }
    let mut len = 1;
    while len < traj.len() && maze.is_open(traj[len]) && traj[len].is_adjacent(traj[len - 1]) {
        len += 1;
    }
    &traj[..len]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pivot {
    pub cell: Cell,
    /// Candidate the pivot came from.
    pub index: usize,
    /// Cells in that candidate's valid prefix.
    pub prefix_len: usize,
}

/// Most advanced valid end cell over all completed candidates.
///
/// A candidate qualifies when its valid prefix ends strictly closer (Manhattan)
/// to the goal than `current_start`. Ties prefer the shorter prefix, then the
/// lower candidate index.
pub fn select_pivot(completed: &[CompletedCandidate], maze: &GridMaze, current_start: Cell) -> Option<Pivot> {
    let d0 = manhattan(current_start, maze.goal());
    completed
        .iter()
        .filter_map(|c| {
            let prefix = valid_prefix(&c.trajectory, maze, current_start);
            let &cell = prefix.last()?;
            (manhattan(cell, maze.goal()) < d0).then_some(Pivot {
                cell,
                index: c.index,
                prefix_len: prefix.len(),
            })
        })
        .min_by_key(|p| (manhattan(p.cell, maze.goal()), p.prefix_len, p.index))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Reconditioned {
    /// The pivot is the goal; nothing left to plan.
    Solved,
    Maze(GridMaze),
}

/// Same layout, new start.
pub fn recondition(maze: &GridMaze, pivot: Cell) -> Result<Reconditioned> {
    if !maze.contains(pivot) || maze.is_obstacle(pivot) {
        return Err(Error::InvalidArgument(format!(
            "pivot ({}, {}) is not an open cell",
            pivot.row, pivot.col
        )));
    }
    if pivot == maze.goal() {
        return Ok(Reconditioned::Solved);
    }
    maze.with_start(pivot).map(Reconditioned::Maze)
}

/// Run up to `max_depth` EPBS rounds, reconditioning on each pivot.
pub fn chain_solve(
    maze: &GridMaze,
    cfg: &GeneratorConfig,
    budget: &Budget,
    max_depth: usize,
    master_seed: u64,
    eval: &Evaluator,
) -> Result<ChainOutcome> {
    if max_depth == 0 {
        return Err(Error::InvalidArgument("chain depth must be at least 1".into()));
    }
    let mut current = maze.clone();
    let mut state = ChainState {
        current_start: maze.start(),
        depth: 0,
        segments: Vec::new(),
        nfe_total: 0,
    };
    let mut rounds = Vec::new();
    let mut final_meta = TrajectoryMeta::default();

    while state.depth < max_depth {
        let result = epbs(&current, cfg, budget, master_seed, eval)?;
        state.depth += 1;
        state.nfe_total += result.total_nfe;
        let pivot = select_pivot(&result.completed, &current, current.start());
        let chosen = pivot
            .and_then(|p| result.completed.iter().find(|c| c.index == p.index))
            .unwrap_or_else(|| result.best_candidate());
        let segment = match pivot {
            Some(p) => valid_prefix(&chosen.trajectory, &current, current.start())[..p.prefix_len].to_vec(),
            None => Vec::new(),
        };
        rounds.push(ChainRound {
            depth: state.depth,
            pivot: pivot.map(|p| p.cell),
            segment: segment.clone(),
            round_nfe: result.total_nfe,
            verdict: chosen.verdict,
        });
        let Some(p) = pivot else { break };
        state.segments.push(segment);
        state.current_start = p.cell;
        match recondition(&current, p.cell)? {
            Reconditioned::Solved => {
                final_meta = chosen.meta;
                break;
            }
            Reconditioned::Maze(m) => current = m,
        }
    }

    let stitched = if state.segments.is_empty() {
        vec![maze.start()]
    } else {
        state.stitched()
    };
    let verdict = judge_success(&stitched, maze, &final_meta);
    Ok(ChainOutcome {
        state,
        rounds,
        verdict,
    })
}
