//! Budgeted search over generator seeds: best-of-N and early planning beam
//! search (probe every seed for a few steps, finish only the best K).

use serde::{Deserialize, Serialize};

use crate::maze::{Cell, GridMaze};
use crate::render::{extract_trajectory_with, rasterize, Extraction, RenderOptions, Scene, TrackParams};
use crate::seed::{self, tag};
use crate::simgen::{full_denoise, predict_x0, sample_plan, GeneratorConfig, SeedPlan};
use crate::verify::{
    confidence, judge_success, rank_candidates, ConfidenceInputs, TrajectoryMeta, Verdict,
    DEFAULT_ALPHA,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Total NFEs.
    pub total: u64,
    /// Probe step.
    pub tau: u32,
    /// Beam size.
    pub beam: usize,
    /// Schedule length.
    pub steps: u32,
}

impl Budget {
    pub fn new(total: u64, tau: u32, beam: usize, steps: u32) -> Result<Self> {
        candidate_count(total, steps, tau, beam)?;
        Ok(Budget {
            total,
            tau,
            beam,
            steps,
        })
    }

    pub fn candidates(&self) -> usize {
        candidate_count(self.total, self.steps, self.tau, self.beam).expect("validated budget")
    }

    /// `N * tau + K * (T - tau)`.
    pub fn spent(&self) -> u64 {
        let n = self.candidates() as u64;
        let k = (self.beam as u64).min(n);
        n * self.tau as u64 + k * (self.steps - self.tau) as u64
    }
}

/// `N = floor((B - K*T) / tau) + K`.
pub fn candidate_count(budget: u64, steps: u32, tau: u32, beam: usize) -> Result<usize> {
    if beam == 0 {
        return Err(Error::InvalidArgument("beam size must be at least 1".into()));
    }
    if steps == 0 || tau == 0 || tau > steps {
        return Err(Error::InvalidArgument(format!(
            "probe step {tau} outside 1..={steps}"
        )));
    }
    let reserve = beam as u64 * steps as u64;
    if budget < reserve {
        return Err(Error::BudgetInfeasible {
            budget,
            beam,
            steps,
        });
    }
    Ok(((budget - reserve) / tau as u64) as usize + beam)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Probed,
    Completed,
    Discarded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub index: usize,
    pub seed: u64,
    pub probe_score: f64,
    pub status: CandidateStatus,
    pub nfe_spent: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletedCandidate {
    pub index: usize,
    pub trajectory: Vec<Cell>,
    pub meta: TrajectoryMeta,
    pub final_score: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub candidates: Vec<CandidateRecord>,
    /// Completed candidates in rank order.
    pub completed: Vec<CompletedCandidate>,
    pub total_nfe: u64,
    pub n_candidates: usize,
    /// Index of the highest-scoring final sample.
    pub best: usize,
}

impl SearchResult {
    /// pass@K for this maze: any returned sample succeeded.
    pub fn any_success(&self) -> bool {
        self.completed.iter().any(|c| c.verdict.success)
    }

    pub fn verdicts(&self) -> Vec<Verdict> {
        self.completed.iter().map(|c| c.verdict).collect()
    }

    pub fn best_candidate(&self) -> &CompletedCandidate {
        self.completed
            .iter()
            .find(|c| c.index == self.best)
            .expect("best is always completed")
    }

    /// NFEs plus a fixed per-probe overhead (decode cost of each probe).
    pub fn cost_with_probe_overhead(&self, overhead: f64) -> f64 {
        self.total_nfe as f64 + overhead * self.n_candidates as f64
    }
}

/// Render, track and score settings shared by every candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluator {
    pub render: RenderOptions,
    pub track: TrackParams,
    pub alpha: f64,
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator {
            render: RenderOptions::default(),
            track: TrackParams::default(),
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl Evaluator {
    /// Render the scene and read it back from pixels.
    pub fn observe(&self, maze: &GridMaze, scene: &Scene) -> Result<Extraction> {
        let moves = scene.trajectory.len().saturating_sub(1);
        let frames = self.render.frames.max(RenderOptions::frames_for_moves(moves));
        let fs = rasterize(maze, scene, frames, &self.render)?;
        Ok(extract_trajectory_with(&fs, self.track))
    }

    pub fn score(&self, maze: &GridMaze, ex: &Extraction) -> Result<f64> {
        confidence(&ConfidenceInputs {
            estimates: &ex.per_frame,
            maze,
            alpha: self.alpha,
        })
    }

    pub fn judge(&self, maze: &GridMaze, ex: &Extraction) -> Verdict {
        judge_success(&ex.cells, maze, &TrajectoryMeta::from(ex))
    }

    /// Score the step-`t` estimate of `plan`.
    pub fn probe(&self, maze: &GridMaze, plan: &SeedPlan, t: u32, cfg: &GeneratorConfig) -> Result<f64> {
        let pred = predict_x0(plan, maze, t, cfg, 0)?;
        let ex = self.observe(maze, &Scene::from_prediction(&pred, maze))?;
        self.score(maze, &ex)
    }

    /// Finish `plan` after `probed` steps, then score and judge the final video.
    pub fn complete(
        &self,
        maze: &GridMaze,
        plan: &SeedPlan,
        index: usize,
        probed: u32,
        cfg: &GeneratorConfig,
    ) -> Result<(CompletedCandidate, u32)> {
        let sample = full_denoise(plan, maze, cfg, probed)?;
        let ex = self.observe(maze, &Scene::from_prediction(&sample.prediction, maze))?;
        Ok((
            CompletedCandidate {
                index,
                trajectory: ex.cells.clone(),
                meta: TrajectoryMeta::from(&ex),
                final_score: self.score(maze, &ex)?,
                verdict: self.judge(maze, &ex),
            },
            sample.nfe_cost,
        ))
    }
}

/// Seed of candidate `index` on `maze`; identical across methods so pools pair up.
pub fn candidate_seed(master_seed: u64, maze: &GridMaze, index: usize) -> u64 {
    seed::derive(master_seed, &[tag::CANDIDATE, maze.fingerprint(), index as u64])
}

/// Probe `n` seeds at step `t`, keep the top `k`, finish them.
fn screen_and_complete(
    maze: &GridMaze,
    cfg: &GeneratorConfig,
    n: usize,
    t: u32,
    k: usize,
    master_seed: u64,
    eval: &Evaluator,
) -> Result<SearchResult> {
    if n == 0 {
        return Err(Error::EmptyPool);
    }
    let plans: Vec<SeedPlan> = (0..n)
        .map(|i| sample_plan(maze, candidate_seed(master_seed, maze, i), cfg))
        .collect();
    let scores = plans
        .iter()
        .map(|p| eval.probe(maze, p, t, cfg))
        .collect::<Result<Vec<f64>>>()?;
    let ranking = rank_candidates(&scores.iter().copied().enumerate().collect::<Vec<_>>(), k)?;

    let mut candidates: Vec<CandidateRecord> = plans
        .iter()
        .zip(&scores)
        .enumerate()
        .map(|(index, (p, &probe_score))| CandidateRecord {
            index,
            seed: p.seed,
            probe_score,
            status: CandidateStatus::Discarded,
            nfe_spent: t,
        })
        .collect();
    let mut total_nfe = n as u64 * t as u64;
    let mut completed = Vec::with_capacity(ranking.ids.len());
    for &i in &ranking.ids {
        let (done, cost) = eval.complete(maze, &plans[i], i, t, cfg)?;
        total_nfe += cost as u64;
        candidates[i].status = CandidateStatus::Completed;
        candidates[i].nfe_spent += cost;
        completed.push(done);
    }
    let best = completed
        .iter()
        .max_by(|a, b| a.final_score.total_cmp(&b.final_score).then(b.index.cmp(&a.index)))
        .map(|c| c.index)
        .ok_or(Error::EmptyPool)?;
    Ok(SearchResult {
        candidates,
        completed,
        total_nfe,
        n_candidates: n,
        best,
    })
}

/// Early planning beam search.
pub fn epbs(
    maze: &GridMaze,
    cfg: &GeneratorConfig,
    budget: &Budget,
    master_seed: u64,
    eval: &Evaluator,
) -> Result<SearchResult> {
    if budget.steps != cfg.steps() {
        return Err(Error::InvalidArgument(format!(
            "budget assumes T = {}, generator has T = {}",
            budget.steps,
            cfg.steps()
        )));
    }
    let n = candidate_count(budget.total, budget.steps, budget.tau, budget.beam)?;
    screen_and_complete(maze, cfg, n, budget.tau, budget.beam, master_seed, eval)
}

/// Fully denoise `n` seeds and return the top `k` by final confidence.
pub fn best_of_n(
    maze: &GridMaze,
    cfg: &GeneratorConfig,
    n: usize,
    k: usize,
    master_seed: u64,
    eval: &Evaluator,
) -> Result<SearchResult> {
    if k == 0 || n < k {
        return Err(Error::InvalidArgument(format!("best-of-N needs N >= K >= 1, got N={n}, K={k}")));
    }
    screen_and_complete(maze, cfg, n, cfg.steps(), k, master_seed, eval)
}

/// Fraction of mazes with at least one success among the returned samples.
pub fn pass_at_k(verdicts: &[Vec<Verdict>], k: usize) -> Result<f64> {
    if verdicts.is_empty() {
        return Err(Error::EmptyInput("pass@K over zero mazes".into()));
    }
    if let Some(v) = verdicts.iter().find(|v| v.len() > k) {
        return Err(Error::InvalidArgument(format!("{} verdicts exceed K = {k}", v.len())));
    }
    let hits = verdicts.iter().filter(|v| v.iter().any(|x| x.success)).count();
    Ok(hits as f64 / verdicts.len() as f64)
}

/// Every candidate of an EPBS pool, probed and also fully evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolAnalysis {
    pub probe_scores: Vec<f64>,
    pub final_success: Vec<bool>,
    /// Indices EPBS would complete.
    pub selected: Vec<usize>,
}

impl PoolAnalysis {
    pub fn oracle_success(&self) -> bool {
        self.final_success.iter().any(|&s| s)
    }

    pub fn selected_success(&self) -> bool {
        self.selected.iter().any(|&i| self.final_success[i])
    }

    /// Chance that `k` distinct candidates drawn uniformly contain a success.
    pub fn random_k_success(&self, k: usize) -> f64 {
        let n = self.final_success.len();
        let fails = self.final_success.iter().filter(|&&s| !s).count();
        let k = k.min(n);
        // P(all k draws fail) = C(fails, k) / C(n, k)
        let all_fail = (0..k).fold(1.0, |p, i| {
            if fails < i + 1 {
                0.0
            } else {
                p * (fails - i) as f64 / (n - i) as f64
            }
        });
        1.0 - all_fail
    }
}

pub fn analyze_pool(
    maze: &GridMaze,
    cfg: &GeneratorConfig,
    budget: &Budget,
    master_seed: u64,
    eval: &Evaluator,
) -> Result<PoolAnalysis> {
    let n = budget.candidates();
    let mut probe_scores = Vec::with_capacity(n);
    let mut final_success = Vec::with_capacity(n);
    for i in 0..n {
        let plan = sample_plan(maze, candidate_seed(master_seed, maze, i), cfg);
        probe_scores.push(eval.probe(maze, &plan, budget.tau, cfg)?);
        final_success.push(eval.complete(maze, &plan, i, budget.tau, cfg)?.0.verdict.success);
    }
    let ranking = rank_candidates(
        &probe_scores.iter().copied().enumerate().collect::<Vec<_>>(),
        budget.beam,
    )?;
    Ok(PoolAnalysis {
        probe_scores,
        final_success,
        selected: ranking.ids,
    })
}
