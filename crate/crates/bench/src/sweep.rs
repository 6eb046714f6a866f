//! Method sweeps over a maze corpus.
//!
//! Every method sees the same per-maze seed pool (candidate seeds depend on
//! the master seed and the maze only), so methods are paired maze by maze.

use std::path::{Path, PathBuf};

use log::{info, warn};
use planlab::calibration::CalibrationProfile;
use planlab::chain::{chain_solve, ChainRound};
use planlab::search::{analyze_pool, best_of_n, candidate_count, epbs, Budget, Evaluator, SearchResult};
use planlab::simgen::GeneratorConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Method, PoolSpec};
use crate::corpus::{self, CorpusEntry};
use crate::error::{BenchError, Result};

pub const RECORDS: &str = "records.csv";
pub const CANDIDATES: &str = "candidates.csv";
pub const CHAIN_ROUNDS: &str = "chain_rounds.jsonl";
pub const POOLS: &str = "pools.csv";
pub const ERRORS: &str = "errors.csv";
pub const PROVENANCE: &str = "provenance.json";
pub const CONFIG: &str = "config.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub profile_hash: String,
    pub code_version: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl Provenance {
    /// Hashes ignore the output directory so reruns elsewhere match.
    pub fn new(cfg: &ExperimentConfig, profile: &CalibrationProfile) -> Self {
        let mut canonical = cfg.clone();
        canonical.output_dir = None;
        Provenance {
            config_hash: sha256_hex(canonical.to_json().as_bytes()),
            profile_hash: sha256_hex(profile.to_json().as_bytes()),
            code_version: format!("planlab-bench {}", env!("CARGO_PKG_VERSION")),
        }
    }
}

/// Outcome of one method on one maze.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub maze_id: String,
    pub size: usize,
    pub density: f64,
    pub variant: String,
    pub bfs_moves: usize,
    pub method: String,
    pub kind: String,
    pub budget: u64,
    pub tau: u32,
    pub k: usize,
    pub depth: usize,
    pub success: bool,
    pub failure_class: String,
    pub nfe: u64,
    /// Candidates drawn (summed over rounds for chaining).
    pub candidates: usize,
    pub rounds: usize,
    /// Final confidence of the top candidate; empty for chaining.
    pub confidence: Option<f64>,
    /// Moves in the judged trajectory.
    pub path_len: usize,
    pub config_hash: String,
    pub profile_hash: String,
    pub code_version: String,
}

/// One completed candidate of a single-round search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub maze_id: String,
    pub method: String,
    pub rank: usize,
    pub candidate: usize,
    pub success: bool,
    pub failure_class: String,
    pub confidence: f64,
    pub path_len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub maze_id: String,
    pub method: String,
    #[serde(flatten)]
    pub round: ChainRound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolRow {
    pub maze_id: String,
    pub size: usize,
    pub candidate: usize,
    pub probe_score: f64,
    pub final_success: bool,
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub maze_id: String,
    pub method: String,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub candidates: Vec<CandidateRow>,
    pub rounds: Vec<RoundRow>,
    pub pools: Vec<PoolRow>,
    pub errors: Vec<ErrorRow>,
}

impl SweepOutput {
    fn extend(&mut self, other: SweepOutput) {
        self.records.extend(other.records);
        self.candidates.extend(other.candidates);
        self.rounds.extend(other.rounds);
        self.pools.extend(other.pools);
        self.errors.extend(other.errors);
    }

    fn sort(&mut self) {
        self.records.sort_by(|a, b| (&a.maze_id, &a.method).cmp(&(&b.maze_id, &b.method)));
        self.candidates
            .sort_by(|a, b| (&a.maze_id, &a.method, a.rank).cmp(&(&b.maze_id, &b.method, b.rank)));
        self.rounds
            .sort_by(|a, b| (&a.maze_id, &a.method, a.round.depth).cmp(&(&b.maze_id, &b.method, b.round.depth)));
        self.pools
            .sort_by(|a, b| (&a.maze_id, a.candidate).cmp(&(&b.maze_id, b.candidate)));
        self.errors.sort_by(|a, b| (&a.maze_id, &a.method).cmp(&(&b.maze_id, &b.method)));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub out_dir: PathBuf,
    pub mazes: usize,
    pub records: usize,
    pub errors: usize,
}

struct Context<'a> {
    gen: &'a GeneratorConfig,
    eval: Evaluator,
    master_seed: u64,
    steps: u32,
    prov: Provenance,
}

fn moves(traj_len: usize) -> usize {
    traj_len.saturating_sub(1)
}

impl Context<'_> {
    fn record(&self, e: &CorpusEntry, m: &Method) -> SweepRecord {
        SweepRecord {
            maze_id: e.id.clone(),
            size: e.size,
            density: e.density,
            variant: e.variant.to_string(),
            bfs_moves: e.bfs_moves,
            method: m.label(),
            kind: m.kind().into(),
            budget: m.budget(),
            tau: m.tau(self.steps),
            k: m.k(),
            depth: m.depth(),
            success: false,
            failure_class: String::new(),
            nfe: 0,
            candidates: 0,
            rounds: 1,
            confidence: None,
            path_len: 0,
            config_hash: self.prov.config_hash.clone(),
            profile_hash: self.prov.profile_hash.clone(),
            code_version: self.prov.code_version.clone(),
        }
    }

    fn search(&self, e: &CorpusEntry, m: &Method, r: &SearchResult, out: &mut SweepOutput) {
        let best = r.best_candidate();
        let mut rec = self.record(e, m);
        rec.success = r.any_success();
        // pass@K: a success anywhere among the K counts, so report the class
        // of the top candidate only when every candidate failed.
        rec.failure_class = if rec.success {
            "none".into()
        } else {
            best.verdict.failure_class.to_string()
        };
        rec.nfe = r.total_nfe;
        rec.candidates = r.n_candidates;
        rec.confidence = Some(best.final_score);
        rec.path_len = r
            .completed
            .iter()
            .find(|c| c.verdict.success)
            .map_or(moves(best.trajectory.len()), |c| moves(c.trajectory.len()));
        out.records.push(rec);
        for (rank, c) in r.completed.iter().enumerate() {
            out.candidates.push(CandidateRow {
                maze_id: e.id.clone(),
                method: m.label(),
                rank,
                candidate: c.index,
                success: c.verdict.success,
                failure_class: c.verdict.failure_class.to_string(),
                confidence: c.final_score,
                path_len: moves(c.trajectory.len()),
            });
        }
    }

    fn run_method(&self, e: &CorpusEntry, m: &Method, out: &mut SweepOutput) -> planlab::Result<()> {
        match *m {
            Method::BestOfN { budget, k } => {
                let n = (budget / self.steps as u64) as usize;
                let r = best_of_n(&e.maze, self.gen, n, k, self.master_seed, &self.eval)?;
                self.search(e, m, &r, out);
            }
            Method::Epbs { budget, tau, k } => {
                let b = Budget::new(budget, tau, k, self.steps)?;
                let r = epbs(&e.maze, self.gen, &b, self.master_seed, &self.eval)?;
                self.search(e, m, &r, out);
            }
            Method::Chain { budget, tau, k, depth } => {
                let b = Budget::new(budget, tau, k, self.steps)?;
                let c = chain_solve(&e.maze, self.gen, &b, depth, self.master_seed, &self.eval)?;
                let mut rec = self.record(e, m);
                rec.success = c.verdict.success;
                rec.failure_class = c.verdict.failure_class.to_string();
                rec.nfe = c.state.nfe_total;
                rec.rounds = c.rounds.len();
                rec.candidates = c.rounds.len() * candidate_count(budget, self.steps, tau, k)?;
                rec.path_len = moves(c.state.stitched().len());
                out.records.push(rec);
                for round in c.rounds {
                    out.rounds.push(RoundRow {
                        maze_id: e.id.clone(),
                        method: m.label(),
                        round,
                    });
                }
            }
        }
        Ok(())
    }

    fn run_pool(&self, e: &CorpusEntry, p: PoolSpec, out: &mut SweepOutput) -> planlab::Result<()> {
        let b = Budget::new(p.budget, p.tau, p.k, self.steps)?;
        let pa = analyze_pool(&e.maze, self.gen, &b, self.master_seed, &self.eval)?;
        for (i, (&s, &ok)) in pa.probe_scores.iter().zip(&pa.final_success).enumerate() {
            out.pools.push(PoolRow {
                maze_id: e.id.clone(),
                size: e.size,
                candidate: i,
                probe_score: s,
                final_success: ok,
                selected: pa.selected.contains(&i),
            });
        }
        Ok(())
    }

    fn run_maze(&self, e: &CorpusEntry, methods: &[Method], pool: Option<PoolSpec>) -> SweepOutput {
        let mut out = SweepOutput::default();
        for m in methods {
            if let Err(err) = self.run_method(e, m, &mut out) {
                warn!("{} {}: {err}", e.id, m);
                out.errors.push(ErrorRow {
                    maze_id: e.id.clone(),
                    method: m.label(),
                    error: err.to_string(),
                });
            }
        }
        if let Some(p) = pool {
            if let Err(err) = self.run_pool(e, p, &mut out) {
                warn!("{} pool: {err}", e.id);
                out.errors.push(ErrorRow {
                    maze_id: e.id.clone(),
                    method: "pool".into(),
                    error: err.to_string(),
                });
            }
        }
        out
    }
}

/// Run every method on every maze of `corpus`; in-memory, no files.
pub fn execute(cfg: &ExperimentConfig, profile: &CalibrationProfile, corpus: &[CorpusEntry]) -> SweepOutput {
    let ctx = Context {
        gen: &profile.generator,
        eval: Evaluator::default(),
        master_seed: cfg.master_seed,
        steps: cfg.steps,
        prov: Provenance::new(cfg, profile),
    };
    let parts: Vec<SweepOutput> = corpus
        .par_iter()
        .map(|e| ctx.run_maze(e, &cfg.methods, cfg.pool_analysis))
        .collect();
    let mut out = SweepOutput::default();
    for p in parts {
        out.extend(p);
    }
    out.sort();
    out
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

/// Validate, generate the corpus, run all methods and write result files to `out`.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<SweepSummary> {
    cfg.validate()?;
    let profile = cfg.load_profile()?;
    let corpus = corpus::generate(&cfg.corpus, cfg.master_seed)?;
    info!("sweep: {} mazes x {} methods", corpus.len(), cfg.methods.len());
    let result = execute(cfg, &profile, &corpus);
    std::fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;

    let mut stored = cfg.clone();
    stored.output_dir = None;
    write_text(&out.join(CONFIG), &stored.to_json())?;
    let prov = Provenance::new(cfg, &profile);
    write_text(&out.join(PROVENANCE), &serde_json::to_string_pretty(&prov)?)?;
    write_csv(&out.join(RECORDS), &result.records)?;
    write_csv(&out.join(CANDIDATES), &result.candidates)?;
    write_csv(&out.join(POOLS), &result.pools)?;
    write_csv(&out.join(ERRORS), &result.errors)?;
    let mut jsonl = String::new();
    for r in &result.rounds {
        jsonl.push_str(&serde_json::to_string(r)?);
        jsonl.push('\n');
    }
    write_text(&out.join(CHAIN_ROUNDS), &jsonl)?;
    info!("sweep: {} records, {} errors", result.records.len(), result.errors.len());
    Ok(SweepSummary {
        out_dir: out.to_path_buf(),
        mazes: corpus.len(),
        records: result.records.len(),
        errors: result.errors.len(),
    })
}
