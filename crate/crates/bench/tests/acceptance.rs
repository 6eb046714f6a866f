//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`). A positional argument filters
//! criteria by substring of their name; `--list` prints the names.

use std::collections::{BTreeSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use planlab::calibration::{estimate, CalibrationProfile, Suite};
use planlab::chain::chain_solve;
use planlab::maze::{bfs_shortest_path, generate_maze, manhattan};
use planlab::metrics::{pearson, roc_auc, sign_test};
use planlab::render::{centroid_to_cell, extract_trajectory, rasterize, BoardGeometry, RenderOptions, Scene};
use planlab::search::{analyze_pool, best_of_n, candidate_count, epbs, Budget, Evaluator};
use planlab::seed::mix64;
use planlab::verify::{confidence, judge_success, ConfidenceInputs, FailureClass, TrajectoryMeta};
use planlab::{Cell, GridMaze, Variant};
use planlab_bench::corpus::{self, CorpusEntry};
use planlab_bench::{report, sweep, CorpusSpec, ExperimentConfig};

type Outcome = Result<String, String>;

const T: u32 = 40;
const DENSITIES: [f64; 4] = [0.2, 0.3, 0.4, 0.5];

/// SplitMix64 stream for test inputs.
struct Stream(u64);

impl Stream {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix64(self.0)
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(r: usize, col: usize) -> Cell {
    Cell::new(r, col)
}

/// Maze `i` of a size: densities cycle fastest, layouts alternate in blocks of four.
fn grid_entry(size: usize, i: usize, master: u64) -> CorpusEntry {
    let variant = if (i / 4).is_multiple_of(2) { Variant::Norm } else { Variant::Vary };
    corpus::entry(size, DENSITIES[i % 4], variant, i, master).unwrap()
}

fn c1_formula_oracles() -> Outcome {
    let a = candidate_count(400, T, 5, 1).unwrap();
    let b = candidate_count(400, T, T, 2).unwrap();
    let d = candidate_count(120, T, 5, 2).unwrap();
    let e = candidate_count(120, T, 15, 2).unwrap();
    let maze = generate_maze(4, 0.2, Variant::Norm, 1).unwrap();
    let r = epbs(&maze, &planlab::simgen::GeneratorConfig::default(), &Budget::new(120, 5, 2, T).unwrap(), 1, &Evaluator::default()).unwrap();
    let ok = a == 73 && b == 10 && d == 10 && e == 4 && r.candidates.len() == 10 && r.completed.len() == 2 && r.total_nfe <= 120;
    check(ok, format!("N = {a}, {b}, {d} (with {} completions, {} NFE), {e}", r.completed.len(), r.total_nfe))
}

fn c2_verifier_formula() -> Outcome {
    let lakes = GridMaze::new(4, c(0, 0), c(3, 3), &[c(1, 1), c(2, 2)], Variant::Vary).unwrap();
    let open = GridMaze::new(5, c(2, 2), c(2, 4), &[], Variant::Vary).unwrap();
    let s = Some;
    let n: Option<Cell> = None;
    let mut worked = vec![s(c(0, 0)); 7];
    worked.extend([s(c(1, 1)), s(c(1, 1)), s(c(1, 2))]);
    let path: Vec<_> = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 3), (2, 3), (3, 3)].iter().map(|&(r, k)| s(c(r, k))).collect();
    let mut long_hold = vec![s(c(1, 1)); 3];
    long_hold.push(s(c(1, 2)));
    // (maze, frames, alpha, hand-evaluated confidence)
    let table: Vec<(&GridMaze, Vec<Option<Cell>>, f64, f64)> = vec![
        (&lakes, worked, 0.5, 1.0 - 3.0 / 6.0 - 0.5 * 0.2),
        (&lakes, vec![s(c(0, 0)); 5], 0.5, 0.0),
        (&lakes, path, 0.5, 1.0),
        (&lakes, vec![n; 4], 0.5, 0.0),
        (&lakes, vec![n, s(c(0, 1)), n], 0.5, 1.0 / 6.0),
        (&lakes, vec![s(c(0, 0)), s(c(1, 0)), s(c(1, 1))], 0.5, 1.0 - 4.0 / 6.0 - 0.5 / 3.0),
        (&lakes, vec![s(c(0, 0)), s(c(1, 0)), s(c(1, 1))], 0.0, 1.0 / 3.0),
        (&lakes, vec![s(c(0, 0)), s(c(1, 0)), s(c(1, 1))], 1.0, 0.0),
        (&lakes, vec![s(c(2, 2)); 4], 0.5, 1.0 - 2.0 / 6.0 - 0.5),
        (&lakes, vec![s(c(0, 0)), s(c(0, 1)), s(c(0, 0))], 0.5, 0.0),
        (&open, vec![s(c(2, 2)), s(c(2, 1)), s(c(2, 0))], 0.5, -1.0),
        (&open, vec![s(c(2, 2)), s(c(2, 3)), s(c(2, 4))], 0.5, 1.0),
        (&open, vec![s(c(2, 3)), n], 0.5, 0.5),
        (&lakes, vec![s(c(0, 0)), s(c(1, 1))], 2.0, 1.0 - 4.0 / 6.0 - 1.0),
        (&lakes, vec![s(c(0, 1)); 20], 0.5, 1.0 / 6.0),
        (&lakes, vec![s(c(3, 2))], 0.5, 5.0 / 6.0),
        (&lakes, vec![s(c(0, 0)), s(c(1, 1)), s(c(2, 2)), s(c(3, 3))], 0.5, 0.75),
        (&lakes, long_hold, 0.25, 1.0 - 3.0 / 6.0 - 0.25 * 0.75),
        (&open, vec![n, n, s(c(2, 2))], 0.5, 0.0),
        (&open, vec![s(c(0, 0))], 0.5, 1.0 - 6.0 / 2.0),
    ];
    let mut worst = 0.0f64;
    for (maze, frames, alpha, want) in &table {
        let got = confidence(&ConfidenceInputs { estimates: frames, maze, alpha: *alpha }).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
    }
    if worst > 1e-12 {
        return Err(format!("max table error {worst:e}"));
    }

    // Monotonicity on random inputs.
    let mut rng = Stream(0xC0FFEE);
    let mut violations = 0;
    for _ in 0..10_000 {
        let size = 4 + rng.below(7);
        let maze = generate_maze(size, 0.3, Variant::Vary, rng.next()).unwrap();
        let len = 1 + rng.below(30);
        let mut frames: Vec<Option<Cell>> = (0..len)
            .map(|_| (rng.unit() < 0.9).then(|| c(rng.below(size), rng.below(size))))
            .collect();
        // Keep the end on an open cell so edits below leave it fixed.
        let open: Vec<Cell> = maze.cells().filter(|&x| maze.is_open(x)).collect();
        frames[len - 1] = Some(open[rng.below(open.len())]);
        let alpha = rng.unit() * 2.0;
        let conf = |f: &[Option<Cell>], a: f64| confidence(&ConfidenceInputs { estimates: f, maze: &maze, alpha: a }).unwrap();
        let base = conf(&frames, alpha);
        // More alpha never helps.
        violations += (conf(&frames, alpha + 0.1) > base + 1e-12) as usize;
        // One more lake frame lowers the score.
        if let (Some(lake), Some(i)) = (
            maze.obstacles().next(),
            (0..len - 1).find(|&i| frames[i].is_none_or(|x| !maze.is_obstacle(x))),
        ) {
            let mut f = frames.clone();
            f[i] = Some(lake);
            violations += (conf(&f, alpha) >= base && alpha > 0.0) as usize;
        }
        // An end cell nearer the goal raises the score.
        let end = frames[len - 1].unwrap();
        if let Some(&closer) = open.iter().find(|&&x| manhattan(x, maze.goal()) < manhattan(end, maze.goal())) {
            let mut f = frames.clone();
            f[len - 1] = Some(closer);
            violations += (conf(&f, alpha) <= base) as usize;
        }
        violations += (base > 1.0 + 1e-12) as usize;
    }
    check(violations == 0, format!("20-case table max error {worst:.1e}; {violations} monotonicity violations in 10000 draws"))
}

fn random_walk(maze: &GridMaze, rng: &mut Stream, steps: usize) -> Vec<Cell> {
    let mut walk = vec![maze.start()];
    for _ in 0..steps {
        let cur = *walk.last().unwrap();
        let next: Vec<Cell> = cur.neighbors(maze.size()).filter(|&x| maze.is_open(x)).collect();
        if next.is_empty() {
            break;
        }
        walk.push(next[rng.below(next.len())]);
    }
    walk
}

fn c3_extraction_round_trip() -> Outcome {
    let opts = RenderOptions::default();
    let mut rng = Stream(31);
    let (mut ok, mut total) = (0, 0);
    for i in 0..50 {
        let size = 4 + i % 7;
        let maze = generate_maze(size, DENSITIES[i % 4], if i % 2 == 0 { Variant::Norm } else { Variant::Vary }, 300 + i as u64).unwrap();
        let walk_len = 3 + rng.below(12);
        for traj in [bfs_shortest_path(&maze).unwrap().cells, random_walk(&maze, &mut rng, walk_len)] {
            let frames = RenderOptions::frames_for_moves(traj.len() - 1).max(opts.frames);
            let fs = rasterize(&maze, &Scene::plain(traj.clone()), frames, &opts).map_err(|e| e.to_string())?;
            total += 1;
            ok += (extract_trajectory(&fs).cells == traj) as usize;
        }
    }
    let mut fuzz_bad = 0;
    for _ in 0..1000 {
        let grid = 1 + rng.below(12);
        let x0 = rng.unit() * 100.0;
        let y0 = rng.unit() * 100.0;
        let geom = BoardGeometry::new(x0, y0, x0 + 10.0 + rng.unit() * 500.0, y0 + 10.0 + rng.unit() * 500.0, grid).unwrap();
        let p = (x0 - 50.0 + rng.unit() * 700.0, y0 - 50.0 + rng.unit() * 700.0);
        let w = (geom.x_max - geom.x_min) / grid as f64;
        let h = (geom.y_max - geom.y_min) / grid as f64;
        let clamp = |v: f64| (v.floor().max(0.0) as usize).min(grid - 1);
        let want = c(clamp((p.1 - geom.y_min) / h), clamp((p.0 - geom.x_min) / w));
        fuzz_bad += (centroid_to_cell(p, &geom) != want) as usize;
    }
    check(ok == total && fuzz_bad == 0, format!("{ok}/{total} trajectories recovered; {fuzz_bad}/1000 centroid mismatches"))
}

/// Shortest simple path by exhaustive depth-first enumeration (branch and bound).
fn exhaustive_shortest(maze: &GridMaze) -> Option<usize> {
    fn dfs(maze: &GridMaze, cur: Cell, len: usize, seen: &mut Vec<bool>, best: &mut Option<usize>) {
        if cur == maze.goal() {
            *best = Some(best.map_or(len, |b| b.min(len)));
            return;
        }
        if best.is_some_and(|b| len + manhattan(cur, maze.goal()) >= b) {
            return;
        }
        for n in cur.neighbors(maze.size()) {
            let i = maze.index(n);
            if maze.is_open(n) && !seen[i] {
                seen[i] = true;
                dfs(maze, n, len + 1, seen, best);
                seen[i] = false;
            }
        }
    }
    let mut seen = vec![false; maze.size() * maze.size()];
    seen[maze.index(maze.start())] = true;
    let mut best = None;
    dfs(maze, maze.start(), 0, &mut seen, &mut best);
    best
}

fn c4_bfs_oracle() -> Outcome {
    let mut mismatches = 0;
    for i in 0..100u64 {
        let size = 3 + (i % 4) as usize;
        let maze = generate_maze(size, DENSITIES[(i % 4) as usize], if (i / 4) % 2 == 0 { Variant::Norm } else { Variant::Vary }, 4000 + i).unwrap();
        let bfs = bfs_shortest_path(&maze).map(|p| p.moves());
        mismatches += (bfs != exhaustive_shortest(&maze)) as usize;
    }
    check(mismatches == 0, format!("{mismatches} mismatches over 100 mazes of size 3-6"))
}

fn c5_calibration() -> Outcome {
    let profile = CalibrationProfile::shipped();
    let s = estimate(&profile.generator, &Suite::new(500, profile.master_seed)).map_err(|e| e.to_string())?;
    let ok = (0.90..=0.96).contains(&s.convergence)
        && s.refine_diversity <= 0.28
        && (0.60..=0.76).contains(&s.cross_seed_diversity)
        && s.long_horizon_success < 0.10;
    check(
        ok,
        format!(
            "C(step {}) = {:.3}, refinement diversity {:.3}, cross-seed diversity {:.3}, success at >= 13 moves {:.3} ({} rollouts)",
            s.probe_step, s.convergence, s.refine_diversity, s.cross_seed_diversity, s.long_horizon_success, s.rollouts
        ),
    )
}

fn c6_epbs_dominance() -> Outcome {
    let cfg = CalibrationProfile::shipped().generator;
    let ev = Evaluator::default();
    let b = Budget::new(400, 5, 2, T).unwrap();
    let (mut e, mut o) = (Vec::new(), Vec::new());
    for i in 0..200 {
        let m = grid_entry(6, i, 66).maze;
        e.push(epbs(&m, &cfg, &b, 7, &ev).map_err(|x| x.to_string())?.any_success());
        o.push(best_of_n(&m, &cfg, 10, 2, 7, &ev).map_err(|x| x.to_string())?.any_success());
    }
    let st = sign_test(&e, &o).unwrap();
    let count = |v: &[bool]| v.iter().filter(|&&x| x).count();
    check(
        st.p_value < 0.05 && count(&e) > count(&o),
        format!("pass@2 EPBS {}/200 vs best-of-N {}/200; wins {} losses {}, p = {:.2e}", count(&e), count(&o), st.wins, st.losses, st.p_value),
    )
}

fn c7_reduction() -> Outcome {
    let cfg = CalibrationProfile::shipped().generator;
    let ev = Evaluator::default();
    let b = Budget::new(400, T, 2, T).unwrap();
    let mut identical = 0;
    for i in 0..50 {
        let m = grid_entry(4 + 2 * (i % 4), i, 77).maze;
        let a = serde_json::to_string(&epbs(&m, &cfg, &b, 11, &ev).unwrap()).unwrap();
        let z = serde_json::to_string(&best_of_n(&m, &cfg, 10, 2, 11, &ev).unwrap()).unwrap();
        identical += (a == z) as usize;
    }
    check(identical == 50, format!("{identical}/50 byte-identical search results with tau = T"))
}

fn c8_chaining_gain() -> Outcome {
    let cfg = CalibrationProfile::shipped().generator;
    let ev = Evaluator::default();
    let b = Budget::new(400, 5, 2, T).unwrap();
    let mut mazes = Vec::new();
    let mut i = 0;
    while mazes.len() < 100 {
        let e = grid_entry(8 + 2 * (i % 2), i / 2, 88);
        if (10..=13).contains(&e.bfs_moves) {
            mazes.push(e.maze);
        }
        i += 1;
    }
    let (mut single, mut chained) = (0, 0);
    for (j, m) in mazes.iter().enumerate() {
        single += epbs(m, &cfg, &b, j as u64, &ev).unwrap().any_success() as usize;
        chained += chain_solve(m, &cfg, &b, 3, j as u64, &ev).unwrap().verdict.success as usize;
    }
    check(
        chained >= 3 * single && chained > 0,
        format!("BFS 10-13 moves, D = 3: single-round {single}/100, chained {chained}/100"),
    )
}

fn c9_c10_difficulty_and_verifier() -> (Outcome, Outcome) {
    let cfg = CalibrationProfile::shipped().generator;
    let ev = Evaluator::default();
    let b = Budget::new(400, 5, 2, T).unwrap();
    let mut diff_ok = true;
    let mut diff = Vec::new();
    for size in [6, 8, 10] {
        let (mut path, mut dens, mut succ) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..120 {
            let e = grid_entry(size, i, 99);
            path.push(e.bfs_moves as f64);
            dens.push(e.density);
            succ.push(epbs(&e.maze, &cfg, &b, 5, &ev).unwrap().any_success() as u8 as f64);
        }
        let rp = pearson(&path, &succ).unwrap_or(f64::NAN);
        let rd = pearson(&dens, &succ).unwrap_or(f64::NAN);
        diff_ok &= rp <= -0.4 && rd.abs() <= 0.15;
        diff.push(format!("size {size}: r(path) {rp:.3}, r(density) {rd:.3}"));
    }

    let mut ver_ok = true;
    let mut ver = Vec::new();
    let (mut top, mut random) = (0.0, 0.0);
    for size in [4, 6, 8, 10] {
        let (mut scores, mut labels) = (Vec::new(), Vec::new());
        for i in 0..40 {
            let e = grid_entry(size, i, 1010);
            let pa = analyze_pool(&e.maze, &cfg, &b, 5, &ev).unwrap();
            top += pa.selected_success() as u8 as f64;
            random += pa.random_k_success(2);
            scores.extend(pa.probe_scores);
            labels.extend(pa.final_success);
        }
        match roc_auc(&scores, &labels) {
            Ok(auc) => {
                ver_ok &= auc > 0.8;
                ver.push(format!("size {size} AUC {auc:.3}"));
            }
            Err(_) => ver.push(format!("size {size} AUC undefined (single class)")),
        }
    }
    ver_ok &= top >= 1.5 * random;
    ver.push(format!("top-2 {top} vs random-2 {random:.1}"));
    (check(diff_ok, diff.join("; ")), check(ver_ok, ver.join("; ")))
}

/// Priority rules written out independently of the library.
fn taxonomy_oracle(traj: &[Cell], maze: &GridMaze, meta: &TrajectoryMeta) -> FailureClass {
    let cut = match traj.iter().position(|&x| x == maze.goal()) {
        Some(i) => &traj[..=i],
        None => traj,
    };
    let g = maze.size();
    let off = |x: &Cell| x.row >= g || x.col >= g;
    if meta.goal_drift {
        return FailureClass::ConstraintGoalDrift;
    }
    if cut.iter().any(|x| !off(x) && maze.is_obstacle(*x)) {
        return FailureClass::ConstraintLakeEntry;
    }
    let jump = cut.windows(2).any(|w| w[0].row.abs_diff(w[1].row) + w[0].col.abs_diff(w[1].col) > 1);
    if cut.iter().any(off) || jump || meta.extra_agent {
        return FailureClass::ConstraintIllegalMove;
    }
    if meta.tracking_failed {
        return FailureClass::DegenerateTracking;
    }
    if cut[0] != maze.start() {
        return FailureClass::DegenerateCorrupt;
    }
    let end = *cut.last().unwrap();
    if end == maze.goal() {
        return FailureClass::None;
    }
    let distinct: BTreeSet<Cell> = cut.iter().copied().collect();
    let d = |a: Cell, b: Cell| a.row.abs_diff(b.row) + a.col.abs_diff(b.col);
    if distinct.len() <= 2 && d(end, maze.goal()) >= d(maze.start(), maze.goal()) {
        return FailureClass::DegenerateStatic;
    }
    let bfs = |from: Cell| {
        let mut dist = vec![usize::MAX; g * g];
        let mut q = VecDeque::from([from]);
        dist[from.row * g + from.col] = 0;
        while let Some(x) = q.pop_front() {
            for (dr, dc) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (r, k) = (x.row as i64 + dr, x.col as i64 + dc);
                if r < 0 || k < 0 || r >= g as i64 || k >= g as i64 {
                    continue;
                }
                let y = c(r as usize, k as usize);
                if !maze.is_obstacle(y) && dist[y.row * g + y.col] == usize::MAX {
                    dist[y.row * g + y.col] = dist[x.row * g + x.col] + 1;
                    q.push_back(y);
                }
            }
        }
        dist
    };
    let (fs, tg) = (bfs(maze.start()), bfs(maze.goal()));
    let i = end.row * g + end.col;
    if fs[i] != usize::MAX && tg[i] != usize::MAX && fs[i] + tg[i] == fs[maze.goal().row * g + maze.goal().col] {
        FailureClass::HorizonValidStall
    } else {
        FailureClass::HorizonWrongRoute
    }
}

fn c11_taxonomy_totality() -> Outcome {
    let mazes = [
        GridMaze::new(3, c(0, 0), c(2, 2), &[c(1, 1)], Variant::Vary).unwrap(),
        GridMaze::new(3, c(0, 0), c(0, 2), &[c(0, 1), c(1, 1)], Variant::Vary).unwrap(),
        GridMaze::new(3, c(0, 0), c(0, 2), &[], Variant::Vary).unwrap(),
    ];
    // Nine in-grid cells plus one off-grid cell.
    let mut alphabet: Vec<Cell> = (0..9).map(|i| c(i / 3, i % 3)).collect();
    alphabet.push(c(0, 3));
    let metas: Vec<TrajectoryMeta> = (0..8)
        .map(|b| TrajectoryMeta {
            goal_drift: b & 1 != 0,
            extra_agent: b & 2 != 0,
            tracking_failed: b & 4 != 0,
        })
        .collect();
    let (mut judged, mut failures, mut bad) = (0u64, 0u64, 0u64);
    let mut seen = BTreeSet::new();
    let mut traj = Vec::with_capacity(6);
    for maze in &mazes {
        for len in 1..=6u32 {
            for code in 0..10u64.pow(len) {
                traj.clear();
                let mut x = code;
                for _ in 0..len {
                    traj.push(alphabet[(x % 10) as usize]);
                    x /= 10;
                }
                for meta in &metas {
                    let v = judge_success(&traj, maze, meta);
                    let want = taxonomy_oracle(&traj, maze, meta);
                    judged += 1;
                    if !v.success {
                        failures += 1;
                        seen.insert(v.failure_class);
                    }
                    let exclusive = v.success == (v.failure_class == FailureClass::None);
                    bad += (!exclusive || v.failure_class != want) as u64;
                }
            }
        }
    }
    check(
        bad == 0 && seen.len() == FailureClass::FAILURES.len() && !seen.contains(&FailureClass::None),
        format!("{judged} trajectories judged, {failures} failures, {} classes reached, {bad} disagreements with the priority oracle", seen.len()),
    )
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn c12_determinism() -> Outcome {
    // The default method grid and seed over one maze per (size, density) cell.
    let cfg = ExperimentConfig {
        corpus: CorpusSpec {
            per_cell: 1,
            ..CorpusSpec::default()
        },
        ..ExperimentConfig::default()
    };
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    for d in [&a, &b] {
        sweep::run_sweep(&cfg, d).map_err(|e| e.to_string())?;
        report::report(d).map_err(|e| e.to_string())?;
    }
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    let bytes: usize = ta.iter().map(|f| f.1.len()).sum();
    check(ta == tb && !ta.is_empty(), format!("{} files, {bytes} bytes, identical = {}", ta.len(), ta == tb))
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let names = [
        "c01_formula_oracles",
        "c02_verifier_formula",
        "c03_extraction_round_trip",
        "c04_bfs_oracle",
        "c05_calibration",
        "c06_epbs_dominance",
        "c07_reduction",
        "c08_chaining_gain",
        "c09_difficulty_structure",
        "c10_verifier_informativeness",
        "c11_taxonomy_totality",
        "c12_determinism",
    ];
    if args.iter().any(|a| a == "--list") {
        for n in names {
            println!("{n}: test");
        }
        return;
    }
    let filter: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let wanted = |n: &str| filter.is_empty() || filter.iter().any(|f| n.contains(f.as_str()));

    let mut failed = 0;
    let mut report_line = |name: &str, started: Instant, out: Outcome| {
        let secs = started.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("PASS {name}: {d} [{secs:.1} s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d} [{secs:.1} s]");
            }
        }
    };
    let guard = |f: &dyn Fn() -> Outcome| -> Outcome {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        })
    };

    let singles: [(usize, fn() -> Outcome); 8] = [
        (0, c1_formula_oracles),
        (1, c2_verifier_formula),
        (2, c3_extraction_round_trip),
        (3, c4_bfs_oracle),
        (4, c5_calibration),
        (5, c6_epbs_dominance),
        (6, c7_reduction),
        (7, c8_chaining_gain),
    ];
    for (i, f) in singles {
        if wanted(names[i]) {
            let t = Instant::now();
            report_line(names[i], t, guard(&f));
        }
    }
    if wanted(names[8]) || wanted(names[9]) {
        let t = Instant::now();
        let (d, v) = catch_unwind(c9_c10_difficulty_and_verifier).unwrap_or_else(|_| (Err("panic".into()), Err("panic".into())));
        report_line(names[8], t, d);
        report_line(names[9], t, v);
    }
    for (i, f) in [(10, c11_taxonomy_totality as fn() -> Outcome), (11, c12_determinism)] {
        if wanted(names[i]) {
            let t = Instant::now();
            report_line(names[i], t, guard(&f));
        }
    }
    println!("\nacceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
