//! Aggregate tables and a markdown summary from sweep result files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use planlab::metrics::{mean, pearson, roc_auc, sign_test, success_by_path_length, LengthBin, LengthRecord};
use planlab::search::PoolAnalysis;
use planlab::verify::FailureClass;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::sweep::{write_csv, write_text, PoolRow, Provenance, SweepRecord, POOLS, PROVENANCE, RECORDS};

pub const REPORT_DIR: &str = "report";
pub const SUMMARY: &str = "summary.md";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassRow {
    pub size: usize,
    pub method: String,
    pub kind: String,
    pub budget: u64,
    pub tau: u32,
    pub k: usize,
    pub n: usize,
    pub successes: usize,
    pub rate: f64,
    pub mean_nfe: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthRow {
    pub method: String,
    pub bin: String,
    pub n: usize,
    pub successes: usize,
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub size: usize,
    pub method: String,
    pub n: usize,
    /// Pearson r of BFS moves against success; empty when undefined.
    pub r_path: Option<f64>,
    /// Pearson r of obstacle density against success; empty when undefined.
    pub r_density: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub size: usize,
    pub method: String,
    pub group: String,
    pub class: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedRow {
    pub size: usize,
    pub epbs: String,
    pub best_of_n: String,
    pub n: usize,
    pub epbs_successes: usize,
    pub bon_successes: usize,
    pub wins: usize,
    pub losses: usize,
    /// One-sided sign-test p-value for EPBS > best-of-N.
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub chain: String,
    pub single: String,
    pub bin: String,
    pub n: usize,
    pub single_successes: usize,
    pub chain_successes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifierRow {
    pub size: usize,
    pub mazes: usize,
    pub auc: Option<f64>,
    /// Mazes where the verifier's selection contains a success.
    pub selected: usize,
    /// Expected successes of a uniformly random selection of the same size.
    pub random: f64,
    /// Mazes where any pool member succeeds.
    pub oracle: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub provenance: Option<Provenance>,
    pub records: usize,
    pub pass_at_k: Vec<PassRow>,
    pub tau_ablation: Vec<PassRow>,
    pub k_ablation: Vec<PassRow>,
    pub by_length: Vec<LengthRow>,
    pub correlations: Vec<CorrelationRow>,
    pub failures: Vec<FailureRow>,
    pub paired: Vec<PairedRow>,
    pub chaining: Vec<ChainRow>,
    pub verifier: Vec<VerifierRow>,
}

fn group_by<K: Ord, T>(items: &[T], key: impl Fn(&T) -> K) -> BTreeMap<K, Vec<&T>> {
    let mut m: BTreeMap<K, Vec<&T>> = BTreeMap::new();
    for it in items {
        m.entry(key(it)).or_default().push(it);
    }
    m
}

pub fn pass_at_k(records: &[SweepRecord]) -> Vec<PassRow> {
    group_by(records, |r| (r.size, r.method.clone()))
        .into_iter()
        .map(|((size, method), rs)| {
            let r0 = rs[0];
            let successes = rs.iter().filter(|r| r.success).count();
            let nfe: Vec<f64> = rs.iter().map(|r| r.nfe as f64).collect();
            PassRow {
                size,
                method,
                kind: r0.kind.clone(),
                budget: r0.budget,
                tau: r0.tau,
                k: r0.k,
                n: rs.len(),
                successes,
                rate: successes as f64 / rs.len() as f64,
                mean_nfe: mean(&nfe).unwrap_or(0.0),
            }
        })
        .collect()
}

/// Single-round EPBS rows whose group (fixed by `fixed`) varies in `varied`.
fn ablation<K: Ord + Clone>(rows: &[PassRow], fixed: impl Fn(&PassRow) -> K, varied: impl Fn(&PassRow) -> u64) -> Vec<PassRow> {
    let epbs: Vec<PassRow> = rows.iter().filter(|r| r.kind == "epbs").cloned().collect();
    let mut out = Vec::new();
    for (_, mut g) in group_by(&epbs, |r| fixed(r)) {
        g.sort_by_key(|r| varied(r));
        g.dedup_by_key(|r| varied(r));
        if g.len() > 1 {
            out.extend(g.into_iter().cloned());
        }
    }
    out
}

pub fn tau_ablation(rows: &[PassRow]) -> Vec<PassRow> {
    ablation(rows, |r| (r.size, r.budget, r.k), |r| r.tau as u64)
}

pub fn k_ablation(rows: &[PassRow]) -> Vec<PassRow> {
    ablation(rows, |r| (r.size, r.budget, r.tau), |r| r.k as u64)
}

pub fn by_length(records: &[SweepRecord], bins: &[LengthBin]) -> Vec<LengthRow> {
    let mut out = Vec::new();
    for (method, rs) in group_by(records, |r| r.method.clone()) {
        let lr: Vec<LengthRecord> = rs
            .iter()
            .map(|r| LengthRecord {
                path_len: r.bfs_moves,
                success: r.success,
            })
            .collect();
        for b in success_by_path_length(&lr, bins) {
            out.push(LengthRow {
                method: method.clone(),
                bin: b.bin.label(),
                n: b.n,
                successes: b.successes,
                rate: b.rate,
            });
        }
    }
    out
}

pub fn correlations(records: &[SweepRecord]) -> Vec<CorrelationRow> {
    group_by(records, |r| (r.size, r.method.clone()))
        .into_iter()
        .map(|((size, method), rs)| {
            let y: Vec<f64> = rs.iter().map(|r| r.success as u8 as f64).collect();
            let path: Vec<f64> = rs.iter().map(|r| r.bfs_moves as f64).collect();
            let dens: Vec<f64> = rs.iter().map(|r| r.density).collect();
            CorrelationRow {
                size,
                method,
                n: rs.len(),
                r_path: pearson(&path, &y).ok(),
                r_density: pearson(&dens, &y).ok(),
            }
        })
        .collect()
}

fn parse_class(s: &str) -> Option<FailureClass> {
    FailureClass::FAILURES.into_iter().find(|c| c.as_str() == s)
}

/// Failure counts per class; every class appears, including empty ones.
pub fn failure_histogram(records: &[SweepRecord]) -> Vec<FailureRow> {
    let mut out = Vec::new();
    for ((size, method), rs) in group_by(records, |r| (r.size, r.method.clone())) {
        let failed: Vec<&&SweepRecord> = rs.iter().filter(|r| !r.success).collect();
        for class in FailureClass::FAILURES {
            out.push(FailureRow {
                size,
                method: method.clone(),
                group: class.group().as_str().into(),
                class: class.as_str().into(),
                count: failed.iter().filter(|r| r.failure_class == class.as_str()).count(),
            });
        }
        let unknown = failed.iter().filter(|r| parse_class(&r.failure_class).is_none()).count();
        if unknown > 0 {
            out.push(FailureRow {
                size,
                method: method.clone(),
                group: "unknown".into(),
                class: "unknown".into(),
                count: unknown,
            });
        }
    }
    out
}

fn outcomes<'a>(records: impl IntoIterator<Item = &'a SweepRecord>) -> BTreeMap<String, bool> {
    records.into_iter().map(|r| (r.maze_id.clone(), r.success)).collect()
}

/// EPBS against best-of-N at equal budget and K, paired by maze.
pub fn paired(records: &[SweepRecord]) -> Vec<PairedRow> {
    let mut out = Vec::new();
    for (size, rs) in group_by(records, |r| r.size) {
        let by_method = group_by(&rs, |r| r.method.clone());
        for (em, e) in by_method.iter().filter(|(_, v)| v[0].kind == "epbs") {
            for (bm, b) in by_method
                .iter()
                .filter(|(_, v)| v[0].kind == "best_of_n" && v[0].budget == e[0].budget && v[0].k == e[0].k)
            {
                let (eo, bo) = (outcomes(e.iter().map(|r| **r)), outcomes(b.iter().map(|r| **r)));
                let (xs, ys): (Vec<bool>, Vec<bool>) =
                    eo.iter().filter_map(|(id, &x)| bo.get(id).map(|&y| (x, y))).unzip();
                let st = sign_test(&xs, &ys).expect("paired vectors have equal length");
                out.push(PairedRow {
                    size,
                    epbs: em.clone(),
                    best_of_n: bm.clone(),
                    n: xs.len(),
                    epbs_successes: xs.iter().filter(|&&x| x).count(),
                    bon_successes: ys.iter().filter(|&&y| y).count(),
                    wins: st.wins,
                    losses: st.losses,
                    p_value: st.p_value,
                });
            }
        }
    }
    out
}

/// Chaining against single-round EPBS at the same per-round settings, by BFS length band.
pub fn chaining(records: &[SweepRecord], bins: &[LengthBin]) -> Vec<ChainRow> {
    let by_method = group_by(records, |r| r.method.clone());
    let mut out = Vec::new();
    for (cm, c) in by_method.iter().filter(|(_, v)| v[0].kind == "chain") {
        let c0 = c[0];
        for (sm, s) in by_method
            .iter()
            .filter(|(_, v)| v[0].kind == "epbs" && v[0].budget == c0.budget && v[0].tau == c0.tau && v[0].k == c0.k)
        {
            let single = outcomes(s.iter().copied());
            for bin in bins {
                let pairs: Vec<(bool, bool)> = c
                    .iter()
                    .filter(|r| bin.contains(r.bfs_moves))
                    .filter_map(|r| single.get(&r.maze_id).map(|&x| (x, r.success)))
                    .collect();
                out.push(ChainRow {
                    chain: cm.clone(),
                    single: sm.clone(),
                    bin: bin.label(),
                    n: pairs.len(),
                    single_successes: pairs.iter().filter(|p| p.0).count(),
                    chain_successes: pairs.iter().filter(|p| p.1).count(),
                });
            }
        }
    }
    out
}

/// Probe-score AUC and selection quality per size from pool analyses.
pub fn verifier(pools: &[PoolRow]) -> Vec<VerifierRow> {
    let mut out = Vec::new();
    for (size, rows) in group_by(pools, |p| p.size) {
        let scores: Vec<f64> = rows.iter().map(|p| p.probe_score).collect();
        let labels: Vec<bool> = rows.iter().map(|p| p.final_success).collect();
        let mazes = group_by(&rows, |p| p.maze_id.clone());
        let (mut selected, mut random, mut oracle) = (0, 0.0, 0);
        for rs in mazes.values() {
            let pa = PoolAnalysis {
                probe_scores: rs.iter().map(|p| p.probe_score).collect(),
                final_success: rs.iter().map(|p| p.final_success).collect(),
                selected: rs.iter().filter(|p| p.selected).map(|p| p.candidate).collect(),
            };
            selected += pa.selected_success() as usize;
            oracle += pa.oracle_success() as usize;
            random += pa.random_k_success(pa.selected.len());
        }
        out.push(VerifierRow {
            size,
            mazes: mazes.len(),
            auc: roc_auc(&scores, &labels).ok(),
            selected,
            random,
            oracle,
        });
    }
    out
}

pub fn summarize(records: &[SweepRecord], pools: &[PoolRow], provenance: Option<Provenance>) -> Summary {
    let bins = LengthBin::default_bands();
    let pass = pass_at_k(records);
    Summary {
        provenance,
        records: records.len(),
        tau_ablation: tau_ablation(&pass),
        k_ablation: k_ablation(&pass),
        pass_at_k: pass,
        by_length: by_length(records, &bins),
        correlations: correlations(records),
        failures: failure_histogram(records),
        paired: paired(records),
        chaining: chaining(records, &bins),
        verifier: verifier(pools),
    }
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().collect::<std::result::Result<Vec<T>, _>>().map_err(Into::into)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.3}"))
}

fn table(md: &mut String, title: &str, header: &[&str], rows: Vec<Vec<String>>) {
    let _ = writeln!(md, "## {title}\n");
    if rows.is_empty() {
        md.push_str("No data.\n\n");
        return;
    }
    let _ = writeln!(md, "| {} |", header.join(" | "));
    let _ = writeln!(md, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(md, "| {} |", r.join(" | "));
    }
    md.push('\n');
}

fn pass_rows(rows: &[PassRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.size.to_string(),
                r.method.clone(),
                r.budget.to_string(),
                r.tau.to_string(),
                r.k.to_string(),
                r.n.to_string(),
                format!("{:.3}", r.rate),
                format!("{:.1}", r.mean_nfe),
            ]
        })
        .collect()
}

pub fn markdown(s: &Summary) -> String {
    let mut md = String::from("# Sweep report\n\n");
    match &s.provenance {
        Some(p) => {
            let _ = writeln!(md, "- config: `{}`", p.config_hash);
            let _ = writeln!(md, "- profile: `{}`", p.profile_hash);
            let _ = writeln!(md, "- code: {}", p.code_version);
        }
        None => md.push_str("- provenance: unavailable\n"),
    }
    let _ = writeln!(md, "- records: {}\n", s.records);

    let pass_header = ["size", "method", "budget", "tau", "K", "n", "pass@K", "mean NFE"];
    table(&mut md, "pass@K by size and method", &pass_header, pass_rows(&s.pass_at_k));
    table(&mut md, "Probe step ablation", &pass_header, pass_rows(&s.tau_ablation));
    table(&mut md, "Beam size ablation", &pass_header, pass_rows(&s.k_ablation));
    table(
        &mut md,
        "EPBS vs best-of-N (paired sign test)",
        &["size", "EPBS", "best-of-N", "n", "EPBS ok", "BoN ok", "wins", "losses", "p"],
        s.paired
            .iter()
            .map(|r| {
                vec![
                    r.size.to_string(),
                    r.epbs.clone(),
                    r.best_of_n.clone(),
                    r.n.to_string(),
                    r.epbs_successes.to_string(),
                    r.bon_successes.to_string(),
                    r.wins.to_string(),
                    r.losses.to_string(),
                    format!("{:.3e}", r.p_value),
                ]
            })
            .collect(),
    );
    table(
        &mut md,
        "Success by BFS path length",
        &["method", "moves", "n", "rate"],
        s.by_length
            .iter()
            .map(|r| vec![r.method.clone(), r.bin.clone(), r.n.to_string(), opt(r.rate)])
            .collect(),
    );
    table(
        &mut md,
        "Chaining vs single round",
        &["chain", "single", "moves", "n", "single ok", "chain ok"],
        s.chaining
            .iter()
            .map(|r| {
                vec![
                    r.chain.clone(),
                    r.single.clone(),
                    r.bin.clone(),
                    r.n.to_string(),
                    r.single_successes.to_string(),
                    r.chain_successes.to_string(),
                ]
            })
            .collect(),
    );
    table(
        &mut md,
        "Correlation with success",
        &["size", "method", "n", "r(path)", "r(density)"],
        s.correlations
            .iter()
            .map(|r| vec![r.size.to_string(), r.method.clone(), r.n.to_string(), opt(r.r_path), opt(r.r_density)])
            .collect(),
    );
    table(
        &mut md,
        "Verifier",
        &["size", "mazes", "AUC", "selected", "random", "oracle"],
        s.verifier
            .iter()
            .map(|r| {
                vec![
                    r.size.to_string(),
                    r.mazes.to_string(),
                    opt(r.auc),
                    r.selected.to_string(),
                    format!("{:.1}", r.random),
                    r.oracle.to_string(),
                ]
            })
            .collect(),
    );
    table(
        &mut md,
        "Failure classes",
        &["size", "method", "group", "class", "count"],
        s.failures
            .iter()
            .filter(|r| r.count > 0)
            .map(|r| vec![r.size.to_string(), r.method.clone(), r.group.clone(), r.class.clone(), r.count.to_string()])
            .collect(),
    );
    md
}

/// Read a sweep directory, write `report/` tables and `report/summary.md`.
pub fn report(dir: &Path) -> Result<Summary> {
    let records_path = dir.join(RECORDS);
    if !records_path.exists() {
        return Err(BenchError::Missing(records_path));
    }
    let records: Vec<SweepRecord> = read_csv(&records_path)?;
    let pools_path = dir.join(POOLS);
    let pools: Vec<PoolRow> = if pools_path.exists() { read_csv(&pools_path)? } else { Vec::new() };
    let prov_path = dir.join(PROVENANCE);
    let provenance = if prov_path.exists() {
        let text = std::fs::read_to_string(&prov_path).map_err(|e| BenchError::io(&prov_path, e))?;
        Some(serde_json::from_str(&text)?)
    } else {
        None
    };
    let s = summarize(&records, &pools, provenance);

    let out = dir.join(REPORT_DIR);
    std::fs::create_dir_all(&out).map_err(|e| BenchError::io(&out, e))?;
    write_csv(&out.join("pass_at_k.csv"), &s.pass_at_k)?;
    write_csv(&out.join("tau_ablation.csv"), &s.tau_ablation)?;
    write_csv(&out.join("k_ablation.csv"), &s.k_ablation)?;
    write_csv(&out.join("success_by_length.csv"), &s.by_length)?;
    write_csv(&out.join("correlations.csv"), &s.correlations)?;
    write_csv(&out.join("failure_histogram.csv"), &s.failures)?;
    write_csv(&out.join("paired.csv"), &s.paired)?;
    write_csv(&out.join("chaining.csv"), &s.chaining)?;
    write_csv(&out.join("verifier.csv"), &s.verifier)?;
    write_text(&out.join(SUMMARY), &markdown(&s))?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, size: usize, method: &str, kind: &str, moves: usize, density: f64, success: bool, class: &str) -> SweepRecord {
        SweepRecord {
            maze_id: id.into(),
            size,
            density,
            variant: "norm".into(),
            bfs_moves: moves,
            method: method.into(),
            kind: kind.into(),
            budget: 400,
            tau: if kind == "best_of_n" { 40 } else { 5 },
            k: 2,
            depth: 1,
            success,
            failure_class: if success { "none".into() } else { class.into() },
            nfe: 400,
            candidates: 73,
            rounds: 1,
            confidence: Some(0.5),
            path_len: moves,
            config_hash: "c".into(),
            profile_hash: "p".into(),
            code_version: "v".into(),
        }
    }

    #[test]
    fn empty_results_give_valid_summary() {
        let s = summarize(&[], &[], None);
        assert_eq!(s.records, 0);
        assert!(s.pass_at_k.is_empty() && s.failures.is_empty() && s.verifier.is_empty());
        let md = markdown(&s);
        assert!(md.starts_with("# Sweep report"));
        assert!(md.contains("No data."));
    }

    #[test]
    fn histogram_partitions_failures() {
        let classes = ["horizon_wrong_route", "constraint_lake_entry", "horizon_wrong_route", "degenerate_static"];
        let mut rs: Vec<SweepRecord> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| rec(&format!("m{i}"), 6, "epbs", "epbs", 8, 0.2, false, c))
            .collect();
        rs.push(rec("m9", 6, "epbs", "epbs", 8, 0.2, true, ""));
        let h = failure_histogram(&rs);
        assert_eq!(h.len(), 8);
        assert_eq!(h.iter().map(|r| r.count).sum::<usize>(), 4);
        assert_eq!(h.iter().find(|r| r.class == "horizon_wrong_route").unwrap().count, 2);
    }

    #[test]
    fn paired_and_chaining_match_by_maze() {
        let mut rs = Vec::new();
        for i in 0..6 {
            let id = format!("m{i}");
            rs.push(rec(&id, 8, "epbs", "epbs", 11, 0.3, i < 4, "horizon_valid_stall"));
            rs.push(rec(&id, 8, "bon", "best_of_n", 11, 0.3, i < 1, "horizon_valid_stall"));
            rs.push(rec(&id, 8, "chain", "chain", 11, 0.3, true, ""));
        }
        let p = paired(&rs);
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].wins, p[0].losses, p[0].n), (3, 0, 6));
        assert!((p[0].p_value - 0.125).abs() < 1e-12);
        let c = chaining(&rs, &LengthBin::default_bands());
        let band = c.iter().find(|r| r.bin == "10-13").unwrap();
        assert_eq!((band.n, band.single_successes, band.chain_successes), (6, 4, 6));
    }

    #[test]
    fn correlation_and_bins() {
        let rs: Vec<SweepRecord> = (0..8)
            .map(|i| rec(&format!("m{i}"), 6, "epbs", "epbs", 6 + i, 0.2 + 0.1 * (i % 2) as f64, i < 4, "horizon_wrong_route"))
            .collect();
        let c = correlations(&rs);
        assert!(c[0].r_path.unwrap() < -0.8);
        assert!(c[0].r_density.unwrap().abs() < 1e-12);
        let all_ok: Vec<SweepRecord> = rs.iter().cloned().map(|mut r| {
            r.success = true;
            r
        }).collect();
        assert_eq!(correlations(&all_ok)[0].r_path, None);
        for row in by_length(&all_ok, &LengthBin::default_bands()) {
            assert!(row.n == 0 || row.rate == Some(1.0));
        }
    }

    #[test]
    fn missing_records_reported() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(report(dir.path()), Err(BenchError::Missing(_))));
    }
}
