//! Convergence, diversity, overlap and correlation statistics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::maze::Cell;
use crate::render::EnergyMap;
use crate::{Error, Result};

/// Cosine similarity of two flattened energy maps.
pub fn convergence(e_t: &EnergyMap, e_final: &EnergyMap) -> Result<f64> {
    cosine(&e_t.values, &e_final.values)
}

/// `1 - convergence`.
pub fn diversity(a: &EnergyMap, b: &EnergyMap) -> Result<f64> {
    Ok(1.0 - convergence(a, b)?)
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "energy maps differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedConvergence);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Intersection over union of visited-cell sets.
pub fn trajectory_iou(a: &[Cell], b: &[Cell]) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::EmptyInput("iou of two empty sets".into()));
    }
    let sa: BTreeSet<Cell> = a.iter().copied().collect();
    let sb: BTreeSet<Cell> = b.iter().copied().collect();
    let inter = sa.intersection(&sb).count();
    let union = sa.union(&sb).count();
    Ok(inter as f64 / union as f64)
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("pearson: length mismatch".into()));
    }
    if x.len() < 2 {
        return Err(Error::EmptyInput("pearson needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Inclusive path-length band; `hi = None` is open-ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBin {
    pub lo: usize,
    pub hi: Option<usize>,
}

impl LengthBin {
    pub fn contains(&self, len: usize) -> bool {
        len >= self.lo && self.hi.is_none_or(|h| len <= h)
    }

    pub fn label(&self) -> String {
        match self.hi {
            Some(h) if h == self.lo => format!("{h}"),
            Some(h) if self.lo == 0 => format!("<={h}"),
            Some(h) => format!("{}-{h}", self.lo),
            None => format!("{}+", self.lo),
        }
    }

    /// `<=9`, `10-13`, `14+`.
    pub fn default_bands() -> Vec<LengthBin> {
        vec![
            LengthBin { lo: 0, hi: Some(9) },
            LengthBin { lo: 10, hi: Some(13) },
            LengthBin { lo: 14, hi: None },
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthRecord {
    pub path_len: usize,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinRate {
    pub bin: LengthBin,
    pub n: usize,
    pub successes: usize,
    /// `None` for an empty bin.
    pub rate: Option<f64>,
}

pub fn success_by_path_length(records: &[LengthRecord], bins: &[LengthBin]) -> Vec<BinRate> {
    bins.iter()
        .map(|&bin| {
            let (n, successes) = records
                .iter()
                .filter(|r| bin.contains(r.path_len))
                .fold((0, 0), |(n, s), r| (n + 1, s + r.success as usize));
            BinRate {
                bin,
                n,
                successes,
                rate: (n > 0).then(|| successes as f64 / n as f64),
            }
        })
        .collect()
}

pub fn bin_rates_csv(rows: &[BinRate]) -> String {
    let mut out = String::from("bin,n,successes,rate\n");
    for r in rows {
        let rate = r.rate.map_or(String::new(), |v| format!("{v:.6}"));
        out.push_str(&format!("{},{},{},{}\n", r.bin.label(), r.n, r.successes, rate));
    }
    out
}

/// Area under the ROC curve (Mann-Whitney, ties count half).
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument("roc_auc: length mismatch".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedCorrelation("roc_auc needs both classes".into()));
    }
    // Midranks over tie groups.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_pos += mid * (i..=j).filter(|&k| labels[idx[k]]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos * neg) as f64)
}

/// One-sided exact sign test on paired binary outcomes.
///
/// Returns `P(X >= wins)` for `X ~ Binomial(wins + losses, 1/2)`, where a win
/// is a pair with `a` succeeding and `b` failing. Ties are discarded.
pub fn sign_test(a: &[bool], b: &[bool]) -> Result<SignTest> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument("sign_test: length mismatch".into()));
    }
    let wins = a.iter().zip(b).filter(|(x, y)| **x && !**y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| !**x && **y).count();
    Ok(SignTest {
        wins,
        losses,
        p_value: binomial_upper_tail(wins + losses, wins),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub p_value: f64,
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`, summed in log space.
pub fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let ln2 = std::f64::consts::LN_2;
    let mut log_c = 0.0; // ln C(n, 0)
    let mut terms = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if i > 0 {
            log_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        if i >= k {
            terms.push(log_c - n as f64 * ln2);
        }
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()).exp().min(1.0)
}

/// Per-step convergence against the final map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSeries {
    pub maze_id: String,
    pub seed: u64,
    /// `values[t - 1]` is the convergence at step `t`.
    pub values: Vec<f64>,
}

impl ConvergenceSeries {
    pub fn from_maps(maze_id: String, seed: u64, maps: &[EnergyMap]) -> Result<Self> {
        let last = maps
            .last()
            .ok_or_else(|| Error::EmptyInput("no energy maps".into()))?;
        let values = maps
            .iter()
            .map(|m| convergence(m, last))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvergenceSeries {
            maze_id,
            seed,
            values,
        })
    }

    pub fn at(&self, t: u32) -> Option<f64> {
        (t as usize).checked_sub(1).and_then(|i| self.values.get(i).copied())
    }
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}
