//! Experiment configuration: corpus grid, method list and provenance inputs.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use planlab::calibration::CalibrationProfile;
use planlab::maze::MAX_DENSITY;
use planlab::search::candidate_count;
use planlab::Variant;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Maze grid: `per_cell` mazes for every (size, density) pair, variants
/// assigned round-robin by index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub sizes: Vec<usize>,
    pub densities: Vec<f64>,
    pub variants: Vec<Variant>,
    pub per_cell: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            sizes: vec![4, 6, 8, 10],
            densities: vec![0.2, 0.3, 0.4, 0.5],
            variants: vec![Variant::Norm, Variant::Vary],
            per_cell: 40,
        }
    }
}

impl CorpusSpec {
    pub fn total(&self) -> usize {
        self.sizes.len() * self.densities.len() * self.per_cell
    }

    fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.densities.is_empty() || self.variants.is_empty() {
            return Err(BenchError::Config("corpus needs at least one size, density and variant".into()));
        }
        if let Some(s) = self.sizes.iter().find(|&&s| !(2..=32).contains(&s)) {
            return Err(BenchError::Config(format!("maze size {s} outside 2..=32")));
        }
        if let Some(d) = self.densities.iter().find(|&&d| !(0.0..=MAX_DENSITY).contains(&d)) {
            return Err(BenchError::Config(format!("density {d} outside [0, {MAX_DENSITY}]")));
        }
        if let Some(v) = self.variants.iter().find(|v| !matches!(v, Variant::Norm | Variant::Vary)) {
            return Err(BenchError::Config(format!("corpus variant {v} is not norm or vary")));
        }
        Ok(())
    }
}

/// One search method at one parameter point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    BestOfN { budget: u64, k: usize },
    Epbs { budget: u64, tau: u32, k: usize },
    Chain { budget: u64, tau: u32, k: usize, depth: usize },
}

impl Method {
    pub fn kind(&self) -> &'static str {
        match self {
            Method::BestOfN { .. } => "best_of_n",
            Method::Epbs { .. } => "epbs",
            Method::Chain { .. } => "chain",
        }
    }

    pub fn budget(&self) -> u64 {
        match *self {
            Method::BestOfN { budget, .. } | Method::Epbs { budget, .. } | Method::Chain { budget, .. } => budget,
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            Method::BestOfN { k, .. } | Method::Epbs { k, .. } | Method::Chain { k, .. } => k,
        }
    }

    /// Probe step; best-of-N probes at the end of the schedule.
    pub fn tau(&self, steps: u32) -> u32 {
        match *self {
            Method::BestOfN { .. } => steps,
            Method::Epbs { tau, .. } | Method::Chain { tau, .. } => tau,
        }
    }

    pub fn depth(&self) -> usize {
        match *self {
            Method::Chain { depth, .. } => depth,
            _ => 1,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    fn validate(&self, steps: u32) -> Result<()> {
        let tau = self.tau(steps);
        if tau == 0 || tau > steps {
            return Err(BenchError::Config(format!("{self}: tau must lie in 1..={steps}")));
        }
        if self.k() == 0 {
            return Err(BenchError::Config(format!("{self}: beam size must be at least 1")));
        }
        if let Method::Chain { depth: 0, .. } = self {
            return Err(BenchError::Config(format!("{self}: chain depth must be at least 1")));
        }
        let n = match self {
            Method::BestOfN { budget, .. } => (*budget / steps as u64) as usize,
            _ => candidate_count(self.budget(), steps, tau, self.k()).map_err(|e| BenchError::Config(format!("{self}: {e}")))?,
        };
        if n < self.k() {
            return Err(BenchError::Config(format!("{self}: budget affords {n} candidates, fewer than K")));
        }
        Ok(())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Method::BestOfN { budget, k } => write!(f, "bon-b{budget}-k{k}"),
            Method::Epbs { budget, tau, k } => write!(f, "epbs-b{budget}-t{tau}-k{k}"),
            Method::Chain { budget, tau, k, depth } => write!(f, "chain-b{budget}-t{tau}-k{k}-d{depth}"),
        }
    }
}

/// Per-candidate probe-vs-outcome analysis for one EPBS operating point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolSpec {
    pub budget: u64,
    pub tau: u32,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub corpus: CorpusSpec,
    pub methods: Vec<Method>,
    /// Denoising steps T.
    pub steps: u32,
    pub master_seed: u64,
    /// Output directory; the CLI's `--out` and `PLANLAB_OUT` take precedence.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Calibration profile file; the bundled profile when absent.
    #[serde(default)]
    pub profile: Option<PathBuf>,
    #[serde(default)]
    pub pool_analysis: Option<PoolSpec>,
}

impl Default for ExperimentConfig {
    /// The default sweep: best-of-N and EPBS at 120 and 400 NFEs, chaining at
    /// depth 3, and the probe-step and beam-size ablations at 400 NFEs.
    fn default() -> Self {
        let mut methods = vec![
            Method::BestOfN { budget: 120, k: 2 },
            Method::BestOfN { budget: 400, k: 2 },
            Method::Epbs { budget: 120, tau: 5, k: 2 },
            Method::Epbs { budget: 400, tau: 5, k: 2 },
            Method::Chain {
                budget: 400,
                tau: 5,
                k: 2,
                depth: 3,
            },
        ];
        for tau in [2, 3, 10, 15, 20] {
            methods.push(Method::Epbs { budget: 400, tau, k: 2 });
        }
        for k in [1, 3, 4, 5] {
            methods.push(Method::Epbs { budget: 400, tau: 5, k });
        }
        ExperimentConfig {
            corpus: CorpusSpec::default(),
            methods,
            steps: 40,
            master_seed: 2024,
            output_dir: None,
            profile: None,
            pool_analysis: Some(PoolSpec {
                budget: 400,
                tau: 5,
                k: 2,
            }),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => BenchError::Config(format!("config file {} not found", path.display())),
            _ => BenchError::io(path, e),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialisation cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(BenchError::Config("schedule needs at least one step".into()));
        }
        self.corpus.validate()?;
        let mut seen = BTreeSet::new();
        for m in &self.methods {
            m.validate(self.steps)?;
            if !seen.insert(m.label()) {
                return Err(BenchError::Config(format!("method {m} listed twice")));
            }
        }
        if let Some(p) = self.pool_analysis {
            Method::Epbs {
                budget: p.budget,
                tau: p.tau,
                k: p.k,
            }
            .validate(self.steps)?;
        }
        Ok(())
    }

    /// The referenced calibration profile, checked against the schedule.
    pub fn load_profile(&self) -> Result<CalibrationProfile> {
        let profile = match &self.profile {
            None => CalibrationProfile::shipped(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| BenchError::Config(format!("profile {}: {e}", path.display())))?;
                CalibrationProfile::from_json(&text).map_err(|e| BenchError::Config(format!("profile {}: {e}", path.display())))?
            }
        };
        if profile.generator.steps() != self.steps {
            return Err(BenchError::Config(format!(
                "profile schedule has T = {}, experiment expects T = {}",
                profile.generator.steps(),
                self.steps
            )));
        }
        Ok(profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(cfg.corpus.total(), 640);
        assert_eq!(cfg.methods.len(), 14);
    }

    #[test]
    fn labels() {
        assert_eq!(Method::BestOfN { budget: 400, k: 2 }.label(), "bon-b400-k2");
        assert_eq!(Method::Epbs { budget: 120, tau: 15, k: 2 }.label(), "epbs-b120-t15-k2");
        let c = Method::Chain {
            budget: 400,
            tau: 5,
            k: 2,
            depth: 3,
        };
        assert_eq!(c.label(), "chain-b400-t5-k2-d3");
        assert_eq!(c.tau(40), 5);
        assert_eq!(Method::BestOfN { budget: 400, k: 2 }.tau(40), 40);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ExperimentConfig::default();
        cfg.methods.push(Method::Epbs { budget: 400, tau: 5, k: 2 });
        assert!(matches!(cfg.validate(), Err(BenchError::Config(_))));

        let mut cfg = ExperimentConfig::default();
        cfg.methods = vec![Method::Epbs { budget: 60, tau: 5, k: 2 }];
        assert!(matches!(cfg.validate(), Err(BenchError::Config(_))));

        let mut cfg = ExperimentConfig::default();
        cfg.corpus.densities = vec![0.9];
        assert!(matches!(cfg.validate(), Err(BenchError::Config(_))));

        let mut cfg = ExperimentConfig::default();
        cfg.corpus.variants = vec![Variant::Detour];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.steps = 20;
        assert!(matches!(cfg.load_profile(), Err(BenchError::Config(_))));

        assert!(matches!(ExperimentConfig::from_json("{"), Err(BenchError::Config(_))));
    }
}
