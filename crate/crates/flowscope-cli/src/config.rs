//! Flat key-value run configuration: `key = value` lines, `#` comments.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use flowscope::markov::WalkMode;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub edge_list: PathBuf,
    pub weighted: bool,
    pub directed: bool,
    pub follower_sets: Option<PathBuf>,
    pub compare_partition: Option<PathBuf>,
    pub teleport_alpha: f64,
    pub mode: WalkMode,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub n_runs: usize,
    pub base_seed: u64,
    pub rbs_alpha: f64,
    pub rbs_k_max: Option<usize>,
    pub gamma: f64,
    pub k_neighbor: usize,
    pub vi_threshold: f64,
    /// Bridgeness reports cover ordered pairs of this many largest
    /// communities of the chosen partition.
    pub top_communities: usize,
    pub output: PathBuf,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            edge_list: PathBuf::new(),
            weighted: false,
            directed: true,
            follower_sets: None,
            compare_partition: None,
            teleport_alpha: flowscope::markov::DEFAULT_TELEPORT_ALPHA,
            mode: WalkMode::Continuous,
            t_min: 0.01,
            t_max: 100.0,
            t_steps: 60,
            n_runs: flowscope::stability::DEFAULT_N_RUNS,
            base_seed: 42,
            rbs_alpha: flowscope::roles::DEFAULT_RBS_ALPHA,
            rbs_k_max: None,
            gamma: flowscope::roles::DEFAULT_GAMMA,
            k_neighbor: flowscope::roles::DEFAULT_K_NEIGHBOR,
            vi_threshold: flowscope::stability::DEFAULT_VI_THRESHOLD,
            top_communities: 3,
            output: PathBuf::from("flowscope-out"),
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let content = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&content)
    }

    pub fn parse(content: &str) -> Result<RunConfig> {
        let mut values: HashMap<String, String> = HashMap::new();
        for (line_no, raw) in content.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected `key = value`", line_no + 1);
            };
            values.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        let mut config = RunConfig::default();
        for (key, value) in &values {
            config.apply(key, value)?;
        }
        if config.edge_list.as_os_str().is_empty() {
            bail!("config is missing required key `edge_list`");
        }
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_f64 =
            |v: &str| -> Result<f64> { v.parse().with_context(|| format!("bad number {v:?}")) };
        let parse_usize =
            |v: &str| -> Result<usize> { v.parse().with_context(|| format!("bad integer {v:?}")) };
        let parse_bool = |v: &str| -> Result<bool> {
            match v {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => bail!("bad boolean {other:?}"),
            }
        };
        match key {
            "edge_list" => self.edge_list = PathBuf::from(value),
            "weighted" => self.weighted = parse_bool(value)?,
            "directed" => self.directed = parse_bool(value)?,
            "follower_sets" => self.follower_sets = Some(PathBuf::from(value)),
            "compare_partition" => self.compare_partition = Some(PathBuf::from(value)),
            "teleport_alpha" => self.teleport_alpha = parse_f64(value)?,
            "mode" => {
                self.mode = match value {
                    "discrete" => WalkMode::Discrete,
                    "continuous" => WalkMode::Continuous,
                    other => bail!("mode must be discrete or continuous, got {other:?}"),
                }
            }
            "t_min" => self.t_min = parse_f64(value)?,
            "t_max" => self.t_max = parse_f64(value)?,
            "t_steps" => self.t_steps = parse_usize(value)?,
            "n_runs" => self.n_runs = parse_usize(value)?,
            "base_seed" => {
                self.base_seed = value
                    .parse()
                    .with_context(|| format!("bad seed {value:?}"))?
            }
            "rbs_alpha" => self.rbs_alpha = parse_f64(value)?,
            "rbs_k_max" => self.rbs_k_max = Some(parse_usize(value)?),
            "gamma" => self.gamma = parse_f64(value)?,
            "k_neighbor" => self.k_neighbor = parse_usize(value)?,
            "vi_threshold" => self.vi_threshold = parse_f64(value)?,
            "top_communities" => self.top_communities = parse_usize(value)?,
            "output" => self.output = PathBuf::from(value),
            "workers" => self.workers = Some(parse_usize(value)?),
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Range checks for every parameter, run before any computation.
    pub fn validate(&self) -> Result<()> {
        if !(self.teleport_alpha > 0.0 && self.teleport_alpha < 1.0) {
            bail!("teleport_alpha must lie in (0, 1), got {}", self.teleport_alpha);
        }
        if !(self.rbs_alpha > 0.0 && self.rbs_alpha < 1.0) {
            bail!("rbs_alpha must lie in (0, 1), got {}", self.rbs_alpha);
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min) || self.t_steps < 2 {
            bail!(
                "sweep grid needs 0 < t_min < t_max and t_steps >= 2, got [{}, {}] x {}",
                self.t_min,
                self.t_max,
                self.t_steps
            );
        }
        if self.n_runs == 0 {
            bail!("n_runs must be >= 1");
        }
        if self.gamma <= 0.0 {
            bail!("gamma must be > 0, got {}", self.gamma);
        }
        if self.k_neighbor == 0 {
            bail!("k_neighbor must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.vi_threshold) {
            bail!("vi_threshold must lie in [0, 1], got {}", self.vi_threshold);
        }
        if self.top_communities == 0 {
            bail!("top_communities must be >= 1");
        }
        Ok(())
    }

    /// Canonical `key = value` rendering, used in the manifest.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "edge_list = {}", self.edge_list.display());
        let _ = writeln!(out, "weighted = {}", self.weighted);
        let _ = writeln!(out, "directed = {}", self.directed);
        if let Some(p) = &self.follower_sets {
            let _ = writeln!(out, "follower_sets = {}", p.display());
        }
        if let Some(p) = &self.compare_partition {
            let _ = writeln!(out, "compare_partition = {}", p.display());
        }
        let _ = writeln!(out, "teleport_alpha = {}", self.teleport_alpha);
        let mode = match self.mode {
            WalkMode::Discrete => "discrete",
            WalkMode::Continuous => "continuous",
        };
        let _ = writeln!(out, "mode = {mode}");
        let _ = writeln!(out, "t_min = {}", self.t_min);
        let _ = writeln!(out, "t_max = {}", self.t_max);
        let _ = writeln!(out, "t_steps = {}", self.t_steps);
        let _ = writeln!(out, "n_runs = {}", self.n_runs);
        let _ = writeln!(out, "base_seed = {}", self.base_seed);
        let _ = writeln!(out, "rbs_alpha = {}", self.rbs_alpha);
        if let Some(k) = self.rbs_k_max {
            let _ = writeln!(out, "rbs_k_max = {k}");
        }
        let _ = writeln!(out, "gamma = {}", self.gamma);
        let _ = writeln!(out, "k_neighbor = {}", self.k_neighbor);
        let _ = writeln!(out, "vi_threshold = {}", self.vi_threshold);
        let _ = writeln!(out, "top_communities = {}", self.top_communities);
        let _ = writeln!(out, "output = {}", self.output.display());
        out
    }
}
