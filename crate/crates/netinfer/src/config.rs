//! `key=value` configuration files.
//!
//! One setting per line, `#` starts a comment. Values given on the command
//! line are applied on top of the file through [`KvConfig::set`], so flags
//! always win.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use netinfer_core::graph::{CommunitySizes, GenConfig};
use netinfer_core::inference::Directedness;
use netinfer_core::sim::SimConfig;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formats::{parse_mode, read_to_string};

/// Raw settings in key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.into(),
                line: i + 1,
                message: "expected `key=value`".into(),
            })?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?, path)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn typed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    /// Rejects keys outside `known`.
    pub fn check_keys(&self, known: &[&str]) -> Result<()> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(Error::Config(format!("unknown configuration key `{k}`"))),
            None => Ok(()),
        }
    }
}

/// Top-K policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    /// K = edge count of the ground-truth graph.
    TruthEdges,
}

impl FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(KChoice::TruthEdges);
        }
        s.parse()
            .map(KChoice::Fixed)
            .map_err(|_| format!("invalid K `{s}` (expected a count or `auto`)"))
    }
}

impl std::fmt::Display for KChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KChoice::Fixed(k) => write!(f, "{k}"),
            KChoice::TruthEdges => f.write_str("auto"),
        }
    }
}

/// Parses `powerlaw:<min>:<max>:<exponent>` or `fixed:<s1>,<s2>,...`.
pub fn parse_community_sizes(s: &str) -> std::result::Result<CommunitySizes, String> {
    let err = || format!("invalid communities `{s}`");
    if let Some(rest) = s.strip_prefix("fixed:") {
        let sizes = rest
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| err()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        return Ok(CommunitySizes::Fixed(sizes));
    }
    if let Some(rest) = s.strip_prefix("powerlaw:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(err());
        }
        return Ok(CommunitySizes::PowerLaw {
            min: parts[0].parse().map_err(|_| err())?,
            max: parts[1].parse().map_err(|_| err())?,
            exponent: parts[2].parse().map_err(|_| err())?,
        });
    }
    Err(err())
}

pub fn format_community_sizes(c: &CommunitySizes) -> String {
    match c {
        CommunitySizes::Fixed(sizes) => {
            let parts: Vec<String> = sizes.iter().map(ToString::to_string).collect();
            format!("fixed:{}", parts.join(","))
        }
        CommunitySizes::PowerLaw { min, max, exponent } => format!("powerlaw:{min}:{max}:{exponent}"),
    }
}

pub const GEN_KEYS: &[&str] = &[
    "n",
    "communities",
    "mu",
    "avg_degree",
    "max_degree",
    "degree_exponent",
    "gen_seed",
];

pub const SIM_KEYS: &[&str] = &[
    "cascades",
    "delay_scale",
    "infection_prob",
    "max_cascade_size",
    "sim_seed",
    "retry_cap",
];

pub const EXPERIMENT_KEYS: &[&str] = &[
    "k",
    "mode",
    "detector_seed",
    "repeats",
    "counts",
    "output_dir",
];

pub fn gen_config(kv: &KvConfig) -> Result<GenConfig> {
    let d = GenConfig::default();
    let communities = match kv.get("communities") {
        Some(s) => parse_community_sizes(s).map_err(Error::Config)?,
        None => d.communities,
    };
    let cfg = GenConfig {
        n: kv.typed("n")?.unwrap_or(d.n),
        communities,
        mu: kv.typed("mu")?.unwrap_or(d.mu),
        avg_degree: kv.typed("avg_degree")?.unwrap_or(d.avg_degree),
        max_degree: kv.typed("max_degree")?.unwrap_or(d.max_degree),
        degree_exponent: kv.typed("degree_exponent")?.unwrap_or(d.degree_exponent),
        rng_seed: kv.typed("gen_seed")?.unwrap_or(d.rng_seed),
    };
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}

/// Simulation settings used when nothing else is given: sparse
/// transmission with cascades capped at 40 infections.
pub fn default_sim_config() -> SimConfig {
    SimConfig {
        infection_prob: 0.1,
        max_cascade_size: Some(40),
        ..SimConfig::default()
    }
}

pub fn sim_config(kv: &KvConfig) -> Result<SimConfig> {
    let d = default_sim_config();
    let max_cascade_size = match kv.get("max_cascade_size") {
        None => d.max_cascade_size,
        Some("none") => None,
        Some(_) => kv.typed("max_cascade_size")?,
    };
    let cfg = SimConfig {
        cascade_count: kv.typed("cascades")?.unwrap_or(d.cascade_count),
        delay_scale: kv.typed("delay_scale")?.unwrap_or(d.delay_scale),
        infection_prob: kv.typed("infection_prob")?.unwrap_or(d.infection_prob),
        max_cascade_size,
        rng_seed: kv.typed("sim_seed")?.unwrap_or(d.rng_seed),
        retry_cap: kv.typed("retry_cap")?.unwrap_or(d.retry_cap),
        ..d
    };
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}

pub fn parse_counts(s: &str) -> std::result::Result<Vec<usize>, String> {
    let counts = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| format!("invalid cascade count `{}`", p.trim()))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if counts.is_empty() {
        return Err("empty cascade count list".into());
    }
    Ok(counts)
}

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "NETINFER_OUTPUT_DIR";

pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("netinfer-out"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub gen: GenConfig,
    pub sim: SimConfig,
    pub k: KChoice,
    pub mode: Directedness,
    pub detector_seed: u64,
    pub repeats: usize,
    /// Cascade counts swept by the pipeline; defaults to `[sim.cascade_count]`.
    pub counts: Vec<usize>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let known: Vec<&str> = GEN_KEYS
            .iter()
            .chain(SIM_KEYS)
            .chain(EXPERIMENT_KEYS)
            .copied()
            .collect();
        kv.check_keys(&known)?;
        let gen = gen_config(kv)?;
        let sim = sim_config(kv)?;
        let k = kv.typed::<KChoice>("k")?.unwrap_or(KChoice::TruthEdges);
        let mode = match kv.get("mode") {
            Some(m) => parse_mode(m).map_err(Error::Config)?,
            None => Directedness::Undirected,
        };
        let repeats = kv.typed("repeats")?.unwrap_or(1);
        if repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        let counts = match kv.get("counts") {
            Some(s) => parse_counts(s).map_err(Error::Config)?,
            None => vec![sim.cascade_count],
        };
        Ok(Self {
            gen,
            sim,
            k,
            mode,
            detector_seed: kv.typed("detector_seed")?.unwrap_or(0),
            repeats,
            counts,
            output_dir: kv
                .get("output_dir")
                .map(PathBuf::from)
                .unwrap_or_else(default_output_dir),
        })
    }

    /// Canonical `key=value` text, sorted by key. The output directory is
    /// left out so moving an experiment does not change its hash.
    pub fn canonical(&self) -> String {
        let mode = match self.mode {
            Directedness::Directed => "directed",
            Directedness::Undirected => "undirected",
        };
        let counts: Vec<String> = self.counts.iter().map(ToString::to_string).collect();
        let max_size = self
            .sim
            .max_cascade_size
            .map_or_else(|| "none".to_string(), |m| m.to_string());
        let mut entries = vec![
            ("avg_degree", self.gen.avg_degree.to_string()),
            ("cascades", self.sim.cascade_count.to_string()),
            ("communities", format_community_sizes(&self.gen.communities)),
            ("counts", counts.join(",")),
            ("degree_exponent", self.gen.degree_exponent.to_string()),
            ("delay_scale", self.sim.delay_scale.to_string()),
            ("detector_seed", self.detector_seed.to_string()),
            ("gen_seed", self.gen.rng_seed.to_string()),
            ("infection_prob", self.sim.infection_prob.to_string()),
            ("k", self.k.to_string()),
            ("max_cascade_size", max_size),
            ("max_degree", self.gen.max_degree.to_string()),
            ("mode", mode.to_string()),
            ("mu", self.gen.mu.to_string()),
            ("n", self.gen.n.to_string()),
            ("repeats", self.repeats.to_string()),
            ("retry_cap", self.sim.retry_cap.to_string()),
            ("sim_seed", self.sim.rng_seed.to_string()),
        ];
        entries.sort_by_key(|e| e.0);
        let mut out = String::new();
        for (k, v) in entries {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.canonical().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
}
