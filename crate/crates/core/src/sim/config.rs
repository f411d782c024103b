//! Simulation configuration and its flat `key = value` text form.
//!
//! Keys use dotted sections (`learning.alpha`, `radio.num_cells`, ...).
//! Resolution order is defaults, then a config file, then environment
//! variables (`RANSLICE_` + upper-cased key with dots as underscores), then
//! explicit overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::BucketEdges;
use crate::radio::RadioParams;
use crate::schedulers::LrtqWeights;
use crate::traffic::HarqConfig;

pub const ENV_PREFIX: &str = "RANSLICE_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Coqra,
    Nql,
    Lrtq,
    Ppf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Coqra, Algorithm::Nql, Algorithm::Lrtq, Algorithm::Ppf];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Coqra => "coqra",
            Algorithm::Nql => "nql",
            Algorithm::Lrtq => "lrtq",
            Algorithm::Ppf => "ppf",
        }
    }

    pub fn learns(self) -> bool {
        self != Algorithm::Ppf
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected coqra, nql, lrtq or ppf)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl Default for LearningParams {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            gamma: 0.5,
            epsilon: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicingParams {
    /// URLLC delay budget: reward normalisation and drop deadline.
    pub urllc_budget_ms: f64,
    pub embb_budget_ms: f64,
    pub drop_penalty: f64,
    pub bucket_edges: BucketEdges,
}

impl Default for SlicingParams {
    fn default() -> Self {
        Self {
            urllc_budget_ms: 1.0,
            embb_budget_ms: 10.0,
            drop_penalty: 1.0,
            bucket_edges: BucketEdges::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub runs: usize,
    pub horizon: u64,
    pub exploration_horizon: u64,
    pub kpi_window: u64,
    pub tti_ms: f64,
    pub urllc_load_mbps: f64,
    pub embb_load_mbps: f64,
    pub learning: LearningParams,
    pub slicing: SlicingParams,
    pub radio: RadioParams,
    pub harq: HarqConfig,
    pub pf_beta: f64,
    pub lrtq: LrtqWeights,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Coqra,
            seed: 1,
            runs: 10,
            horizon: 5000,
            exploration_horizon: 3000,
            kpi_window: 2000,
            tti_ms: 0.143,
            urllc_load_mbps: 2.0,
            embb_load_mbps: 0.5,
            learning: LearningParams::default(),
            slicing: SlicingParams::default(),
            radio: RadioParams::default(),
            harq: HarqConfig::default(),
            pf_beta: 0.01,
            lrtq: LrtqWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    MissingFile(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("value out of range for `{key}`: {value} (accepted: {accepted})")]
    OutOfRange {
        key: String,
        value: String,
        accepted: String,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("could not read config: {0}")]
    Io(String),
}

impl ConfigError {
    pub fn category(&self) -> &'static str {
        match self {
            ConfigError::MissingFile(_) => "MISSING_FILE",
            ConfigError::UnknownKey(_) => "UNKNOWN_KEY",
            ConfigError::OutOfRange { .. } => "OUT_OF_RANGE",
            ConfigError::Syntax { .. } => "SYNTAX",
            ConfigError::Io(_) => "IO",
        }
    }
}

/// Every accepted key, in output order.
pub const KEYS: &[&str] = &[
    "algorithm",
    "seed",
    "runs",
    "horizon",
    "exploration_horizon",
    "kpi_window",
    "tti_ms",
    "urllc_load_mbps",
    "embb_load_mbps",
    "learning.alpha",
    "learning.gamma",
    "learning.epsilon",
    "slicing.urllc_budget_ms",
    "slicing.embb_budget_ms",
    "slicing.drop_penalty",
    "slicing.bucket_edges",
    "radio.num_cells",
    "radio.inter_site_m",
    "radio.cell_radius_m",
    "radio.embb_ues",
    "radio.urllc_ues",
    "radio.tx_power_dbm",
    "radio.antenna_gain_db",
    "radio.shadowing_std_db",
    "radio.noise_density_dbm_hz",
    "harq.bler_slope",
    "harq.sinr_min",
    "harq.rtt_ttis",
    "harq.max_retx",
    "pf_beta",
    "lrtq.embb_weight",
    "lrtq.urllc_weight",
];

fn out_of_range(key: &str, value: impl fmt::Display, accepted: &str) -> ConfigError {
    ConfigError::OutOfRange {
        key: key.to_string(),
        value: value.to_string(),
        accepted: accepted.to_string(),
    }
}

fn parse_num<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError> {
    raw.trim()
        .parse::<T>()
        .map_err(|_| out_of_range(key, raw, "a number"))
}

impl SimConfig {
    /// Current value of `key` in its text form.
    pub fn get(&self, key: &str) -> Result<String, ConfigError> {
        let v = match key {
            "algorithm" => self.algorithm.to_string(),
            "seed" => self.seed.to_string(),
            "runs" => self.runs.to_string(),
            "horizon" => self.horizon.to_string(),
            "exploration_horizon" => self.exploration_horizon.to_string(),
            "kpi_window" => self.kpi_window.to_string(),
            "tti_ms" => format!("{:?}", self.tti_ms),
            "urllc_load_mbps" => format!("{:?}", self.urllc_load_mbps),
            "embb_load_mbps" => format!("{:?}", self.embb_load_mbps),
            "learning.alpha" => format!("{:?}", self.learning.alpha),
            "learning.gamma" => format!("{:?}", self.learning.gamma),
            "learning.epsilon" => format!("{:?}", self.learning.epsilon),
            "slicing.urllc_budget_ms" => format!("{:?}", self.slicing.urllc_budget_ms),
            "slicing.embb_budget_ms" => format!("{:?}", self.slicing.embb_budget_ms),
            "slicing.drop_penalty" => format!("{:?}", self.slicing.drop_penalty),
            "slicing.bucket_edges" => self
                .slicing
                .bucket_edges
                .edges()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
            "radio.num_cells" => self.radio.num_cells.to_string(),
            "radio.inter_site_m" => format!("{:?}", self.radio.inter_site_m),
            "radio.cell_radius_m" => format!("{:?}", self.radio.cell_radius_m),
            "radio.embb_ues" => self.radio.embb_ues.to_string(),
            "radio.urllc_ues" => self.radio.urllc_ues.to_string(),
            "radio.tx_power_dbm" => format!("{:?}", self.radio.tx_power_dbm),
            "radio.antenna_gain_db" => format!("{:?}", self.radio.antenna_gain_db),
            "radio.shadowing_std_db" => format!("{:?}", self.radio.shadowing_std_db),
            "radio.noise_density_dbm_hz" => format!("{:?}", self.radio.noise_density_dbm_hz),
            "harq.bler_slope" => format!("{:?}", self.harq.bler_slope),
            "harq.sinr_min" => format!("{:?}", self.harq.sinr_min),
            "harq.rtt_ttis" => self.harq.rtt_ttis.to_string(),
            "harq.max_retx" => self.harq.max_retx.to_string(),
            "pf_beta" => format!("{:?}", self.pf_beta),
            "lrtq.embb_weight" => format!("{:?}", self.lrtq.embb),
            "lrtq.urllc_weight" => format!("{:?}", self.lrtq.urllc),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        };
        Ok(v)
    }

    /// Set one key from text. Range checks happen in [`SimConfig::validate`].
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        match key {
            "algorithm" => {
                self.algorithm = raw
                    .parse()
                    .map_err(|_| out_of_range(key, raw, "coqra, nql, lrtq, ppf"))?
            }
            "seed" => self.seed = parse_num(key, raw)?,
            "runs" => self.runs = parse_num(key, raw)?,
            "horizon" => self.horizon = parse_num(key, raw)?,
            "exploration_horizon" => self.exploration_horizon = parse_num(key, raw)?,
            "kpi_window" => self.kpi_window = parse_num(key, raw)?,
            "tti_ms" => self.tti_ms = parse_num(key, raw)?,
            "urllc_load_mbps" => self.urllc_load_mbps = parse_num(key, raw)?,
            "embb_load_mbps" => self.embb_load_mbps = parse_num(key, raw)?,
            "learning.alpha" => self.learning.alpha = parse_num(key, raw)?,
            "learning.gamma" => self.learning.gamma = parse_num(key, raw)?,
            "learning.epsilon" => self.learning.epsilon = parse_num(key, raw)?,
            "slicing.urllc_budget_ms" => self.slicing.urllc_budget_ms = parse_num(key, raw)?,
            "slicing.embb_budget_ms" => self.slicing.embb_budget_ms = parse_num(key, raw)?,
            "slicing.drop_penalty" => self.slicing.drop_penalty = parse_num(key, raw)?,
            "slicing.bucket_edges" => {
                let edges = raw
                    .split(',')
                    .map(|t| parse_num::<usize>(key, t))
                    .collect::<Result<Vec<_>, _>>()?;
                self.slicing.bucket_edges = BucketEdges::new(edges)
                    .ok_or_else(|| out_of_range(key, raw, "strictly increasing list starting at 0"))?;
            }
            "radio.num_cells" => self.radio.num_cells = parse_num(key, raw)?,
            "radio.inter_site_m" => self.radio.inter_site_m = parse_num(key, raw)?,
            "radio.cell_radius_m" => self.radio.cell_radius_m = parse_num(key, raw)?,
            "radio.embb_ues" => self.radio.embb_ues = parse_num(key, raw)?,
            "radio.urllc_ues" => self.radio.urllc_ues = parse_num(key, raw)?,
            "radio.tx_power_dbm" => self.radio.tx_power_dbm = parse_num(key, raw)?,
            "radio.antenna_gain_db" => self.radio.antenna_gain_db = parse_num(key, raw)?,
            "radio.shadowing_std_db" => self.radio.shadowing_std_db = parse_num(key, raw)?,
            "radio.noise_density_dbm_hz" => self.radio.noise_density_dbm_hz = parse_num(key, raw)?,
            "harq.bler_slope" => self.harq.bler_slope = parse_num(key, raw)?,
            "harq.sinr_min" => self.harq.sinr_min = parse_num(key, raw)?,
            "harq.rtt_ttis" => self.harq.rtt_ttis = parse_num(key, raw)?,
            "harq.max_retx" => self.harq.max_retx = parse_num(key, raw)?,
            "pf_beta" => self.pf_beta = parse_num(key, raw)?,
            "lrtq.embb_weight" => self.lrtq.embb = parse_num(key, raw)?,
            "lrtq.urllc_weight" => self.lrtq.urllc = parse_num(key, raw)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(out_of_range(key, v, "> 0"))
            }
        };
        let non_negative = |key: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(out_of_range(key, v, ">= 0"))
            }
        };
        let l = &self.learning;
        if !(l.alpha > 0.0 && l.alpha <= 1.0) {
            return Err(out_of_range("learning.alpha", l.alpha, "alpha ∈ (0,1]"));
        }
        if !(0.0..1.0).contains(&l.gamma) {
            return Err(out_of_range("learning.gamma", l.gamma, "gamma ∈ [0,1)"));
        }
        if !(l.epsilon > 0.0 && l.epsilon <= 1.0) {
            return Err(out_of_range("learning.epsilon", l.epsilon, "epsilon ∈ (0,1]"));
        }
        if self.runs == 0 {
            return Err(out_of_range("runs", self.runs, ">= 1"));
        }
        if self.horizon == 0 {
            return Err(out_of_range("horizon", self.horizon, ">= 1"));
        }
        if self.exploration_horizon > self.horizon {
            return Err(out_of_range("exploration_horizon", self.exploration_horizon, "<= horizon"));
        }
        if self.kpi_window == 0 || self.kpi_window > self.horizon {
            return Err(out_of_range("kpi_window", self.kpi_window, "1..=horizon"));
        }
        positive("tti_ms", self.tti_ms)?;
        non_negative("urllc_load_mbps", self.urllc_load_mbps)?;
        non_negative("embb_load_mbps", self.embb_load_mbps)?;
        positive("slicing.urllc_budget_ms", self.slicing.urllc_budget_ms)?;
        positive("slicing.embb_budget_ms", self.slicing.embb_budget_ms)?;
        non_negative("slicing.drop_penalty", self.slicing.drop_penalty)?;
        if self.radio.num_cells == 0 {
            return Err(out_of_range("radio.num_cells", self.radio.num_cells, ">= 1"));
        }
        positive("radio.inter_site_m", self.radio.inter_site_m)?;
        positive("radio.cell_radius_m", self.radio.cell_radius_m)?;
        non_negative("radio.shadowing_std_db", self.radio.shadowing_std_db)?;
        positive("harq.bler_slope", self.harq.bler_slope)?;
        if self.harq.rtt_ttis == 0 {
            return Err(out_of_range("harq.rtt_ttis", self.harq.rtt_ttis, ">= 1"));
        }
        if !(self.pf_beta > 0.0 && self.pf_beta <= 1.0) {
            return Err(out_of_range("pf_beta", self.pf_beta, "(0,1]"));
        }
        non_negative("lrtq.embb_weight", self.lrtq.embb)?;
        non_negative("lrtq.urllc_weight", self.lrtq.urllc)?;
        Ok(())
    }

    /// Apply `key = value` lines. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply `RANSLICE_*` variables from `vars`.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let lookup: BTreeMap<String, &str> = KEYS
            .iter()
            .map(|k| (format!("{ENV_PREFIX}{}", k.to_uppercase().replace('.', "_")), *k))
            .collect();
        for (name, value) in vars {
            if !name.starts_with(ENV_PREFIX) {
                continue;
            }
            let key = lookup.get(&name).ok_or_else(|| ConfigError::UnknownKey(name.clone()))?;
            self.set(key, &value)?;
        }
        Ok(())
    }

    /// Full text form; parsing it back reproduces `self`.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("listed key")))
            .collect()
    }
}

/// Resolve a config from an optional file, the process environment and
/// explicit `key=value` overrides, in that order.
pub fn parse_config(path: Option<&Path>, overrides: &[(&str, String)]) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::default();
    if let Some(path) = path {
        if !path.exists() {
            return Err(ConfigError::MissingFile(path.display().to_string()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(e.to_string()))?;
        cfg.apply_text(&text)?;
    }
    cfg.apply_env(std::env::vars())?;
    for (k, v) in overrides {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = SimConfig::from_text("").unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_eq!(cfg.learning.alpha, 0.9);
        assert_eq!(cfg.learning.gamma, 0.5);
        assert_eq!(cfg.learning.epsilon, 0.05);
        assert_eq!(cfg.horizon, 5000);
        assert_eq!(cfg.exploration_horizon, 3000);
        assert_eq!(cfg.runs, 10);
        assert_eq!(cfg.radio.num_cells, 5);
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = SimConfig::default();
        cfg.algorithm = Algorithm::Nql;
        cfg.urllc_load_mbps = 3.0;
        cfg.learning.epsilon = 0.1;
        cfg.slicing.bucket_edges = BucketEdges::new(vec![0, 2, 5]).unwrap();
        assert_eq!(SimConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = SimConfig::from_text("learning.beta = 3").unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("learning.beta".into()));
        assert_eq!(err.category(), "UNKNOWN_KEY");
    }

    #[test]
    fn epsilon_out_of_range_names_bounds() {
        let err = SimConfig::from_text("learning.epsilon = 1.5").unwrap_err();
        assert_eq!(err.category(), "OUT_OF_RANGE");
        assert!(err.to_string().contains("epsilon ∈ (0,1]"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = SimConfig::from_text("# c\nhorizon 10").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Syntax {
                line: 2,
                message: "expected `key = value`".into()
            }
        );
    }

    #[test]
    fn env_overrides_file_values() {
        let mut cfg = SimConfig::from_text("urllc_load_mbps = 1").unwrap();
        cfg.apply_env([
            ("RANSLICE_URLLC_LOAD_MBPS".to_string(), "3".to_string()),
            ("RANSLICE_LEARNING_ALPHA".to_string(), "0.5".to_string()),
            ("PATH".to_string(), "/bin".to_string()),
        ])
        .unwrap();
        assert_eq!(cfg.urllc_load_mbps, 3.0);
        assert_eq!(cfg.learning.alpha, 0.5);
        assert!(cfg
            .apply_env([("RANSLICE_NOPE".to_string(), "1".to_string())])
            .is_err());
    }

    #[test]
    fn missing_file() {
        let err = parse_config(Some(Path::new("/definitely/not/here.cfg")), &[]).unwrap_err();
        assert_eq!(err.category(), "MISSING_FILE");
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("xyz".parse::<Algorithm>().is_err());
    }
}
