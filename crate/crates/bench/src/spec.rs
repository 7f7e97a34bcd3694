// SPDX-License-Identifier: Apache-2.0

//! Experiment specification files: one `key = value` per line, `#` starts
//! a comment, unknown keys are errors.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    StrategyTradeoff,
    QualityVsOracle,
    RuntimeScaling,
    ClusterQuality,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::StrategyTradeoff => "strategy_tradeoff",
            ExperimentKind::QualityVsOracle => "quality_vs_oracle",
            ExperimentKind::RuntimeScaling => "runtime_scaling",
            ExperimentKind::ClusterQuality => "cluster_quality",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "strategy_tradeoff" => Ok(Self::StrategyTradeoff),
            "quality_vs_oracle" => Ok(Self::QualityVsOracle),
            "runtime_scaling" => Ok(Self::RuntimeScaling),
            "cluster_quality" => Ok(Self::ClusterQuality),
            _ => Err(format!("unknown experiment kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub realizations: usize,
    /// Population sizes `|W|`.
    pub workers: Vec<usize>,
    /// Required skills per project `|S_p|`.
    pub skills: usize,
    pub densities: Vec<f64>,
    pub eta: [f64; 4],
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// GA population and generations.
    pub population: usize,
    pub iterations: usize,
    /// Noise scale of the uncertainty model.
    pub sigma0: f64,
    /// Per-solve time limit of the exact solver in seconds.
    pub time_limit: Option<f64>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            realizations: 200,
            workers: vec![14],
            skills: 5,
            densities: (1..=10).map(|i| i as f64 / 10.0).collect(),
            eta: [0.25; 4],
            seed: 0,
            output: None,
            population: 1000,
            iterations: 500,
            sigma0: 0.3,
            time_limit: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| BenchError::Spec { line, message };
        let mut kind = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(i + 1, format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "kind" {
                kind = Some(value.parse::<ExperimentKind>().map_err(|m| err(i + 1, m))?);
            } else {
                entries.push((i + 1, key.to_string(), value.to_string()));
            }
        }
        let kind = kind.ok_or_else(|| err(0, "missing `kind`".into()))?;
        let mut spec = Self::new(kind);
        for (line, key, value) in entries {
            spec.set(&key, &value).map_err(|m| err(line, m))?;
        }
        spec.validate().map_err(|m| err(0, m))?;
        Ok(spec)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("invalid number {v:?}"))
        }
        fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
            v.split(',').map(|x| num(x.trim())).collect()
        }
        match key {
            "realizations" => self.realizations = num(value)?,
            "workers" => self.workers = list(value)?,
            "skills" => self.skills = num(value)?,
            "densities" => self.densities = list(value)?,
            "eta" => {
                let v: Vec<f64> = list(value)?;
                self.eta = v.try_into().map_err(|_| "eta needs four weights".to_string())?;
            }
            "seed" => self.seed = num(value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "population" => self.population = num(value)?,
            "iterations" => self.iterations = num(value)?,
            "sigma0" => self.sigma0 = num(value)?,
            "time_limit" => self.time_limit = Some(num(value)?),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.realizations == 0 {
            return Err("realizations must be at least 1".into());
        }
        if self.workers.is_empty() || self.workers.contains(&0) {
            return Err("workers must list positive sizes".into());
        }
        if self.skills == 0 {
            return Err("skills must be at least 1".into());
        }
        if self.densities.is_empty() || self.densities.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err("densities must lie in [0, 1]".into());
        }
        if self.eta.iter().any(|&e| !(e >= 0.0)) || (self.eta.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err("eta must be non-negative and sum to 1".into());
        }
        if self.population < 2 {
            return Err("population must be at least 2".into());
        }
        if !(self.sigma0 >= 0.0) {
            return Err("sigma0 must be non-negative".into());
        }
        if self.time_limit.is_some_and(|t| !(t > 0.0)) {
            return Err("time_limit must be positive".into());
        }
        Ok(())
    }

    /// Every field in a fixed order; the basis of the config hash.
    pub fn canonical(&self) -> String {
        let join = |v: &[String]| v.join(",");
        let mut s = String::new();
        s += &format!("kind = {}\n", self.kind);
        s += &format!("realizations = {}\n", self.realizations);
        s += &format!("workers = {}\n", join(&self.workers.iter().map(|w| w.to_string()).collect::<Vec<_>>()));
        s += &format!("skills = {}\n", self.skills);
        s += &format!("densities = {}\n", join(&self.densities.iter().map(|d| d.to_string()).collect::<Vec<_>>()));
        s += &format!("eta = {}\n", join(&self.eta.iter().map(|e| e.to_string()).collect::<Vec<_>>()));
        s += &format!("seed = {}\n", self.seed);
        s += &format!("population = {}\n", self.population);
        s += &format!("iterations = {}\n", self.iterations);
        s += &format!("sigma0 = {}\n", self.sigma0);
        if let Some(t) = self.time_limit {
            s += &format!("time_limit = {t}\n");
        }
        s
    }

    /// SHA-256 of the canonical spec and the dataset hash.
    pub fn config_hash(&self, dataset_hash: &str) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical().as_bytes());
        h.update(dataset_hash.as_bytes());
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let text = "# sweep\nkind = strategy_tradeoff\nrealizations = 20\nworkers = 14, 28\nskills = 4\n\
                    densities = 0.2,0.4\neta = 0.4,0.2,0.2,0.2\nseed = 9 # trailing\noutput = out.csv\n\
                    population = 50\niterations = 10\nsigma0 = 0\ntime_limit = 2.5\n";
        let s = ExperimentSpec::parse(text).unwrap();
        assert_eq!(s.kind, ExperimentKind::StrategyTradeoff);
        assert_eq!((s.realizations, s.skills, s.seed), (20, 4, 9));
        assert_eq!(s.workers, vec![14, 28]);
        assert_eq!(s.densities, vec![0.2, 0.4]);
        assert_eq!(s.eta, [0.4, 0.2, 0.2, 0.2]);
        assert_eq!(s.output, Some(PathBuf::from("out.csv")));
        assert_eq!((s.population, s.iterations, s.sigma0, s.time_limit), (50, 10, 0.0, Some(2.5)));
    }

    #[test]
    fn canonical_round_trips() {
        let s = ExperimentSpec::parse("kind = quality_vs_oracle\nseed = 3\n").unwrap();
        let again = ExperimentSpec::parse(&s.canonical()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.config_hash("x"), again.config_hash("x"));
        assert_ne!(s.config_hash("x"), s.config_hash("y"));
    }

    #[test]
    fn rejects_bad_input() {
        for (text, line) in [
            ("kind = runtime_scaling\ncolour = red\n", 2),
            ("kind = runtime_scaling\nrealizations = 0\n", 0),
            ("kind = runtime_scaling\ndensities = 1.5\n", 0),
            ("kind = runtime_scaling\neta = 1,0\n", 2),
            ("realizations = 3\n", 0),
            ("kind = runtime_scaling\njunk\n", 2),
        ] {
            match ExperimentSpec::parse(text) {
                Err(BenchError::Spec { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
