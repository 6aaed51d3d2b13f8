use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::baselines::MlpConfig;
use crate::datasets::{GraphModel, SynthConfig};
use crate::error::{Error, Result};
use crate::models::ModelConfig;
use crate::training::TrainConfig;

/// Where a setting's value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Flag => "flag",
        })
    }
}

/// Every tunable setting, addressed by flat `section.name` keys.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub synth: SynthConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub baseline: MlpConfig,
    /// Share of each cascade's adopters shown to the predictor.
    pub prefix_fraction: f64,
    pub sweep_lambdas: Vec<f64>,
    pub sweep_seeds: Vec<u64>,
    ba_m: usize,
    er_p: f64,
    sources: BTreeMap<String, Source>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = RunConfig {
            synth: SynthConfig::default(),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            baseline: MlpConfig::default(),
            prefix_fraction: 0.5,
            sweep_lambdas: vec![0.0, 0.01, 1.0, 100.0],
            sweep_seeds: vec![0, 1, 2, 3, 4],
            ba_m: 2,
            er_p: 0.02,
            sources: BTreeMap::new(),
        };
        cfg.sources = cfg.pairs().into_iter().map(|(k, _)| (k, Source::Default)).collect();
        cfg
    }
}

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("{key}: bad list entry {s:?}"))))
        .collect()
}

impl RunConfig {
    /// Defaults overlaid with an optional config file, then `key=value` flags.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text =
                std::fs::read_to_string(path).map_err(|e| Error::file(path, format!("cannot read config: {e}")))?;
            cfg.apply_text(&text, Source::File).map_err(|e| Error::file(path, e.to_string()))?;
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            cfg.set(k.trim(), v.trim(), Source::Flag)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, source: Source) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key = value, got {line:?}") })?;
            self.set(k.trim(), v.trim(), source).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str, source: Source) -> Result<()> {
        if !(self.model.set(key, value)? || self.train.set(key, value)? || self.set_local(key, value)?) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        self.sources.insert(key.to_string(), source);
        Ok(())
    }

    fn set_local(&mut self, key: &str, value: &str) -> Result<bool> {
        let bad = || Error::Config(format!("{key}: bad value {value:?}"));
        let f = || value.parse::<f64>().map_err(|_| bad());
        let u = || value.parse::<usize>().map_err(|_| bad());
        let s = &mut self.synth;
        match key {
            "synth.graph" => {
                s.graph_model = match value {
                    "ba" => GraphModel::BarabasiAlbert { m: self.ba_m },
                    "er" => GraphModel::ErdosRenyi { p: self.er_p },
                    _ => return Err(Error::Config(format!("{key}: expected ba or er, got {value:?}"))),
                }
            }
            "synth.ba_m" => {
                self.ba_m = u()?;
                if let GraphModel::BarabasiAlbert { m } = &mut s.graph_model {
                    *m = self.ba_m;
                }
            }
            "synth.er_p" => {
                self.er_p = f()?;
                if let GraphModel::ErdosRenyi { p } = &mut s.graph_model {
                    *p = self.er_p;
                }
            }
            "synth.nodes" => s.nodes = u()?,
            "synth.cascades" => s.cascades = u()?,
            "synth.base_prob" => s.base_prob = f()?,
            "synth.w_e" => s.w_e = f()?,
            "synth.w_n" => s.w_n = f()?,
            "synth.trait_low" => s.trait_low = f()?,
            "synth.trait_high" => s.trait_high = f()?,
            "synth.seeds_per_cascade" => s.seeds_per_cascade = u()?,
            "synth.val_ratio" => s.val_ratio = f()?,
            "synth.test_ratio" => s.test_ratio = f()?,
            "synth.seed" => s.seed = value.parse().map_err(|_| bad())?,
            "data.prefix_fraction" => self.prefix_fraction = f()?,
            "baseline.hidden" => self.baseline.hidden = u()?,
            "baseline.epochs" => self.baseline.epochs = u()?,
            "baseline.learning_rate" => self.baseline.learning_rate = f()?,
            "baseline.seed" => self.baseline.seed = value.parse().map_err(|_| bad())?,
            "sweep.lambdas" => self.sweep_lambdas = parse_list(key, value)?,
            "sweep.seeds" => self.sweep_seeds = parse_list(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.model.validate()?;
        self.train.validate()?;
        if !(self.prefix_fraction > 0.0 && self.prefix_fraction <= 1.0) {
            return Err(Error::Config(format!("data.prefix_fraction {} outside (0, 1]", self.prefix_fraction)));
        }
        if self.sweep_lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::Config("sweep.lambdas must be finite and >= 0".into()));
        }
        if self.baseline.hidden == 0 || !(self.baseline.learning_rate > 0.0) {
            return Err(Error::Config("baseline.hidden and baseline.learning_rate must be positive".into()));
        }
        Ok(())
    }

    /// Every setting as `(key, value)`, sorted by key.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let s = &self.synth;
        let mut out: Vec<(String, String)> = self.model.to_pairs();
        out.extend(self.train.to_pairs());
        let graph = match s.graph_model {
            GraphModel::BarabasiAlbert { .. } => "ba",
            GraphModel::ErdosRenyi { .. } => "er",
        };
        let local = [
            ("synth.graph", graph.to_string()),
            ("synth.ba_m", self.ba_m.to_string()),
            ("synth.er_p", self.er_p.to_string()),
            ("synth.nodes", s.nodes.to_string()),
            ("synth.cascades", s.cascades.to_string()),
            ("synth.base_prob", s.base_prob.to_string()),
            ("synth.w_e", s.w_e.to_string()),
            ("synth.w_n", s.w_n.to_string()),
            ("synth.trait_low", s.trait_low.to_string()),
            ("synth.trait_high", s.trait_high.to_string()),
            ("synth.seeds_per_cascade", s.seeds_per_cascade.to_string()),
            ("synth.val_ratio", s.val_ratio.to_string()),
            ("synth.test_ratio", s.test_ratio.to_string()),
            ("synth.seed", s.seed.to_string()),
            ("data.prefix_fraction", self.prefix_fraction.to_string()),
            ("baseline.hidden", self.baseline.hidden.to_string()),
            ("baseline.epochs", self.baseline.epochs.to_string()),
            ("baseline.learning_rate", self.baseline.learning_rate.to_string()),
            ("baseline.seed", self.baseline.seed.to_string()),
            ("sweep.lambdas", list(&self.sweep_lambdas)),
            ("sweep.seeds", list(&self.sweep_seeds)),
        ];
        out.extend(local.into_iter().map(|(k, v)| (k.to_string(), v)));
        out.sort();
        out
    }

    /// Pairs restricted to keys starting with one of `prefixes`.
    pub fn pairs_with(&self, prefixes: &[&str]) -> Vec<(String, String)> {
        self.pairs().into_iter().filter(|(k, _)| prefixes.iter().any(|p| k.starts_with(p))).collect()
    }

    pub fn source(&self, key: &str) -> Source {
        self.sources.get(key).copied().unwrap_or(Source::Default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\ntrain.lambda = 10.0\nmodel.layers=3\n\nsynth.nodes = 50 # inline\n", Source::File)
            .unwrap();
        cfg.set("train.lambda", "0.001", Source::Flag).unwrap();
        assert_eq!(cfg.train.lambda, 0.001);
        assert_eq!(cfg.synth.nodes, 50);
        assert_eq!(cfg.source("train.lambda"), Source::Flag);
        assert_eq!(cfg.source("synth.nodes"), Source::File);
        assert_eq!(cfg.source("train.seed"), Source::Default);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("train.momentum", "0.9", Source::Flag).is_err());
        let err = cfg.apply_text("model.layers = 2\nbogus = 1\n", Source::File).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn pairs_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("synth.graph", "er", Source::Flag).unwrap();
        cfg.set("synth.er_p", "0.1", Source::Flag).unwrap();
        cfg.set("sweep.lambdas", "0,1", Source::Flag).unwrap();
        let text: String = cfg.pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        let mut back = RunConfig::default();
        back.apply_text(&text, Source::File).unwrap();
        assert_eq!(back.pairs(), cfg.pairs());
    }

    #[test]
    fn invalid_values() {
        assert!(RunConfig::load(None, &["data.prefix_fraction=0".into()]).is_err());
        assert!(RunConfig::load(None, &["train.patience=0".into()]).is_err());
        assert!(RunConfig::load(None, &["train.lambda".into()]).is_err());
        assert!(RunConfig::load(None, &["train.lambda=10.0".into()]).is_ok());
    }
}
