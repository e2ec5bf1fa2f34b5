//! Experiment configuration.
//!
//! Configurations live in a flat key-value text file (one `key = value`
//! pair per line, `#` starts a comment) and round-trip losslessly through
//! [`ExperimentConfig::serialize`] / [`ExperimentConfig::parse`]. Every key
//! can be overridden from the command line. The same format serves as the
//! run manifest.

use quasivi::estimators::{EntropyMode, EstimatorKind};
use quasivi::lds::SourceKind;
use quasivi::optim::Algorithm;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// `toy`, `hier-lr` or `multilevel-poisson`.
    pub model: String,
    pub toy_dim: usize,
    pub hlr_groups: usize,
    pub hlr_covariates: usize,
    pub mlp_groups: usize,
    pub mlp_precincts: usize,
    pub model_seed: u64,

    pub estimator: EstimatorKind,
    pub entropy: EntropyMode,
    pub fixed_scale: bool,

    pub sequence: SourceKind,
    pub skip: usize,

    /// `fixed` or `geometric`.
    pub schedule: String,
    pub n: usize,
    pub n_floor: usize,
    pub tau: f64,

    pub optimizer: Algorithm,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub iters: usize,
    pub stop_tol: f64,

    pub init_mean: f64,
    pub init_rho: f64,

    pub seed: u64,
    pub out: String,

    /// Compute the gradient variance every `var_every` steps (0 = off).
    pub var_every: usize,
    pub var_resamples: usize,
    /// Zero the wall-clock column for byte-reproducible output.
    pub no_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: "toy".into(),
            toy_dim: 2,
            hlr_groups: 10,
            hlr_covariates: 3,
            mlp_groups: 4,
            mlp_precincts: 30,
            model_seed: 42,
            estimator: EstimatorKind::Reparam,
            entropy: EntropyMode::Analytic,
            fixed_scale: false,
            sequence: SourceKind::RqmcScramble,
            skip: 0,
            schedule: "fixed".into(),
            n: 10,
            n_floor: 16,
            tau: 1.5,
            optimizer: Algorithm::Adam,
            alpha: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            iters: 1000,
            stop_tol: 0.0,
            init_mean: 0.0,
            init_rho: 0.0,
            seed: 7,
            out: "trace.csv".into(),
            var_every: 0,
            var_resamples: 1000,
            no_timing: false,
        }
    }
}

fn fmt_float(x: f64) -> String {
    // shortest representation that round-trips exactly
    format!("{x}")
}

impl ExperimentConfig {
    /// Serializes to the flat key-value format, keys in fixed order.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("model", self.model.clone());
        kv("toy_dim", self.toy_dim.to_string());
        kv("hlr_groups", self.hlr_groups.to_string());
        kv("hlr_covariates", self.hlr_covariates.to_string());
        kv("mlp_groups", self.mlp_groups.to_string());
        kv("mlp_precincts", self.mlp_precincts.to_string());
        kv("model_seed", self.model_seed.to_string());
        kv("estimator", self.estimator.label().to_string());
        kv(
            "entropy",
            match self.entropy {
                EntropyMode::Analytic => "analytic".to_string(),
                EntropyMode::Sampled => "sampled".to_string(),
            },
        );
        kv("fixed_scale", self.fixed_scale.to_string());
        kv("sequence", self.sequence.label().to_string());
        kv("skip", self.skip.to_string());
        kv("schedule", self.schedule.clone());
        kv("n", self.n.to_string());
        kv("n_floor", self.n_floor.to_string());
        kv("tau", fmt_float(self.tau));
        kv("optimizer", self.optimizer.label().to_string());
        kv("alpha", fmt_float(self.alpha));
        kv("beta1", fmt_float(self.beta1));
        kv("beta2", fmt_float(self.beta2));
        kv("adam_eps", fmt_float(self.adam_eps));
        kv("iters", self.iters.to_string());
        kv("stop_tol", fmt_float(self.stop_tol));
        kv("init_mean", fmt_float(self.init_mean));
        kv("init_rho", fmt_float(self.init_rho));
        kv("seed", self.seed.to_string());
        kv("out", self.out.clone());
        kv("var_every", self.var_every.to_string());
        kv("var_resamples", self.var_resamples.to_string());
        kv("no_timing", self.no_timing.to_string());
        s
    }

    /// Parses the flat key-value format on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", idx + 1))?;
            if key.trim() == "artifact_version" {
                continue; // manifests double as config files
            }
            cfg.set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", idx + 1))?;
        }
        Ok(cfg)
    }

    /// Sets one key from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse()
                .map_err(|_| format!("invalid value `{v}` for `{key}`"))
        }
        match key {
            "model" => self.model = value.to_string(),
            "toy_dim" => self.toy_dim = num(key, value)?,
            "hlr_groups" => self.hlr_groups = num(key, value)?,
            "hlr_covariates" => self.hlr_covariates = num(key, value)?,
            "mlp_groups" => self.mlp_groups = num(key, value)?,
            "mlp_precincts" => self.mlp_precincts = num(key, value)?,
            "model_seed" => self.model_seed = num(key, value)?,
            "estimator" => self.estimator = EstimatorKind::parse(value).map_err(|e| e.to_string())?,
            "entropy" => {
                self.entropy = match value {
                    "analytic" => EntropyMode::Analytic,
                    "sampled" => EntropyMode::Sampled,
                    other => return Err(format!("unknown entropy mode `{other}`")),
                }
            }
            "fixed_scale" => self.fixed_scale = num(key, value)?,
            "sequence" => self.sequence = SourceKind::parse(value).map_err(|e| e.to_string())?,
            "skip" => self.skip = num(key, value)?,
            "schedule" => match value {
                "fixed" | "geometric" => self.schedule = value.to_string(),
                other => return Err(format!("unknown schedule `{other}`")),
            },
            "n" => self.n = num(key, value)?,
            "n_floor" => self.n_floor = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "optimizer" => self.optimizer = Algorithm::parse(value).map_err(|e| e.to_string())?,
            "alpha" => self.alpha = num(key, value)?,
            "beta1" => self.beta1 = num(key, value)?,
            "beta2" => self.beta2 = num(key, value)?,
            "adam_eps" => self.adam_eps = num(key, value)?,
            "iters" => self.iters = num(key, value)?,
            "stop_tol" => self.stop_tol = num(key, value)?,
            "init_mean" => self.init_mean = num(key, value)?,
            "init_rho" => self.init_rho = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out" => self.out = value.to_string(),
            "var_every" => self.var_every = num(key, value)?,
            "var_resamples" => self.var_resamples = num(key, value)?,
            "no_timing" => self.no_timing = num(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialize_parse_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.model = "multilevel-poisson".into();
        cfg.sequence = SourceKind::Mc;
        cfg.alpha = 0.017;
        cfg.tau = 1.000_25;
        cfg.fixed_scale = true;
        cfg.schedule = "geometric".into();
        let text = cfg.serialize();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = ExperimentConfig::parse("# a comment\n\nn = 25 # trailing\n").unwrap();
        assert_eq!(cfg.n, 25);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::parse("nope = 1\n").is_err());
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(ExperimentConfig::parse("just some words\n").is_err());
        assert!(ExperimentConfig::parse("alpha = not-a-number\n").is_err());
    }
}
