//! Flat `key = value` experiment configuration. Lists are given by
//! repeating a key; `#` starts a comment.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::distributions::{DistModel, SpectrumSpec};
use crate::error::{LabError, Result};
use crate::sphere_norm::ascent::AscentSettings;

/// Which set the supremum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TKind {
    /// Unit sphere, samples drawn with covariance `Sigma`.
    Sphere,
    /// `Sigma^{1/2} S^{d-1}`, samples drawn isotropic.
    Ellipsoid,
}

impl TKind {
    pub fn name(&self) -> &'static str {
        match self {
            TKind::Sphere => "sphere",
            TKind::Ellipsoid => "ellipsoid",
        }
    }
}

impl FromStr for TKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(TKind::Sphere),
            "ellipsoid" => Ok(TKind::Ellipsoid),
            other => Err(LabError::Parse(format!("unknown T kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: DistModel,
    /// Spectrum text as accepted by [`SpectrumSpec::parse`], materialized per `d`.
    pub spectrum: String,
    pub d_list: Vec<usize>,
    pub p_list: Vec<u32>,
    pub n_list: Vec<usize>,
    pub trials_per_cell: usize,
    pub t_kind: TKind,
    pub ascent: AscentSettings,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    /// Reference draws for Monte Carlo population moments.
    pub oracle_draws: usize,
    /// Cells whose work estimate exceeds this are skipped.
    pub budget: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: DistModel::Gaussian,
            spectrum: "identity".into(),
            d_list: Vec::new(),
            p_list: Vec::new(),
            n_list: Vec::new(),
            trials_per_cell: 100,
            t_kind: TKind::Sphere,
            ascent: AscentSettings::default(),
            master_seed: 0,
            output_path: None,
            oracle_draws: crate::tensor_moments::DEFAULT_ORACLE_DRAWS,
            budget: None,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| LabError::Config { line, msg: format!("bad value '{value}' for {key}") })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| LabError::Config { line, msg: format!("expected key = value, got '{body}'") })?;
            match key {
                "model" => cfg.model = value.parse().map_err(|e: LabError| LabError::Config { line, msg: e.to_string() })?,
                "spectrum" => cfg.spectrum = value.to_string(),
                "d" => cfg.d_list.push(parse_value(line, key, value)?),
                "p" => cfg.p_list.push(parse_value(line, key, value)?),
                "N" => cfg.n_list.push(parse_value(line, key, value)?),
                "trials" => cfg.trials_per_cell = parse_value(line, key, value)?,
                "T" => cfg.t_kind = value.parse().map_err(|e: LabError| LabError::Config { line, msg: e.to_string() })?,
                "restarts" => cfg.ascent.restarts = parse_value(line, key, value)?,
                "max_iters" => cfg.ascent.max_iters = parse_value(line, key, value)?,
                "tol" => cfg.ascent.tol = parse_value(line, key, value)?,
                "seed" => cfg.master_seed = parse_value(line, key, value)?,
                "output" => cfg.output_path = Some(PathBuf::from(value)),
                "oracle_draws" => cfg.oracle_draws = parse_value(line, key, value)?,
                "budget" => cfg.budget = Some(parse_value(line, key, value)?),
                other => return Err(LabError::Config { line, msg: format!("unknown key '{other}'") }),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(LabError::Config { line: 0, msg: msg.to_string() });
        if self.d_list.is_empty() || self.p_list.is_empty() || self.n_list.is_empty() {
            return bad("need at least one d, p and N");
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("N values must be strictly increasing");
        }
        if self.d_list.contains(&0) || self.n_list.contains(&0) {
            return bad("d and N must be positive");
        }
        if self.p_list.iter().any(|&p| p < 2) {
            return bad("p must be at least 2");
        }
        if self.trials_per_cell == 0 || self.ascent.restarts == 0 || self.oracle_draws == 0 {
            return bad("trials, restarts and oracle_draws must be positive");
        }
        for &d in &self.d_list {
            SpectrumSpec::parse(&self.spectrum, d).map_err(|e| LabError::Config { line: 0, msg: e.to_string() })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# rate sweep
model = gaussian
spectrum = identity
d = 5
d = 10
p = 2
N = 256
N = 512   # trailing comment
trials = 40
T = ellipsoid
restarts = 8
seed = 7
output = out/cells.csv
";

    #[test]
    fn parses_repeated_keys() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.d_list, vec![5, 10]);
        assert_eq!(cfg.n_list, vec![256, 512]);
        assert_eq!(cfg.p_list, vec![2]);
        assert_eq!(cfg.trials_per_cell, 40);
        assert_eq!(cfg.t_kind, TKind::Ellipsoid);
        assert_eq!(cfg.ascent.restarts, 8);
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.output_path, Some(PathBuf::from("out/cells.csv")));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lists() {
        let err = ExperimentConfig::parse(&format!("{SAMPLE}colour = red\n")).unwrap_err();
        assert!(matches!(err, LabError::Config { line: 14, .. }), "{err:?}");
        assert!(ExperimentConfig::parse(&SAMPLE.replace("N = 512", "N = 128")).is_err());
        assert!(ExperimentConfig::parse(&SAMPLE.replace("d = 5", "d = five")).is_err());
        assert!(ExperimentConfig::parse("d = 2\np = 2\n").is_err());
    }
}
