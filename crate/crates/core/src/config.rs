//! Experiment configuration: a strict, versioned JSON document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{Direction, OrbitOptions};
use crate::backward::{ChainMode, ChainOptions};
use crate::linalg::{self, CVec, C64};
use crate::zoo::expr::OperatorExpr;

/// The only schema version this build understands.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config at `{json_path}`: {message}")]
    Parse { json_path: String, message: String },
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Orbit,
    Classify,
    Gram,
    Decompose,
    Kerchy,
    Backward,
    MtMembership,
    InverseGrowth,
    Verify,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Orbit => "orbit",
            ExperimentKind::Classify => "classify",
            ExperimentKind::Gram => "gram",
            ExperimentKind::Decompose => "decompose",
            ExperimentKind::Kerchy => "kerchy",
            ExperimentKind::Backward => "backward",
            ExperimentKind::MtMembership => "mt-membership",
            ExperimentKind::InverseGrowth => "inverse-growth",
            ExperimentKind::Verify => "verify",
        }
    }
}

/// Canned verification cases with pinned defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(clap::ValueEnum)]
pub enum VerifyCase {
    Example1,
    Example2,
    Example3,
    Example4,
    Example5,
    Corollary2,
    Theorem3,
    Theorem4,
    Corollary5,
    Lemma6,
    Theorem7,
}

impl VerifyCase {
    pub const ALL: [VerifyCase; 11] = [
        VerifyCase::Example1,
        VerifyCase::Example2,
        VerifyCase::Example3,
        VerifyCase::Example4,
        VerifyCase::Example5,
        VerifyCase::Corollary2,
        VerifyCase::Theorem3,
        VerifyCase::Theorem4,
        VerifyCase::Corollary5,
        VerifyCase::Lemma6,
        VerifyCase::Theorem7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VerifyCase::Example1 => "example1",
            VerifyCase::Example2 => "example2",
            VerifyCase::Example3 => "example3",
            VerifyCase::Example4 => "example4",
            VerifyCase::Example5 => "example5",
            VerifyCase::Corollary2 => "corollary2",
            VerifyCase::Theorem3 => "theorem3",
            VerifyCase::Theorem4 => "theorem4",
            VerifyCase::Corollary5 => "corollary5",
            VerifyCase::Lemma6 => "lemma6",
            VerifyCase::Theorem7 => "theorem7",
        }
    }

    pub fn parse(s: &str) -> Option<VerifyCase> {
        Self::ALL.iter().copied().find(|c| c.as_str() == s)
    }
}

/// A sample vector: basis index (1-based), generator seed, or explicit
/// entries as [re, im] pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorSpec {
    Basis(usize),
    Seed(u64),
    Entries(Vec<[f64; 2]>),
}

impl VectorSpec {
    pub fn build(&self, dim: usize) -> Result<CVec, ConfigError> {
        match self {
            VectorSpec::Basis(i) => {
                if *i == 0 || *i > dim {
                    return Err(ConfigError::Invalid(format!(
                        "basis index {i} out of range 1..={dim}"
                    )));
                }
                Ok(linalg::basis_vector(dim, i - 1))
            }
            VectorSpec::Seed(seed) => Ok(linalg::random_unit_vector(dim, *seed)),
            VectorSpec::Entries(entries) => {
                if entries.len() != dim {
                    return Err(ConfigError::Invalid(format!(
                        "explicit vector has {} entries, operator dimension is {dim}",
                        entries.len()
                    )));
                }
                let v = CVec::from_iterator(
                    dim,
                    entries.iter().map(|&[re, im]| C64::new(re, im)),
                );
                if v.norm() == 0.0 {
                    return Err(ConfigError::Invalid("explicit vector is zero".into()));
                }
                Ok(v)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            VectorSpec::Basis(i) => format!("e{i}"),
            VectorSpec::Seed(s) => format!("seed{s}"),
            VectorSpec::Entries(_) => "explicit".into(),
        }
    }
}

/// Optional tolerance overrides; anything omitted uses the library default.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub decay_tol: Option<f64>,
    pub floor_frac: Option<f64>,
    pub growth_factor: Option<f64>,
    pub chain_tol_rel: Option<f64>,
    pub rank_tol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn orbit_options(&self) -> OrbitOptions {
        let d = OrbitOptions::default();
        OrbitOptions {
            decay_tol: self.decay_tol.unwrap_or(d.decay_tol),
            floor_frac: self.floor_frac.unwrap_or(d.floor_frac),
            growth_factor: self.growth_factor.unwrap_or(d.growth_factor),
        }
    }

    pub fn chain_options(&self) -> ChainOptions {
        let d = ChainOptions::default();
        ChainOptions {
            chain_tol_rel: self.chain_tol_rel.unwrap_or(d.chain_tol_rel),
            rank_tol: self.rank_tol.unwrap_or(d.rank_tol),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub experiment: ExperimentKind,
    /// Operator under study; required except for `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorExpr>,
    /// Verify case; required for (and only for) `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<VerifyCase>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vectors: Vec<VectorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// Orbit direction for the `orbit` experiment (default: forward).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    /// Chain mode for the `backward` experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ChainMode>,
    /// Profile cap for `mt-membership` (default 10³·‖x‖).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_cap: Option<f64>,
    /// Dimension override for verify cases.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    /// Output directory for report.csv and summary.txt (default `out`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig =
            serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
                json_path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ConfigError::Schema(self.schema));
        }
        match self.experiment {
            ExperimentKind::Verify => {
                if self.case.is_none() {
                    return Err(ConfigError::Invalid(
                        "`verify` needs a `case` field".into(),
                    ));
                }
            }
            _ => {
                if self.operator.is_none() {
                    return Err(ConfigError::Invalid(format!(
                        "experiment `{}` needs an `operator` expression",
                        self.experiment.as_str()
                    )));
                }
                if self.case.is_some() {
                    return Err(ConfigError::Invalid(
                        "`case` is only meaningful with `experiment: verify`".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Sample vectors, defaulting to four seeded random unit vectors.
    pub fn sample_specs(&self) -> Vec<VectorSpec> {
        if self.vectors.is_empty() {
            (1..=4).map(VectorSpec::Seed).collect()
        } else {
            self.vectors.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_orbit_config() {
        let cfg = ExperimentConfig::from_str(
            r#"{
                "schema": 1,
                "experiment": "orbit",
                "operator": {"op": "identity", "dim": 4},
                "vectors": [{"basis": 1}]
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Orbit);
        assert_eq!(cfg.vectors.len(), 1);
    }

    #[test]
    fn rejects_wrong_schema() {
        let err = ExperimentConfig::from_str(
            r#"{"schema": 2, "experiment": "verify", "case": "example2"}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Schema(2)));
    }

    #[test]
    fn rejects_unknown_keys_with_path() {
        let err = ExperimentConfig::from_str(
            r#"{
                "schema": 1,
                "experiment": "orbit",
                "operator": {"op": "identity", "dim": 4, "bogus": true}
            }"#,
        )
        .unwrap_err();
        match err {
            ConfigError::Parse { json_path, .. } => {
                assert!(json_path.contains("operator"), "path was {json_path}")
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn verify_requires_case() {
        let err =
            ExperimentConfig::from_str(r#"{"schema": 1, "experiment": "verify"}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }

    #[test]
    fn non_verify_requires_operator() {
        let err =
            ExperimentConfig::from_str(r#"{"schema": 1, "experiment": "gram"}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }

    #[test]
    fn vector_specs_build() {
        let e2 = VectorSpec::Basis(2).build(4).unwrap();
        assert_eq!(e2[1].re, 1.0);
        assert!(VectorSpec::Basis(5).build(4).is_err());
        let r = VectorSpec::Seed(9).build(6).unwrap();
        assert!((r.norm() - 1.0).abs() < 1e-12);
        let v = VectorSpec::Entries(vec![[1.0, 0.0], [0.0, -1.0]]).build(2).unwrap();
        assert_eq!(v[1].im, -1.0);
        assert!(VectorSpec::Entries(vec![[0.0, 0.0]]).build(1).is_err());
    }

    #[test]
    fn verify_case_roundtrip() {
        for case in VerifyCase::ALL {
            assert_eq!(VerifyCase::parse(case.as_str()), Some(case));
        }
        assert_eq!(VerifyCase::parse("nope"), None);
    }
}
