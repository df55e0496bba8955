//! Serializable run configurations. Every numeric choice a command makes
//! lives here, exponents stay in their exact literal syntax (`inf` or
//! `a/b`), and a stored configuration replays to an identical result
//! payload.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mixnorm::{DomainTuple, ExtendedExponent, InequalityInstance, TensorSource};

use crate::CliError;

/// Bumped whenever the shape of [`RunConfig`] changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Ascent knobs in replayable form; mirrors the estimator's configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentSettings {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for AscentSettings {
    fn default() -> Self {
        let base = mixnorm::AscentConfig::default();
        AscentSettings {
            restarts: base.restarts,
            max_sweeps: base.max_sweeps,
            rel_tol: base.rel_tol,
            seed: base.seed,
        }
    }
}

impl From<AscentSettings> for mixnorm::AscentConfig {
    fn from(s: AscentSettings) -> Self {
        mixnorm::AscentConfig {
            restarts: s.restarts,
            max_sweeps: s.max_sweeps,
            rel_tol: s.rel_tol,
            seed: s.seed,
        }
    }
}

/// An inequality instance in literal form: `p` and `q` are comma-separated
/// exponent literals of length `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub m: usize,
    pub p: String,
    pub q: String,
}

impl InstanceSpec {
    pub fn parse(&self) -> Result<InequalityInstance, CliError> {
        let domain = parse_domain(self.m, &self.p)?;
        let exponents = parse_exponents(self.m, &self.q, "q")?;
        InequalityInstance::new(domain, exponents)
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Where a command's coefficient tensor comes from: generated by a named
/// family, or inlined verbatim so replay never depends on external files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TensorInput {
    Generated { source: String, m: usize, n: usize, seed: u64 },
    Inline { tensor: serde_json::Value },
}

impl TensorInput {
    pub fn load(&self) -> Result<mixnorm::CoefficientTensor, CliError> {
        match self {
            TensorInput::Generated { source, m, n, seed } => {
                let family: TensorSource = source.parse().map_err(CliError::Usage)?;
                family
                    .generate(*m, *n, *seed)
                    .map_err(|e| CliError::Usage(e.to_string()))
            }
            TensorInput::Inline { tensor } => {
                let text = serde_json::to_string(tensor)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                mixnorm::CoefficientTensor::from_json(&text)
                    .map_err(|e| CliError::Usage(e.to_string()))
            }
        }
    }
}

/// One command's full parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandConfig {
    Mixednorm {
        tensor: TensorInput,
        q: String,
    },
    Opnorm {
        tensor: TensorInput,
        p: String,
        ascent: AscentSettings,
        /// Also run the enumeration oracle at this resolution.
        oracle_resolution: Option<usize>,
    },
    Verify {
        instance: InstanceSpec,
        witnesses: Vec<String>,
        n_list: Vec<usize>,
        samples: usize,
        seed: u64,
        ascent: AscentSettings,
        tolerance: f64,
    },
    Refute {
        instance: InstanceSpec,
        witness: String,
        n_list: Vec<usize>,
        samples: usize,
        seed: u64,
        ascent: AscentSettings,
        resolution: usize,
        explore_unknown: bool,
    },
    Ksz {
        m: usize,
        p: String,
        n_list: Vec<usize>,
        samples: usize,
        seed: u64,
        ascent: AscentSettings,
        resolution: usize,
    },
    Probe {
        m: usize,
        p: String,
        retain: Vec<usize>,
        inner: String,
        r: String,
        n_list: Vec<usize>,
    },
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Mixednorm { .. } => "mixednorm",
            CommandConfig::Opnorm { .. } => "opnorm",
            CommandConfig::Verify { .. } => "verify",
            CommandConfig::Refute { .. } => "refute",
            CommandConfig::Ksz { .. } => "ksz",
            CommandConfig::Probe { .. } => "probe",
        }
    }
}

/// The persisted, versioned configuration: schema number plus command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(flatten)]
    pub command: CommandConfig,
}

impl RunConfig {
    pub fn new(command: CommandConfig) -> Self {
        RunConfig {
            schema: SCHEMA_VERSION,
            command,
        }
    }

    /// Compact single-form serialization the digest is computed over.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Content address: SHA-256 over the canonical config and the artifact
    /// version.
    pub fn digest(&self, version: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_json().as_bytes());
        hasher.update(b"\n");
        hasher.update(version.as_bytes());
        hex::encode(hasher.finalize())
    }
}

/// Parses a comma-separated exponent list of expected arity.
pub fn parse_exponents(
    m: usize,
    literals: &str,
    role: &str,
) -> Result<Vec<ExtendedExponent>, CliError> {
    let entries: Result<Vec<ExtendedExponent>, _> =
        literals.split(',').map(|t| t.trim().parse()).collect();
    let entries = entries.map_err(|e: mixnorm::ExponentError| CliError::Usage(e.to_string()))?;
    if entries.len() != m {
        return Err(CliError::Usage(format!(
            "expected {m} {role}-exponents, got {}",
            entries.len()
        )));
    }
    Ok(entries)
}

pub fn parse_domain(m: usize, literals: &str) -> Result<DomainTuple, CliError> {
    let entries = parse_exponents(m, literals, "p")?;
    DomainTuple::new(entries).map_err(|e| CliError::Usage(e.to_string()))
}

/// Accepts `a..b` (inclusive) or a comma-separated list of dimensions.
pub fn parse_n_list(text: &str) -> Result<Vec<usize>, String> {
    let parse_one = |t: &str| -> Result<usize, String> {
        let v: usize = t
            .trim()
            .parse()
            .map_err(|_| format!("bad dimension {t:?}"))?;
        if v == 0 {
            return Err("dimensions must be at least 1".to_string());
        }
        Ok(v)
    };
    if let Some((a, b)) = text.split_once("..") {
        let a = parse_one(a)?;
        let b = parse_one(b)?;
        if a > b {
            return Err(format!("empty range {text:?}"));
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(parse_one).collect()
}

/// Parses a finite positive rational literal (`a` or `a/b`).
pub fn parse_rational(text: &str) -> Result<mixnorm::Rational64, String> {
    let e: ExtendedExponent = text.trim().parse().map_err(|e: mixnorm::ExponentError| e.to_string())?;
    e.as_rational()
        .ok_or_else(|| format!("{text:?} must be finite here"))
}
