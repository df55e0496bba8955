//! On-disk layout for persisted runs. Each invocation gets its own
//! directory under the output root, named by the command and a prefix of
//! the config digest, holding `config.json`, `results.json`,
//! `samples.csv`, `fit.csv`, and `record.json`. Directories are never
//! rewritten: a repeated configuration gets a numbered sibling.
//!
//! `results.json` is deterministic (no timestamps, no paths) so replay can
//! compare digests byte-for-byte; the volatile bookkeeping lives in
//! `record.json`.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::run::{fit_csv, results_bytes, samples_csv, Payload};
use crate::CliError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Bookkeeping snapshot written as `record.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    /// Content address: SHA-256 of the canonical config plus version.
    pub digest: String,
    pub version: String,
    pub command: String,
    pub started_at: String,
    pub finished_at: String,
    /// SHA-256 of the `results.json` bytes, the quantity replay compares.
    pub results_digest: String,
    /// How per-sample seeds relate to the configured base seed.
    pub seed_derivation: String,
    pub config: RunConfig,
}

pub struct PersistedRun {
    pub dir: PathBuf,
    pub digest: String,
    pub results_digest: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

fn rfc3339(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn fresh_run_dir(root: &Path, name: &str) -> Result<PathBuf, CliError> {
    let base = root.join(name);
    if !base.exists() {
        return Ok(base);
    }
    for k in 2.. {
        let candidate = root.join(format!("{name}-{k}"));
        if !candidate.exists() {
            return Ok(candidate);
        }
    }
    unreachable!("unbounded suffix search")
}

pub fn persist_run(
    root: &Path,
    config: &RunConfig,
    payload: &Payload,
    started: DateTime<Utc>,
    finished: DateTime<Utc>,
) -> Result<PersistedRun, CliError> {
    let digest = config.digest(ARTIFACT_VERSION);
    let dir = fresh_run_dir(root, &format!("{}-{}", config.command.name(), &digest[..12]))?;
    fs::create_dir_all(&dir)?;

    let mut config_text = serde_json::to_string_pretty(config)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    config_text.push('\n');
    fs::write(dir.join("config.json"), config_text)?;

    let results = results_bytes(payload);
    let results_digest = sha256_hex(&results);
    fs::write(dir.join("results.json"), &results)?;
    fs::write(dir.join("samples.csv"), samples_csv(payload))?;
    fs::write(dir.join("fit.csv"), fit_csv(payload))?;

    let record = RunRecord {
        digest: digest.clone(),
        version: ARTIFACT_VERSION.to_string(),
        command: config.command.name().to_string(),
        started_at: rfc3339(started),
        finished_at: rfc3339(finished),
        results_digest: results_digest.clone(),
        seed_derivation: "per-tensor seeds increase sequentially from the base seed in loop order"
            .to_string(),
        config: config.clone(),
    };
    let mut record_text =
        serde_json::to_string_pretty(&record).map_err(|e| CliError::Runtime(e.to_string()))?;
    record_text.push('\n');
    fs::write(dir.join("record.json"), record_text)?;

    Ok(PersistedRun {
        dir,
        digest,
        results_digest,
    })
}

pub struct ReplayOutcome {
    pub dir: PathBuf,
    pub stored_digest: String,
    pub replayed_digest: String,
}

impl ReplayOutcome {
    pub fn matches(&self) -> bool {
        self.stored_digest == self.replayed_digest
    }
}

/// Re-executes the configuration stored in a run directory (or a direct
/// path to a `config.json`) and compares result digests without touching
/// the stored files.
pub fn replay(target: &Path) -> Result<ReplayOutcome, CliError> {
    let (dir, config_path) = if target.is_dir() {
        (target.to_path_buf(), target.join("config.json"))
    } else {
        let dir = target
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        (dir, target.to_path_buf())
    };
    let config_text = fs::read_to_string(&config_path)?;
    let config: RunConfig = serde_json::from_str(&config_text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", config_path.display())))?;
    if config.schema != crate::config::SCHEMA_VERSION {
        return Err(CliError::Usage(format!(
            "config schema {} is not supported by this build (expected {})",
            config.schema,
            crate::config::SCHEMA_VERSION
        )));
    }
    let stored = fs::read(dir.join("results.json"))?;
    let payload = crate::run::execute(&config)?;
    Ok(ReplayOutcome {
        dir,
        stored_digest: sha256_hex(&stored),
        replayed_digest: sha256_hex(&results_bytes(&payload)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{AscentSettings, CommandConfig, InstanceSpec};
    use crate::run::execute;

    fn ksz_config() -> RunConfig {
        RunConfig::new(CommandConfig::Ksz {
            m: 2,
            p: "inf,inf".to_string(),
            n_list: vec![2, 3, 4],
            samples: 2,
            seed: 0,
            ascent: AscentSettings::default(),
            resolution: 1,
        })
    }

    #[test]
    fn runs_persist_and_replay_byte_identically() {
        let root = tempfile::tempdir().unwrap();
        let config = ksz_config();
        let payload = execute(&config).unwrap();
        let started = Utc::now();
        let run = persist_run(root.path(), &config, &payload, started, Utc::now()).unwrap();
        for file in ["config.json", "results.json", "samples.csv", "fit.csv", "record.json"] {
            assert!(run.dir.join(file).exists(), "missing {file}");
        }
        let outcome = replay(&run.dir).unwrap();
        assert!(outcome.matches());
        assert_eq!(outcome.stored_digest, run.results_digest);
        let by_file = replay(&run.dir.join("config.json")).unwrap();
        assert!(by_file.matches());
    }

    #[test]
    fn repeated_runs_get_numbered_directories() {
        let root = tempfile::tempdir().unwrap();
        let config = RunConfig::new(CommandConfig::Refute {
            instance: InstanceSpec {
                m: 2,
                p: "2,2".to_string(),
                q: "2,2".to_string(),
            },
            witness: "diagonal".to_string(),
            n_list: vec![2, 4, 8],
            samples: 1,
            seed: 0,
            ascent: AscentSettings::default(),
            resolution: 4,
            explore_unknown: false,
        });
        let payload = execute(&config).unwrap();
        let first = persist_run(root.path(), &config, &payload, Utc::now(), Utc::now()).unwrap();
        let second = persist_run(root.path(), &config, &payload, Utc::now(), Utc::now()).unwrap();
        assert_ne!(first.dir, second.dir);
        assert_eq!(first.results_digest, second.results_digest);
        assert!(second
            .dir
            .file_name()
            .unwrap()
            .to_string_lossy()
            .ends_with("-2"));
    }
}
