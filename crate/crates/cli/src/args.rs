//! Flag definitions and the top-level dispatch. Exponents are always
//! exact literals (`inf` or `a/b`); decimals are rejected everywhere so
//! boundary cases classify exactly.

use std::fs;
use std::path::PathBuf;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};

use mixnorm::{admissibility, region_grid, GridAxis};

use crate::config::{
    parse_domain, parse_exponents, parse_n_list, parse_rational, AscentSettings, CommandConfig,
    InstanceSpec, RunConfig, TensorInput,
};
use crate::record::{persist_run, replay};
use crate::run::{execute, summary};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "mixnorm",
    version,
    about = "Mixed-norm inequalities on finite-dimensional l_p spaces: verdicts, norm brackets, and growth experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide provable admissibility of one instance (exit 0/1/2 for
    /// admissible/inadmissible/unknown).
    Admissible(AdmissibleArgs),
    /// Sweep two exponent positions over a rational grid and emit the
    /// verdict per cell as CSV.
    Region(RegionArgs),
    /// Evaluate the nested mixed norm of a coefficient tensor.
    Mixednorm(MixednormArgs),
    /// Bracket the operator norm of a coefficient tensor.
    Opnorm(OpnormArgs),
    /// Stress-test a provably admissible instance against its constant.
    Verify(VerifyArgs),
    /// Exhibit growth of the best constant for an inadmissible instance.
    Refute(RefuteArgs),
    /// Fit random sign-tensor norm growth against the predicted exponent.
    Ksz(KszArgs),
    /// Test whether a forced supremum level weakens to a finite exponent.
    Probe(ProbeArgs),
    /// Re-execute a stored run and compare result digests.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Arity of the multilinear form.
    #[arg(short, long)]
    pub m: usize,
    /// Domain exponents, comma-separated literals (e.g. "3,3,3" or "inf,2").
    #[arg(short, long)]
    pub p: String,
    /// Mixed-norm exponents, outermost first (e.g. "inf,3,12/5").
    #[arg(short, long)]
    pub q: String,
}

impl InstanceArgs {
    fn spec(&self) -> InstanceSpec {
        InstanceSpec {
            m: self.m,
            p: self.p.clone(),
            q: self.q.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct TensorArgs {
    /// JSON tensor file to load (exclusive with --source).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["source", "m", "n", "seed"])]
    pub tensor: Option<PathBuf>,
    /// Generator family: gaussian, unimodular, random, diagonal,
    /// littlewood, or lifted:<k>.
    #[arg(long)]
    pub source: Option<String>,
    /// Arity for generated tensors.
    #[arg(short, long, requires = "source")]
    pub m: Option<usize>,
    /// Per-axis dimension for generated tensors.
    #[arg(short, long, requires = "source")]
    pub n: Option<usize>,
    /// Seed for random generators (also seeds the ascent restarts).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TensorArgs {
    fn input(&self) -> Result<TensorInput, CliError> {
        if let Some(path) = &self.tensor {
            let text = fs::read_to_string(path)?;
            let tensor: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad tensor file: {e}")))?;
            return Ok(TensorInput::Inline { tensor });
        }
        let source = self
            .source
            .clone()
            .ok_or_else(|| CliError::Usage("pass either --tensor or --source".into()))?;
        let m = self
            .m
            .ok_or_else(|| CliError::Usage("generated tensors need --m".into()))?;
        let n = self
            .n
            .ok_or_else(|| CliError::Usage("generated tensors need --n".into()))?;
        Ok(TensorInput::Generated {
            source,
            m,
            n,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Args)]
pub struct AscentArgs {
    /// Random restarts for the ascent estimator.
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    /// Sweep budget per restart.
    #[arg(long, default_value_t = 500)]
    pub max_sweeps: usize,
    /// Relative per-sweep improvement that counts as converged.
    #[arg(long, default_value_t = 1e-12)]
    pub rel_tol: f64,
}

impl AscentArgs {
    fn settings(&self, seed: u64) -> AscentSettings {
        AscentSettings {
            restarts: self.restarts,
            max_sweeps: self.max_sweeps,
            rel_tol: self.rel_tol,
            seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output root for run directories (default: $MIXNORM_OUT, else ./runs).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl OutArgs {
    fn root(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os("MIXNORM_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("runs"))
    }
}

#[derive(Debug, Args)]
pub struct AdmissibleArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// The two swept exponent positions, e.g. "2,3" (1-based).
    #[arg(long, value_name = "I,J")]
    pub axes: String,
    /// Smallest swept value (rational literal).
    #[arg(long, default_value = "1")]
    pub min: String,
    /// Largest swept value (rational literal).
    #[arg(long, default_value = "8")]
    pub max: String,
    /// Grid step (rational literal).
    #[arg(long, default_value = "1/4")]
    pub step: String,
    /// Write the CSV grid here instead of stdout.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MixednormArgs {
    #[command(flatten)]
    pub tensor: TensorArgs,
    /// Mixed-norm exponents, outermost first.
    #[arg(short, long)]
    pub q: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OpnormArgs {
    #[command(flatten)]
    pub tensor: TensorArgs,
    /// Domain exponents, comma-separated literals.
    #[arg(short, long)]
    pub p: String,
    #[command(flatten)]
    pub ascent: AscentArgs,
    /// Also run the enumeration oracle at this lattice resolution
    /// (ignored on all-sup domains, which enumerate exactly).
    #[arg(long, value_name = "RES")]
    pub oracle: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Witness families, comma-separated.
    #[arg(long, default_value = "unimodular,gaussian")]
    pub witness: String,
    /// Dimensions to visit: "a..b" (inclusive) or a comma list.
    #[arg(long, default_value = "2..8")]
    pub n: String,
    /// Random draws per (family, dimension) pair.
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
    /// Base seed; per-tensor seeds increase sequentially from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub ascent: AscentArgs,
    /// Multiplicative slack allowed over the prescribed constant.
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RefuteArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Witness family.
    #[arg(long, default_value = "unimodular")]
    pub witness: String,
    /// Dimensions to visit: "a..b" (inclusive) or a comma list.
    #[arg(long, default_value = "2..12")]
    pub n: String,
    /// Random draws per dimension (best ratio is kept).
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    /// Base seed; per-tensor seeds increase sequentially from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub ascent: AscentArgs,
    /// Lattice resolution for the enumeration oracle on gridded blocks.
    #[arg(long, default_value_t = 4)]
    pub resolution: usize,
    /// Probe an instance whose verdict is unknown.
    #[arg(long)]
    pub explore_unknown: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct KszArgs {
    /// Arity of the multilinear form.
    #[arg(short, long)]
    pub m: usize,
    /// Domain exponents, comma-separated literals (each at least 2).
    #[arg(short, long)]
    pub p: String,
    /// Dimensions to visit: "a..b" (inclusive) or a comma list.
    #[arg(long, default_value = "2..12")]
    pub n: String,
    /// Seeds averaged per dimension.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Base seed; per-tensor seeds increase sequentially from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub ascent: AscentArgs,
    /// Lattice resolution for the enumeration oracle on gridded blocks.
    #[arg(long, default_value_t = 1)]
    pub resolution: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Arity of the multilinear form.
    #[arg(short, long)]
    pub m: usize,
    /// Domain exponents, comma-separated literals.
    #[arg(short, long)]
    pub p: String,
    /// Retained positions (comma list, 1-based); the first position
    /// outside this set carries the probed exponent.
    #[arg(long, value_name = "I,J,...")]
    pub retain: String,
    /// Exponents for the retained positions, in order.
    #[arg(long)]
    pub inner: String,
    /// Candidate exponent for the probed position ("inf" for the control).
    #[arg(short, long)]
    pub r: String,
    /// Dimensions to visit: "a..b" (inclusive) or a comma list.
    #[arg(long, default_value = "2,4,8,16")]
    pub n: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Run directory or direct path to its config.json.
    pub path: PathBuf,
}

fn parse_axes(text: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "expected two axis positions like \"2,3\", got {text:?}"
        )));
    }
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("bad axis position {t:?}")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?))
}

fn n_list(text: &str) -> Result<Vec<usize>, CliError> {
    parse_n_list(text).map_err(CliError::Usage)
}

fn print_region_csv(args: &RegionArgs) -> Result<(), CliError> {
    let domain = parse_domain(args.instance.m, &args.instance.p)?;
    let template = parse_exponents(args.instance.m, &args.instance.q, "q")?;
    let (a1, a2) = parse_axes(&args.axes)?;
    let min = parse_rational(&args.min).map_err(CliError::Usage)?;
    let max = parse_rational(&args.max).map_err(CliError::Usage)?;
    let step = parse_rational(&args.step).map_err(CliError::Usage)?;
    let axis1 = GridAxis::new(a1, min, max, step).map_err(|e| CliError::Usage(e.to_string()))?;
    let axis2 = GridAxis::new(a2, min, max, step).map_err(|e| CliError::Usage(e.to_string()))?;
    let grid =
        region_grid(&domain, &template, &axis1, &axis2).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["q_axis1", "q_axis2", "outcome", "rule"])
        .expect("csv header");
    for cell in &grid.cells {
        w.write_record([
            cell.q_axis1.to_string(),
            cell.q_axis2.to_string(),
            cell.verdict.outcome.to_string(),
            cell.verdict.rule.map(|r| r.to_string()).unwrap_or_default(),
        ])
        .expect("csv row");
    }
    let text = String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8");
    match &args.output {
        Some(path) => fs::write(path, text)?,
        None => {
            crate::emit_bytes(text.as_bytes())?;
        }
    }
    Ok(())
}

fn run_persisted(config: RunConfig, out: &OutArgs) -> Result<u8, CliError> {
    let started = Utc::now();
    let payload = execute(&config)?;
    let finished = Utc::now();
    let run = persist_run(&out.root(), &config, &payload, started, finished)?;
    crate::emit(&summary(&payload));
    crate::emit(&format!(
        "run stored at {} (config digest {})",
        run.dir.display(),
        &run.digest[..12]
    ));
    Ok(0)
}

pub fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Admissible(args) => {
            let instance = args.instance.spec().parse()?;
            let verdict = admissibility(&instance);
            let text =
                serde_json::to_string_pretty(&verdict).map_err(|e| CliError::Runtime(e.to_string()))?;
            crate::emit(&text);
            Ok(match verdict.outcome {
                mixnorm::Outcome::ProvablyAdmissible => 0,
                mixnorm::Outcome::ProvablyInadmissible => 1,
                mixnorm::Outcome::Unknown => 2,
            })
        }
        Command::Region(args) => {
            print_region_csv(&args)?;
            Ok(0)
        }
        Command::Mixednorm(args) => {
            let config = RunConfig::new(CommandConfig::Mixednorm {
                tensor: args.tensor.input()?,
                q: args.q.clone(),
            });
            run_persisted(config, &args.out)
        }
        Command::Opnorm(args) => {
            let config = RunConfig::new(CommandConfig::Opnorm {
                tensor: args.tensor.input()?,
                p: args.p.clone(),
                ascent: args.ascent.settings(args.tensor.seed),
                oracle_resolution: args.oracle,
            });
            run_persisted(config, &args.out)
        }
        Command::Verify(args) => {
            let config = RunConfig::new(CommandConfig::Verify {
                instance: args.instance.spec(),
                witnesses: args.witness.split(',').map(|s| s.trim().to_string()).collect(),
                n_list: n_list(&args.n)?,
                samples: args.samples,
                seed: args.seed,
                ascent: args.ascent.settings(args.seed),
                tolerance: args.tolerance,
            });
            run_persisted(config, &args.out)
        }
        Command::Refute(args) => {
            let config = RunConfig::new(CommandConfig::Refute {
                instance: args.instance.spec(),
                witness: args.witness.trim().to_string(),
                n_list: n_list(&args.n)?,
                samples: args.samples,
                seed: args.seed,
                ascent: args.ascent.settings(args.seed),
                resolution: args.resolution,
                explore_unknown: args.explore_unknown,
            });
            run_persisted(config, &args.out)
        }
        Command::Ksz(args) => {
            let config = RunConfig::new(CommandConfig::Ksz {
                m: args.m,
                p: args.p.clone(),
                n_list: n_list(&args.n)?,
                samples: args.samples,
                seed: args.seed,
                ascent: args.ascent.settings(args.seed),
                resolution: args.resolution,
            });
            run_persisted(config, &args.out)
        }
        Command::Probe(args) => {
            let retain: Result<Vec<usize>, CliError> = args
                .retain
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("bad position {t:?}")))
                })
                .collect();
            let config = RunConfig::new(CommandConfig::Probe {
                m: args.m,
                p: args.p.clone(),
                retain: retain?,
                inner: args.inner.clone(),
                r: args.r.clone(),
                n_list: n_list(&args.n)?,
            });
            run_persisted(config, &args.out)
        }
        Command::Replay(args) => {
            let outcome = replay(&args.path)?;
            if outcome.matches() {
                crate::emit(&format!(
                    "replay of {} matches: results digest {}",
                    outcome.dir.display(),
                    outcome.stored_digest
                ));
                Ok(0)
            } else {
                crate::emit(&format!(
                    "replay of {} DIVERGED: stored {}, replayed {}",
                    outcome.dir.display(),
                    outcome.stored_digest,
                    outcome.replayed_digest
                ));
                Ok(1)
            }
        }
    }
}
