//! Executes a [`RunConfig`] into a result payload and renders the payload
//! as JSON, CSV tables, and a human summary.
//!
//! Payload serialization is deterministic: struct field order is fixed,
//! floats print in shortest round-trip form, and nothing time- or
//! path-dependent enters, so replaying a stored configuration reproduces
//! the result bytes exactly.

use serde::Serialize;

use mixnorm::{
    ksz_scaling_check, mixed_norm, refute_instance, sup_sharpness_probe, verify_instance,
    ExperimentError, ExtendedExponent, GrowthFit, IndexSet, KszReport, MixedNormSpec, NormBracket,
    OracleNorm, ProbeReport, RatioSample, RefuteReport, SamplePlan, TensorSource, Verdict,
};

use crate::config::{parse_domain, parse_exponents, CommandConfig, RunConfig};
use crate::CliError;

/// Per-witness aggregate inside a verification payload.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessMax {
    pub witness: String,
    pub samples: usize,
    pub max_ratio: f64,
}

/// Verification results merged over all requested witness families.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyResults {
    pub verdict: Verdict,
    pub constant: Option<f64>,
    pub tolerance: f64,
    pub max_ratio: f64,
    pub within_tolerance: Option<bool>,
    pub fit_uses: String,
    pub per_witness: Vec<WitnessMax>,
    pub samples: Vec<RatioSample>,
}

/// The complete machine-readable result of one run.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Mixednorm {
        m: usize,
        n: usize,
        q: Vec<ExtendedExponent>,
        value: f64,
    },
    Opnorm {
        m: usize,
        n: usize,
        p: Vec<ExtendedExponent>,
        bracket: NormBracket,
        oracle: Option<OracleNorm>,
    },
    Verify(VerifyResults),
    Refute(RefuteReport),
    Ksz(KszReport),
    Probe(ProbeReport),
}

fn map_experiment(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::NotAdmissible(outcome) => CliError::NotAdmissible(format!(
            "verification requires a provably admissible instance, verdict is {outcome}"
        )),
        ExperimentError::Norm(mixnorm::NormError::BudgetExceeded(msg)) => CliError::Budget(msg),
        ExperimentError::Hypothesis(msg)
        | ExperimentError::BadPoint(msg) => CliError::Usage(msg),
        ExperimentError::TooFewPoints { got } => CliError::Usage(format!(
            "need at least 3 usable dimensions, got {got}"
        )),
        ExperimentError::Exponent(e) => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

fn map_norm(e: mixnorm::NormError) -> CliError {
    match e {
        mixnorm::NormError::BudgetExceeded(msg) => CliError::Budget(msg),
        mixnorm::NormError::Config(msg) => CliError::Usage(msg),
        other => CliError::Usage(other.to_string()),
    }
}

/// The Kronecker sign-matrix family only exists for bilinear power-of-two
/// dimensions, so its sampling plans keep the usable subset of `--n`.
fn usable_n(source: TensorSource, n_list: &[usize]) -> Vec<usize> {
    match source {
        TensorSource::Littlewood => n_list
            .iter()
            .copied()
            .filter(|n| *n >= 2 && n.is_power_of_two())
            .collect(),
        _ => n_list.to_vec(),
    }
}

pub fn execute(config: &RunConfig) -> Result<Payload, CliError> {
    match &config.command {
        CommandConfig::Mixednorm { tensor, q } => {
            let t = tensor.load()?;
            let exponents = parse_exponents(t.arity(), q, "q")?;
            let spec = MixedNormSpec::new(exponents.clone())
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let value = mixed_norm(&t, &spec).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Payload::Mixednorm {
                m: t.arity(),
                n: t.dim(),
                q: exponents,
                value,
            })
        }
        CommandConfig::Opnorm {
            tensor,
            p,
            ascent,
            oracle_resolution,
        } => {
            let t = tensor.load()?;
            let domain = parse_domain(t.arity(), p)?;
            let bracket = mixnorm::bracket(&t, &domain, &(*ascent).into()).map_err(map_norm)?;
            let oracle = match oracle_resolution {
                Some(resolution) => Some(
                    mixnorm::brute_force_norm(&t, &domain, *resolution).map_err(map_norm)?,
                ),
                None => None,
            };
            Ok(Payload::Opnorm {
                m: t.arity(),
                n: t.dim(),
                p: domain.entries().to_vec(),
                bracket,
                oracle,
            })
        }
        CommandConfig::Verify {
            instance,
            witnesses,
            n_list,
            samples,
            seed,
            ascent,
            tolerance,
        } => {
            let inst = instance.parse()?;
            if witnesses.is_empty() {
                return Err(CliError::Usage("need at least one witness family".into()));
            }
            let mut merged: Option<VerifyResults> = None;
            for text in witnesses {
                let source: TensorSource = text.parse().map_err(CliError::Usage)?;
                let usable = usable_n(source, n_list);
                if usable.is_empty() {
                    return Err(CliError::Usage(format!(
                        "witness {text} has no usable dimensions in the requested list"
                    )));
                }
                let plan = SamplePlan {
                    n_list: usable,
                    samples: *samples,
                    seed: *seed,
                };
                let report =
                    verify_instance(&inst, &[source], &plan, &(*ascent).into(), *tolerance)
                        .map_err(map_experiment)?;
                let slot = merged.get_or_insert_with(|| VerifyResults {
                    verdict: report.verdict.clone(),
                    constant: report.constant,
                    tolerance: *tolerance,
                    max_ratio: 0.0,
                    within_tolerance: None,
                    fit_uses: report.fit_uses.clone(),
                    per_witness: Vec::new(),
                    samples: Vec::new(),
                });
                slot.per_witness.push(WitnessMax {
                    witness: text.clone(),
                    samples: report.samples.len(),
                    max_ratio: report.max_ratio,
                });
                slot.max_ratio = slot.max_ratio.max(report.max_ratio);
                slot.samples.extend(report.samples);
            }
            let mut results = merged.expect("at least one witness");
            results.within_tolerance = results
                .constant
                .map(|c| results.max_ratio <= c * (1.0 + tolerance));
            Ok(Payload::Verify(results))
        }
        CommandConfig::Refute {
            instance,
            witness,
            n_list,
            samples,
            seed,
            ascent,
            resolution,
            explore_unknown,
        } => {
            let inst = instance.parse()?;
            let source: TensorSource = witness.parse().map_err(CliError::Usage)?;
            let plan = SamplePlan {
                n_list: usable_n(source, n_list),
                samples: *samples,
                seed: *seed,
            };
            let report = refute_instance(
                &inst,
                source,
                &plan,
                &(*ascent).into(),
                *resolution,
                *explore_unknown,
            )
            .map_err(|e| match e {
                ExperimentError::NotRefutable => CliError::Runtime(
                    "instance is provably admissible; nothing to refute".into(),
                ),
                ExperimentError::UnknownNeedsOptIn => CliError::Runtime(
                    "verdict is unknown; pass --explore-unknown to probe it anyway".into(),
                ),
                other => map_experiment(other),
            })?;
            Ok(Payload::Refute(report))
        }
        CommandConfig::Ksz {
            m,
            p,
            n_list,
            samples,
            seed,
            ascent,
            resolution,
        } => {
            let domain = parse_domain(*m, p)?;
            let plan = SamplePlan {
                n_list: n_list.clone(),
                samples: *samples,
                seed: *seed,
            };
            let report = ksz_scaling_check(&domain, &plan, &(*ascent).into(), *resolution)
                .map_err(map_experiment)?;
            Ok(Payload::Ksz(report))
        }
        CommandConfig::Probe {
            m,
            p,
            retain,
            inner,
            r,
            n_list,
        } => {
            let domain = parse_domain(*m, p)?;
            let set = IndexSet::new(*m, retain.iter().copied())
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let inner_spec = parse_exponents(retain.len(), inner, "inner")?;
            let r: ExtendedExponent = r
                .parse()
                .map_err(|e: mixnorm::ExponentError| CliError::Usage(e.to_string()))?;
            let report = sup_sharpness_probe(&domain, &set, &inner_spec, r, n_list)
                .map_err(map_experiment)?;
            Ok(Payload::Probe(report))
        }
    }
}

/// The byte-exact form persisted as `results.json` and digested for
/// replay comparison.
pub fn results_bytes(payload: &Payload) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(payload).expect("payload serializes");
    text.push('\n');
    text.into_bytes()
}

fn ratio_rows(samples: &[RatioSample]) -> Vec<Vec<String>> {
    samples
        .iter()
        .map(|s| {
            vec![
                s.n.to_string(),
                s.source.clone(),
                format!("{}", s.lhs),
                format!("{}", s.norm.lower),
                format!("{}", s.norm.upper),
                format!("{}", s.ratio_sound_lower),
                format!("{}", s.ratio_sound_upper),
            ]
        })
        .collect()
}

fn write_csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("csv header");
    for row in rows {
        w.write_record(&row).expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
}

const RATIO_HEADER: [&str; 7] = [
    "n",
    "source",
    "lhs",
    "norm_lower",
    "norm_upper",
    "ratio_sound_lower",
    "ratio_sound_upper",
];

pub fn samples_csv(payload: &Payload) -> String {
    match payload {
        Payload::Verify(results) => write_csv(&RATIO_HEADER, ratio_rows(&results.samples)),
        Payload::Refute(report) => write_csv(&RATIO_HEADER, ratio_rows(&report.samples)),
        Payload::Probe(report) => write_csv(&RATIO_HEADER, ratio_rows(&report.samples)),
        Payload::Ksz(report) => write_csv(
            &["n", "seed", "estimate", "exact"],
            report
                .samples
                .iter()
                .map(|s| {
                    vec![
                        s.n.to_string(),
                        s.seed.to_string(),
                        format!("{}", s.estimate),
                        s.exact.to_string(),
                    ]
                })
                .collect(),
        ),
        Payload::Mixednorm { .. } | Payload::Opnorm { .. } => {
            write_csv(&RATIO_HEADER, Vec::new())
        }
    }
}

fn fit_rows(fit: &GrowthFit) -> Vec<Vec<String>> {
    fit.points
        .iter()
        .map(|&(x, y)| {
            vec![
                format!("{x}"),
                format!("{y}"),
                format!("{}", fit.slope * x + fit.intercept),
            ]
        })
        .collect()
}

pub fn fit_csv(payload: &Payload) -> String {
    let header = ["ln_n", "ln_value", "fitted"];
    match payload {
        Payload::Refute(report) => write_csv(&header, fit_rows(&report.fit)),
        Payload::Ksz(report) => write_csv(&header, fit_rows(&report.fit)),
        Payload::Probe(report) => write_csv(&header, fit_rows(&report.fit)),
        _ => write_csv(&header, Vec::new()),
    }
}

fn exponent_list(entries: &[ExtendedExponent]) -> String {
    entries
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Short human-readable account printed after a run.
pub fn summary(payload: &Payload) -> String {
    match payload {
        Payload::Mixednorm { m, n, q, value } => format!(
            "mixed norm (m={m}, n={n}, q=({})) = {value}",
            exponent_list(q)
        ),
        Payload::Opnorm {
            m,
            n,
            p,
            bracket,
            oracle,
        } => {
            let mut text = format!(
                "operator norm on (m={m}, n={n}, p=({})): bracket [{}, {}], {} restarts, converged: {}",
                exponent_list(p),
                bracket.lower,
                bracket.upper,
                bracket.restarts,
                bracket.converged
            );
            if let Some(oracle) = oracle {
                text.push_str(&format!(
                    "\noracle value {} (mesh bound {}, exact: {})",
                    oracle.value, oracle.mesh_bound, oracle.exact
                ));
            }
            text
        }
        Payload::Verify(results) => {
            let mut text = format!(
                "verdict: {}{}\nmax sound ratio {} over {} samples",
                results.verdict.outcome,
                results
                    .verdict
                    .rule
                    .map(|r| format!(" (rule {r})"))
                    .unwrap_or_default(),
                results.max_ratio,
                results.samples.len()
            );
            match (results.constant, results.within_tolerance) {
                (Some(c), Some(ok)) => text.push_str(&format!(
                    "\nprescribed constant {c}: {} at {}% tolerance",
                    if ok { "satisfied" } else { "EXCEEDED" },
                    results.tolerance * 100.0
                )),
                _ => text.push_str(
                    "\nno explicit constant prescribed; the maximum is a lower estimate of the best C",
                ),
            }
            text
        }
        Payload::Refute(report) => format!(
            "verdict: {}{}\nfitted slope {} (intercept {}, residual {}) from {} samples{}",
            report.verdict.outcome,
            report
                .verdict
                .rule
                .map(|r| format!(" (rule {r})"))
                .unwrap_or_default(),
            report.fit.slope,
            report.fit.intercept,
            report.fit.residual,
            report.samples.len(),
            if report.exploratory {
                "\n(exploratory run on an unknown verdict)"
            } else {
                ""
            }
        ),
        Payload::Ksz(report) => format!(
            "fitted norm growth slope {} vs predicted {} ({} samples)",
            report.fit.slope,
            report.predicted_slope,
            report.samples.len()
        ),
        Payload::Probe(report) => format!(
            "probe at position {} with exponent {}: fitted slope {} (flat means the sup survives; positive growth means it cannot be weakened)",
            report.probe_position, report.probe_exponent, report.fit.slope
        ),
    }
}
