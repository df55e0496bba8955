//! Acceptance harness: one test per release criterion, each printing a
//! single `[acceptance] criterion N <label>: PASS` or `: FAIL` line
//! (visible under `cargo test -- --nocapture`). Criteria with stated
//! runtime budgets assert them.

use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{
    Config as PropConfig, FileFailurePersistence, RngAlgorithm, TestError, TestRng, TestRunner,
};

use mixnorm::{
    admissibility, ar_exponents, bracket, brute_force_norm, critical_exponents, dsp_exponent, exp,
    ksz_scaling_check, lift, lift_into, littlewood_power, lp_norm, mixed_norm, permute_axes,
    pp_exponent, refute_instance, region_grid, slice, supercritical_k, upper_certificate,
    verify_instance, AscentConfig, CoefficientTensor, DomainTuple, ExtendedExponent, GridAxis,
    IndexSet, InequalityInstance, MixedNormSpec, Outcome, Rational64, SamplePlan, TensorSource,
};

fn pass(criterion: u32, label: &str, detail: &str) {
    println!("[acceptance] criterion {criterion} {label}: PASS ({detail})");
}

fn fail(criterion: u32, label: &str, detail: &str) -> ! {
    println!("[acceptance] criterion {criterion} {label}: FAIL ({detail})");
    panic!("criterion {criterion} {label}: {detail}");
}

fn check_budget(criterion: u32, label: &str, elapsed: Duration, budget: Duration) {
    if elapsed > budget {
        fail(
            criterion,
            label,
            &format!("ran {elapsed:.1?}, budget {budget:.1?}"),
        );
    }
}

#[test]
fn criterion_1_exponent_formulas_are_exact() {
    let start = Instant::now();
    let label = "exponent formulas exact";

    let critical = critical_exponents(3).expect("m = 3 is in range");
    if critical != vec![exp("inf"), exp("3"), exp("12/5")] {
        fail(1, label, &format!("critical_exponents(3) = {critical:?}"));
    }
    let instance = InequalityInstance::new(
        DomainTuple::parse("3,3,3").unwrap(),
        critical,
    )
    .unwrap();
    let verdict = admissibility(&instance);
    let constant = verdict.constant.map(|c| c.sqrt2_power);
    if verdict.outcome != Outcome::ProvablyAdmissible || constant != Some(1) {
        fail(
            1,
            label,
            &format!("critical trilinear verdict {:?} constant {constant:?}, wanted admissible with sqrt(2)", verdict.outcome),
        );
    }

    let pp = pp_exponent(&DomainTuple::parse("inf,inf").unwrap()).unwrap();
    if pp != exp("4/3") {
        fail(1, label, &format!("bilinear sup-domain exponent = {pp}"));
    }

    let dsp = dsp_exponent(&DomainTuple::parse("4,4").unwrap()).unwrap();
    if dsp != exp("2") {
        fail(1, label, &format!("uniform threshold for p = (4,4) is {dsp}"));
    }

    let ar = ar_exponents(&DomainTuple::parse("3,3,3").unwrap(), 1).unwrap();
    if ar.exponents != vec![exp("inf"), exp("3"), exp("12/5")] {
        fail(1, label, &format!("anisotropic tuple at k = 1 is {:?}", ar.exponents));
    }

    let k = supercritical_k(3, exp("3")).unwrap();
    if k != 1 {
        fail(1, label, &format!("forced sup count for m = 3, p = 3 is {k}"));
    }

    let elapsed = start.elapsed();
    check_budget(1, label, elapsed, Duration::from_secs(1));
    pass(1, label, &format!("five closed forms, zero tolerance, {elapsed:.1?}"));
}

#[test]
fn criterion_2_region_grids_match_closed_forms() {
    let start = Instant::now();
    let label = "region grids match closed forms";
    let step = Rational64::new(1, 12);
    let lo = Rational64::from_integer(1);
    let hi = Rational64::from_integer(8);

    let domain = DomainTuple::parse("3,3,3").unwrap();
    let template = vec![exp("inf"), exp("1"), exp("1")];
    let axis2 = GridAxis::new(2, lo, hi, step).unwrap();
    let axis3 = GridAxis::new(3, lo, hi, step).unwrap();
    let grid = region_grid(&domain, &template, &axis2, &axis3).unwrap();
    let three = exp("3");
    let three_halves = exp("3/2");
    let budget = Rational64::new(5, 6);
    let mut checked = 0usize;
    for cell in &grid.cells {
        let inside = cell.q_axis1 >= three
            && cell.q_axis2 >= three_halves
            && cell.q_axis1.recip() + cell.q_axis2.recip() <= budget;
        let expected = if inside {
            Outcome::ProvablyAdmissible
        } else {
            Outcome::ProvablyInadmissible
        };
        if cell.verdict.outcome != expected {
            fail(
                2,
                label,
                &format!(
                    "trilinear cell ({}, {}) is {} but the closed form says {}",
                    cell.q_axis1, cell.q_axis2, cell.verdict.outcome, expected
                ),
            );
        }
        checked += 1;
    }

    let bilinear = DomainTuple::parse("2,2").unwrap();
    let template = vec![exp("1"), exp("1")];
    let axis1 = GridAxis::new(1, lo, hi, step).unwrap();
    let axis2 = GridAxis::new(2, lo, hi, step).unwrap();
    let grid = region_grid(&bilinear, &template, &axis1, &axis2).unwrap();
    for cell in &grid.cells {
        if cell.verdict.outcome == Outcome::ProvablyAdmissible {
            fail(
                2,
                label,
                &format!(
                    "critical bilinear cell ({}, {}) claims admissibility at finite exponents",
                    cell.q_axis1, cell.q_axis2
                ),
            );
        }
        checked += 1;
    }

    let elapsed = start.elapsed();
    check_budget(2, label, elapsed, Duration::from_secs(5));
    pass(2, label, &format!("{checked} cells at step 1/12, {elapsed:.1?}"));
}

#[test]
fn criterion_3_norm_brackets_agree_with_oracles() {
    let start = Instant::now();
    let label = "norm brackets agree with oracles";
    let sup2 = DomainTuple::parse("inf,inf").unwrap();
    let sup3 = DomainTuple::parse("inf,inf,inf").unwrap();
    let two2 = DomainTuple::parse("2,2").unwrap();
    let two3 = DomainTuple::parse("2,2,2").unwrap();
    let three3 = DomainTuple::parse("3,3,3").unwrap();

    let mut matches = 0usize;
    for i in 0..100usize {
        let m = 2 + (i % 2);
        let n = 2 + ((i / 2) % 2);
        let source = if (i / 4) % 2 == 0 {
            TensorSource::Unimodular
        } else {
            TensorSource::Gaussian
        };
        let domain = if m == 2 {
            [&sup2, &two2][(i / 8) % 2]
        } else {
            [&sup3, &two3, &three3][(i / 8) % 3]
        };
        let t = source.generate(m, n, 1000 + i as u64).unwrap();
        let cfg = AscentConfig {
            seed: 2000 + i as u64,
            ..AscentConfig::default()
        };

        let br = bracket(&t, domain, &cfg).unwrap();
        let oracle = brute_force_norm(&t, domain, 4).unwrap();
        let slack = 1e-12 * oracle.value.max(1.0);
        let sandwich =
            br.lower <= oracle.value + oracle.mesh_bound + slack && oracle.value <= br.upper + slack;
        if !sandwich {
            fail(
                3,
                label,
                &format!(
                    "tensor {i} ({source}, m={m}, n={n}): bracket [{}, {}] misses oracle {} (+{})",
                    br.lower, br.upper, oracle.value, oracle.mesh_bound
                ),
            );
        }

        let sup = if m == 2 { &sup2 } else { &sup3 };
        let exact = brute_force_norm(&t, sup, 1).unwrap();
        let ascent = bracket(&t, sup, &cfg).unwrap();
        if (ascent.lower - exact.value).abs() <= 1e-9 * exact.value {
            matches += 1;
        }
    }
    if matches < 95 {
        fail(3, label, &format!("ascent matched the exact sup-norm in only {matches}/100 cases"));
    }

    let elapsed = start.elapsed();
    check_budget(3, label, elapsed, Duration::from_secs(120));
    pass(
        3,
        label,
        &format!("100 sandwiches held, ascent matched {matches}/100, {elapsed:.1?}"),
    );
}

#[test]
fn criterion_4_sign_matrix_attains_the_constant() {
    let label = "extremal sign matrix attains sqrt(2)";
    let t = littlewood_power(2, 1).unwrap();
    let lhs = mixed_norm(&t, &MixedNormSpec::uniform(2, exp("4/3")).unwrap()).unwrap();
    let oracle = brute_force_norm(&t, &DomainTuple::parse("inf,inf").unwrap(), 1).unwrap();
    assert!(oracle.exact);
    let ratio = lhs / oracle.value;
    let target = std::f64::consts::SQRT_2;
    if (ratio - target).abs() > 1e-12 {
        fail(4, label, &format!("ratio {ratio} differs from sqrt(2) by {}", (ratio - target).abs()));
    }
    pass(4, label, &format!("ratio {ratio} within 1e-12 of sqrt(2)"));
}

#[test]
fn criterion_5_critical_trilinear_ratios_stay_below_the_constant() {
    let start = Instant::now();
    let label = "critical trilinear ratios bounded";
    let instance = InequalityInstance::new(
        DomainTuple::parse("3,3,3").unwrap(),
        vec![exp("inf"), exp("3"), exp("12/5")],
    )
    .unwrap();
    let plan = SamplePlan {
        n_list: (2..=8).collect(),
        samples: 15,
        seed: 0,
    };
    let report = verify_instance(
        &instance,
        &[TensorSource::Unimodular, TensorSource::Gaussian],
        &plan,
        &AscentConfig::default(),
        0.05,
    )
    .unwrap();
    let cap = std::f64::consts::SQRT_2 * 1.05;
    if report.samples.len() < 200 {
        fail(5, label, &format!("only {} samples drawn", report.samples.len()));
    }
    if report.max_ratio > cap {
        fail(
            5,
            label,
            &format!("max sound ratio {} exceeds sqrt(2) * 1.05 = {cap}", report.max_ratio),
        );
    }

    let elapsed = start.elapsed();
    check_budget(5, label, elapsed, Duration::from_secs(300));
    pass(
        5,
        label,
        &format!(
            "max sound ratio {:.6} <= {cap:.6} over {} tensors, {elapsed:.1?}",
            report.max_ratio,
            report.samples.len()
        ),
    );
}

#[test]
fn criterion_6_refutation_slopes() {
    let start = Instant::now();
    let label = "refutation slopes";

    let diagonal_case = InequalityInstance::new(
        DomainTuple::parse("2,2").unwrap(),
        vec![exp("2"), exp("2")],
    )
    .unwrap();
    let plan = SamplePlan {
        n_list: (2..=64).collect(),
        samples: 1,
        seed: 0,
    };
    let report = refute_instance(
        &diagonal_case,
        TensorSource::Diagonal,
        &plan,
        &AscentConfig::default(),
        4,
        false,
    )
    .unwrap();
    let diagonal_slope = report.fit.slope;
    if (diagonal_slope - 0.5).abs() > 0.02 {
        fail(
            6,
            label,
            &format!("diagonal witness slope {diagonal_slope} is not 0.5 +/- 0.02"),
        );
    }

    let sign_case = InequalityInstance::new(
        DomainTuple::parse("inf,inf").unwrap(),
        vec![exp("1"), exp("1")],
    )
    .unwrap();
    let plan = SamplePlan {
        n_list: (2..=12).collect(),
        samples: 5,
        seed: 0,
    };
    let report = refute_instance(
        &sign_case,
        TensorSource::Unimodular,
        &plan,
        &AscentConfig::default(),
        1,
        false,
    )
    .unwrap();
    assert!(
        report.samples.iter().all(|s| s.norm.lower == s.norm.upper),
        "sup-domain norms at n <= 12 should be exact enumerations"
    );
    let sign_slope = report.fit.slope;
    let elapsed = start.elapsed();
    check_budget(6, label, elapsed, Duration::from_secs(180));
    if sign_slope < 0.45 {
        fail(
            6,
            label,
            &format!(
                "sign-witness slope {sign_slope:.4} < 0.45 over n = 2..12 (diagonal slope {diagonal_slope:.4} passed); \
                 the window starts where the norm's effective constant still drifts, see README"
            ),
        );
    }
    pass(
        6,
        label,
        &format!("diagonal slope {diagonal_slope:.4}, sign slope {sign_slope:.4}, {elapsed:.1?}"),
    );
}

#[test]
fn criterion_7_random_sign_norm_scaling() {
    let start = Instant::now();
    let label = "random sign-tensor norm scaling";
    let plan = SamplePlan {
        n_list: (2..=12).collect(),
        samples: 20,
        seed: 0,
    };
    let report = ksz_scaling_check(
        &DomainTuple::parse("inf,inf").unwrap(),
        &plan,
        &AscentConfig::default(),
        1,
    )
    .unwrap();
    assert!(report.samples.iter().all(|s| s.exact), "sup-domain norms at n <= 12 should be exact");
    assert_eq!(report.predicted_slope, 1.5);
    let slope = report.fit.slope;
    let elapsed = start.elapsed();
    check_budget(7, label, elapsed, Duration::from_secs(120));
    if !(1.35..=1.65).contains(&slope) {
        fail(
            7,
            label,
            &format!(
                "fitted slope {slope:.4} outside [1.35, 1.65] (predicted 3/2); the per-n constant \
                 still grows over n = 2..12, which inflates the short-window fit, see README"
            ),
        );
    }
    pass(7, label, &format!("fitted slope {slope:.4} in [1.35, 1.65], {elapsed:.1?}"));
}

fn suite_runner() -> TestRunner {
    let config = PropConfig {
        cases: 500,
        failure_persistence: Some(Box::new(FileFailurePersistence::Off)),
        ..PropConfig::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]))
}

fn run_suite<S>(
    name: &str,
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    suite_runner().run(&strategy, check).map_err(|e| match e {
        TestError::Fail(reason, value) => format!("{name}: {reason} on {value:?}"),
        TestError::Abort(reason) => format!("{name}: aborted: {reason}"),
    })
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![
        Just((2usize, 2usize)),
        Just((2, 3)),
        Just((2, 4)),
        Just((3, 2)),
        Just((3, 3)),
    ]
}

fn coeffs(m: usize, n: usize) -> impl Strategy<Value = CoefficientTensor> {
    prop::collection::vec(-8.0f64..8.0, n.pow(m as u32))
        .prop_map(move |c| CoefficientTensor::new(m, n, c).expect("length matches"))
}

fn finite_exponent() -> impl Strategy<Value = ExtendedExponent> {
    (1i64..=12, 1i64..=6).prop_map(|(num, den)| {
        ExtendedExponent::from_rational(Rational64::new(num, den)).expect("positive")
    })
}

fn any_exponent() -> impl Strategy<Value = ExtendedExponent> {
    prop_oneof![4 => finite_exponent(), 1 => Just(ExtendedExponent::INFINITY)]
}

fn monotonicity_suite() -> Result<(), String> {
    let strategy = dims().prop_flat_map(|(m, n)| {
        (
            coeffs(m, n),
            prop::collection::vec(any_exponent(), m),
            0..m,
            any_exponent(),
        )
    });
    run_suite("mixed-norm monotonicity", strategy, |(t, q, pos, bump)| {
        let base = mixed_norm(&t, &MixedNormSpec::new(q.clone()).unwrap()).unwrap();
        let raised = if q[pos].is_infinite() || bump.is_infinite() {
            ExtendedExponent::INFINITY
        } else {
            let sum = q[pos].as_rational().unwrap() + bump.as_rational().unwrap();
            ExtendedExponent::from_rational(sum).unwrap()
        };
        let mut q_hi = q;
        q_hi[pos] = raised;
        let high = mixed_norm(&t, &MixedNormSpec::new(q_hi).unwrap()).unwrap();
        prop_assert!(
            high <= base * (1.0 + 1e-12),
            "norm rose from {base} to {high} when exponent {} grew",
            pos + 1
        );
        Ok(())
    })
}

fn homogeneity_suite() -> Result<(), String> {
    let strategy = dims().prop_flat_map(|(m, n)| {
        (
            coeffs(m, n),
            prop::collection::vec(any_exponent(), m),
            -8.0f64..8.0,
        )
    });
    run_suite("homogeneity", strategy, |(t, q, scale)| {
        let spec = MixedNormSpec::new(q).unwrap();
        let direct = mixed_norm(&t.scale(scale).unwrap(), &spec).unwrap();
        let factored = scale.abs() * mixed_norm(&t, &spec).unwrap();
        prop_assert!(
            (direct - factored).abs() <= 1e-12 * factored.max(1e-300),
            "scaling by {scale} gave {direct}, expected {factored}"
        );
        Ok(())
    })
}

fn flat_collapse_suite() -> Result<(), String> {
    let strategy = dims().prop_flat_map(|(m, n)| (coeffs(m, n), any_exponent()));
    run_suite("flat collapse", strategy, |(t, q)| {
        let nested = mixed_norm(&t, &MixedNormSpec::uniform(t.arity(), q).unwrap()).unwrap();
        let flat = lp_norm(t.coeffs(), q);
        prop_assert!(
            (nested - flat).abs() <= 1e-12 * flat.max(1e-300),
            "uniform exponent {q} gave nested {nested} vs flat {flat}"
        );
        Ok(())
    })
}

fn lift_slice_suite() -> Result<(), String> {
    let strategy = (2usize..=4).prop_flat_map(|n| {
        (
            coeffs(2, n),
            prop_oneof![Just((1usize, 2usize)), Just((1, 3)), Just((2, 3))],
        )
    });
    run_suite("lift/slice round-trip", strategy, |(s, (a, b))| {
        let positions = IndexSet::new(3, [a, b]).unwrap();
        let lifted = lift_into(&s, 3, &positions).unwrap();
        let new_axis = (1..=3).find(|i| *i != a && *i != b).unwrap();
        let back = slice(&lifted, &[(new_axis, 0)]).unwrap();
        prop_assert_eq!(back.coeffs(), s.coeffs(), "slice at the lifted axis loses entries");
        for coord in 1..s.dim() {
            let off = slice(&lifted, &[(new_axis, coord)]).unwrap();
            prop_assert!(
                off.coeffs().iter().all(|&c| c == 0.0),
                "support leaked to coordinate {coord} of the lifted axis"
            );
        }
        Ok(())
    })
}

fn lift_norm_suite() -> Result<(), String> {
    let strategy = (2usize..=4).prop_flat_map(|n| coeffs(2, n));
    run_suite("lifted sup-norm equality", strategy, |s| {
        let base = brute_force_norm(&s, &DomainTuple::parse("inf,inf").unwrap(), 1).unwrap();
        let lifted = lift(&s, 1).unwrap();
        let lifted_norm =
            brute_force_norm(&lifted, &DomainTuple::parse("inf,inf,inf").unwrap(), 1).unwrap();
        prop_assert!(base.exact && lifted_norm.exact);
        prop_assert_eq!(
            base.value,
            lifted_norm.value,
            "lift changed the enumerated sup-norm"
        );
        Ok(())
    })
}

fn permutation_suite() -> Result<(), String> {
    let strategy = dims().prop_flat_map(|(m, n)| {
        (
            coeffs(m, n),
            prop::collection::vec(
                prop::sample::select(vec![exp("2"), exp("3"), exp("inf")]),
                m,
            ),
            Just((1..=m).collect::<Vec<usize>>()).prop_shuffle(),
        )
    });
    run_suite("bracket permutation invariance", strategy, |(t, p, order)| {
        let domain = DomainTuple::new(p.clone()).unwrap();
        let permuted = permute_axes(&t, &order).unwrap();
        let permuted_domain =
            DomainTuple::new(order.iter().map(|&i| domain.at(i)).collect()).unwrap();
        let cfg = AscentConfig {
            restarts: 6,
            max_sweeps: 200,
            rel_tol: 1e-10,
            seed: 7,
        };
        let b1 = bracket(&t, &domain, &cfg).unwrap();
        let b2 = bracket(&permuted, &permuted_domain, &cfg).unwrap();
        let floor = b1.lower.max(b2.lower);
        let ceil = b1.upper.min(b2.upper);
        prop_assert!(
            floor <= ceil * (1.0 + 1e-9) + 1e-300,
            "brackets [{}, {}] and [{}, {}] do not overlap",
            b1.lower,
            b1.upper,
            b2.lower,
            b2.upper
        );

        let u1 = upper_certificate(&t, &domain);
        let u2 = upper_certificate(&permuted, &permuted_domain);
        prop_assert!(
            (u1 - u2).abs() <= 1e-12 * u1.max(1e-300),
            "certificates {u1} and {u2} disagree"
        );

        if (1..=t.arity()).all(|i| domain.at(i).is_infinite()) {
            let o1 = brute_force_norm(&t, &domain, 1).unwrap();
            let o2 = brute_force_norm(&permuted, &permuted_domain, 1).unwrap();
            prop_assert!(
                (o1.value - o2.value).abs() <= 1e-12 * o1.value.max(1e-300),
                "exact sup-norms {} and {} disagree",
                o1.value,
                o2.value
            );
        }
        Ok(())
    })
}

#[test]
fn criterion_8_structural_property_suites() {
    let start = Instant::now();
    let label = "structural property suites";
    let suites: [(&str, fn() -> Result<(), String>); 6] = [
        ("monotonicity", monotonicity_suite),
        ("homogeneity", homogeneity_suite),
        ("flat collapse", flat_collapse_suite),
        ("lift/slice round-trip", lift_slice_suite),
        ("lifted sup-norm equality", lift_norm_suite),
        ("permutation invariance", permutation_suite),
    ];
    for (_, suite) in &suites {
        if let Err(message) = suite() {
            fail(8, label, &message);
        }
    }
    let elapsed = start.elapsed();
    check_budget(8, label, elapsed, Duration::from_secs(180));
    pass(8, label, &format!("six suites x 500 cases, {elapsed:.1?}"));
}

fn run_binary(out_root: &std::path::Path, args: &[&str]) -> String {
    let output = Command::new(env!("CARGO_BIN_EXE_mixnorm"))
        .args(args)
        .env("MIXNORM_OUT", out_root)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "mixnorm {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8(output.stdout).expect("utf8 stdout");
    let line = stdout
        .lines()
        .find(|l| l.starts_with("run stored at "))
        .expect("summary names the run directory");
    let dir = line
        .trim_start_matches("run stored at ")
        .split(" (config digest")
        .next()
        .unwrap();
    dir.to_string()
}

#[test]
fn criterion_9_replay_reproduces_result_bytes() {
    let label = "replay reproduces result bytes";
    let tmp = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 2] = [
        &["refute", "-m", "2", "-p", "2,2", "-q", "1,1", "--witness", "diagonal", "--n", "2..10"],
        &["ksz", "-m", "2", "-p", "inf,inf", "--n", "2..5", "--samples", "3"],
    ];
    for args in commands {
        let first = run_binary(tmp.path(), args);
        let second = run_binary(tmp.path(), args);
        assert_ne!(first, second, "reruns must get fresh directories");
        let bytes_first = std::fs::read(std::path::Path::new(&first).join("results.json")).unwrap();
        let bytes_second =
            std::fs::read(std::path::Path::new(&second).join("results.json")).unwrap();
        if bytes_first != bytes_second {
            fail(9, label, &format!("rerun of {args:?} changed results.json"));
        }

        let replay = Command::new(env!("CARGO_BIN_EXE_mixnorm"))
            .args(["replay", &first])
            .output()
            .expect("binary runs");
        let stdout = String::from_utf8_lossy(&replay.stdout).to_string();
        if !replay.status.success() || !stdout.contains("matches") {
            fail(
                9,
                label,
                &format!("replay of {args:?} diverged: {stdout}"),
            );
        }
    }
    pass(9, label, "two commands, byte-identical reruns, matching replay digests");
}
