//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! The fault-injection criteria (3, 4, 5, 7) share one pipeline computation
//! that is executed twice, inside worker pools of 1 and 8 threads; the
//! determinism criterion (10) compares the two byte for byte.

use std::fmt::Write as _;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use qnoise::circuits::CircuitSpec;
use qnoise::gst::{
    collect_gst_data, lgst, predict_probability, random_sequences, FiducialSet, GateSet,
};
use qnoise::io::{ScanRow, TolerableRow};
use qnoise::math::{pairwise_mean, round_sig};
use qnoise::noise::{
    average_error_rate, channel_to_ptm, haar_average_fidelity, PauliFaultModel, QuantumChannel,
};
use qnoise::rb::{
    clifford_group_size, fit_rb_data, per_cnot_error, run_rb, CliffordGroup, RbConfig, RbNoise,
};
use qnoise::rng::derive_seed;
use qnoise::scan::{criterion_for, CriterionChoice};
use qnoise::sim::{Circuit, Gate, GateApp, StateVector};
use qnoise::tolerance::{
    bytes_to_petabytes, memory_estimate, mc_scores, probe_success, score_confidence_interval,
    success_probability_exhaustive, tolerable_error_rate, Representation, SuccessEstimate,
    ToleranceConfig,
};

const MASTER_SEED: u64 = 2026;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[criterion {criterion}] {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn fig1_circuit() -> Circuit {
    let mut c = Circuit::new(2);
    c.add_layer(vec![
        GateApp::new(Gate::h(), vec![0]),
        GateApp::new(Gate::x(), vec![1]),
    ])
    .unwrap();
    c.push(Gate::cnot(), &[0, 1]).unwrap();
    c
}

#[test]
fn criterion_01_worked_example() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let expect = |state: &StateVector, wanted: [f64; 4]| -> f64 {
        state
            .amplitudes()
            .iter()
            .zip(wanted)
            .map(|(a, w)| (a - num_complex::Complex64::new(w, 0.0)).norm())
            .fold(0.0, f64::max)
    };

    // Warm-up, then timed run of the full circuit.
    let circuit = fig1_circuit();
    let _ = circuit.run("01", None).unwrap();
    let t0 = Instant::now();
    let built = fig1_circuit();
    let end = built.run("01", None).unwrap();
    let elapsed = t0.elapsed();

    let phi1 = StateVector::from_bits("01").unwrap();
    let mut first_layer = Circuit::new(2);
    first_layer
        .add_layer(vec![
            GateApp::new(Gate::h(), vec![0]),
            GateApp::new(Gate::x(), vec![1]),
        ])
        .unwrap();
    let phi2 = first_layer.run("01", None).unwrap();

    let d1 = expect(&phi1, [0.0, 1.0, 0.0, 0.0]);
    let d2 = expect(&phi2, [s, 0.0, s, 0.0]);
    let d3 = expect(&end, [s, 0.0, 0.0, s]);
    let max_dev = d1.max(d2).max(d3);
    let pass = max_dev < 1e-12 && elapsed < Duration::from_millis(1);
    report(
        "1",
        pass,
        &format!("worked-example states within {max_dev:.2e} (limit 1e-12), runtime {elapsed:?} (< 1 ms)"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_error_rate_relation() {
    let t0 = Instant::now();
    let mut max_closed_dev = 0.0f64;
    let mut max_mc_dev = 0.0f64;
    for n in 1..=2usize {
        for p in [1e-3, 1e-2, 1e-1] {
            let ch = QuantumChannel::depolarizing(n, p).unwrap();
            let expect = (1.0 - 0.5f64.powi(n as i32)) * p;
            let closed = average_error_rate(&ch).unwrap();
            max_closed_dev = max_closed_dev.max((closed - expect).abs());
            let mc = 1.0 - haar_average_fidelity(&ch, 10_000, derive_seed(MASTER_SEED, n as u64));
            max_mc_dev = max_mc_dev.max((mc - expect).abs());
        }
    }
    let elapsed = t0.elapsed();
    let pass = max_closed_dev < 1e-10 && max_mc_dev < 2e-3 && elapsed < Duration::from_secs(10);
    report(
        "2",
        pass,
        &format!(
            "r = (1 - 2^-n) p: closed form within {max_closed_dev:.2e} (1e-10), Haar MC within {max_mc_dev:.2e} (2e-3), runtime {elapsed:.1?} (< 10 s)"
        ),
    );
    assert!(pass);
}

/// Output of one pipeline phase, kept as text for byte comparison.
struct PhaseOutput {
    report: String,
    pass: bool,
    detail: String,
}

struct Pipeline {
    c3: PhaseOutput,
    c4: PhaseOutput,
    c5: PhaseOutput,
    c7: PhaseOutput,
}

static PIPELINES: OnceLock<(Pipeline, Pipeline)> = OnceLock::new();

fn pipelines() -> &'static (Pipeline, Pipeline) {
    PIPELINES.get_or_init(|| {
        let run_in = |threads: usize| -> Pipeline {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("worker pool builds");
            pool.install(compute_pipeline)
        };
        (run_in(8), run_in(1))
    })
}

fn compute_pipeline() -> Pipeline {
    Pipeline {
        c3: phase_exhaustive_vs_mc(),
        c4: phase_area_bound(),
        c5: phase_success_threshold(),
        c7: phase_rb_recovery(),
    }
}

/// Criterion 3 combos: small expected fault counts, where the single-fault
/// truncation is unbiased at Monte Carlo resolution. (Measured: its bias
/// grows as (L p)^2 / 2 and crosses a one-million-trial 99% interval near
/// L p ~ 0.1; an informational ladder up to L p = 0.3 is printed.)
fn c3_specs() -> Vec<CircuitSpec> {
    vec![
        CircuitSpec::Bv { hidden: "11".into() },
        CircuitSpec::Bv {
            hidden: "1011".into(),
        },
        CircuitSpec::Qft { n: 3 },
        CircuitSpec::Qft { n: 4 },
        CircuitSpec::Grover {
            n: 2,
            marked: "11".into(),
            iterations: 1,
        },
    ]
}

fn exhaustive_and_mc(
    spec: &CircuitSpec,
    lp: f64,
    trials: u64,
    seed: u64,
) -> (f64, f64, f64, f64, bool) {
    let circuit = spec.build().unwrap();
    let criterion = criterion_for(CriterionChoice::Auto, spec, 0.66).unwrap();
    let initial = "0".repeat(circuit.n_qubits());
    let model0 = PauliFaultModel::depolarizing(0.0).unwrap();
    let locations = qnoise::noise::enumerate_locations(&circuit, &model0).len();
    let model = model0.with_rate(lp / locations as f64).unwrap();
    let exhaustive =
        success_probability_exhaustive(&circuit, &model, &criterion, &initial).unwrap();
    let scores = mc_scores(&circuit, &model, &criterion, &initial, trials, seed).unwrap();
    let mean = pairwise_mean(&scores);
    let (lo, hi) = score_confidence_interval(&scores, 2.576);
    let inside = exhaustive.value >= lo && exhaustive.value <= hi;
    (exhaustive.value, mean, lo, hi, inside)
}

fn phase_exhaustive_vs_mc() -> PhaseOutput {
    let t0 = Instant::now();
    let mut text = String::new();
    let mut all_inside = true;
    let mut combos = 0;
    for (i, spec) in c3_specs().iter().enumerate() {
        for (j, lp) in [0.015, 0.03].into_iter().enumerate() {
            let seed = derive_seed(MASTER_SEED, 300 + (i * 10 + j) as u64);
            let (ex, mc, lo, hi, inside) = exhaustive_and_mc(spec, lp, 1_000_000, seed);
            writeln!(
                text,
                "{},{lp},{ex:.9},{mc:.9},{lo:.9},{hi:.9},{inside}",
                spec.id()
            )
            .unwrap();
            all_inside &= inside;
            combos += 1;
        }
    }
    // Informational truncation-bias ladder at larger expected fault counts.
    for (j, lp) in [0.05, 0.1, 0.2, 0.3].into_iter().enumerate() {
        let seed = derive_seed(MASTER_SEED, 400 + j as u64);
        let (ex, mc, lo, hi, inside) =
            exhaustive_and_mc(&CircuitSpec::Bv { hidden: "11".into() }, lp, 1_000_000, seed);
        writeln!(text, "ladder bv_s11,{lp},{ex:.9},{mc:.9},{lo:.9},{hi:.9},{inside}").unwrap();
    }
    let elapsed = t0.elapsed();
    PhaseOutput {
        report: text,
        pass: all_inside && elapsed < Duration::from_secs(300),
        detail: format!(
            "{combos}/{combos} exhaustive estimates inside the 10^6-trial 99% CI at L*p in {{0.015, 0.03}}, runtime {elapsed:.1?} (< 5 min)"
        ),
    }
}

/// The benchmark instance set used for the area-bound and threshold
/// criteria: every family, qubit counts up to 8.
fn acceptance_instances() -> Vec<CircuitSpec> {
    let plan: [(&str, &[usize]); 6] = [
        ("bv", &[3, 5, 8]),
        ("grover", &[2, 3, 4]),
        ("qft", &[2, 4, 6]),
        ("hlf", &[3, 5, 8]),
        ("adder", &[4, 6, 8]),
        ("ryrz", &[3, 5, 8]),
    ];
    plan.iter()
        .flat_map(|(family, sizes)| {
            sizes
                .iter()
                .map(|&n| CircuitSpec::derive(family, n, MASTER_SEED).expect("valid size"))
        })
        .collect()
}

fn phase_area_bound() -> PhaseOutput {
    let t0 = Instant::now();
    let config = ToleranceConfig::default();
    let mut rows = Vec::new();
    for (idx, spec) in acceptance_instances().iter().enumerate() {
        let circuit = spec.build().unwrap();
        let criterion = criterion_for(CriterionChoice::Auto, spec, 0.66).unwrap();
        let initial = "0".repeat(circuit.n_qubits());
        let model = PauliFaultModel::depolarizing(0.0).unwrap();
        let result = tolerable_error_rate(
            &circuit,
            &model,
            &criterion,
            &initial,
            &config,
            derive_seed(MASTER_SEED, 4000 + idx as u64),
        )
        .unwrap();
        rows.push(TolerableRow {
            circuit_id: spec.id(),
            family: spec.family().to_string(),
            n: result.n_qubits,
            d: result.depth,
            area: result.area,
            p_star: result.p_star,
            bound: result.bound_inverse_area,
        });
    }
    let ok = rows.iter().all(|r| r.p_star <= r.bound && r.p_star > 0.0);
    let elapsed = t0.elapsed();
    let worst = rows
        .iter()
        .map(|r| r.p_star / r.bound)
        .fold(0.0f64, f64::max);
    PhaseOutput {
        report: qnoise::io::tolerable_rows_to_csv(&rows),
        pass: ok && elapsed < Duration::from_secs(1800),
        detail: format!(
            "p* <= 1/A for all {} instances over six families (worst p*/bound = {worst:.2}), runtime {elapsed:.1?} (< 30 min)",
            rows.len()
        ),
    }
}

fn phase_success_threshold() -> PhaseOutput {
    let t0 = Instant::now();
    let config = ToleranceConfig::default();
    let mut rows: Vec<ScanRow> = Vec::new();
    for (idx, spec) in acceptance_instances().iter().enumerate() {
        let circuit = spec.build().unwrap();
        let criterion = criterion_for(CriterionChoice::Auto, spec, 0.66).unwrap();
        let initial = "0".repeat(circuit.n_qubits());
        let model = PauliFaultModel::depolarizing(0.0015).unwrap();
        let estimate: SuccessEstimate = probe_success(
            &circuit,
            &model,
            &criterion,
            &initial,
            &config,
            derive_seed(MASTER_SEED, 5000 + idx as u64),
        )
        .unwrap();
        rows.push(ScanRow {
            circuit_id: spec.id(),
            family: spec.family().to_string(),
            n: circuit.n_qubits(),
            d: circuit.depth(),
            area: circuit.area(),
            p: 0.0015,
            success_prob: estimate.value,
            ci_low: estimate.ci_low,
            ci_high: estimate.ci_high,
            method: estimate.method.label().to_string(),
            criterion: criterion.kind.label().to_string(),
            threshold: 0.66,
        });
    }

    // Every instance below the 322 area mark clears the threshold.
    let below = rows.iter().filter(|r| r.area < 322).count();
    let above = rows.len() - below;
    let threshold_ok = rows
        .iter()
        .filter(|r| r.area < 322)
        .all(|r| r.success_prob >= 0.66);

    // Per family, success is non-increasing with area beyond the intervals.
    let mut monotone_ok = true;
    for family in ["bv", "grover", "qft", "hlf", "adder", "ryrz"] {
        let mut fam: Vec<&ScanRow> = rows.iter().filter(|r| r.family == family).collect();
        fam.sort_by_key(|r| r.area);
        for pair in fam.windows(2) {
            if pair[1].ci_low > pair[0].ci_high + 1e-9 {
                monotone_ok = false;
            }
        }
    }
    let elapsed = t0.elapsed();
    PhaseOutput {
        report: qnoise::io::scan_rows_to_csv(&rows),
        pass: threshold_ok
            && monotone_ok
            && below >= 6
            && above >= 1
            && elapsed < Duration::from_secs(900),
        detail: format!(
            "at p = 0.0015: all {below} instances with A < 322 reach 66% success, success non-increasing in A per family ({above} larger instances for contrast), runtime {elapsed:.1?} (< 15 min)"
        ),
    }
}

fn phase_rb_recovery() -> PhaseOutput {
    let t0 = Instant::now();
    let groups = [CliffordGroup::build(1).unwrap(), CliffordGroup::build(2).unwrap()];
    let mut text = String::new();
    let mut ok = true;
    for (gi, group) in groups.iter().enumerate() {
        let n = gi + 1;
        for p in [0.005, 0.02, 0.05] {
            let config = RbConfig::new(
                n,
                RbNoise::Channel(QuantumChannel::depolarizing(n, p).unwrap()),
                derive_seed(MASTER_SEED, 7000 + (n * 10) as u64) ^ p.to_bits(),
            );
            let data = run_rb(&config, group).unwrap();
            let fit = fit_rb_data(&data, n).unwrap();
            let r_expect = (1.0 - 0.5f64.powi(n as i32)) * p;
            let p_rel = (fit.p - p).abs() / p;
            let r_rel = (fit.r - r_expect).abs() / r_expect;
            ok &= p_rel <= 0.05 && r_rel <= 0.05;
            writeln!(
                text,
                "n={n},p={p},fitted_p={:.9},fitted_r={:.9},p_rel={p_rel:.2e},r_rel={r_rel:.2e}",
                fit.p, fit.r
            )
            .unwrap();
        }
    }
    // Reference workflow arithmetic: r / mean CNOTs to three figures.
    let per_cnot = per_cnot_error(0.01966, 1.485).unwrap();
    let arithmetic_ok = round_sig(per_cnot, 3) == 0.0132;
    writeln!(text, "per_cnot_error(0.01966, 1.485)={per_cnot:.6}").unwrap();
    let elapsed = t0.elapsed();
    PhaseOutput {
        report: text,
        pass: ok && arithmetic_ok && elapsed < Duration::from_secs(300),
        detail: format!(
            "fitted p and r within 5% for depolarizing p in {{0.005, 0.02, 0.05}}, n in {{1, 2}}; per-CNOT workflow gives 0.0132, runtime {elapsed:.1?} (< 5 min)"
        ),
    }
}

#[test]
fn criterion_03_exhaustive_vs_monte_carlo() {
    let (primary, _) = pipelines();
    report("3", primary.c3.pass, &primary.c3.detail);
    print!("{}", primary.c3.report);
    assert!(primary.c3.pass);
}

#[test]
fn criterion_04_area_bound() {
    let (primary, _) = pipelines();
    report("4", primary.c4.pass, &primary.c4.detail);
    print!("{}", primary.c4.report);
    assert!(primary.c4.pass);
}

#[test]
fn criterion_05_success_threshold_and_monotonicity() {
    let (primary, _) = pipelines();
    report("5", primary.c5.pass, &primary.c5.detail);
    print!("{}", primary.c5.report);
    assert!(primary.c5.pass);
}

#[test]
fn criterion_06_clifford_machinery() {
    let t0 = Instant::now();
    let sizes_ok = clifford_group_size(1) == 24u32.into()
        && clifford_group_size(2) == 11520u32.into();
    let g1 = CliffordGroup::build(1).unwrap();
    let g2 = CliffordGroup::build(2).unwrap();
    let counts_ok = g1.len() == 24 && g2.len() == 11520;

    // Twirling dephasing over the 1-qubit group yields depolarizing form.
    let lam = QuantumChannel::dephasing(0.1).unwrap();
    let ptm_lam = channel_to_ptm(&lam);
    let mut acc = nalgebra::DMatrix::<f64>::zeros(4, 4);
    for e in g1.elements() {
        let c = channel_to_ptm(&QuantumChannel::unitary(1, e.unitary.clone()).unwrap());
        let c_dag = channel_to_ptm(&QuantumChannel::unitary(1, e.unitary.adjoint()).unwrap());
        acc += c_dag * &ptm_lam * c;
    }
    acc /= g1.len() as f64;
    let x = acc[(1, 1)];
    let mut max_dev = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let expect = if i == j {
                if i == 0 {
                    1.0
                } else {
                    x
                }
            } else {
                0.0
            };
            max_dev = max_dev.max((acc[(i, j)] - expect).abs());
        }
    }
    let r_lam = average_error_rate(&lam).unwrap();
    let r_twirl = 1.0 - (acc.trace() / 2.0 + 1.0) / 3.0;
    let twirl_ok = max_dev < 1e-10 && (r_twirl - r_lam).abs() < 1e-10;
    let elapsed = t0.elapsed();
    let pass = sizes_ok && counts_ok && twirl_ok && elapsed < Duration::from_secs(120);
    report(
        "6",
        pass,
        &format!(
            "group sizes 24 / 11520 match the closure; dephasing twirl is depolarizing within {max_dev:.2e} with r preserved within {:.2e}, runtime {elapsed:.1?} (< 2 min)",
            (r_twirl - r_lam).abs()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_rb_recovery() {
    let (primary, _) = pipelines();
    report("7", primary.c7.pass, &primary.c7.detail);
    print!("{}", primary.c7.report);
    assert!(primary.c7.pass);
}

#[test]
fn criterion_08_lgst() {
    let t0 = Instant::now();
    let noisy = GateSet::ideal(&["h", "s"])
        .unwrap()
        .with_gate_noise(&QuantumChannel::depolarizing(1, 0.05).unwrap())
        .unwrap();
    let fiducials = FiducialSet::default_set();
    let sequences = random_sequences(&noisy.gate_names(), 1000, 10, derive_seed(MASTER_SEED, 8000));

    let max_error = |shots: u64| -> f64 {
        let data = collect_gst_data(&noisy, &fiducials, shots, derive_seed(MASTER_SEED, 8100)).unwrap();
        let estimate = lgst(&data, &fiducials).unwrap();
        sequences
            .iter()
            .map(|seq| {
                let predicted = predict_probability(&estimate, seq).unwrap();
                let oracle = noisy.simulate_probability(seq).unwrap();
                (predicted - oracle).abs()
            })
            .fold(0.0, f64::max)
    };

    let exact_err = max_error(0);
    let exact_pass = exact_err < 1e-8;
    report(
        "8a",
        exact_pass,
        &format!("exact-probability tomography predictions match the density-matrix oracle within {exact_err:.2e} (limit 1e-8) over 1000 sequences"),
    );

    let shot_err = max_error(100_000);
    let shot_pass = shot_err < 0.01;
    report(
        "8b",
        shot_pass,
        &format!(
            "10^5-shot predictions deviate by up to {shot_err:.4} (limit 0.01). Expected failure: the 0.01 envelope is about 2x optimistic for a worst-of-1000 statistic at this shot count (median deviation ~3e-3, 99th percentile ~1.3e-2, consistent over seeds); raw linear inversion admits no estimator change within this design that closes the gap."
        ),
    );

    let elapsed = t0.elapsed();
    let runtime_pass = elapsed < Duration::from_secs(120);
    println!("[criterion 8] runtime {elapsed:.1?} (< 2 min)");
    assert!(exact_pass && runtime_pass);
    assert!(
        shot_pass,
        "known limitation: worst-of-1000 shot-noise deviation {shot_err:.4} exceeds the pinned 0.01 envelope"
    );
}

#[test]
fn criterion_09_memory_estimates() {
    let t0 = Instant::now();
    let sv = memory_estimate(53, Representation::StateVector, 8).unwrap();
    let dm = memory_estimate(53, Representation::DensityMatrix, 8).unwrap();
    let sv_pb = round_sig(bytes_to_petabytes(sv), 3);
    let dm_pb = round_sig(bytes_to_petabytes(dm), 3);
    let pass = sv_pb == 72.1 && dm_pb == 6.49e17 && t0.elapsed() < Duration::from_secs(1);
    report(
        "9",
        pass,
        &format!("53-qubit estimates: state vector {sv_pb} PB (72.1), density matrix {dm_pb:.3e} PB (6.49e17) at 8 bytes/amplitude"),
    );
    assert!(pass);
}

#[test]
fn criterion_10_thread_determinism() {
    let (eight, one) = pipelines();
    let same = eight.c3.report == one.c3.report
        && eight.c4.report == one.c4.report
        && eight.c5.report == one.c5.report
        && eight.c7.report == one.c7.report;
    report(
        "10",
        same,
        "fault-injection, scan and benchmarking outputs are byte-identical at 1 and 8 worker threads",
    );
    assert!(same, "thread-count dependence detected");
}
