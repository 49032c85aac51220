//! Success criteria, fault-injection estimators and tolerable-rate search.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::{normal_interval, pairwise_mean, wilson_interval};
use crate::noise::{enumerate_locations, sample_fault_set, FaultSet, Pauli, PauliFaultModel};
use crate::rng::{derive_seed, task_rng, Stage};
use crate::sim::{Circuit, OutcomeDistribution, StateVector};

/// Default success threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.66;
/// Default error rate at which success probabilities are reported.
pub const DEFAULT_REPORT_RATE: f64 = 0.0015;

/// What counts as success for one circuit run.
#[derive(Debug, Clone, PartialEq)]
pub enum CriterionKind {
    /// Probability that the leading qubits read the target pattern. Patterns
    /// shorter than the register are matched as prefixes (marginals), which
    /// covers algorithms whose answer lives on the data qubits only.
    CorrectOutcome { target: String },
    /// Probability mass on a set of disjoint prefix patterns.
    AcceptableSet { patterns: Vec<String> },
    /// Probability mass within a Hamming ball around a full-length center.
    HammingBall { center: String, radius: usize },
    /// |<ideal|actual>|^2 against the noiseless final state.
    Fidelity,
    /// 1 - total variation distance to the noiseless distribution.
    TotalVariation,
    /// Mass on outcomes whose noiseless probability exceeds the noiseless
    /// median probability.
    HeavyOutput,
    /// Linear cross-entropy score 2^n E[p_ideal] - 1.
    CrossEntropy,
}

impl CriterionKind {
    pub fn label(&self) -> &'static str {
        match self {
            CriterionKind::CorrectOutcome { .. } => "correct",
            CriterionKind::AcceptableSet { .. } => "acceptable",
            CriterionKind::HammingBall { .. } => "hamming",
            CriterionKind::Fidelity => "fidelity",
            CriterionKind::TotalVariation => "tvd",
            CriterionKind::HeavyOutput => "heavy",
            CriterionKind::CrossEntropy => "xeb",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessCriterion {
    pub kind: CriterionKind,
    pub threshold: f64,
}

impl SuccessCriterion {
    pub fn new(kind: CriterionKind, threshold: f64) -> Result<Self> {
        let lo = if matches!(kind, CriterionKind::CrossEntropy) {
            -1.0
        } else {
            0.0
        };
        if !(lo..=1.0).contains(&threshold) {
            return Err(Error::RateOutOfRange(threshold, lo, 1.0));
        }
        Ok(Self { kind, threshold })
    }

    pub fn passes(&self, score: f64) -> bool {
        score >= self.threshold
    }
}

/// Result of one circuit execution, in the forms the criteria consume.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: StateVector,
    pub distribution: OutcomeDistribution,
}

impl RunOutcome {
    pub fn from_state(state: StateVector) -> Self {
        let distribution = state.measure_distribution();
        Self {
            state,
            distribution,
        }
    }
}

/// Score `actual` against `ideal` under the criterion kind.
pub fn evaluate_success(
    actual: &RunOutcome,
    ideal: &RunOutcome,
    criterion: &SuccessCriterion,
) -> Result<(f64, bool)> {
    let dist = &actual.distribution;
    let score = match &criterion.kind {
        CriterionKind::CorrectOutcome { target } => dist.prefix_probability(target)?,
        CriterionKind::AcceptableSet { patterns } => {
            let mut total = 0.0;
            for p in patterns {
                total += dist.prefix_probability(p)?;
            }
            total
        }
        CriterionKind::HammingBall { center, radius } => {
            let (cidx, k) = crate::math::bits_to_index(center)?;
            if k != dist.n_qubits() {
                return Err(Error::BitStringLength {
                    got: k,
                    expected: dist.n_qubits(),
                });
            }
            dist.probabilities()
                .iter()
                .enumerate()
                .filter(|(i, _)| (i ^ cidx).count_ones() as usize <= *radius)
                .map(|(_, p)| p)
                .sum()
        }
        CriterionKind::Fidelity => ideal.state.fidelity(&actual.state)?,
        CriterionKind::TotalVariation => 1.0 - dist.total_variation(&ideal.distribution)?,
        CriterionKind::HeavyOutput => {
            let heavy = heavy_set(&ideal.distribution);
            if dist.probabilities().len() != ideal.distribution.probabilities().len() {
                return Err(Error::DimensionMismatch(
                    dist.probabilities().len(),
                    ideal.distribution.probabilities().len(),
                ));
            }
            heavy.iter().map(|&i| dist.probabilities()[i]).sum()
        }
        CriterionKind::CrossEntropy => {
            if dist.probabilities().len() != ideal.distribution.probabilities().len() {
                return Err(Error::DimensionMismatch(
                    dist.probabilities().len(),
                    ideal.distribution.probabilities().len(),
                ));
            }
            let dim = dist.probabilities().len() as f64;
            let mean: f64 = dist
                .probabilities()
                .iter()
                .zip(ideal.distribution.probabilities())
                .map(|(a, b)| a * b)
                .sum();
            dim * mean - 1.0
        }
    };
    Ok((score, criterion.passes(score)))
}

/// Outcomes whose ideal probability strictly exceeds the median ideal
/// probability.
fn heavy_set(ideal: &OutcomeDistribution) -> Vec<usize> {
    let mut sorted: Vec<f64> = ideal.probabilities().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("probabilities are finite"));
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    };
    ideal
        .probabilities()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > median)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimationMethod {
    Exhaustive,
    MonteCarlo,
}

impl EstimationMethod {
    pub fn label(&self) -> &'static str {
        match self {
            EstimationMethod::Exhaustive => "exhaustive",
            EstimationMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// A success-probability estimate with a 95% confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: EstimationMethod,
    pub trials: u64,
}

/// (n, d, A = n*d)
pub fn circuit_area(circuit: &Circuit) -> (usize, usize, usize) {
    (circuit.n_qubits(), circuit.depth(), circuit.area())
}

/// The two size heuristics: (1/(n*d), 1/G).
pub fn error_rate_bounds(circuit: &Circuit) -> Result<(f64, f64)> {
    let (_, d, a) = circuit_area(circuit);
    let g = circuit.gate_count();
    if d == 0 || g == 0 {
        return Err(Error::EmptyCircuit);
    }
    Ok((1.0 / a as f64, 1.0 / g as f64))
}

/// Exhaustive single-fault estimator, valid while at most one fault occurs
/// on average (L*p <= 1):
/// S(p) = (1-p)^L s0 + (1-p)^(L-1) sum_loc sum_P p w_P s(loc, P).
/// Exact for L = 1; a first-order truncation otherwise (multi-fault
/// trajectories are scored zero).
pub fn success_probability_exhaustive(
    circuit: &Circuit,
    model: &PauliFaultModel,
    criterion: &SuccessCriterion,
    initial: &str,
) -> Result<SuccessEstimate> {
    let locations = enumerate_locations(circuit, model);
    let l = locations.len();
    let p = model.rate();
    let expected_faults = l as f64 * p;
    if expected_faults > 1.0 {
        return Err(Error::ExhaustiveDomain(expected_faults));
    }
    let ideal = RunOutcome::from_state(circuit.run(initial, None)?);
    let (s0, _) = evaluate_success(&ideal, &ideal, criterion)?;

    let weights = model.weights();
    let cases: Vec<(usize, Pauli)> = locations
        .iter()
        .enumerate()
        .flat_map(|(i, _)| Pauli::ALL.map(|pa| (i, pa)))
        .filter(|(_, pa)| weights[pauli_index(*pa)] > 0.0)
        .collect();
    let single_scores: Vec<f64> = cases
        .par_iter()
        .map(|&(loc_idx, pauli)| {
            let faults = FaultSet::new(vec![(locations[loc_idx], pauli)])
                .expect("single fault is distinct");
            let state = circuit
                .run(initial, Some(&faults))
                .expect("validated circuit run");
            let outcome = RunOutcome::from_state(state);
            evaluate_success(&outcome, &ideal, criterion)
                .expect("criterion evaluated on ideal reference")
                .0
        })
        .collect();

    let weighted: Vec<f64> = cases
        .iter()
        .zip(&single_scores)
        .map(|(&(_, pauli), &s)| p * weights[pauli_index(pauli)] * s)
        .collect();
    let value = if l == 0 {
        s0
    } else {
        (1.0 - p).powi(l as i32) * s0
            + (1.0 - p).powi(l as i32 - 1) * crate::math::pairwise_sum(&weighted)
    };
    Ok(SuccessEstimate {
        value,
        ci_low: value,
        ci_high: value,
        method: EstimationMethod::Exhaustive,
        trials: cases.len() as u64 + 1,
    })
}

fn pauli_index(p: Pauli) -> usize {
    match p {
        Pauli::X => 0,
        Pauli::Y => 1,
        Pauli::Z => 2,
    }
}

/// Per-trial criterion scores over independently sampled fault sets.
/// Trial t draws from its own derived stream, so any execution order (or
/// thread count) reproduces the same scores.
pub fn mc_scores(
    circuit: &Circuit,
    model: &PauliFaultModel,
    criterion: &SuccessCriterion,
    initial: &str,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let locations = enumerate_locations(circuit, model);
    let ideal = RunOutcome::from_state(circuit.run(initial, None)?);
    let (s0, _) = evaluate_success(&ideal, &ideal, criterion)?;
    let scores: Result<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = task_rng(seed, Stage::McTrial, t);
            let faults = sample_fault_set(&locations, model, &mut rng);
            if faults.is_empty() {
                return Ok(s0);
            }
            let state = circuit.run(initial, Some(&faults))?;
            let outcome = RunOutcome::from_state(state);
            Ok(evaluate_success(&outcome, &ideal, criterion)?.0)
        })
        .collect();
    scores
}

/// Confidence interval for a score sample: Wilson when every score is a
/// pass/fail indicator, normal approximation otherwise.
pub fn score_confidence_interval(scores: &[f64], z: f64) -> (f64, f64) {
    let n = scores.len() as u64;
    let mean = pairwise_mean(scores);
    let binary = scores.iter().all(|&s| s.abs() < 1e-12 || (s - 1.0).abs() < 1e-12);
    if binary {
        wilson_interval(scores.iter().sum(), n, z)
    } else {
        let var: Vec<f64> = scores.iter().map(|s| (s - mean) * (s - mean)).collect();
        let variance = if n > 1 {
            crate::math::pairwise_sum(&var) / (n as f64 - 1.0)
        } else {
            0.0
        };
        normal_interval(mean, variance, n, z)
    }
}

/// Monte Carlo estimator with a 95% interval.
pub fn success_probability_mc(
    circuit: &Circuit,
    model: &PauliFaultModel,
    criterion: &SuccessCriterion,
    initial: &str,
    trials: u64,
    seed: u64,
) -> Result<SuccessEstimate> {
    let scores = mc_scores(circuit, model, criterion, initial, trials, seed)?;
    let value = pairwise_mean(&scores);
    let (ci_low, ci_high) = if model.rate() == 0.0 {
        (value, value)
    } else {
        score_confidence_interval(&scores, 1.96)
    };
    Ok(SuccessEstimate {
        value,
        ci_low: ci_low.min(value),
        ci_high: ci_high.max(value),
        method: EstimationMethod::MonteCarlo,
        trials,
    })
}

/// Search configuration for the tolerable-rate bisection.
#[derive(Debug, Clone)]
pub struct ToleranceConfig {
    pub p_min: f64,
    pub p_max: f64,
    /// Stop when the bracket endpoints are within this ratio.
    pub bracket_ratio: f64,
    pub mc_initial_trials: u64,
    pub mc_max_trials: u64,
    pub report_rate: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            p_min: 1e-6,
            p_max: crate::noise::MAX_FAULT_RATE,
            bracket_ratio: 1.05,
            mc_initial_trials: 10_000,
            mc_max_trials: 1_000_000,
            report_rate: DEFAULT_REPORT_RATE,
        }
    }
}

/// Tolerable-rate search result.
#[derive(Debug, Clone)]
pub struct ToleranceResult {
    pub n_qubits: usize,
    pub depth: usize,
    pub area: usize,
    /// Largest rate at which the criterion still holds (0 when even the
    /// smallest probed rate fails).
    pub p_star: f64,
    pub bound_inverse_area: f64,
    /// Success estimate at `report_rate`.
    pub success_at_report: SuccessEstimate,
    pub report_rate: f64,
}

/// Evaluate a success probability at one rate, choosing the estimator by
/// the expected fault count: exhaustive while L*p <= 1, Monte Carlo above,
/// with trials grown adaptively while the interval straddles the threshold.
pub fn probe_success(
    circuit: &Circuit,
    model: &PauliFaultModel,
    criterion: &SuccessCriterion,
    initial: &str,
    config: &ToleranceConfig,
    probe_seed: u64,
) -> Result<SuccessEstimate> {
    let l = enumerate_locations(circuit, model).len() as f64;
    if l * model.rate() <= 1.0 {
        return success_probability_exhaustive(circuit, model, criterion, initial);
    }
    let mut trials = config.mc_initial_trials;
    let mut attempt = 0u64;
    loop {
        let est = success_probability_mc(
            circuit,
            model,
            criterion,
            initial,
            trials,
            derive_seed(probe_seed, attempt),
        )?;
        let straddles = est.ci_low < criterion.threshold && criterion.threshold < est.ci_high;
        if !straddles || trials >= config.mc_max_trials {
            return Ok(est);
        }
        trials = (trials * 4).min(config.mc_max_trials);
        attempt += 1;
    }
}

/// Bisection on log10(p) for the largest rate meeting the criterion.
pub fn tolerable_error_rate(
    circuit: &Circuit,
    model_template: &PauliFaultModel,
    criterion: &SuccessCriterion,
    initial: &str,
    config: &ToleranceConfig,
    seed: u64,
) -> Result<ToleranceResult> {
    let (n, d, area) = circuit_area(circuit);
    if d == 0 {
        return Err(Error::EmptyCircuit);
    }
    let ideal = RunOutcome::from_state(circuit.run(initial, None)?);
    let (s0, ok) = evaluate_success(&ideal, &ideal, criterion)?;
    if !ok {
        return Err(Error::IdealBelowThreshold {
            score: s0,
            threshold: criterion.threshold,
        });
    }

    let mut probe_index = 0u64;
    let mut probe = |p: f64| -> Result<bool> {
        let model = model_template.with_rate(p)?;
        let est = probe_success(
            circuit,
            &model,
            criterion,
            initial,
            config,
            derive_seed(seed, 1_000_000 + probe_index),
        )?;
        probe_index += 1;
        Ok(est.value >= criterion.threshold)
    };

    let p_star = if probe(config.p_max)? {
        config.p_max
    } else if !probe(config.p_min)? {
        0.0
    } else {
        let mut lo = config.p_min;
        let mut hi = config.p_max;
        while hi / lo > config.bracket_ratio {
            let mid = (lo * hi).sqrt();
            if probe(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    let report_model = model_template.with_rate(config.report_rate)?;
    let success_at_report = probe_success(
        circuit,
        &report_model,
        criterion,
        initial,
        config,
        derive_seed(seed, 999),
    )?;

    Ok(ToleranceResult {
        n_qubits: n,
        depth: d,
        area,
        p_star,
        bound_inverse_area: 1.0 / area as f64,
        success_at_report,
        report_rate: config.report_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    StateVector,
    DensityMatrix,
}

/// Memory needed to store an n-qubit state exactly: 2^n amplitudes for a
/// state vector, 2^(2n) entries for a density matrix.
///
/// `bytes_per_amplitude` is explicit (8 or 16): one complex number takes two
/// doubles (16 bytes), but published size estimates often count 8 bytes per
/// amplitude, so both conventions are supported rather than resolved.
pub fn memory_estimate(
    n_qubits: usize,
    representation: Representation,
    bytes_per_amplitude: u32,
) -> Result<u128> {
    if n_qubits == 0 || n_qubits > 60 {
        return Err(Error::QubitLimit {
            limit: 60,
            got: n_qubits,
        });
    }
    if bytes_per_amplitude != 8 && bytes_per_amplitude != 16 {
        return Err(Error::InvalidConfig(
            "bytes per amplitude must be 8 or 16".into(),
        ));
    }
    let exponent = match representation {
        Representation::StateVector => n_qubits,
        Representation::DensityMatrix => 2 * n_qubits,
    };
    Ok((1u128 << exponent) * bytes_per_amplitude as u128)
}

/// Bytes rendered in petabytes (1e15 bytes).
pub fn bytes_to_petabytes(bytes: u128) -> f64 {
    bytes as f64 / 1e15
}
