//! Randomized benchmarking: Clifford groups for one and two qubits, random
//! self-inverting sequences, noisy simulation and exponential-decay fitting.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{pairwise_mean, pairwise_sum};
use crate::noise::{DensityMatrix, PauliFaultModel, QuantumChannel};
use crate::rng::{derive_seed, task_rng, Stage};
use crate::sim::{Circuit, Gate, GateApp, StateVector};

type CMatrix = DMatrix<Complex64>;

/// |Clif_n| = 2^(2n) 2^(n^2) prod_{j=1..n} (2^(2j) - 1), exactly.
pub fn clifford_group_size(n: usize) -> BigUint {
    let two = BigUint::from(2u32);
    let mut size = two.pow(2 * n as u32) * two.pow((n * n) as u32);
    for j in 1..=n {
        size *= two.pow(2 * j as u32) - BigUint::from(1u32);
    }
    size
}

/// One group element: canonical unitary (global phase fixed), a shortest
/// generator decomposition found by the closure search, and its CNOT count.
#[derive(Debug, Clone)]
pub struct CliffordElement {
    pub index: usize,
    pub unitary: CMatrix,
    pub decomposition: Vec<GateApp>,
    pub cnot_count: usize,
}

/// The materialized Clifford group on one or two qubits.
#[derive(Debug, Clone)]
pub struct CliffordGroup {
    n_qubits: usize,
    elements: Vec<CliffordElement>,
    lookup: HashMap<Vec<i64>, usize>,
}

/// Fix the global phase by making the first entry of magnitude > 1/4 real
/// positive. Clifford unitaries on up to two qubits have nonzero entries of
/// magnitude at least 1/2, so the threshold is unambiguous.
fn canonicalize(mut m: CMatrix) -> CMatrix {
    let pivot = m
        .row_iter()
        .flat_map(|r| r.iter().copied().collect::<Vec<_>>())
        .find(|z| z.norm() > 0.25)
        .expect("unitary matrix has an entry of magnitude >= 1/2");
    let phase = pivot / pivot.norm();
    m /= phase;
    m
}

/// Hash key after canonicalization; entries on up to two qubits live on a
/// coarse value grid, so rounding to 1e-6 is exact.
fn canonical_key(m: &CMatrix) -> Vec<i64> {
    let mut key = Vec::with_capacity(2 * m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            key.push((m[(r, c)].re * 1e6).round() as i64);
            key.push((m[(r, c)].im * 1e6).round() as i64);
        }
    }
    key
}

fn generators(n: usize) -> Vec<GateApp> {
    let mut gens = Vec::new();
    for q in 0..n {
        gens.push(GateApp::new(Gate::h(), vec![q]));
        gens.push(GateApp::new(Gate::s(), vec![q]));
    }
    if n == 2 {
        gens.push(GateApp::new(Gate::cnot(), vec![0, 1]));
    }
    gens
}

/// Full-space matrix of a gate application (dense; n <= 2).
fn app_matrix(n: usize, app: &GateApp) -> CMatrix {
    let dim = 1usize << n;
    let g = app.gate.matrix();
    let sub = |idx: usize| -> usize {
        let mut s = 0usize;
        for (pos, &q) in app.targets.iter().enumerate() {
            let bit = idx >> (n - 1 - q) & 1;
            s |= bit << (app.targets.len() - 1 - pos);
        }
        s
    };
    let rest_mask: usize = {
        let mut mask = dim - 1;
        for &q in &app.targets {
            mask &= !(1usize << (n - 1 - q));
        }
        mask
    };
    CMatrix::from_fn(dim, dim, |r, c| {
        if r & rest_mask == c & rest_mask {
            g[(sub(r), sub(c))]
        } else {
            Complex64::ZERO
        }
    })
}

impl CliffordGroup {
    /// Breadth-first closure over {H, S} (one qubit) or {H, S on each qubit,
    /// CNOT} (two qubits), canonicalizing modulo global phase. Yields
    /// exactly `clifford_group_size(n)` elements.
    pub fn build(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 2 {
            return Err(Error::GroupTooLarge(n_qubits));
        }
        let dim = 1usize << n_qubits;
        let gens = generators(n_qubits);
        let gen_matrices: Vec<CMatrix> =
            gens.iter().map(|g| app_matrix(n_qubits, g)).collect();

        let mut elements: Vec<CliffordElement> = Vec::new();
        let mut lookup: HashMap<Vec<i64>, usize> = HashMap::new();
        let identity = canonicalize(CMatrix::identity(dim, dim));
        lookup.insert(canonical_key(&identity), 0);
        elements.push(CliffordElement {
            index: 0,
            unitary: identity,
            decomposition: Vec::new(),
            cnot_count: 0,
        });

        let mut cursor = 0usize;
        while cursor < elements.len() {
            let current = elements[cursor].clone();
            for (g, gm) in gens.iter().zip(&gen_matrices) {
                let candidate = canonicalize(gm * &current.unitary);
                let key = canonical_key(&candidate);
                if !lookup.contains_key(&key) {
                    let index = elements.len();
                    lookup.insert(key, index);
                    let mut decomposition = current.decomposition.clone();
                    decomposition.push(g.clone());
                    let cnot_count =
                        current.cnot_count + usize::from(g.gate.name() == "cx");
                    elements.push(CliffordElement {
                        index,
                        unitary: candidate,
                        decomposition,
                        cnot_count,
                    });
                }
            }
            cursor += 1;
        }
        Ok(Self {
            n_qubits,
            elements,
            lookup,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, index: usize) -> &CliffordElement {
        &self.elements[index]
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    /// Find the group element equal to `m` up to global phase.
    pub fn find(&self, m: &CMatrix) -> Result<usize> {
        let key = canonical_key(&canonicalize(m.clone()));
        self.lookup.get(&key).copied().ok_or(Error::ElementNotFound)
    }

    /// Find the element implementing `gate` on the given target qubits.
    pub fn find_gate(&self, gate: &Gate, targets: &[usize]) -> Result<usize> {
        for &q in targets {
            if q >= self.n_qubits {
                return Err(Error::TargetOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        self.find(&app_matrix(
            self.n_qubits,
            &GateApp::new(gate.clone(), targets.to_vec()),
        ))
    }

    /// Index of the inverse element.
    pub fn inverse(&self, index: usize) -> Result<usize> {
        self.find(&self.elements[index].unitary.adjoint())
    }

    /// Mean CNOT count of the stored decompositions.
    pub fn mean_cnot_count(&self) -> f64 {
        let counts: Vec<f64> = self.elements.iter().map(|e| e.cnot_count as f64).collect();
        pairwise_mean(&counts)
    }

    /// Write decompositions to a versioned JSON cache.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let cache = GroupCache {
            version: CACHE_VERSION,
            n_qubits: self.n_qubits,
            decompositions: self
                .elements
                .iter()
                .map(|e| {
                    e.decomposition
                        .iter()
                        .map(|app| (app.gate.name().to_string(), app.targets.clone()))
                        .collect()
                })
                .collect(),
        };
        let text = serde_json::to_string(&cache).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Rebuild a group from a cache file, re-multiplying and re-verifying
    /// every decomposition.
    pub fn load_cache(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cache: GroupCache =
            serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        if cache.version != CACHE_VERSION {
            return Err(Error::Validation(format!(
                "group cache version {} unsupported",
                cache.version
            )));
        }
        let n = cache.n_qubits;
        if n == 0 || n > 2 {
            return Err(Error::GroupTooLarge(n));
        }
        let dim = 1usize << n;
        let mut elements = Vec::with_capacity(cache.decompositions.len());
        let mut lookup = HashMap::new();
        for (index, decomp) in cache.decompositions.iter().enumerate() {
            // Replay the closure search step by step (canonicalizing after
            // every generator) so the rebuilt floats match a fresh build
            // bit for bit.
            let mut unitary = canonicalize(CMatrix::identity(dim, dim));
            let mut apps = Vec::with_capacity(decomp.len());
            let mut cnot_count = 0usize;
            for (name, targets) in decomp {
                let app = GateApp::new(Gate::from_name(name, &[])?, targets.clone());
                unitary = canonicalize(app_matrix(n, &app) * unitary);
                cnot_count += usize::from(name == "cx");
                apps.push(app);
            }
            let key = canonical_key(&unitary);
            if lookup.insert(key, index).is_some() {
                return Err(Error::Validation("duplicate element in group cache".into()));
            }
            elements.push(CliffordElement {
                index,
                unitary,
                decomposition: apps,
                cnot_count,
            });
        }
        let expected = clifford_group_size(n);
        if BigUint::from(elements.len()) != expected {
            return Err(Error::Validation(format!(
                "group cache holds {} elements, expected {expected}",
                elements.len()
            )));
        }
        Ok(Self {
            n_qubits: n,
            elements,
            lookup,
        })
    }
}

const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct GroupCache {
    version: u32,
    n_qubits: usize,
    decompositions: Vec<Vec<(String, Vec<usize>)>>,
}

/// A random benchmarking sequence: m uniform Cliffords plus the inversion
/// element, expanded to elementary gates (one per layer).
pub fn generate_rb_sequence<R: Rng>(
    group: &CliffordGroup,
    m: usize,
    rng: &mut R,
) -> Result<RbSequence> {
    assert!(m >= 1, "sequence length must be at least 1");
    let indices: Vec<usize> = (0..m).map(|_| rng.random_range(0..group.len())).collect();
    let dim = 1usize << group.n_qubits();
    let mut composite = CMatrix::identity(dim, dim);
    for &i in &indices {
        composite = &group.element(i).unitary * composite;
    }
    let inverse = group.find(&composite.adjoint())?;
    let mut circuit = Circuit::new(group.n_qubits());
    for &i in indices.iter().chain(std::iter::once(&inverse)) {
        for app in &group.element(i).decomposition {
            circuit.push(app.gate.clone(), &app.targets)?;
        }
    }
    Ok(RbSequence {
        indices,
        inverse,
        circuit,
    })
}

#[derive(Debug, Clone)]
pub struct RbSequence {
    pub indices: Vec<usize>,
    pub inverse: usize,
    pub circuit: Circuit,
}

/// Noise inserted between Cliffords of a benchmarking sequence.
#[derive(Debug, Clone)]
pub enum RbNoise {
    Noiseless,
    /// Apply this channel after every random Clifford (density-matrix mode).
    Channel(QuantumChannel),
    /// Inject Pauli faults on every qubit after every random Clifford
    /// (trajectory mode; requires shots >= 1).
    PauliModel(PauliFaultModel),
}

impl RbNoise {
    pub fn describe(&self) -> String {
        match self {
            RbNoise::Noiseless => "noiseless".into(),
            RbNoise::Channel(ch) => format!("channel({} kraus)", ch.kraus_operators().len()),
            RbNoise::PauliModel(m) => format!("pauli(p={})", m.rate()),
        }
    }
}

/// Where the noise acts within each Clifford.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseInsertion {
    /// One noise application per compiled Clifford.
    #[default]
    PerClifford,
    /// One application per elementary gate of the decomposition, on that
    /// gate's target qubits (channel mode only, single-qubit channels).
    PerElementaryGate,
}

#[derive(Debug, Clone)]
pub struct RbConfig {
    pub n_qubits: usize,
    /// Sequence lengths m.
    pub lengths: Vec<usize>,
    /// Random sequences per length.
    pub sequences_per_length: usize,
    /// Measurement shots per sequence; 0 computes exact probabilities.
    pub shots: u64,
    pub noise: RbNoise,
    pub insertion: NoiseInsertion,
    /// Readout bit-flip probability applied per qubit at measurement.
    pub readout_flip: f64,
    pub seed: u64,
}

impl RbConfig {
    pub fn new(n_qubits: usize, noise: RbNoise, seed: u64) -> Self {
        Self {
            n_qubits,
            lengths: vec![1, 2, 3, 5, 7, 10, 15, 20, 30, 50],
            sequences_per_length: 5,
            shots: 0,
            noise,
            insertion: NoiseInsertion::default(),
            readout_flip: 0.0,
            seed,
        }
    }
}

/// Mean survival at one sequence length.
#[derive(Debug, Clone, Serialize)]
pub struct SurvivalPoint {
    pub m: usize,
    pub mean_survival: f64,
    pub stderr: f64,
}

/// Survival data from one benchmarking run.
#[derive(Debug, Clone)]
pub struct RbData {
    pub points: Vec<SurvivalPoint>,
    /// Mean CNOT count over every Clifford applied (inversions included).
    pub sampled_mean_cnots: f64,
}

/// Run the benchmarking protocol: noise acts after each of the m random
/// Cliffords; the closing inversion gate is applied ideally, so SPAM-free
/// simulations decay exactly as A0 (1-p)^m + B0.
pub fn run_rb(config: &RbConfig, group: &CliffordGroup) -> Result<RbData> {
    run_rb_with(config, group, None)
}

/// As `run_rb`, optionally interleaving a fixed target Clifford (with its
/// own noise) after every random Clifford.
fn run_rb_with(
    config: &RbConfig,
    group: &CliffordGroup,
    interleave: Option<(usize, &RbNoise)>,
) -> Result<RbData> {
    if group.n_qubits() != config.n_qubits {
        return Err(Error::DimensionMismatch(group.n_qubits(), config.n_qubits));
    }
    if config.lengths.iter().any(|&m| m == 0) || config.sequences_per_length == 0 {
        return Err(Error::InvalidConfig(
            "lengths and sequence count must be positive".into(),
        ));
    }
    if let RbNoise::Channel(ch) = &config.noise {
        let expect = match config.insertion {
            NoiseInsertion::PerClifford => config.n_qubits,
            NoiseInsertion::PerElementaryGate => 1,
        };
        if ch.n_qubits() != expect {
            return Err(Error::DimensionMismatch(ch.n_qubits(), expect));
        }
    }
    if matches!(config.noise, RbNoise::PauliModel(_)) && config.shots == 0 {
        return Err(Error::InvalidConfig(
            "trajectory noise needs shots >= 1".into(),
        ));
    }

    let tasks: Vec<(usize, usize)> = config
        .lengths
        .iter()
        .enumerate()
        .flat_map(|(mi, _)| (0..config.sequences_per_length).map(move |s| (mi, s)))
        .collect();
    let per_sequence: Result<Vec<(f64, usize, usize)>> = tasks
        .par_iter()
        .map(|&(mi, s)| {
            let m = config.lengths[mi];
            let stream = ((mi as u64) << 24) | s as u64;
            let mut rng = task_rng(config.seed, Stage::RbSequence, stream);
            simulate_sequence(config, group, m, interleave, &mut rng)
        })
        .collect();
    let per_sequence = per_sequence?;

    let mut points = Vec::with_capacity(config.lengths.len());
    for (mi, &m) in config.lengths.iter().enumerate() {
        let vals: Vec<f64> = tasks
            .iter()
            .zip(&per_sequence)
            .filter(|((ti, _), _)| *ti == mi)
            .map(|(_, &(v, _, _))| v)
            .collect();
        let mean = pairwise_mean(&vals);
        let stderr = if vals.len() > 1 {
            let sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
            (pairwise_sum(&sq) / (vals.len() as f64 - 1.0) / vals.len() as f64).sqrt()
        } else {
            0.0
        };
        points.push(SurvivalPoint {
            m,
            mean_survival: mean,
            stderr,
        });
    }
    let total_cnots: usize = per_sequence.iter().map(|&(_, c, _)| c).sum();
    let total_cliffords: usize = per_sequence.iter().map(|&(_, _, k)| k).sum();
    Ok(RbData {
        points,
        sampled_mean_cnots: total_cnots as f64 / total_cliffords as f64,
    })
}

/// Simulate one sequence; returns (survival, cnots applied, cliffords applied).
fn simulate_sequence<R: Rng>(
    config: &RbConfig,
    group: &CliffordGroup,
    m: usize,
    interleave: Option<(usize, &RbNoise)>,
    rng: &mut R,
) -> Result<(f64, usize, usize)> {
    let n = config.n_qubits;
    let dim = 1usize << n;
    let indices: Vec<usize> = (0..m).map(|_| rng.random_range(0..group.len())).collect();

    // Applied order: random Clifford, then (optionally) the target.
    let mut applied: Vec<(usize, &RbNoise)> = Vec::with_capacity(2 * m);
    for &i in &indices {
        applied.push((i, &config.noise));
        if let Some((target, tnoise)) = interleave {
            applied.push((target, tnoise));
        }
    }
    let mut composite = CMatrix::identity(dim, dim);
    for &(i, _) in &applied {
        composite = &group.element(i).unitary * composite;
    }
    let inverse = group.find(&composite.adjoint())?;

    let cnots: usize = applied
        .iter()
        .map(|&(i, _)| group.element(i).cnot_count)
        .sum::<usize>()
        + group.element(inverse).cnot_count;
    let clifford_count = applied.len() + 1;

    let survival = match &config.noise {
        RbNoise::PauliModel(_) => {
            // Trajectory mode: average exact per-trajectory survival.
            let mut vals = Vec::with_capacity(config.shots as usize);
            for _ in 0..config.shots {
                let mut state = StateVector::zero_state(n);
                for &(i, noise) in &applied {
                    for app in &group.element(i).decomposition {
                        state.apply_gate_mut(&app.gate, &app.targets)?;
                    }
                    if let RbNoise::PauliModel(m) = noise {
                        for q in 0..n {
                            if rng.random::<f64>() < m.rate() {
                                let pauli = m.sample_pauli(rng);
                                let gate = match pauli {
                                    crate::noise::Pauli::X => Gate::x(),
                                    crate::noise::Pauli::Y => Gate::y(),
                                    crate::noise::Pauli::Z => Gate::z(),
                                };
                                state.apply_gate_mut(&gate, &[q])?;
                            }
                        }
                    }
                }
                for app in &group.element(inverse).decomposition {
                    state.apply_gate_mut(&app.gate, &app.targets)?;
                }
                let dist = state.measure_distribution();
                vals.push(readout_zero_probability(&dist.probabilities().to_vec(), n, config.readout_flip));
            }
            pairwise_mean(&vals)
        }
        _ => {
            // Channel (or noiseless) mode: exact density-matrix evolution.
            let mut rho = DensityMatrix::from_pure(&StateVector::zero_state(n))?;
            for &(i, noise) in &applied {
                let element = group.element(i);
                match config.insertion {
                    NoiseInsertion::PerClifford => {
                        rho = conjugate(&rho, &element.unitary)?;
                        if let RbNoise::Channel(ch) = noise {
                            rho = ch.apply(&rho)?;
                        }
                    }
                    NoiseInsertion::PerElementaryGate => {
                        for app in &element.decomposition {
                            rho = conjugate(&rho, &app_matrix(n, app))?;
                            if let RbNoise::Channel(ch) = noise {
                                for &q in &app.targets {
                                    rho = ch.apply_at(&rho, q)?;
                                }
                            }
                        }
                    }
                }
            }
            rho = conjugate(&rho, &group.element(inverse).unitary)?;
            let probs: Vec<f64> = (0..dim).map(|i| rho.basis_probability(i)).collect();
            readout_zero_probability(&probs, n, config.readout_flip)
        }
    };

    let survival = if config.shots > 0 && !matches!(config.noise, RbNoise::PauliModel(_)) {
        let hits = Binomial::new(config.shots, survival.clamp(0.0, 1.0))
            .expect("valid probability")
            .sample(rng);
        hits as f64 / config.shots as f64
    } else {
        survival
    };
    Ok((survival, cnots, clifford_count))
}

fn conjugate(rho: &DensityMatrix, u: &CMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(rho.n_qubits(), u * rho.matrix() * u.adjoint())
}

/// Probability of reading all zeros given per-qubit readout flip `eps`.
fn readout_zero_probability(probs: &[f64], n: usize, eps: f64) -> f64 {
    if eps == 0.0 {
        return probs[0];
    }
    probs
        .iter()
        .enumerate()
        .map(|(b, p)| {
            let ones = (b as u64).count_ones() as i32;
            p * eps.powi(ones) * (1.0 - eps).powi(n as i32 - ones)
        })
        .sum()
}

/// Fitted decay parameters of p_0 = A0 (1-p)^m + B0.
#[derive(Debug, Clone, Serialize)]
pub struct RbFit {
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    pub p: f64,
    /// Average error per Clifford, r = (1 - 2^-n) p.
    pub r: f64,
    pub residual: f64,
}

/// Constrained least squares for the decay model. Initialization:
/// B0 <- 1/2^n, A0 <- first point - B0, p from a log-linear regression on
/// (survival - B0); then Levenberg-Marquardt with all parameters boxed to
/// [0, 1].
pub fn fit_rb(points: &[(usize, f64)], n_qubits: usize) -> Result<RbFit> {
    let mut distinct: Vec<usize> = points.iter().map(|&(m, _)| m).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::NotEnoughLengths(3));
    }
    let b_guess = 0.5f64.powi(n_qubits as i32);
    let finish = |a0: f64, b0: f64, p: f64, residual: f64| RbFit {
        a0,
        b0,
        p,
        r: (1.0 - 0.5f64.powi(n_qubits as i32)) * p,
        residual,
    };

    // Degenerate: constant survival fits p = 0 exactly.
    let first = points[0].1;
    if points.iter().all(|&(_, y)| (y - first).abs() < 1e-12) {
        return Ok(finish(first - b_guess, b_guess, 0.0, 0.0));
    }

    // Log-linear initialization.
    let reg: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|&(m, y)| {
            let shifted = y - b_guess;
            (shifted > 1e-9).then(|| (m as f64, shifted.ln()))
        })
        .collect();
    let p_init = if reg.len() >= 2 {
        let n = reg.len() as f64;
        let sx: f64 = reg.iter().map(|r| r.0).sum();
        let sy: f64 = reg.iter().map(|r| r.1).sum();
        let sxx: f64 = reg.iter().map(|r| r.0 * r.0).sum();
        let sxy: f64 = reg.iter().map(|r| r.0 * r.1).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() > 1e-12 {
            let slope = (n * sxy - sx * sy) / denom;
            (1.0 - slope.exp()).clamp(1e-6, 0.999)
        } else {
            0.01
        }
    } else {
        0.01
    };
    let mut params = [
        (first - b_guess).clamp(1e-3, 1.0),
        b_guess,
        p_init,
    ];

    let model = |m: f64, th: &[f64; 3]| th[0] * (1.0 - th[2]).powf(m) + th[1];
    let residuals = |th: &[f64; 3]| -> Vec<f64> {
        points
            .iter()
            .map(|&(m, y)| model(m as f64, th) - y)
            .collect()
    };
    let sse = |th: &[f64; 3]| residuals(th).iter().map(|r| r * r).sum::<f64>();

    // Levenberg-Marquardt with box clamping.
    let mut lambda = 1e-3;
    let mut current = sse(&params);
    for _ in 0..200 {
        let res = residuals(&params);
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for (&(m, _), r) in points.iter().zip(&res) {
            let mf = m as f64;
            let decay = (1.0 - params[2]).powf(mf);
            let j = [
                decay,
                1.0,
                -params[0] * mf * (1.0 - params[2]).powf(mf - 1.0),
            ];
            for a in 0..3 {
                for b in 0..3 {
                    jtj[a][b] += j[a] * j[b];
                }
                jtr[a] += j[a] * r;
            }
        }
        let mut damped = DMatrix::<f64>::zeros(3, 3);
        for a in 0..3 {
            for b in 0..3 {
                damped[(a, b)] = jtj[a][b];
            }
            damped[(a, a)] += lambda * jtj[a][a].max(1e-12);
        }
        let rhs = nalgebra::DVector::from_row_slice(&jtr);
        let Some(step) = damped.lu().solve(&rhs) else {
            lambda *= 10.0;
            continue;
        };
        let candidate = [
            (params[0] - step[0]).clamp(0.0, 1.0),
            (params[1] - step[1]).clamp(0.0, 1.0),
            (params[2] - step[2]).clamp(0.0, 0.9999999),
        ];
        let cand_sse = sse(&candidate);
        if cand_sse < current {
            let rel = (current - cand_sse) / current.max(1e-300);
            params = candidate;
            current = cand_sse;
            lambda = (lambda / 3.0).max(1e-12);
            if rel < 1e-14 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    let residual = (current / points.len() as f64).sqrt();
    Ok(finish(params[0], params[1], params[2], residual))
}

/// Convenience: fit directly from run data.
pub fn fit_rb_data(data: &RbData, n_qubits: usize) -> Result<RbFit> {
    let pts: Vec<(usize, f64)> = data.points.iter().map(|p| (p.m, p.mean_survival)).collect();
    fit_rb(&pts, n_qubits)
}

/// Per-CNOT error rate r / mean CNOT count.
pub fn per_cnot_error(r: f64, mean_cnot_count: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::InvalidConfig("error rate must be >= 0".into()));
    }
    if mean_cnot_count <= 0.0 {
        return Err(Error::InvalidConfig(
            "per-CNOT error needs a group with CNOT gates".into(),
        ));
    }
    Ok(r / mean_cnot_count)
}

/// Interleaved benchmarking result.
#[derive(Debug, Clone, Serialize)]
pub struct InterleavedResult {
    pub reference_p: f64,
    pub interleaved_p: f64,
    /// Estimated error of the target gate:
    /// (1 - 2^-n)(1 - (1 - p_int)/(1 - p_ref)).
    pub gate_error: f64,
}

/// Standard + interleaved run to estimate one Clifford's own error.
pub fn run_interleaved_rb(
    config: &RbConfig,
    group: &CliffordGroup,
    target: usize,
    target_noise: &RbNoise,
) -> Result<InterleavedResult> {
    if target >= group.len() {
        return Err(Error::ElementNotFound);
    }
    let reference = run_rb(config, group)?;
    let p_ref = fit_rb_data(&reference, config.n_qubits)?.p;

    let mut interleaved_config = config.clone();
    interleaved_config.seed = derive_seed(config.seed, 0x1eaf);
    let interleaved = run_rb_with(&interleaved_config, group, Some((target, target_noise)))?;
    let p_int = fit_rb_data(&interleaved, config.n_qubits)?.p;

    let ratio = (1.0 - p_int) / (1.0 - p_ref);
    let gate_error = (1.0 - 0.5f64.powi(config.n_qubits as i32)) * (1.0 - ratio);
    Ok(InterleavedResult {
        reference_p: p_ref,
        interleaved_p: p_int,
        gate_error,
    })
}
