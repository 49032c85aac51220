//! Linear gate set tomography for one qubit: fiducial frames, data
//! collection on simulated noisy gates, linear-inversion reconstruction and
//! gauge-invariant prediction.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::{pauli_string_matrix, DensityMatrix, QuantumChannel};
use crate::rng::{task_rng, Stage};
use crate::sim::Gate;

type CMatrix = DMatrix<Complex64>;

const GRAM_CONDITION_LIMIT: f64 = 1e4;

/// A (possibly noisy) one-qubit gate set with its preparation and
/// measurement.
#[derive(Debug, Clone)]
pub struct GateSet {
    gates: BTreeMap<String, QuantumChannel>,
    rho0: DensityMatrix,
    effect0: CMatrix,
}

impl GateSet {
    pub fn new(
        gates: BTreeMap<String, QuantumChannel>,
        rho0: DensityMatrix,
        effect0: CMatrix,
    ) -> Result<Self> {
        if rho0.n_qubits() != 1 {
            return Err(Error::QubitLimit {
                limit: 1,
                got: rho0.n_qubits(),
            });
        }
        for ch in gates.values() {
            if ch.n_qubits() != 1 {
                return Err(Error::DimensionMismatch(ch.dim(), 2));
            }
        }
        if (&effect0 - effect0.adjoint()).iter().any(|z| z.norm() > 1e-10) {
            return Err(Error::Validation("measurement effect must be self-adjoint".into()));
        }
        let eig = SymmetricEigen::new(effect0.clone());
        if eig.eigenvalues.iter().any(|&l| !(-1e-10..=1.0 + 1e-10).contains(&l)) {
            return Err(Error::Validation(
                "measurement effect eigenvalues must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            gates,
            rho0,
            effect0,
        })
    }

    /// Ideal gate set over the named gates, preparing |0> and measuring in
    /// the computational basis.
    pub fn ideal(names: &[&str]) -> Result<Self> {
        let mut gates = BTreeMap::new();
        for &name in names {
            gates.insert(
                name.to_string(),
                QuantumChannel::from_gate(&Gate::from_name(name, &[])?)?,
            );
        }
        let zero = DensityMatrix::from_bits("0")?;
        let effect0 = zero.matrix().clone();
        Self::new(gates, zero, effect0)
    }

    /// Compose `noise` after every gate.
    pub fn with_gate_noise(&self, noise: &QuantumChannel) -> Result<Self> {
        let mut gates = BTreeMap::new();
        for (name, ch) in &self.gates {
            gates.insert(name.clone(), noise.compose_after(ch)?);
        }
        Ok(Self {
            gates,
            rho0: self.rho0.clone(),
            effect0: self.effect0.clone(),
        })
    }

    pub fn with_preparation(&self, rho0: DensityMatrix) -> Result<Self> {
        Self::new(self.gates.clone(), rho0, self.effect0.clone())
    }

    pub fn gate_names(&self) -> Vec<String> {
        self.gates.keys().cloned().collect()
    }

    pub fn gate(&self, name: &str) -> Result<&QuantumChannel> {
        self.gates
            .get(name)
            .ok_or_else(|| Error::UnknownGate(name.to_string()))
    }

    /// Exact outcome-0 probability of running `sequence` on this gate set:
    /// the density-matrix oracle that tomography predictions are tested
    /// against.
    pub fn simulate_probability(&self, sequence: &[String]) -> Result<f64> {
        let mut rho = self.rho0.clone();
        for name in sequence {
            rho = self.gate(name)?.apply(&rho)?;
        }
        let prod = &self.effect0 * rho.matrix();
        Ok(prod.diagonal().iter().sum::<Complex64>().re)
    }
}

/// Gate-name sequences generating the preparation and measurement frames.
/// The same sequences serve both roles: preparations apply them in order to
/// rho0; measurements apply them mirrored (reverse order) before the
/// computational-basis readout, which keeps the induced effect frame
/// informationally complete even though the phase gate commutes with the
/// readout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiducialSet {
    pub sequences: Vec<Vec<String>>,
}

impl FiducialSet {
    /// {empty, H, H S, H S S}: prepares Bloch axes z, x, y, -x and measures
    /// along z, x, -y, -x.
    pub fn default_set() -> Self {
        Self {
            sequences: vec![
                vec![],
                vec!["h".into()],
                vec!["h".into(), "s".into()],
                vec!["h".into(), "s".into(), "s".into()],
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    fn validate_for(&self, gateset: &GateSet) -> Result<()> {
        if self.sequences.first().map(Vec::len) != Some(0) {
            return Err(Error::InvalidConfig(
                "first fiducial must be the empty sequence".into(),
            ));
        }
        if self.sequences.len() != 4 {
            return Err(Error::InvalidConfig(
                "one-qubit tomography needs exactly 4 fiducials".into(),
            ));
        }
        for seq in &self.sequences {
            for name in seq {
                gateset.gate(name)?;
            }
        }
        Ok(())
    }
}

/// Pauli vector of a state: components Tr(P_l rho)/sqrt(2).
fn state_pvec(rho: &CMatrix) -> DVector<f64> {
    DVector::from_fn(4, |l, _| {
        let p = pauli_string_matrix(1, l);
        (p * rho).diagonal().iter().sum::<Complex64>().re / 2f64.sqrt()
    })
}

/// Pauli covector of an effect: components Tr(P_l E)/sqrt(2).
fn effect_pvec(e: &CMatrix) -> DVector<f64> {
    state_pvec(e)
}

/// Collected outcome-0 probability matrices: entry (i, j) is the probability
/// after preparation fiducial j, an optional middle gate, and measurement
/// fiducial i.
#[derive(Debug, Clone)]
pub struct GstData {
    pub m_empty: DMatrix<f64>,
    pub m_gates: BTreeMap<String, DMatrix<f64>>,
    pub shots: u64,
}

/// Run every fiducial/gate/fiducial circuit on the (noisy) gate set. With
/// shots = 0 the exact probabilities are recorded; otherwise each circuit is
/// sampled binomially from its own derived stream.
pub fn collect_gst_data(
    gateset: &GateSet,
    fiducials: &FiducialSet,
    shots: u64,
    seed: u64,
) -> Result<GstData> {
    fiducials.validate_for(gateset)?;
    let f = fiducials.len();
    let names = gateset.gate_names();

    let probability = |middle: Option<&str>, i: usize, j: usize| -> Result<f64> {
        let mut sequence: Vec<String> = fiducials.sequences[j].clone();
        if let Some(name) = middle {
            sequence.push(name.to_string());
        }
        sequence.extend(fiducials.sequences[i].iter().rev().cloned());
        gateset.simulate_probability(&sequence)
    };

    let sample = |gate_idx: usize, p: f64, i: usize, j: usize| -> f64 {
        if shots == 0 {
            return p;
        }
        let stream = ((gate_idx as u64) << 16) | ((i as u64) << 8) | j as u64;
        let mut rng = task_rng(seed, Stage::GstCircuit, stream);
        let hits = Binomial::new(shots, p.clamp(0.0, 1.0))
            .expect("valid probability")
            .sample(&mut rng);
        hits as f64 / shots as f64
    };

    let mut m_empty = DMatrix::<f64>::zeros(f, f);
    for i in 0..f {
        for j in 0..f {
            m_empty[(i, j)] = sample(0, probability(None, i, j)?, i, j);
        }
    }
    let mut m_gates = BTreeMap::new();
    for (gi, name) in names.iter().enumerate() {
        let mut m = DMatrix::<f64>::zeros(f, f);
        for i in 0..f {
            for j in 0..f {
                m[(i, j)] = sample(gi + 1, probability(Some(name), i, j)?, i, j);
            }
        }
        m_gates.insert(name.clone(), m);
    }
    Ok(GstData {
        m_empty,
        m_gates,
        shots,
    })
}

/// Linear-inversion estimate of a gate set.
#[derive(Debug, Clone)]
pub struct GstEstimate {
    pub gate_ptms: BTreeMap<String, DMatrix<f64>>,
    pub rho_vec: DVector<f64>,
    pub effect_vec: DVector<f64>,
    pub gram: DMatrix<f64>,
    pub gram_condition_number: f64,
    /// Physicality diagnostic: the smallest eigenvalue over all estimated
    /// gates of the trace-normalized Choi matrix. Raw inversion estimates
    /// may dip slightly negative under shot noise; no positivity projection
    /// is applied.
    pub min_choi_eigenvalue: f64,
}

/// Reconstruct gate PTMs and SPAM from collected data:
/// G_k = T (M_k M_empty^-1) T^-1, with T the inverse ideal measurement
/// frame, so an ideal data set reproduces the ideal PTMs and noisy data is
/// recovered up to the gauge similarity shared by SPAM and gates.
pub fn lgst(data: &GstData, fiducials: &FiducialSet) -> Result<GstEstimate> {
    let f = fiducials.len();
    let gram = data.m_empty.clone();
    let svd = gram.clone().svd(false, false);
    let smin = svd.singular_values.min();
    let smax = svd.singular_values.max();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > GRAM_CONDITION_LIMIT {
        return Err(Error::SingularGram(condition));
    }
    let gram_inverse = gram
        .clone()
        .try_inverse()
        .ok_or(Error::SingularGram(f64::INFINITY))?;

    // Ideal frames define the reported gauge.
    let ideal = GateSet::ideal(&["h", "s"])?;
    let mut a_tilde = DMatrix::<f64>::zeros(f, f);
    for (i, seq) in fiducials.sequences.iter().enumerate() {
        let mut u = CMatrix::identity(2, 2);
        for name in seq.iter().rev() {
            // Mirror order: the measurement fiducial applies the sequence
            // reversed, so the effective unitary is gate(s0) ... gate(sk).
            u = ideal_unitary(name)? * u;
        }
        let effect = u.adjoint() * &ideal.effect0 * &u;
        a_tilde.set_row(i, &effect_pvec(&effect).transpose());
    }
    let t = a_tilde
        .clone()
        .try_inverse()
        .ok_or(Error::SingularGram(f64::INFINITY))?;
    let t_inv = a_tilde;

    let mut gate_ptms = BTreeMap::new();
    let mut min_choi = f64::INFINITY;
    for (name, m_k) in &data.m_gates {
        let ptm = &t * m_k * &gram_inverse * &t_inv;
        min_choi = min_choi.min(min_choi_eigenvalue(&ptm));
        gate_ptms.insert(name.clone(), ptm);
    }

    let rho_vec = &t * data.m_empty.column(0).clone_owned();
    let effect_vec = (data.m_empty.row(0) * &gram_inverse * &t_inv).transpose();

    Ok(GstEstimate {
        gate_ptms,
        rho_vec,
        effect_vec,
        gram,
        gram_condition_number: condition,
        min_choi_eigenvalue: min_choi,
    })
}

fn ideal_unitary(name: &str) -> Result<CMatrix> {
    Ok(Gate::from_name(name, &[])?.matrix().clone())
}

/// Smallest eigenvalue of the trace-normalized Choi matrix of a PTM.
fn min_choi_eigenvalue(ptm: &DMatrix<f64>) -> f64 {
    let mut choi = CMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let sig_i = pauli_string_matrix(1, i) / Complex64::new(2f64.sqrt(), 0.0);
            let sig_j = pauli_string_matrix(1, j) / Complex64::new(2f64.sqrt(), 0.0);
            choi += sig_j.transpose().kronecker(&sig_i) * Complex64::new(ptm[(i, j)], 0.0);
        }
    }
    choi /= Complex64::new(2.0, 0.0);
    SymmetricEigen::new(choi)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Gauge-invariant probability prediction for a gate sequence.
pub fn predict_probability(estimate: &GstEstimate, sequence: &[String]) -> Result<f64> {
    let mut state = estimate.rho_vec.clone();
    for name in sequence {
        let g = estimate
            .gate_ptms
            .get(name)
            .ok_or_else(|| Error::UnknownGate(name.to_string()))?;
        state = g * state;
    }
    Ok(estimate.effect_vec.dot(&state))
}

/// Apply a gauge similarity to an estimate (gates -> B G B^-1 with SPAM
/// transformed contragradiently). Predictions are unchanged.
pub fn gauge_transform(estimate: &GstEstimate, b: &DMatrix<f64>) -> Result<GstEstimate> {
    let b_inv = b
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidConfig("gauge transform must be invertible".into()))?;
    let mut gate_ptms = BTreeMap::new();
    for (name, g) in &estimate.gate_ptms {
        gate_ptms.insert(name.clone(), b * g * &b_inv);
    }
    Ok(GstEstimate {
        gate_ptms,
        rho_vec: b * &estimate.rho_vec,
        effect_vec: (estimate.effect_vec.transpose() * &b_inv).transpose(),
        gram: estimate.gram.clone(),
        gram_condition_number: estimate.gram_condition_number,
        min_choi_eigenvalue: estimate.min_choi_eigenvalue,
    })
}

/// Uniformly random gate sequences for prediction checks.
pub fn random_sequences(
    names: &[String],
    count: usize,
    max_len: usize,
    seed: u64,
) -> Vec<Vec<String>> {
    use rand::Rng;
    let mut rng = task_rng(seed, Stage::GstCircuit, u64::MAX >> 16);
    (0..count)
        .map(|_| {
            let len = rng.random_range(0..=max_len);
            (0..len)
                .map(|_| names[rng.random_range(0..names.len())].clone())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn depolarized_gateset(p: f64) -> GateSet {
        let ideal = GateSet::ideal(&["h", "s"]).unwrap();
        ideal
            .with_gate_noise(&QuantumChannel::depolarizing(1, p).unwrap())
            .unwrap()
    }

    #[test]
    fn default_fiducials_prepare_independent_states() {
        let ideal = GateSet::ideal(&["h", "s"]).unwrap();
        let fids = FiducialSet::default_set();
        // Prepared Bloch vectors: z, x, y, -x.
        let expected = [
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
        ];
        let mut states = Vec::new();
        for (seq, bloch) in fids.sequences.iter().zip(expected) {
            let mut rho = ideal.rho0.clone();
            for name in seq {
                rho = ideal.gate(name).unwrap().apply(&rho).unwrap();
            }
            let v = state_pvec(rho.matrix());
            for (axis, &want) in bloch.iter().enumerate() {
                assert_abs_diff_eq!(
                    v[axis + 1] * 2f64.sqrt(),
                    want,
                    epsilon = 1e-12
                );
            }
            states.push(rho);
        }
        // Empty fiducial leaves rho0 unchanged.
        assert_eq!(states[0], ideal.rho0);

        // Gram matrix of the preparation states is well conditioned.
        let gram = DMatrix::<f64>::from_fn(4, 4, |i, j| {
            (states[i].matrix() * states[j].matrix())
                .diagonal()
                .iter()
                .sum::<Complex64>()
                .re
        });
        let svd = gram.svd(false, false);
        let cond = svd.singular_values.max() / svd.singular_values.min();
        assert!(cond < 50.0, "condition number {cond}");
    }

    #[test]
    fn ideal_data_reconstructs_ideal_ptms() {
        let ideal = GateSet::ideal(&["h", "s"]).unwrap();
        let fids = FiducialSet::default_set();
        let data = collect_gst_data(&ideal, &fids, 0, 0).unwrap();
        let estimate = lgst(&data, &fids).unwrap();
        for name in ["h", "s"] {
            let truth = crate::noise::channel_to_ptm(ideal.gate(name).unwrap());
            let got = &estimate.gate_ptms[name];
            assert!((got - truth).abs().max() < 1e-10, "{name}");
        }
        // SPAM reproduces |0><0| on both sides.
        let zero = state_pvec(ideal.rho0.matrix());
        assert!((estimate.rho_vec.clone() - zero.clone()).abs().max() < 1e-10);
        assert!((estimate.effect_vec.clone() - zero).abs().max() < 1e-10);
        assert!(estimate.min_choi_eigenvalue > -1e-10);
    }

    #[test]
    fn identity_gate_reproduces_gram_matrix() {
        let mut gates = BTreeMap::new();
        gates.insert("h".into(), QuantumChannel::from_gate(&Gate::h()).unwrap());
        gates.insert("s".into(), QuantumChannel::from_gate(&Gate::s()).unwrap());
        gates.insert("i".into(), QuantumChannel::identity(1));
        let zero = DensityMatrix::from_bits("0").unwrap();
        let e0 = zero.matrix().clone();
        let set = GateSet::new(gates, zero, e0).unwrap();
        let data = collect_gst_data(&set, &FiducialSet::default_set(), 0, 0).unwrap();
        assert!((&data.m_gates["i"] - &data.m_empty).abs().max() < 1e-12);
    }

    #[test]
    fn noisy_reconstruction_predicts_oracle_probabilities() {
        let noisy = depolarized_gateset(0.05);
        let fids = FiducialSet::default_set();
        let data = collect_gst_data(&noisy, &fids, 0, 0).unwrap();
        let estimate = lgst(&data, &fids).unwrap();
        for seq in random_sequences(&noisy.gate_names(), 200, 10, 17) {
            let predicted = predict_probability(&estimate, &seq).unwrap();
            let oracle = noisy.simulate_probability(&seq).unwrap();
            assert!(
                (predicted - oracle).abs() < 1e-8,
                "sequence {seq:?}: {predicted} vs {oracle}"
            );
        }
    }

    #[test]
    fn preparation_error_is_not_misattributed() {
        let mixed = DensityMatrix::new(
            1,
            DMatrix::from_row_slice(2, 2, &[
                Complex64::new(0.98, 0.0),
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::new(0.02, 0.0),
            ]),
        )
        .unwrap();
        let set = depolarized_gateset(0.02).with_preparation(mixed).unwrap();
        let fids = FiducialSet::default_set();
        let data = collect_gst_data(&set, &fids, 0, 0).unwrap();
        let estimate = lgst(&data, &fids).unwrap();
        for seq in random_sequences(&set.gate_names(), 200, 8, 23) {
            let predicted = predict_probability(&estimate, &seq).unwrap();
            let oracle = set.simulate_probability(&seq).unwrap();
            assert!((predicted - oracle).abs() < 1e-8);
        }
    }

    #[test]
    fn shot_noise_stays_within_binomial_envelope() {
        let noisy = depolarized_gateset(0.05);
        let fids = FiducialSet::default_set();
        let exact = collect_gst_data(&noisy, &fids, 0, 0).unwrap();
        let sampled = collect_gst_data(&noisy, &fids, 10_000, 5).unwrap();
        let bound = 3.0 * (0.25f64 / 10_000.0).sqrt();
        let mut outside = 0usize;
        let mut total = 0usize;
        let mut check = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
            for (x, y) in a.iter().zip(b.iter()) {
                total += 1;
                if (x - y).abs() > bound {
                    outside += 1;
                }
            }
        };
        check(&exact.m_empty, &sampled.m_empty);
        for name in noisy.gate_names() {
            check(&exact.m_gates[&name], &sampled.m_gates[&name]);
        }
        assert!(
            (outside as f64) < 0.02 * total as f64,
            "{outside} of {total} entries outside the 3-sigma envelope"
        );
    }

    #[test]
    fn estimates_are_roughly_trace_preserving_under_shot_noise() {
        let noisy = depolarized_gateset(0.05);
        let fids = FiducialSet::default_set();
        let data = collect_gst_data(&noisy, &fids, 100_000, 7).unwrap();
        let estimate = lgst(&data, &fids).unwrap();
        for (name, ptm) in &estimate.gate_ptms {
            assert!((ptm[(0, 0)] - 1.0).abs() < 5e-2, "{name}");
            for j in 1..4 {
                assert!(ptm[(0, j)].abs() < 5e-2, "{name} column {j}");
            }
        }
    }

    #[test]
    fn gauge_similarity_leaves_predictions_unchanged() {
        let noisy = depolarized_gateset(0.05);
        let fids = FiducialSet::default_set();
        let data = collect_gst_data(&noisy, &fids, 0, 0).unwrap();
        let estimate = lgst(&data, &fids).unwrap();
        let mut rng = task_rng(31, Stage::GstCircuit, 1);
        let sequences = random_sequences(&noisy.gate_names(), 50, 6, 29);
        for _ in 0..10 {
            // Well-conditioned random gauge: identity plus a small tweak.
            let b = DMatrix::<f64>::from_fn(4, 4, |i, j| {
                let base = if i == j { 1.0 } else { 0.0 };
                base + 0.2 * (rng.random::<f64>() - 0.5)
            });
            let transformed = gauge_transform(&estimate, &b).unwrap();
            for seq in &sequences {
                let a = predict_probability(&estimate, seq).unwrap();
                let bp = predict_probability(&transformed, seq).unwrap();
                assert!((a - bp).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn prediction_reference_points() {
        let ideal = GateSet::ideal(&["h", "s"]).unwrap();
        let fids = FiducialSet::default_set();
        let est = lgst(&collect_gst_data(&ideal, &fids, 0, 0).unwrap(), &fids).unwrap();
        assert_abs_diff_eq!(predict_probability(&est, &[]).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            predict_probability(&est, &["h".into(), "h".into()]).unwrap(),
            1.0,
            epsilon = 1e-10
        );
        assert!(predict_probability(&est, &["nope".into()]).is_err());

        // A depolarized Hadamard leaves the superposition unbiased.
        let noisy = depolarized_gateset(0.05);
        let est = lgst(
            &collect_gst_data(&noisy, &fids, 0, 0).unwrap(),
            &fids,
        )
        .unwrap();
        assert_abs_diff_eq!(
            predict_probability(&est, &["h".into()]).unwrap(),
            0.5,
            epsilon = 1e-10
        );
    }

    #[test]
    fn degenerate_fiducials_are_rejected() {
        // Sequences that only ever apply S keep every frame state on the z
        // axis, so the Gram matrix is singular.
        let ideal = GateSet::ideal(&["h", "s"]).unwrap();
        let bad = FiducialSet {
            sequences: vec![
                vec![],
                vec!["s".into()],
                vec!["s".into(), "s".into()],
                vec!["s".into(), "s".into(), "s".into()],
            ],
        };
        let data = collect_gst_data(&ideal, &bad, 0, 0).unwrap();
        assert!(matches!(lgst(&data, &bad), Err(Error::SingularGram(_))));
    }
}
