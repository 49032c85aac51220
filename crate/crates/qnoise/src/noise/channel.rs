//! Density matrices, Kraus channels and Pauli-transfer-matrix superoperators.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{task_rng, Stage};
use crate::sim::{Gate, StateVector};

/// Density-matrix work is capped at three qubits; larger studies go through
/// pure-state trajectories.
pub const MAX_DENSITY_QUBITS: usize = 3;

const KRAUS_SUM_TOL: f64 = 1e-8;

type CMatrix = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Mixed state of up to [`MAX_DENSITY_QUBITS`] qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Wrap a matrix, checking hermiticity and unit trace (1e-10 each).
    pub fn new(n_qubits: usize, matrix: CMatrix) -> Result<Self> {
        check_qubit_limit(n_qubits)?;
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(matrix.nrows(), dim));
        }
        if (&matrix - matrix.adjoint()).iter().any(|z| z.norm() > 1e-10) {
            return Err(Error::BadDensityMatrix("not self-adjoint"));
        }
        let trace: Complex64 = matrix.diagonal().iter().sum();
        if (trace - Complex64::ONE).norm() > 1e-10 {
            return Err(Error::BadDensityMatrix("trace differs from 1"));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// |psi><psi|
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        check_qubit_limit(state.n_qubits())?;
        let amps = state.amplitudes();
        let dim = amps.len();
        let matrix = CMatrix::from_fn(dim, dim, |r, cix| amps[r] * amps[cix].conj());
        Ok(Self {
            n_qubits: state.n_qubits(),
            matrix,
        })
    }

    pub fn from_bits(bits: &str) -> Result<Self> {
        Self::from_pure(&StateVector::from_bits(bits)?)
    }

    /// Classical mixture of computational basis states with the given
    /// diagonal probabilities.
    pub fn diagonal_mixture(n_qubits: usize, probs: &[f64]) -> Result<Self> {
        check_qubit_limit(n_qubits)?;
        let dim = 1usize << n_qubits;
        if probs.len() != dim {
            return Err(Error::DimensionMismatch(probs.len(), dim));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = c(p);
        }
        Self::new(n_qubits, m)
    }

    /// 1/2^n
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubit_limit(n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(Self {
            n_qubits,
            matrix: CMatrix::identity(dim, dim) * c(1.0 / dim as f64),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// <phi|rho|phi>
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.amplitudes().len() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch(
                state.amplitudes().len(),
                self.matrix.nrows(),
            ));
        }
        let amps = state.amplitudes();
        let mut acc = Complex64::ZERO;
        for r in 0..amps.len() {
            for col in 0..amps.len() {
                acc += amps[r].conj() * self.matrix[(r, col)] * amps[col];
            }
        }
        Ok(acc.re)
    }

    /// Probability of measuring the given full bit string.
    pub fn basis_probability(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    /// Smallest eigenvalue; the positivity invariant allows -1e-10.
    pub fn min_eigenvalue(&self) -> f64 {
        let eig = SymmetricEigen::new(self.matrix.clone());
        eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Full validation including positive semi-definiteness.
    pub fn validate(&self) -> Result<()> {
        if self.min_eigenvalue() < -1e-10 {
            return Err(Error::BadDensityMatrix("negative eigenvalue"));
        }
        Ok(())
    }
}

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    n_qubits: usize,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    /// Wrap Kraus operators; their completeness sum must equal the identity
    /// within 1e-8. Lists longer than 4^n are reduced to Kraus rank first.
    pub fn new(n_qubits: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        check_qubit_limit(n_qubits)?;
        let dim = 1usize << n_qubits;
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch(k.nrows(), dim));
            }
        }
        let kraus = if kraus.len() > dim * dim {
            reduce_kraus(dim, &kraus)
        } else {
            kraus
        };
        let mut sum = CMatrix::zeros(dim, dim);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = (&sum - CMatrix::identity(dim, dim))
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()));
        if dev > KRAUS_SUM_TOL {
            return Err(Error::BadKrausSum(dev));
        }
        Ok(Self { n_qubits, kraus })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            kraus: vec![CMatrix::identity(dim, dim)],
        }
    }

    /// The unitary channel rho -> U rho U^dag.
    pub fn unitary(n_qubits: usize, u: CMatrix) -> Result<Self> {
        let dev = crate::sim::unitarity_deviation(&u);
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        Self::new(n_qubits, vec![u])
    }

    pub fn from_gate(gate: &Gate) -> Result<Self> {
        Self::unitary(gate.arity(), gate.matrix().clone())
    }

    /// n-qubit depolarizing channel
    /// rho -> (1 - p) rho + p Tr(rho) 1/2^n,
    /// realized with uniform weight p/4^n on every non-identity Pauli string.
    /// Its average error rate is (1 - 2^-n) p.
    ///
    /// Note this is parametrized by the depolarizing strength, not by the
    /// total Pauli error probability; see [`pauli_channel`] for the latter
    /// and `pauli_channel(p, w) == depolarizing(1, 4p/3)` for uniform w.
    pub fn depolarizing(n_qubits: usize, p: f64) -> Result<Self> {
        check_qubit_limit(n_qubits)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::RateOutOfRange(p, 0.0, 1.0));
        }
        let strings = 4usize.pow(n_qubits as u32);
        let id_weight = 1.0 - p * (strings - 1) as f64 / strings as f64;
        let pauli_weight = p / strings as f64;
        let mut kraus = Vec::new();
        if id_weight > 0.0 {
            kraus.push(pauli_string_matrix(n_qubits, 0) * c(id_weight.sqrt()));
        }
        if pauli_weight > 0.0 {
            for s in 1..strings {
                kraus.push(pauli_string_matrix(n_qubits, s) * c(pauli_weight.sqrt()));
            }
        }
        Self::new(n_qubits, kraus)
    }

    /// Single-qubit channel applying X, Y, Z with probabilities
    /// p*wx, p*wy, p*wz (no error with probability 1-p). This is the channel
    /// form of one fault-model location.
    pub fn pauli_channel(p: f64, weights: [f64; 3]) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::RateOutOfRange(p, 0.0, 1.0));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::BadPauliWeights(sum));
        }
        let mut kraus = Vec::new();
        if p < 1.0 {
            kraus.push(CMatrix::identity(2, 2) * c((1.0 - p).sqrt()));
        }
        for (w, g) in weights.iter().zip([Gate::x(), Gate::y(), Gate::z()]) {
            if p * w > 0.0 {
                kraus.push(g.matrix() * c((p * w).sqrt()));
            }
        }
        Self::new(1, kraus)
    }

    /// Z errors with probability p.
    pub fn dephasing(p: f64) -> Result<Self> {
        Self::pauli_channel(p, [0.0, 0.0, 1.0])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn kraus_operators(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// rho' = sum_j A_j rho A_j^dag
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch(rho.n_qubits(), self.n_qubits));
        }
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        DensityMatrix::new(self.n_qubits, out)
    }

    /// Channel composition: `self` after `first`.
    pub fn compose_after(&self, first: &QuantumChannel) -> Result<QuantumChannel> {
        if first.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch(first.n_qubits, self.n_qubits));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        QuantumChannel::new(self.n_qubits, kraus)
    }

    /// Apply this single-qubit channel to one qubit of a larger state.
    pub fn apply_at(&self, rho: &DensityMatrix, qubit: usize) -> Result<DensityMatrix> {
        if self.n_qubits != 1 {
            return Err(Error::DimensionMismatch(self.n_qubits, 1));
        }
        if qubit >= rho.n_qubits() {
            return Err(Error::TargetOutOfRange {
                qubit,
                n_qubits: rho.n_qubits(),
            });
        }
        let n = rho.n_qubits();
        let dim = 1usize << n;
        let mut out = CMatrix::zeros(dim, dim);
        for k in &self.kraus {
            let full = embed_matrix(n, k, &[qubit]);
            out += &full * rho.matrix() * full.adjoint();
        }
        DensityMatrix::new(n, out)
    }
}

/// Guard for exponential-size density-matrix work.
fn check_qubit_limit(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_DENSITY_QUBITS {
        return Err(Error::QubitLimit {
            limit: MAX_DENSITY_QUBITS,
            got: n_qubits,
        });
    }
    Ok(())
}

/// Reduce a Kraus list to at most dim^2 operators via the eigendecomposition
/// of the Choi matrix; the represented channel is unchanged.
fn reduce_kraus(dim: usize, kraus: &[CMatrix]) -> Vec<CMatrix> {
    let d2 = dim * dim;
    let vecs: Vec<Vec<Complex64>> = kraus
        .iter()
        .map(|k| {
            // Column-major vectorization.
            let mut v = Vec::with_capacity(d2);
            for col in 0..dim {
                for row in 0..dim {
                    v.push(k[(row, col)]);
                }
            }
            v
        })
        .collect();
    let mut choi = CMatrix::zeros(d2, d2);
    for v in &vecs {
        for r in 0..d2 {
            for cix in 0..d2 {
                choi[(r, cix)] += v[r] * v[cix].conj();
            }
        }
    }
    let eig = SymmetricEigen::new(choi);
    let mut out = Vec::new();
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 1e-12 {
            let col = eig.eigenvectors.column(idx);
            let mut k = CMatrix::zeros(dim, dim);
            for colj in 0..dim {
                for row in 0..dim {
                    k[(row, colj)] = col[colj * dim + row] * c(lambda.sqrt());
                }
            }
            out.push(k);
        }
    }
    out
}

/// Embed a small matrix acting on `targets` into the full 2^n space
/// (qubit 0 = most significant bit). Dense; intended for n <= 3 oracles.
pub(crate) fn embed_matrix(n: usize, m: &CMatrix, targets: &[usize]) -> CMatrix {
    let dim = 1usize << n;
    let k = targets.len();
    let sub = |idx: usize| -> usize {
        let mut s = 0usize;
        for (pos, &q) in targets.iter().enumerate() {
            let bit = idx >> (n - 1 - q) & 1;
            s |= bit << (k - 1 - pos);
        }
        s
    };
    let rest_mask: usize = {
        let mut mask = dim - 1;
        for &q in targets {
            mask &= !(1usize << (n - 1 - q));
        }
        mask
    };
    CMatrix::from_fn(dim, dim, |r, cix| {
        if r & rest_mask == cix & rest_mask {
            m[(sub(r), sub(cix))]
        } else {
            Complex64::ZERO
        }
    })
}

/// The i-th n-qubit Pauli string, indexing base-4 digits {1,X,Y,Z} with
/// qubit 0 as the most significant digit.
pub fn pauli_string_matrix(n_qubits: usize, index: usize) -> CMatrix {
    let single = |digit: usize| -> CMatrix {
        match digit {
            0 => CMatrix::identity(2, 2),
            1 => Gate::x().matrix().clone(),
            2 => Gate::y().matrix().clone(),
            _ => Gate::z().matrix().clone(),
        }
    };
    let mut digits = Vec::with_capacity(n_qubits);
    let mut rem = index;
    for _ in 0..n_qubits {
        digits.push(rem % 4);
        rem /= 4;
    }
    digits.reverse(); // qubit 0 = most significant digit
    let mut out = single(digits[0]);
    for &d in &digits[1..] {
        out = out.kronecker(&single(d));
    }
    out
}

/// Pauli transfer matrix: M[i][j] = Tr(P_i E(P_j)) / 2^n, a real 4^n x 4^n
/// matrix. The first row is (1, 0, ..., 0) for trace-preserving channels.
pub fn channel_to_ptm(channel: &QuantumChannel) -> DMatrix<f64> {
    let n = channel.n_qubits();
    let dim = channel.dim();
    let strings = 4usize.pow(n as u32);
    let paulis: Vec<CMatrix> = (0..strings).map(|i| pauli_string_matrix(n, i)).collect();
    let mut ptm = DMatrix::<f64>::zeros(strings, strings);
    for j in 0..strings {
        // E(P_j)
        let mut image = CMatrix::zeros(dim, dim);
        for k in channel.kraus_operators() {
            image += k * &paulis[j] * k.adjoint();
        }
        for i in 0..strings {
            let prod = &paulis[i] * &image;
            let tr: Complex64 = prod.diagonal().iter().sum();
            ptm[(i, j)] = tr.re / dim as f64;
        }
    }
    ptm
}

/// Error operator of a noisy implementation: the inverse ideal unitary
/// applied after the noisy channel, so an exact implementation maps to the
/// identity channel.
pub fn error_operator(ideal: &Gate, noisy: &QuantumChannel) -> Result<QuantumChannel> {
    if 1 << ideal.arity() != noisy.dim() {
        return Err(Error::DimensionMismatch(1 << ideal.arity(), noisy.dim()));
    }
    let u_inv = ideal.matrix().adjoint();
    let kraus = noisy
        .kraus_operators()
        .iter()
        .map(|k| &u_inv * k)
        .collect();
    QuantumChannel::new(noisy.n_qubits(), kraus)
}

/// Average error rate r = 1 - Fbar of an error channel, with the average
/// fidelity from the closed form Fbar = (Tr(PTM)/2^n + 1) / (2^n + 1).
pub fn average_error_rate(error: &QuantumChannel) -> Result<f64> {
    // Trace preservation re-check (sum of A^dag A).
    let dim = error.dim();
    let mut sum = CMatrix::zeros(dim, dim);
    for k in error.kraus_operators() {
        sum += k.adjoint() * k;
    }
    let dev = (&sum - CMatrix::identity(dim, dim))
        .iter()
        .fold(0.0f64, |a, z| a.max(z.norm()));
    if dev > KRAUS_SUM_TOL {
        return Err(Error::NotTracePreserving(dev));
    }
    let ptm = channel_to_ptm(error);
    let d = dim as f64;
    let fbar = (ptm.trace() / d + 1.0) / (d + 1.0);
    Ok(1.0 - fbar)
}

/// Monte Carlo cross-check of the average fidelity: mean of
/// <phi|E(|phi><phi|)|phi> over Haar-random pure states sampled by
/// normalizing complex Gaussian vectors.
pub fn haar_average_fidelity(channel: &QuantumChannel, samples: usize, seed: u64) -> f64 {
    let dim = channel.dim();
    let mut rng = task_rng(seed, Stage::Shot, 0);
    let normal = StandardNormal;
    let mut acc = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut phi: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = normal.sample(&mut rng);
                let im: f64 = normal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        let norm = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut phi {
            *z /= norm;
        }
        // F = sum_j |<phi|A_j|phi>|^2
        let mut f = 0.0;
        for k in channel.kraus_operators() {
            let mut amp = Complex64::ZERO;
            for r in 0..dim {
                let mut row = Complex64::ZERO;
                for cix in 0..dim {
                    row += k[(r, cix)] * phi[cix];
                }
                amp += phi[r].conj() * row;
            }
            f += amp.norm_sqr();
        }
        acc.push(f);
    }
    crate::math::pairwise_mean(&acc)
}
