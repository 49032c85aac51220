//! Pure states, gate-application kernels and measurement.
//!
//! Basis convention: qubit 0 is the most significant bit of the basis index,
//! so for two qubits |01> is the amplitude vector (0, 1, 0, 0).

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{bits_to_index, index_to_bits};
use crate::sim::gate::Gate;

const NORM_TOL: f64 = 1e-10;

/// Amplitude vector of a pure n-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on `n_qubits`.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0)
    }

    /// Computational basis state with the given index.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        assert!(n_qubits >= 1, "state needs at least one qubit");
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[index] = Complex64::ONE;
        Self { n_qubits, amps }
    }

    /// Basis state from a bit string such as "01".
    pub fn from_bits(bits: &str) -> Result<Self> {
        let (index, n) = bits_to_index(bits)?;
        Ok(Self::basis_state(n, index))
    }

    /// Build from raw amplitudes; the vector must be normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch(len, len.next_power_of_two()));
        }
        let state = Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        };
        state.check_norm()?;
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Error if the squared norm deviates from 1 by more than 1e-10.
    pub fn check_norm(&self) -> Result<()> {
        let dev = (self.norm_sqr() - 1.0).abs();
        if dev > NORM_TOL {
            Err(Error::NotNormalized(dev))
        } else {
            Ok(())
        }
    }

    /// <self|other>
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Apply `gate` to `targets`, returning the new state.
    pub fn apply_gate(&self, gate: &Gate, targets: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_mut(gate, targets)?;
        Ok(out)
    }

    /// In-place gate application through index-stride kernels; the full
    /// 2^n x 2^n matrix is never materialized.
    pub fn apply_gate_mut(&mut self, gate: &Gate, targets: &[usize]) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(Error::ArityMismatch {
                name: gate.name().to_string(),
                arity: gate.arity(),
                got: targets.len(),
            });
        }
        for &q in targets {
            if q >= self.n_qubits {
                return Err(Error::TargetOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        match targets {
            [q] => {
                let m = gate.matrix();
                self.kernel1([m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]], *q);
            }
            [q1, q2] => {
                if q1 == q2 {
                    return Err(Error::DuplicateTarget(*q1));
                }
                let m = gate.matrix();
                let mut flat = [Complex64::ZERO; 16];
                for r in 0..4 {
                    for c in 0..4 {
                        flat[r * 4 + c] = m[(r, c)];
                    }
                }
                self.kernel2(&flat, *q1, *q2);
            }
            _ => unreachable!("gate arity is 1 or 2"),
        }
        Ok(())
    }

    /// 2x2 kernel: qubit q lives at bit position (n-1-q).
    fn kernel1(&mut self, m: [Complex64; 4], q: usize) {
        let bit = self.n_qubits - 1 - q;
        let mask = 1usize << bit;
        let dim = self.amps.len();
        let mut base = 0usize;
        while base < dim {
            if base & mask == 0 {
                let hi = base | mask;
                let a0 = self.amps[base];
                let a1 = self.amps[hi];
                self.amps[base] = m[0] * a0 + m[1] * a1;
                self.amps[hi] = m[2] * a0 + m[3] * a1;
            }
            base += 1;
        }
    }

    /// 4x4 kernel: gate index bit 1 tracks the first listed target.
    fn kernel2(&mut self, m: &[Complex64; 16], q1: usize, q2: usize) {
        let m1 = 1usize << (self.n_qubits - 1 - q1);
        let m2 = 1usize << (self.n_qubits - 1 - q2);
        let dim = self.amps.len();
        for base in 0..dim {
            if base & m1 == 0 && base & m2 == 0 {
                let idx = [base, base | m2, base | m1, base | m1 | m2];
                let src = [
                    self.amps[idx[0]],
                    self.amps[idx[1]],
                    self.amps[idx[2]],
                    self.amps[idx[3]],
                ];
                for r in 0..4 {
                    let mut acc = Complex64::ZERO;
                    for c in 0..4 {
                        acc += m[r * 4 + c] * src[c];
                    }
                    self.amps[idx[r]] = acc;
                }
            }
        }
    }

    /// Exact outcome distribution of a full computational-basis measurement.
    pub fn measure_distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            n_qubits: self.n_qubits,
            probs: self.amps.iter().map(|a| a.norm_sqr()).collect(),
        }
    }

    /// Sample a destructive full measurement; returns the outcome index and
    /// the collapsed basis state.
    pub fn sample_measurement<R: Rng>(&self, rng: &mut R) -> (usize, StateVector) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut outcome = self.amps.len() - 1;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                outcome = i;
                break;
            }
        }
        (outcome, StateVector::basis_state(self.n_qubits, outcome))
    }

    /// |<target|actual>|^2
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// Probabilities over all n-bit measurement outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    n_qubits: usize,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(n_qubits: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch(probs.len(), 1 << n_qubits));
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < -1e-12) || (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized((sum - 1.0).abs()));
        }
        Ok(Self { n_qubits, probs })
    }

    pub fn uniform(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            probs: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of one exact outcome, e.g. "01".
    pub fn probability_of(&self, bits: &str) -> Result<f64> {
        let (idx, n) = bits_to_index(bits)?;
        if n != self.n_qubits {
            return Err(Error::BitStringLength {
                got: n,
                expected: self.n_qubits,
            });
        }
        Ok(self.probs[idx])
    }

    /// Probability that the first `prefix.len()` qubits read `prefix`.
    pub fn prefix_probability(&self, prefix: &str) -> Result<f64> {
        let (pidx, k) = bits_to_index(prefix)?;
        if k > self.n_qubits {
            return Err(Error::BitStringLength {
                got: k,
                expected: self.n_qubits,
            });
        }
        let shift = self.n_qubits - k;
        let mut total = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            if i >> shift == pidx {
                total += p;
            }
        }
        Ok(total)
    }

    /// Marginal distribution over an ordered subset of qubits.
    pub fn marginal(&self, qubits: &[usize]) -> Result<OutcomeDistribution> {
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(Error::TargetOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        let k = qubits.len();
        let mut probs = vec![0.0; 1 << k];
        for (i, p) in self.probs.iter().enumerate() {
            let mut sub = 0usize;
            for (pos, &q) in qubits.iter().enumerate() {
                let bit = i >> (self.n_qubits - 1 - q) & 1;
                sub |= bit << (k - 1 - pos);
            }
            probs[sub] += p;
        }
        Ok(OutcomeDistribution { n_qubits: k, probs })
    }

    /// Iterate outcomes as (bit string, probability).
    pub fn iter(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (index_to_bits(i, self.n_qubits), p))
    }

    /// Total variation distance to another distribution of equal size.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.probs.len() != other.probs.len() {
            return Err(Error::DimensionMismatch(self.probs.len(), other.probs.len()));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0)
    }
}
