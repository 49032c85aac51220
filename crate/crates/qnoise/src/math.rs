//! Small numeric helpers shared across modules.

use crate::error::{Error, Result};

/// Pairwise (cascade) summation. Order is fixed by the slice layout, so the
/// result is independent of how the values were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Mean via pairwise summation.
pub fn pairwise_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: f64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Normal-approximation interval for a mean of scores. No clamping: some
/// criteria score outside [0, 1].
pub fn normal_interval(mean: f64, variance: f64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let half = z * (variance / trials as f64).sqrt();
    (mean - half, mean + half)
}

/// Parse an n-bit string into a basis index (bit 0 of the string is the most
/// significant bit of the index).
pub fn bits_to_index(bits: &str) -> Result<(usize, usize)> {
    let mut idx = 0usize;
    let mut n = 0usize;
    for c in bits.chars() {
        idx <<= 1;
        match c {
            '0' => {}
            '1' => idx |= 1,
            _ => return Err(Error::BadBitString(bits.to_string())),
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::BadBitString(bits.to_string()));
    }
    Ok((idx, n))
}

/// Render a basis index as an n-bit string (qubit 0 first).
pub fn index_to_bits(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| {
            if index >> (n_qubits - 1 - q) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Round to `sig` significant decimal digits.
pub fn round_sig(x: f64, sig: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exp = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(sig as i32 - 1 - exp);
    (x * factor).round() / factor
}
