//! Benchmark circuit generators on the rotation + CNOT gate set, without
//! geometric constraints.
//!
//! Multi-controlled phases are decomposed ancilla-free through parity
//! networks (one Rz per parity subset, CNOTs to accumulate parities), so
//! every family stays on the supported gate set at the cost of extra depth.
//! The decomposition choice matters: it changes circuit area and therefore
//! tolerable-rate results.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{task_rng, Stage};
use crate::sim::{Circuit, Gate, GateApp};

/// One benchmark instance with enough data to rebuild it deterministically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CircuitSpec {
    /// Hidden-string recovery; n = |hidden| + 1 qubits (ancilla last).
    Bv { hidden: String },
    Qft { n: usize },
    Grover {
        n: usize,
        marked: String,
        iterations: usize,
    },
    /// Symmetric binary quadratic form, row-major upper triangle included.
    Hlf { matrix: Vec<Vec<bool>> },
    /// Ripple-carry adder on two `width`-bit registers with prepared
    /// operands; n = 2*width + 2 (carry-in ancilla and carry-out).
    Adder { width: usize, a: u64, b: u64 },
    Ryrz {
        n: usize,
        layers: usize,
        angles: Vec<f64>,
    },
}

impl CircuitSpec {
    pub fn family(&self) -> &'static str {
        match self {
            CircuitSpec::Bv { .. } => "bv",
            CircuitSpec::Qft { .. } => "qft",
            CircuitSpec::Grover { .. } => "grover",
            CircuitSpec::Hlf { .. } => "hlf",
            CircuitSpec::Adder { .. } => "adder",
            CircuitSpec::Ryrz { .. } => "ryrz",
        }
    }

    pub fn id(&self) -> String {
        match self {
            CircuitSpec::Bv { hidden } => format!("bv_s{hidden}"),
            CircuitSpec::Qft { n } => format!("qft_n{n}"),
            CircuitSpec::Grover {
                n,
                marked,
                iterations,
            } => format!("grover_n{n}_m{marked}_k{iterations}"),
            CircuitSpec::Hlf { matrix } => {
                let bits: String = matrix
                    .iter()
                    .flat_map(|row| row.iter().map(|&b| if b { '1' } else { '0' }))
                    .collect();
                format!("hlf_n{}_q{bits}", matrix.len())
            }
            CircuitSpec::Adder { width, a, b } => format!("adder_w{width}_a{a}_b{b}"),
            CircuitSpec::Ryrz { n, layers, .. } => format!("ryrz_n{n}_l{layers}"),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            CircuitSpec::Bv { hidden } => hidden.len() + 1,
            CircuitSpec::Qft { n } => *n,
            CircuitSpec::Grover { n, .. } => *n,
            CircuitSpec::Hlf { matrix } => matrix.len(),
            CircuitSpec::Adder { width, .. } => 2 * width + 2,
            CircuitSpec::Ryrz { n, .. } => *n,
        }
    }

    pub fn build(&self) -> Result<Circuit> {
        match self {
            CircuitSpec::Bv { hidden } => gen_bv(hidden),
            CircuitSpec::Qft { n } => Ok(gen_qft(*n)),
            CircuitSpec::Grover {
                n,
                marked,
                iterations,
            } => gen_grover(*n, marked, *iterations),
            CircuitSpec::Hlf { matrix } => gen_hlf(matrix),
            CircuitSpec::Adder { width, a, b } => gen_adder_with_inputs(*width, *a, *b),
            CircuitSpec::Ryrz { n, layers, angles } => gen_ryrz(*n, *layers, angles),
        }
    }

    /// Expected noiseless outcome for single-outcome families, as a prefix
    /// bit pattern (data qubits first).
    pub fn ideal_target(&self) -> Option<String> {
        match self {
            CircuitSpec::Bv { hidden } => Some(hidden.clone()),
            CircuitSpec::Adder { width, a, b } => {
                let w = *width;
                let sum = a + b;
                let mut bits = vec!['0'; 2 * w + 2];
                for i in 0..w {
                    // a register unchanged, b register holds the low sum bits.
                    bits[i] = if a >> i & 1 == 1 { '1' } else { '0' };
                    bits[w + i] = if sum >> i & 1 == 1 { '1' } else { '0' };
                }
                bits[2 * w + 1] = if sum >> w & 1 == 1 { '1' } else { '0' };
                Some(bits.into_iter().collect())
            }
            _ => None,
        }
    }

    /// Derive the scan instance of a family at `n_qubits` from a master
    /// seed. Returns None when the family cannot realize that qubit count.
    pub fn derive(family: &str, n_qubits: usize, master_seed: u64) -> Option<CircuitSpec> {
        let salt = (family_index(family)? as u64) << 32 | n_qubits as u64;
        let mut rng = task_rng(master_seed, Stage::Instance, salt);
        match family {
            "bv" => {
                if n_qubits < 2 {
                    return None;
                }
                let hidden: String = (0..n_qubits - 1)
                    .map(|_| if rng.random_bool(0.5) { '1' } else { '0' })
                    .collect();
                Some(CircuitSpec::Bv { hidden })
            }
            "qft" => {
                if n_qubits < 1 {
                    return None;
                }
                Some(CircuitSpec::Qft { n: n_qubits })
            }
            "grover" => {
                if n_qubits < 2 {
                    return None;
                }
                let marked: String = (0..n_qubits)
                    .map(|_| if rng.random_bool(0.5) { '1' } else { '0' })
                    .collect();
                Some(CircuitSpec::Grover {
                    n: n_qubits,
                    marked,
                    iterations: grover_optimal_iterations(n_qubits),
                })
            }
            "hlf" => {
                if n_qubits < 2 {
                    return None;
                }
                let mut m = vec![vec![false; n_qubits]; n_qubits];
                for i in 0..n_qubits {
                    for j in i..n_qubits {
                        let bit = rng.random_bool(0.5);
                        m[i][j] = bit;
                        m[j][i] = bit;
                    }
                }
                Some(CircuitSpec::Hlf { matrix: m })
            }
            "adder" => {
                if n_qubits < 4 || n_qubits % 2 != 0 {
                    return None;
                }
                let width = (n_qubits - 2) / 2;
                let max = (1u64 << width) - 1;
                Some(CircuitSpec::Adder {
                    width,
                    a: rng.random_range(0..=max),
                    b: rng.random_range(0..=max),
                })
            }
            "ryrz" => {
                if n_qubits < 1 {
                    return None;
                }
                let layers = 1;
                let angles = (0..2 * n_qubits * (layers + 1))
                    .map(|_| rng.random_range(-PI..PI))
                    .collect();
                Some(CircuitSpec::Ryrz {
                    n: n_qubits,
                    layers,
                    angles,
                })
            }
            _ => None,
        }
    }
}

pub const FAMILIES: [&str; 6] = ["bv", "grover", "qft", "hlf", "adder", "ryrz"];

fn family_index(family: &str) -> Option<usize> {
    FAMILIES.iter().position(|&f| f == family)
}

/// Optimal Grover iteration count round(pi / (4 asin(2^{-n/2})) - 1/2),
/// at least 1.
pub fn grover_optimal_iterations(n: usize) -> usize {
    let theta = (1.0 / (1u64 << n) as f64).sqrt().asin();
    ((PI / (4.0 * theta) - 0.5).round() as usize).max(1)
}

/// Analytic Grover success probability sin^2((2k+1) asin(2^{-n/2})).
pub fn grover_success_probability(n: usize, iterations: usize) -> f64 {
    let theta = (1.0 / (1u64 << n) as f64).sqrt().asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

/// Hidden-string circuit: H layer, phase oracle as CNOTs onto an ancilla
/// prepared in |->, closing H layer on the data qubits.
pub fn gen_bv(hidden: &str) -> Result<Circuit> {
    if hidden.is_empty() || hidden.chars().any(|c| c != '0' && c != '1') {
        return Err(Error::BadBitString(hidden.to_string()));
    }
    let k = hidden.len();
    let n = k + 1;
    let ancilla = k;
    let mut c = Circuit::new(n);
    let mut first = Vec::with_capacity(n);
    for q in 0..k {
        first.push(GateApp::new(Gate::h(), vec![q]));
    }
    first.push(GateApp::new(Gate::x(), vec![ancilla]));
    c.add_layer(first)?;
    c.push(Gate::h(), &[ancilla])?;
    for (i, bit) in hidden.chars().enumerate() {
        if bit == '1' {
            c.push(Gate::cnot(), &[i, ancilla])?;
        }
    }
    let closing = (0..k).map(|q| GateApp::new(Gate::h(), vec![q])).collect();
    c.add_layer(closing)?;
    Ok(c)
}

/// Standard transform circuit: H plus controlled-phase cascade (decomposed
/// into Rz and CNOT), then a CNOT-triple swap network.
pub fn gen_qft(n: usize) -> Circuit {
    assert!(n >= 1);
    let mut c = Circuit::new(n);
    for i in 0..n {
        c.push(Gate::h(), &[i]).expect("valid target");
        for j in i + 1..n {
            let theta = PI / (1u64 << (j - i)) as f64;
            push_controlled_phase(&mut c, j, i, theta);
        }
    }
    for i in 0..n / 2 {
        push_swap(&mut c, i, n - 1 - i);
    }
    c
}

/// Marked-item search: H layer, then `iterations` rounds of phase oracle and
/// diffusion, both via the parity-network multi-controlled Z.
pub fn gen_grover(n: usize, marked: &str, iterations: usize) -> Result<Circuit> {
    if marked.len() != n {
        return Err(Error::BitStringLength {
            got: marked.len(),
            expected: n,
        });
    }
    if marked.chars().any(|c| c != '0' && c != '1') {
        return Err(Error::BadBitString(marked.to_string()));
    }
    let mut c = Circuit::new(n);
    push_h_layer(&mut c, n)?;
    let zeros: Vec<usize> = marked
        .chars()
        .enumerate()
        .filter_map(|(q, b)| (b == '0').then_some(q))
        .collect();
    let all: Vec<usize> = (0..n).collect();
    for _ in 0..iterations {
        // Oracle: flip the phase of |marked>.
        push_x_layer(&mut c, &zeros)?;
        push_mcz(&mut c, &all)?;
        push_x_layer(&mut c, &zeros)?;
        // Diffusion: inversion about the mean.
        push_h_layer(&mut c, n)?;
        push_x_layer(&mut c, &all)?;
        push_mcz(&mut c, &all)?;
        push_x_layer(&mut c, &all)?;
        push_h_layer(&mut c, n)?;
    }
    Ok(c)
}

/// Hidden-linear-function circuit: H layer, CZ for every off-diagonal 1
/// (decomposed via H and CNOT), S for every diagonal 1, H layer.
pub fn gen_hlf(matrix: &[Vec<bool>]) -> Result<Circuit> {
    let n = matrix.len();
    if n < 1 || matrix.iter().any(|row| row.len() != n) {
        return Err(Error::Validation("quadratic form must be square".into()));
    }
    for i in 0..n {
        for j in 0..n {
            if matrix[i][j] != matrix[j][i] {
                return Err(Error::Validation("quadratic form must be symmetric".into()));
            }
        }
    }
    let mut c = Circuit::new(n);
    push_h_layer(&mut c, n)?;
    for i in 0..n {
        for j in i + 1..n {
            if matrix[i][j] {
                // CZ(i, j) = H(j) CNOT(i -> j) H(j)
                c.push(Gate::h(), &[j])?;
                c.push(Gate::cnot(), &[i, j])?;
                c.push(Gate::h(), &[j])?;
            }
        }
    }
    let s_layer: Vec<GateApp> = (0..n)
        .filter(|&i| matrix[i][i])
        .map(|i| GateApp::new(Gate::s(), vec![i]))
        .collect();
    if !s_layer.is_empty() {
        c.add_layer(s_layer)?;
    }
    push_h_layer(&mut c, n)?;
    Ok(c)
}

/// Logical gate counts of the hidden-linear-function construction before
/// decomposition: (H, CZ, S).
pub fn hlf_gate_summary(matrix: &[Vec<bool>]) -> (usize, usize, usize) {
    let n = matrix.len();
    let cz = (0..n)
        .map(|i| (i + 1..n).filter(|&j| matrix[i][j]).count())
        .sum();
    let s = (0..n).filter(|&i| matrix[i][i]).count();
    (2 * n, cz, s)
}

/// All valid outputs of the hidden-linear-function instance, by brute force
/// over the linearity domain of q(x) = x^T A x mod 4.
pub fn hlf_solutions(matrix: &[Vec<bool>]) -> Vec<usize> {
    let n = matrix.len();
    let size = 1usize << n;
    let bit = |x: usize, i: usize| x >> (n - 1 - i) & 1;
    let q = |x: usize| -> usize {
        let mut total = 0;
        for i in 0..n {
            if matrix[i][i] {
                total += bit(x, i);
            }
            for j in i + 1..n {
                if matrix[i][j] {
                    total += 2 * bit(x, i) * bit(x, j);
                }
            }
        }
        total % 4
    };
    let in_domain: Vec<usize> = (0..size)
        .filter(|&x| (0..size).all(|y| q(x ^ y) == (q(x) + q(y)) % 4))
        .collect();
    (0..size)
        .filter(|&z| {
            in_domain.iter().all(|&x| {
                let dot: usize = (0..n).map(|i| bit(z, i) * bit(x, i)).sum();
                q(x) == 2 * dot % 4
            })
        })
        .collect()
}

/// Ripple-carry adder with operand preparation: X gates load `a` and `b`
/// into the registers, then majority/unmajority blocks compute
/// b <- a + b with the carry in the last qubit.
pub fn gen_adder_with_inputs(width: usize, a: u64, b: u64) -> Result<Circuit> {
    if width < 1 {
        return Err(Error::InvalidConfig("adder width must be >= 1".into()));
    }
    let max = (1u64 << width) - 1;
    if a > max || b > max {
        return Err(Error::InvalidConfig(format!(
            "operands must fit in {width} bit(s)"
        )));
    }
    let n = 2 * width + 2;
    let mut c = Circuit::new(n);
    let mut prep = Vec::new();
    for i in 0..width {
        if a >> i & 1 == 1 {
            prep.push(GateApp::new(Gate::x(), vec![i]));
        }
        if b >> i & 1 == 1 {
            prep.push(GateApp::new(Gate::x(), vec![width + i]));
        }
    }
    if !prep.is_empty() {
        c.add_layer(prep)?;
    }
    append_adder(&mut c, width)?;
    Ok(c)
}

/// The bare adder circuit (no operand preparation).
pub fn gen_adder(width: usize) -> Result<Circuit> {
    let mut c = Circuit::new(2 * width + 2);
    append_adder(&mut c, width)?;
    Ok(c)
}

fn append_adder(c: &mut Circuit, width: usize) -> Result<()> {
    let a = |i: usize| i;
    let b = |i: usize| width + i;
    let cin = 2 * width;
    let cout = 2 * width + 1;

    let maj = |c: &mut Circuit, x: usize, y: usize, z: usize| -> Result<()> {
        c.push(Gate::cnot(), &[z, y])?;
        c.push(Gate::cnot(), &[z, x])?;
        push_toffoli(c, x, y, z)
    };
    let uma = |c: &mut Circuit, x: usize, y: usize, z: usize| -> Result<()> {
        push_toffoli(c, x, y, z)?;
        c.push(Gate::cnot(), &[z, x])?;
        c.push(Gate::cnot(), &[x, y])?;
        Ok(())
    };

    maj(c, cin, b(0), a(0))?;
    for i in 1..width {
        maj(c, a(i - 1), b(i), a(i))?;
    }
    c.push(Gate::cnot(), &[a(width - 1), cout])?;
    for i in (1..width).rev() {
        uma(c, a(i - 1), b(i), a(i))?;
    }
    uma(c, cin, b(0), a(0))?;
    Ok(())
}

/// Hardware-efficient ansatz: Ry and Rz rotation layers alternating with
/// linear-chain CNOT entanglers. Needs 2*n*(layers+1) angles.
pub fn gen_ryrz(n: usize, layers: usize, angles: &[f64]) -> Result<Circuit> {
    let needed = 2 * n * (layers + 1);
    if angles.len() != needed {
        return Err(Error::InvalidConfig(format!(
            "ryrz needs {needed} angles, got {}",
            angles.len()
        )));
    }
    let mut c = Circuit::new(n);
    let mut next = 0usize;
    let rotation_block = |c: &mut Circuit, next: &mut usize| -> Result<()> {
        let ry: Vec<GateApp> = (0..n)
            .map(|q| GateApp::new(Gate::ry(angles[*next + q]), vec![q]))
            .collect();
        c.add_layer(ry)?;
        *next += n;
        let rz: Vec<GateApp> = (0..n)
            .map(|q| GateApp::new(Gate::rz(angles[*next + q]), vec![q]))
            .collect();
        c.add_layer(rz)?;
        *next += n;
        Ok(())
    };
    rotation_block(&mut c, &mut next)?;
    for _ in 0..layers {
        for q in 0..n.saturating_sub(1) {
            c.push(Gate::cnot(), &[q, q + 1])?;
        }
        rotation_block(&mut c, &mut next)?;
    }
    Ok(c)
}

fn push_h_layer(c: &mut Circuit, n: usize) -> Result<()> {
    let layer = (0..n).map(|q| GateApp::new(Gate::h(), vec![q])).collect();
    c.add_layer(layer)?;
    Ok(())
}

fn push_x_layer(c: &mut Circuit, qubits: &[usize]) -> Result<()> {
    if qubits.is_empty() {
        return Ok(());
    }
    let layer = qubits
        .iter()
        .map(|&q| GateApp::new(Gate::x(), vec![q]))
        .collect();
    c.add_layer(layer)?;
    Ok(())
}

/// Controlled phase exp(i theta |11><11|) between two qubits, as
/// Rz(theta/2) on both, CNOT, Rz(-theta/2), CNOT (exact up to global phase).
fn push_controlled_phase(c: &mut Circuit, a: usize, b: usize, theta: f64) {
    c.push(Gate::rz(theta / 2.0), &[a]).expect("valid target");
    c.push(Gate::rz(theta / 2.0), &[b]).expect("valid target");
    c.push(Gate::cnot(), &[a, b]).expect("valid target");
    c.push(Gate::rz(-theta / 2.0), &[b]).expect("valid target");
    c.push(Gate::cnot(), &[a, b]).expect("valid target");
}

fn push_swap(c: &mut Circuit, a: usize, b: usize) {
    c.push(Gate::cnot(), &[a, b]).expect("valid target");
    c.push(Gate::cnot(), &[b, a]).expect("valid target");
    c.push(Gate::cnot(), &[a, b]).expect("valid target");
}

/// Phase flip on the all-ones subspace of `qubits` (a multi-controlled Z),
/// ancilla-free via the parity network: the AND of m bits expands into
/// signed parities over every non-empty subset, each carrying a phase
/// rotation of magnitude pi / 2^(m-1). Exact up to global phase; gate count
/// grows with 2^m, which is acceptable at benchmark sizes.
pub fn push_mcz(c: &mut Circuit, qubits: &[usize]) -> Result<()> {
    let m = qubits.len();
    assert!(m >= 1, "mcz needs at least one qubit");
    if m == 1 {
        c.push(Gate::z(), &[qubits[0]])?;
        return Ok(());
    }
    let base = PI / (1u64 << (m - 1)) as f64;
    for subset in 1usize..1 << m {
        let members: Vec<usize> = (0..m)
            .filter(|&i| subset >> i & 1 == 1)
            .map(|i| qubits[i])
            .collect();
        let sign = if members.len() % 2 == 1 { 1.0 } else { -1.0 };
        let target = *members.last().expect("non-empty subset");
        for &q in &members[..members.len() - 1] {
            c.push(Gate::cnot(), &[q, target])?;
        }
        c.push(Gate::rz(sign * base), &[target])?;
        for &q in members[..members.len() - 1].iter().rev() {
            c.push(Gate::cnot(), &[q, target])?;
        }
    }
    Ok(())
}

/// Toffoli via the standard H/T/CNOT network; the T-dagger gates are Rz
/// rotations, so the block equals CCX up to a global phase.
pub fn push_toffoli(c: &mut Circuit, c1: usize, c2: usize, t: usize) -> Result<()> {
    let tdg = || Gate::rz(-PI / 4.0);
    c.push(Gate::h(), &[t])?;
    c.push(Gate::cnot(), &[c2, t])?;
    c.push(tdg(), &[t])?;
    c.push(Gate::cnot(), &[c1, t])?;
    c.push(Gate::t(), &[t])?;
    c.push(Gate::cnot(), &[c2, t])?;
    c.push(tdg(), &[t])?;
    c.push(Gate::cnot(), &[c1, t])?;
    c.push(Gate::t(), &[c2])?;
    c.push(Gate::t(), &[t])?;
    c.push(Gate::h(), &[t])?;
    c.push(Gate::cnot(), &[c1, c2])?;
    c.push(Gate::t(), &[c1])?;
    c.push(Gate::rz(-PI / 4.0), &[c2])?;
    c.push(Gate::cnot(), &[c1, c2])?;
    Ok(())
}
