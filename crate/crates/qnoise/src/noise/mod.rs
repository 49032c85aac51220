//! Error modeling: Pauli fault models, density matrices, Kraus channels and
//! superoperators.

mod channel;
mod fault;

pub use channel::{
    average_error_rate, channel_to_ptm, error_operator, haar_average_fidelity,
    pauli_string_matrix, DensityMatrix, QuantumChannel, MAX_DENSITY_QUBITS,
};
pub use fault::{
    enumerate_locations, sample_fault_set, FaultSet, LocationPolicy, Pauli, PauliFaultModel,
    SpaceTimeLocation, MAX_FAULT_RATE,
};

use crate::error::Result;
use crate::sim::Circuit;

/// Exact density-matrix evolution of a circuit under a Pauli fault model:
/// after each layer, each error location of that layer is hit by the
/// single-qubit Pauli channel of the model. This is the mixed-state oracle
/// that trajectory averages must reproduce.
pub fn evolve_density(
    circuit: &Circuit,
    initial: &str,
    model: &PauliFaultModel,
) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::from_bits(initial)?;
    let location_channel = QuantumChannel::pauli_channel(model.rate(), model.weights())?;
    let locations = enumerate_locations(circuit, model);
    for (layer_idx, layer) in circuit.layers().iter().enumerate() {
        for app in layer {
            let ch = QuantumChannel::from_gate(&app.gate)?;
            rho = apply_gate_channel(&rho, &ch, &app.targets)?;
        }
        for loc in locations.iter().filter(|l| l.layer == layer_idx) {
            rho = location_channel.apply_at(&rho, loc.qubit)?;
        }
    }
    Ok(rho)
}

/// Apply a small unitary channel to specific qubits of a larger density
/// matrix (dense embedding).
fn apply_gate_channel(
    rho: &DensityMatrix,
    channel: &QuantumChannel,
    targets: &[usize],
) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    let mut out = nalgebra::DMatrix::zeros(1 << n, 1 << n);
    for k in channel.kraus_operators() {
        let full = channel::embed_matrix(n, k, targets);
        out += &full * rho.matrix() * full.adjoint();
    }
    DensityMatrix::new(n, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::pairwise_mean;
    use crate::rng::{task_rng, Stage};
    use crate::sim::{Gate, GateApp};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn test_circuit() -> Circuit {
        let mut c = Circuit::new(2);
        c.add_layer(vec![
            GateApp::new(Gate::h(), vec![0]),
            GateApp::new(Gate::t(), vec![1]),
        ])
        .unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        c.push(Gate::ry(0.7), &[1]).unwrap();
        c
    }

    #[test]
    fn trajectory_average_matches_channel_evolution() {
        let circuit = test_circuit();
        let model = PauliFaultModel::depolarizing(0.05).unwrap();
        let oracle = evolve_density(&circuit, "00", &model).unwrap();

        let locations = enumerate_locations(&circuit, &model);
        let trials = 100_000usize;
        let dim = 4usize;
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        for t in 0..trials {
            let mut rng = task_rng(2024, Stage::McTrial, t as u64);
            let faults = sample_fault_set(&locations, &model, &mut rng);
            let state = circuit.run("00", Some(&faults)).unwrap();
            let amps = state.amplitudes();
            for r in 0..dim {
                for c in 0..dim {
                    acc[(r, c)] += amps[r] * amps[c].conj();
                }
            }
        }
        acc /= Complex64::new(trials as f64, 0.0);
        let max_dev = (acc - oracle.matrix())
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(max_dev < 5e-3, "max entrywise deviation {max_dev}");
    }

    #[test]
    fn average_rate_formula_over_grid() {
        // r(depolarizing(n, p)) = (1 - 2^-n) p, closed form and Monte Carlo.
        let mut mc_devs = Vec::new();
        for n in 1..=2usize {
            for p in [0.001, 0.01, 0.1] {
                let ch = QuantumChannel::depolarizing(n, p).unwrap();
                let expect = (1.0 - 0.5f64.powi(n as i32)) * p;
                let closed = average_error_rate(&ch).unwrap();
                assert!((closed - expect).abs() < 1e-10, "n={n} p={p}");
                let mc = 1.0 - haar_average_fidelity(&ch, 10_000, 7 + n as u64);
                mc_devs.push((mc - expect).abs());
            }
        }
        assert!(pairwise_mean(&mc_devs) < 2e-3);
        assert!(mc_devs.iter().all(|&d| d < 2e-3));
    }
}
