//! Layered circuits and their execution.

use crate::error::{Error, Result};
use crate::noise::{FaultSet, Pauli};
use crate::sim::gate::Gate;
use crate::sim::state::StateVector;

/// One gate applied to an ordered list of target qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateApp {
    pub gate: Gate,
    pub targets: Vec<usize>,
}

impl GateApp {
    pub fn new(gate: Gate, targets: Vec<usize>) -> Self {
        Self { gate, targets }
    }
}

/// A circuit as an ordered list of layers; gates within a layer act on
/// disjoint qubits. Depth is the number of layers as given, and
/// area = n_qubits * depth.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    layers: Vec<Vec<GateApp>>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "circuit needs at least one qubit");
        Self {
            n_qubits,
            layers: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn area(&self) -> usize {
        self.n_qubits * self.depth()
    }

    pub fn layers(&self) -> &[Vec<GateApp>] {
        &self.layers
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    /// Iterate all gate applications in execution order.
    pub fn gates(&self) -> impl Iterator<Item = &GateApp> {
        self.layers.iter().flatten()
    }

    /// Append a layer, checking target ranges and in-layer disjointness.
    pub fn add_layer(&mut self, apps: Vec<GateApp>) -> Result<&mut Self> {
        let mut seen = vec![false; self.n_qubits];
        for app in &apps {
            if app.targets.len() != app.gate.arity() {
                return Err(Error::ArityMismatch {
                    name: app.gate.name().to_string(),
                    arity: app.gate.arity(),
                    got: app.targets.len(),
                });
            }
            for &q in &app.targets {
                if q >= self.n_qubits {
                    return Err(Error::TargetOutOfRange {
                        qubit: q,
                        n_qubits: self.n_qubits,
                    });
                }
                if seen[q] {
                    return Err(Error::DuplicateTarget(q));
                }
                seen[q] = true;
            }
        }
        self.layers.push(apps);
        Ok(self)
    }

    /// Append a single gate as its own layer.
    pub fn push(&mut self, gate: Gate, targets: &[usize]) -> Result<&mut Self> {
        self.add_layer(vec![GateApp::new(gate, targets.to_vec())])?;
        Ok(self)
    }

    /// Concatenate another circuit's layers after this one.
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch(other.n_qubits, self.n_qubits));
        }
        self.layers.extend(other.layers.iter().cloned());
        Ok(self)
    }

    /// Run the circuit from a basis-state input, optionally injecting Pauli
    /// faults after their assigned layers. Norm is re-checked (never
    /// re-imposed) after every layer.
    pub fn run(&self, initial: &str, faults: Option<&FaultSet>) -> Result<StateVector> {
        let state = StateVector::from_bits(initial)?;
        if state.n_qubits() != self.n_qubits {
            return Err(Error::BitStringLength {
                got: state.n_qubits(),
                expected: self.n_qubits,
            });
        }
        self.run_from(state, faults)
    }

    /// As `run`, starting from an arbitrary prepared state.
    pub fn run_from(&self, mut state: StateVector, faults: Option<&FaultSet>) -> Result<StateVector> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch(state.n_qubits(), self.n_qubits));
        }
        if let Some(fs) = faults {
            fs.validate(self)?;
        }
        for (layer_idx, layer) in self.layers.iter().enumerate() {
            for app in layer {
                state.apply_gate_mut(&app.gate, &app.targets)?;
            }
            if let Some(fs) = faults {
                for (loc, pauli) in fs.iter() {
                    if loc.layer == layer_idx {
                        let gate = match pauli {
                            Pauli::X => Gate::x(),
                            Pauli::Y => Gate::y(),
                            Pauli::Z => Gate::z(),
                        };
                        state.apply_gate_mut(&gate, &[loc.qubit])?;
                    }
                }
            }
            state.check_norm()?;
        }
        Ok(state)
    }
}
