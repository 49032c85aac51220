//! Pauli fault models over circuit space-time locations.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Circuit;

/// Maximum per-location error rate; beyond this the model is past the
/// completely depolarizing point and inputs are rejected.
pub const MAX_FAULT_RATE: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
}

/// A (qubit, layer) slot where a fault may be injected. The fault acts after
/// the gates of `layer` have been applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpaceTimeLocation {
    pub layer: usize,
    pub qubit: usize,
}

/// Which slots of a circuit host error locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LocationPolicy {
    /// Every qubit after every layer: exactly n*d locations, consistent with
    /// the 1/(n*d) area bound.
    #[default]
    AllQubitsEveryLayer,
    /// One location per (gate, target qubit) pair; idle qubits are skipped.
    ActiveQubitsOnly,
}

/// Uniform per-location Pauli error model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliFaultModel {
    rate: f64,
    weights: [f64; 3],
    policy: LocationPolicy,
}

impl PauliFaultModel {
    pub fn new(rate: f64, weights: [f64; 3], policy: LocationPolicy) -> Result<Self> {
        if !(0.0..=MAX_FAULT_RATE).contains(&rate) {
            return Err(Error::RateOutOfRange(rate, 0.0, MAX_FAULT_RATE));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::BadPauliWeights(sum));
        }
        Ok(Self {
            rate,
            weights,
            policy,
        })
    }

    /// X, Y and Z each with probability rate/3.
    pub fn depolarizing(rate: f64) -> Result<Self> {
        Self::new(rate, [1.0 / 3.0; 3], LocationPolicy::default())
    }

    /// Z faults only.
    pub fn dephasing(rate: f64) -> Result<Self> {
        Self::new(rate, [0.0, 0.0, 1.0], LocationPolicy::default())
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn weights(&self) -> [f64; 3] {
        self.weights
    }

    pub fn policy(&self) -> LocationPolicy {
        self.policy
    }

    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        Self::new(rate, self.weights, self.policy)
    }

    pub fn with_policy(&self, policy: LocationPolicy) -> Self {
        Self {
            policy,
            ..self.clone()
        }
    }

    /// Draw a Pauli according to the per-type weights.
    pub fn sample_pauli<R: Rng>(&self, rng: &mut R) -> Pauli {
        let u: f64 = rng.random();
        if u < self.weights[0] {
            Pauli::X
        } else if u < self.weights[0] + self.weights[1] {
            Pauli::Y
        } else {
            Pauli::Z
        }
    }
}

/// A concrete assignment of Pauli faults to distinct locations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FaultSet {
    faults: Vec<(SpaceTimeLocation, Pauli)>,
}

impl FaultSet {
    /// Build from a list; locations must be distinct. The list is kept
    /// sorted by (layer, qubit) as canonical form.
    pub fn new(mut faults: Vec<(SpaceTimeLocation, Pauli)>) -> Result<Self> {
        faults.sort_by_key(|(loc, _)| *loc);
        for w in faults.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateFaultLocation {
                    qubit: w[0].0.qubit,
                    layer: w[0].0.layer,
                });
            }
        }
        Ok(Self { faults })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }

    pub fn len(&self) -> usize {
        self.faults.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(SpaceTimeLocation, Pauli)> {
        self.faults.iter()
    }

    /// Check all locations lie inside the circuit.
    pub fn validate(&self, circuit: &Circuit) -> Result<()> {
        for (loc, _) in &self.faults {
            if loc.qubit >= circuit.n_qubits() || loc.layer >= circuit.depth() {
                return Err(Error::BadFaultLocation {
                    qubit: loc.qubit,
                    layer: loc.layer,
                });
            }
        }
        Ok(())
    }
}

/// All error locations of `circuit` under the model's policy.
pub fn enumerate_locations(circuit: &Circuit, model: &PauliFaultModel) -> Vec<SpaceTimeLocation> {
    match model.policy() {
        LocationPolicy::AllQubitsEveryLayer => {
            let mut locs = Vec::with_capacity(circuit.area());
            for layer in 0..circuit.depth() {
                for qubit in 0..circuit.n_qubits() {
                    locs.push(SpaceTimeLocation { layer, qubit });
                }
            }
            locs
        }
        LocationPolicy::ActiveQubitsOnly => {
            let mut locs = Vec::new();
            for (layer, apps) in circuit.layers().iter().enumerate() {
                for app in apps {
                    for &qubit in &app.targets {
                        locs.push(SpaceTimeLocation { layer, qubit });
                    }
                }
            }
            locs
        }
    }
}

/// Sample a fault set: each location is independently faulted with
/// probability `rate`, with the Pauli type drawn from the weights.
///
/// Implemented as a binomial draw of the fault count followed by a uniform
/// choice of which locations carry a fault; the joint distribution equals
/// independent per-location sampling.
pub fn sample_fault_set<R: Rng>(
    locations: &[SpaceTimeLocation],
    model: &PauliFaultModel,
    rng: &mut R,
) -> FaultSet {
    let l = locations.len();
    let p = model.rate();
    if l == 0 || p == 0.0 {
        return FaultSet::empty();
    }
    let count = Binomial::new(l as u64, p)
        .expect("rate validated at construction")
        .sample(rng) as usize;
    if count == 0 {
        return FaultSet::empty();
    }
    // Floyd's algorithm: `count` distinct indices out of 0..l.
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    for i in (l - count)..l {
        let t = rng.random_range(0..=i);
        if chosen.contains(&t) {
            chosen.push(i);
        } else {
            chosen.push(t);
        }
    }
    let faults = chosen
        .into_iter()
        .map(|i| (locations[i], model.sample_pauli(rng)))
        .collect();
    FaultSet::new(faults).expect("Floyd's algorithm yields distinct locations")
}
