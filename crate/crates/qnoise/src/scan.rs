//! Scan orchestration: generate benchmark instances, estimate success
//! probabilities or tolerable rates, emit result rows.

use crate::circuits::CircuitSpec;
use crate::error::{Error, Result};
use crate::io::{ScanRow, TolerableRow};
use crate::noise::{LocationPolicy, PauliFaultModel};
use crate::rng::derive_seed;
use crate::tolerance::{
    probe_success, tolerable_error_rate, CriterionKind, SuccessCriterion, ToleranceConfig,
};

/// Criterion selection for scan instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CriterionChoice {
    /// Correct-outcome for single-outcome families (hidden-string and adder
    /// circuits), fidelity for the rest.
    #[default]
    Auto,
    Correct,
    Fidelity,
    TotalVariation,
    HeavyOutput,
    CrossEntropy,
}

impl std::str::FromStr for CriterionChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "correct" => Ok(Self::Correct),
            "fidelity" => Ok(Self::Fidelity),
            "tvd" => Ok(Self::TotalVariation),
            "heavy" => Ok(Self::HeavyOutput),
            "xeb" => Ok(Self::CrossEntropy),
            other => Err(Error::InvalidConfig(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Build the concrete criterion for one instance.
pub fn criterion_for(
    choice: CriterionChoice,
    spec: &CircuitSpec,
    threshold: f64,
) -> Result<SuccessCriterion> {
    let kind = match choice {
        CriterionChoice::Auto => match spec.ideal_target() {
            Some(target) => CriterionKind::CorrectOutcome { target },
            None => CriterionKind::Fidelity,
        },
        CriterionChoice::Correct => {
            let target = spec.ideal_target().ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "family `{}` has no single correct outcome; use another criterion",
                    spec.family()
                ))
            })?;
            CriterionKind::CorrectOutcome { target }
        }
        CriterionChoice::Fidelity => CriterionKind::Fidelity,
        CriterionChoice::TotalVariation => CriterionKind::TotalVariation,
        CriterionChoice::HeavyOutput => CriterionKind::HeavyOutput,
        CriterionChoice::CrossEntropy => CriterionKind::CrossEntropy,
    };
    SuccessCriterion::new(kind, threshold)
}

#[derive(Debug, Clone)]
pub struct ScanRequest {
    pub families: Vec<String>,
    pub n_values: Vec<usize>,
    pub rates: Vec<f64>,
    pub criterion: CriterionChoice,
    pub threshold: f64,
    pub policy: LocationPolicy,
    pub seed: u64,
    pub tolerance: ToleranceConfig,
}

/// Derive the instance list of a request (deterministic in the seed).
pub fn instances(request: &ScanRequest) -> Vec<CircuitSpec> {
    let mut specs = Vec::new();
    for family in &request.families {
        for &n in &request.n_values {
            if let Some(spec) = CircuitSpec::derive(family, n, request.seed) {
                specs.push(spec);
            }
        }
    }
    specs
}

/// Success-probability scan: one row per (instance, rate).
pub fn run_success_scan(request: &ScanRequest) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::new();
    for (idx, spec) in instances(request).iter().enumerate() {
        let circuit = spec.build()?;
        let criterion = criterion_for(request.criterion, spec, request.threshold)?;
        let initial = "0".repeat(circuit.n_qubits());
        for (ridx, &p) in request.rates.iter().enumerate() {
            let model = PauliFaultModel::new(p, [1.0 / 3.0; 3], request.policy)?;
            let estimate = probe_success(
                &circuit,
                &model,
                &criterion,
                &initial,
                &request.tolerance,
                derive_seed(request.seed, (idx as u64) << 16 | ridx as u64),
            )?;
            rows.push(ScanRow {
                circuit_id: spec.id(),
                family: spec.family().to_string(),
                n: circuit.n_qubits(),
                d: circuit.depth(),
                area: circuit.area(),
                p,
                success_prob: estimate.value,
                ci_low: estimate.ci_low,
                ci_high: estimate.ci_high,
                method: estimate.method.label().to_string(),
                criterion: criterion.kind.label().to_string(),
                threshold: request.threshold,
            });
        }
    }
    Ok(rows)
}

/// Tolerable-rate scan: one row per instance with the area bound alongside.
pub fn run_tolerable_scan(request: &ScanRequest) -> Result<Vec<TolerableRow>> {
    let mut rows = Vec::new();
    for (idx, spec) in instances(request).iter().enumerate() {
        let circuit = spec.build()?;
        let criterion = criterion_for(request.criterion, spec, request.threshold)?;
        let initial = "0".repeat(circuit.n_qubits());
        let model = PauliFaultModel::new(0.0, [1.0 / 3.0; 3], request.policy)?;
        let result = tolerable_error_rate(
            &circuit,
            &model,
            &criterion,
            &initial,
            &request.tolerance,
            derive_seed(request.seed, 0xc0de_0000 | idx as u64),
        )?;
        rows.push(TolerableRow {
            circuit_id: spec.id(),
            family: spec.family().to_string(),
            n: result.n_qubits,
            d: result.depth,
            area: result.area,
            p_star: result.p_star,
            bound: result.bound_inverse_area,
        });
    }
    Ok(rows)
}
