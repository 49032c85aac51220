//! Circuit file format and result-row schemas.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Circuit, Gate, GateApp};

pub const CIRCUIT_FILE_VERSION: u32 = 1;

/// Versioned on-disk circuit description: layers of named gate applications,
/// angles in radians. Gate names: h, x, y, z, s, sdg, t, rx, ry, rz, cx.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub version: u32,
    pub n_qubits: usize,
    pub layers: Vec<Vec<GateEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateEntry {
    pub gate: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

impl CircuitFile {
    pub fn from_circuit(circuit: &Circuit) -> Self {
        Self {
            version: CIRCUIT_FILE_VERSION,
            n_qubits: circuit.n_qubits(),
            layers: circuit
                .layers()
                .iter()
                .map(|layer| {
                    layer
                        .iter()
                        .map(|app| GateEntry {
                            gate: app.gate.name().to_string(),
                            qubits: app.targets.clone(),
                            params: app.gate.params().to_vec(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Validate and build the executable circuit.
    pub fn to_circuit(&self) -> Result<Circuit> {
        if self.version != CIRCUIT_FILE_VERSION {
            return Err(Error::Validation(format!(
                "unsupported circuit file version {}",
                self.version
            )));
        }
        if self.n_qubits == 0 {
            return Err(Error::Validation("circuit needs at least one qubit".into()));
        }
        let mut circuit = Circuit::new(self.n_qubits);
        for (idx, layer) in self.layers.iter().enumerate() {
            let apps: Result<Vec<GateApp>> = layer
                .iter()
                .map(|entry| {
                    let gate = Gate::from_name(&entry.gate, &entry.params)?;
                    Ok(GateApp::new(gate, entry.qubits.clone()))
                })
                .collect();
            let apps = apps.map_err(|e| Error::Validation(format!("layer {idx}: {e}")))?;
            circuit
                .add_layer(apps)
                .map_err(|e| Error::Validation(format!("layer {idx}: {e}")))?;
        }
        Ok(circuit)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Load and validate a circuit file.
pub fn load_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path)?;
    CircuitFile::from_json(&text)?.to_circuit()
}

/// Write a circuit in canonical form.
pub fn save_circuit(circuit: &Circuit, path: &Path) -> Result<()> {
    std::fs::write(path, CircuitFile::from_circuit(circuit).to_json())?;
    Ok(())
}

pub const SCAN_CSV_HEADER: &str =
    "circuit_id,family,n,d,area,p,success_prob,ci_low,ci_high,method,criterion,threshold";

/// One success-probability scan result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub circuit_id: String,
    pub family: String,
    pub n: usize,
    pub d: usize,
    pub area: usize,
    pub p: f64,
    pub success_prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: String,
    pub criterion: String,
    pub threshold: f64,
}

impl ScanRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.circuit_id,
            self.family,
            self.n,
            self.d,
            self.area,
            self.p,
            self.success_prob,
            self.ci_low,
            self.ci_high,
            self.method,
            self.criterion,
            self.threshold
        )
    }
}

pub const TOLERABLE_CSV_HEADER: &str = "circuit_id,family,n,d,area,p_star,bound";

/// One tolerable-rate scan result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TolerableRow {
    pub circuit_id: String,
    pub family: String,
    pub n: usize,
    pub d: usize,
    pub area: usize,
    pub p_star: f64,
    pub bound: f64,
}

impl TolerableRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.circuit_id, self.family, self.n, self.d, self.area, self.p_star, self.bound
        )
    }
}

pub fn scan_rows_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(SCAN_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn tolerable_rows_to_csv(rows: &[TolerableRow]) -> String {
    let mut out = String::from(TOLERABLE_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}
