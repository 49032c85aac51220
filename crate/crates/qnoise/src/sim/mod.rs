//! Exact pure-state simulation: gates, layered circuits, measurement.

mod circuit;
mod gate;
mod state;

pub use circuit::{Circuit, GateApp};
pub use gate::{tensor_product, unitarity_deviation, Gate};
pub use state::{OutcomeDistribution, StateVector};
