//! Noise-aware quantum circuit analysis.
//!
//! Simulates layered circuits exactly, injects Pauli faults exhaustively or
//! by Monte Carlo to find tolerable error rates, and characterizes simulated
//! noisy gate sets via randomized benchmarking and linear gate set
//! tomography.

pub mod circuits;
pub mod error;
pub mod gst;
pub mod io;
pub mod math;
pub mod noise;
pub mod rb;
pub mod rng;
pub mod scan;
pub mod sim;
pub mod tolerance;

pub use error::{Error, Result};
