//! Exchange couplings and ZZ-interaction rates of Transmon qubits computed
//! directly from the impedance matrix seen at the junction ports, plus an
//! exact-diagonalization oracle of the same circuits.

pub mod calibrate;
pub mod devices;
pub mod dispersive;
pub mod error;
pub mod microwave;
pub mod netlist;
pub mod oracle;
pub mod roots;
pub mod units;

pub use error::{Error, Result};
