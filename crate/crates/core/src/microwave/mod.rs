//! Impedance matrices between qubit ports.

pub mod nodal;
pub mod rational;
pub mod tabulated;
pub mod tline;
pub mod touchstone;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::netlist::Netlist;

pub use nodal::NodalCircuit;
pub use rational::RationalZ12;
pub use tabulated::{read_z_csv, write_z_csv, Interpolation, TabulatedZ};
pub use tline::tl_two_port_admittance;
pub use touchstone::read_touchstone;

/// Default relative step of the finite-difference derivative.
pub const DERIVATIVE_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum ImpedanceProvider {
    NodalCircuit(NodalCircuit),
    RationalZ12(RationalZ12),
    Tabulated(TabulatedZ),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZSample {
    pub omega: f64,
    pub z: DMatrix<Complex64>,
}

impl ZSample {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.z[(i, j)]
    }
}

impl ImpedanceProvider {
    pub fn from_netlist(netlist: &Netlist) -> Result<Self> {
        Ok(Self::NodalCircuit(NodalCircuit::new(netlist)?))
    }

    pub fn port_count(&self) -> usize {
        match self {
            Self::NodalCircuit(n) => n.port_count(),
            Self::RationalZ12(_) => 2,
            Self::Tabulated(t) => t.port_count(),
        }
    }

    /// Frequency range over which the provider can be evaluated.
    pub fn band(&self) -> (f64, f64) {
        match self {
            Self::Tabulated(t) => t.band(),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn is_lossless(&self) -> bool {
        !matches!(self, Self::Tabulated(_))
    }

    pub fn impedance_at(&self, omega: f64) -> Result<ZSample> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
        }
        let z = match self {
            Self::NodalCircuit(n) => n.impedance(omega)?,
            Self::RationalZ12(r) => r.impedance(omega)?,
            Self::Tabulated(t) => t.impedance(omega)?,
        };
        Ok(ZSample { omega, z })
    }

    /// dZ_ij/dω in Ω·s.
    pub fn impedance_derivative(&self, omega: f64, entry: (usize, usize)) -> Result<Complex64> {
        self.impedance_derivative_with(omega, entry, DERIVATIVE_STEP)
    }

    /// Analytic for the rational model; otherwise a central difference with
    /// relative step `h_rel` and one Richardson refinement.
    pub fn impedance_derivative_with(
        &self,
        omega: f64,
        entry: (usize, usize),
        h_rel: f64,
    ) -> Result<Complex64> {
        if let Self::RationalZ12(r) = self {
            return r.derivative(omega, entry.0, entry.1);
        }
        self.finite_difference(omega, entry, h_rel)
    }

    pub fn finite_difference(&self, omega: f64, entry: (usize, usize), h_rel: f64) -> Result<Complex64> {
        let (i, j) = entry;
        let central = |h: f64| -> Result<Complex64> {
            let up = self.impedance_at(omega * (1.0 + h))?.z[(i, j)];
            let down = self.impedance_at(omega * (1.0 - h))?.z[(i, j)];
            Ok((up - down) / (2.0 * omega * h))
        };
        let coarse = central(h_rel)?;
        let fine = central(0.5 * h_rel)?;
        Ok((fine * 4.0 - coarse) / 3.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;
    use crate::units::ghz;

    #[test]
    fn capacitor_derivative() {
        let n = parse_netlist("C c1 n1 0 65\nJJ q1 n1 0 LJ=15").unwrap();
        let p = ImpedanceProvider::from_netlist(&n).unwrap();
        let d = p.impedance_derivative(ghz(5.0), (0, 0)).unwrap();
        let w = ghz(5.0);
        let exact = 1.0 / (w * w * 65e-15);
        assert!((d.im - exact).abs() / exact < 1e-8);
        assert!((d.im - 15.59e-9).abs() < 0.01e-9, "{}", d.im);
    }
}
