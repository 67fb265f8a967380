use nalgebra::DMatrix;
use num_complex::Complex64;

use super::tline::tl_susceptance;
use crate::error::{Error, Result};
use crate::netlist::{stamp_branch, ElementKind, Netlist, Node};

/// Relative pivot size below which the nodal matrix counts as singular.
const PIVOT_GUARD: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
struct LineStamp {
    a: Option<usize>,
    b: Option<usize>,
    z0: f64,
    length: f64,
    eps_eff: f64,
}

/// Nodal-analysis impedance source. Junction inductances are left out so
/// the ports see only the external linear network; C_J stays in.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalCircuit {
    capacitance: DMatrix<f64>,
    inverse_inductance: DMatrix<f64>,
    lines: Vec<LineStamp>,
    incidence: DMatrix<f64>,
}

impl NodalCircuit {
    pub fn new(netlist: &Netlist) -> Result<Self> {
        netlist.require_junction()?;
        let n = netlist.node_count();
        let mut capacitance = DMatrix::zeros(n, n);
        let mut inverse_inductance = DMatrix::zeros(n, n);
        let mut lines = Vec::new();
        for e in &netlist.elements {
            let (a, b) = (e.terminals.0.index(), e.terminals.1.index());
            match e.kind {
                ElementKind::Capacitor { capacitance: c } => stamp_branch(&mut capacitance, a, b, c),
                ElementKind::Inductor { inductance } => {
                    stamp_branch(&mut inverse_inductance, a, b, 1.0 / inductance)
                }
                ElementKind::JosephsonJunction { capacitance: c, .. } => {
                    if c > 0.0 {
                        stamp_branch(&mut capacitance, a, b, c);
                    }
                }
                ElementKind::TransmissionLine { z0, length, eps_eff } => lines.push(LineStamp {
                    a,
                    b,
                    z0,
                    length,
                    eps_eff,
                }),
            }
        }
        let ports = &netlist.qubit_ports;
        let mut incidence = DMatrix::zeros(n, ports.len());
        for (k, p) in ports.iter().enumerate() {
            if let Node::Named(i) = p.terminals.0 {
                incidence[(i, k)] += 1.0;
            }
            if let Node::Named(i) = p.terminals.1 {
                incidence[(i, k)] -= 1.0;
            }
        }
        Ok(Self {
            capacitance,
            inverse_inductance,
            lines,
            incidence,
        })
    }

    pub fn port_count(&self) -> usize {
        self.incidence.ncols()
    }

    /// Real part S of the nodal admittance Y = j·S.
    pub fn susceptance(&self, omega: f64) -> Result<DMatrix<f64>> {
        Ok(self.susceptance_scaled(omega)?.0)
    }

    /// S together with the largest magnitude of any single stamp, used to
    /// judge how close S is to singular.
    fn susceptance_scaled(&self, omega: f64) -> Result<(DMatrix<f64>, f64)> {
        let mut s = &self.capacitance * omega - &self.inverse_inductance / omega;
        let mut scale = (self.capacitance.amax() * omega).max(self.inverse_inductance.amax() / omega);
        for line in &self.lines {
            let (s11, s12) = tl_susceptance(line.z0, line.length, line.eps_eff, omega)?;
            scale = scale.max(s11.abs()).max(s12.abs());
            if let Some(i) = line.a {
                s[(i, i)] += s11;
            }
            if let Some(j) = line.b {
                s[(j, j)] += s11;
            }
            if let (Some(i), Some(j)) = (line.a, line.b) {
                s[(i, j)] += s12;
                s[(j, i)] += s12;
            }
        }
        Ok((s, scale))
    }

    pub fn impedance(&self, omega: f64) -> Result<DMatrix<Complex64>> {
        let (s, scale) = self.susceptance_scaled(omega)?;
        let lu = s.lu();
        let smallest = lu.u().diagonal().amin();
        if !(smallest > PIVOT_GUARD * scale) {
            return Err(Error::PoleProximity { omega });
        }
        let x = lu
            .solve(&self.incidence)
            .ok_or(Error::PoleProximity { omega })?;
        let reactance = self.incidence.transpose() * x;
        let p = reactance.nrows();
        Ok(DMatrix::from_fn(p, p, |i, j| {
            let v = 0.5 * (reactance[(i, j)] + reactance[(j, i)]);
            Complex64::new(0.0, -v)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;
    use crate::units::ghz;

    #[test]
    fn shunt_capacitor_port() {
        let n = parse_netlist("C c1 n1 0 65\nJJ q1 n1 0 LJ=15").unwrap();
        let z = NodalCircuit::new(&n).unwrap().impedance(ghz(5.0)).unwrap();
        assert!(z[(0, 0)].re.abs() < 1e-12);
        assert!((z[(0, 0)].im + 489.7).abs() < 0.1, "{}", z[(0, 0)]);
    }

    #[test]
    fn bus_pole_is_rejected() {
        // parallel tank across the port: Z has a pole at its resonance
        let w = ghz(6.0);
        let l_nh = 1.0 / (w * w * 400e-15) * 1e9;
        let text = format!("C c1 n1 0 400\nL l1 n1 0 {l_nh}\nJJ q1 n1 0 LJ=15");
        let n = parse_netlist(&text).unwrap();
        let err = NodalCircuit::new(&n).unwrap().impedance(w).unwrap_err();
        assert!(matches!(err, Error::PoleProximity { .. }));
    }
}
