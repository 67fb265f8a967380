//! Reference circuits: the single-mode bus, the two-arm cancellation
//! coupler and the synthetic rational trans-impedance.

use std::f64::consts::PI;

use crate::error::Result;
use crate::microwave::RationalZ12;
use crate::netlist::{parse_netlist, Netlist};
use crate::units::{ghz, FEMTO};

/// Two grounded Transmons coupled through a lumped LC bus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusDevice {
    /// Qubit shunt capacitance (fF).
    pub c_q: f64,
    /// Qubit-bus coupling capacitance (fF).
    pub c_c: f64,
    /// Bus capacitance (fF).
    pub c_b: f64,
    /// Junction inductances (nH).
    pub l_j: [f64; 2],
}

impl Default for BusDevice {
    fn default() -> Self {
        Self {
            c_q: 60.0,
            c_c: 5.0,
            c_b: 400.0,
            l_j: [14.0, 13.0],
        }
    }
}

impl BusDevice {
    /// Bus inductance (nH) giving bare resonance `f_b_ghz` with C_b.
    pub fn bus_inductance(&self, f_b_ghz: f64) -> f64 {
        let w = ghz(f_b_ghz);
        1.0 / (w * w * self.c_b * FEMTO) * 1e9
    }

    pub fn netlist(&self, f_b_ghz: f64) -> Result<Netlist> {
        let lb = self.bus_inductance(f_b_ghz);
        let mut text = format!(
            "C cq1 n1 0 {cq}\nC cq2 n2 0 {cq}\nC cc1 n1 bus {cc}\nC cc2 n2 bus {cc}\nC cb bus 0 {cb}\nL lb bus 0 {lb}\n",
            cq = self.c_q,
            cc = self.c_c,
            cb = self.c_b,
        );
        text.push_str(&format!("JJ q1 n1 0 LJ={}\nJJ q2 n2 0 LJ={}\n", self.l_j[0], self.l_j[1]));
        parse_netlist(&text)
    }
}

/// Effective permittivity that places the coupler's quarter-wave mode
/// near 6.3 GHz.
pub const COUPLER_EPS_EFF: f64 = 6.3;

/// Two floating Transmons joined by a direct half-wave arm and a second
/// arm whose midpoint is shorted through a quarter-wave stub.
pub fn coupler_netlist(eps_eff: f64, l_j: [f64; 2]) -> Result<Netlist> {
    let text = format!(
        "\
# qubit 1 pads
C c1g_a a1 0 46
C c1g_b a2 0 46
C c12_a a1 a2 36
# qubit 2 pads
C c2g_a b1 0 46
C c2g_b b2 0 46
C c12_b b1 b2 36
# direct arm
C cc1_a a1 t1 8
TL l1 t1 t2 Z0=50 LEN=1.0 EEFF={e}
C cc1_b t2 b1 8
# stubbed arm
C cc2_a a1 u1 12
TL l2_a u1 m Z0=50 LEN=0.5 EEFF={e}
TL l2_b m u2 Z0=50 LEN=0.5 EEFF={e}
C cc2_b u2 b1 12
TL l3 m 0 Z0=50 LEN=3.75 EEFF={e}
JJ q1 a1 a2 LJ={l1}
JJ q2 b1 b2 LJ={l2}
",
        e = eps_eff,
        l1 = l_j[0],
        l2 = l_j[1],
    );
    parse_netlist(&text)
}

/// Trans-impedance with poles at DC, 4.0 and 6.25 GHz, zeros at 4.5 and
/// 5.5 GHz, A = −7.97e10 and 65 fF shunts.
pub fn rational_coupler() -> RationalZ12 {
    RationalZ12::new(
        -7.97e10,
        vec![ghz(4.5), ghz(5.5)],
        vec![ghz(4.0), ghz(6.25)],
        [65.0 * FEMTO, 65.0 * FEMTO],
    )
    .expect("constants are valid")
}

/// Bare LC frequency in GHz.
pub fn lc_frequency_ghz(l: f64, c: f64) -> f64 {
    1.0 / (2.0 * PI * (l * c).sqrt()) / 1e9
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{capacitive_reduction, ElementKind, ReductionOptions};

    #[test]
    fn bus_inductance_sets_frequency() {
        let d = BusDevice::default();
        let lb = d.bus_inductance(7.0) * 1e-9;
        assert!((lc_frequency_ghz(lb, 400e-15) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn coupler_structure() {
        let n = coupler_netlist(COUPLER_EPS_EFF, [12.0, 12.0]).unwrap();
        assert_eq!(n.qubit_ports.len(), 2);
        let lines = n
            .elements
            .iter()
            .filter(|e| matches!(e.kind, ElementKind::TransmissionLine { .. }))
            .count();
        assert_eq!(lines, 4);
        let c = capacitive_reduction(&n, &ReductionOptions::default()).unwrap();
        // 36 + 46/2 per floating qubit; series caps to floating arms drop out
        assert!((c[(0, 0)] - 59e-15).abs() < 1e-24);
        assert!(c[(0, 1)].abs() < 1e-24);
    }
}
