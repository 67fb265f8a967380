use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-port model with a prescribed trans-impedance
///
/// Z12(ω) = A·Π(ωz² − ω²) / (ω·Π(ωp² − ω²))   (times −j on the jω axis)
///
/// and pure shunt capacitors on the diagonal. The 1/ω factor is the pole
/// at DC; `poles` lists only the finite ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalZ12 {
    /// A in Ω·rad/s.
    pub scale: f64,
    /// rad/s
    pub zeros: Vec<f64>,
    /// rad/s, nonzero
    pub poles: Vec<f64>,
    /// F
    pub shunt: [f64; 2],
}

/// Relative distance to a pole below which evaluation is refused.
const POLE_GUARD: f64 = 1e-12;

impl RationalZ12 {
    pub fn new(scale: f64, zeros: Vec<f64>, poles: Vec<f64>, shunt: [f64; 2]) -> Result<Self> {
        if zeros.iter().chain(&poles).any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidArgument(
                "rational model zeros and finite poles must be positive".into(),
            ));
        }
        if shunt.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::InvalidArgument("shunt capacitances must be positive".into()));
        }
        Ok(Self {
            scale,
            zeros,
            poles,
            shunt,
        })
    }

    fn check(&self, omega: f64) -> Result<()> {
        let w2 = omega * omega;
        if !(omega > 0.0) || self.poles.iter().any(|p| (p * p - w2).abs() < POLE_GUARD * w2) {
            return Err(Error::PoleProximity { omega });
        }
        Ok(())
    }

    /// X12 with Z12 = −j·X12.
    fn trans_reactance(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        let num: f64 = self.zeros.iter().map(|z| z * z - w2).product();
        let den: f64 = self.poles.iter().map(|p| p * p - w2).product();
        self.scale * num / (omega * den)
    }

    fn trans_reactance_derivative(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        let n: f64 = self.zeros.iter().map(|z| z * z - w2).product();
        let d: f64 = self.poles.iter().map(|p| p * p - w2).product();
        // d/dω Π(a_k² − ω²) = Σ_k (−2ω)·Π_{l≠k}(a_l² − ω²)
        let dprod = |roots: &[f64]| -> f64 {
            (0..roots.len())
                .map(|k| {
                    -2.0 * omega
                        * roots
                            .iter()
                            .enumerate()
                            .filter(|(l, _)| *l != k)
                            .map(|(_, a)| a * a - w2)
                            .product::<f64>()
                })
                .sum()
        };
        let (dn, dd) = (dprod(&self.zeros), dprod(&self.poles));
        let den = omega * d;
        let dden = d + omega * dd;
        self.scale * (dn * den - n * dden) / (den * den)
    }

    pub fn impedance(&self, omega: f64) -> Result<DMatrix<Complex64>> {
        self.check(omega)?;
        let x12 = self.trans_reactance(omega);
        let z = |c: f64| Complex64::new(0.0, -1.0 / (omega * c));
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[z(self.shunt[0]), Complex64::new(0.0, -x12), Complex64::new(0.0, -x12), z(self.shunt[1])],
        ))
    }

    pub fn derivative(&self, omega: f64, i: usize, j: usize) -> Result<Complex64> {
        self.check(omega)?;
        if i > 1 || j > 1 {
            return Err(Error::InvalidArgument(format!("port index out of range: ({i}, {j})")));
        }
        Ok(if i == j {
            Complex64::new(0.0, 1.0 / (omega * omega * self.shunt[i]))
        } else {
            Complex64::new(0.0, -self.trans_reactance_derivative(omega))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ghz;

    fn reference_model() -> RationalZ12 {
        RationalZ12::new(
            -7.97e10,
            vec![ghz(4.5), ghz(5.5)],
            vec![ghz(4.0), ghz(6.25)],
            [65e-15, 65e-15],
        )
        .unwrap()
    }

    #[test]
    fn vanishes_at_zeros() {
        let m = reference_model();
        for f in [4.5, 5.5] {
            let z = m.impedance(ghz(f)).unwrap();
            assert!(z[(0, 1)].norm() < 1e-9, "{}", z[(0, 1)]);
        }
    }

    #[test]
    fn analytic_derivative_matches_difference() {
        let m = reference_model();
        for f in [3.0, 4.2, 5.0, 5.3, 7.0] {
            let w = ghz(f);
            let h = w * 1e-7;
            let fd = (m.trans_reactance(w + h) - m.trans_reactance(w - h)) / (2.0 * h);
            let an = m.trans_reactance_derivative(w);
            assert!((fd - an).abs() <= 1e-6 * an.abs(), "{f}: {fd} vs {an}");
        }
    }

    #[test]
    fn pole_rejected() {
        assert!(matches!(
            reference_model().impedance(ghz(4.0)).unwrap_err(),
            Error::PoleProximity { .. }
        ));
    }
}
