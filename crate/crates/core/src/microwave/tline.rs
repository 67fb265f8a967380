use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::C_LIGHT;

/// Distance in radians from a line resonance below which the stamp is
/// treated as singular.
pub const RESONANCE_GUARD: f64 = 1e-9;

pub fn electrical_length(length: f64, eps_eff: f64, omega: f64) -> f64 {
    omega * eps_eff.sqrt() / C_LIGHT * length
}

/// Real susceptance entries (S11, S12) of a lossless line, Y = j·S.
pub(crate) fn tl_susceptance(z0: f64, length: f64, eps_eff: f64, omega: f64) -> Result<(f64, f64)> {
    let bl = electrical_length(length, eps_eff, omega);
    let k = (bl / PI).round();
    if (bl - k * PI).abs() < RESONANCE_GUARD {
        return Err(Error::StampSingularity { beta_l: bl });
    }
    let (s, c) = bl.sin_cos();
    Ok((-c / s / z0, 1.0 / s / z0))
}

/// Two-port admittance matrix of a lossless line:
/// Y11 = Y22 = −j·cot(βl)/Z0, Y12 = Y21 = +j·csc(βl)/Z0.
pub fn tl_two_port_admittance(
    z0: f64,
    length: f64,
    eps_eff: f64,
    omega: f64,
) -> Result<Matrix2<Complex64>> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    let (s11, s12) = tl_susceptance(z0, length, eps_eff, omega)?;
    let y11 = Complex64::new(0.0, s11);
    let y12 = Complex64::new(0.0, s12);
    Ok(Matrix2::new(y11, y12, y12, y11))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega_for(bl: f64, length: f64, eps: f64) -> f64 {
        bl * C_LIGHT / (eps.sqrt() * length)
    }

    #[test]
    fn quarter_wave_identity() {
        let (l, eps) = (3e-3, 6.45);
        let y = tl_two_port_admittance(50.0, l, eps, omega_for(PI / 2.0, l, eps)).unwrap();
        assert!(y[(0, 0)].norm() < 1e-12);
        assert!((y[(0, 1)] - Complex64::new(0.0, 0.02)).norm() < 1e-12);
    }

    #[test]
    fn short_line_is_nearly_a_short() {
        let (l, eps) = (1e-3, 6.45);
        let y = tl_two_port_admittance(50.0, l, eps, omega_for(1e-6, l, eps)).unwrap();
        assert!(y[(0, 1)].norm() > 1e4);
    }

    #[test]
    fn shorted_quarter_wave_is_open() {
        // Input admittance with the far end grounded is Y11.
        let (l, eps) = (3e-3, 6.45);
        let y = tl_two_port_admittance(50.0, l, eps, omega_for(PI / 2.0, l, eps)).unwrap();
        assert!(y[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn resonance_is_singular() {
        let (l, eps) = (3e-3, 6.45);
        let err = tl_two_port_admittance(50.0, l, eps, omega_for(PI, l, eps)).unwrap_err();
        assert!(matches!(err, Error::StampSingularity { .. }));
    }
}
