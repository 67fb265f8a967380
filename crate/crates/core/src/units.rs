//! Physical constants and the unit conventions of the file formats.
//!
//! Everything inside the crate is SI: farads, henries, ohms, metres,
//! angular frequencies in rad/s. File formats use fF, nH, mm and Ω.

use std::f64::consts::PI;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge (C).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Reduced flux quantum ħ/2e (Wb).
pub const PHI0_REDUCED: f64 = HBAR / (2.0 * E_CHARGE);

pub const FEMTO: f64 = 1e-15;
pub const NANO: f64 = 1e-9;
pub const MILLI: f64 = 1e-3;

/// Angular frequency (rad/s) from a frequency in GHz.
pub fn ghz(f: f64) -> f64 {
    2.0 * PI * f * 1e9
}

/// Angular frequency (rad/s) from a frequency in MHz.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

/// Angular frequency (rad/s) from a frequency in kHz.
pub fn khz(f: f64) -> f64 {
    2.0 * PI * f * 1e3
}

pub fn to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e9)
}

pub fn to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

pub fn to_khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

pub fn to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Charging energy e²/2C expressed as an angular frequency (rad/s).
pub fn charging_energy(capacitance: f64) -> f64 {
    E_CHARGE * E_CHARGE / (2.0 * capacitance) / HBAR
}

/// Josephson energy φ0²/L_J expressed as an angular frequency (rad/s).
pub fn josephson_energy(inductance: f64) -> f64 {
    PHI0_REDUCED * PHI0_REDUCED / inductance / HBAR
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charging_energy_of_65ff_is_about_298_mhz() {
        // e^2 / (2 C h) evaluated by hand: 1.602e-19^2 / (2 * 65e-15 * 6.626e-34)
        let h = 2.0 * PI * HBAR;
        let by_hand = E_CHARGE * E_CHARGE / (2.0 * 65e-15 * h);
        let ec = to_hz(charging_energy(65e-15));
        assert!((ec - by_hand).abs() / by_hand < 1e-12);
        assert!((ec / 1e6 - 298.0).abs() < 0.5, "{ec}");
    }

    #[test]
    fn frequency_round_trip() {
        assert!((to_ghz(ghz(5.2)) - 5.2).abs() < 1e-15);
        assert!((to_khz(khz(53.33)) - 53.33).abs() < 1e-12);
    }
}
