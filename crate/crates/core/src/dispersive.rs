//! Qubit parameters, exchange couplings and ZZ rates evaluated directly
//! from the port impedance matrix.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::microwave::ImpedanceProvider;
use crate::roots::{brent, rising_crossings};
use crate::units::charging_energy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodVariant {
    /// Bare J and δ in the two-level-plus-second-level formula.
    Naive,
    /// Corrected second-excited-state couplings J_δ.
    ZMethod0,
    /// ZMethod0 plus the cross-Kerr term.
    ZMethodK0,
    /// ZMethodK0 with α_ii-corrected anharmonicities.
    ZMethod,
}

impl MethodVariant {
    pub const ALL: [MethodVariant; 4] = [
        MethodVariant::Naive,
        MethodVariant::ZMethod0,
        MethodVariant::ZMethodK0,
        MethodVariant::ZMethod,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MethodVariant::Naive => "naive",
            MethodVariant::ZMethod0 => "zm0",
            MethodVariant::ZMethodK0 => "zmk0",
            MethodVariant::ZMethod => "zm",
        }
    }

    /// Whether qubit parameters are solved with α_ii² folded into E_C.
    pub fn alpha_corrected(self) -> bool {
        matches!(self, MethodVariant::ZMethod)
    }
}

impl fmt::Display for MethodVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How the characteristic impedances Z_i and cross impedances Z_ij are
/// formed from the solved qubit quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ImpedanceConvention {
    /// C_i replaced by the mode capacitance 1/(ω_i²L_i), so Z_i = ω_i·L_i.
    #[default]
    ModeCapacitance,
    /// C_i is the physical shunt capacitance, Z_i = √(L_i/C_i).
    ShuntCapacitance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub include_charging_energy: bool,
    /// Half-width of the resonance search window relative to the seed.
    pub bracket: f64,
    pub grid_points: usize,
    /// Convergence of ω in rad/s.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub convention: ImpedanceConvention,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            include_charging_energy: true,
            bracket: 0.4,
            grid_points: 401,
            tolerance: 2.0 * std::f64::consts::PI * 0.01,
            max_iterations: 100,
            convention: ImpedanceConvention::ModeCapacitance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub port: usize,
    /// Dressed qubit frequency (rad/s).
    pub omega: f64,
    /// Bare junction inductance (H).
    pub l_j: f64,
    /// Renormalized inductance L_J/(1 − 2a²E_C/ω) (H).
    pub l: f64,
    /// Shunt capacitance (F).
    pub c: f64,
    /// Charging energy (rad/s).
    pub e_c: f64,
    /// Anharmonicity (rad/s).
    pub delta: f64,
    pub alpha_ii: f64,
    /// Characteristic impedance under the chosen convention (Ω).
    pub z_char: f64,
    /// True when α_ii² enters L and δ.
    pub alpha_corrected: bool,
}

impl QubitParams {
    pub fn alpha_in_range(&self) -> bool {
        self.alpha_ii > 0.0 && self.alpha_ii <= 1.2
    }

    /// Capacitance entering the cross impedances.
    fn effective_capacitance(&self, convention: ImpedanceConvention) -> f64 {
        match convention {
            ImpedanceConvention::ModeCapacitance => 1.0 / (self.omega * self.omega * self.l),
            ImpedanceConvention::ShuntCapacitance => self.c,
        }
    }
}

/// δ = −a²E_C/(1 − 2a²E_C/ω); a = 1 gives the plain expression and
/// a = α_ii the corrected one.
pub fn anharmonicity(e_c: f64, omega: f64, alpha_ii: f64) -> f64 {
    let a2ec = alpha_ii * alpha_ii * e_c;
    -a2ec / (1.0 - 2.0 * a2ec / omega)
}

/// α_ii = 1/2 − (3/4)·Im Z_ii/Z_i − (1/4)·ω·Im Z'_ii/Z_i.
pub fn alpha_ii(
    provider: &ImpedanceProvider,
    port: usize,
    omega: f64,
    z_char: f64,
) -> Result<f64> {
    let z = provider.impedance_at(omega)?.z[(port, port)];
    let dz = provider.impedance_derivative(omega, (port, port))?;
    Ok(0.5 - 0.75 * z.im / z_char - 0.25 * omega * dz.im / z_char)
}

fn characteristic_impedance(omega: f64, l: f64, c: f64, convention: ImpedanceConvention) -> f64 {
    match convention {
        ImpedanceConvention::ModeCapacitance => omega * l,
        ImpedanceConvention::ShuntCapacitance => (l / c).sqrt(),
    }
}

/// Root of Im Z_ii(ω) + ω·L = 0 nearest `seed`.
pub fn resonance(
    provider: &ImpedanceProvider,
    port: usize,
    inductance: f64,
    seed: f64,
    bracket: f64,
    grid_points: usize,
) -> Result<f64> {
    let f = |w: f64| -> Result<f64> { Ok(provider.impedance_at(w)?.z[(port, port)].im + w * inductance) };
    let (band_lo, band_hi) = provider.band();
    let mut width = bracket;
    loop {
        let lo = (seed * (1.0 - width)).max(band_lo).max(f64::MIN_POSITIVE);
        let hi = (seed * (1.0 + width)).min(band_hi);
        let mut brackets = rising_crossings(f, lo, hi, grid_points.max(3));
        brackets.sort_by(|a, b| {
            let da = (0.5 * (a.0 + a.1) - seed).abs();
            let db = (0.5 * (b.0 + b.1) - seed).abs();
            da.total_cmp(&db)
        });
        for (a, b) in brackets {
            let root = brent(f, a, b, 1e-6 * seed * f64::EPSILON.sqrt(), 200)?;
            // A pole straddled by the grid looks like a crossing too.
            let residual = f(root)?;
            if residual.abs() <= 1e-6 * root * inductance {
                return Ok(root);
            }
        }
        if width >= 0.9 || (lo <= band_lo && hi >= band_hi) {
            return Err(Error::NoResonance { port, lo, hi });
        }
        width = (width * 1.5).min(0.9);
    }
}

/// Self-consistent dressed frequency, renormalized inductance, α_ii and δ
/// of the qubit attached at `port`.
pub fn solve_qubit(
    provider: &ImpedanceProvider,
    port: usize,
    l_j: f64,
    c: f64,
    variant: MethodVariant,
    options: &SolveOptions,
) -> Result<QubitParams> {
    solve_qubit_seeded(provider, port, l_j, c, variant, options, None)
}

pub fn solve_qubit_seeded(
    provider: &ImpedanceProvider,
    port: usize,
    l_j: f64,
    c: f64,
    variant: MethodVariant,
    options: &SolveOptions,
    seed: Option<f64>,
) -> Result<QubitParams> {
    if port >= provider.port_count() {
        return Err(Error::InvalidArgument(format!("no qubit port {port}")));
    }
    if !(l_j > 0.0 && c > 0.0) {
        return Err(Error::InvalidArgument("L_J and C must be positive".into()));
    }
    let corrected = variant.alpha_corrected();
    let e_c = if options.include_charging_energy {
        charging_energy(c)
    } else {
        0.0
    };
    let omega_j = 1.0 / (l_j * c).sqrt();
    let mut omega = seed.unwrap_or(-e_c + (e_c * e_c + omega_j * omega_j).sqrt());
    let mut a2 = 1.0;
    let renormalized = |w: f64, a2: f64| -> Result<f64> {
        let denom = 1.0 - 2.0 * a2 * e_c / w;
        if denom <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "charging energy too large for ω = {w} rad/s"
            )));
        }
        Ok(l_j / denom)
    };
    let mut first = true;
    for _ in 0..options.max_iterations {
        let l = renormalized(omega, a2)?;
        // After the first pass the root moves little; try a narrow window.
        let next = if first {
            resonance(provider, port, l, omega, options.bracket, options.grid_points)?
        } else {
            resonance(provider, port, l, omega, 0.02, 41)
                .or_else(|_| resonance(provider, port, l, omega, options.bracket, options.grid_points))?
        };
        first = false;
        let l = renormalized(next, a2)?;
        let z_char = characteristic_impedance(next, l, c, options.convention);
        let alpha = alpha_ii(provider, port, next, z_char)?;
        let next_a2 = if corrected { alpha * alpha } else { 1.0 };
        let done = (next - omega).abs() < options.tolerance && (next_a2 - a2).abs() < 1e-8;
        omega = next;
        if done {
            return Ok(QubitParams {
                port,
                omega,
                l_j,
                l,
                c,
                e_c,
                delta: anharmonicity(e_c, omega, a2.sqrt()),
                alpha_ii: alpha,
                z_char,
                alpha_corrected: corrected,
            });
        }
        a2 = next_a2;
    }
    Err(Error::NotConverged {
        what: "qubit self-consistency",
        iterations: options.max_iterations,
    })
}

/// J_ij = −(1/4)·√(ω_iω_j/(L_iL_j))·Im[Z_ij(ω_i)/ω_i + Z_ij(ω_j)/ω_j].
pub fn exchange_j(q_i: &QubitParams, q_j: &QubitParams, provider: &ImpedanceProvider) -> Result<f64> {
    let zi = provider.impedance_at(q_i.omega)?.z[(q_i.port, q_j.port)];
    let zj = provider.impedance_at(q_j.omega)?.z[(q_i.port, q_j.port)];
    Ok(j_prefactor(q_i, q_j) * (zi.im / q_i.omega + zj.im / q_j.omega))
}

fn j_prefactor(q_i: &QubitParams, q_j: &QubitParams) -> f64 {
    -0.25 * (q_i.omega * q_j.omega / (q_i.l * q_j.l)).sqrt()
}

/// Below this qubit splitting (rad/s) the correction formulas are refused.
pub const DEGENERACY_LIMIT: f64 = 2.0 * std::f64::consts::PI * 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corrections {
    pub j: f64,
    pub alpha_ij: f64,
    pub alpha_ji: f64,
    /// α_δi^(i), α_δi^(j), α_δj^(i), α_δj^(j).
    pub factors: [f64; 4],
    pub j_delta_i: f64,
    pub j_delta_j: f64,
    /// Relative mismatch between the factor form and the additive form
    /// J + δ√(ω_i/ω_j)·α_ij of the corrected couplings.
    pub identity_residual: f64,
}

pub fn coupling_corrections(
    q_i: &QubitParams,
    q_j: &QubitParams,
    provider: &ImpedanceProvider,
    convention: ImpedanceConvention,
) -> Result<Corrections> {
    let (wi, wj) = (q_i.omega, q_j.omega);
    if (wi - wj).abs() < DEGENERACY_LIMIT {
        return Err(Error::Degenerate { split: (wi - wj).abs() });
    }
    let zi = provider.impedance_at(wi)?.z[(q_i.port, q_j.port)].im;
    let zj = provider.impedance_at(wj)?.z[(q_i.port, q_j.port)].im;
    let pre = j_prefactor(q_i, q_j);
    let j = pre * (zi / wi + zj / wj);

    // Cross characteristic impedances Z_ji = √(L_j/C_i), Z_ij = √(L_i/C_j).
    let ci = q_i.effective_capacitance(convention);
    let cj = q_j.effective_capacitance(convention);
    let z_ji = (q_j.l / ci).sqrt();
    let z_ij = (q_i.l / cj).sqrt();
    let (wi2, wj2) = (wi * wi, wj * wj);
    let alpha_ij = ((wi2 - 2.0 * wj2) * zj + wi * wj * zi) / (z_ji * 2.0 * (wj2 - wi2));
    let alpha_ji = ((wj2 - 2.0 * wi2) * zi + wi * wj * zj) / (z_ij * 2.0 * (wi2 - wj2));

    let (di, dj) = (q_i.delta, q_j.delta);
    let split = wi2 - wj2;
    let f_ii = 1.0 + 2.0 * wi * di / split;
    let f_ij = 1.0 - 2.0 * wi * di / split + 4.0 * di / wi;
    let f_ji = 1.0 + 2.0 * wj * dj / split + 4.0 * dj / wj;
    let f_jj = 1.0 - 2.0 * wj * dj / split;
    let j_delta_i = pre * (f_ii * zi / wi + f_ij * zj / wj);
    let j_delta_j = pre * (f_ji * zi / wi + f_jj * zj / wj);

    let additive_i = j + di * (wi / wj).sqrt() * alpha_ij;
    let additive_j = j + dj * (wj / wi).sqrt() * alpha_ji;
    let scale = j.abs()
        + (di * (wi / wj).sqrt() * alpha_ij).abs()
        + (dj * (wj / wi).sqrt() * alpha_ji).abs();
    let identity_residual = if scale > 0.0 {
        ((j_delta_i - additive_i).abs()).max((j_delta_j - additive_j).abs()) / scale
    } else {
        0.0
    };
    if convention == ImpedanceConvention::ModeCapacitance && identity_residual > 1e-9 {
        return Err(Error::Inconsistent(format!(
            "corrected-coupling forms disagree by {identity_residual:e} (relative)"
        )));
    }
    Ok(Corrections {
        j,
        alpha_ij,
        alpha_ji,
        factors: [f_ii, f_ij, f_ji, f_jj],
        j_delta_i,
        j_delta_j,
        identity_residual,
    })
}

/// Everything the ZZ formulas consume (all rad/s except the α's).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZzInputs {
    pub omega_i: f64,
    pub omega_j: f64,
    pub delta_i: f64,
    pub delta_j: f64,
    pub j: f64,
    pub j_delta_i: f64,
    pub j_delta_j: f64,
    pub alpha_ij: f64,
    pub alpha_ji: f64,
}

impl ZzInputs {
    pub fn new(q_i: &QubitParams, q_j: &QubitParams, c: &Corrections) -> Self {
        Self {
            omega_i: q_i.omega,
            omega_j: q_j.omega,
            delta_i: q_i.delta,
            delta_j: q_j.delta,
            j: c.j,
            j_delta_i: c.j_delta_i,
            j_delta_j: c.j_delta_j,
            alpha_ij: c.alpha_ij,
            alpha_ji: c.alpha_ji,
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            omega_i: self.omega_j,
            omega_j: self.omega_i,
            delta_i: self.delta_j,
            delta_j: self.delta_i,
            j: self.j,
            j_delta_i: self.j_delta_j,
            j_delta_j: self.j_delta_i,
            alpha_ij: self.alpha_ji,
            alpha_ji: self.alpha_ij,
        }
    }
}

/// Distance (rad/s) to a straddling-boundary pole that triggers a warning.
pub const NEAR_POLE_LIMIT: f64 = 2.0 * std::f64::consts::PI * 10e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZzValue {
    pub value: f64,
    pub near_pole: bool,
}

/// ZZ rate for one method. For `ZMethod` the inputs must come from
/// α-corrected qubit parameters; the formula is that of `ZMethodK0`.
pub fn zz_rate(x: &ZzInputs, variant: MethodVariant) -> ZzValue {
    let delta = x.omega_i - x.omega_j;
    let (di, dj) = (x.delta_i, x.delta_j);
    let near_pole = (delta + di).abs() < NEAR_POLE_LIMIT || (delta - dj).abs() < NEAR_POLE_LIMIT;
    let value = match variant {
        MethodVariant::Naive => -2.0 * x.j * x.j * (di + dj) / ((delta + di) * (dj - delta)),
        _ => {
            let mut zz = 2.0
                * (x.j_delta_i * x.j_delta_i * (dj - delta) + x.j_delta_j * x.j_delta_j * (di + delta))
                / ((delta + di) * (delta - dj));
            if variant != MethodVariant::ZMethod0 {
                zz += cross_kerr(x);
            }
            zz
        }
    };
    ZzValue { value, near_pole }
}

/// 2δ_i(ω_i/ω_j)α_ij² + 2δ_j(ω_j/ω_i)α_ji².
pub fn cross_kerr(x: &ZzInputs) -> f64 {
    2.0 * x.delta_i * (x.omega_i / x.omega_j) * x.alpha_ij * x.alpha_ij
        + 2.0 * x.delta_j * (x.omega_j / x.omega_i) * x.alpha_ji * x.alpha_ji
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ZzEstimates {
    pub naive: f64,
    pub zm0: f64,
    pub zmk0: f64,
    pub zm: f64,
}

impl ZzEstimates {
    pub fn get(&self, variant: MethodVariant) -> f64 {
        match variant {
            MethodVariant::Naive => self.naive,
            MethodVariant::ZMethod0 => self.zm0,
            MethodVariant::ZMethodK0 => self.zmk0,
            MethodVariant::ZMethod => self.zm,
        }
    }

    fn set(&mut self, variant: MethodVariant, v: f64) {
        match variant {
            MethodVariant::Naive => self.naive = v,
            MethodVariant::ZMethod0 => self.zm0 = v,
            MethodVariant::ZMethodK0 => self.zmk0 = v,
            MethodVariant::ZMethod => self.zm = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub i: usize,
    pub j: usize,
    /// Exchange coupling (rad/s).
    pub j_ij: f64,
    pub alpha_ij: f64,
    pub alpha_ji: f64,
    pub factors: [f64; 4],
    pub j_delta_i: f64,
    pub j_delta_j: f64,
    /// ω_i − ω_j (rad/s).
    pub delta_ij: f64,
    pub zz: ZzEstimates,
    pub straddling: bool,
    pub warnings: Vec<String>,
}

/// Pair report. `plain` qubits feed the first three methods and the
/// coupling fields; `corrected` qubits feed `ZMethod`.
pub fn coupling_report(
    provider: &ImpedanceProvider,
    plain: (&QubitParams, &QubitParams),
    corrected: (&QubitParams, &QubitParams),
    convention: ImpedanceConvention,
) -> Result<CouplingReport> {
    let (qi, qj) = plain;
    let c = coupling_corrections(qi, qj, provider, convention)?;
    let inputs = ZzInputs::new(qi, qj, &c);
    let cc = coupling_corrections(corrected.0, corrected.1, provider, convention)?;
    let corrected_inputs = ZzInputs::new(corrected.0, corrected.1, &cc);

    let mut zz = ZzEstimates::default();
    let mut warnings = Vec::new();
    for variant in MethodVariant::ALL {
        let r = if variant.alpha_corrected() {
            zz_rate(&corrected_inputs, variant)
        } else {
            zz_rate(&inputs, variant)
        };
        if r.near_pole {
            warnings.push(format!("near-pole:{variant}"));
        }
        zz.set(variant, r.value);
    }
    for q in [qi, qj, corrected.0, corrected.1] {
        if !q.alpha_in_range() {
            warnings.push(format!("alpha-range:q{}", q.port + 1));
        }
    }
    warnings.dedup();
    let delta_ij = qi.omega - qj.omega;
    Ok(CouplingReport {
        i: qi.port,
        j: qj.port,
        j_ij: c.j,
        alpha_ij: c.alpha_ij,
        alpha_ji: c.alpha_ji,
        factors: c.factors,
        j_delta_i: c.j_delta_i,
        j_delta_j: c.j_delta_j,
        delta_ij,
        zz,
        straddling: delta_ij.abs() < qi.delta.abs().min(qj.delta.abs()),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;
    use crate::units::{ghz, khz, mhz, to_ghz, to_khz};

    fn isolated(c_ff: f64) -> ImpedanceProvider {
        let text = format!("C c1 n1 0 {c_ff}\nJJ q1 n1 0 LJ=15");
        ImpedanceProvider::from_netlist(&parse_netlist(&text).unwrap()).unwrap()
    }

    #[test]
    fn isolated_port_without_charging_energy() {
        let p = isolated(65.0);
        let opts = SolveOptions {
            include_charging_energy: false,
            ..Default::default()
        };
        let l = 1.0 / (ghz(5.0).powi(2) * 65e-15);
        let q = solve_qubit(&p, 0, l, 65e-15, MethodVariant::ZMethod, &opts).unwrap();
        assert!((to_ghz(q.omega) - 5.0).abs() < 1e-9);
        assert!((l * 1e9 - 15.59).abs() < 0.01);
        assert_eq!(q.delta, 0.0);
    }

    #[test]
    fn isolated_port_alpha_is_one() {
        let p = isolated(65.0);
        for variant in [MethodVariant::ZMethod0, MethodVariant::ZMethod] {
            let q = solve_qubit(&p, 0, 15e-9, 65e-15, variant, &SolveOptions::default()).unwrap();
            assert!((q.alpha_ii - 1.0).abs() < 1e-7, "{}", q.alpha_ii);
            let expected = anharmonicity(q.e_c, q.omega, 1.0);
            assert!((q.delta - expected).abs() < 1e-6 * expected.abs());
            // Dressed frequency sits below the bare √(1/LC).
            assert!(q.omega < 1.0 / (15e-9f64 * 65e-15).sqrt());
        }
    }

    #[test]
    fn corrected_anharmonicity_reduces_at_unit_alpha() {
        let (ec, w) = (mhz(300.0), ghz(5.0));
        assert_eq!(anharmonicity(ec, w, 1.0), -ec / (1.0 - 2.0 * ec / w));
    }

    #[test]
    fn naive_zero_detuning_closed_form() {
        let d = -mhz(300.0);
        let x = ZzInputs {
            omega_i: ghz(5.0),
            omega_j: ghz(5.0),
            delta_i: d,
            delta_j: d,
            j: mhz(2.0),
            j_delta_i: 0.0,
            j_delta_j: 0.0,
            alpha_ij: 0.0,
            alpha_ji: 0.0,
        };
        let zz = zz_rate(&x, MethodVariant::Naive).value;
        assert!((to_khz(zz) - 53.333).abs() < 1e-2, "{}", to_khz(zz));
    }

    #[test]
    fn zero_couplings_give_zero() {
        let x = ZzInputs {
            omega_i: ghz(5.0),
            omega_j: ghz(5.2),
            delta_i: -mhz(300.0),
            delta_j: -mhz(310.0),
            j: 0.0,
            j_delta_i: 0.0,
            j_delta_j: 0.0,
            alpha_ij: 0.0,
            alpha_ji: 0.0,
        };
        for v in MethodVariant::ALL {
            assert_eq!(zz_rate(&x, v).value, 0.0);
        }
    }

    #[test]
    fn near_pole_flag() {
        let d = -mhz(300.0);
        let x = ZzInputs {
            omega_i: ghz(5.0),
            omega_j: ghz(5.0) + d + khz(1.0),
            delta_i: d,
            delta_j: d,
            j: mhz(2.0),
            j_delta_i: mhz(2.0),
            j_delta_j: mhz(2.0),
            alpha_ij: 0.0,
            alpha_ji: 0.0,
        };
        assert!(zz_rate(&x, MethodVariant::Naive).near_pole);
    }
}
