//! Built-in sweeps behind `--plot-data`.

use zzcore::calibrate::{Junctions, OracleSettings, SweepParameter, SweepSource, SweepSpec};
use zzcore::devices::{coupler_netlist, rational_coupler, BusDevice, COUPLER_EPS_EFF};
use zzcore::dispersive::SolveOptions;
use zzcore::microwave::{ImpedanceProvider, RationalZ12};
use zzcore::units::ghz;
use zzcore::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Bus sweep, all four estimates against the oracle.
    BusMethods,
    /// Bus sweep, ZMethod against the oracle.
    BusZMethod,
    /// Rational trans-impedance, second qubit swept.
    Rational,
    /// Cancellation coupler, second qubit swept.
    Coupler,
}

impl Figure {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            3 => Ok(Figure::BusMethods),
            4 => Ok(Figure::BusZMethod),
            5 => Ok(Figure::Rational),
            7 => Ok(Figure::Coupler),
            _ => Err(Error::InvalidArgument(format!("no plot data for figure {n} (use 3, 4, 5 or 7)"))),
        }
    }

    pub fn axis(self) -> &'static str {
        match self {
            Figure::BusMethods | Figure::BusZMethod => "f_b_ghz",
            Figure::Rational | Figure::Coupler => "f2_ghz",
        }
    }

    /// Sweep columns kept for this figure.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Figure::BusMethods => &[
                "j_mhz",
                "zz_naive_khz",
                "zz_zm0_khz",
                "zz_zmk0_khz",
                "zz_exact_khz",
                "flags",
            ],
            Figure::BusZMethod => &["zz_zm_khz", "zz_exact_khz", "flags"],
            Figure::Rational => &[
                "j_mhz",
                "zz_naive_khz",
                "zz_zm0_khz",
                "zz_zmk0_khz",
                "zz_zm_khz",
                "flags",
            ],
            Figure::Coupler => &["j_mhz", "zz_zm_khz", "flags"],
        }
    }

    pub fn setup(self) -> Result<(SweepSource, SweepSpec)> {
        match self {
            Figure::BusMethods | Figure::BusZMethod => bus_sweep(50),
            Figure::Rational => Ok(rational_sweep(56)),
            Figure::Coupler => coupler_sweep(COUPLER_EPS_EFF, 81),
        }
    }
}

/// Qubits held at 5.0 and 5.2 GHz while the bus goes 5.6 → 9.0 GHz.
pub fn bus_sweep(points: usize) -> Result<(SweepSource, SweepSpec)> {
    let n = BusDevice::default().netlist(7.0)?;
    let spec = SweepSpec {
        parameter: SweepParameter::BusFrequency {
            inductor: "lb".into(),
            capacitor: "cb".into(),
        },
        start: 5.6,
        stop: 9.0,
        points,
        pair: (0, 1),
        junctions: Junctions::Targets(vec![ghz(5.0), ghz(5.2)]),
        solve: SolveOptions::default(),
        oracle: Some(OracleSettings {
            options: Default::default(),
            ladder: Default::default(),
        }),
    };
    Ok((SweepSource::Netlist(n), spec))
}

pub fn rational_source(z: RationalZ12) -> SweepSource {
    SweepSource::Provider {
        capacitances: z.shunt.to_vec(),
        provider: ImpedanceProvider::RationalZ12(z),
    }
}

/// Qubit 1 at 5.0 GHz, qubit 2 from 4.75 to 5.30 GHz.
pub fn rational_sweep(points: usize) -> (SweepSource, SweepSpec) {
    let spec = SweepSpec {
        parameter: SweepParameter::QubitFrequency { port: 1 },
        start: 4.75,
        stop: 5.30,
        points,
        pair: (0, 1),
        junctions: Junctions::Targets(vec![ghz(5.0), ghz(5.0)]),
        solve: SolveOptions::default(),
        oracle: None,
    };
    (rational_source(rational_coupler()), spec)
}

/// Qubit 1 at 5.0 GHz, qubit 2 from 4.5 to 5.3 GHz.
pub fn coupler_sweep(eps_eff: f64, points: usize) -> Result<(SweepSource, SweepSpec)> {
    let n = coupler_netlist(eps_eff, [12.0, 12.0])?;
    let spec = SweepSpec {
        parameter: SweepParameter::QubitFrequency { port: 1 },
        start: 4.5,
        stop: 5.3,
        points,
        pair: (0, 1),
        junctions: Junctions::Targets(vec![ghz(5.0), ghz(5.0)]),
        solve: SolveOptions::default(),
        oracle: None,
    };
    Ok((SweepSource::Netlist(n), spec))
}
