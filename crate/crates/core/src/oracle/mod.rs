//! Exact-diagonalization reference for ZZ rates.

pub mod hamiltonian;
pub mod ladder;
pub mod modes;

use serde::{Deserialize, Serialize};

pub use hamiltonian::{CosineOrder, DressedSpectrum, HamiltonianModel, Label, OracleOptions, Truncation};
pub use ladder::{discretize_lines, discretize_lines_auto, LadderOptions};
pub use modes::{linear_normal_modes, LinearModes};

use crate::error::{Error, Result};
use crate::netlist::Netlist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// E11 − E10 − E01 + E00 (rad/s).
    pub zz: f64,
    /// Dressed qubit frequencies E10 − E00 and E01 − E00 (rad/s).
    pub qubit_frequencies: [f64; 2],
    pub mode_frequencies: Vec<f64>,
    /// Squared overlaps of the labels 00, 10, 01, 11.
    pub overlaps: [f64; 4],
    pub dimension: usize,
    /// |ΔZZ| when every truncation is raised by one level.
    pub convergence: Option<f64>,
    pub converged: bool,
}

/// ZZ between junctions `pair.0` and `pair.1`; every other mode in its
/// ground state.
pub fn oracle_zz(model: &HamiltonianModel, pair: (usize, usize), options: &OracleOptions) -> Result<OracleResult> {
    let nj = model.modes.junction_count();
    if pair.0 >= nj || pair.1 >= nj || pair.0 == pair.1 {
        return Err(Error::InvalidArgument(format!(
            "junction pair ({}, {}) invalid for {nj} junctions",
            pair.0, pair.1
        )));
    }
    let (zz, freqs, overlaps, dimension) = evaluate(model, pair)?;
    let convergence = if options.convergence_check {
        let (zz2, ..) = evaluate(&model.with_levels_raised(), pair)?;
        Some((zz2 - zz).abs())
    } else {
        None
    };
    Ok(OracleResult {
        zz,
        qubit_frequencies: freqs,
        mode_frequencies: model.modes.frequencies.clone(),
        overlaps,
        dimension,
        convergence,
        converged: convergence.map_or(true, |c| c <= options.tolerance),
    })
}

fn evaluate(model: &HamiltonianModel, (i, j): (usize, usize)) -> Result<(f64, [f64; 2], [f64; 4], usize)> {
    let spec = model.spectrum()?;
    let l00 = spec.label(&model.occupation(&[]))?;
    let l10 = spec.label(&model.occupation(&[(i, 1)]))?;
    let l01 = spec.label(&model.occupation(&[(j, 1)]))?;
    let l11 = spec.label(&model.occupation(&[(i, 1), (j, 1)]))?;
    let zz = (l11.energy - l10.energy) - (l01.energy - l00.energy);
    Ok((
        zz,
        [l10.energy - l00.energy, l01.energy - l00.energy],
        [l00.overlap, l10.overlap, l01.overlap, l11.overlap],
        spec.dimension(),
    ))
}

/// Lumped copy of the netlist (lines replaced by ladders) and its model.
pub fn model_from_netlist(netlist: &Netlist, ladder: &LadderOptions, options: &OracleOptions) -> Result<HamiltonianModel> {
    let lumped;
    let source = if netlist.has_lines() {
        lumped = discretize_lines_auto(netlist, ladder)?;
        &lumped
    } else {
        netlist
    };
    HamiltonianModel::new(linear_normal_modes(source)?, options)
}

pub fn netlist_oracle_zz(
    netlist: &Netlist,
    pair: (usize, usize),
    ladder: &LadderOptions,
    options: &OracleOptions,
) -> Result<OracleResult> {
    oracle_zz(&model_from_netlist(netlist, ladder, options)?, pair, options)
}

/// Stop when both dressed frequencies are this close to target (rad/s).
pub const TUNE_TOLERANCE: f64 = 2.0 * std::f64::consts::PI * 100.0;
pub const TUNE_MAX_ITERATIONS: usize = 30;

/// Adjust the two junction inductances until the oracle's own dressed
/// qubit frequencies hit `targets`, then evaluate with the full options.
/// The first pass runs on a small truncation.
pub fn tune_oracle(
    netlist: &Netlist,
    pair: (usize, usize),
    targets: [f64; 2],
    ladder: &LadderOptions,
    options: &OracleOptions,
) -> Result<(Netlist, OracleResult)> {
    let full = OracleOptions {
        convergence_check: false,
        ..*options
    };
    let mut coarse = full;
    coarse.truncation.qubit_levels = coarse.truncation.qubit_levels.min(6);
    coarse.truncation.other_levels = coarse.truncation.other_levels.min(4);
    let mut n = netlist.clone();
    let mut last = None;
    for stage in [&coarse, &full] {
        last = Some(tune_stage(&mut n, pair, targets, ladder, stage)?);
    }
    let mut result = last.expect("two stages ran");
    if options.convergence_check {
        let model = model_from_netlist(&n, ladder, options)?.with_levels_raised();
        let (zz, ..) = evaluate(&model, pair)?;
        let delta = (zz - result.zz).abs();
        result.convergence = Some(delta);
        result.converged = delta <= options.tolerance;
    }
    Ok((n, result))
}

fn tune_stage(
    n: &mut Netlist,
    pair: (usize, usize),
    targets: [f64; 2],
    ladder: &LadderOptions,
    options: &OracleOptions,
) -> Result<OracleResult> {
    let ports = [pair.0, pair.1];
    for _ in 0..TUNE_MAX_ITERATIONS {
        let r = netlist_oracle_zz(n, pair, ladder, options)?;
        let err = (0..2)
            .map(|k| (r.qubit_frequencies[k] - targets[k]).abs())
            .fold(0.0, f64::max);
        if err < TUNE_TOLERANCE {
            return Ok(r);
        }
        let ls = n.junction_inductances();
        for k in 0..2 {
            let l = ls[ports[k]] * (r.qubit_frequencies[k] / targets[k]).powi(2);
            n.set_junction_inductance(ports[k], l)?;
        }
    }
    Err(Error::NotConverged {
        what: "oracle frequency tuning",
        iterations: TUNE_MAX_ITERATIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::BusDevice;
    use crate::netlist::parse_netlist;
    use crate::units::{ghz, to_khz};

    #[test]
    fn fig2_point_matches_reference() {
        let n = BusDevice::default().netlist(7.0).unwrap();
        let (_, r) = tune_oracle(&n, (0, 1), [ghz(5.0), ghz(5.2)], &LadderOptions::default(), &OracleOptions::default())
            .unwrap();
        let zz = to_khz(r.zz);
        assert!((zz - 92.23).abs() < 0.1, "zz = {zz}");
        assert!(r.converged, "{:?}", r.convergence.map(to_khz));
    }

    #[test]
    fn harmonic_limit_is_zero() {
        let n = BusDevice::default().netlist(7.0).unwrap();
        let opts = OracleOptions {
            nonlinear: false,
            ..Default::default()
        };
        let r = netlist_oracle_zz(&n, (0, 1), &LadderOptions::default(), &opts).unwrap();
        assert!(r.zz.abs() < 1e-6, "{}", r.zz);
    }

    #[test]
    fn uncoupled_has_no_zz() {
        let n = parse_netlist("C c1 a 0 65\nC c2 b 0 60\nJJ q1 a 0 LJ=14\nJJ q2 b 0 LJ=13").unwrap();
        let r = netlist_oracle_zz(&n, (0, 1), &LadderOptions::default(), &OracleOptions::default()).unwrap();
        assert!(r.zz.abs() < 2.0 * std::f64::consts::PI, "{}", r.zz);
    }

    #[test]
    fn truncation_precondition() {
        let n = BusDevice::default().netlist(7.0).unwrap();
        let mut opts = OracleOptions::default();
        opts.truncation.qubit_levels = 3;
        assert!(model_from_netlist(&n, &LadderOptions::default(), &opts).is_err());
    }
}
