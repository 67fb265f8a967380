//! Junction tuning and one-parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersive::{coupling_report, solve_qubit_seeded, CouplingReport, MethodVariant, QubitParams, SolveOptions};
use crate::error::{Error, Result};
use crate::microwave::ImpedanceProvider;
use crate::netlist::{capacitive_reduction, ElementKind, Netlist, ReductionOptions};
use crate::oracle::{netlist_oracle_zz, tune_oracle, LadderOptions, OracleOptions, OracleResult};
use crate::units::{ghz, FEMTO, MILLI, NANO};

/// |ω − target| below which tuning stops (rad/s).
pub const TUNE_TOLERANCE: f64 = 2.0 * std::f64::consts::PI * 1.0;
pub const TUNE_MAX_ITERATIONS: usize = 50;

/// Junction inductance for which the solved qubit frequency equals
/// `target`. Multiplicative fixed point L ← L·(ω/target)², seeded at
/// 1/(target²·C).
pub fn tune_junction(
    provider: &ImpedanceProvider,
    port: usize,
    c: f64,
    target: f64,
    variant: MethodVariant,
    options: &SolveOptions,
) -> Result<(f64, QubitParams)> {
    tune_junction_from(provider, port, c, target, variant, options, 1.0 / (target * target * c))
}

pub fn tune_junction_from(
    provider: &ImpedanceProvider,
    port: usize,
    c: f64,
    target: f64,
    variant: MethodVariant,
    options: &SolveOptions,
    seed_l: f64,
) -> Result<(f64, QubitParams)> {
    let (lo, hi) = provider.band();
    if !(target > lo && target < hi) {
        return Err(Error::Extrapolation { omega: target, min: lo, max: hi });
    }
    let mut l = seed_l;
    let mut seed = None;
    let mut previous: Option<(f64, f64)> = None;
    for _ in 0..TUNE_MAX_ITERATIONS {
        let q = solve_qubit_seeded(provider, port, l, c, variant, options, seed)?;
        if (q.omega - target).abs() < TUNE_TOLERANCE {
            return Ok((l, q));
        }
        // ω must fall as L grows.
        if let Some((pl, pw)) = previous {
            if (l - pl) * (q.omega - pw) > 0.0 {
                return Err(Error::Inconsistent(format!(
                    "qubit {} frequency is not monotone in L_J near {l:e} H",
                    port + 1
                )));
            }
        }
        previous = Some((l, q.omega));
        seed = Some(q.omega);
        l *= (q.omega / target).powi(2);
    }
    Err(Error::NotConverged {
        what: "junction tuning",
        iterations: TUNE_MAX_ITERATIONS,
    })
}

/// Total shunt capacitance C_i of every qubit port.
pub fn port_capacitances(netlist: &Netlist) -> Result<Vec<f64>> {
    let c = capacitive_reduction(netlist, &ReductionOptions::default())?;
    Ok(c.diagonal().iter().copied().collect())
}

/// C_i from the low-frequency end of a tabulated Z_ii, assuming it is
/// capacitive there.
pub fn low_frequency_capacitance(provider: &ImpedanceProvider, port: usize) -> Result<f64> {
    let (lo, _) = provider.band();
    let w = if lo > 0.0 { lo } else { ghz(0.01) };
    let z = provider.impedance_at(w)?.z[(port, port)];
    if !(z.im < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Z_{0}{0} is not capacitive at the lowest frequency; give C explicitly",
            port + 1
        )));
    }
    Ok(-1.0 / (w * z.im))
}

/// How the junctions are fixed at each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Junctions {
    /// Dressed target frequency per port (rad/s); L_J re-tuned per point.
    Targets(Vec<f64>),
    /// Fixed L_J per port (H).
    Inductances(Vec<f64>),
}

/// Solved qubits of one pair under both anharmonicity treatments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAnalysis {
    pub plain: [QubitParams; 2],
    pub corrected: [QubitParams; 2],
    pub report: CouplingReport,
}

/// Solve (and tune, if targets are given) both qubits of `pair`. Plain
/// qubits use the first three methods; α-corrected qubits use ZMethod.
pub fn analyze_pair(
    provider: &ImpedanceProvider,
    capacitances: &[f64],
    junctions: &Junctions,
    pair: (usize, usize),
    options: &SolveOptions,
) -> Result<PairAnalysis> {
    let solve = |port: usize, variant: MethodVariant| -> Result<QubitParams> {
        let c = *capacitances
            .get(port)
            .ok_or_else(|| Error::InvalidArgument(format!("no capacitance for port {port}")))?;
        match junctions {
            Junctions::Targets(t) => {
                let target = *t
                    .get(port)
                    .ok_or_else(|| Error::InvalidArgument(format!("no target for port {port}")))?;
                Ok(tune_junction(provider, port, c, target, variant, options)?.1)
            }
            Junctions::Inductances(l) => {
                let l = *l
                    .get(port)
                    .ok_or_else(|| Error::InvalidArgument(format!("no L_J for port {port}")))?;
                solve_qubit_seeded(provider, port, l, c, variant, options, None)
            }
        }
    };
    let plain = [solve(pair.0, MethodVariant::ZMethod0)?, solve(pair.1, MethodVariant::ZMethod0)?];
    let corrected = [solve(pair.0, MethodVariant::ZMethod)?, solve(pair.1, MethodVariant::ZMethod)?];
    let report = coupling_report(
        provider,
        (&plain[0], &plain[1]),
        (&corrected[0], &corrected[1]),
        options.convention,
    )?;
    Ok(PairAnalysis { plain, corrected, report })
}

/// Swept quantity. Values are GHz for frequencies and file units (fF, nH,
/// mm) for element values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepParameter {
    /// Sets `inductor` so that it resonates with `capacitor` at the value.
    BusFrequency { inductor: String, capacitor: String },
    QubitFrequency { port: usize },
    ElementValue { name: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepSource {
    Netlist(Netlist),
    Provider {
        provider: ImpedanceProvider,
        capacitances: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub options: OracleOptions,
    pub ladder: LadderOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub pair: (usize, usize),
    pub junctions: Junctions,
    pub solve: SolveOptions,
    pub oracle: Option<OracleSettings>,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        (0..self.points)
            .map(|k| self.start + (self.stop - self.start) * k as f64 / (self.points - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.points == 0 || (self.points > 1 && !(self.start < self.stop)) {
            return Err(Error::InvalidArgument(format!(
                "sweep needs start < stop and points ≥ 2 (got {} .. {}, {} points)",
                self.start, self.stop, self.points
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub analysis: Option<PairAnalysis>,
    pub oracle: Option<OracleResult>,
    pub flags: Vec<String>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn zz(&self, variant: MethodVariant) -> Option<f64> {
        self.analysis.as_ref().map(|a| a.report.zz.get(variant))
    }

    pub fn j(&self) -> Option<f64> {
        self.analysis.as_ref().map(|a| a.report.j_ij)
    }
}

/// One row per value in ascending order. Point failures are recorded in
/// the row and do not stop the sweep.
pub fn run_sweep(source: &SweepSource, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    if spec.oracle.is_some() && !matches!(source, SweepSource::Netlist(_)) {
        return Err(Error::InvalidArgument("the oracle needs a netlist source".into()));
    }
    let rows = spec.values().into_par_iter().map(|v| sweep_point(source, spec, v)).collect();
    Ok(rows)
}

fn sweep_point(source: &SweepSource, spec: &SweepSpec, value: f64) -> SweepRow {
    let mut row = SweepRow {
        param: value,
        analysis: None,
        oracle: None,
        flags: Vec::new(),
        error: None,
    };
    let point = match configure(source, spec, value) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    match point.provider().and_then(|(p, c)| analyze_pair(&p, &c, &point.junctions, spec.pair, &spec.solve)) {
        Ok(a) => {
            row.flags.extend(a.report.warnings.iter().cloned());
            if a.report.straddling {
                row.flags.push("straddling".into());
            }
            row.analysis = Some(a);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    if let (Some(settings), SweepSource::Netlist(_)) = (&spec.oracle, source) {
        let n = point.netlist.as_ref().expect("netlist source");
        let result = match &point.junctions {
            Junctions::Targets(t) => {
                // Start from the plain tuned inductances when available.
                let mut start = n.clone();
                if let Some(a) = &row.analysis {
                    for q in &a.plain {
                        let _ = start.set_junction_inductance(q.port, q.l_j);
                    }
                }
                match (t.get(spec.pair.0), t.get(spec.pair.1)) {
                    (Some(&a), Some(&b)) => {
                        tune_oracle(&start, spec.pair, [a, b], &settings.ladder, &settings.options).map(|r| r.1)
                    }
                    _ => Err(Error::InvalidArgument("missing frequency target".into())),
                }
            }
            Junctions::Inductances(_) => netlist_oracle_zz(n, spec.pair, &settings.ladder, &settings.options),
        };
        match result {
            Ok(r) => {
                if !r.converged {
                    row.flags.push("non-converged".into());
                }
                row.oracle = Some(r);
            }
            Err(e) => row.flags.push(format!("oracle-error:{e}")),
        }
    }
    row
}

struct Point {
    netlist: Option<Netlist>,
    fixed: Option<(ImpedanceProvider, Vec<f64>)>,
    junctions: Junctions,
}

impl Point {
    fn provider(&self) -> Result<(ImpedanceProvider, Vec<f64>)> {
        match (&self.netlist, &self.fixed) {
            (Some(n), _) => Ok((ImpedanceProvider::from_netlist(n)?, port_capacitances(n)?)),
            (None, Some((p, c))) => Ok((p.clone(), c.clone())),
            (None, None) => unreachable!("point has a source"),
        }
    }
}

fn configure(source: &SweepSource, spec: &SweepSpec, value: f64) -> Result<Point> {
    let mut junctions = spec.junctions.clone();
    let (mut netlist, fixed) = match source {
        SweepSource::Netlist(n) => (Some(n.clone()), None),
        SweepSource::Provider { provider, capacitances } => (None, Some((provider.clone(), capacitances.clone()))),
    };
    if let Junctions::Inductances(l) = &junctions {
        if let Some(n) = netlist.as_mut() {
            for (port, &v) in l.iter().enumerate() {
                n.set_junction_inductance(port, v)?;
            }
        }
    }
    match &spec.parameter {
        SweepParameter::QubitFrequency { port } => match &mut junctions {
            Junctions::Targets(t) if *port < t.len() => t[*port] = ghz(value),
            _ => {
                return Err(Error::InvalidArgument(
                    "qubit-frequency sweeps need a target for the swept port".into(),
                ))
            }
        },
        SweepParameter::BusFrequency { inductor, capacitor } => {
            let n = netlist
                .as_mut()
                .ok_or_else(|| Error::InvalidArgument("bus sweeps need a netlist".into()))?;
            let c = match n.element(capacitor).map(|e| e.kind) {
                Some(ElementKind::Capacitor { capacitance }) => capacitance,
                _ => return Err(Error::InvalidArgument(format!("no capacitor named {capacitor}"))),
            };
            let w = ghz(value);
            set_value(n, inductor, 1.0 / (w * w * c) / NANO)?;
        }
        SweepParameter::ElementValue { name } => {
            let n = netlist
                .as_mut()
                .ok_or_else(|| Error::InvalidArgument("element sweeps need a netlist".into()))?;
            set_value(n, name, value)?;
        }
    }
    Ok(Point { netlist, fixed, junctions })
}

/// Set an element's primary value given in file units.
fn set_value(n: &mut Netlist, name: &str, value: f64) -> Result<()> {
    if !(value > 0.0) {
        return Err(Error::InvalidArgument(format!("{name} must be positive, got {value}")));
    }
    let e = n
        .element_mut(name)
        .ok_or_else(|| Error::InvalidArgument(format!("no element named {name}")))?;
    match &mut e.kind {
        ElementKind::Capacitor { capacitance } => *capacitance = value * FEMTO,
        ElementKind::Inductor { inductance } => *inductance = value * NANO,
        ElementKind::JosephsonJunction { inductance, .. } => *inductance = value * NANO,
        ElementKind::TransmissionLine { length, .. } => *length = value * MILLI,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::BusDevice;
    use crate::netlist::parse_netlist;
    use crate::units::to_ghz;

    fn isolated() -> ImpedanceProvider {
        ImpedanceProvider::from_netlist(&parse_netlist("C c n 0 65\nJJ q n 0 LJ=15").unwrap()).unwrap()
    }

    #[test]
    fn tuning_without_charging_energy_is_closed_form() {
        let opts = SolveOptions {
            include_charging_energy: false,
            ..Default::default()
        };
        let (l, q) = tune_junction(&isolated(), 0, 65e-15, ghz(5.0), MethodVariant::ZMethod0, &opts).unwrap();
        assert!((l * 1e9 - 15.59).abs() < 0.01);
        assert!((to_ghz(q.omega) - 5.0).abs() < 1e-6);
    }

    #[test]
    fn charging_energy_lowers_required_inductance() {
        let (l, _) =
            tune_junction(&isolated(), 0, 65e-15, ghz(5.0), MethodVariant::ZMethod0, &SolveOptions::default()).unwrap();
        assert!(l < 15.59e-9);
    }

    #[test]
    fn tuning_at_current_frequency_is_fixed_point() {
        let p = isolated();
        let opts = SolveOptions::default();
        let q = solve_qubit_seeded(&p, 0, 14e-9, 65e-15, MethodVariant::ZMethod, &opts, None).unwrap();
        let (l, _) = tune_junction_from(&p, 0, 65e-15, q.omega, MethodVariant::ZMethod, &opts, 14e-9).unwrap();
        assert_eq!(l, 14e-9);
    }

    #[test]
    fn bus_sweep_rows_are_ordered_and_retuned() {
        let n = BusDevice::default().netlist(7.0).unwrap();
        let spec = SweepSpec {
            parameter: SweepParameter::BusFrequency {
                inductor: "lb".into(),
                capacitor: "cb".into(),
            },
            start: 6.5,
            stop: 8.5,
            points: 5,
            pair: (0, 1),
            junctions: Junctions::Targets(vec![ghz(5.0), ghz(5.2)]),
            solve: SolveOptions::default(),
            oracle: None,
        };
        let rows = run_sweep(&SweepSource::Netlist(n), &spec).unwrap();
        assert_eq!(rows.len(), 5);
        for w in rows.windows(2) {
            assert!(w[0].param < w[1].param);
            let (a, b) = (w[0].zz(MethodVariant::ZMethod).unwrap(), w[1].zz(MethodVariant::ZMethod).unwrap());
            assert!(a > b, "ZZ falls as the bus moves away");
        }
        let first = rows[0].analysis.as_ref().unwrap();
        assert!((to_ghz(first.plain[0].omega) - 5.0).abs() < 1e-6);
        assert!((to_ghz(first.corrected[1].omega) - 5.2).abs() < 1e-6);
    }

    #[test]
    fn bad_point_is_recorded() {
        let n = BusDevice::default().netlist(7.0).unwrap();
        let spec = SweepSpec {
            parameter: SweepParameter::ElementValue { name: "nope".into() },
            start: 1.0,
            stop: 2.0,
            points: 2,
            pair: (0, 1),
            junctions: Junctions::Targets(vec![ghz(5.0), ghz(5.2)]),
            solve: SolveOptions::default(),
            oracle: None,
        };
        let rows = run_sweep(&SweepSource::Netlist(n), &spec).unwrap();
        assert!(rows.iter().all(|r| r.error.is_some()));
    }
}
