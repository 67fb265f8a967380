//! `zz` command implementations. `run` returns the text that would be
//! written to stdout.

pub mod figures;
pub mod fit;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use zzcore::calibrate::{
    analyze_pair, low_frequency_capacitance, port_capacitances, run_sweep, tune_junction, Junctions, OracleSettings,
    PairAnalysis, SweepParameter, SweepRow, SweepSource, SweepSpec,
};
use zzcore::devices::{coupler_netlist, rational_coupler, BusDevice, COUPLER_EPS_EFF};
use zzcore::dispersive::{ImpedanceConvention, MethodVariant, QubitParams, SolveOptions};
use zzcore::microwave::{read_touchstone, read_z_csv, ImpedanceProvider, Interpolation};
use zzcore::netlist::{parse_netlist_with, Netlist, ParseOptions};
use zzcore::oracle::{netlist_oracle_zz, tune_oracle, CosineOrder, LadderOptions, OracleOptions, OracleResult};
use zzcore::units::{ghz, to_ghz, to_khz, to_mhz, FEMTO, NANO};
use zzcore::Error;

pub use figures::Figure;
pub use fit::{fit_linear, LinearFit};

#[derive(Debug, Parser)]
#[command(name = "zz", version, about = "Exchange coupling and ZZ rates of Transmon pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// One-line summary (fit only; other commands fall back to CSV).
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Qubit parameters and couplings for every qubit pair.
    Analyze(AnalyzeArgs),
    /// One-parameter sweep of a pair.
    Sweep(SweepArgs),
    /// Exact diagonalization of a lumped or discretized netlist.
    Oracle(OracleArgs),
    /// Junction inductances that place the qubits at target frequencies.
    Calibrate(CalibrateArgs),
    /// Sweep with every estimate compared against the oracle.
    Compare(SweepArgs),
    /// Least-squares fit of predicted against measured ZZ.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Device {
    /// Two qubits on a lumped LC bus (set --bus-ghz).
    Bus,
    /// Two-arm cancellation coupler.
    Coupler,
    /// Synthetic rational trans-impedance.
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Mode,
    Shunt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Interp {
    Linear,
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Zm0,
    Zm,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    #[arg(long, group = "source")]
    pub netlist: Option<PathBuf>,
    /// Touchstone S-parameters; port count from --ports or the extension.
    #[arg(long, group = "source")]
    pub touchstone: Option<PathBuf>,
    /// Tabulated Z matrix (freq_hz, re_z_i_j, im_z_i_j columns).
    #[arg(long = "z-csv", group = "source")]
    pub z_csv: Option<PathBuf>,
    #[arg(long, group = "source", value_enum)]
    pub device: Option<Device>,
    /// Bare bus frequency of the bus device.
    #[arg(long, default_value_t = 7.0)]
    pub bus_ghz: f64,
    #[arg(long)]
    pub ports: Option<usize>,
    /// Touchstone reference impedance (Ω).
    #[arg(long, default_value_t = 50.0)]
    pub z0: f64,
    /// Shunt capacitance per port (fF).
    #[arg(long, value_delimiter = ',')]
    pub caps: Vec<f64>,
    /// Effective permittivity for lines without EEFF.
    #[arg(long)]
    pub eps_eff: Option<f64>,
    #[arg(long, value_enum, default_value = "mode")]
    pub convention: Convention,
    #[arg(long, value_enum, default_value = "cubic")]
    pub interpolation: Interp,
    /// Drop the charging-energy renormalization of L_J.
    #[arg(long)]
    pub no_charging: bool,
}

#[derive(Debug, Clone, Args)]
pub struct JunctionArgs {
    /// Dressed qubit frequencies (GHz), one per port.
    #[arg(long, value_delimiter = ',', conflicts_with = "lj")]
    pub targets: Vec<f64>,
    /// Junction inductances (nH), one per port.
    #[arg(long, value_delimiter = ',')]
    pub lj: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TruncationArgs {
    /// Levels kept for qubit modes and for every other mode.
    #[arg(long, value_delimiter = ',', num_args = 1..=2)]
    pub levels: Vec<usize>,
    /// Cosine expansion: 4, 6, or exact.
    #[arg(long, default_value = "exact")]
    pub order: String,
    /// Extra Fock states used to build each mode's dressed basis.
    #[arg(long)]
    pub pad: Option<usize>,
    /// Ladder sections per mm for transmission lines.
    #[arg(long)]
    pub segments_per_mm: Option<f64>,
    /// Skip the one-level-up convergence check.
    #[arg(long)]
    pub no_check: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub junctions: JunctionArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub junctions: JunctionArgs,
    /// bus:INDUCTOR:CAPACITOR, qubit:PORT or element:NAME.
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    /// 1-based ports.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub pair: Vec<usize>,
    /// Also run the oracle at every point.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub truncation: TruncationArgs,
    /// Built-in sweep for figure 3, 4, 5 or 7; other sweep flags are ignored.
    #[arg(long)]
    pub plot_data: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub junctions: JunctionArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub pair: Vec<usize>,
    #[command(flatten)]
    pub truncation: TruncationArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Target frequencies (GHz), one per port.
    #[arg(long, value_delimiter = ',', required = true)]
    pub targets: Vec<f64>,
    #[arg(long, value_enum, default_value = "zm")]
    pub variant: Variant,
    /// Print the netlist with tuned junctions instead of the table.
    #[arg(long)]
    pub emit_netlist: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV with pair,measured_zz_khz,f1_ghz,f2_ghz,zfile and optionally
    /// predicted_zz_khz.
    pub records: PathBuf,
    /// Shunt capacitances (fF) for impedance files.
    #[arg(long, value_delimiter = ',')]
    pub caps: Vec<f64>,
    #[arg(long, default_value_t = 50.0)]
    pub z0: f64,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io { path: PathBuf, message: String },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Core(e) => {
                let debug = format!("{e:?}");
                let kind = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("");
                json!({
                    "error": kind,
                    "message": e.to_string(),
                    "line": e.line(),
                    "exit_code": self.exit_code(),
                })
            }
            CliError::Io { path, message } => json!({
                "error": "Io",
                "message": format!("{}: {message}", path.display()),
                "line": null,
                "exit_code": self.exit_code(),
            }),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Core(Error::InvalidArgument(msg.into()))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn run(cli: &Cli) -> CliResult<String> {
    let f = cli.format;
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, f),
        Command::Sweep(a) => cmd_sweep(a, f),
        Command::Oracle(a) => cmd_oracle(a, f),
        Command::Calibrate(a) => cmd_calibrate(a, f),
        Command::Compare(a) => cmd_compare(a, f),
        Command::Fit(a) => cmd_fit(a, f),
    }
}

/// Rounded for JSON output; −0 printed as 0.
fn round(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    let r = (x * s).round() / s;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn opt_round(x: Option<f64>, decimals: i32) -> Value {
    x.filter(|v| v.is_finite()).map_or(Value::Null, |v| json!(round(v, decimals)))
}

fn cell(x: Option<f64>, decimals: usize) -> String {
    x.filter(|v| v.is_finite())
        .map_or(String::new(), |v| format!("{:.*}", decimals, if v == 0.0 { 0.0 } else { v }))
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Loaded impedance source with shunt capacitances per port.
pub struct Loaded {
    pub netlist: Option<Netlist>,
    pub provider: ImpedanceProvider,
    pub capacitances: Vec<f64>,
}

impl Loaded {
    pub fn sweep_source(&self) -> SweepSource {
        match &self.netlist {
            Some(n) => SweepSource::Netlist(n.clone()),
            None => SweepSource::Provider {
                provider: self.provider.clone(),
                capacitances: self.capacitances.clone(),
            },
        }
    }
}

fn ports_from_extension(path: &Path) -> Option<usize> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    ext.strip_prefix('s')?.strip_suffix('p')?.parse().ok()
}

pub fn load_source(s: &SourceArgs) -> CliResult<Loaded> {
    let interp = match s.interpolation {
        Interp::Linear => Interpolation::Linear,
        Interp::Cubic => Interpolation::Cubic,
    };
    let caps: Vec<f64> = s.caps.iter().map(|c| c * FEMTO).collect();
    let netlist = if let Some(path) = &s.netlist {
        let opts = ParseOptions {
            default_eps_eff: s.eps_eff.unwrap_or(ParseOptions::default().default_eps_eff),
        };
        Some(parse_netlist_with(&read(path)?, &opts)?)
    } else {
        match s.device {
            Some(Device::Bus) => Some(BusDevice::default().netlist(s.bus_ghz)?),
            Some(Device::Coupler) => Some(coupler_netlist(s.eps_eff.unwrap_or(COUPLER_EPS_EFF), [12.0, 12.0])?),
            _ => None,
        }
    };
    if let Some(n) = netlist {
        let capacitances = if caps.is_empty() { port_capacitances(&n)? } else { caps };
        return Ok(Loaded {
            provider: ImpedanceProvider::from_netlist(&n)?,
            capacitances,
            netlist: Some(n),
        });
    }
    let provider = if let Some(path) = &s.touchstone {
        let ports = s
            .ports
            .or_else(|| ports_from_extension(path))
            .ok_or_else(|| invalid("touchstone port count unknown; pass --ports"))?;
        let t = read_touchstone(&read(path)?, ports, s.z0, interp)?;
        ImpedanceProvider::Tabulated(if caps.is_empty() { t } else { t.with_shunt_fallback(caps.clone())? })
    } else if let Some(path) = &s.z_csv {
        let t = read_z_csv(&read(path)?, interp)?;
        ImpedanceProvider::Tabulated(if caps.is_empty() { t } else { t.with_shunt_fallback(caps.clone())? })
    } else if s.device == Some(Device::Rational) {
        ImpedanceProvider::RationalZ12(rational_coupler())
    } else {
        return Err(invalid("give --netlist, --touchstone, --z-csv or --device"));
    };
    let capacitances = if caps.is_empty() {
        (0..provider.port_count())
            .map(|p| low_frequency_capacitance(&provider, p))
            .collect::<zzcore::Result<_>>()?
    } else {
        caps
    };
    Ok(Loaded {
        netlist: None,
        provider,
        capacitances,
    })
}

fn solve_options(s: &SourceArgs) -> SolveOptions {
    SolveOptions {
        include_charging_energy: !s.no_charging,
        convention: match s.convention {
            Convention::Mode => ImpedanceConvention::ModeCapacitance,
            Convention::Shunt => ImpedanceConvention::ShuntCapacitance,
        },
        ..Default::default()
    }
}

/// Targets, explicit inductances, or the netlist's own junctions.
fn junctions(j: &JunctionArgs, loaded: &Loaded) -> CliResult<Junctions> {
    let ports = loaded.provider.port_count();
    let check = |v: &[f64], what: &str| {
        if v.len() != ports {
            Err(invalid(format!("{what}: expected {ports} values, got {}", v.len())))
        } else {
            Ok(())
        }
    };
    if !j.targets.is_empty() {
        check(&j.targets, "--targets")?;
        return Ok(Junctions::Targets(j.targets.iter().map(|&f| ghz(f)).collect()));
    }
    if !j.lj.is_empty() {
        check(&j.lj, "--lj")?;
        return Ok(Junctions::Inductances(j.lj.iter().map(|l| l * NANO).collect()));
    }
    match &loaded.netlist {
        Some(n) => Ok(Junctions::Inductances(n.junction_inductances())),
        None => Err(invalid("impedance files need --targets or --lj")),
    }
}

fn parse_pair(p: &[usize], ports: usize) -> CliResult<(usize, usize)> {
    match p {
        [a, b] if *a >= 1 && *b >= 1 && a != b && *a <= ports && *b <= ports => Ok((a - 1, b - 1)),
        _ => Err(invalid(format!("--pair needs two distinct ports in 1..={ports}"))),
    }
}

fn qubit_json(q: &QubitParams) -> Value {
    json!({
        "port": q.port + 1,
        "f_ghz": round(to_ghz(q.omega), 6),
        "l_j_nh": round(q.l_j / NANO, 6),
        "l_nh": round(q.l / NANO, 6),
        "c_ff": round(q.c / FEMTO, 6),
        "e_c_mhz": round(to_mhz(q.e_c), 4),
        "delta_mhz": round(to_mhz(q.delta), 4),
        "alpha_ii": round(q.alpha_ii, 6),
        "z_char_ohm": round(q.z_char, 6),
    })
}

fn pair_label(a: &PairAnalysis) -> String {
    format!("{}-{}", a.report.i + 1, a.report.j + 1)
}

fn pair_json(a: &PairAnalysis) -> Value {
    let r = &a.report;
    json!({
        "pair": pair_label(a),
        "j_mhz": round(to_mhz(r.j_ij), 4),
        "alpha_ij": round(r.alpha_ij, 6),
        "alpha_ji": round(r.alpha_ji, 6),
        "detuning_mhz": round(to_mhz(r.delta_ij), 4),
        "zz_naive_khz": round(to_khz(r.zz.naive), 3),
        "zz_zm0_khz": round(to_khz(r.zz.zm0), 3),
        "zz_zmk0_khz": round(to_khz(r.zz.zmk0), 3),
        "zz_zm_khz": round(to_khz(r.zz.zm), 3),
        "straddling": r.straddling,
        "warnings": r.warnings,
    })
}

pub fn cmd_analyze(a: &AnalyzeArgs, format: Format) -> CliResult<String> {
    let loaded = load_source(&a.source)?;
    let ports = loaded.provider.port_count();
    if ports < 2 {
        return Err(invalid("analysis needs at least two qubit ports"));
    }
    let junctions = junctions(&a.junctions, &loaded)?;
    let opts = solve_options(&a.source);
    let mut pairs = Vec::new();
    for i in 0..ports {
        for j in i + 1..ports {
            pairs.push(analyze_pair(&loaded.provider, &loaded.capacitances, &junctions, (i, j), &opts)?);
        }
    }
    let mut qubits: Vec<Option<(QubitParams, QubitParams)>> = vec![None; ports];
    for p in &pairs {
        for k in 0..2 {
            qubits[p.plain[k].port].get_or_insert((p.plain[k], p.corrected[k]));
        }
    }
    if format == Format::Json {
        let qs: Vec<Value> = qubits
            .iter()
            .flatten()
            .map(|(plain, corrected)| json!({"plain": qubit_json(plain), "corrected": qubit_json(corrected)}))
            .collect();
        let ps: Vec<Value> = pairs.iter().map(pair_json).collect();
        return Ok(to_json(&json!({"qubits": qs, "pairs": ps})));
    }
    let rows: Vec<Vec<String>> = pairs
        .iter()
        .map(|p| {
            let r = &p.report;
            let mut flags = r.warnings.clone();
            if r.straddling {
                flags.push("straddling".into());
            }
            vec![
                pair_label(p),
                cell(Some(to_ghz(p.plain[0].omega)), 6),
                cell(Some(to_ghz(p.plain[1].omega)), 6),
                cell(Some(to_mhz(r.j_ij)), 4),
                cell(Some(to_khz(r.zz.naive)), 3),
                cell(Some(to_khz(r.zz.zm0)), 3),
                cell(Some(to_khz(r.zz.zmk0)), 3),
                cell(Some(to_khz(r.zz.zm)), 3),
                flags.join(";"),
            ]
        })
        .collect();
    Ok(to_csv(
        &[
            "pair",
            "f1_ghz",
            "f2_ghz",
            "j_mhz",
            "zz_naive_khz",
            "zz_zm0_khz",
            "zz_zmk0_khz",
            "zz_zm_khz",
            "flags",
        ],
        &rows,
    ))
}

fn oracle_settings(t: &TruncationArgs) -> CliResult<OracleSettings> {
    let mut options = OracleOptions::default();
    options.order = match t.order.as_str() {
        "exact" | "0" => CosineOrder::Exact,
        "4" => CosineOrder::Quartic,
        "6" => CosineOrder::Sextic,
        other => return Err(invalid(format!("--order must be 4, 6 or exact, got {other}"))),
    };
    match t.levels.as_slice() {
        [] => {}
        [q] => options.truncation.qubit_levels = *q,
        [q, o] => {
            options.truncation.qubit_levels = *q;
            options.truncation.other_levels = *o;
        }
        _ => unreachable!("clap limits --levels to two values"),
    }
    if let Some(p) = t.pad {
        options.truncation.pad = p;
    }
    options.convergence_check = !t.no_check;
    let mut ladder = LadderOptions::default();
    if let Some(s) = t.segments_per_mm {
        ladder.segments_per_mm = s;
    }
    Ok(OracleSettings { options, ladder })
}

fn parse_parameter(p: &str, ports: usize) -> CliResult<SweepParameter> {
    let parts: Vec<&str> = p.split(':').collect();
    match parts.as_slice() {
        ["bus", l, c] => Ok(SweepParameter::BusFrequency {
            inductor: l.to_string(),
            capacitor: c.to_string(),
        }),
        ["qubit", n] => match n.parse::<usize>() {
            Ok(k) if k >= 1 && k <= ports => Ok(SweepParameter::QubitFrequency { port: k - 1 }),
            _ => Err(invalid(format!("qubit port must be in 1..={ports}, got {n}"))),
        },
        ["element", name] => Ok(SweepParameter::ElementValue { name: name.to_string() }),
        _ => Err(invalid(format!(
            "--param must be bus:L:C, qubit:N or element:NAME, got {p}"
        ))),
    }
}

pub const SWEEP_COLUMNS: [&str; 8] = [
    "param",
    "j_mhz",
    "zz_naive_khz",
    "zz_zm0_khz",
    "zz_zmk0_khz",
    "zz_zm_khz",
    "zz_exact_khz",
    "flags",
];

fn row_flags(r: &SweepRow) -> Vec<String> {
    let mut flags = r.flags.clone();
    if let Some(e) = &r.error {
        flags.push(format!("error:{e}"));
    }
    flags
}

fn sweep_cells(r: &SweepRow) -> Vec<String> {
    let zz = |v| cell(r.zz(v).map(to_khz), 3);
    vec![
        cell(Some(r.param), 6),
        cell(r.j().map(to_mhz), 4),
        zz(MethodVariant::Naive),
        zz(MethodVariant::ZMethod0),
        zz(MethodVariant::ZMethodK0),
        zz(MethodVariant::ZMethod),
        cell(r.oracle.as_ref().map(|o| to_khz(o.zz)), 3),
        row_flags(r).join(";"),
    ]
}

fn sweep_json(r: &SweepRow) -> Value {
    let zz = |v| opt_round(r.zz(v).map(to_khz), 3);
    json!({
        "param": round(r.param, 6),
        "j_mhz": opt_round(r.j().map(to_mhz), 4),
        "zz_naive_khz": zz(MethodVariant::Naive),
        "zz_zm0_khz": zz(MethodVariant::ZMethod0),
        "zz_zmk0_khz": zz(MethodVariant::ZMethodK0),
        "zz_zm_khz": zz(MethodVariant::ZMethod),
        "zz_exact_khz": opt_round(r.oracle.as_ref().map(|o| to_khz(o.zz)), 3),
        "convergence_khz": opt_round(r.oracle.as_ref().and_then(|o| o.convergence).map(to_khz), 3),
        "flags": r.flags,
        "error": r.error,
    })
}

/// Sweep described by the flags, or the built-in one for `--plot-data`.
pub fn sweep_setup(a: &SweepArgs, with_oracle: bool) -> CliResult<(SweepSource, SweepSpec)> {
    if let Some(fig) = a.plot_data {
        return Ok(Figure::from_number(fig)?.setup()?);
    }
    let loaded = load_source(&a.source)?;
    let ports = loaded.provider.port_count();
    let param = a.param.as_deref().ok_or_else(|| invalid("--param is required"))?;
    let (start, stop) = match (a.start, a.stop) {
        (Some(s), Some(e)) => (s, e),
        _ => return Err(invalid("--start and --stop are required")),
    };
    let spec = SweepSpec {
        parameter: parse_parameter(param, ports)?,
        start,
        stop,
        points: a.points,
        pair: parse_pair(&a.pair, ports)?,
        junctions: junctions(&a.junctions, &loaded)?,
        solve: solve_options(&a.source),
        oracle: if with_oracle { Some(oracle_settings(&a.truncation)?) } else { None },
    };
    Ok((loaded.sweep_source(), spec))
}

pub fn cmd_sweep(a: &SweepArgs, format: Format) -> CliResult<String> {
    let (source, spec) = sweep_setup(a, a.oracle)?;
    let rows = run_sweep(&source, &spec)?;
    if format == Format::Json {
        return Ok(to_json(&Value::Array(rows.iter().map(sweep_json).collect())));
    }
    if let Some(fig) = a.plot_data {
        let fig = Figure::from_number(fig)?;
        let keep: Vec<usize> = fig
            .columns()
            .iter()
            .map(|c| SWEEP_COLUMNS.iter().position(|s| s == c).expect("known column"))
            .collect();
        let mut header = vec![fig.axis()];
        header.extend(fig.columns());
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                let cells = sweep_cells(r);
                std::iter::once(cells[0].clone())
                    .chain(keep.iter().map(|&k| cells[k].clone()))
                    .collect()
            })
            .collect();
        return Ok(to_csv(&header, &table));
    }
    Ok(to_csv(&SWEEP_COLUMNS, &rows.iter().map(sweep_cells).collect::<Vec<_>>()))
}

/// Median |estimate − oracle| per method (rad/s) over rows where both
/// exist, in `MethodVariant::ALL` order.
pub fn median_abs_errors(rows: &[SweepRow]) -> [Option<f64>; 4] {
    MethodVariant::ALL.map(|v| {
        let mut e: Vec<f64> = rows
            .iter()
            .filter_map(|r| Some((r.zz(v)? - r.oracle.as_ref()?.zz).abs()))
            .collect();
        if e.is_empty() {
            return None;
        }
        e.sort_by(f64::total_cmp);
        let m = e.len();
        Some(if m % 2 == 1 { e[m / 2] } else { 0.5 * (e[m / 2 - 1] + e[m / 2]) })
    })
}

pub fn cmd_compare(a: &SweepArgs, format: Format) -> CliResult<String> {
    let (source, mut spec) = sweep_setup(a, true)?;
    if spec.oracle.is_none() {
        spec.oracle = Some(oracle_settings(&a.truncation)?);
    }
    let rows = run_sweep(&source, &spec)?;
    let medians = median_abs_errors(&rows);
    if format == Format::Json {
        let table: Vec<Value> = rows
            .iter()
            .map(|r| {
                let exact = r.oracle.as_ref().map(|o| o.zz);
                let mut v = sweep_json(r);
                for m in MethodVariant::ALL {
                    let err = r.zz(m).zip(exact).map(|(z, x)| to_khz(z - x));
                    v[format!("err_{}_khz", m.label())] = opt_round(err, 3);
                }
                v
            })
            .collect();
        let summary: serde_json::Map<String, Value> = MethodVariant::ALL
            .iter()
            .zip(medians)
            .map(|(m, e)| (m.label().to_string(), opt_round(e.map(to_khz), 3)))
            .collect();
        return Ok(to_json(&json!({"rows": table, "median_abs_error_khz": summary})));
    }
    let mut header = vec!["param", "zz_exact_khz"];
    let names: Vec<(String, String)> = MethodVariant::ALL
        .iter()
        .map(|m| (format!("zz_{}_khz", m.label()), format!("err_{}_khz", m.label())))
        .collect();
    for (z, e) in &names {
        header.push(z);
        header.push(e);
    }
    header.extend(["convergence_khz", "flags"]);
    let mut table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let exact = r.oracle.as_ref().map(|o| o.zz);
            let mut cells = vec![cell(Some(r.param), 6), cell(exact.map(to_khz), 3)];
            for m in MethodVariant::ALL {
                cells.push(cell(r.zz(m).map(to_khz), 3));
                cells.push(cell(r.zz(m).zip(exact).map(|(z, x)| to_khz(z - x)), 3));
            }
            cells.push(cell(r.oracle.as_ref().and_then(|o| o.convergence).map(to_khz), 3));
            cells.push(row_flags(r).join(";"));
            cells
        })
        .collect();
    let mut last = vec!["median_abs_error".to_string(), String::new()];
    for e in medians {
        last.push(String::new());
        last.push(cell(e.map(to_khz), 3));
    }
    last.extend([String::new(), String::new()]);
    table.push(last);
    Ok(to_csv(&header, &table))
}

fn oracle_json(r: &OracleResult) -> Value {
    json!({
        "zz_khz": round(to_khz(r.zz), 3),
        "f1_ghz": round(to_ghz(r.qubit_frequencies[0]), 6),
        "f2_ghz": round(to_ghz(r.qubit_frequencies[1]), 6),
        "mode_frequencies_ghz": r.mode_frequencies.iter().map(|&w| round(to_ghz(w), 6)).collect::<Vec<_>>(),
        "overlaps": r.overlaps.iter().map(|&o| round(o, 6)).collect::<Vec<_>>(),
        "dimension": r.dimension,
        "convergence_khz": opt_round(r.convergence.map(to_khz), 3),
        "converged": r.converged,
    })
}

pub fn cmd_oracle(a: &OracleArgs, format: Format) -> CliResult<String> {
    let loaded = load_source(&a.source)?;
    let netlist = loaded
        .netlist
        .as_ref()
        .ok_or_else(|| invalid("the oracle needs a netlist or a lumped device"))?;
    let pair = parse_pair(&a.pair, loaded.provider.port_count())?;
    let settings = oracle_settings(&a.truncation)?;
    let (tuned, r) = match junctions(&a.junctions, &loaded)? {
        Junctions::Targets(t) => {
            let (n, r) = tune_oracle(netlist, pair, [t[pair.0], t[pair.1]], &settings.ladder, &settings.options)?;
            (n.junction_inductances(), r)
        }
        Junctions::Inductances(l) => {
            let mut n = netlist.clone();
            for (port, &v) in l.iter().enumerate() {
                n.set_junction_inductance(port, v)?;
            }
            let r = netlist_oracle_zz(&n, pair, &settings.ladder, &settings.options)?;
            (l, r)
        }
    };
    if format == Format::Json {
        let mut v = oracle_json(&r);
        v["l_j_nh"] = json!(tuned.iter().map(|l| round(l / NANO, 6)).collect::<Vec<_>>());
        return Ok(to_json(&v));
    }
    let row = vec![
        format!("{}-{}", pair.0 + 1, pair.1 + 1),
        cell(Some(to_ghz(r.qubit_frequencies[0])), 6),
        cell(Some(to_ghz(r.qubit_frequencies[1])), 6),
        cell(Some(to_khz(r.zz)), 3),
        cell(r.convergence.map(to_khz), 3),
        r.dimension.to_string(),
        r.converged.to_string(),
    ];
    Ok(to_csv(
        &["pair", "f1_ghz", "f2_ghz", "zz_exact_khz", "convergence_khz", "dimension", "converged"],
        &[row],
    ))
}

pub fn cmd_calibrate(a: &CalibrateArgs, format: Format) -> CliResult<String> {
    let loaded = load_source(&a.source)?;
    let ports = loaded.provider.port_count();
    if a.targets.len() != ports {
        return Err(invalid(format!("--targets: expected {ports} values, got {}", a.targets.len())));
    }
    let variant = match a.variant {
        Variant::Zm0 => MethodVariant::ZMethod0,
        Variant::Zm => MethodVariant::ZMethod,
    };
    let opts = solve_options(&a.source);
    let mut tuned = Vec::with_capacity(ports);
    for (p, &f) in a.targets.iter().enumerate() {
        tuned.push(tune_junction(&loaded.provider, p, loaded.capacitances[p], ghz(f), variant, &opts)?.1);
    }
    if a.emit_netlist {
        let mut n = loaded
            .netlist
            .clone()
            .ok_or_else(|| invalid("--emit-netlist needs a netlist source"))?;
        for q in &tuned {
            n.set_junction_inductance(q.port, q.l_j)?;
        }
        return Ok(n.to_text());
    }
    if format == Format::Json {
        return Ok(to_json(&Value::Array(tuned.iter().map(qubit_json).collect())));
    }
    let rows: Vec<Vec<String>> = tuned
        .iter()
        .map(|q| {
            vec![
                (q.port + 1).to_string(),
                cell(Some(to_ghz(q.omega)), 6),
                cell(Some(q.l_j / NANO), 6),
                cell(Some(q.c / FEMTO), 6),
                cell(Some(to_mhz(q.delta)), 4),
                cell(Some(q.alpha_ii), 6),
            ]
        })
        .collect();
    Ok(to_csv(&["port", "f_ghz", "l_j_nh", "c_ff", "delta_mhz", "alpha_ii"], &rows))
}

#[derive(Debug, Clone, serde::Deserialize)]
struct RecordRow {
    pair: String,
    measured_zz_khz: f64,
    f1_ghz: f64,
    f2_ghz: f64,
    #[serde(default)]
    zfile: Option<String>,
    #[serde(default)]
    predicted_zz_khz: Option<f64>,
}

/// "1-2", "Q1-Q2" or "q1_q2" → zero-based ports.
fn parse_pair_id(id: &str) -> Option<(usize, usize)> {
    let nums: Vec<usize> = id
        .split(|c: char| !c.is_ascii_digit())
        .filter(|s| !s.is_empty())
        .filter_map(|s| s.parse().ok())
        .collect();
    match nums.as_slice() {
        [a, b] if *a >= 1 && *b >= 1 && a != b => Some((a - 1, b - 1)),
        _ => None,
    }
}

fn predict(rec: &RecordRow, base: &Path, a: &FitArgs) -> CliResult<f64> {
    let file = rec
        .zfile
        .as_deref()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| invalid(format!("record {}: no prediction and no zfile", rec.pair)))?;
    let path = base.join(file);
    let mut source = SourceArgs {
        netlist: None,
        touchstone: None,
        z_csv: None,
        device: None,
        bus_ghz: 7.0,
        ports: None,
        z0: a.z0,
        caps: a.caps.clone(),
        eps_eff: None,
        convention: Convention::Mode,
        interpolation: Interp::Cubic,
        no_charging: false,
    };
    if ports_from_extension(&path).is_some() {
        source.touchstone = Some(path);
    } else if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        source.z_csv = Some(path);
    } else {
        source.netlist = Some(path);
    }
    let loaded = load_source(&source)?;
    let ports = loaded.provider.port_count();
    let pair = match parse_pair_id(&rec.pair) {
        Some(p) if p.0 < ports && p.1 < ports => p,
        _ if ports == 2 => (0, 1),
        _ => return Err(invalid(format!("cannot read ports from pair id {}", rec.pair))),
    };
    let mut targets = vec![ghz(5.0); ports];
    targets[pair.0] = ghz(rec.f1_ghz);
    targets[pair.1] = ghz(rec.f2_ghz);
    let an = analyze_pair(
        &loaded.provider,
        &loaded.capacitances,
        &Junctions::Targets(targets),
        pair,
        &solve_options(&source),
    )?;
    Ok(to_khz(an.report.zz.zm))
}

pub fn cmd_fit(a: &FitArgs, format: Format) -> CliResult<String> {
    let text = read(&a.records)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let base = a.records.parent().unwrap_or(Path::new("."));
    let mut points = Vec::new();
    for (k, rec) in reader.deserialize::<RecordRow>().enumerate() {
        let rec = rec.map_err(|e| {
            CliError::Core(Error::Syntax {
                line: e.position().map_or(k + 2, |p| p.line() as usize),
                message: e.to_string(),
            })
        })?;
        if !rec.measured_zz_khz.is_finite() {
            return Err(invalid(format!("record {}: measured ZZ is not finite", rec.pair)));
        }
        let y = match rec.predicted_zz_khz {
            Some(y) => y,
            None => predict(&rec, base, a)?,
        };
        points.push((rec.measured_zz_khz, y));
    }
    let f = fit_linear(&points)?;
    Ok(match format {
        Format::Text => format!("{}\n", f.summary()),
        Format::Json => to_json(&json!({
            "slope": round(f.slope, 6),
            "intercept_khz": round(f.intercept, 3),
            "sigma_khz": round(f.sigma, 3),
            "n": f.n,
            "summary": f.summary(),
        })),
        Format::Csv => to_csv(
            &["slope", "intercept_khz", "sigma_khz", "n"],
            &[vec![
                cell(Some(f.slope), 6),
                cell(Some(f.intercept), 3),
                cell(Some(f.sigma), 3),
                f.n.to_string(),
            ]],
        ),
    })
}
