use std::fs;
use std::process::Command as Process;

use clap::Parser;
use serde_json::Value;
use zzcli::{run, Cli};
use zzcore::calibrate::port_capacitances;
use zzcore::devices::BusDevice;
use zzcore::microwave::{write_z_csv, ImpedanceProvider};
use zzcore::units::{ghz, FEMTO};

fn zz(args: &[&str]) -> String {
    let cli = Cli::try_parse_from(std::iter::once("zz").chain(args.iter().copied())).unwrap();
    run(&cli).unwrap_or_else(|e| panic!("{}", e.to_json()))
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&zz(args)).unwrap()
}

#[test]
fn malformed_netlist_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.net");
    fs::write(&path, "C c1 a 0 65\nC c2 b 0 -3\nJJ q a 0 LJ=12\n").unwrap();
    let out = Process::new(env!("CARGO_BIN_EXE_zz"))
        .args(["analyze", "--netlist", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["line"], 2);
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn physics_failure_exits_1() {
    // Identical qubits: the corrected couplings are undefined.
    let out = Process::new(env!("CARGO_BIN_EXE_zz"))
        .args(["analyze", "--device", "rational", "--targets", "5.0,5.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bus_device_report() {
    let v = json(&["analyze", "--device", "bus", "--targets", "5.0,5.2"]);
    let p = &v["pairs"][0];
    assert_eq!(p["pair"], "1-2");
    assert_eq!(v["qubits"][0]["plain"]["f_ghz"], 5.0);
    let zm = p["zz_zm_khz"].as_f64().unwrap();
    assert!(zm > 50.0 && zm < 150.0, "{zm}");
    assert!(p["j_mhz"].as_f64().unwrap().abs() > 1.0);
}

#[test]
fn zero_trans_impedance_gives_zero_coupling() {
    let mut table = String::from("freq_hz,re_z_1_1,im_z_1_1,re_z_1_2,im_z_1_2,re_z_2_1,im_z_2_1,re_z_2_2,im_z_2_2\n");
    for k in 0..200 {
        let f = 3e9 + 2e7 * k as f64;
        let w = 2.0 * std::f64::consts::PI * f;
        table.push_str(&format!("{f},0,{},0,0,0,0,0,{}\n", -1.0 / (w * 65e-15), -1.0 / (w * 60e-15)));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    fs::write(&path, table).unwrap();
    let v = json(&["analyze", "--z-csv", path.to_str().unwrap(), "--targets", "5.0,5.3"]);
    let p = &v["pairs"][0];
    for key in ["j_mhz", "zz_naive_khz", "zz_zm0_khz", "zz_zmk0_khz", "zz_zm_khz"] {
        assert_eq!(p[key].as_f64().unwrap(), 0.0, "{key}");
    }
}

#[test]
fn table_ingestion_matches_circuit() {
    let n = BusDevice::default().netlist(7.0).unwrap();
    let p = ImpedanceProvider::from_netlist(&n).unwrap();
    let samples: Vec<_> = (0..=700)
        .map(|k| {
            let w = ghz(3.0 + 0.005 * k as f64);
            (w, p.impedance_at(w).unwrap().z)
        })
        .collect();
    let caps: Vec<String> = port_capacitances(&n).unwrap().iter().map(|c| format!("{}", c / FEMTO)).collect();
    let caps = caps.join(",");
    let dir = tempfile::tempdir().unwrap();
    let (zpath, npath) = (dir.path().join("bus.csv"), dir.path().join("bus.net"));
    fs::write(&zpath, write_z_csv(&samples)).unwrap();
    fs::write(&npath, n.to_text()).unwrap();
    let from_table = json(&["analyze", "--z-csv", zpath.to_str().unwrap(), "--caps", &caps, "--targets", "5.0,5.2"]);
    let from_netlist = json(&["analyze", "--netlist", npath.to_str().unwrap(), "--targets", "5.0,5.2"]);
    let a = from_table["pairs"][0]["zz_zm_khz"].as_f64().unwrap();
    let b = from_netlist["pairs"][0]["zz_zm_khz"].as_f64().unwrap();
    assert!((a - b).abs() <= 0.005 * b.abs(), "table {a} vs netlist {b}");
}

#[test]
fn output_is_byte_reproducible() {
    let args = ["--format", "csv", "sweep", "--plot-data", "5"];
    assert_eq!(zz(&args), zz(&args));
    let args = ["analyze", "--device", "bus", "--targets", "5.0,5.2"];
    assert_eq!(zz(&args), zz(&args));
}

#[test]
fn sweep_csv_columns() {
    let out = zz(&[
        "--format", "csv", "sweep", "--device", "bus", "--targets", "5.0,5.2", "--param", "bus:lb:cb", "--start",
        "6.5", "--stop", "8.5", "--points", "3",
    ]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "param,j_mhz,zz_naive_khz,zz_zm0_khz,zz_zmk0_khz,zz_zm_khz,zz_exact_khz,flags"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "6.500000");
    assert_eq!(first[6], "");
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn oracle_command_reports_convergence() {
    let v = json(&["oracle", "--device", "bus", "--bus-ghz", "8.0", "--levels", "6,4", "--pad", "6"]);
    assert!(v["zz_khz"].as_f64().unwrap() > 0.0);
    assert!(v["convergence_khz"].as_f64().is_some());
    assert_eq!(v["mode_frequencies_ghz"].as_array().unwrap().len(), 3);
}

#[test]
fn calibrate_then_analyze_round_trip() {
    let net = zz(&["calibrate", "--device", "bus", "--targets", "5.0,5.2", "--variant", "zm0", "--emit-netlist"]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tuned.net");
    fs::write(&path, net).unwrap();
    let v = json(&["analyze", "--netlist", path.to_str().unwrap()]);
    let f1 = v["qubits"][0]["plain"]["f_ghz"].as_f64().unwrap();
    let f2 = v["qubits"][1]["plain"]["f_ghz"].as_f64().unwrap();
    assert!((f1 - 5.0).abs() < 1e-5 && (f2 - 5.2).abs() < 1e-5, "{f1} {f2}");
}

#[test]
fn fit_from_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    fs::write(
        &path,
        "pair,measured_zz_khz,f1_ghz,f2_ghz,zfile,predicted_zz_khz\n\
         1-2,10,5.0,5.2,,10\n1-2,20,5.0,5.2,,20\n2-3,30,5.1,5.3,,30\n",
    )
    .unwrap();
    let text = zz(&["--format", "text", "fit", path.to_str().unwrap()]);
    assert_eq!(text, "y = 1.000x + 0.000, σ = 0.0 kHz\n");
}

#[test]
fn fit_predicts_from_impedance_files() {
    let n = BusDevice::default().netlist(7.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("chip.net"), n.to_text()).unwrap();
    fs::write(
        dir.path().join("records.csv"),
        "pair,measured_zz_khz,f1_ghz,f2_ghz,zfile\nq1-q2,80,5.0,5.2,chip.net\nq1-q2,40,5.0,5.5,chip.net\n",
    )
    .unwrap();
    let v = json(&["fit", dir.path().join("records.csv").to_str().unwrap()]);
    assert_eq!(v["n"], 2);
    assert!(v["slope"].as_f64().unwrap() > 0.0);
}
