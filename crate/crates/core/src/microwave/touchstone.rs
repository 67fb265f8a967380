//! Touchstone v1 S-parameter files, converted to Z on read.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::tabulated::{Interpolation, TabulatedZ};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    RealImag,
    MagAngle,
    DbAngle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OptionLine {
    unit: f64,
    format: DataFormat,
    resistance: Option<f64>,
}

fn parse_option_line(line: &str) -> Result<OptionLine> {
    let mut opt = OptionLine {
        unit: 1e9,
        format: DataFormat::MagAngle,
        resistance: None,
    };
    let tokens: Vec<String> = line
        .trim_start_matches('#')
        .split_whitespace()
        .map(|t| t.to_ascii_uppercase())
        .collect();
    let mut k = 0;
    while k < tokens.len() {
        match tokens[k].as_str() {
            "HZ" => opt.unit = 1.0,
            "KHZ" => opt.unit = 1e3,
            "MHZ" => opt.unit = 1e6,
            "GHZ" => opt.unit = 1e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(Error::Touchstone(format!(
                    "only S-parameter files are supported, found `{}`",
                    tokens[k]
                )))
            }
            "RI" => opt.format = DataFormat::RealImag,
            "MA" => opt.format = DataFormat::MagAngle,
            "DB" => opt.format = DataFormat::DbAngle,
            "R" => {
                k += 1;
                let r = tokens
                    .get(k)
                    .and_then(|t| t.parse::<f64>().ok())
                    .filter(|r| *r > 0.0)
                    .ok_or_else(|| Error::Touchstone("R must be followed by a positive number".into()))?;
                opt.resistance = Some(r);
            }
            other => return Err(Error::Touchstone(format!("unsupported option `{other}`"))),
        }
        k += 1;
    }
    Ok(opt)
}

fn to_complex(a: f64, b: f64, format: DataFormat) -> Complex64 {
    match format {
        DataFormat::RealImag => Complex64::new(a, b),
        DataFormat::MagAngle => Complex64::from_polar(a, b.to_radians()),
        DataFormat::DbAngle => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
    }
}

/// Z = Zref·(I + S)(I − S)⁻¹ for a common real reference impedance.
pub fn s_to_z(s: &DMatrix<Complex64>, z_ref: f64) -> Option<DMatrix<Complex64>> {
    let n = s.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let inv = (&id - s).try_inverse()?;
    Some((&id + s) * inv * Complex64::new(z_ref, 0.0))
}

/// S = (Z − Zref)(Z + Zref)⁻¹.
pub fn z_to_s(z: &DMatrix<Complex64>, z_ref: f64) -> Option<DMatrix<Complex64>> {
    let n = z.nrows();
    let r = DMatrix::<Complex64>::identity(n, n) * Complex64::new(z_ref, 0.0);
    let inv = (z + &r).try_inverse()?;
    Some((z - &r) * inv)
}

/// Parse an `ports`-port Touchstone v1 file. The file's `R` option takes
/// precedence over `reference_impedance`.
pub fn read_touchstone(
    text: &str,
    ports: usize,
    reference_impedance: f64,
    order: Interpolation,
) -> Result<TabulatedZ> {
    if !(1..=4).contains(&ports) {
        return Err(Error::Touchstone(format!("unsupported port count {ports}")));
    }
    let mut option: Option<OptionLine> = None;
    let mut numbers = Vec::new();
    for raw in text.lines() {
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if option.is_some() {
                return Err(Error::Touchstone("more than one option line".into()));
            }
            option = Some(parse_option_line(line)?);
            continue;
        }
        if line.starts_with('[') {
            return Err(Error::Touchstone("Touchstone v2 keywords are not supported".into()));
        }
        for tok in line.split_whitespace() {
            numbers.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::Touchstone(format!("bad number `{tok}`")))?,
            );
        }
    }
    let opt = option.unwrap_or(OptionLine {
        unit: 1e9,
        format: DataFormat::MagAngle,
        resistance: None,
    });
    let z_ref = opt.resistance.unwrap_or(reference_impedance);
    let per_record = 1 + 2 * ports * ports;
    if numbers.is_empty() || numbers.len() % per_record != 0 {
        return Err(Error::Touchstone(format!(
            "{} values do not form whole {ports}-port records",
            numbers.len()
        )));
    }
    let mut omegas = Vec::new();
    let mut values = Vec::new();
    for record in numbers.chunks(per_record) {
        let omega = 2.0 * PI * record[0] * opt.unit;
        if let Some(&last) = omegas.last() {
            if !(omega > last) {
                return Err(Error::Touchstone("frequency axis is not strictly increasing".into()));
            }
        }
        let mut s = DMatrix::zeros(ports, ports);
        for (k, pair) in record[1..].chunks(2).enumerate() {
            // Two-port files list 11 21 12 22; the rest are row-major.
            let (i, j) = if ports == 2 {
                (k % 2, k / 2)
            } else {
                (k / ports, k % ports)
            };
            s[(i, j)] = to_complex(pair[0], pair[1], opt.format);
        }
        let z = s_to_z(&s, z_ref).ok_or_else(|| {
            Error::Touchstone(format!("I − S is singular at {} Hz", record[0] * opt.unit))
        })?;
        omegas.push(omega);
        values.push(
            (0..ports)
                .map(|i| (0..ports).map(|j| Some(z[(i, j)])).collect())
                .collect(),
        );
    }
    TabulatedZ::from_samples(omegas, ports, &values, order)
}

/// Serialize S-parameters derived from impedance samples (RI, Hz).
pub fn write_touchstone(samples: &[(f64, DMatrix<Complex64>)], z_ref: f64) -> Result<String> {
    let mut out = format!("# HZ S RI R {z_ref}\n");
    for (omega, z) in samples {
        let n = z.nrows();
        let s = z_to_s(z, z_ref).ok_or_else(|| Error::Touchstone("Z + Zref singular".into()))?;
        out.push_str(&format!("{:e}", omega / (2.0 * PI)));
        for k in 0..n * n {
            let (i, j) = if n == 2 { (k % 2, k / 2) } else { (k / n, k % n) };
            out.push_str(&format!(" {:e} {:e}", s[(i, j)].re, s[(i, j)].im));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matched_load_gives_reference_impedance() {
        let text = "# GHz S RI R 50\n1 0 0 0 0 0 0 0 0\n2 0 0 0 0 0 0 0 0\n";
        let t = read_touchstone(text, 2, 75.0, Interpolation::Cubic).unwrap();
        let z = t.impedance(2.0 * PI * 1.5e9).unwrap();
        assert!((z[(0, 0)] - Complex64::new(50.0, 0.0)).norm() < 1e-12);
        assert!(z[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn argument_is_fallback_reference() {
        let text = "# GHz S RI\n1 0 0\n2 0 0\n";
        let t = read_touchstone(text, 1, 75.0, Interpolation::Cubic).unwrap();
        let z = t.impedance(2.0 * PI * 1.5e9).unwrap();
        assert!((z[(0, 0)].re - 75.0).abs() < 1e-12);
    }

    #[test]
    fn ma_and_ri_agree() {
        let s21 = Complex64::new(0.3, -0.4);
        let s11 = Complex64::new(-0.1, 0.2);
        let ri = format!(
            "# MHZ S RI R 50\n1000 {} {} {} {} {} {} {} {}\n2000 {} {} {} {} {} {} {} {}\n",
            s11.re, s11.im, s21.re, s21.im, s21.re, s21.im, s11.re, s11.im,
            s11.re, s11.im, s21.re, s21.im, s21.re, s21.im, s11.re, s11.im
        );
        let p = |c: Complex64| format!("{} {}", c.norm(), c.arg().to_degrees());
        let ma = format!(
            "# MHZ S MA R 50\n1000 {} {} {} {}\n2000 {} {} {} {}\n",
            p(s11), p(s21), p(s21), p(s11), p(s11), p(s21), p(s21), p(s11)
        );
        let a = read_touchstone(&ri, 2, 50.0, Interpolation::Cubic).unwrap();
        let b = read_touchstone(&ma, 2, 50.0, Interpolation::Cubic).unwrap();
        let w = 2.0 * PI * 1.5e9;
        assert!((a.impedance(w).unwrap() - b.impedance(w).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn capacitor_round_trip() {
        let c = 65e-15;
        let samples: Vec<(f64, DMatrix<Complex64>)> = (1..=8)
            .map(|k| {
                let w = 2.0 * PI * 1e9 * k as f64;
                (w, DMatrix::from_element(1, 1, Complex64::new(0.0, -1.0 / (w * c))))
            })
            .collect();
        let text = write_touchstone(&samples, 50.0).unwrap();
        let t = read_touchstone(&text, 1, 50.0, Interpolation::Cubic).unwrap();
        for (w, z) in &samples {
            let back = t.impedance(*w).unwrap();
            assert!((back[(0, 0)] - z[(0, 0)]).norm() <= 1e-9 * z[(0, 0)].norm());
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_touchstone("# GHz Z RI\n1 0 0\n", 1, 50.0, Interpolation::Cubic).is_err());
        assert!(read_touchstone("# GHz S RI\n2 0 0\n1 0 0\n", 1, 50.0, Interpolation::Cubic).is_err());
        assert!(read_touchstone("# GHz S RI\n1 1 0\n2 0 0\n", 1, 50.0, Interpolation::Cubic).is_err());
    }
}
