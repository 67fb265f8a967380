use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

/// Natural cubic spline through (x_k, y_k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Spline {
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl Spline {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior knots.
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let cc = h1 / 6.0;
                let r = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                let denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (r - a * d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Self { y: y.to_vec(), m }
    }

    fn eval(&self, x: &[f64], k: usize, t: f64, order: Interpolation) -> f64 {
        let h = x[k + 1] - x[k];
        let a = (x[k + 1] - t) / h;
        let b = (t - x[k]) / h;
        let linear = a * self.y[k] + b * self.y[k + 1];
        match order {
            Interpolation::Linear => linear,
            Interpolation::Cubic => {
                linear + ((a * a * a - a) * self.m[k] + (b * b * b - b) * self.m[k + 1]) * h * h / 6.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Entry {
    re: Spline,
    im: Spline,
}

/// Impedance matrix sampled on a frequency grid.
///
/// Missing diagonal entries can fall back to shunt capacitors; a missing
/// off-diagonal entry is taken from its transpose partner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedZ {
    omegas: Vec<f64>,
    ports: usize,
    entries: Vec<Option<Entry>>,
    order: Interpolation,
    shunt_fallback: Option<Vec<f64>>,
}

impl TabulatedZ {
    /// `values[k][i][j]` is Z_ij at `omegas[k]`; `None` marks an entry that
    /// was not supplied.
    pub fn from_samples(
        omegas: Vec<f64>,
        ports: usize,
        values: &[Vec<Vec<Option<Complex64>>>],
        order: Interpolation,
    ) -> Result<Self> {
        if omegas.len() < 2 {
            return Err(Error::Table("need at least two frequency points".into()));
        }
        if omegas.windows(2).any(|w| !(w[1] > w[0])) || !(omegas[0] > 0.0) {
            return Err(Error::Table("frequency axis must be positive and strictly increasing".into()));
        }
        if values.len() != omegas.len() {
            return Err(Error::Table("sample count does not match the grid".into()));
        }
        let mut entries = Vec::with_capacity(ports * ports);
        for i in 0..ports {
            for j in 0..ports {
                let column: Option<Vec<Complex64>> = values.iter().map(|v| v[i][j]).collect();
                let present = values.iter().any(|v| v[i][j].is_some());
                if present && column.is_none() {
                    return Err(Error::Table(format!("entry ({}, {}) has gaps", i + 1, j + 1)));
                }
                entries.push(column.map(|c| {
                    let re: Vec<f64> = c.iter().map(|z| z.re).collect();
                    let im: Vec<f64> = c.iter().map(|z| z.im).collect();
                    Entry {
                        re: Spline::new(&omegas, &re),
                        im: Spline::new(&omegas, &im),
                    }
                }));
            }
        }
        for i in 0..ports {
            for j in 0..ports {
                if i != j && entries[i * ports + j].is_none() && entries[j * ports + i].is_none() {
                    return Err(Error::Table(format!(
                        "neither Z_{}{} nor Z_{}{} is present",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(Self {
            omegas,
            ports,
            entries,
            order,
            shunt_fallback: None,
        })
    }

    /// Shunt capacitances (F) used for diagonal entries absent from the data.
    pub fn with_shunt_fallback(mut self, capacitances: Vec<f64>) -> Result<Self> {
        if capacitances.len() != self.ports || capacitances.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "need {} positive shunt capacitances",
                self.ports
            )));
        }
        self.shunt_fallback = Some(capacitances);
        Ok(self)
    }

    pub fn port_count(&self) -> usize {
        self.ports
    }

    pub fn band(&self) -> (f64, f64) {
        (self.omegas[0], *self.omegas.last().unwrap())
    }

    pub fn has_diagonal(&self, port: usize) -> bool {
        self.entries[port * self.ports + port].is_some()
    }

    pub fn impedance(&self, omega: f64) -> Result<DMatrix<Complex64>> {
        let (lo, hi) = self.band();
        if !(omega >= lo && omega <= hi) {
            return Err(Error::Extrapolation {
                omega,
                min: lo,
                max: hi,
            });
        }
        let k = match self.omegas.binary_search_by(|w| w.total_cmp(&omega)) {
            Ok(k) => k.min(self.omegas.len() - 2),
            Err(k) => k - 1,
        };
        let value = |e: &Entry| {
            Complex64::new(
                e.re.eval(&self.omegas, k, omega, self.order),
                e.im.eval(&self.omegas, k, omega, self.order),
            )
        };
        let n = self.ports;
        let mut z = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                z[(i, j)] = match (&self.entries[i * n + j], &self.entries[j * n + i]) {
                    (Some(e), _) => value(e),
                    (None, Some(e)) if i != j => value(e),
                    _ => match &self.shunt_fallback {
                        Some(c) => Complex64::new(0.0, -1.0 / (omega * c[i])),
                        None => {
                            return Err(Error::Table(format!(
                                "Z_{}{} absent and no shunt capacitance fallback given",
                                i + 1,
                                i + 1
                            )))
                        }
                    },
                };
            }
        }
        Ok(z)
    }
}

/// Parse the Z-table CSV: `freq_hz,re_z_<i>_<j>,im_z_<i>_<j>,...` with
/// 1-based port indices.
pub fn read_z_csv(text: &str, order: Interpolation) -> Result<TabulatedZ> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Table(e.to_string()))?
        .clone();
    if headers.get(0) != Some("freq_hz") {
        return Err(Error::Table("first column must be freq_hz".into()));
    }
    // (column, is_imag, i, j)
    let mut columns = Vec::new();
    let mut ports = 0;
    for (c, name) in headers.iter().enumerate().skip(1) {
        let parts: Vec<&str> = name.split('_').collect();
        let parsed = match parts.as_slice() {
            [part, "z", i, j] if *part == "re" || *part == "im" => {
                match (i.parse::<usize>(), j.parse::<usize>()) {
                    (Ok(i), Ok(j)) if i >= 1 && j >= 1 => Some((c, *part == "im", i - 1, j - 1)),
                    _ => None,
                }
            }
            _ => None,
        };
        let col = parsed.ok_or_else(|| Error::Table(format!("unrecognized column `{name}`")))?;
        ports = ports.max(col.2 + 1).max(col.3 + 1);
        columns.push(col);
    }
    let mut omegas = Vec::new();
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Table(e.to_string()))?;
        let num = |c: usize| -> Result<f64> {
            record
                .get(c)
                .ok_or_else(|| Error::Table(format!("row {}: missing column {c}", row + 2)))?
                .parse::<f64>()
                .map_err(|_| Error::Table(format!("row {}: bad number in column {c}", row + 2)))
        };
        omegas.push(2.0 * PI * num(0)?);
        let mut z = vec![vec![None; ports]; ports];
        for &(c, imag, i, j) in &columns {
            let v = num(c)?;
            let entry: &mut Option<Complex64> = &mut z[i][j];
            let mut cur = entry.unwrap_or_default();
            if imag {
                cur.im = v;
            } else {
                cur.re = v;
            }
            *entry = Some(cur);
        }
        values.push(z);
    }
    TabulatedZ::from_samples(omegas, ports, &values, order)
}

/// Write sampled impedance matrices in the Z-table CSV format.
pub fn write_z_csv(samples: &[(f64, DMatrix<Complex64>)]) -> String {
    let mut out = String::from("freq_hz");
    let n = samples.first().map(|s| s.1.nrows()).unwrap_or(0);
    for i in 1..=n {
        for j in 1..=n {
            out.push_str(&format!(",re_z_{i}_{j},im_z_{i}_{j}"));
        }
    }
    out.push('\n');
    for (omega, z) in samples {
        out.push_str(&format!("{:e}", omega / (2.0 * PI)));
        for i in 0..n {
            for j in 0..n {
                out.push_str(&format!(",{:e},{:e}", z[(i, j)].re, z[(i, j)].im));
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_is_exact_for_lines() {
        let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t - 1.0).collect();
        let s = Spline::new(&x, &y);
        assert!((s.eval(&x, 4, 4.3, Interpolation::Cubic) - (3.0 * 4.3 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let samples: Vec<(f64, DMatrix<Complex64>)> = (1..=5)
            .map(|k| {
                let w = 2.0 * PI * 1e9 * k as f64;
                let z = DMatrix::from_fn(2, 2, |i, j| Complex64::new(0.0, -(1.0 + i as f64 + j as f64) / (w * 1e-13)));
                (w, z)
            })
            .collect();
        let t = read_z_csv(&write_z_csv(&samples), Interpolation::Cubic).unwrap();
        let z = t.impedance(samples[2].0).unwrap();
        assert!((z - &samples[2].1).norm() < 1e-9 * samples[2].1.norm());
    }

    #[test]
    fn outside_grid_is_error() {
        let text = "freq_hz,re_z_1_1,im_z_1_1\n1e9,0,-10\n2e9,0,-5\n";
        let t = read_z_csv(text, Interpolation::Cubic).unwrap();
        assert!(matches!(
            t.impedance(2.0 * PI * 3e9).unwrap_err(),
            Error::Extrapolation { .. }
        ));
    }

    #[test]
    fn non_monotone_rejected() {
        let text = "freq_hz,re_z_1_1,im_z_1_1\n2e9,0,-10\n1e9,0,-5\n";
        assert!(read_z_csv(text, Interpolation::Cubic).is_err());
    }

    #[test]
    fn diagonal_fallback() {
        let text = "freq_hz,re_z_1_2,im_z_1_2\n1e9,0,0\n9e9,0,0\n";
        let t = read_z_csv(text, Interpolation::Cubic).unwrap();
        assert!(t.impedance(2.0 * PI * 5e9).is_err());
        let t = t.with_shunt_fallback(vec![65e-15, 65e-15]).unwrap();
        let z = t.impedance(2.0 * PI * 5e9).unwrap();
        assert!((z[(0, 0)].im + 489.7).abs() < 0.1);
        assert_eq!(z[(1, 0)], Complex64::new(0.0, 0.0));
    }
}
