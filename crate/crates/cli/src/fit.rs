//! Least-squares comparison of predicted against measured ZZ rates.

use serde::Serialize;
use zzcore::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard deviation of the residuals y − (a·x + b), with n − 2
    /// degrees of freedom.
    pub sigma: f64,
    pub n: usize,
}

impl LinearFit {
    /// `y = 1.015x − 0.388, σ = 3.7 kHz`
    pub fn summary(&self) -> String {
        let sign = if self.intercept < 0.0 { '−' } else { '+' };
        format!(
            "y = {:.3}x {sign} {:.3}, σ = {:.1} kHz",
            self.slope,
            self.intercept.abs(),
            self.sigma
        )
    }
}

/// Ordinary least squares of y on x. Points are sorted first so the
/// result does not depend on record order.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Fit("non-finite value".into()));
    }
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = p.len() as f64;
    let mx = p.iter().map(|q| q.0).sum::<f64>() / n;
    let my = p.iter().map(|q| q.1).sum::<f64>() / n;
    let sxx: f64 = p.iter().map(|q| (q.0 - mx) * (q.0 - mx)).sum();
    let sxy: f64 = p.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("measured values have zero variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = p.iter().map(|q| (q.1 - (slope * q.0 + intercept)).powi(2)).sum();
    let sigma = if p.len() > 2 { (ss / (n - 2.0)).sqrt() } else { 0.0 };
    Ok(LinearFit {
        slope,
        intercept,
        sigma,
        n: p.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_exact() {
        let pts: Vec<_> = (0..20).map(|k| (k as f64 * 3.7 - 11.0, k as f64 * 3.7 - 11.0)).collect();
        let f = fit_linear(&pts).unwrap();
        assert_eq!((f.slope, f.intercept, f.sigma), (1.0, 0.0, 0.0));
    }

    #[test]
    fn order_does_not_matter() {
        let pts = vec![(1.0, 2.1), (2.0, 3.9), (3.5, 7.2), (0.2, 0.1)];
        let mut rev = pts.clone();
        rev.reverse();
        assert_eq!(fit_linear(&pts).unwrap(), fit_linear(&rev).unwrap());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_linear(&[(1.0, 1.0)]).is_err());
        assert!(fit_linear(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn summary_format() {
        let f = LinearFit {
            slope: 1.015,
            intercept: -0.388,
            sigma: 3.7,
            n: 10,
        };
        assert_eq!(f.summary(), "y = 1.015x − 0.388, σ = 3.7 kHz");
    }
}
