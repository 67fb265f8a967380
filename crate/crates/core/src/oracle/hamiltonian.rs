use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::modes::LinearModes;
use crate::error::{Error, Result};

/// How the junction nonlinearity −E_J(cos φ − 1 + φ²/2) is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CosineOrder {
    Quartic,
    Sextic,
    /// Full cosine from closed-form displacement matrix elements.
    #[default]
    Exact,
}

impl CosineOrder {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            4 => Ok(Self::Quartic),
            6 => Ok(Self::Sextic),
            0 => Ok(Self::Exact),
            _ => Err(Error::InvalidArgument(format!(
                "cosine order must be 4, 6 or 0 (exact), got {order}"
            ))),
        }
    }

    fn max_power(self) -> usize {
        match self {
            Self::Quartic => 4,
            Self::Sextic => 6,
            Self::Exact => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub qubit_levels: usize,
    pub other_levels: usize,
    /// Keep only product states with at most this many total excitations.
    pub max_excitations: Option<usize>,
    /// Extra Fock levels used when building each mode's dressed basis.
    pub pad: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            qubit_levels: 10,
            other_levels: 8,
            max_excitations: None,
            pad: 10,
        }
    }
}

impl Truncation {
    pub fn raised(&self) -> Self {
        Self {
            qubit_levels: self.qubit_levels + 1,
            other_levels: self.other_levels + 1,
            max_excitations: self.max_excitations.map(|m| m + 1),
            pad: self.pad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub truncation: Truncation,
    pub order: CosineOrder,
    /// false drops every junction term beyond the quadratic one.
    pub nonlinear: bool,
    /// Repeat with every truncation raised by one level.
    pub convergence_check: bool,
    /// rad/s; a larger convergence metric marks the result non-converged.
    pub tolerance: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            truncation: Truncation::default(),
            order: CosineOrder::Exact,
            nonlinear: true,
            convergence_check: true,
            tolerance: crate::units::khz(0.1),
        }
    }
}

/// Linear modes plus the truncation that turns them into a finite
/// Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    pub modes: LinearModes,
    /// Mode carrying each junction's qubit excitation.
    pub qubit_modes: Vec<usize>,
    pub levels: Vec<usize>,
    pub max_excitations: Option<usize>,
    pub pad: usize,
    pub order: CosineOrder,
    pub nonlinear: bool,
}

impl HamiltonianModel {
    pub fn new(modes: LinearModes, options: &OracleOptions) -> Result<Self> {
        let t = &options.truncation;
        if t.qubit_levels < 4 || t.other_levels < 3 {
            return Err(Error::InvalidArgument(format!(
                "truncation needs ≥ 4 qubit levels and ≥ 3 other levels, got {} and {}",
                t.qubit_levels, t.other_levels
            )));
        }
        if modes.frequencies.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::ZeroFrequencyMode);
        }
        let qubit_modes = assign_qubit_modes(&modes)?;
        let levels = (0..modes.mode_count())
            .map(|k| if qubit_modes.contains(&k) { t.qubit_levels } else { t.other_levels })
            .collect();
        Ok(Self {
            modes,
            qubit_modes,
            levels,
            max_excitations: t.max_excitations,
            pad: t.pad,
            order: options.order,
            nonlinear: options.nonlinear,
        })
    }

    pub fn with_levels_raised(&self) -> Self {
        let mut m = self.clone();
        for l in &mut m.levels {
            *l += 1;
        }
        m.max_excitations = m.max_excitations.map(|x| x + 1);
        m
    }

    /// Product states kept in the truncated space, in lexicographic order.
    pub fn states(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for &l in &self.levels {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (0..l).map(move |n| {
                        let mut t = s.clone();
                        t.push(n);
                        t
                    })
                })
                .collect();
        }
        if let Some(cap) = self.max_excitations {
            out.retain(|s| s.iter().sum::<usize>() <= cap);
        }
        out
    }

    /// Assembled Hamiltonian (rad/s) in the product of per-mode dressed
    /// bases, with the matching state list.
    pub fn hamiltonian(&self) -> (DMatrix<f64>, Vec<Vec<usize>>) {
        let (h, states, _) = self.assemble();
        (h, states)
    }

    /// Also returns the parity (true = odd) of every product state when
    /// each dressed level has a definite parity.
    fn assemble(&self) -> (DMatrix<f64>, Vec<Vec<usize>>, Option<Vec<bool>>) {
        let ops: Vec<ModeOperators> = (0..self.modes.mode_count()).map(|k| self.mode_operators(k)).collect();
        let monomials = self.monomials();
        let states = self.states();
        let dim = states.len();
        let m = ops.len();
        let mut h = DMatrix::zeros(dim, dim);
        let mut diff = Vec::with_capacity(m);
        for s in 0..dim {
            for t in s..dim {
                let (a, b) = (&states[s], &states[t]);
                diff.clear();
                diff.extend((0..m).filter(|&k| a[k] != b[k]));
                let mut v = match diff.as_slice() {
                    [] => ops.iter().enumerate().map(|(k, o)| o.number[(a[k], a[k])]).sum(),
                    [k] => ops[*k].number[(a[*k], b[*k])],
                    _ => 0.0,
                };
                for (coef, q) in &monomials {
                    if diff.iter().any(|&k| q[k] == 0) {
                        continue;
                    }
                    let mut p = *coef;
                    for k in 0..m {
                        if q[k] > 0 {
                            p *= ops[k].powers[q[k] - 1][(a[k], b[k])];
                        }
                    }
                    v += p;
                }
                if self.nonlinear && self.order == CosineOrder::Exact {
                    for (i, &ej) in self.modes.e_j.iter().enumerate() {
                        let (mut re, mut im) = (1.0, 0.0);
                        for k in 0..m {
                            let (dr, di) = &ops[k].displacement[i];
                            let (x, y) = (dr[(a[k], b[k])], di[(a[k], b[k])]);
                            (re, im) = (re * x - im * y, re * y + im * x);
                        }
                        v -= ej * re;
                        if s == t {
                            v += ej;
                        }
                    }
                }
                h[(s, t)] = v;
                h[(t, s)] = v;
            }
        }
        let parity = states
            .iter()
            .map(|st| {
                st.iter()
                    .enumerate()
                    .try_fold(false, |acc, (k, &n)| ops[k].parity[n].map(|odd| acc ^ odd))
            })
            .collect();
        (h, states, parity)
    }

    /// The junction potential is even in the total phase, so states of
    /// opposite total parity never mix and the two blocks are solved apart.
    pub fn spectrum(&self) -> Result<DressedSpectrum> {
        let (h, states, parity) = self.assemble();
        let dim = states.len();
        let bare: Vec<f64> = (0..dim).map(|r| h[(r, r)]).collect();
        let scale = h.amax();
        let blocks: Vec<Vec<usize>> = match parity {
            Some(p) => {
                let even: Vec<usize> = (0..dim).filter(|&i| !p[i]).collect();
                let odd: Vec<usize> = (0..dim).filter(|&i| p[i]).collect();
                let leak = even
                    .iter()
                    .flat_map(|&i| odd.iter().map(move |&j| (i, j)))
                    .fold(0.0f64, |m, (i, j)| m.max(h[(i, j)].abs()));
                if leak <= 1e-10 * scale {
                    vec![even, odd]
                } else {
                    vec![(0..dim).collect()]
                }
            }
            None => vec![(0..dim).collect()],
        };
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(dim);
        let mut vectors_by_block = Vec::new();
        for (b, idx) in blocks.iter().enumerate() {
            if idx.is_empty() {
                vectors_by_block.push(DMatrix::zeros(0, 0));
                continue;
            }
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
            let eig = sub.symmetric_eigen();
            for (c, &e) in eig.eigenvalues.iter().enumerate() {
                pairs.push((e, b, c));
            }
            vectors_by_block.push(eig.eigenvectors);
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut vectors = DMatrix::zeros(dim, dim);
        for (col, &(_, b, c)) in pairs.iter().enumerate() {
            for (r, &i) in blocks[b].iter().enumerate() {
                vectors[(i, col)] = vectors_by_block[b][(r, c)];
            }
        }
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(DressedSpectrum {
            energies: pairs.iter().map(|p| p.0).collect(),
            vectors,
            bare,
            index,
        })
    }

    /// Mode occupation with the qubits of `ports` excited as given.
    pub fn occupation(&self, excitations: &[(usize, usize)]) -> Vec<usize> {
        let mut occ = vec![0; self.modes.mode_count()];
        for &(port, n) in excitations {
            occ[self.qubit_modes[port]] = n;
        }
        occ
    }

    fn mode_operators(&self, k: usize) -> ModeOperators {
        let levels = self.levels[k];
        let w = self.modes.frequencies[k];
        let zpf: Vec<f64> = (0..self.modes.junction_count()).map(|i| self.modes.zpf[(i, k)]).collect();
        let exact = self.nonlinear && self.order == CosineOrder::Exact;
        let qmax = if self.nonlinear { self.order.max_power() } else { 0 };
        let p = levels + self.pad;
        let powers_p: Vec<DMatrix<f64>> = (1..=qmax).map(|q| position_power(q, p)).collect();
        let disp_p: Vec<(DMatrix<f64>, DMatrix<f64>)> =
            if exact { zpf.iter().map(|&c| displacement(c, p)).collect() } else { Vec::new() };
        let number_p = DMatrix::from_fn(p, p, |r, c| if r == c { w * r as f64 } else { 0.0 });

        let basis = if self.nonlinear {
            let mut h = number_p.clone();
            for (i, &c) in zpf.iter().enumerate() {
                let ej = self.modes.e_j[i];
                match self.order {
                    CosineOrder::Exact => {
                        h -= &disp_p[i].0 * ej;
                        h += DMatrix::identity(p, p) * ej;
                        h -= &powers_p[1] * (0.5 * ej * c * c);
                    }
                    CosineOrder::Quartic | CosineOrder::Sextic => {
                        h -= &powers_p[3] * (ej * c.powi(4) / 24.0);
                        if self.order == CosineOrder::Sextic {
                            h += &powers_p[5] * (ej * c.powi(6) / 720.0);
                        }
                    }
                }
            }
            lowest_eigenvectors(h, levels)
        } else {
            DMatrix::identity(p, levels)
        };
        let project = |m: &DMatrix<f64>| basis.transpose() * m * &basis;
        let parity = (0..levels)
            .map(|c| {
                let even: f64 = (0..p).step_by(2).map(|r| basis[(r, c)].powi(2)).sum();
                if even > 1.0 - 1e-12 {
                    Some(false)
                } else if even < 1e-12 {
                    Some(true)
                } else {
                    None
                }
            })
            .collect();
        ModeOperators {
            parity,
            number: project(&number_p),
            powers: powers_p.iter().map(project).collect(),
            displacement: disp_p.iter().map(|(r, i)| (project(r), project(i))).collect(),
        }
    }

    /// Polynomial junction terms as (coefficient, per-mode powers).
    fn monomials(&self) -> Vec<(f64, Vec<usize>)> {
        if !self.nonlinear {
            return Vec::new();
        }
        let m = self.modes.mode_count();
        let degrees: &[(usize, f64)] = match self.order {
            CosineOrder::Exact => &[(2, -0.5)],
            CosineOrder::Quartic => &[(4, -1.0 / 24.0)],
            CosineOrder::Sextic => &[(4, -1.0 / 24.0), (6, 1.0 / 720.0)],
        };
        let mut acc: HashMap<Vec<usize>, f64> = HashMap::new();
        for &(d, scale) in degrees {
            for q in compositions(d, m) {
                let multinomial = factorial(d) / q.iter().map(|&x| factorial(x)).product::<f64>();
                for (i, &ej) in self.modes.e_j.iter().enumerate() {
                    let c: f64 = (0..m).map(|k| self.modes.zpf[(i, k)].powi(q[k] as i32)).product();
                    *acc.entry(q.clone()).or_insert(0.0) += scale * ej * multinomial * c;
                }
            }
        }
        let mut out: Vec<(f64, Vec<usize>)> = acc.into_iter().map(|(q, c)| (c, q)).collect();
        out.sort_by(|a, b| a.1.cmp(&b.1));
        out
    }
}

struct ModeOperators {
    /// Some(true) for an odd dressed level.
    parity: Vec<Option<bool>>,
    number: DMatrix<f64>,
    /// x, x², … in the dressed basis.
    powers: Vec<DMatrix<f64>>,
    /// Real and imaginary parts of exp(i·c_ik·x) per junction.
    displacement: Vec<(DMatrix<f64>, DMatrix<f64>)>,
}

fn assign_qubit_modes(modes: &LinearModes) -> Result<Vec<usize>> {
    let nj = modes.junction_count();
    if nj > modes.mode_count() {
        return Err(Error::Inconsistent(format!(
            "{nj} junctions but only {} modes",
            modes.mode_count()
        )));
    }
    let mut out = vec![usize::MAX; nj];
    let mut taken = vec![false; modes.mode_count()];
    let mut pairs: Vec<(usize, usize, f64)> = (0..nj)
        .flat_map(|i| (0..modes.mode_count()).map(move |k| (i, k)))
        .map(|(i, k)| (i, k, modes.zpf[(i, k)].abs()))
        .collect();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2));
    for (i, k, _) in pairs {
        if out[i] == usize::MAX && !taken[k] {
            out[i] = k;
            taken[k] = true;
        }
    }
    Ok(out)
}

fn lowest_eigenvectors(h: DMatrix<f64>, count: usize) -> DMatrix<f64> {
    let rows = h.nrows();
    let eig = ((&h + h.transpose()) * 0.5).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut w = DMatrix::zeros(rows, count);
    for (c, &i) in order.iter().take(count).enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v.neg_mut();
        }
        w.set_column(c, &v);
    }
    w
}

/// x^q (x = a + a†) on `dim` Fock levels, with every kept element exact.
pub fn position_power(q: usize, dim: usize) -> DMatrix<f64> {
    let big = dim + q;
    let x = DMatrix::from_fn(big, big, |r, c| {
        if r + 1 == c {
            (c as f64).sqrt()
        } else if c + 1 == r {
            (r as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut p = DMatrix::identity(big, big);
    for _ in 0..q {
        p = &p * &x;
    }
    p.view((0, 0), (dim, dim)).into_owned()
}

/// Real and imaginary parts of ⟨m|exp(i·c·(a + a†))|n⟩ on `dim` levels.
pub fn displacement(c: f64, dim: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let x = c * c;
    let g = (-0.5 * x).exp();
    let mut re = DMatrix::zeros(dim, dim);
    let mut im = DMatrix::zeros(dim, dim);
    for m in 0..dim {
        for n in 0..dim {
            let (lo, hi) = (m.min(n), m.max(n));
            let d = hi - lo;
            let ratio: f64 = (lo + 1..=hi).map(|k| 1.0 / (k as f64).sqrt()).product();
            let v = ratio * c.powi(d as i32) * g * laguerre(lo, d as f64, x);
            match d % 4 {
                0 => re[(m, n)] = v,
                1 => im[(m, n)] = v,
                2 => re[(m, n)] = -v,
                _ => im[(m, n)] = -v,
            }
        }
    }
    (re, im)
}

fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + alpha - x);
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// All ways to write `d` as an ordered sum of `m` non-negative parts.
fn compositions(d: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return if d == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=d {
        for mut rest in compositions(d - first, m - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Eigen-decomposition of the truncated Hamiltonian.
#[derive(Debug, Clone)]
pub struct DressedSpectrum {
    /// Ascending, rad/s.
    pub energies: Vec<f64>,
    /// Columns are eigenvectors in the product basis.
    pub vectors: DMatrix<f64>,
    /// Diagonal of the Hamiltonian per product state.
    pub bare: Vec<f64>,
    index: HashMap<Vec<usize>, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub eigenstate: usize,
    pub energy: f64,
    /// Squared overlap with the product state.
    pub overlap: f64,
}

/// Probabilities closer than this are treated as tied.
const TIE: f64 = 1e-9;

impl DressedSpectrum {
    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    /// Eigenstate with the largest overlap onto the product state `occ`.
    pub fn label(&self, occ: &[usize]) -> Result<Label> {
        let name = || format!("{occ:?}");
        let &row = self.index.get(occ).ok_or_else(|| Error::Labeling {
            state: name(),
            overlap: 0.0,
        })?;
        let target = self.bare[row];
        let mut best: Option<(usize, f64)> = None;
        for n in 0..self.dimension() {
            let p = self.vectors[(row, n)].powi(2);
            best = match best {
                None => Some((n, p)),
                Some((_, q)) if p > q + TIE => Some((n, p)),
                Some((b, q))
                    if (p - q).abs() <= TIE
                        && (self.energies[n] - target).abs() < (self.energies[b] - target).abs() =>
                {
                    Some((n, p))
                }
                keep => keep,
            };
        }
        let (n, p) = best.expect("spectrum is non-empty");
        if p < 0.5 {
            return Err(Error::Labeling {
                state: name(),
                overlap: p,
            });
        }
        Ok(Label {
            eigenstate: n,
            energy: self.energies[n],
            overlap: p,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn displacement_matches_matrix_exponential() {
        // exp(i·c·x) via eigen-decomposition of x on a large space.
        let c = 0.4;
        let big = 60;
        let x = position_power(1, big);
        let eig = x.symmetric_eigen();
        let (re, im) = displacement(c, 8);
        for m in 0..8 {
            for n in 0..8 {
                let (mut r, mut i) = (0.0, 0.0);
                for k in 0..big {
                    let w = eig.eigenvectors[(m, k)] * eig.eigenvectors[(n, k)];
                    r += w * (c * eig.eigenvalues[k]).cos();
                    i += w * (c * eig.eigenvalues[k]).sin();
                }
                assert!((re[(m, n)] - r).abs() < 1e-12, "re {m} {n}");
                assert!((im[(m, n)] - i).abs() < 1e-12, "im {m} {n}");
            }
        }
    }

    #[test]
    fn position_power_elements() {
        let x2 = position_power(2, 5);
        // ⟨n|x²|n⟩ = 2n + 1, ⟨n|x²|n+2⟩ = √((n+1)(n+2))
        assert!((x2[(4, 4)] - 9.0).abs() < 1e-12);
        assert!((x2[(1, 3)] - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(4, 3).len(), 15);
        assert_eq!(compositions(6, 3).len(), 28);
        assert!(compositions(2, 4).iter().all(|q| q.iter().sum::<usize>() == 2));
    }
}
