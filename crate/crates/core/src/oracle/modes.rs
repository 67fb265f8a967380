use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::netlist::{node_capacitance_matrix, stamp_branch, ElementKind, Netlist, ReductionOptions};
use crate::units::{josephson_energy, HBAR, PHI0_REDUCED};

/// Normal modes of the circuit with every junction replaced by its linear
/// inductance.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModes {
    /// rad/s, ascending.
    pub frequencies: Vec<f64>,
    /// Junction i × mode k zero-point phase amplitude.
    pub zpf: DMatrix<f64>,
    /// Josephson energies (rad/s).
    pub e_j: Vec<f64>,
}

impl LinearModes {
    pub fn mode_count(&self) -> usize {
        self.frequencies.len()
    }

    pub fn junction_count(&self) -> usize {
        self.e_j.len()
    }
}

/// Solve K·v = ω²·C·v over node fluxes. Nodes without capacitance are
/// eliminated first.
pub fn linear_normal_modes(netlist: &Netlist) -> Result<LinearModes> {
    netlist.require_junction()?;
    if netlist.has_lines() {
        return Err(Error::InvalidArgument(
            "transmission lines must be discretized before mode analysis".into(),
        ));
    }
    let n = netlist.node_count();
    let c = node_capacitance_matrix(netlist, &ReductionOptions::default());
    let mut k = DMatrix::zeros(n, n);
    let mut l_j = Vec::new();
    for e in &netlist.elements {
        let (a, b) = (e.terminals.0.index(), e.terminals.1.index());
        match e.kind {
            ElementKind::Inductor { inductance } => stamp_branch(&mut k, a, b, 1.0 / inductance),
            ElementKind::JosephsonJunction { inductance, .. } => {
                stamp_branch(&mut k, a, b, 1.0 / inductance);
                l_j.push(inductance);
            }
            _ => {}
        }
    }

    let c_scale = c.diagonal().amax();
    let massive: Vec<usize> = (0..n).filter(|&i| c[(i, i)] > 1e-9 * c_scale).collect();
    let massless: Vec<usize> = (0..n).filter(|&i| c[(i, i)] <= 1e-9 * c_scale).collect();
    if massive.is_empty() {
        return Err(Error::SingularMass("no node carries capacitance".into()));
    }
    let sub = |m: &DMatrix<f64>, r: &[usize], s: &[usize]| DMatrix::from_fn(r.len(), s.len(), |i, j| m[(r[i], s[j])]);
    let c_aa = sub(&c, &massive, &massive);
    let k_aa = sub(&k, &massive, &massive);
    // Massless fluxes follow the massive ones: φ_b = −K_bb⁻¹·K_ba·φ_a.
    let (k_eff, follow) = if massless.is_empty() {
        (k_aa, DMatrix::zeros(0, massive.len()))
    } else {
        let k_bb = sub(&k, &massless, &massless);
        let k_ba = sub(&k, &massless, &massive);
        let lu = k_bb.lu();
        let follow = -lu
            .solve(&k_ba)
            .ok_or_else(|| Error::SingularMass("capacitance-free node is not inductively anchored".into()))?;
        if !follow.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularMass("capacitance-free node elimination failed".into()));
        }
        let k_ab = sub(&k, &massive, &massless);
        (&k_aa + &k_ab * &follow, follow)
    };

    let chol = c_aa
        .cholesky()
        .ok_or_else(|| Error::SingularMass("capacitance matrix is not positive definite".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::SingularMass("capacitance factor not invertible".into()))?;
    let a = &l_inv * &k_eff * l_inv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let eig = a.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let top = eig.eigenvalues.amax();
    let m = massive.len();
    let mut frequencies = Vec::with_capacity(m);
    let ports = &netlist.qubit_ports;
    let mut zpf = DMatrix::zeros(ports.len(), m);
    for (col, &idx) in order.iter().enumerate() {
        let w2 = eig.eigenvalues[idx];
        if !(w2 > 1e-12 * top) {
            return Err(Error::ZeroFrequencyMode);
        }
        let w = w2.sqrt();
        frequencies.push(w);
        // v normalized so that vᵀ·C·v = 1.
        let v_a: DVector<f64> = l_inv.transpose() * eig.eigenvectors.column(idx);
        let v_b = &follow * &v_a;
        let mut full = vec![0.0; n];
        for (r, &i) in massive.iter().enumerate() {
            full[i] = v_a[r];
        }
        for (r, &i) in massless.iter().enumerate() {
            full[i] = v_b[r];
        }
        let scale = (HBAR / (2.0 * w)).sqrt() / PHI0_REDUCED;
        for (p, port) in ports.iter().enumerate() {
            let flux = |t: crate::netlist::Node| t.index().map_or(0.0, |i| full[i]);
            zpf[(p, col)] = (flux(port.terminals.0) - flux(port.terminals.1)) * scale;
        }
    }
    // Fix the arbitrary eigenvector sign: largest junction amplitude positive.
    for col in 0..m {
        let column = zpf.column(col);
        let pivot = column.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if pivot < 0.0 {
            zpf.column_mut(col).neg_mut();
        }
    }
    Ok(LinearModes {
        frequencies,
        zpf,
        e_j: l_j.iter().map(|&l| josephson_energy(l)).collect(),
    })
}
