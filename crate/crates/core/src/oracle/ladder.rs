use crate::error::{Error, Result};
use crate::netlist::{line_capacitance, line_inductance, ElementKind, Netlist, NetlistBuilder};
use crate::units::{FEMTO, MILLI, NANO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOptions {
    pub segments_per_mm: f64,
    /// Upper bound on the number of dynamical nodes after discretization.
    pub mode_budget: Option<usize>,
}

impl Default for LadderOptions {
    fn default() -> Self {
        Self {
            segments_per_mm: 10.0,
            mode_budget: Some(12),
        }
    }
}

/// Replace every line by `segments_per_line` π-sections.
pub fn discretize_lines(netlist: &Netlist, segments_per_line: usize) -> Result<Netlist> {
    if segments_per_line == 0 {
        return Err(Error::InvalidArgument("segments_per_line must be at least 1".into()));
    }
    let counts = vec![segments_per_line; line_count(netlist)];
    discretize_with(netlist, &counts)
}

/// Segment counts from a density, trimmed to respect the mode budget.
pub fn discretize_lines_auto(netlist: &Netlist, options: &LadderOptions) -> Result<Netlist> {
    let mut counts: Vec<usize> = netlist
        .elements
        .iter()
        .filter_map(|e| match e.kind {
            ElementKind::TransmissionLine { length, .. } => {
                Some(((length / MILLI * options.segments_per_mm).round() as usize).max(1))
            }
            _ => None,
        })
        .collect();
    if let Some(budget) = options.mode_budget {
        let base = netlist.node_count();
        while base + counts.iter().map(|n| n - 1).sum::<usize>() > budget {
            let (k, &n) = counts
                .iter()
                .enumerate()
                .max_by_key(|(_, &n)| n)
                .expect("loop only runs with lines present");
            if n == 1 {
                break;
            }
            counts[k] -= 1;
        }
    }
    discretize_with(netlist, &counts)
}

fn line_count(netlist: &Netlist) -> usize {
    netlist
        .elements
        .iter()
        .filter(|e| matches!(e.kind, ElementKind::TransmissionLine { .. }))
        .count()
}

fn discretize_with(netlist: &Netlist, counts: &[usize]) -> Result<Netlist> {
    let mut b = NetlistBuilder::new();
    let mut line = 0;
    for e in &netlist.elements {
        let n1 = netlist.node_name(e.terminals.0).to_string();
        let n2 = netlist.node_name(e.terminals.1).to_string();
        match e.kind {
            ElementKind::TransmissionLine { z0, length, eps_eff } => {
                let n = counts[line];
                line += 1;
                let l_seg = line_inductance(z0, length, eps_eff) / n as f64;
                let c_seg = line_capacitance(z0, length, eps_eff) / n as f64;
                let node = |k: usize| -> String {
                    if k == 0 {
                        n1.clone()
                    } else if k == n {
                        n2.clone()
                    } else {
                        format!("{}.{}", e.name, k)
                    }
                };
                for k in 0..n {
                    b = b.inductor(&format!("{}.l{}", e.name, k), &node(k), &node(k + 1), l_seg / NANO)?;
                }
                for k in 0..=n {
                    let c = if k == 0 || k == n { 0.5 * c_seg } else { c_seg };
                    let at = node(k);
                    if !crate::netlist::is_ground_name(&at) {
                        b = b.capacitor(&format!("{}.c{}", e.name, k), &at, "0", c / FEMTO)?;
                    }
                }
            }
            kind => {
                b.push(0, &e.name, kind, &n1, &n2)?;
            }
        }
    }
    Ok(b.finish())
}
