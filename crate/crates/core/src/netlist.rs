//! Circuit description: parsing, validation and the capacitive reduction
//! that defines the Transmon shunt capacitances.
//!
//! The format is line oriented:
//!
//! ```text
//! C  <name> <node1> <node2> <fF>
//! L  <name> <node1> <node2> <nH>
//! JJ <name> <node1> <node2> LJ=<nH> [CJ=<fF>]
//! TL <name> <node1> <node2> Z0=<ohm> LEN=<mm> [EEFF=<float>]
//! ```
//!
//! `#` starts a comment, blank lines are ignored and node `0` / `GND` is
//! ground. The k-th `JJ` line defines qubit port k.

use std::collections::{HashMap, HashSet};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{C_LIGHT, FEMTO, MILLI, NANO};

/// Effective permittivity assumed for lines that do not set `EEFF`.
pub const DEFAULT_EPS_EFF: f64 = 6.45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    Ground,
    /// Index into [`Netlist::nodes`].
    Named(usize),
}

impl Node {
    pub fn index(self) -> Option<usize> {
        match self {
            Node::Ground => None,
            Node::Named(i) => Some(i),
        }
    }

    pub fn is_ground(self) -> bool {
        matches!(self, Node::Ground)
    }
}

/// Element values are stored in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ElementKind {
    Capacitor {
        capacitance: f64,
    },
    Inductor {
        inductance: f64,
    },
    JosephsonJunction {
        inductance: f64,
        capacitance: f64,
    },
    TransmissionLine {
        z0: f64,
        length: f64,
        eps_eff: f64,
    },
}

impl ElementKind {
    fn keyword(&self) -> &'static str {
        match self {
            ElementKind::Capacitor { .. } => "C",
            ElementKind::Inductor { .. } => "L",
            ElementKind::JosephsonJunction { .. } => "JJ",
            ElementKind::TransmissionLine { .. } => "TL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
    pub terminals: (Node, Node),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitPort {
    pub junction: String,
    pub terminals: (Node, Node),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub elements: Vec<Element>,
    /// Non-ground node names in order of first appearance.
    pub nodes: Vec<String>,
    pub qubit_ports: Vec<QubitPort>,
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub default_eps_eff: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            default_eps_eff: DEFAULT_EPS_EFF,
        }
    }
}

pub fn is_ground_name(name: &str) -> bool {
    name == "0" || name.eq_ignore_ascii_case("gnd")
}

pub fn parse_netlist(text: &str) -> Result<Netlist> {
    parse_netlist_with(text, &ParseOptions::default())
}

pub fn parse_netlist_with(text: &str, options: &ParseOptions) -> Result<Netlist> {
    let mut builder = NetlistBuilder::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let keyword = tokens[0].to_ascii_uppercase();
        let kind_known = matches!(keyword.as_str(), "C" | "L" | "JJ" | "TL");
        if !kind_known {
            return Err(Error::UnknownElement {
                line,
                kind: tokens[0].to_string(),
            });
        }
        if tokens.len() < 5 {
            return Err(Error::Syntax {
                line,
                message: format!("expected `{keyword} <name> <node1> <node2> ...`"),
            });
        }
        let name = tokens[1];
        let (n1, n2) = (tokens[2], tokens[3]);
        let rest = &tokens[4..];
        let kind = match keyword.as_str() {
            "C" => {
                let value = single_value(rest, line)?;
                positive(value, line, name, "capacitance")?;
                ElementKind::Capacitor {
                    capacitance: value * FEMTO,
                }
            }
            "L" => {
                let value = single_value(rest, line)?;
                positive(value, line, name, "inductance")?;
                ElementKind::Inductor {
                    inductance: value * NANO,
                }
            }
            "JJ" => {
                let params = key_values(rest, line, &["LJ", "CJ"])?;
                let lj = required(&params, "LJ", line)?;
                positive(lj, line, name, "junction inductance")?;
                let cj = params.get("CJ").copied().unwrap_or(0.0);
                if params.contains_key("CJ") {
                    positive(cj, line, name, "junction capacitance")?;
                }
                ElementKind::JosephsonJunction {
                    inductance: lj * NANO,
                    capacitance: cj * FEMTO,
                }
            }
            "TL" => {
                let params = key_values(rest, line, &["Z0", "LEN", "EEFF"])?;
                let z0 = required(&params, "Z0", line)?;
                positive(z0, line, name, "characteristic impedance")?;
                let len = required(&params, "LEN", line)?;
                positive(len, line, name, "length")?;
                let eps = params
                    .get("EEFF")
                    .copied()
                    .unwrap_or(options.default_eps_eff);
                positive(eps, line, name, "effective permittivity")?;
                ElementKind::TransmissionLine {
                    z0,
                    length: len * MILLI,
                    eps_eff: eps,
                }
            }
            _ => unreachable!(),
        };
        builder.push(line, name, kind, n1, n2)?;
    }
    Ok(builder.finish())
}

fn single_value(rest: &[&str], line: usize) -> Result<f64> {
    if rest.len() != 1 {
        return Err(Error::Syntax {
            line,
            message: format!("expected a single value, found {} tokens", rest.len()),
        });
    }
    parse_number(rest[0], line)
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Syntax {
        line,
        message: format!("cannot parse `{token}` as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Syntax {
            line,
            message: format!("non-finite value `{token}`"),
        });
    }
    Ok(v)
}

fn key_values(rest: &[&str], line: usize, allowed: &[&str]) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for token in rest {
        let (key, value) = token.split_once('=').ok_or_else(|| Error::Syntax {
            line,
            message: format!("expected KEY=VALUE, found `{token}`"),
        })?;
        let key = key.to_ascii_uppercase();
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Syntax {
                line,
                message: format!("unknown parameter `{key}`"),
            });
        }
        if out.insert(key.clone(), parse_number(value, line)?).is_some() {
            return Err(Error::Syntax {
                line,
                message: format!("parameter `{key}` given twice"),
            });
        }
    }
    Ok(out)
}

fn required(params: &HashMap<String, f64>, key: &str, line: usize) -> Result<f64> {
    params.get(key).copied().ok_or_else(|| Error::Syntax {
        line,
        message: format!("missing required parameter `{key}=`"),
    })
}

fn positive(value: f64, line: usize, name: &str, quantity: &'static str) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveValue {
            line,
            name: name.to_string(),
            quantity,
            value,
        })
    }
}

/// Incremental construction shared by the parser and programmatic builders.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    elements: Vec<Element>,
    nodes: Vec<String>,
    node_index: HashMap<String, usize>,
    names: HashSet<String>,
    ports: Vec<QubitPort>,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn node(&mut self, name: &str) -> Node {
        if is_ground_name(name) {
            return Node::Ground;
        }
        if let Some(&i) = self.node_index.get(name) {
            return Node::Named(i);
        }
        let i = self.nodes.len();
        self.nodes.push(name.to_string());
        self.node_index.insert(name.to_string(), i);
        Node::Named(i)
    }

    /// `line` is only used for error reporting.
    pub fn push(
        &mut self,
        line: usize,
        name: &str,
        kind: ElementKind,
        n1: &str,
        n2: &str,
    ) -> Result<()> {
        if !self.names.insert(name.to_string()) {
            return Err(Error::DuplicateName {
                line,
                name: name.to_string(),
            });
        }
        let a = self.node(n1);
        let b = self.node(n2);
        if let ElementKind::JosephsonJunction { .. } = kind {
            if a == b {
                return Err(Error::GroundedElement {
                    line,
                    name: name.to_string(),
                });
            }
            self.ports.push(QubitPort {
                junction: name.to_string(),
                terminals: (a, b),
            });
        }
        self.elements.push(Element {
            name: name.to_string(),
            kind,
            terminals: (a, b),
        });
        Ok(())
    }

    pub fn capacitor(mut self, name: &str, n1: &str, n2: &str, femtofarad: f64) -> Result<Self> {
        positive(femtofarad, 0, name, "capacitance")?;
        self.push(
            0,
            name,
            ElementKind::Capacitor {
                capacitance: femtofarad * FEMTO,
            },
            n1,
            n2,
        )?;
        Ok(self)
    }

    pub fn inductor(mut self, name: &str, n1: &str, n2: &str, nanohenry: f64) -> Result<Self> {
        positive(nanohenry, 0, name, "inductance")?;
        self.push(
            0,
            name,
            ElementKind::Inductor {
                inductance: nanohenry * NANO,
            },
            n1,
            n2,
        )?;
        Ok(self)
    }

    pub fn junction(mut self, name: &str, n1: &str, n2: &str, lj_nh: f64, cj_ff: f64) -> Result<Self> {
        positive(lj_nh, 0, name, "junction inductance")?;
        self.push(
            0,
            name,
            ElementKind::JosephsonJunction {
                inductance: lj_nh * NANO,
                capacitance: cj_ff * FEMTO,
            },
            n1,
            n2,
        )?;
        Ok(self)
    }

    pub fn line(
        mut self,
        name: &str,
        n1: &str,
        n2: &str,
        z0: f64,
        length_mm: f64,
        eps_eff: f64,
    ) -> Result<Self> {
        positive(z0, 0, name, "characteristic impedance")?;
        positive(length_mm, 0, name, "length")?;
        positive(eps_eff, 0, name, "effective permittivity")?;
        self.push(
            0,
            name,
            ElementKind::TransmissionLine {
                z0,
                length: length_mm * MILLI,
                eps_eff,
            },
            n1,
            n2,
        )?;
        Ok(self)
    }

    pub fn finish(self) -> Netlist {
        Netlist {
            elements: self.elements,
            nodes: self.nodes,
            qubit_ports: self.ports,
        }
    }
}

impl Netlist {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_name(&self, node: Node) -> &str {
        match node {
            Node::Ground => "0",
            Node::Named(i) => &self.nodes[i],
        }
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn element_mut(&mut self, name: &str) -> Option<&mut Element> {
        self.elements.iter_mut().find(|e| e.name == name)
    }

    pub fn junctions(&self) -> impl Iterator<Item = &Element> {
        self.elements
            .iter()
            .filter(|e| matches!(e.kind, ElementKind::JosephsonJunction { .. }))
    }

    /// Bare junction inductances (H) in port order.
    pub fn junction_inductances(&self) -> Vec<f64> {
        self.junctions()
            .map(|e| match e.kind {
                ElementKind::JosephsonJunction { inductance, .. } => inductance,
                _ => unreachable!(),
            })
            .collect()
    }

    pub fn set_junction_inductance(&mut self, port: usize, inductance: f64) -> Result<()> {
        let name = self
            .qubit_ports
            .get(port)
            .ok_or_else(|| Error::InvalidArgument(format!("no qubit port {port}")))?
            .junction
            .clone();
        if !(inductance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "junction inductance must be positive, got {inductance}"
            )));
        }
        match self.element_mut(&name).map(|e| &mut e.kind) {
            Some(ElementKind::JosephsonJunction { inductance: l, .. }) => {
                *l = inductance;
                Ok(())
            }
            _ => unreachable!("qubit ports always name a junction"),
        }
    }

    pub fn require_junction(&self) -> Result<()> {
        if self.qubit_ports.is_empty() {
            Err(Error::NoJunction)
        } else {
            Ok(())
        }
    }

    pub fn has_lines(&self) -> bool {
        self.elements
            .iter()
            .any(|e| matches!(e.kind, ElementKind::TransmissionLine { .. }))
    }

    /// Canonical text form; parsing it returns an identical netlist.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.elements {
            let (a, b) = (self.node_name(e.terminals.0), self.node_name(e.terminals.1));
            write!(f, "{} {} {} {} ", e.kind.keyword(), e.name, a, b)?;
            match e.kind {
                ElementKind::Capacitor { capacitance } => writeln!(f, "{}", capacitance / FEMTO)?,
                ElementKind::Inductor { inductance } => writeln!(f, "{}", inductance / NANO)?,
                ElementKind::JosephsonJunction {
                    inductance,
                    capacitance,
                } => {
                    write!(f, "LJ={}", inductance / NANO)?;
                    if capacitance > 0.0 {
                        write!(f, " CJ={}", capacitance / FEMTO)?;
                    }
                    writeln!(f)?;
                }
                ElementKind::TransmissionLine {
                    z0,
                    length,
                    eps_eff,
                } => writeln!(f, "Z0={} LEN={} EEFF={}", z0, length / MILLI, eps_eff)?,
            }
        }
        Ok(())
    }
}

/// Total capacitance of a line, √ε_eff·l/(Z0·c).
pub fn line_capacitance(z0: f64, length: f64, eps_eff: f64) -> f64 {
    eps_eff.sqrt() * length / (z0 * C_LIGHT)
}

/// Total inductance of a line, Z0·√ε_eff·l/c.
pub fn line_inductance(z0: f64, length: f64, eps_eff: f64) -> f64 {
    z0 * eps_eff.sqrt() * length / C_LIGHT
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReductionOptions {
    /// Lump half of each line's total capacitance at either end.
    pub lump_lines: bool,
}

/// Node capacitance (Maxwell) matrix in farads over all non-ground nodes.
pub fn node_capacitance_matrix(netlist: &Netlist, options: &ReductionOptions) -> DMatrix<f64> {
    let n = netlist.node_count();
    let mut c = DMatrix::zeros(n, n);
    for e in &netlist.elements {
        let (a, b) = (e.terminals.0.index(), e.terminals.1.index());
        match e.kind {
            ElementKind::Capacitor { capacitance } => stamp_branch(&mut c, a, b, capacitance),
            ElementKind::JosephsonJunction { capacitance, .. } if capacitance > 0.0 => {
                stamp_branch(&mut c, a, b, capacitance)
            }
            ElementKind::TransmissionLine {
                z0,
                length,
                eps_eff,
            } if options.lump_lines => {
                let half = 0.5 * line_capacitance(z0, length, eps_eff);
                stamp_branch(&mut c, a, None, half);
                stamp_branch(&mut c, b, None, half);
            }
            _ => {}
        }
    }
    c
}

/// Two-terminal stamp of a branch value into a nodal matrix.
pub(crate) fn stamp_branch(m: &mut DMatrix<f64>, a: Option<usize>, b: Option<usize>, value: f64) {
    if let Some(i) = a {
        m[(i, i)] += value;
    }
    if let Some(j) = b {
        m[(j, j)] += value;
    }
    if let (Some(i), Some(j)) = (a, b) {
        if i != j {
            m[(i, j)] -= value;
            m[(j, i)] -= value;
        } else {
            m[(i, i)] -= 2.0 * value;
        }
    }
}

/// Effective capacitance matrix between qubit ports (F), obtained by
/// eliminating every other node of the capacitor-only network. Diagonal
/// entry i is the total shunt capacitance of qubit i.
pub fn capacitive_reduction(netlist: &Netlist, options: &ReductionOptions) -> Result<DMatrix<f64>> {
    netlist.require_junction()?;
    let c = node_capacitance_matrix(netlist, options);
    let n = netlist.node_count();

    // Nodes reachable from ground through capacitive branches.
    let mut grounded = vec![false; n];
    let mut adjacency = vec![Vec::new(); n];
    let mut stack: Vec<usize> = Vec::new();
    for e in &netlist.elements {
        let capacitive = match e.kind {
            ElementKind::Capacitor { .. } => true,
            ElementKind::JosephsonJunction { capacitance, .. } => capacitance > 0.0,
            ElementKind::TransmissionLine { .. } => options.lump_lines,
            ElementKind::Inductor { .. } => false,
        };
        if !capacitive {
            continue;
        }
        let lumped_line = matches!(e.kind, ElementKind::TransmissionLine { .. });
        match (e.terminals.0.index(), e.terminals.1.index()) {
            (Some(a), Some(b)) if lumped_line => stack.extend([a, b]),
            (Some(a), Some(b)) => {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
            (Some(a), None) | (None, Some(a)) => stack.push(a),
            (None, None) => {}
        }
    }
    for &i in &stack {
        grounded[i] = true;
    }
    while let Some(i) = stack.pop() {
        for &j in &adjacency[i] {
            if !grounded[j] {
                grounded[j] = true;
                stack.push(j);
            }
        }
    }
    for port in &netlist.qubit_ports {
        for t in [port.terminals.0, port.terminals.1] {
            if let Some(i) = t.index() {
                if !grounded[i] {
                    return Err(Error::DegenerateReduction {
                        port: port.junction.clone(),
                    });
                }
            }
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&i| grounded[i]).collect();
    let position: HashMap<usize, usize> = kept.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let m = kept.len();
    let ck = DMatrix::from_fn(m, m, |r, s| c[(kept[r], kept[s])]);
    let p = netlist.qubit_ports.len();
    let mut incidence = DMatrix::zeros(m, p);
    for (k, port) in netlist.qubit_ports.iter().enumerate() {
        if let Some(i) = port.terminals.0.index() {
            incidence[(position[&i], k)] += 1.0;
        }
        if let Some(i) = port.terminals.1.index() {
            incidence[(position[&i], k)] -= 1.0;
        }
    }
    let chol = ck.clone().cholesky().ok_or_else(|| Error::DegenerateReduction {
        port: netlist.qubit_ports[0].junction.clone(),
    })?;
    let elastance = incidence.transpose() * chol.solve(&incidence);
    let reduced = elastance
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateReduction {
            port: netlist.qubit_ports[0].junction.clone(),
        })?;
    Ok((&reduced + reduced.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_netlist() {
        let n = parse_netlist("C c1 n1 0 60\nJJ q1 n1 0 LJ=16").unwrap();
        assert_eq!(n.elements.len(), 2);
        assert_eq!(n.qubit_ports.len(), 1);
        assert_eq!(n.qubit_ports[0].junction, "q1");
        assert_eq!(n.nodes, vec!["n1".to_string()]);
    }

    #[test]
    fn negative_capacitance_rejected() {
        let err = parse_netlist("C c1 n1 0 -5").unwrap_err();
        assert!(matches!(err, Error::NonPositiveValue { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn zero_inductance_rejected() {
        let err = parse_netlist("L l1 a 0 0").unwrap_err();
        assert!(matches!(err, Error::NonPositiveValue { .. }));
    }

    #[test]
    fn error_reports_line_number() {
        let text = "# header\nC c1 n1 0 60\n\nC c2 n1 0 abc\n";
        let err = parse_netlist(text).unwrap_err();
        assert_eq!(err.line(), Some(4));
    }

    #[test]
    fn unknown_kind_and_duplicates() {
        assert!(matches!(
            parse_netlist("R r1 a 0 50").unwrap_err(),
            Error::UnknownElement { .. }
        ));
        assert!(matches!(
            parse_netlist("C c1 a 0 5\nC c1 b 0 5").unwrap_err(),
            Error::DuplicateName { line: 2, .. }
        ));
    }

    #[test]
    fn junction_across_single_node_rejected() {
        assert!(matches!(
            parse_netlist("JJ q 0 GND LJ=10").unwrap_err(),
            Error::GroundedElement { .. }
        ));
    }

    #[test]
    fn missing_junction_inductance() {
        assert!(matches!(
            parse_netlist("JJ q a 0 CJ=2").unwrap_err(),
            Error::Syntax { .. }
        ));
    }

    #[test]
    fn line_defaults_and_override() {
        let n = parse_netlist("TL t1 a b Z0=50 LEN=1.0\nTL t2 b 0 Z0=50 LEN=2 EEFF=5").unwrap();
        match n.elements[0].kind {
            ElementKind::TransmissionLine { eps_eff, length, .. } => {
                assert_eq!(eps_eff, DEFAULT_EPS_EFF);
                assert!((length - 1e-3).abs() < 1e-18);
            }
            _ => panic!(),
        }
        match n.elements[1].kind {
            ElementKind::TransmissionLine { eps_eff, .. } => assert_eq!(eps_eff, 5.0),
            _ => panic!(),
        }
        let opts = ParseOptions { default_eps_eff: 11.7 };
        let m = parse_netlist_with("TL t1 a b Z0=50 LEN=1.0", &opts).unwrap();
        match m.elements[0].kind {
            ElementKind::TransmissionLine { eps_eff, .. } => assert_eq!(eps_eff, 11.7),
            _ => panic!(),
        }
    }

    #[test]
    fn shunt_only_port() {
        let n = parse_netlist("C c1 n1 0 65\nJJ q1 n1 0 LJ=15").unwrap();
        let c = capacitive_reduction(&n, &ReductionOptions::default()).unwrap();
        assert!((c[(0, 0)] - 65e-15).abs() < 1e-27);
    }

    #[test]
    fn shunt_plus_series_to_grounded_node() {
        // 60 fF shunt in parallel with (5 fF series 60 fF): 60 + 5*60/65.
        let n = parse_netlist("C cq n1 0 60\nC cc n1 n2 5\nC cb n2 0 60\nJJ q1 n1 0 LJ=15").unwrap();
        let c = capacitive_reduction(&n, &ReductionOptions::default()).unwrap();
        let expected = (60.0 + 5.0 * 60.0 / 65.0) * 1e-15;
        assert!((c[(0, 0)] - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn series_capacitors_across_port() {
        let (ca, cb) = (30.0, 70.0);
        let text = format!("C ca n1 mid {ca}\nC cb mid n2 {cb}\nC g1 n1 0 1e-9\nC g2 n2 0 1e-9\nJJ q n1 n2 LJ=10");
        let n = parse_netlist(&text).unwrap();
        let c = capacitive_reduction(&n, &ReductionOptions::default()).unwrap();
        let expected = ca * cb / (ca + cb) * 1e-15;
        assert!((c[(0, 0)] - expected).abs() / expected < 1e-9, "{}", c[(0, 0)]);
    }

    #[test]
    fn floating_port_is_degenerate() {
        let n = parse_netlist("L l1 n1 0 10\nJJ q1 n1 0 LJ=15").unwrap();
        assert!(matches!(
            capacitive_reduction(&n, &ReductionOptions::default()).unwrap_err(),
            Error::DegenerateReduction { .. }
        ));
    }

    #[test]
    fn ground_to_ground_capacitor_is_inert() {
        let base = "C cq n1 0 60\nC cc n1 n2 5\nC cb n2 0 60\nJJ q1 n1 0 LJ=15\n";
        let a = parse_netlist(base).unwrap();
        let b = parse_netlist(&format!("{base}C cg 0 GND 100\n")).unwrap();
        let ca = capacitive_reduction(&a, &ReductionOptions::default()).unwrap();
        let cb = capacitive_reduction(&b, &ReductionOptions::default()).unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn lumped_lines_add_half_capacitance() {
        let n = parse_netlist("C c n1 0 50\nTL t n1 0 Z0=50 LEN=1 EEFF=4\nJJ q n1 0 LJ=10").unwrap();
        let plain = capacitive_reduction(&n, &ReductionOptions::default()).unwrap();
        let lumped = capacitive_reduction(&n, &ReductionOptions { lump_lines: true }).unwrap();
        assert!((plain[(0, 0)] - 50e-15).abs() < 1e-27);
        let half = 0.5 * line_capacitance(50.0, 1e-3, 4.0);
        assert!((lumped[(0, 0)] - 50e-15 - half).abs() < 1e-25);
    }
}
