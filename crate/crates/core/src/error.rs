use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown element kind `{kind}`")]
    UnknownElement { line: usize, kind: String },

    #[error("line {line}: duplicate element name `{name}`")]
    DuplicateName { line: usize, name: String },

    #[error("line {line}: {quantity} of `{name}` must be positive, got {value}")]
    NonPositiveValue {
        line: usize,
        name: String,
        quantity: &'static str,
        value: f64,
    },

    #[error("line {line}: element `{name}` connects ground to ground")]
    GroundedElement { line: usize, name: String },

    #[error("netlist declares no Josephson junction")]
    NoJunction,

    #[error("qubit port `{port}` is floating in the capacitive network")]
    DegenerateReduction { port: String },

    #[error("transmission line stamp is singular at βl = {beta_l} rad")]
    StampSingularity { beta_l: f64 },

    #[error("impedance evaluation too close to a network pole at ω = {omega} rad/s")]
    PoleProximity { omega: f64 },

    #[error("ω = {omega} rad/s lies outside the tabulated grid [{min}, {max}]")]
    Extrapolation { omega: f64, min: f64, max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("touchstone: {0}")]
    Touchstone(String),

    #[error("table: {0}")]
    Table(String),

    #[error("no resonance found for port {port} between {lo} and {hi} rad/s")]
    NoResonance { port: usize, lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("qubits are degenerate: |ω_i - ω_j| = {split} rad/s")]
    Degenerate { split: f64 },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("capacitance matrix is singular: {0}")]
    SingularMass(String),

    #[error("linearized circuit has a zero-frequency mode (floating island)")]
    ZeroFrequencyMode,

    #[error("dressed-state labeling ambiguous for {state}: best overlap {overlap:.3}")]
    Labeling { state: String, overlap: f64 },

    #[error("fit: {0}")]
    Fit(String),
}

impl Error {
    /// Input errors are the caller's fault (bad files, bad arguments); the rest
    /// are physics or convergence failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownElement { .. }
                | Error::DuplicateName { .. }
                | Error::NonPositiveValue { .. }
                | Error::GroundedElement { .. }
                | Error::NoJunction
                | Error::InvalidArgument(_)
                | Error::Touchstone(_)
                | Error::Table(_)
                | Error::Extrapolation { .. }
                | Error::Fit(_)
        )
    }

    /// Source line for parse errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::Syntax { line, .. }
            | Error::UnknownElement { line, .. }
            | Error::DuplicateName { line, .. }
            | Error::NonPositiveValue { line, .. }
            | Error::GroundedElement { line, .. } => Some(*line),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
