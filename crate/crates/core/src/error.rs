use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("cannot build a set from an empty list")]
    EmptySet,
    #[error("division by zero")]
    DivisionByZero,
    #[error("set has {len} elements, at least {min} required")]
    TooSmall { len: usize, min: usize },
    #[error("energy exponent must be >= 1, got {0}")]
    InvalidExponent(String),
    #[error("set contains zero")]
    ZeroElement,
    #[error("set contains non-positive element {0}")]
    NonPositive(String),
    #[error("threshold {k} outside [1, {max}]")]
    BadThreshold { k: u64, max: u64 },
    #[error("eps must lie strictly between 0 and 1, got {0}")]
    BadEps(String),
    #[error("k must be >= 2, got {0}")]
    BadK(u64),
    #[error("bunch size {n} invalid for a layer of {layer} slopes")]
    BadN { n: usize, layer: usize },
    #[error("slopes coincide: {0}")]
    SameSlope(String),
    #[error("degenerate slope quadruple: {0}")]
    DegenerateSlopes(String),
    #[error("hypothesis failed for {} element(s), first witness {}", .witnesses.len(), .witnesses.first().map(String::as_str).unwrap_or("-"))]
    HypothesisFailed { witnesses: Vec<String> },
    #[error("side condition `{0}` failed")]
    SideConditionFailed(String),
    #[error("{what}: size {size} exceeds gate {gate}")]
    ScaleTooLarge { what: &'static str, size: usize, gate: usize },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("generator produced duplicate elements: {0}")]
    DuplicateElements(String),
    #[error("invalid elimination: {0}")]
    InvalidElimination(String),
    #[error("dominant layer has {layer} slopes, fewer than bunch size {n}")]
    LayerTooThin { layer: usize, n: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

impl From<std::io::Error> for CoreError {
    fn from(e: std::io::Error) -> Self {
        CoreError::Io(e.to_string())
    }
}
