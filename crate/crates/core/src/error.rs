use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("variable x{index} at byte {offset} is out of range for a chart of dimension {dim}")]
    VariableOutOfRange {
        index: usize,
        dim: usize,
        offset: usize,
    },

    #[error("metric file: {0}")]
    MetricFile(String),

    #[error("metric file: missing section [{0}]")]
    MissingSection(String),

    #[error("alpha matrix is not symmetric: a{i}{j} and a{j}{i} differ")]
    AsymmetricAlpha { i: usize, j: usize },

    #[error("invalid phi: {0}")]
    InvalidPhi(String),

    #[error("unsupported chart dimension {0} (the engine is two-dimensional)")]
    UnsupportedDimension(usize),

    #[error("domain error in {primitive} at `{subexpr}`: value {value}")]
    Domain {
        primitive: &'static str,
        subexpr: String,
        value: f64,
    },

    #[error("phi domain violation at s = {s}: {constraint}")]
    PhiDomain { s: f64, constraint: String },

    #[error("phi - s phi' vanishes at s = {s}")]
    DegenerateDirection { s: f64 },

    #[error("Delta = 1 + sQ + (b^2 - s^2)Q' vanishes at s = {s}")]
    VanishingDelta { s: f64 },

    #[error("alpha is not positive definite at x = {x:?} (pivot {pivot})")]
    NotPositiveDefinite { x: [f64; 2], pivot: f64 },

    #[error("alpha(x, y) is not positive at x = {x:?}, y = {y:?}")]
    ZeroDirection { x: [f64; 2], y: [f64; 2] },

    #[error("fundamental tensor is singular (det = {det})")]
    SingularFundamentalTensor { det: f64 },

    #[error("beta vanishes at x = {0:?}")]
    ZeroCovector([f64; 2]),

    #[error("F vanishes at the evaluation point")]
    ZeroMetric,

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("insufficient valid samples: {valid} < {required}")]
    InsufficientSamples { valid: usize, required: usize },

    #[error("least-squares system is rank deficient")]
    RankDeficient,

    #[error("jet order {have} is too small; {needed} required")]
    JetOrder { needed: usize, have: usize },

    #[error("Cauchy-Riemann equations violated (residual {residual:e} at x = {x:?})")]
    CauchyRiemann { residual: f64, x: [f64; 2] },

    #[error("deformation precondition violated at x = {x:?}: {what}")]
    Precondition { what: String, x: [f64; 2] },

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("case `{case}` does not apply: {why}")]
    CaseMismatch { case: String, why: String },
}

pub type Result<T> = std::result::Result<T, Error>;
