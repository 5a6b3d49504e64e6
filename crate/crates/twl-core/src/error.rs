use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point is not on the unit sphere: |z| = {norm}")]
    NotOnSphere { norm: f64 },
    #[error("vector is not tangent to the sphere: Re<v, z> = {defect:e}")]
    NotTangent { defect: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("chart coordinate |w| = {norm} exceeds the chart radius {radius}")]
    OutOfChart { norm: f64, radius: f64 },
    #[error("point is off the zero locus of the moment map: Phi = {phi:e}")]
    OffZeroLocus { phi: f64 },
    #[error("degenerate action: {0}")]
    DegenerateAction(String),
    #[error("invalid circle action: {0}")]
    InvalidAction(String),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("symbol is not positive on X: minimum {min}")]
    NonPositiveSymbol { min: f64 },
    #[error("symbol is not invariant: {0}")]
    NotInvariant(String),
    #[error("monomial degree mismatch: |alpha| = {left}, |beta| = {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("quadrature did not converge for degree {k}: estimated error {estimate:e}")]
    Quadrature { k: usize, estimate: f64 },
    #[error("eigensolver failed on block k = {k}, weight {varpi:?}: {msg}")]
    Eigensolver {
        k: usize,
        varpi: Option<i64>,
        msg: String,
    },
    #[error("eigenpair residual {residual:e} exceeds bound {bound:e} (k = {k}, weight {varpi:?})")]
    Residual {
        k: usize,
        varpi: Option<i64>,
        residual: f64,
        bound: f64,
    },
    #[error("spectrum incomplete for lambda = {lambda}: requires k_max >= {required_k_max}")]
    Incomplete { lambda: f64, required_k_max: usize },
    #[error("weight {0} was not computed in this spectrum record")]
    MissingIsotype(i64),
    #[error("stabilizer is infinite (fixed point of the action)")]
    InfiniteStabilizer,
    #[error("group element does not stabilize the point: defect {defect:e}")]
    NotStabilizing { defect: f64 },
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("step size underflow at tau = {tau}")]
    StepUnderflow { tau: f64 },
    #[error("singular matrix")]
    Singular,
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
