use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field is not ATR: {r2} complex places (exactly one required)")]
    NotAtr { r2: usize },
    #[error("defining polynomial has the rational root {0}")]
    ReduciblePoly(String),
    #[error("prime {0} divides the index [Z_F : Z[t]] and no splitting data was supplied")]
    IndexPrimeUnspecified(u64),
    #[error("covolume formula requires a maximal order")]
    NotMaximal,
    #[error("algebra is not Kleinian: {0}")]
    NotKleinian(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("element {0} fixes the origin and has no isometric sphere")]
    OriginFixed(usize),
    #[error("isometric spheres {0} and {1} coincide")]
    DegenerateIncidence(usize, usize),
    #[error("base point is degenerate: {0}")]
    DegenerateBasePoint(String),
    #[error("edge {0} is not paired")]
    NotPaired(usize),
    #[error("domain is unbounded (infinite volume)")]
    UnboundedDomain,
    #[error("elliptic cycle transformation has order above the cap {0}")]
    NonFiniteOrder(usize),
    #[error("quadratic form is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
    #[error("iteration budget exceeded after {0} outer iterations")]
    BudgetExceeded(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
