use thiserror::Error;

/// Errors raised by the dyadic laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: ‖A − A*‖ = {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not an orthogonal projection: ‖P² − P‖ = {deviation:e}")]
    NotProjection { deviation: f64 },

    #[error("function is undefined (non-finite) at eigenvalue {eigenvalue}")]
    FunctionUndefined { eigenvalue: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{what} = {value} is out of range {range}")]
    OutOfRange {
        what: &'static str,
        value: i64,
        range: String,
    },

    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error("grid or dimension mismatch: {0}")]
    Mismatch(String),

    #[error("function is not positive: eigenvalue {min_eig:e} at leaf {leaf}")]
    NotPositive { min_eig: f64, leaf: usize },

    #[error("Haar index is not resolved by a depth-{depth} grid (cube generation {gen})")]
    UnresolvedHaar { gen: u32, depth: u32 },

    #[error("sign pattern (1,…,1) is not an admissible Haar index")]
    TrivialSignPattern,

    #[error("lacunary range too small: 2^{s_max} < ‖f‖_∞, need s_max ≥ {required}")]
    LacunaryRange { s_max: i32, required: i32 },

    #[error("coefficient ξ_{k} is not constant on generation-{k} cubes (deviation {deviation:e})")]
    NonAdapted { k: u32, deviation: f64 },

    #[error("coefficient cubes are not descendants of their parent cube: {0}")]
    NonDescendant(String),

    #[error("kernel sampler failed on cube pair ({x_leaf}, {y_leaf}): {msg}")]
    Kernel {
        x_leaf: usize,
        y_leaf: usize,
        msg: String,
    },

    #[error("infeasible atom: {0}")]
    InfeasibleAtom(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
