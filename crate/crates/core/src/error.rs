use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("alist parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("parity-check matrix is rank deficient: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },

    #[error("code construction failed: {0}")]
    Construction(String),

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("target rate {target:.6} unreachable: needs s = {needed} shortened symbols but the budget is {budget}")]
    InfeasibleRate {
        target: f64,
        needed: u64,
        budget: u64,
    },

    #[error("target rate {0:.6} is not below 1")]
    DegenerateTarget(f64),

    #[error("adapted code has zero length (n - s - p = 0)")]
    DegenerateLength,

    #[error("degenerate channel: h(p_err) = 0")]
    DegenerateChannel,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("requested {requested} output bits from {available} input bits")]
    Budget { requested: usize, available: usize },
}
