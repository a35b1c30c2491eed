use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("nyquist violation: {0}")]
    Nyquist(String),
    #[error("dyadic index {k} outside admissible range [{lo}, {hi}]")]
    OutOfRange { k: i32, lo: i32, hi: i32 },
    #[error("shift {shift} wraps the torus (limit {limit})")]
    Wrap { shift: f64, limit: f64 },
    #[error("support violation: {0}")]
    Support(String),
    #[error("safe-band violation: {0}")]
    SafeBand(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
