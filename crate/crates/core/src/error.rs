use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {arg} is outside the domain of {func}")]
    Domain { func: &'static str, arg: f64 },
    #[error("non-finite argument to {0}")]
    Overflow(&'static str),
    #[error("{0} did not converge")]
    NonConvergence(&'static str),
    #[error("range of {len} integers exceeds the budget of {budget}")]
    Budget { len: u64, budget: u64 },
    #[error("inverted range: {lo} >= {hi}")]
    InvertedRange { lo: u64, hi: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("ambiguous floor near an integer boundary at {0}")]
    Ambiguous(u64),
    #[error("golden store: {0}")]
    Golden(String),
}

pub type Result<T> = std::result::Result<T, Error>;
