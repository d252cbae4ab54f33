use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("cycle structure needs {needed} points but n = {n}")]
    InfeasibleClass { needed: usize, n: usize },

    #[error("invalid conjugacy class: {0}")]
    InvalidClass(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("permutation does not have the requested cycle type")]
    TypeMismatch,

    #[error("value {value} outside of domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(&'static str),

    #[error("arguments out of order: {0}")]
    ArgumentOrder(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("empty sample")]
    EmptySample,

    #[error("no mixing bound: {0}")]
    NoBound(String),
}
