use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("empty tree code")]
    Empty,
    #[error("malformed tree code: preorder closes or fails to close at position {position}")]
    MalformedCode { position: usize },
    #[error("expected {expected} branches, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("size {requested} exceeds the enumeration cap {cap}")]
    CapExceeded { requested: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CountError {
    #[error("table size {requested} exceeds the cap {cap} for this mode")]
    CapExceeded { requested: usize, cap: usize },
    #[error("N_max must be at least 1")]
    EmptyTable,
    #[error("index (N = {n}, m = {m}) is outside the table (N_max = {n_max})")]
    OutOfRange { n: usize, m: usize, n_max: usize },
    #[error("exact partition functions need an integer exponent, got alpha = {alpha}")]
    ModeMismatch { alpha: f64 },
    #[error("cache file is unusable: {0}")]
    Cache(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("alpha = {alpha} is a logarithmic case; use the log amplitude d_{n}")]
    LogCase { alpha: f64, n: u32 },
    #[error("{0}")]
    Unsupported(String),
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("evaluation point is a pole")]
    AtPole,
    #[error("evaluation point is a branch point (z = +-1)")]
    AtBranchPoint,
    #[error("series diverges: alpha + 2n - 1 = {excess} must be negative")]
    Divergent { excess: f64 },
    #[error("extrapolation did not settle: successive estimates differ by {spread:e}")]
    ExtrapolationUnstable { spread: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error(transparent)]
    Count(#[from] CountError),
    #[error("no tree of size {n} has height exactly {h}")]
    EmptyClass { n: usize, h: usize },
    #[error("branch exceeded the size cap after {partial_size} edges")]
    Truncated { partial_size: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BallError {
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("N = {n} is smaller than the base tree size {base}")]
    TooSmall { n: usize, base: usize },
}
