use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("symbol {symbol} outside alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown rule '{0}'")]
    UnknownRule(String),
    #[error("enumeration budget exceeded: {count:.0} type-class pairs")]
    BudgetExceeded { count: f64 },
    #[error("ball contains alternative: E0 = {e0} >= D(Q1||P0) = {divergence}")]
    BallContainsAlternative { e0: f64, divergence: f64 },
    #[error("threshold outside achievable band: {gamma} not in [{lo}, {hi}]")]
    ThresholdOutsideBand { gamma: f64, lo: f64, hi: f64 },
    #[error("radius reaches simplex boundary: r = {r} >= r_c = {r_critical}")]
    RadiusTooLarge { r: f64, r_critical: f64 },
    #[error("degenerate pair: {0}")]
    DegeneratePair(String),
    #[error("non-finite result in {0}")]
    NonFinite(&'static str),
    #[error("solver failed: {0}")]
    Solver(String),
}

impl Error {
    /// True for errors raised by a numeric domain restriction rather than
    /// by malformed input.
    pub fn is_numeric_domain(&self) -> bool {
        matches!(
            self,
            Error::BallContainsAlternative { .. }
                | Error::ThresholdOutsideBand { .. }
                | Error::RadiusTooLarge { .. }
                | Error::DegeneratePair(_)
                | Error::NonFinite(_)
                | Error::Solver(_)
                | Error::BudgetExceeded { .. }
        )
    }
}
