//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Adaptive quadrature exhausted its refinement budget before reaching
    /// the requested absolute tolerance.
    #[error(
        "quadrature failed: error estimate {achieved:e} above tolerance {tolerance:e} \
         after {refinements} refinements"
    )]
    QuadratureFailure {
        tolerance: f64,
        achieved: f64,
        refinements: usize,
    },

    /// The set of acceptable prices is unbounded: zero cost of capital with a
    /// concave risk adjustment and unbounded payoff support.
    #[error("divergent valuation for buyer `{id}`: zero cost of capital, concave risk adjustment, and unbounded payoff support")]
    DivergentValuation { id: String },

    /// The holdings-weighted mean MEV of the winning pool is zero.
    #[error("holdings-weighted mean MEV is zero; capture ratio undefined")]
    ZeroMevMarket,

    /// Investor set empty, covering all buyers, or naming unknown ids.
    #[error("invalid investor partition: {0}")]
    InvalidPartition(String),

    /// A PBS operation was requested on a market without a PBS block.
    #[error("market has no PBS configuration")]
    MissingPbsConfig,

    /// Simulation holdings do not clear the market.
    #[error("holdings sum {sum} deviates from ticket count {tickets}")]
    InvalidHoldings { sum: f64, tickets: u64 },

    /// Too few completed delay observations for the goodness-of-fit test.
    #[error("insufficient delay observations: {observed} < {required}")]
    InsufficientData { observed: u64, required: u64 },

    /// Input is not syntactically valid JSON.
    #[error("parse error: {0}")]
    Parse(String),

    /// Input is valid JSON but does not match the scenario schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// Input matched the schema but breaks a documented invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
