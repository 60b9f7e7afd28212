//! Economic analysis of execution-ticket markets.
//!
//! Execution tickets sell the right to propose a block through a recurring
//! lottery: `N` tickets are outstanding, each slot one is drawn, burned, and
//! re-issued at the stationary price. This crate computes what that market
//! does in equilibrium and what the protocol earns from it:
//!
//! - [`valuation`]: each buyer's maximal ticket price from their payoff law,
//!   risk adjustment, and cost of capital, plus the resulting ranking.
//! - [`equilibrium`]: stationary price band, market-clearing holdings on the
//!   top valuation set, the protocol's MEV-capture ratio `chi`, and the
//!   capital-cost threshold at which pure investors dominate.
//! - [`pbs`]: proposer-builder separation as a payoff transform
//!   `max(Γ(abilities), own ability)`, reducing a PBS market to an ordinary
//!   heterogeneous-payoff market.
//! - [`sim`]: seeded slot-by-slot Monte Carlo of the lottery with empirical
//!   capture ratio, per-buyer P&L, and tagged-ticket win-delay statistics.
//! - [`scenario`] / [`verify`] / [`report`]: JSON scenario files, the bundled
//!   verification suite, and report emission for the `et-market` binary.
//!
//! The `examples/` directory walks through each capability end to end; the
//! thin `et-market` binary drives the same library functions from scenario
//! files.

pub mod equilibrium;
pub mod error;
pub mod model;
mod numeric;
pub mod pbs;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod valuation;
pub mod verify;

pub use equilibrium::{
    buyer_objective, investor_dominance_threshold, mev_capture, solve_equilibrium,
    solve_equilibrium_with, DominanceThreshold, Equilibrium, HoldingsRounding,
};
pub use error::{Error, Result};
pub use model::{BuyerSpec, MarketParams, MevModel, RiskProfile, SlotOutcome};
pub use pbs::{derive_payoffs, gamma_mean, reduce_market, DerivedPayoff, GammaRule, PbsConfig};
pub use scenario::{load_scenario, load_suite, Expectations, Scenario, SimSpec};
pub use sim::{
    delay_goodness_of_fit, run_slots, run_slots_traced, win_delay_stats, SimReport, WinDelayStats,
};
pub use valuation::{
    expected_gain, max_price, max_price_numeric, net_value, rank_valuations, ValuationResult,
};
pub use verify::{built_in_suite, run_built_in, run_suite, CheckResult, VerificationReport};
