//! Domain types: risk-adjustment profiles, MEV payoff distributions, buyers,
//! and markets.
//!
//! Everything here is immutable plain data. Sampling takes an explicit RNG so
//! callers own reproducibility; all other operations are pure.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pbs::PbsConfig;

/// Risk-adjustment function applied to a buyer's slot P&L.
///
/// The concave families evaluate to 0 for non-positive arguments; the
/// risk-neutral profile is the unclipped identity on all reals, which is what
/// the closed-form solutions for risk-neutral buyers rely on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskProfile {
    RiskNeutral,
    /// Π(x) = (1 - exp(-alpha x)) / alpha for x > 0, else 0.
    ExpConcave {
        #[serde(rename = "param")]
        alpha: f64,
    },
    /// Π(x) = x^gamma for x > 0, else 0, with gamma in (0, 1].
    PowerConcave {
        #[serde(rename = "param")]
        gamma: f64,
    },
}

impl RiskProfile {
    /// Evaluate the risk adjustment Π at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            RiskProfile::RiskNeutral => x,
            RiskProfile::ExpConcave { alpha } => {
                if x > 0.0 {
                    (1.0 - (-alpha * x).exp()) / alpha
                } else {
                    0.0
                }
            }
            RiskProfile::PowerConcave { gamma } => {
                if x > 0.0 {
                    x.powf(gamma)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_risk_neutral(&self) -> bool {
        matches!(self, RiskProfile::RiskNeutral)
    }

    /// True for the families that clip losses to zero utility.
    pub fn is_concave_family(&self) -> bool {
        !self.is_risk_neutral()
    }

    /// Strictly concave on the positive half-line (relevant for Jensen gaps).
    pub fn is_strictly_concave(&self) -> bool {
        match *self {
            RiskProfile::RiskNeutral => false,
            RiskProfile::ExpConcave { .. } => true,
            RiskProfile::PowerConcave { gamma } => gamma < 1.0,
        }
    }

    pub fn validate(&self, at: &str) -> Result<()> {
        match *self {
            RiskProfile::RiskNeutral => Ok(()),
            RiskProfile::ExpConcave { alpha } => {
                if alpha.is_finite() && alpha > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Validation(format!(
                        "{at}.param: exp_concave alpha must be a positive finite real (got {alpha})"
                    )))
                }
            }
            RiskProfile::PowerConcave { gamma } => {
                if gamma.is_finite() && gamma > 0.0 && gamma <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Validation(format!(
                        "{at}.param: power_concave gamma must lie in (0, 1] (got {gamma})"
                    )))
                }
            }
        }
    }
}

/// Nonnegative payoff distribution with finite mean: the law of the MEV a
/// buyer extracts when winning a slot (or of a raw extraction ability in PBS
/// mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum MevModel {
    PointMass { value: f64 },
    Exponential { mean: f64 },
    LogNormal { mu_log: f64, sigma_log: f64 },
    Uniform { low: f64, high: f64 },
    Empirical { samples: Vec<f64> },
}

impl MevModel {
    /// Exact mean for parametric kinds, arithmetic mean for `Empirical`.
    pub fn mean(&self) -> f64 {
        match self {
            MevModel::PointMass { value } => *value,
            MevModel::Exponential { mean } => *mean,
            MevModel::LogNormal { mu_log, sigma_log } => {
                (mu_log + 0.5 * sigma_log * sigma_log).exp()
            }
            MevModel::Uniform { low, high } => 0.5 * (low + high),
            MevModel::Empirical { samples } => {
                samples.iter().sum::<f64>() / samples.len() as f64
            }
        }
    }

    /// Essential supremum of the support; +inf for the unbounded kinds.
    pub fn ess_sup(&self) -> f64 {
        match self {
            MevModel::PointMass { value } => *value,
            MevModel::Exponential { .. } | MevModel::LogNormal { .. } => f64::INFINITY,
            MevModel::Uniform { high, .. } => *high,
            MevModel::Empirical { samples } => samples.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Essential infimum of the support.
    pub fn ess_inf(&self) -> f64 {
        match self {
            MevModel::PointMass { value } => *value,
            MevModel::Exponential { .. } | MevModel::LogNormal { .. } => 0.0,
            MevModel::Uniform { low, .. } => *low,
            MevModel::Empirical { samples } => {
                samples.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Draw one payoff; deterministic given the RNG state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MevModel::PointMass { value } => *value,
            MevModel::Exponential { mean } => {
                rand_distr::Exp::new(1.0 / mean).expect("validated rate").sample(rng)
            }
            MevModel::LogNormal { mu_log, sigma_log } => {
                rand_distr::LogNormal::new(*mu_log, *sigma_log)
                    .expect("validated sigma")
                    .sample(rng)
            }
            MevModel::Uniform { low, high } => rng.gen_range(*low..*high),
            MevModel::Empirical { samples } => samples[rng.gen_range(0..samples.len())],
        }
    }

    pub fn validate(&self, at: &str) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        match self {
            MevModel::PointMass { value } => {
                if !value.is_finite() || *value < 0.0 {
                    return fail(format!(
                        "{at}.params.value: point_mass value must be a nonnegative finite real (got {value})"
                    ));
                }
            }
            MevModel::Exponential { mean } => {
                if !mean.is_finite() || *mean <= 0.0 {
                    return fail(format!(
                        "{at}.params.mean: exponential mean must be a positive finite real (got {mean})"
                    ));
                }
            }
            MevModel::LogNormal { mu_log, sigma_log } => {
                if !mu_log.is_finite() {
                    return fail(format!(
                        "{at}.params.mu_log: must be a finite real (got {mu_log})"
                    ));
                }
                if !sigma_log.is_finite() || *sigma_log <= 0.0 {
                    return fail(format!(
                        "{at}.params.sigma_log: must be a positive finite real (got {sigma_log})"
                    ));
                }
            }
            MevModel::Uniform { low, high } => {
                if !low.is_finite() || *low < 0.0 {
                    return fail(format!(
                        "{at}.params.low: must be a nonnegative finite real (got {low})"
                    ));
                }
                if !high.is_finite() || *high <= *low {
                    return fail(format!(
                        "{at}.params.high: must be finite and exceed low={low} (got {high})"
                    ));
                }
            }
            MevModel::Empirical { samples } => {
                if samples.is_empty() {
                    return fail(format!("{at}.params.samples: must be nonempty"));
                }
                for (i, s) in samples.iter().enumerate() {
                    if !s.is_finite() || *s < 0.0 {
                        return fail(format!(
                            "{at}.params.samples[{i}]: must be a nonnegative finite real (got {s})"
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One market participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuyerSpec {
    pub id: String,
    /// Per-slot cost-of-capital rate charged on funds locked in tickets.
    #[serde(rename = "r")]
    pub cost_of_capital: f64,
    pub risk: RiskProfile,
    /// Payoff law when winning a slot; in PBS mode this is the buyer's native
    /// extraction ability before the PBS floor is applied.
    pub mev: MevModel,
}

impl BuyerSpec {
    pub fn validate(&self, at: &str) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation(format!("{at}.id: must be nonempty")));
        }
        if !self.cost_of_capital.is_finite() || self.cost_of_capital < 0.0 {
            return Err(Error::Validation(format!(
                "{at}.cost_of_capital: must be a nonnegative finite rate (got {})",
                self.cost_of_capital
            )));
        }
        self.risk.validate(&format!("{at}.risk"))?;
        self.mev.validate(&format!("{at}.mev"))
    }
}

/// Ticket supply plus the buyer roster (and, optionally, a PBS block).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    /// Number of tickets outstanding at all times.
    pub tickets: u64,
    pub buyers: Vec<BuyerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pbs: Option<PbsConfig>,
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        if self.tickets < 1 {
            return Err(Error::Validation(
                "market.tickets: must be at least 1".into(),
            ));
        }
        if self.buyers.is_empty() {
            return Err(Error::Validation(
                "market.buyers: must be nonempty".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, b) in self.buyers.iter().enumerate() {
            b.validate(&format!("market.buyers[{i}]"))?;
            if !seen.insert(b.id.as_str()) {
                return Err(Error::Validation(format!(
                    "market.buyers[{i}].id: duplicate buyer id `{}`",
                    b.id
                )));
            }
        }
        if let Some(pbs) = &self.pbs {
            pbs.validate("market.pbs")?;
        }
        Ok(())
    }

    pub fn buyer(&self, id: &str) -> Option<&BuyerSpec> {
        self.buyers.iter().find(|b| b.id == id)
    }
}

/// What happened in one simulated slot, from the winner's perspective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub slot: u64,
    pub winner_id: String,
    pub realized_mev: f64,
    /// realized_mev - price for the winner; every other buyer booked 0.
    pub pnl: f64,
    /// Winner's portfolio value entering the slot (holdings x price).
    pub portfolio_before: f64,
    /// After the win: one ticket burned, realized MEV credited.
    pub portfolio_after: f64,
    /// PBS mode: the winner's own ability met or beat the PBS price, so they
    /// built the block themselves. Always true without PBS.
    pub exercised_self: bool,
}
