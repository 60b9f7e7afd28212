//! Equilibrium selection, the protocol's MEV-capture ratio, and the
//! large-investor dominance threshold.
//!
//! Any price in `[p_second, p_top]` together with market-clearing holdings on
//! the top valuation set is an equilibrium; `lambda` picks a point in that
//! band (0 reproduces the runner-up price used throughout the closed-form
//! results).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BuyerSpec, MarketParams};
use crate::valuation::{net_value, rank_valuations};

/// Stationary price, holdings, and the analytic capture ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub price: f64,
    /// Buyer id -> tickets held (reals; market-clearing to the ticket count).
    pub holdings: BTreeMap<String, f64>,
    /// Price over the holdings-weighted mean MEV of the winning pool.
    /// Exceeds 1 only in the flagged zero-cost concave boundary regime.
    pub chi: f64,
    /// Band position used: price = p_second + lambda (p_top - p_second).
    pub selection_lambda: f64,
    pub regime_tags: BTreeSet<String>,
}

/// How tickets are split across the top valuation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoldingsRounding {
    /// Equal real-valued split N / |top set|.
    EqualSplit,
    /// Integer holdings by largest remainder, ties broken by buyer id.
    LargestRemainder,
}

/// Solve with the default equal real-valued split.
pub fn solve_equilibrium(market: &MarketParams, lambda: f64) -> Result<Equilibrium> {
    solve_equilibrium_with(market, lambda, HoldingsRounding::EqualSplit)
}

pub fn solve_equilibrium_with(
    market: &MarketParams,
    lambda: f64,
    rounding: HoldingsRounding,
) -> Result<Equilibrium> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Validation(format!(
            "lambda: must lie in [0, 1] (got {lambda})"
        )));
    }
    let ranking = rank_valuations(market)?;
    let price = ranking.p_second + lambda * (ranking.p_top - ranking.p_second);

    let top: Vec<&str> = ranking.top_set.iter().map(String::as_str).collect();
    let mut holdings: BTreeMap<String, f64> =
        market.buyers.iter().map(|b| (b.id.clone(), 0.0)).collect();
    match rounding {
        HoldingsRounding::EqualSplit => {
            let share = market.tickets as f64 / top.len() as f64;
            for id in &top {
                holdings.insert((*id).to_string(), share);
            }
        }
        HoldingsRounding::LargestRemainder => {
            let base = market.tickets / top.len() as u64;
            let leftover = (market.tickets - base * top.len() as u64) as usize;
            // Equal shares leave equal remainders; id order breaks the tie.
            for (i, id) in top.iter().enumerate() {
                let extra = if i < leftover { 1 } else { 0 };
                holdings.insert((*id).to_string(), (base + extra) as f64);
            }
        }
    }

    let chi = capture_ratio(price, &holdings, market)?;

    let mut regime_tags = BTreeSet::new();
    if ranking.top_set.len() == market.buyers.len() {
        regime_tags.insert("homogeneous".to_string());
    }
    if ranking.top_set.len() == 1 {
        regime_tags.insert("centralized".to_string());
    }
    if !ranking.boundary_ids.is_empty() {
        regime_tags.insert("r0-concave-boundary".to_string());
    }

    Ok(Equilibrium {
        price,
        holdings,
        chi,
        selection_lambda: lambda,
        regime_tags,
    })
}

fn capture_ratio(
    price: f64,
    holdings: &BTreeMap<String, f64>,
    market: &MarketParams,
) -> Result<f64> {
    let n = market.tickets as f64;
    let mut weighted_mean = 0.0;
    for (id, k) in holdings {
        if *k == 0.0 {
            continue;
        }
        let buyer = market.buyer(id).ok_or_else(|| {
            Error::Validation(format!("holdings reference unknown buyer `{id}`"))
        })?;
        weighted_mean += (k / n) * buyer.mev.mean();
    }
    if weighted_mean == 0.0 {
        return Err(Error::ZeroMevMarket);
    }
    Ok(price / weighted_mean)
}

/// Long-run fraction of extracted MEV captured by the protocol:
/// price over the holdings-weighted winner mean (the winner's law is the
/// holdings mixture because the lottery is proportional to k/N).
pub fn mev_capture(eq: &Equilibrium, market: &MarketParams) -> Result<f64> {
    capture_ratio(eq.price, &eq.holdings, market)
}

/// Risk-adjusted expected profit less capital cost of holding `k` tickets at
/// the given price. Because selection is Bernoulli(k/N) and Π(0) = 0 this is
/// exactly k times the per-ticket net value, which keeps the linearity exact.
pub fn buyer_objective(
    buyer: &BuyerSpec,
    k: u64,
    market: &MarketParams,
    price: f64,
) -> Result<f64> {
    debug_assert!(k <= market.tickets);
    Ok(k as f64 * net_value(buyer, market.tickets, price)?)
}

/// Outcome of the large-investor capital-cost test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceThreshold {
    /// Every investor cost-of-capital strictly below this bound guarantees
    /// the investor set ends up holding all tickets.
    pub bound: f64,
    pub dominates: bool,
}

/// Compute the capital-cost bound under which zero-ability investors with
/// payoff mean `investor_payoff_mean` outbid every non-investor:
/// `bound = (1/N) min over non-investors b of ((1 + r_b N) E[R_I]/E[R_b] - 1)`.
pub fn investor_dominance_threshold(
    market: &MarketParams,
    investor_ids: &BTreeSet<String>,
    investor_payoff_mean: f64,
) -> Result<DominanceThreshold> {
    if investor_ids.is_empty() {
        return Err(Error::InvalidPartition("investor set is empty".into()));
    }
    for id in investor_ids {
        if market.buyer(id).is_none() {
            return Err(Error::InvalidPartition(format!(
                "investor id `{id}` is not a market buyer"
            )));
        }
    }
    let outsiders: Vec<&BuyerSpec> = market
        .buyers
        .iter()
        .filter(|b| !investor_ids.contains(&b.id))
        .collect();
    if outsiders.is_empty() {
        return Err(Error::InvalidPartition(
            "investor set covers every buyer".into(),
        ));
    }

    let n = market.tickets as f64;
    let mut bound = f64::INFINITY;
    for b in &outsiders {
        let mean = b.mev.mean();
        if mean <= 0.0 {
            return Err(Error::ZeroMevMarket);
        }
        let candidate =
            ((1.0 + b.cost_of_capital * n) * investor_payoff_mean / mean - 1.0) / n;
        bound = bound.min(candidate);
    }

    let dominates = market
        .buyers
        .iter()
        .filter(|b| investor_ids.contains(&b.id))
        .all(|b| b.cost_of_capital < bound);

    Ok(DominanceThreshold { bound, dominates })
}
