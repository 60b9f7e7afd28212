//! Seeded slot-by-slot Monte Carlo of the ticket lottery.
//!
//! One master seed fans out into independent named substreams (winner draws,
//! MEV draws, PBS ability draws, tagged-ticket delay draws), so adding or
//! removing instrumentation never perturbs the other streams and identical
//! inputs always produce bit-identical reports.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};
use crate::model::{MarketParams, SlotOutcome};
use crate::pbs::GammaRule;

const STREAM_WINNER: u64 = 0;
const STREAM_MEV: u64 = 1;
const STREAM_ABILITY: u64 = 2;
const STREAM_DELAY: u64 = 3;

/// Traces are dropped by default beyond this many slots.
pub const TRACE_RETENTION_LIMIT: u64 = 10_000;

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Aggregates of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub slots: u64,
    pub seed: u64,
    /// Buyer id -> slots won.
    pub wins: BTreeMap<String, u64>,
    /// slots x price: one ticket re-sold per slot at the stationary price.
    pub protocol_revenue: f64,
    pub realized_mev_total: f64,
    /// protocol_revenue / realized_mev_total; absent when no MEV realized.
    pub chi_hat: Option<f64>,
    pub chi_analytic: f64,
    /// Buyer id -> summed (realized MEV - price) over their winning slots.
    pub per_buyer_pnl: BTreeMap<String, f64>,
    /// Slots a tagged ticket waited until winning -> occurrence count.
    pub win_delay_histogram: BTreeMap<u64, u64>,
    /// PBS mode: fraction of slots where the PBS price met or beat the
    /// winner's own ability. Absent without PBS.
    pub outsource_fraction: Option<f64>,
    pub trace: Option<Vec<SlotOutcome>>,
}

/// Run the lottery with the default trace policy (retained up to
/// [`TRACE_RETENTION_LIMIT`] slots).
pub fn run_slots(
    market: &MarketParams,
    eq: &Equilibrium,
    slots: u64,
    seed: u64,
) -> Result<SimReport> {
    run_slots_traced(market, eq, slots, seed, slots <= TRACE_RETENTION_LIMIT)
}

pub fn run_slots_traced(
    market: &MarketParams,
    eq: &Equilibrium,
    slots: u64,
    seed: u64,
    keep_trace: bool,
) -> Result<SimReport> {
    market.validate()?;
    if slots < 1 {
        return Err(Error::Validation("slots: must be at least 1".into()));
    }
    for id in eq.holdings.keys() {
        if market.buyer(id).is_none() {
            return Err(Error::Validation(format!(
                "holdings reference unknown buyer `{id}`"
            )));
        }
    }
    let n = market.tickets as f64;
    let holdings: Vec<f64> = market
        .buyers
        .iter()
        .map(|b| eq.holdings.get(&b.id).copied().unwrap_or(0.0))
        .collect();
    let sum: f64 = holdings.iter().sum();
    if (sum - n).abs() > 1e-9 {
        return Err(Error::InvalidHoldings {
            sum,
            tickets: market.tickets,
        });
    }
    let last_holder = match holdings.iter().rposition(|&k| k > 0.0) {
        Some(i) => i,
        None => {
            return Err(Error::InvalidHoldings {
                sum,
                tickets: market.tickets,
            })
        }
    };

    let mut winner_rng = substream(seed, STREAM_WINNER);
    let mut mev_rng = substream(seed, STREAM_MEV);
    let mut ability_rng = substream(seed, STREAM_ABILITY);
    let mut delay_rng = substream(seed, STREAM_DELAY);

    let pbs = market.pbs.as_ref();
    let mut xs = vec![0.0; market.buyers.len()];
    let mut ys = vec![0.0; pbs.map_or(0, |p| p.non_buyer_abilities.len())];
    let mut scratch: Vec<f64> = Vec::new();

    let mut wins: BTreeMap<String, u64> =
        market.buyers.iter().map(|b| (b.id.clone(), 0)).collect();
    let mut per_buyer_pnl: BTreeMap<String, f64> =
        market.buyers.iter().map(|b| (b.id.clone(), 0.0)).collect();
    let mut win_delay_histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut trace = if keep_trace { Some(Vec::new()) } else { None };

    let mut realized_total = 0.0;
    let mut outsourced_slots = 0u64;
    let mut tagged_delay = 1u64;
    let price = eq.price;

    for slot in 0..slots {
        // Winner proportional to holdings.
        let mut winner = last_holder;
        let u = winner_rng.gen::<f64>() * n;
        let mut acc = 0.0;
        for (i, &k) in holdings.iter().enumerate() {
            acc += k;
            if u < acc {
                winner = i;
                break;
            }
        }
        let winner_buyer = &market.buyers[winner];

        let (realized, exercised_self) = match pbs {
            Some(cfg) => {
                for (i, b) in market.buyers.iter().enumerate() {
                    xs[i] = b.mev.sample(&mut ability_rng);
                }
                for (j, m) in cfg.non_buyer_abilities.iter().enumerate() {
                    ys[j] = m.sample(&mut ability_rng);
                }
                let gamma = slot_gamma(&cfg.gamma, &xs, &ys, cfg.exclude_own_ability.then_some(winner), &mut scratch);
                if gamma >= xs[winner] {
                    outsourced_slots += 1;
                }
                (gamma.max(xs[winner]), xs[winner] >= gamma)
            }
            None => (winner_buyer.mev.sample(&mut mev_rng), true),
        };

        let pnl = realized - price;
        realized_total += realized;
        *wins.get_mut(&winner_buyer.id).expect("initialized") += 1;
        *per_buyer_pnl.get_mut(&winner_buyer.id).expect("initialized") += pnl;

        // Tagged-ticket tracker: one ticket among N wins each slot with
        // probability 1/N; on a win the replacement ticket is tagged next.
        if delay_rng.gen::<f64>() < 1.0 / n {
            *win_delay_histogram.entry(tagged_delay).or_insert(0) += 1;
            tagged_delay = 1;
        } else {
            tagged_delay += 1;
        }

        if let Some(tr) = trace.as_mut() {
            let k_w = holdings[winner];
            tr.push(SlotOutcome {
                slot,
                winner_id: winner_buyer.id.clone(),
                realized_mev: realized,
                pnl,
                portfolio_before: k_w * price,
                portfolio_after: (k_w - 1.0) * price + realized,
                exercised_self,
            });
        }
    }

    let protocol_revenue = slots as f64 * price;
    Ok(SimReport {
        slots,
        seed,
        wins,
        protocol_revenue,
        realized_mev_total: realized_total,
        chi_hat: (realized_total > 0.0).then(|| protocol_revenue / realized_total),
        chi_analytic: eq.chi,
        per_buyer_pnl,
        win_delay_histogram,
        outsource_fraction: pbs.map(|_| outsourced_slots as f64 / slots as f64),
        trace,
    })
}

fn slot_gamma(
    rule: &GammaRule,
    xs: &[f64],
    ys: &[f64],
    exclude: Option<usize>,
    scratch: &mut Vec<f64>,
) -> f64 {
    scratch.clear();
    for (i, &x) in xs.iter().enumerate() {
        if Some(i) != exclude {
            scratch.push(x);
        }
    }
    scratch.extend_from_slice(ys);
    rule.eval(scratch)
}

/// Summary of the tagged-ticket delay distribution against Geometric(1/N).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinDelayStats {
    pub mean_delay: f64,
    /// Pearson chi-square statistic over tail-bucketed delay counts.
    pub gof_statistic: f64,
    pub degrees_of_freedom: u64,
    /// Goodness-of-fit accepted at significance 0.01.
    pub pass: bool,
}

/// Delay statistics for a finished report.
pub fn win_delay_stats(report: &SimReport, tickets: u64) -> Result<WinDelayStats> {
    delay_goodness_of_fit(&report.win_delay_histogram, tickets)
}

/// Chi-square goodness-of-fit of a delay histogram against Geometric(1/N)
/// with expected-count-at-least-5 bucketing and a single right tail bucket.
pub fn delay_goodness_of_fit(
    histogram: &BTreeMap<u64, u64>,
    tickets: u64,
) -> Result<WinDelayStats> {
    const MIN_OBSERVATIONS: u64 = 1_000;
    let total: u64 = histogram.values().sum();
    if total < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData {
            observed: total,
            required: MIN_OBSERVATIONS,
        });
    }

    let total_f = total as f64;
    let mean_delay = histogram
        .iter()
        .map(|(d, c)| *d as f64 * *c as f64)
        .sum::<f64>()
        / total_f;

    let p = 1.0 / tickets as f64;
    let q = 1.0 - p;
    let d_max = *histogram.keys().max().expect("nonempty histogram");

    let mut buckets: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0f64, 0.0f64);
    let mut d = 1u64;
    loop {
        let tail_exp = total_f * q.powi((d - 1) as i32);
        if d > d_max || tail_exp < 5.0 {
            let tail_obs: f64 = histogram.range(d..).map(|(_, c)| *c as f64).sum();
            obs_acc += tail_obs;
            exp_acc += tail_exp;
            break;
        }
        obs_acc += histogram.get(&d).copied().unwrap_or(0) as f64;
        exp_acc += total_f * p * q.powi((d - 1) as i32);
        if exp_acc >= 5.0 {
            buckets.push((obs_acc, exp_acc));
            (obs_acc, exp_acc) = (0.0, 0.0);
        }
        d += 1;
    }
    if obs_acc > 0.0 || exp_acc > 0.0 {
        match buckets.last_mut() {
            Some(last) if exp_acc < 5.0 => {
                last.0 += obs_acc;
                last.1 += exp_acc;
            }
            _ => buckets.push((obs_acc, exp_acc)),
        }
    }

    let mut statistic = 0.0;
    for (obs, exp) in &buckets {
        if *exp > 0.0 {
            statistic += (obs - exp).powi(2) / exp;
        } else if *obs > 0.0 {
            statistic = f64::INFINITY;
        }
    }

    let (dof, pass) = if buckets.len() > 1 {
        let dof = (buckets.len() - 1) as u64;
        let critical = ChiSquared::new(dof as f64)
            .expect("positive dof")
            .inverse_cdf(0.99);
        (dof, statistic <= critical)
    } else {
        // Degenerate law (e.g. one ticket): only a perfect fit passes.
        (0, statistic == 0.0)
    };

    Ok(WinDelayStats {
        mean_delay,
        gof_statistic: statistic,
        degrees_of_freedom: dof,
        pass,
    })
}
