//! Proposer-builder separation: derive each buyer's effective ticket payoff
//! `max(Γ(abilities), own ability)` under a pluggable PBS price rule, and
//! reduce a PBS market to a plain heterogeneous-payoff market.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MarketParams, MevModel};

/// How the PBS market prices a slot given everyone's realized abilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GammaRule {
    /// Competitive bidding leaves the winner a sliver: (1 - epsilon) * max.
    MaxHaircut { epsilon: f64 },
    /// Second-highest ability; 0 with fewer than two participants.
    SecondMax,
}

impl GammaRule {
    /// Price an ability vector. Empty input prices at 0.
    pub fn eval(&self, abilities: &[f64]) -> f64 {
        match *self {
            GammaRule::MaxHaircut { epsilon } => {
                let max = abilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if max.is_finite() {
                    (1.0 - epsilon) * max
                } else {
                    0.0
                }
            }
            GammaRule::SecondMax => {
                let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for &a in abilities {
                    if a > first {
                        second = first;
                        first = a;
                    } else if a > second {
                        second = a;
                    }
                }
                if second.is_finite() {
                    second
                } else {
                    0.0
                }
            }
        }
    }

    pub fn validate(&self, at: &str) -> Result<()> {
        if let GammaRule::MaxHaircut { epsilon } = *self {
            if !epsilon.is_finite() || !(0.0..1.0).contains(&epsilon) {
                return Err(Error::Validation(format!(
                    "{at}.epsilon: must lie in [0, 1) (got {epsilon})"
                )));
            }
        }
        Ok(())
    }
}

fn default_joint_samples() -> u64 {
    200_000
}

/// PBS block of a market: non-buyer builder abilities, the price rule, and
/// the Monte Carlo settings for deriving payoff laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PbsConfig {
    /// Ability laws of builders who do not buy tickets.
    #[serde(default)]
    pub non_buyer_abilities: Vec<MevModel>,
    pub gamma: GammaRule,
    /// Joint ability draws used when any ability law is non-degenerate.
    #[serde(default = "default_joint_samples")]
    pub joint_samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Drop the holder's own ability from Γ when pricing their slot.
    #[serde(default)]
    pub exclude_own_ability: bool,
}

impl PbsConfig {
    pub fn validate(&self, at: &str) -> Result<()> {
        self.gamma.validate(&format!("{at}.gamma"))?;
        if self.joint_samples < 1 {
            return Err(Error::Validation(format!(
                "{at}.joint_samples: must be at least 1"
            )));
        }
        for (i, m) in self.non_buyer_abilities.iter().enumerate() {
            m.validate(&format!("{at}.non_buyer_abilities[{i}]"))?;
        }
        Ok(())
    }
}

/// A buyer's effective ticket payoff once the PBS floor is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedPayoff {
    pub buyer_id: String,
    /// Law of max(Γ, own ability): a point mass on the exact path, an
    /// empirical law of `joint_samples` draws otherwise.
    pub payoff: MevModel,
    /// Probability that the PBS price meets or beats the holder's own ability.
    pub outsource_probability: f64,
}

fn all_point_masses(market: &MarketParams, pbs: &PbsConfig) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::with_capacity(market.buyers.len());
    for b in &market.buyers {
        match b.mev {
            MevModel::PointMass { value } => xs.push(value),
            _ => return None,
        }
    }
    let mut ys = Vec::with_capacity(pbs.non_buyer_abilities.len());
    for m in &pbs.non_buyer_abilities {
        match m {
            MevModel::PointMass { value } => ys.push(*value),
            _ => return None,
        }
    }
    Some((xs, ys))
}

fn gamma_for(
    rule: &GammaRule,
    xs: &[f64],
    ys: &[f64],
    exclude_index: Option<usize>,
    scratch: &mut Vec<f64>,
) -> f64 {
    scratch.clear();
    for (i, &x) in xs.iter().enumerate() {
        if Some(i) != exclude_index {
            scratch.push(x);
        }
    }
    scratch.extend_from_slice(ys);
    rule.eval(scratch)
}

/// Derive every buyer's effective payoff law and outsourcing probability.
///
/// All-point-mass markets are evaluated exactly; anything stochastic draws
/// `joint_samples` i.i.d. ability vectors from the config's own seeded stream.
pub fn derive_payoffs(market: &MarketParams) -> Result<Vec<DerivedPayoff>> {
    let pbs = market.pbs.as_ref().ok_or(Error::MissingPbsConfig)?;
    market.validate()?;

    let mut scratch = Vec::new();

    if let Some((xs, ys)) = all_point_masses(market, pbs) {
        let shared = gamma_for(&pbs.gamma, &xs, &ys, None, &mut scratch);
        return Ok(market
            .buyers
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let gamma = if pbs.exclude_own_ability {
                    gamma_for(&pbs.gamma, &xs, &ys, Some(i), &mut scratch)
                } else {
                    shared
                };
                DerivedPayoff {
                    buyer_id: b.id.clone(),
                    payoff: MevModel::PointMass {
                        value: gamma.max(xs[i]),
                    },
                    outsource_probability: if gamma >= xs[i] { 1.0 } else { 0.0 },
                }
            })
            .collect());
    }

    let rounds = pbs.joint_samples as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(pbs.seed);
    let n_buyers = market.buyers.len();
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(rounds); n_buyers];
    let mut outsourced = vec![0u64; n_buyers];
    let mut xs = vec![0.0; n_buyers];
    let mut ys = vec![0.0; pbs.non_buyer_abilities.len()];

    for _ in 0..rounds {
        for (i, b) in market.buyers.iter().enumerate() {
            xs[i] = b.mev.sample(&mut rng);
        }
        for (j, m) in pbs.non_buyer_abilities.iter().enumerate() {
            ys[j] = m.sample(&mut rng);
        }
        let shared = if pbs.exclude_own_ability {
            f64::NAN
        } else {
            gamma_for(&pbs.gamma, &xs, &ys, None, &mut scratch)
        };
        for i in 0..n_buyers {
            let gamma = if pbs.exclude_own_ability {
                gamma_for(&pbs.gamma, &xs, &ys, Some(i), &mut scratch)
            } else {
                shared
            };
            samples[i].push(gamma.max(xs[i]));
            if gamma >= xs[i] {
                outsourced[i] += 1;
            }
        }
    }

    Ok(market
        .buyers
        .iter()
        .zip(samples)
        .zip(outsourced)
        .map(|((b, s), o)| DerivedPayoff {
            buyer_id: b.id.clone(),
            payoff: MevModel::Empirical { samples: s },
            outsource_probability: o as f64 / rounds as f64,
        })
        .collect())
}

/// Reduce a PBS market to an ordinary market whose buyers carry their derived
/// payoff laws, ready for valuation and equilibrium solving.
pub fn reduce_market(market: &MarketParams) -> Result<MarketParams> {
    let payoffs = derive_payoffs(market)?;
    let buyers = market
        .buyers
        .iter()
        .zip(payoffs)
        .map(|(b, d)| {
            let mut b = b.clone();
            b.mev = d.payoff;
            b
        })
        .collect();
    Ok(MarketParams {
        tickets: market.tickets,
        buyers,
        pbs: None,
    })
}

/// Mean of the PBS price itself: the payoff of a zero-ability holder.
/// Exact for all-point-mass markets, Monte Carlo otherwise.
pub fn gamma_mean(market: &MarketParams) -> Result<f64> {
    if market.pbs.is_none() {
        return Err(Error::MissingPbsConfig);
    }
    // A zero-ability point mass never moves either price rule (both treat a
    // missing runner-up as 0) and consumes no randomness, so the probe sees
    // exactly the Γ stream of the unprobed market.
    let mut probe = market.clone();
    probe.buyers.push(crate::model::BuyerSpec {
        id: gamma_probe_id(market),
        cost_of_capital: 0.0,
        risk: crate::model::RiskProfile::RiskNeutral,
        mev: MevModel::PointMass { value: 0.0 },
    });
    let payoffs = derive_payoffs(&probe)?;
    Ok(payoffs
        .last()
        .expect("probe buyer present")
        .payoff
        .mean())
}

fn gamma_probe_id(market: &MarketParams) -> String {
    let mut id = "__gamma_probe".to_string();
    while market.buyer(&id).is_some() {
        id.push('_');
    }
    id
}
