//! Per-ticket value functional and maximal-price solver.
//!
//! A buyer's net per-ticket value at price P is
//! `(1/N) E[Π(R - P)] - r P`; the maximal price is the largest P >= 0 keeping
//! it nonnegative. Risk-neutral buyers admit the closed form
//! `mean / (1 + r N)`; concave profiles are solved by bisection inside the
//! bracket `[0, E[Π(R)] / (r N)]`, which always contains the root.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::error::{Error, Result};
use crate::model::{BuyerSpec, MarketParams, MevModel, RiskProfile};
use crate::numeric;

/// Absolute tolerance for the expectation quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;
/// Bisection bracket-width target (tighter than the 1e-9 contract so the
/// feasibility residual stays well inside tolerance even for steep profiles).
const BISECTION_XTOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;
/// Relative tolerance deciding membership in the top valuation set.
pub const TIE_TOLERANCE: f64 = 1e-9;
/// Probability mass discarded when truncating unbounded supports.
const TRUNCATION_TAIL: f64 = 1e-12;

/// Per-buyer maximal prices plus the derived ranking quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationResult {
    /// Buyer id -> maximal price.
    pub per_buyer: BTreeMap<String, f64>,
    /// Largest maximal price.
    pub p_top: f64,
    /// Second-largest maximal price (equals `p_top` when the top set ties).
    pub p_second: f64,
    /// Buyers whose maximal price attains `p_top` within the tie tolerance.
    pub top_set: BTreeSet<String>,
    /// Relative tolerance used for top-set membership.
    pub tie_tolerance: f64,
    /// Buyers priced at their payoff's essential supremum because they pair
    /// zero capital cost with a concave risk adjustment; in this boundary
    /// regime every price up to the support edge is acceptable.
    pub boundary_ids: BTreeSet<String>,
}

fn density(mev: &MevModel, x: f64) -> f64 {
    match mev {
        MevModel::Exponential { mean } => {
            if x >= 0.0 {
                (-x / mean).exp() / mean
            } else {
                0.0
            }
        }
        MevModel::LogNormal { mu_log, sigma_log } => {
            if x <= 0.0 {
                0.0
            } else {
                let z = (x.ln() - mu_log) / sigma_log;
                (-0.5 * z * z).exp() / (x * sigma_log * (2.0 * PI).sqrt())
            }
        }
        MevModel::Uniform { low, high } => {
            if x >= *low && x <= *high {
                1.0 / (high - low)
            } else {
                0.0
            }
        }
        MevModel::PointMass { .. } | MevModel::Empirical { .. } => {
            unreachable!("discrete models are integrated by exact sums")
        }
    }
}

/// Upper integration limit: the support edge, or the 1 - 1e-12 quantile when
/// the support is unbounded.
fn upper_truncation(mev: &MevModel) -> f64 {
    match mev {
        MevModel::Exponential { mean } => -mean * TRUNCATION_TAIL.ln(),
        MevModel::LogNormal { mu_log, sigma_log } => {
            let z = statrs::distribution::Normal::new(0.0, 1.0)
                .expect("unit normal")
                .inverse_cdf(1.0 - TRUNCATION_TAIL);
            (mu_log + sigma_log * z).exp()
        }
        MevModel::Uniform { high, .. } => *high,
        MevModel::PointMass { .. } | MevModel::Empirical { .. } => {
            unreachable!("discrete models are integrated by exact sums")
        }
    }
}

/// E[Π(R - price)].
///
/// Closed form for risk-neutral profiles and point masses, exact finite sums
/// for empirical laws, adaptive quadrature otherwise.
pub fn expected_gain(profile: &RiskProfile, mev: &MevModel, price: f64) -> Result<f64> {
    if profile.is_risk_neutral() {
        return Ok(mev.mean() - price);
    }
    match mev {
        MevModel::PointMass { value } => Ok(profile.eval(value - price)),
        MevModel::Empirical { samples } => {
            let sum: f64 = samples.iter().map(|s| profile.eval(s - price)).sum();
            Ok(sum / samples.len() as f64)
        }
        continuous => {
            // Π vanishes at and below zero, so integrate only above the price.
            let lo = continuous.ess_inf().max(price);
            let hi = upper_truncation(continuous);
            if hi <= lo {
                return Ok(0.0);
            }
            numeric::integrate(
                |x| profile.eval(x - price) * density(continuous, x),
                lo,
                hi,
                QUADRATURE_TOLERANCE,
            )
        }
    }
}

/// Net per-ticket value `(1/N) E[Π(R - P)] - r P`; nonincreasing in P.
pub fn net_value(buyer: &BuyerSpec, tickets: u64, price: f64) -> Result<f64> {
    let gain = expected_gain(&buyer.risk, &buyer.mev, price)?;
    Ok(gain / tickets as f64 - buyer.cost_of_capital * price)
}

/// Maximal price at which the buyer still accepts a ticket.
///
/// Dispatches to the risk-neutral closed form `mean / (1 + r N)` when it
/// applies, to the support's essential supremum in the zero-cost concave
/// boundary regime, and to bisection otherwise.
pub fn max_price(buyer: &BuyerSpec, tickets: u64) -> Result<f64> {
    if buyer.risk.is_risk_neutral() {
        let n = tickets as f64;
        return Ok(buyer.mev.mean() / (1.0 + buyer.cost_of_capital * n));
    }
    if buyer.cost_of_capital == 0.0 {
        // Net value is nonnegative for every price; the indifference point is
        // the top of the support.
        let sup = buyer.mev.ess_sup();
        if !sup.is_finite() {
            return Err(Error::DivergentValuation {
                id: buyer.id.clone(),
            });
        }
        return Ok(sup);
    }
    max_price_numeric(buyer, tickets)
}

/// Maximal price via the bisection route regardless of profile.
///
/// Exposed so the closed forms and the numeric solver can be checked against
/// each other on the same inputs.
pub fn max_price_numeric(buyer: &BuyerSpec, tickets: u64) -> Result<f64> {
    let n = tickets as f64;
    let r = buyer.cost_of_capital;

    let upper = if r > 0.0 {
        // Every acceptable price satisfies P <= E[Π(R)] / (r N).
        expected_gain(&buyer.risk, &buyer.mev, 0.0)? / (r * n)
    } else if buyer.risk.is_risk_neutral() {
        buyer.mev.mean()
    } else {
        let sup = buyer.mev.ess_sup();
        if !sup.is_finite() {
            return Err(Error::DivergentValuation {
                id: buyer.id.clone(),
            });
        }
        sup
    };
    if upper <= 0.0 {
        return Ok(0.0);
    }
    numeric::bisect_nonincreasing(
        |p| net_value(buyer, tickets, p),
        0.0,
        upper,
        BISECTION_XTOL,
        BISECTION_MAX_ITER,
    )
}

/// Value every buyer and rank them into top set / runner-up price.
pub fn rank_valuations(market: &MarketParams) -> Result<ValuationResult> {
    market.validate()?;

    let mut per_buyer = BTreeMap::new();
    let mut boundary_ids = BTreeSet::new();
    for b in &market.buyers {
        let p = max_price(b, market.tickets)?;
        if b.risk.is_concave_family() && b.cost_of_capital == 0.0 {
            boundary_ids.insert(b.id.clone());
        }
        per_buyer.insert(b.id.clone(), p);
    }

    let p_top = per_buyer
        .values()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOLERANCE * p_top.max(1.0);
    let top_set: BTreeSet<String> = per_buyer
        .iter()
        .filter(|(_, &v)| (p_top - v).abs() <= tol)
        .map(|(k, _)| k.clone())
        .collect();

    let p_second = if top_set.len() > 1 {
        p_top
    } else {
        per_buyer
            .iter()
            .filter(|(k, _)| !top_set.contains(k.as_str()))
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // Top set covering every buyer leaves no runner-up; use the top price.
    let p_second = if p_second.is_finite() { p_second } else { p_top };

    Ok(ValuationResult {
        per_buyer,
        p_top,
        p_second,
        top_set,
        tie_tolerance: TIE_TOLERANCE,
        boundary_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn buyer(id: &str, r: f64, risk: RiskProfile, mev: MevModel) -> BuyerSpec {
        BuyerSpec {
            id: id.into(),
            cost_of_capital: r,
            risk,
            mev,
        }
    }

    #[test]
    fn expected_gain_risk_neutral_point_mass() {
        let g = expected_gain(
            &RiskProfile::RiskNeutral,
            &MevModel::PointMass { value: 1.0 },
            0.4,
        )
        .unwrap();
        assert_abs_diff_eq!(g, 0.6, epsilon = 1e-15);
    }

    #[test]
    fn expected_gain_risk_neutral_empirical_cancels() {
        let g = expected_gain(
            &RiskProfile::RiskNeutral,
            &MevModel::Empirical {
                samples: vec![0.0, 2.0],
            },
            1.0,
        )
        .unwrap();
        assert_abs_diff_eq!(g, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn expected_gain_exp_concave_point_mass_reduces_to_eval() {
        let profile = RiskProfile::ExpConcave { alpha: 1.0 };
        let g = expected_gain(&profile, &MevModel::PointMass { value: 1.0 }, 0.0).unwrap();
        assert_abs_diff_eq!(g, 1.0 - (-1.0f64).exp(), epsilon = 1e-14);
    }

    // Closed forms derived by direct integration, verified against quadrature.
    fn exp_concave_exponential_closed(alpha: f64, mean: f64, price: f64) -> f64 {
        (-price / mean).exp() * mean / (alpha * mean + 1.0)
    }

    fn exp_concave_uniform_closed(alpha: f64, low: f64, high: f64, price: f64) -> f64 {
        if price >= high {
            return 0.0;
        }
        let l = low.max(price);
        ((high - l) - ((-alpha * (l - price)).exp() - (-alpha * (high - price)).exp()) / alpha)
            / (alpha * (high - low))
    }

    fn power_concave_uniform_closed(gamma: f64, low: f64, high: f64, price: f64) -> f64 {
        if price >= high {
            return 0.0;
        }
        let l = low.max(price);
        ((high - price).powf(gamma + 1.0) - (l - price).powf(gamma + 1.0))
            / ((gamma + 1.0) * (high - low))
    }

    #[test]
    fn quadrature_matches_exponential_closed_form() {
        for &(alpha, mean, price) in &[
            (1.0, 1.0, 0.0),
            (1.0, 1.0, 0.5),
            (0.7, 2.0, 0.9),
            (3.0, 0.5, 1.2),
        ] {
            let profile = RiskProfile::ExpConcave { alpha };
            let mev = MevModel::Exponential { mean };
            let got = expected_gain(&profile, &mev, price).unwrap();
            let want = exp_concave_exponential_closed(alpha, mean, price);
            assert_abs_diff_eq!(got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn quadrature_matches_uniform_closed_forms() {
        let got = expected_gain(
            &RiskProfile::ExpConcave { alpha: 1.3 },
            &MevModel::Uniform {
                low: 0.5,
                high: 3.0,
            },
            1.1,
        )
        .unwrap();
        assert_abs_diff_eq!(
            got,
            exp_concave_uniform_closed(1.3, 0.5, 3.0, 1.1),
            epsilon = 1e-10
        );

        let got = expected_gain(
            &RiskProfile::PowerConcave { gamma: 0.6 },
            &MevModel::Uniform {
                low: 0.5,
                high: 3.0,
            },
            1.1,
        )
        .unwrap();
        assert_abs_diff_eq!(
            got,
            power_concave_uniform_closed(0.6, 0.5, 3.0, 1.1),
            epsilon = 1e-10
        );
    }

    #[test]
    fn expected_gain_zero_beyond_support() {
        let g = expected_gain(
            &RiskProfile::ExpConcave { alpha: 1.0 },
            &MevModel::Uniform {
                low: 0.0,
                high: 2.0,
            },
            2.5,
        )
        .unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn net_value_examples() {
        // Value exhausted at the mean when financing is free.
        let b = buyer(
            "b",
            0.0,
            RiskProfile::RiskNeutral,
            MevModel::PointMass { value: 1.0 },
        );
        assert_abs_diff_eq!(net_value(&b, 10, 1.0).unwrap(), 0.0, epsilon = 1e-15);

        // Root of the linear form at mean / (1 + r N).
        let b = buyer(
            "b",
            0.01,
            RiskProfile::RiskNeutral,
            MevModel::PointMass { value: 1.0 },
        );
        assert_abs_diff_eq!(
            net_value(&b, 10, 1.0 / 1.1).unwrap(),
            0.0,
            epsilon = 1e-15
        );

        let b = buyer(
            "b",
            0.01,
            RiskProfile::ExpConcave { alpha: 1.0 },
            MevModel::PointMass { value: 1.0 },
        );
        assert_abs_diff_eq!(
            net_value(&b, 10, 0.0).unwrap(),
            (1.0 - (-1.0f64).exp()) / 10.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn max_price_risk_neutral_closed_forms() {
        let b = buyer(
            "b",
            0.0,
            RiskProfile::RiskNeutral,
            MevModel::PointMass { value: 1.0 },
        );
        assert_eq!(max_price(&b, 100).unwrap(), 1.0);

        let b = buyer(
            "b",
            0.001,
            RiskProfile::RiskNeutral,
            MevModel::PointMass { value: 10.0 },
        );
        let closed = max_price(&b, 100).unwrap();
        assert_abs_diff_eq!(closed, 10.0 / 1.1, epsilon = 1e-12);
        // Same inputs through the numeric route.
        let numeric = max_price_numeric(&b, 100).unwrap();
        assert_abs_diff_eq!(numeric, closed, epsilon = 1e-9);
    }

    // Independent scalar oracle: bisect Π(mu - P) / N - r P = 0 directly on
    // the closed-form expression, sharing no code with the solver under test.
    fn scalar_oracle_exp_concave_point_mass(alpha: f64, mu: f64, r: f64, n: f64) -> f64 {
        let f = |p: f64| (1.0 - (-alpha * (mu - p)).exp()) / alpha / n - r * p;
        let (mut lo, mut hi) = (0.0f64, mu);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn max_price_exp_concave_point_mass_matches_scalar_oracle() {
        // r N = 1: the root of 1 - e^{-(1-P)} = P, i.e. 1 minus the fixed
        // point of u e^u = ... = 0.43285670959021616.
        let b = buyer(
            "b",
            0.1,
            RiskProfile::ExpConcave { alpha: 1.0 },
            MevModel::PointMass { value: 1.0 },
        );
        let p = max_price(&b, 10).unwrap();
        assert_abs_diff_eq!(p, 0.432_856_709_590_216_1, epsilon = 1e-9);
        assert_abs_diff_eq!(
            p,
            scalar_oracle_exp_concave_point_mass(1.0, 1.0, 0.1, 10.0),
            epsilon = 1e-9
        );

        // r N = 0.1 lands much closer to the point mass.
        let b = buyer(
            "b",
            0.01,
            RiskProfile::ExpConcave { alpha: 1.0 },
            MevModel::PointMass { value: 1.0 },
        );
        let p = max_price(&b, 10).unwrap();
        assert_abs_diff_eq!(p, 0.905_125_878_476_074_4, epsilon = 1e-9);
        assert_abs_diff_eq!(
            p,
            scalar_oracle_exp_concave_point_mass(1.0, 1.0, 0.01, 10.0),
            epsilon = 1e-9
        );
    }

    #[test]
    fn max_price_feasibility_residuals() {
        let b = buyer(
            "b",
            0.02,
            RiskProfile::ExpConcave { alpha: 0.8 },
            MevModel::Exponential { mean: 2.0 },
        );
        let p = max_price(&b, 25).unwrap();
        assert!(net_value(&b, 25, p).unwrap() >= -1e-9);
        let bump = p + 1e-6 * p.max(1.0);
        assert!(net_value(&b, 25, bump).unwrap() < 0.0);
    }

    #[test]
    fn zero_cost_concave_unbounded_support_diverges() {
        let b = buyer(
            "b",
            0.0,
            RiskProfile::ExpConcave { alpha: 1.0 },
            MevModel::Exponential { mean: 1.0 },
        );
        match max_price(&b, 10) {
            Err(Error::DivergentValuation { id }) => assert_eq!(id, "b"),
            other => panic!("expected DivergentValuation, got {other:?}"),
        }
    }

    #[test]
    fn zero_cost_concave_bounded_support_hits_ess_sup() {
        let b = buyer(
            "b",
            0.0,
            RiskProfile::ExpConcave { alpha: 1.0 },
            MevModel::Uniform {
                low: 0.0,
                high: 2.0,
            },
        );
        assert_eq!(max_price(&b, 10).unwrap(), 2.0);
        // Numeric route converges to the same boundary.
        assert_abs_diff_eq!(max_price_numeric(&b, 10).unwrap(), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_value_payoff_prices_at_zero() {
        let b = buyer(
            "b",
            0.05,
            RiskProfile::ExpConcave { alpha: 1.0 },
            MevModel::PointMass { value: 0.0 },
        );
        assert_eq!(max_price(&b, 10).unwrap(), 0.0);
    }

    #[test]
    fn jensen_gap_when_support_clears_price() {
        // With the payoff support strictly above the price the clipping never
        // binds, so strict Jensen applies to the concave profile.
        let profile = RiskProfile::ExpConcave { alpha: 1.0 };
        let mev = MevModel::Uniform {
            low: 2.0,
            high: 4.0,
        };
        let price = 1.0;
        let gain = expected_gain(&profile, &mev, price).unwrap();
        assert!(gain < profile.eval(mev.mean() - price));
    }

    fn market_of(buyers: Vec<BuyerSpec>, tickets: u64) -> MarketParams {
        MarketParams {
            tickets,
            buyers,
            pbs: None,
        }
    }

    #[test]
    fn rank_two_distinct_buyers() {
        let m = market_of(
            vec![
                buyer(
                    "hi",
                    0.0,
                    RiskProfile::RiskNeutral,
                    MevModel::PointMass { value: 2.0 },
                ),
                buyer(
                    "lo",
                    0.0,
                    RiskProfile::RiskNeutral,
                    MevModel::PointMass { value: 1.0 },
                ),
            ],
            5,
        );
        let v = rank_valuations(&m).unwrap();
        assert_eq!(v.p_top, 2.0);
        assert_eq!(v.p_second, 1.0);
        assert!(v.top_set.contains("hi") && v.top_set.len() == 1);
    }

    #[test]
    fn rank_homogeneous_ties_everyone() {
        let mk = |id: &str| {
            buyer(
                id,
                0.0,
                RiskProfile::RiskNeutral,
                MevModel::PointMass { value: 1.5 },
            )
        };
        let m = market_of(vec![mk("a"), mk("b"), mk("c")], 9);
        let v = rank_valuations(&m).unwrap();
        assert_eq!(v.p_top, 1.5);
        assert_eq!(v.p_second, 1.5);
        assert_eq!(v.top_set.len(), 3);
    }

    #[test]
    fn rank_tie_branch_keeps_second_at_top() {
        let m = market_of(
            vec![
                buyer(
                    "a",
                    0.0,
                    RiskProfile::RiskNeutral,
                    MevModel::PointMass { value: 1.0 },
                ),
                buyer(
                    "b",
                    0.0,
                    RiskProfile::RiskNeutral,
                    MevModel::PointMass { value: 1.0 },
                ),
                buyer(
                    "c",
                    0.0,
                    RiskProfile::RiskNeutral,
                    MevModel::PointMass { value: 0.5 },
                ),
            ],
            4,
        );
        let v = rank_valuations(&m).unwrap();
        assert_eq!(v.top_set.len(), 2);
        assert_eq!(v.p_second, 1.0);
    }

    #[test]
    fn rank_single_buyer_uses_empty_complement_convention() {
        let m = market_of(
            vec![buyer(
                "only",
                0.0,
                RiskProfile::RiskNeutral,
                MevModel::PointMass { value: 3.0 },
            )],
            1,
        );
        let v = rank_valuations(&m).unwrap();
        assert_eq!(v.p_second, v.p_top);
    }

    #[test]
    fn rank_flags_boundary_regime() {
        let m = market_of(
            vec![
                buyer(
                    "edge",
                    0.0,
                    RiskProfile::ExpConcave { alpha: 1.0 },
                    MevModel::Uniform {
                        low: 0.0,
                        high: 2.0,
                    },
                ),
                buyer(
                    "plain",
                    0.01,
                    RiskProfile::RiskNeutral,
                    MevModel::PointMass { value: 1.0 },
                ),
            ],
            4,
        );
        let v = rank_valuations(&m).unwrap();
        assert!(v.boundary_ids.contains("edge"));
        assert!(!v.boundary_ids.contains("plain"));
        assert_eq!(v.per_buyer["edge"], 2.0);
    }
}
