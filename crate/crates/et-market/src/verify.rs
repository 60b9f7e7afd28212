//! Built-in verification suite: one scenario per analytic result, each
//! checked against its closed form and holdings pattern.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::equilibrium::{investor_dominance_threshold, solve_equilibrium, Equilibrium};
use crate::error::Result;
use crate::model::{BuyerSpec, MarketParams, MevModel, RiskProfile};
use crate::pbs::{self, GammaRule, PbsConfig};
use crate::scenario::{Expectations, Scenario, SimSpec};

/// One comparison between a solver output and its analytic expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub scenario: String,
    pub claim: String,
    pub expected: Value,
    pub actual: Value,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub per_check: Vec<CheckResult>,
    pub all_pass: bool,
}

fn rn_buyer(id: &str, r: f64, mev: MevModel) -> BuyerSpec {
    BuyerSpec {
        id: id.into(),
        cost_of_capital: r,
        risk: RiskProfile::RiskNeutral,
        mev,
    }
}

fn pm(value: f64) -> MevModel {
    MevModel::PointMass { value }
}

fn scenario(name: &str, market: MarketParams, expect: Expectations) -> Scenario {
    Scenario {
        schema: crate::scenario::SCHEMA_VERSION,
        name: name.into(),
        market,
        lambda: 0.0,
        sim: None,
        expect: Some(expect),
    }
}

/// The bundled scenarios, one per analytic regime.
pub fn built_in_suite() -> Vec<Scenario> {
    let mut suite = Vec::new();

    // Homogeneous risk-neutral buyers with free capital: capture is total and
    // every buyer holds N/B tickets.
    let market = MarketParams {
        tickets: 8,
        buyers: (1..=4)
            .map(|i| rn_buyer(&format!("b{i}"), 0.0, MevModel::Exponential { mean: 1.0 }))
            .collect(),
        pbs: None,
    };
    let mut s = scenario(
        "homogeneous-risk-neutral-total-capture",
        market,
        Expectations {
            price: Some(1.0),
            chi: Some(1.0),
            holdings: Some(
                (1..=4).map(|i| (format!("b{i}"), 2.0)).collect(),
            ),
            top_set: Some((1..=4).map(|i| format!("b{i}")).collect()),
            tolerance: 1e-12,
            ..Default::default()
        },
    );
    s.sim = Some(SimSpec {
        slots: 100_000,
        seed: 11,
        trace: None,
        proposal_delay: 1,
    });
    suite.push(s);

    // Homogeneous risk-averse buyers with capital costs: capture is partial.
    // At alpha = 1, exponential mean 1, r = 0.01, N = 100 the maximal price
    // solves e^{-P} = 2P, whose root is the Lambert-W value below.
    let w_half = 0.351_733_711_249_195_84;
    let market = MarketParams {
        tickets: 100,
        buyers: (1..=4)
            .map(|i| BuyerSpec {
                id: format!("b{i}"),
                cost_of_capital: 0.01,
                risk: RiskProfile::ExpConcave { alpha: 1.0 },
                mev: MevModel::Exponential { mean: 1.0 },
            })
            .collect(),
        pbs: None,
    };
    let mut s = scenario(
        "homogeneous-risk-averse-partial-capture",
        market,
        Expectations {
            price: Some(w_half),
            chi: Some(w_half),
            chi_below: Some(1.0),
            holdings: Some((1..=4).map(|i| (format!("b{i}"), 25.0)).collect()),
            tolerance: 1e-6,
            ..Default::default()
        },
    );
    s.sim = Some(SimSpec {
        slots: 50_000,
        seed: 12,
        trace: None,
        proposal_delay: 1,
    });
    suite.push(s);

    // Heterogeneous capital costs, identical abilities: the price settles at
    // the second-cheapest buyer's valuation, chi = 1/(1 + r2 N), and the
    // cheapest buyer takes every ticket.
    let market = MarketParams {
        tickets: 100,
        buyers: vec![
            rn_buyer("fund", 0.001, pm(1.0)),
            rn_buyer("desk", 0.002, pm(1.0)),
            rn_buyer("desk2", 0.002, pm(1.0)),
        ],
        pbs: None,
    };
    suite.push(scenario(
        "heterogeneous-capital-second-lowest-rate",
        market,
        Expectations {
            price: Some(1.0 / 1.2),
            chi: Some(1.0 / 1.2),
            holdings: Some(
                [("fund", 100.0), ("desk", 0.0), ("desk2", 0.0)]
                    .map(|(k, v)| (k.to_string(), v))
                    .into(),
            ),
            top_set: Some(["fund".to_string()].into()),
            tolerance: 1e-9,
            ..Default::default()
        },
    ));

    // Heterogeneous extraction ability with free capital: the best buyer
    // takes everything at the runner-up's valuation, chi = second/best mean.
    let market = MarketParams {
        tickets: 5,
        buyers: vec![rn_buyer("best", 0.0, pm(2.0)), rn_buyer("runner", 0.0, pm(1.0))],
        pbs: None,
    };
    suite.push(scenario(
        "heterogeneous-ability-second-best-ratio",
        market,
        Expectations {
            price: Some(1.0),
            chi: Some(0.5),
            holdings: Some(
                [("best", 5.0), ("runner", 0.0)]
                    .map(|(k, v)| (k.to_string(), v))
                    .into(),
            ),
            top_set: Some(["best".to_string()].into()),
            tolerance: 1e-12,
            ..Default::default()
        },
    ));

    // PBS where no buyer can build: everyone earns the same PBS floor, so the
    // market reduces to the heterogeneous-capital case above.
    let market = MarketParams {
        tickets: 100,
        buyers: vec![
            rn_buyer("fund", 0.001, pm(0.0)),
            rn_buyer("desk", 0.002, pm(0.0)),
            rn_buyer("desk2", 0.003, pm(0.0)),
        ],
        pbs: Some(PbsConfig {
            non_buyer_abilities: vec![pm(5.0), pm(3.0)],
            gamma: GammaRule::SecondMax,
            joint_samples: 1,
            seed: 0,
            exclude_own_ability: false,
        }),
    };
    suite.push(scenario(
        "pbs-no-builder-buyers-capital-selects",
        market,
        Expectations {
            price: Some(3.0 / 1.2),
            chi: Some(1.0 / 1.2),
            holdings: Some(
                [("fund", 100.0), ("desk", 0.0), ("desk2", 0.0)]
                    .map(|(k, v)| (k.to_string(), v))
                    .into(),
            ),
            top_set: Some(["fund".to_string()].into()),
            tolerance: 1e-12,
            ..Default::default()
        },
    ));

    // PBS with pure investors undercutting a builder on capital cost: the
    // zero-ability investors hold every ticket.
    suite.push(scenario(
        "pbs-large-investors-dominate",
        large_investor_market(),
        Expectations {
            price: Some(1.0 / 1.01),
            chi: Some(1.0 / 1.01),
            holdings: Some(
                [("i1", 5.0), ("i2", 5.0), ("builder", 0.0)]
                    .map(|(k, v)| (k.to_string(), v))
                    .into(),
            ),
            top_set: Some(["i1".to_string(), "i2".to_string()].into()),
            tolerance: 1e-12,
            ..Default::default()
        },
    ));

    // PBS with builders buying tickets: tickets go to the highest valuation
    // mean/(1 + r N), which here is the cheap zero-ability buyer, not the
    // strongest builder.
    let market = MarketParams {
        tickets: 10,
        buyers: vec![
            BuyerSpec {
                id: "builder-big".into(),
                cost_of_capital: 0.06,
                risk: RiskProfile::RiskNeutral,
                mev: pm(6.0),
            },
            BuyerSpec {
                id: "builder-small".into(),
                cost_of_capital: 0.001,
                risk: RiskProfile::RiskNeutral,
                mev: pm(2.0),
            },
            BuyerSpec {
                id: "fund".into(),
                cost_of_capital: 0.0005,
                risk: RiskProfile::RiskNeutral,
                mev: pm(0.0),
            },
        ],
        pbs: Some(PbsConfig {
            non_buyer_abilities: vec![pm(4.0)],
            gamma: GammaRule::SecondMax,
            joint_samples: 1,
            seed: 0,
            exclude_own_ability: false,
        }),
    };
    suite.push(scenario(
        "pbs-builders-compete-highest-valuation",
        market,
        Expectations {
            price: Some(4.0 / 1.01),
            chi: Some(1.0 / 1.01),
            holdings: Some(
                [("builder-big", 0.0), ("builder-small", 0.0), ("fund", 10.0)]
                    .map(|(k, v)| (k.to_string(), v))
                    .into(),
            ),
            top_set: Some(["fund".to_string()].into()),
            tolerance: 1e-9,
            ..Default::default()
        },
    ));

    suite
}

/// Market used for the investor-dominance threshold checks: two zero-ability
/// investors against one builder whose derived payoff mean matches theirs.
pub fn large_investor_market() -> MarketParams {
    MarketParams {
        tickets: 10,
        buyers: vec![
            rn_buyer("i1", 0.001, pm(0.0)),
            rn_buyer("i2", 0.001, pm(0.0)),
            rn_buyer("builder", 0.02, pm(1.0)),
        ],
        pbs: Some(PbsConfig {
            non_buyer_abilities: vec![pm(1.2)],
            gamma: GammaRule::SecondMax,
            joint_samples: 1,
            seed: 0,
            exclude_own_ability: false,
        }),
    }
}

fn numeric_check(scenario: &str, claim: &str, expected: f64, actual: f64, tol: f64) -> CheckResult {
    CheckResult {
        scenario: scenario.into(),
        claim: claim.into(),
        expected: json!(expected),
        actual: json!(actual),
        tolerance: tol,
        pass: (actual - expected).abs() <= tol,
    }
}

fn error_check(scenario: &str, claim: &str, expected: Value, err: &str, tol: f64) -> CheckResult {
    CheckResult {
        scenario: scenario.into(),
        claim: claim.into(),
        expected,
        actual: json!(format!("error: {err}")),
        tolerance: tol,
        pass: false,
    }
}

fn solve_for_checks(s: &Scenario) -> Result<Equilibrium> {
    let market = if s.market.pbs.is_some() {
        pbs::reduce_market(&s.market)?
    } else {
        s.market.clone()
    };
    solve_equilibrium(&market, s.lambda)
}

/// Evaluate a scenario's declared expectations. Solver errors fail the
/// affected checks instead of aborting.
pub fn check_scenario(s: &Scenario) -> Vec<CheckResult> {
    let Some(expect) = &s.expect else {
        return Vec::new();
    };
    let tol = expect.tolerance;
    let name = s.name.as_str();

    let eq = match solve_for_checks(s) {
        Ok(eq) => eq,
        Err(e) => {
            let msg = e.to_string();
            let mut failed = Vec::new();
            if let Some(p) = expect.price {
                failed.push(error_check(name, "price", json!(p), &msg, tol));
            }
            if let Some(c) = expect.chi {
                failed.push(error_check(name, "chi", json!(c), &msg, tol));
            }
            if let Some(b) = expect.chi_below {
                failed.push(error_check(name, "chi strictly below", json!(b), &msg, tol));
            }
            for (id, k) in expect.holdings.iter().flatten() {
                failed.push(error_check(name, &format!("holdings[{id}]"), json!(k), &msg, tol));
            }
            if let Some(ts) = &expect.top_set {
                failed.push(error_check(name, "top_set", json!(ts), &msg, tol));
            }
            return failed;
        }
    };

    let mut checks = Vec::new();
    if let Some(p) = expect.price {
        checks.push(numeric_check(name, "price", p, eq.price, tol));
    }
    if let Some(c) = expect.chi {
        checks.push(numeric_check(name, "chi", c, eq.chi, tol));
    }
    if let Some(bound) = expect.chi_below {
        checks.push(CheckResult {
            scenario: name.into(),
            claim: "chi strictly below".into(),
            expected: json!(format!("< {bound}")),
            actual: json!(eq.chi),
            tolerance: tol,
            pass: eq.chi <= bound - tol,
        });
    }
    for (id, k) in expect.holdings.iter().flatten() {
        let actual = eq.holdings.get(id).copied().unwrap_or(f64::NAN);
        checks.push(numeric_check(name, &format!("holdings[{id}]"), *k, actual, tol));
    }
    if let Some(ts) = &expect.top_set {
        let holders: BTreeSet<String> = eq
            .holdings
            .iter()
            .filter(|(_, &k)| k > 0.0)
            .map(|(id, _)| id.clone())
            .collect();
        checks.push(CheckResult {
            scenario: name.into(),
            claim: "top_set".into(),
            expected: json!(ts),
            actual: json!(holders),
            tolerance: tol,
            pass: &holders == ts,
        });
    }
    checks
}

/// Threshold checks for the large-investor market: the analytic capital-cost
/// bound, dominance below it, and the flip when one investor crosses it.
fn investor_threshold_checks() -> Vec<CheckResult> {
    let name = "pbs-large-investors-dominate";
    let tol = 1e-12;
    let market = large_investor_market();
    let investors: BTreeSet<String> = ["i1".to_string(), "i2".to_string()].into();

    let result: Result<Vec<CheckResult>> = (|| {
        let reduced = pbs::reduce_market(&market)?;
        let investor_mean = pbs::gamma_mean(&market)?;
        let t = investor_dominance_threshold(&reduced, &investors, investor_mean)?;
        // (1/N)((1 + r_b N) E[R_I]/E[R_b] - 1) with r_b = 0.02, N = 10 and
        // equal means.
        let expected_bound = 0.02;
        let mut checks = vec![
            numeric_check(name, "dominance bound", expected_bound, t.bound, tol),
            CheckResult {
                scenario: name.into(),
                claim: "investors dominate below bound".into(),
                expected: json!(true),
                actual: json!(t.dominates),
                tolerance: tol,
                pass: t.dominates,
            },
        ];

        // Nudge one investor just above the bound: dominance must flip.
        let mut perturbed = reduced;
        for b in &mut perturbed.buyers {
            if b.id == "i2" {
                b.cost_of_capital = t.bound + 1e-4;
            }
        }
        let flipped = investor_dominance_threshold(&perturbed, &investors, investor_mean)?;
        checks.push(CheckResult {
            scenario: name.into(),
            claim: "dominance flips above bound".into(),
            expected: json!(false),
            actual: json!(flipped.dominates),
            tolerance: tol,
            pass: !flipped.dominates,
        });
        Ok(checks)
    })();

    result.unwrap_or_else(|e| {
        vec![error_check(
            name,
            "dominance threshold",
            json!("threshold computable"),
            &e.to_string(),
            tol,
        )]
    })
}

/// Run expectation checks for a batch of scenarios, ordered by scenario name.
pub fn run_suite(scenarios: &[Scenario]) -> VerificationReport {
    let mut per_check: Vec<CheckResult> = scenarios.iter().flat_map(check_scenario).collect();
    per_check.sort_by(|a, b| a.scenario.cmp(&b.scenario));
    let all_pass = per_check.iter().all(|c| c.pass);
    VerificationReport {
        per_check,
        all_pass,
    }
}

/// Run the bundled suite plus the investor-threshold structural checks.
pub fn run_built_in() -> VerificationReport {
    let suite = built_in_suite();
    let mut per_check: Vec<CheckResult> = suite.iter().flat_map(check_scenario).collect();
    per_check.extend(investor_threshold_checks());
    per_check.sort_by(|a, b| a.scenario.cmp(&b.scenario));
    let all_pass = per_check.iter().all(|c| c.pass);
    VerificationReport {
        per_check,
        all_pass,
    }
}
