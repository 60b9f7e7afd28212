//! Multi-seed convergence: for each analytic regime, the sample mean of the
//! simulated capture ratio over ten independent seeds lands within three
//! combined standard errors of the analytic ratio at 100k slots.

use et_market::{
    reduce_market, run_slots_traced, solve_equilibrium, BuyerSpec, GammaRule, MarketParams,
    MevModel, PbsConfig, RiskProfile,
};

const SLOTS: u64 = 100_000;
const SEEDS: [u64; 10] = [101, 102, 103, 104, 105, 106, 107, 108, 109, 110];

fn rn(id: &str, r: f64, mev: MevModel) -> BuyerSpec {
    BuyerSpec {
        id: id.into(),
        cost_of_capital: r,
        risk: RiskProfile::RiskNeutral,
        mev,
    }
}

/// Run the market over all seeds and compare mean(chi_hat) against
/// chi_analytic, folding `extra_se` (analytic-side Monte Carlo error, for
/// sampled PBS laws) into the tolerance.
fn assert_converges(sim_market: &MarketParams, solve_market: &MarketParams, extra_se: f64) {
    let eq = solve_equilibrium(solve_market, 0.0).unwrap();
    let chi_hats: Vec<f64> = SEEDS
        .iter()
        .map(|&seed| {
            let report = run_slots_traced(sim_market, &eq, SLOTS, seed, false).unwrap();
            report.chi_hat.expect("MEV realized")
        })
        .collect();

    let mean = chi_hats.iter().sum::<f64>() / chi_hats.len() as f64;
    let var = chi_hats
        .iter()
        .map(|c| (c - mean).powi(2))
        .sum::<f64>()
        / (chi_hats.len() - 1) as f64;
    let se_mean = (var / chi_hats.len() as f64).sqrt();
    let combined = (se_mean.powi(2) + extra_se.powi(2)).sqrt();

    let dev = (mean - eq.chi).abs();
    assert!(
        dev <= 3.0 * combined.max(1e-9),
        "mean chi_hat {mean} vs analytic {} (dev {dev}, 3 se {})",
        eq.chi,
        3.0 * combined
    );
}

#[test]
fn homogeneous_risk_neutral_converges_to_total_capture() {
    let m = MarketParams {
        tickets: 8,
        buyers: (0..4)
            .map(|i| rn(&format!("b{i}"), 0.0, MevModel::Exponential { mean: 1.0 }))
            .collect(),
        pbs: None,
    };
    assert_converges(&m, &m, 0.0);
}

#[test]
fn homogeneous_risk_averse_converges_to_partial_capture() {
    let m = MarketParams {
        tickets: 100,
        buyers: (0..4)
            .map(|i| BuyerSpec {
                id: format!("b{i}"),
                cost_of_capital: 0.01,
                risk: RiskProfile::ExpConcave { alpha: 1.0 },
                mev: MevModel::Exponential { mean: 1.0 },
            })
            .collect(),
        pbs: None,
    };
    assert_converges(&m, &m, 0.0);
}

#[test]
fn heterogeneous_capital_costs_converge_to_second_lowest_rate() {
    let m = MarketParams {
        tickets: 100,
        buyers: vec![
            rn("lo", 0.001, MevModel::Exponential { mean: 1.0 }),
            rn("mid", 0.002, MevModel::Exponential { mean: 1.0 }),
            rn("mid2", 0.002, MevModel::Exponential { mean: 1.0 }),
        ],
        pbs: None,
    };
    assert_converges(&m, &m, 0.0);
}

#[test]
fn heterogeneous_ability_converges_to_mean_ratio() {
    let m = MarketParams {
        tickets: 5,
        buyers: vec![
            rn("best", 0.0, MevModel::Exponential { mean: 2.0 }),
            rn("runner", 0.0, MevModel::Exponential { mean: 1.0 }),
        ],
        pbs: None,
    };
    assert_converges(&m, &m, 0.0);
}

#[test]
fn pbs_market_converges_with_sampled_payoff_laws() {
    // Zero-ability fund outbids a builder whose own ability caps the PBS
    // floor; the floor min(Y, 1.5) is genuinely random, so the derived law is
    // an empirical sample carrying its own Monte Carlo error.
    let m = MarketParams {
        tickets: 10,
        buyers: vec![
            BuyerSpec {
                id: "builder".into(),
                cost_of_capital: 0.05,
                risk: RiskProfile::RiskNeutral,
                mev: MevModel::PointMass { value: 1.5 },
            },
            rn("fund", 0.0001, MevModel::PointMass { value: 0.0 }),
        ],
        pbs: Some(PbsConfig {
            non_buyer_abilities: vec![MevModel::Uniform { low: 0.0, high: 6.0 }],
            gamma: GammaRule::SecondMax,
            joint_samples: 50_000,
            seed: 31,
            exclude_own_ability: false,
        }),
    };
    let reduced = reduce_market(&m).unwrap();

    // Analytic-side Monte Carlo error: the fund's derived law sets both the
    // price and the winner mean.
    let fund_law = &reduced
        .buyers
        .iter()
        .find(|b| b.id == "fund")
        .unwrap()
        .mev;
    let (mean, sd, count) = match fund_law {
        MevModel::Empirical { samples } => {
            let n = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / n;
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, var.sqrt(), n)
        }
        other => panic!("expected sampled law, got {other:?}"),
    };
    let eq = solve_equilibrium(&reduced, 0.0).unwrap();
    // chi = price / mean; the mean's sampling error propagates with slope
    // price / mean^2.
    let extra_se = (eq.price / (mean * mean)) * sd / count.sqrt();

    assert_converges(&m, &reduced, extra_se);
}
