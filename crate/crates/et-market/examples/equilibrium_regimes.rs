//! The four canonical market regimes and what each does to the protocol's
//! MEV-capture ratio chi = price / expected winner MEV.
//!
//! Run with: cargo run --example equilibrium_regimes

use et_market::{solve_equilibrium, BuyerSpec, MarketParams, MevModel, RiskProfile};

fn rn(id: &str, r: f64, mean: f64) -> BuyerSpec {
    BuyerSpec {
        id: id.into(),
        cost_of_capital: r,
        risk: RiskProfile::RiskNeutral,
        mev: MevModel::Exponential { mean },
    }
}

fn show(label: &str, market: &MarketParams) -> et_market::Result<()> {
    let eq = solve_equilibrium(market, 0.0)?;
    println!("== {label}");
    println!("   price = {:.6}, chi = {:.6}, tags = {:?}", eq.price, eq.chi, eq.regime_tags);
    for (id, k) in &eq.holdings {
        if *k > 0.0 {
            println!("   {id:<10} holds {k:.2}");
        }
    }
    println!();
    Ok(())
}

fn main() -> et_market::Result<()> {
    // 1. Identical risk-neutral buyers, free capital: competition pushes the
    //    price to the full expected MEV and the protocol captures everything.
    let market = MarketParams {
        tickets: 8,
        buyers: (1..=4).map(|i| rn(&format!("b{i}"), 0.0, 1.0)).collect(),
        pbs: None,
    };
    show("homogeneous, risk-neutral, free capital: chi = 1", &market)?;

    // 2. Identical but risk-averse buyers paying for capital: the common
    //    valuation discounts risk and financing, so capture is partial.
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
    show("homogeneous, risk-averse, costly capital: chi < 1", &market)?;

    // 3. Identical abilities, different capital costs: the cheapest buyer
    //    takes every ticket but only pays the runner-up's valuation, so
    //    chi = 1/(1 + r2 N).
    let market = MarketParams {
        tickets: 100,
        buyers: vec![rn("fund", 0.001, 1.0), rn("desk", 0.002, 1.0), rn("desk2", 0.002, 1.0)],
        pbs: None,
    };
    show("heterogeneous capital costs: chi = 1/(1 + r2 N)", &market)?;

    // 4. Different extraction abilities, free capital: the best buyer takes
    //    everything at the second-best valuation, so chi = E[R2]/E[R1].
    let market = MarketParams {
        tickets: 5,
        buyers: vec![rn("best", 0.0, 2.0), rn("runner", 0.0, 1.0)],
        pbs: None,
    };
    show("heterogeneous ability: chi = second mean / best mean", &market)?;

    // The equilibrium is a band: lambda slides the price from the runner-up
    // valuation (0, the default) to the top valuation (1).
    let market = MarketParams {
        tickets: 5,
        buyers: vec![rn("best", 0.0, 2.0), rn("runner", 0.0, 1.0)],
        pbs: None,
    };
    println!("price band on the ability-gap market:");
    for lambda in [0.0, 0.5, 1.0] {
        let eq = solve_equilibrium(&market, lambda)?;
        println!("   lambda = {lambda:.1}: price = {:.4}, chi = {:.4}", eq.price, eq.chi);
    }
    Ok(())
}
