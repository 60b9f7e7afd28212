//! When do pure investors (no building ability, cheap capital) crowd every
//! builder out of the ticket market? The capital-cost threshold and the
//! dominance flip around it.
//!
//! Run with: cargo run --example large_investors

use std::collections::BTreeSet;

use et_market::{
    gamma_mean, investor_dominance_threshold, reduce_market, solve_equilibrium, BuyerSpec,
    GammaRule, MarketParams, MevModel, PbsConfig, RiskProfile,
};

fn rn(id: &str, r: f64, mev: MevModel) -> BuyerSpec {
    BuyerSpec {
        id: id.into(),
        cost_of_capital: r,
        risk: RiskProfile::RiskNeutral,
        mev,
    }
}

fn main() -> et_market::Result<()> {
    let pm = |v: f64| MevModel::PointMass { value: v };

    // Two investors with zero ability against one builder; one outside
    // builder feeds the PBS price.
    let market = MarketParams {
        tickets: 10,
        buyers: vec![
            rn("i1", 0.001, pm(0.0)),
            rn("i2", 0.001, pm(0.0)),
            rn("builder", 0.02, pm(1.0)),
        ],
        pbs: Some(PbsConfig {
            non_buyer_abilities: vec![pm(1.2)],
            gamma: GammaRule::SecondMax,
            joint_samples: 1,
            seed: 0,
            exclude_own_ability: false,
        }),
    };

    let reduced = reduce_market(&market)?;
    let investor_mean = gamma_mean(&market)?;
    println!("investors earn the PBS floor: E[Γ] = {investor_mean:.4}");

    let investors: BTreeSet<String> = ["i1".to_string(), "i2".to_string()].into();
    let t = investor_dominance_threshold(&reduced, &investors, investor_mean)?;
    println!(
        "capital-cost bound = {:.6}; investors at r = 0.001 dominate: {}",
        t.bound, t.dominates
    );

    let eq = solve_equilibrium(&reduced, 0.0)?;
    println!("\nequilibrium holdings (price {:.4}, chi {:.4}):", eq.price, eq.chi);
    for (id, k) in &eq.holdings {
        println!("  {id:<8} {k:.1}");
    }

    // Push one investor past the bound: the sufficient condition fails.
    let mut dearer = reduced.clone();
    for b in &mut dearer.buyers {
        if b.id == "i2" {
            b.cost_of_capital = t.bound + 1e-4;
        }
    }
    let flipped = investor_dominance_threshold(&dearer, &investors, investor_mean)?;
    println!(
        "\nraising i2 to r = {:.6} (just above the bound): dominates = {}",
        t.bound + 1e-4,
        flipped.dominates
    );

    // Push both investors well past it and the builder takes the market.
    let mut dearest = reduced;
    for b in &mut dearest.buyers {
        if b.id.starts_with('i') {
            b.cost_of_capital = 0.05;
        }
    }
    let eq = solve_equilibrium(&dearest, 0.0)?;
    println!("\nwith both investors at r = 0.05 the builder wins:");
    for (id, k) in &eq.holdings {
        println!("  {id:<8} {k:.1}");
    }
    Ok(())
}
