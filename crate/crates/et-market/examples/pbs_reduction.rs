//! Proposer-builder separation as a payoff transform: every ticket holder
//! earns at least the PBS price max(Γ, own ability), which reduces a PBS
//! market to an ordinary heterogeneous-payoff market.
//!
//! Run with: cargo run --example pbs_reduction

use et_market::{
    derive_payoffs, reduce_market, solve_equilibrium, BuyerSpec, GammaRule, MarketParams,
    MevModel, PbsConfig, RiskProfile,
};

fn rn(id: &str, r: f64, mev: MevModel) -> BuyerSpec {
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

fn main() -> et_market::Result<()> {
    // Builders who bid into PBS but do not buy tickets.
    let non_buyers = vec![pm(5.0), pm(3.0)];

    // Ticket buyers with no building ability at all: with a second-price
    // PBS rule they all earn the second-best outside bid.
    let market = MarketParams {
        tickets: 100,
        buyers: vec![
            rn("fund", 0.001, pm(0.0)),
            rn("desk", 0.002, pm(0.0)),
            rn("desk2", 0.003, pm(0.0)),
        ],
        pbs: Some(PbsConfig {
            non_buyer_abilities: non_buyers,
            gamma: GammaRule::SecondMax,
            joint_samples: 1,
            seed: 0,
            exclude_own_ability: false,
        }),
    };

    println!("derived payoffs (all abilities are point masses, so exact):");
    for p in derive_payoffs(&market)? {
        println!(
            "  {:<8} payoff mean {:.4}, outsources with probability {:.2}",
            p.buyer_id,
            p.payoff.mean(),
            p.outsource_probability
        );
    }

    // The reduction: swap each buyer's ability law for the derived payoff
    // law and solve as a plain market.
    let reduced = reduce_market(&market)?;
    let eq = solve_equilibrium(&reduced, 0.0)?;
    println!("\nequilibrium of the reduced market:");
    println!("  price = {:.6}, chi = {:.6}", eq.price, eq.chi);
    for (id, k) in &eq.holdings {
        println!("  {id:<8} holds {k:.1}");
    }

    // Cross-check: a hand-built market whose buyers carry the PBS floor as
    // their payoff law solves identically.
    let hand_built = MarketParams {
        tickets: 100,
        buyers: vec![
            rn("fund", 0.001, pm(3.0)),
            rn("desk", 0.002, pm(3.0)),
            rn("desk2", 0.003, pm(3.0)),
        ],
        pbs: None,
    };
    let eq_hand = solve_equilibrium(&hand_built, 0.0)?;
    println!(
        "\nhand-built equivalent: price = {:.6}, chi = {:.6} (deltas {:.1e}, {:.1e})",
        eq_hand.price,
        eq_hand.chi,
        (eq.price - eq_hand.price).abs(),
        (eq.chi - eq_hand.chi).abs()
    );

    // With random outside bids the derived laws become seeded empirical
    // samples; everything downstream stays deterministic and reproducible.
    let market = MarketParams {
        tickets: 10,
        buyers: vec![
            rn("builder", 0.01, pm(1.5)),
            rn("fund", 0.0001, pm(0.0)),
        ],
        pbs: Some(PbsConfig {
            non_buyer_abilities: vec![MevModel::Uniform { low: 0.0, high: 6.0 }],
            gamma: GammaRule::SecondMax,
            joint_samples: 100_000,
            seed: 31,
            exclude_own_ability: false,
        }),
    };
    println!("\nrandom PBS floor, 100k joint draws, seed 31:");
    for p in derive_payoffs(&market)? {
        println!(
            "  {:<8} payoff mean {:.4}, outsources with probability {:.4}",
            p.buyer_id,
            p.payoff.mean(),
            p.outsource_probability
        );
    }
    let eq = solve_equilibrium(&reduce_market(&market)?, 0.0)?;
    println!("  price = {:.6}, chi = {:.6}", eq.price, eq.chi);
    Ok(())
}
