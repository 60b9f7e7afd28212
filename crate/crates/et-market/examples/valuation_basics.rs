//! How a buyer prices a ticket: the net per-ticket value functional and the
//! maximal price under different risk adjustments and capital costs.
//!
//! Run with: cargo run --example valuation_basics

use et_market::valuation::{max_price, max_price_numeric, net_value, rank_valuations};
use et_market::{BuyerSpec, Error, MarketParams, MevModel, RiskProfile};

fn buyer(id: &str, r: f64, risk: RiskProfile, mev: MevModel) -> BuyerSpec {
    BuyerSpec {
        id: id.into(),
        cost_of_capital: r,
        risk,
        mev,
    }
}

fn main() -> et_market::Result<()> {
    let tickets = 100;
    let mev = MevModel::Exponential { mean: 1.0 };

    // Same payoff law, three attitudes toward it.
    let neutral = buyer("neutral", 0.01, RiskProfile::RiskNeutral, mev.clone());
    let averse = buyer(
        "averse",
        0.01,
        RiskProfile::ExpConcave { alpha: 1.0 },
        mev.clone(),
    );
    let very_averse = buyer(
        "very-averse",
        0.01,
        RiskProfile::ExpConcave { alpha: 3.0 },
        mev.clone(),
    );

    println!("net per-ticket value (1/N) E[Pi(R - P)] - r P, N = {tickets}:");
    println!("{:>8} {:>12} {:>12} {:>12}", "price", "neutral", "averse", "very-averse");
    for price in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!(
            "{price:>8.2} {:>12.6} {:>12.6} {:>12.6}",
            net_value(&neutral, tickets, price)?,
            net_value(&averse, tickets, price)?,
            net_value(&very_averse, tickets, price)?,
        );
    }

    println!("\nmaximal prices (largest P with nonnegative net value):");
    for b in [&neutral, &averse, &very_averse] {
        println!("  {:<12} {:.9}", b.id, max_price(b, tickets)?);
    }

    // The risk-neutral closed form mean/(1 + r N) agrees with the generic
    // bisection route on the same inputs.
    let closed = max_price(&neutral, tickets)?;
    let numeric = max_price_numeric(&neutral, tickets)?;
    println!("\nrisk-neutral closed form {closed:.12} vs bisection {numeric:.12}");

    // Edge regimes worth knowing about.
    let boundary = buyer(
        "boundary",
        0.0,
        RiskProfile::ExpConcave { alpha: 1.0 },
        MevModel::Uniform { low: 0.0, high: 2.0 },
    );
    println!(
        "\nzero capital cost + concave + bounded support prices at the support edge: {}",
        max_price(&boundary, tickets)?
    );

    let divergent = buyer(
        "divergent",
        0.0,
        RiskProfile::ExpConcave { alpha: 1.0 },
        MevModel::Exponential { mean: 1.0 },
    );
    match max_price(&divergent, tickets) {
        Err(Error::DivergentValuation { id }) => {
            println!("unbounded support with zero capital cost diverges: buyer `{id}`")
        }
        other => println!("unexpected: {other:?}"),
    }

    // Ranking a whole market: the top set and the runner-up price are what
    // the equilibrium needs.
    let market = MarketParams {
        tickets,
        buyers: vec![neutral, averse, very_averse],
        pbs: None,
    };
    let ranking = rank_valuations(&market)?;
    println!("\nranked market:");
    for (id, p) in &ranking.per_buyer {
        println!("  {id:<12} {p:.9}");
    }
    println!(
        "p_top = {:.9}, p_second = {:.9}, top_set = {:?}",
        ranking.p_top, ranking.p_second, ranking.top_set
    );
    Ok(())
}
