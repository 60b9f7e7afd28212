//! Scenario files and the verification suite: load a market from JSON, solve
//! it, and run the bundled closed-form checks.
//!
//! Run with: cargo run --example scenario_verify

use std::path::Path;

use et_market::report::verification_text;
use et_market::{load_scenario, run_built_in, solve_equilibrium};

fn main() -> et_market::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/capital_costs.json");
    let scenario = load_scenario(&path)?;
    println!("loaded `{}` from {}", scenario.name, path.display());

    let eq = solve_equilibrium(&scenario.market, scenario.lambda)?;
    println!(
        "price = {:.6}, chi = {:.6}, holders = {:?}\n",
        eq.price,
        eq.chi,
        eq.holdings
            .iter()
            .filter(|(_, &k)| k > 0.0)
            .map(|(id, _)| id.as_str())
            .collect::<Vec<_>>()
    );

    // The bundled suite re-derives every analytic regime and compares the
    // solver against the closed forms (same thing `et-market verify` runs).
    let report = run_built_in();
    print!("{}", verification_text(&report));
    std::process::exit(if report.all_pass { 0 } else { 1 });
}
