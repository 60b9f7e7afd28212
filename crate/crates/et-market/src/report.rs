//! Report emission: JSON for machines, aligned columns for humans, and the
//! fixed-header per-slot trace CSV.

use std::io::Write;

use serde::Serialize;

use crate::equilibrium::Equilibrium;
use crate::error::Result;
use crate::model::SlotOutcome;
use crate::pbs::DerivedPayoff;
use crate::sim::SimReport;
use crate::valuation::ValuationResult;
use crate::verify::VerificationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Text,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::Error::Schema(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn num(x: f64) -> String {
    format!("{x:.9}")
}

pub fn valuation_text(v: &ValuationResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<16} {:>16}\n", "buyer", "max_price"));
    for (id, p) in &v.per_buyer {
        out.push_str(&format!("{id:<16} {:>16}\n", num(*p)));
    }
    out.push_str(&format!("p_top    = {}\n", num(v.p_top)));
    out.push_str(&format!("p_second = {}\n", num(v.p_second)));
    out.push_str(&format!(
        "top_set  = {{{}}}\n",
        v.top_set.iter().cloned().collect::<Vec<_>>().join(", ")
    ));
    if !v.boundary_ids.is_empty() {
        out.push_str(&format!(
            "boundary (zero-cost concave, priced at support edge): {{{}}}\n",
            v.boundary_ids.iter().cloned().collect::<Vec<_>>().join(", ")
        ));
    }
    out
}

pub fn equilibrium_text(eq: &Equilibrium) -> String {
    let mut out = String::new();
    out.push_str(&format!("price  = {}\n", num(eq.price)));
    out.push_str(&format!("chi    = {}\n", num(eq.chi)));
    out.push_str(&format!("lambda = {}\n", num(eq.selection_lambda)));
    if !eq.regime_tags.is_empty() {
        out.push_str(&format!(
            "regime = {}\n",
            eq.regime_tags.iter().cloned().collect::<Vec<_>>().join(", ")
        ));
    }
    out.push_str(&format!("{:<16} {:>16}\n", "buyer", "holdings"));
    for (id, k) in &eq.holdings {
        out.push_str(&format!("{id:<16} {:>16}\n", num(*k)));
    }
    out
}

/// Compact view of derived PBS payoffs (the full empirical laws can carry
/// hundreds of thousands of samples; reports keep the summary statistics).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedPayoffSummary {
    pub buyer_id: String,
    pub payoff_mean: f64,
    pub outsource_probability: f64,
}

pub fn summarize_payoffs(payoffs: &[DerivedPayoff]) -> Vec<DerivedPayoffSummary> {
    payoffs
        .iter()
        .map(|p| DerivedPayoffSummary {
            buyer_id: p.buyer_id.clone(),
            payoff_mean: p.payoff.mean(),
            outsource_probability: p.outsource_probability,
        })
        .collect()
}

pub fn derived_text(payoffs: &[DerivedPayoff]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:>16} {:>22}\n",
        "buyer", "payoff_mean", "outsource_probability"
    ));
    for p in summarize_payoffs(payoffs) {
        out.push_str(&format!(
            "{:<16} {:>16} {:>22}\n",
            p.buyer_id,
            num(p.payoff_mean),
            num(p.outsource_probability)
        ));
    }
    out
}

pub fn sim_text(r: &SimReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("slots            = {}\n", r.slots));
    out.push_str(&format!("seed             = {}\n", r.seed));
    out.push_str(&format!("protocol_revenue = {}\n", num(r.protocol_revenue)));
    out.push_str(&format!("realized_mev     = {}\n", num(r.realized_mev_total)));
    match r.chi_hat {
        Some(chi) => out.push_str(&format!("chi_hat          = {}\n", num(chi))),
        None => out.push_str("chi_hat          = n/a (no MEV realized)\n"),
    }
    out.push_str(&format!("chi_analytic     = {}\n", num(r.chi_analytic)));
    if let Some(f) = r.outsource_fraction {
        out.push_str(&format!("outsource_frac   = {}\n", num(f)));
    }
    out.push_str(&format!(
        "{:<16} {:>12} {:>16}\n",
        "buyer", "wins", "pnl"
    ));
    for (id, w) in &r.wins {
        let pnl = r.per_buyer_pnl.get(id).copied().unwrap_or(0.0);
        out.push_str(&format!("{id:<16} {w:>12} {:>16}\n", num(pnl)));
    }
    out
}

pub fn verification_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    for c in &report.per_check {
        out.push_str(&format!(
            "[{}] {:<44} {:<34} expected {} actual {} (tol {:e})\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.scenario,
            c.claim,
            c.expected,
            c.actual,
            c.tolerance
        ));
    }
    out.push_str(if report.all_pass {
        "all checks passed\n"
    } else {
        "FAILURES PRESENT\n"
    });
    out
}

/// Fixed-header per-slot trace: slot, winner_id, realized_mev, pnl,
/// exercised_self.
pub fn write_trace_csv<W: Write>(trace: &[SlotOutcome], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["slot", "winner_id", "realized_mev", "pnl", "exercised_self"])
        .map_err(csv_err)?;
    for o in trace {
        w.write_record([
            o.slot.to_string(),
            o.winner_id.clone(),
            format!("{}", o.realized_mev),
            format!("{}", o.pnl),
            o.exercised_self.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Validation(format!("trace csv: {e}"))
}
