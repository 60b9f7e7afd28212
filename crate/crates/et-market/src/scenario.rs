//! Scenario files: a versioned JSON description of a market, an equilibrium
//! selection, optional simulation settings, and optional analytic
//! expectations for the verifier.
//!
//! Parse failures are classified three ways: [`Error::Parse`] for malformed
//! JSON, [`Error::Schema`] for well-formed JSON that does not fit the schema
//! (unknown kinds, missing fields), and [`Error::Validation`] for
//! schema-conforming input that breaks a documented invariant.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MarketParams;

pub const SCHEMA_VERSION: u32 = 1;

fn default_proposal_delay() -> u64 {
    1
}

/// Simulation settings inside a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub slots: u64,
    #[serde(default)]
    pub seed: u64,
    /// Keep the per-slot trace; defaults to the retention-limit policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<bool>,
    /// Slots between winning the lottery and proposing. Labeling only: the
    /// next-slot variant is what is simulated, and payoffs never depend on
    /// this value.
    #[serde(default = "default_proposal_delay")]
    pub proposal_delay: u64,
}

fn default_tolerance() -> f64 {
    1e-9
}

/// Named analytic expectations checked by the verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    /// Strict upper bound: passes when chi <= bound - tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_below: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdings: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_set: Option<BTreeSet<String>>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for Expectations {
    fn default() -> Self {
        Expectations {
            price: None,
            chi: None,
            chi_below: None,
            holdings: None,
            top_set: None,
            tolerance: default_tolerance(),
        }
    }
}

/// One self-contained experiment: market, band position, sim, expectations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    pub market: MarketParams,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectations>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "schema: unsupported version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.name.is_empty() {
            return Err(Error::Validation("name: must be nonempty".into()));
        }
        self.market.validate()?;
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Validation(format!(
                "lambda: must lie in [0, 1] (got {})",
                self.lambda
            )));
        }
        if let Some(sim) = &self.sim {
            if sim.slots < 1 {
                return Err(Error::Validation("sim.slots: must be at least 1".into()));
            }
            if sim.proposal_delay < 1 {
                return Err(Error::Validation(
                    "sim.proposal_delay: must be at least 1".into(),
                ));
            }
        }
        if let Some(expect) = &self.expect {
            if !(expect.tolerance.is_finite() && expect.tolerance > 0.0) {
                return Err(Error::Validation(format!(
                    "expect.tolerance: must be a positive real (got {})",
                    expect.tolerance
                )));
            }
            for id in expect.holdings.iter().flat_map(|h| h.keys()) {
                if self.market.buyer(id).is_none() {
                    return Err(Error::Validation(format!(
                        "expect.holdings: unknown buyer id `{id}`"
                    )));
                }
            }
            for id in expect.top_set.iter().flatten() {
                if self.market.buyer(id).is_none() {
                    return Err(Error::Validation(format!(
                        "expect.top_set: unknown buyer id `{id}`"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn classify_json_error(err: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match err.classify() {
        Category::Syntax | Category::Eof => Error::Parse(err.to_string()),
        _ => Error::Schema(err.to_string()),
    }
}

/// Parse and fully validate a scenario from a JSON string.
pub fn scenario_from_json(json: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(json).map_err(classify_json_error)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Load a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    scenario_from_json(&text)
}

/// A verification suite file: a batch of scenarios with expectations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    pub schema: u32,
    pub scenarios: Vec<Scenario>,
}

pub fn suite_from_json(json: &str) -> Result<Vec<Scenario>> {
    let suite: SuiteFile = serde_json::from_str(json).map_err(classify_json_error)?;
    if suite.schema != SCHEMA_VERSION {
        return Err(Error::Validation(format!(
            "schema: unsupported version {} (expected {SCHEMA_VERSION})",
            suite.schema
        )));
    }
    if suite.scenarios.is_empty() {
        return Err(Error::Validation(
            "scenarios: suite must contain at least one scenario".into(),
        ));
    }
    for s in &suite.scenarios {
        s.validate()?;
    }
    Ok(suite.scenarios)
}

pub fn load_suite(path: impl AsRef<Path>) -> Result<Vec<Scenario>> {
    let text = std::fs::read_to_string(path)?;
    suite_from_json(&text)
}
