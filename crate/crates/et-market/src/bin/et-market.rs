//! Thin scenario-driven front end over the library: valuation, equilibrium,
//! PBS derivation, simulation, and the verification suite.
//!
//! Exit codes: 0 success, 1 verification/expectation failure, 2 input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use et_market::report::{self, OutputFormat};
use et_market::scenario::{load_scenario, load_suite, Scenario};
use et_market::{pbs, sim, valuation, verify};

#[derive(Parser)]
#[command(name = "et-market", version, about = "Execution-ticket market analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Text => OutputFormat::Text,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Override the scenario's equilibrium band position in [0, 1].
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Rank buyers by their maximal ticket price.
    Valuate(Common),
    /// Solve the stationary equilibrium (price, holdings, capture ratio).
    Equilibrium(Common),
    /// Derive effective payoff laws under the scenario's PBS block.
    PbsDerive(Common),
    /// Run the seeded slot lottery against the solved equilibrium.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Override the scenario's simulation seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario's slot count.
        #[arg(long)]
        slots: Option<u64>,
        /// Write the per-slot trace CSV here (forces trace retention).
        #[arg(long)]
        trace_csv: Option<PathBuf>,
    },
    /// Run the bundled verification suite, or one loaded from a file.
    Verify {
        /// Suite JSON file; the bundled suite runs when omitted.
        #[arg(long)]
        suite: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn emit(text: String, out: Option<&Path>) -> et_market::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn effective_lambda(scenario: &Scenario, flag: Option<f64>) -> f64 {
    flag.unwrap_or(scenario.lambda)
}

/// Markets with a PBS block are reduced to their derived payoff laws before
/// valuation or equilibrium solving.
fn analysis_market(scenario: &Scenario) -> et_market::Result<et_market::MarketParams> {
    if scenario.market.pbs.is_some() {
        pbs::reduce_market(&scenario.market)
    } else {
        Ok(scenario.market.clone())
    }
}

fn run(cli: Cli) -> et_market::Result<ExitCode> {
    match cli.command {
        Command::Valuate(common) => {
            let scenario = load_scenario(&common.scenario)?;
            let market = analysis_market(&scenario)?;
            let result = valuation::rank_valuations(&market)?;
            let text = match common.format.into() {
                OutputFormat::Json => report::to_json(&result)?,
                OutputFormat::Text => report::valuation_text(&result),
            };
            emit(text, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Equilibrium(common) => {
            let scenario = load_scenario(&common.scenario)?;
            let market = analysis_market(&scenario)?;
            let lambda = effective_lambda(&scenario, common.lambda);
            let eq = et_market::solve_equilibrium(&market, lambda)?;
            let text = match common.format.into() {
                OutputFormat::Json => report::to_json(&eq)?,
                OutputFormat::Text => report::equilibrium_text(&eq),
            };
            emit(text, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::PbsDerive(common) => {
            let scenario = load_scenario(&common.scenario)?;
            let payoffs = pbs::derive_payoffs(&scenario.market)?;
            let text = match common.format.into() {
                OutputFormat::Json => report::to_json(&report::summarize_payoffs(&payoffs))?,
                OutputFormat::Text => report::derived_text(&payoffs),
            };
            emit(text, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            common,
            seed,
            slots,
            trace_csv,
        } => {
            let scenario = load_scenario(&common.scenario)?;
            let market = analysis_market(&scenario)?;
            let lambda = effective_lambda(&scenario, common.lambda);
            let eq = et_market::solve_equilibrium(&market, lambda)?;

            let sim_spec = scenario.sim.as_ref();
            let slots = slots
                .or(sim_spec.map(|s| s.slots))
                .ok_or_else(|| {
                    et_market::Error::Validation(
                        "sim.slots: required (set a sim block in the scenario or pass --slots)"
                            .into(),
                    )
                })?;
            let seed = seed.or(sim_spec.map(|s| s.seed)).unwrap_or(0);
            let keep_trace = trace_csv.is_some()
                || sim_spec
                    .and_then(|s| s.trace)
                    .unwrap_or(slots <= sim::TRACE_RETENTION_LIMIT);

            // Simulate against the original market so PBS slots realize
            // abilities live; the equilibrium came from the reduced market.
            let report_data =
                sim::run_slots_traced(&scenario.market, &eq, slots, seed, keep_trace)?;

            if let Some(path) = &trace_csv {
                let trace = report_data
                    .trace
                    .as_ref()
                    .expect("trace retained when --trace-csv is set");
                let file = std::fs::File::create(path)?;
                report::write_trace_csv(trace, file)?;
            }

            let text = match common.format.into() {
                OutputFormat::Json => report::to_json(&report_data)?,
                OutputFormat::Text => report::sim_text(&report_data),
            };
            emit(text, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, out, format } => {
            let verification = match suite {
                Some(path) => verify::run_suite(&load_suite(&path)?),
                None => verify::run_built_in(),
            };
            let text = match format.into() {
                OutputFormat::Json => report::to_json(&verification)?,
                OutputFormat::Text => report::verification_text(&verification),
            };
            emit(text, out.as_deref())?;
            Ok(if verification.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
