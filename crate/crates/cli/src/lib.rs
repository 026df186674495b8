//! Scenario-driven front end for the `corrthermo` library: parse JSON
//! scenarios, run them, and write ledgers, summaries and oracle comparisons.

pub mod compare;
pub mod error;
pub mod ledger;
pub mod output;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use compare::{compare_analytic, ComparisonReport, ToleranceProfile};
pub use error::{exit, CliError, CliResult};
pub use ledger::{LedgerRow, COLUMNS};
pub use output::Format;
pub use run::{run_scenario, RunOutcome, Summary};
pub use scenario::{max_dim_from_env, parse_scenario, ScenarioDocument};
pub use sweep::{run_sweep, SweepReport};

/// Reads and strictly parses a scenario file.
pub fn load_scenario(path: &std::path::Path) -> CliResult<ScenarioDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text)
}
