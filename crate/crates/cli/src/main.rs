use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use corrthermo_cli::output::{json_string, write_atomic, write_run};
use corrthermo_cli::{
    compare_analytic, load_scenario, max_dim_from_env, run_scenario, run_sweep, CliError, CliResult, Format,
    ScenarioDocument, ToleranceProfile,
};

#[derive(Parser)]
#[command(name = "corrthermo", version, about = "Heat, work and entropy ledgers for a qubit coupled to a bosonic bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its ledger.
    Run(Common),
    /// Compare a scenario's ledger with its analytic oracle.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Largest admissible absolute deviation per column.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Run a scenario for each value of one numeric parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Model parameter name, or a dotted path such as `grid.steps`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; without it the main result goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Override the scenario's system share of the interaction energy.
    #[arg(long = "alpha-s", allow_hyphen_values = true)]
    alpha_s: Option<f64>,
}

impl Common {
    fn load(&self) -> CliResult<ScenarioDocument> {
        let mut doc = load_scenario(&self.scenario)?;
        if let Some(a) = self.alpha_s {
            doc.split.alpha_s = a;
            doc.split().map(|_| ())?;
        }
        Ok(doc)
    }
}

fn stdout(text: &str) -> CliResult<()> {
    std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

fn execute(cli: Cli) -> CliResult<()> {
    let max_dim = max_dim_from_env()?;
    match cli.command {
        Command::Validate { scenario } => {
            let doc = load_scenario(&scenario)?;
            doc.prepare(max_dim)?;
            stdout(&format!("ok: {} ({})\n", scenario.display(), doc.model.kind()))
        }
        Command::Run(common) => {
            let doc = common.load()?;
            let outcome = run_scenario(&doc, max_dim)?;
            match &common.out {
                Some(dir) => {
                    for path in write_run(dir, &outcome, &doc.outputs, common.format)? {
                        eprintln!("wrote {}", path.display());
                    }
                }
                None => stdout(&common.format.ledger(&outcome.simulation.rows))?,
            }
            outcome.check()
        }
        Command::Compare { common, tolerance } => {
            let doc = common.load()?;
            let report = compare_analytic(&doc, max_dim, ToleranceProfile { abs: tolerance })?;
            match &common.out {
                Some(dir) => {
                    write_atomic(&dir.join("comparison.json"), report.to_json().as_bytes())?;
                    write_atomic(&dir.join("comparison.txt"), report.to_text().as_bytes())?;
                    eprint!("{}", report.to_text());
                }
                None => match common.format {
                    Format::Json => stdout(&report.to_json())?,
                    Format::Csv => stdout(&report.to_text())?,
                },
            }
            report.check()
        }
        Command::Sweep { common, param, values, tolerance } => {
            let doc = common.load()?;
            let report = run_sweep(
                &doc,
                &param,
                &values,
                max_dim,
                ToleranceProfile { abs: tolerance },
                common.format,
                common.out.as_deref(),
            )?;
            if common.out.is_none() {
                stdout(&json_string(&report))?;
            }
            report.check()
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(()) => corrthermo_cli::exit::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
