use std::collections::BTreeMap;
use std::fs;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pricemech::report::prices_csv;
use pricemech::scenario::DEFAULT_MC_SAMPLES;
use pricemech::{builtin, load_scenario, run_experiment, verify, CliError, Result, Scenario};

#[derive(Parser)]
#[command(
    name = "pricemech",
    version,
    about = "Anonymous item pricing for Bayesian combinatorial auctions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute item prices and print them as CSV.
    Price {
        /// Scenario file, or `-` for stdin.
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Price the scenario and evaluate every arrival policy.
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Directory for outcome.csv, prices.csv and summary.txt. Without it
        /// the summary and outcome CSV go to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the scenario document of a built-in instance.
    Builtin {
        /// prophet-hard, prophet-halfprice, mph-lower-bound or xos-running-example.
        name: String,
        /// Instance parameters as key=value, e.g. `x=16 n=2`.
        params: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite. Exits with 4 if a check fails.
    Verify {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Args)]
struct Overrides {
    /// Master seed for sampled pricing and Monte-Carlo evaluation.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo profiles per policy; implies `--mode mc`.
    #[arg(long)]
    samples: Option<u64>,
    /// Switch to sampled pricing at this accuracy.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Exact expectations over the support, or Monte-Carlo.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

impl Overrides {
    fn apply(&self, s: &mut Scenario) -> Result<()> {
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(e) = self.epsilon {
            s.pricing.epsilon = Some(e);
        }
        match (self.mode, self.samples) {
            (Some(Mode::Exact), _) => s.mc_samples = None,
            (Some(Mode::Mc), samples) => {
                s.mc_samples = Some(samples.or(s.mc_samples).unwrap_or(DEFAULT_MC_SAMPLES))
            }
            (None, Some(samples)) => s.mc_samples = Some(samples),
            (None, None) => {}
        }
        s.validate()?;
        Ok(())
    }
}

fn read_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario> {
    let text = if path == Path::new("-") {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|source| CliError::Io {
                context: "reading stdin".into(),
                source,
            })?;
        buf
    } else {
        fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading {}", path.display()),
            source,
        })?
    };
    let mut scenario = load_scenario(&text)?;
    overrides.apply(&mut scenario)?;
    Ok(scenario)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Price {
            scenario,
            overrides,
            out,
        } => {
            let scenario = read_scenario(&scenario, &overrides)?;
            let report = run_experiment(&Scenario {
                policies: Vec::new(),
                ..scenario
            })?;
            emit(&out, &prices_csv(&report.prices))
        }
        Command::Simulate {
            scenario,
            overrides,
            out,
        } => {
            let scenario = read_scenario(&scenario, &overrides)?;
            let report = run_experiment(&scenario)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                        context: format!("creating {}", dir.display()),
                        source,
                    })?;
                    write(&dir.join("outcome.csv"), &report.outcome_csv())?;
                    write(&dir.join("prices.csv"), &report.prices_csv())?;
                    write(&dir.join("summary.txt"), &report.summary())
                }
                None => {
                    print!("{}\n{}", report.summary(), report.outcome_csv());
                    Ok(())
                }
            }
        }
        Command::Builtin {
            name,
            params,
            overrides,
            out,
        } => {
            let mut map = BTreeMap::new();
            for p in &params {
                let (k, v) = p.split_once('=').ok_or_else(|| {
                    pricemech::ScenarioError::Schema(format!("parameter \"{p}\" is not key=value"))
                })?;
                map.insert(k.trim().to_owned(), v.trim().to_owned());
            }
            let mut scenario = builtin::build(&name, &map)?;
            overrides.apply(&mut scenario)?;
            emit(&out, &(scenario.to_json() + "\n"))
        }
        Command::Verify {
            scenario,
            overrides,
            out,
        } => {
            let scenario = read_scenario(&scenario, &overrides)?;
            let result = verify::verify(&scenario)?;
            emit(&out, &result.render())?;
            let failure = result
                .failures()
                .next()
                .map(|f| CliError::Violation(format!("{}: {}", f.name, f.detail)));
            failure.map_or(Ok(()), Err)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Engine(pricemech_core::Error::Capacity { .. }) = e {
                eprintln!("hint: switch to --mode mc or reduce the number of buyers or items");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
