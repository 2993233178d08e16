mod config;
mod output;
mod presets;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gplab_core::checks::{self, CheckOutcome};
use gplab_core::Power;

use config::{ConfigError, ExperimentConfig, Scenario};
use run::RunError;

const PASS: u8 = 0;
const CHECK_FAILED: u8 = 1;
const CONFIG_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "gplab", version, about = "Numerical experiments on Gross-Pitaevskii hierarchies")]
struct Cli {
    /// Directory under which each run gets its own subdirectory.
    #[arg(long, global = true, env = "GPLAB_OUTPUT_ROOT", default_value = "gplab-output")]
    output_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Run named verification checks; all of them when none are given.
    ///
    /// The extra name `conservation` measures energy drift for the
    /// equation and order chosen with --equation and --k.
    Verify {
        checks: Vec<String>,
        #[arg(long)]
        equation: Option<Power>,
        #[arg(long)]
        k: Vec<usize>,
    },
    /// Simulate a negative-energy collapse and fit its rate.
    Blowup {
        #[arg(long, default_value = "quintic")]
        equation: Power,
        #[arg(long, default_value_t = 1)]
        dimension: usize,
    },
    /// Tabulate level norms, quasi-norms and trace norms of an initial state.
    Norms { config: Option<PathBuf> },
    /// Print the default configuration and the accepted names.
    Describe,
}

fn run_dir_name(cfg: &ExperimentConfig, path: Option<&Path>) -> String {
    cfg.name
        .clone()
        .or_else(|| path.and_then(|p| p.file_stem()).map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| cfg.scenario.name().to_string())
}

fn execute(cfg: &ExperimentConfig, dir: &Path) -> u8 {
    let out = match run::run(cfg) {
        Ok(out) => out,
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            return CONFIG_ERROR;
        }
        Err(e @ RunError::Runtime(_)) => {
            eprintln!("{e}");
            return CHECK_FAILED;
        }
    };
    match output::write_run(dir, &out, cfg.plot.svg) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("cannot write {}: {e}", dir.display());
            return CHECK_FAILED;
        }
    }
    for c in &out.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!("{status} {}: {:.6e} (limit {:.6e})", c.label, c.value, c.limit);
    }
    if out.passed() {
        PASS
    } else {
        CHECK_FAILED
    }
}

fn print_outcomes(outcomes: &[CheckOutcome]) -> u8 {
    println!("{:<26} {:<44} {:>13} {:>13}  status", "check", "measurement", "value", "limit");
    for o in outcomes {
        if let Some(e) = &o.error {
            println!("{:<26} {:<44} {:>13} {:>13}  FAIL", o.name, format!("error: {e}"), "-", "-");
        }
        for m in &o.measurements {
            let status = if m.passed() { "PASS" } else { "FAIL" };
            println!("{:<26} {:<44} {:>13.4e} {:>13.4e}  {status}", o.name, m.label, m.value, m.limit);
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    let all = passed == outcomes.len();
    println!("overall: {} ({passed}/{} checks passed)", if all { "PASS" } else { "FAIL" }, outcomes.len());
    if all {
        PASS
    } else {
        CHECK_FAILED
    }
}

fn verify(names: &[String], equation: Option<Power>, ks: &[usize]) -> u8 {
    if let Some(n) = names.iter().find(|n| *n != "conservation" && checks::lookup(n).is_err()) {
        eprintln!("config error: unknown check '{n}'; available: {}, conservation", checks::names().join(", "));
        return CONFIG_ERROR;
    }
    if ks.contains(&0) {
        eprintln!("config error: --k: orders start at 1");
        return CONFIG_ERROR;
    }
    let outcomes: Vec<CheckOutcome> = if names.is_empty() {
        checks::CHECKS.iter().map(|c| c.run()).collect()
    } else {
        names
            .iter()
            .map(|n| {
                if n == "conservation" {
                    let powers = equation.map_or(vec![Power::Cubic, Power::Quintic], |p| vec![p]);
                    let ks = if ks.is_empty() { vec![1, 2] } else { ks.to_vec() };
                    checks::outcome("conservation", "energy drift of a non-admissible mixture", || {
                        checks::energy_conservation(&powers, &ks)
                    })
                } else {
                    checks::lookup(n).expect("checked above").run()
                }
            })
            .collect()
    };
    print_outcomes(&outcomes)
}

fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::load(path)
}

fn describe() {
    println!("# Default configuration. Every section is optional; missing keys take these values.");
    print!("{}", ExperimentConfig::default().to_toml());
    println!();
    println!("# scenarios: {}", Scenario::ALL.map(Scenario::name).join(", "));
    println!("# equations: cubic, quintic; mu: focusing, defocusing");
    println!("# initial kinds: gaussians, soliton, plane-wave, random-smooth, negative-energy");
    println!("# closures: mixture, zero");
    println!(
        "# diagnostics: mass, h1_max, energy_k<k>, virial_k<k>, virial_dt_k<k>, virial_rhs_k<k>, interaction_k<k>, \
         kinetic_k<k>, trace_norm_k<k>, hs_norm_k<k>_s<s>, quasinorm_s<s>"
    );
    println!(
        "# rate regimes: {}",
        gplab_core::blowup::RateRegime::ALL.map(|r| r.name()).join(", ")
    );
    println!("# checks: {}, conservation", checks::names().join(", "));
    println!("# output root: --output-root or GPLAB_OUTPUT_ROOT (default gplab-output)");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run { config } => match load(config) {
            Ok(cfg) => execute(&cfg, &cli.output_root.join(run_dir_name(&cfg, Some(config)))),
            Err(e) => {
                eprintln!("config error: {e}");
                CONFIG_ERROR
            }
        },
        Command::Verify { checks, equation, k } => verify(checks, *equation, k),
        Command::Blowup { equation, dimension } => match presets::blowup(*equation, *dimension) {
            Ok(cfg) => execute(&cfg, &cli.output_root.join(run_dir_name(&cfg, None))),
            Err(e) => {
                eprintln!("config error: {e}");
                CONFIG_ERROR
            }
        },
        Command::Norms { config } => {
            let loaded = match config {
                Some(p) => load(p),
                None => Ok(ExperimentConfig::default()),
            };
            match loaded {
                Ok(mut cfg) => {
                    let name = format!("{}-norms", run_dir_name(&cfg, config.as_deref()));
                    // the initial state is all that matters here
                    cfg.scenario = Scenario::Norms;
                    cfg.checks = config::ChecksConfig::default();
                    execute(&cfg, &cli.output_root.join(name))
                }
                Err(e) => {
                    eprintln!("config error: {e}");
                    CONFIG_ERROR
                }
            }
        }
        Command::Describe => {
            describe();
            PASS
        }
    };
    ExitCode::from(code)
}
