use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::check::check_system;
use crate::design::design;
use crate::error::{Error, Result};
use crate::format::{load_system, write_system_file};
use crate::report::write_sweep_outputs;
use crate::scenario::{default_kn_grid, log_grid, Algorithm, ScenarioConfig};
use crate::sweep::run_sweep;

#[derive(Debug, Parser)]
#[command(
    name = "qobs",
    version,
    about = "Coherent quantum observer design and benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    S1,
    S2,
    S3,
    Custom,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the thermal noise intensity for a cavity scenario and write a CSV
    Sweep {
        #[arg(long, value_enum)]
        scenario: Scenario,
        #[arg(long)]
        kappa1: Option<f64>,
        #[arg(long)]
        kappa2: Option<f64>,
        #[arg(long)]
        kn_min: Option<f64>,
        #[arg(long)]
        kn_max: Option<f64>,
        #[arg(long)]
        kn_points: Option<usize>,
        /// Comma-separated subset of alg1,alg2,alg3,classical
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<Algorithm>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Design an observer for the plant in a system file
    Design {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        algorithm: Algorithm,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report the realizability of a system file
    Check {
        #[arg(long)]
        system: PathBuf,
    },
}

fn kn_grid(min: Option<f64>, max: Option<f64>, points: Option<usize>) -> Result<Vec<f64>> {
    if min.is_none() && max.is_none() && points.is_none() {
        return Ok(default_kn_grid());
    }
    let lo = min.unwrap_or(0.01);
    let hi = max.unwrap_or(1e4);
    let n = points.unwrap_or(60);
    if n == 0 {
        return Err(Error::Usage("--kn-points must be at least 1".into()));
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Usage(format!(
            "log-spaced grid needs 0 < kn-min <= kn-max, got [{lo}, {hi}]"
        )));
    }
    Ok(log_grid(lo, hi, n))
}

fn sweep_config(
    scenario: Scenario,
    kappa1: Option<f64>,
    kappa2: Option<f64>,
    grid: Vec<f64>,
) -> Result<ScenarioConfig> {
    let cfg = match scenario {
        Scenario::Custom => {
            let (Some(k1), Some(k2)) = (kappa1, kappa2) else {
                return Err(Error::Usage(
                    "--scenario custom needs --kappa1 and --kappa2".into(),
                ));
            };
            ScenarioConfig::new("custom", k1, k2, grid)?
        }
        preset => {
            if kappa1.is_some() || kappa2.is_some() {
                return Err(Error::Usage(
                    "--kappa1/--kappa2 only apply to --scenario custom".into(),
                ));
            }
            let name = match preset {
                Scenario::S1 => "s1",
                Scenario::S2 => "s2",
                _ => "s3",
            };
            ScenarioConfig::preset(name)?.with_kn_grid(grid)?
        }
    };
    Ok(cfg)
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let w = |out: &mut dyn Write, s: &str| {
        out.write_all(s.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))
    };
    match cli.command {
        Command::Sweep {
            scenario,
            kappa1,
            kappa2,
            kn_min,
            kn_max,
            kn_points,
            algorithms,
            out: path,
        } => {
            let grid = kn_grid(kn_min, kn_max, kn_points)?;
            let mut cfg = sweep_config(scenario, kappa1, kappa2, grid)?;
            if let Some(list) = algorithms {
                if list.is_empty() {
                    return Err(Error::Usage("--algorithms is empty".into()));
                }
                cfg = cfg.with_algorithms(list);
            }
            let rows = run_sweep(&cfg);
            let written = write_sweep_outputs(&cfg, &rows, &path)?;
            let failures: usize = rows.iter().map(|r| r.errors().len()).sum();
            let mut msg = format!("{} grid points, {failures} designer failures\n", rows.len());
            for p in written {
                msg.push_str(&format!("wrote {}\n", p.display()));
            }
            w(out, &msg)?;
            Ok(0)
        }
        Command::Design {
            plant,
            algorithm,
            out: path,
        } => {
            let sys = load_system(&plant)?;
            let cfg_rho = qobs_core::RhoSearch::default();
            let file = design(&sys, algorithm, &cfg_rho)?;
            write_system_file(&path, &file)?;
            w(out, &format!("wrote {}\n", path.display()))?;
            Ok(0)
        }
        Command::Check { system } => {
            let report = check_system(&system)?;
            w(out, &report.render())?;
            Ok(if report.passes() { 0 } else { 2 })
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

impl clap::ValueEnum for Algorithm {
    fn value_variants<'a>() -> &'a [Self] {
        &Algorithm::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}
