use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fts_cli::output::{fmt_num, report_text};
use fts_cli::run::parse_vector;
use fts_cli::sweep::envelope_text;
use fts_cli::{exit, execute, run_sweep, CliError, RunOptions, Scenario, SweepFile};

#[derive(Parser)]
#[command(name = "fts", version, about = "Simulate and certify finite-time stability of hybrid systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario.
    Run {
        /// Scenario file (same as --scenario).
        path: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a scenario over a list of initial conditions.
    Sweep {
        #[arg(long)]
        sweep: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Comma-separated initial state.
    #[arg(long)]
    x0: Option<String>,
    #[arg(long)]
    stop_norm: Option<f64>,
    /// Exit 4 unless the certificate passes.
    #[arg(long)]
    certify: bool,
    /// Output directory; FTS_REPORT_DIR takes precedence.
    #[arg(long)]
    report: Option<PathBuf>,
}

impl Flags {
    fn report_dir(&self) -> Option<PathBuf> {
        match std::env::var_os("FTS_REPORT_DIR") {
            Some(d) if !d.is_empty() => Some(PathBuf::from(d)),
            _ => self.report.clone(),
        }
    }

    fn options(&self) -> Result<RunOptions, CliError> {
        Ok(RunOptions {
            dt: self.dt,
            t_end: self.t_end,
            x0: self.x0.as_deref().map(parse_vector).transpose()?,
            stop_norm: self.stop_norm,
            certify: self.certify,
            report_dir: self.report_dir(),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { 0 });
        }
    };
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run { path, scenario, flags } => {
            let path = scenario
                .or(path)
                .ok_or_else(|| CliError::Scenario("no scenario given".into()))?;
            let scenario = Scenario::load(&path)?;
            let outcome = execute(&scenario, &flags.options()?)?;
            print!("{}", report_text(&outcome.report));
            Ok(outcome.exit_code)
        }
        Command::Sweep { sweep, flags } => {
            let (file, scenario) = SweepFile::load(&sweep)?;
            let result = run_sweep(&file, &scenario, &flags.options()?, flags.report_dir().as_deref())?;
            println!("run,x0_norm,gamma,achieved_fts_time,converged,t_conv,exit_code");
            let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
            for r in &result.rows {
                println!(
                    "{},{},{},{},{},{},{}",
                    r.run,
                    fmt_num(r.x0_norm),
                    opt(r.gamma),
                    opt(r.achieved),
                    r.converged,
                    opt(r.t_conv),
                    r.exit_code
                );
            }
            print!("{}", envelope_text(&result.envelopes));
            Ok(exit::OK)
        }
    }
}
