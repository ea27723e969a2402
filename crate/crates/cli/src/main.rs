//! `vwm`: simulate window-switching sessions, analyze their logs, print
//! counterbalancing squares, and serve live sessions.

mod analyze;
mod error;
mod output;
mod simulate;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::{user, CliError};
use vwm_core::SimConfig;

#[derive(Debug, Parser)]
#[command(name = "vwm", version, about = "Spatial Bar window-switching simulator and study harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run synthetic participants and write logs, plans and trials.csv.
    Simulate {
        #[arg(long)]
        participants: u32,
        /// Overridden by the VWM_SEED environment variable.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Parameter file (`key = value`); defaults apply to absent keys.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Analyze the block logs of a run directory.
    Analyze {
        run: PathBuf,
        /// Analyze only this measure: thumbnail, button, total or errors.
        #[arg(long)]
        measure: Option<String>,
        /// With --measure: Large/Short, or LL/LS/SL/SS for total and errors.
        #[arg(long, requires = "measure")]
        block: Option<String>,
        /// Skip trials with corrupt log lines instead of failing.
        #[arg(long)]
        lenient: bool,
        /// Report directory; defaults to RUN/reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a balanced Latin square.
    Latinsquare {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Serve live sessions on 127.0.0.1.
    Serve {
        /// 0 picks a free port.
        #[arg(long, default_value_t = 0)]
        port: u16,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

/// `--seed` unless `VWM_SEED` is set.
fn effective_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var("VWM_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| user(format!("VWM_SEED must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(flag),
    }
}

fn load_params(path: Option<&PathBuf>) -> Result<SimConfig, CliError> {
    let Some(path) = path else {
        return Ok(SimConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| user(format!("cannot read parameter file {}: {e}", path.display())))?;
    SimConfig::from_kv(&text).map_err(|e| user(format!("{}: {e}", path.display())))
}

fn latinsquare(n: usize) -> Result<(), CliError> {
    let square = vwm_core::experiment::balanced_latin_square(n).map_err(|e| user(e.to_string()))?;
    let mut out = String::new();
    for row in &square {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    if n == 4 {
        out.push('\n');
        for (i, c) in vwm_core::Condition::ALL.iter().enumerate() {
            out.push_str(&format!("{i} = {c}\n"));
        }
    }
    print!("{out}");
    Ok(())
}

fn serve(port: u16, seed: u64, out: PathBuf, params: Option<PathBuf>) -> Result<(), CliError> {
    let seed = effective_seed(seed)?;
    let sim = load_params(params.as_ref())?;
    let mut dir = output::OutputDir::prepare(&out)?;
    dir.write(
        output::MANIFEST,
        &output::manifest_text(&[
            ("command", "serve".into()),
            ("seed", seed.to_string()),
            ("params", params.as_ref().map_or("defaults".into(), |p| p.display().to_string())),
            ("effective_params", "params.effective".into()),
            ("out", out.display().to_string()),
        ]),
    )?;
    dir.write("params.effective", &sim.to_kv())?;
    let config = vwm_service::ServiceConfig::new(sim, seed, out.clone())
        .map_err(|e| user(e.to_string()))?;
    let server = vwm_service::Server::bind(("127.0.0.1", port), config)
        .map_err(|e| user(format!("cannot listen on port {port}: {e}")))?;
    dir.commit();
    let addr = server.local_addr().map_err(|e| error::internal(e.to_string()))?;
    println!("listening on {addr}");
    let _ = std::io::stdout().flush();
    server
        .serve(|result| match result {
            Ok(s) => eprintln!(
                "session participant={:?} outcome={:?} trials={}",
                s.participant, s.outcome, s.completed_trials
            ),
            Err(e) => eprintln!("session failed: {e}"),
        })
        .map_err(|e| error::internal(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            participants,
            seed,
            out,
            params,
        } => {
            if participants == 0 {
                return Err(user("--participants must be at least 1"));
            }
            let seed = effective_seed(seed)?;
            let config = load_params(params.as_ref())?;
            simulate::simulate(participants, seed, &out, params.as_deref(), &config)
        }
        Command::Analyze {
            run,
            measure,
            block,
            lenient,
            out,
        } => analyze::analyze(&run, measure.as_deref(), block.as_deref(), lenient, out.as_deref()),
        Command::Latinsquare { n } => latinsquare(n),
        Command::Serve {
            port,
            seed,
            out,
            params,
        } => serve(port, seed, out, params),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
