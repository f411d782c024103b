use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ranslice::cli_io::{parse_list, run_command, sweep_command, CliError, ExportFormat, RunOptions};
use ranslice::sim::{parse_config, Algorithm, SimConfig};

#[derive(Parser)]
#[command(name = "ranslice", version, about = "Multi-cell downlink RAN slicing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repeated runs of one configuration.
    Run {
        /// `key = value` config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        algorithm: Option<Algorithm>,
        /// URLLC offered load per cell in Mbps.
        #[arg(long)]
        urllc_load: Option<f64>,
        /// eMBB offered load per cell in Mbps.
        #[arg(long)]
        embb_load: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write a per-packet CSV trace for every run.
        #[arg(long)]
        packet_trace: bool,
        #[arg(long, default_value = "csv")]
        format: ExportFormat,
    },
    /// Cross product of URLLC loads and algorithms.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "1,2,3")]
        loads: String,
        #[arg(long, default_value = "coqra,nql,lrtq,ppf")]
        algorithms: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: ExportFormat,
    },
}

fn overrides(pairs: &[(&'static str, Option<String>)]) -> Vec<(&'static str, String)> {
    pairs
        .iter()
        .filter_map(|(k, v)| v.clone().map(|v| (*k, v)))
        .collect()
}

fn resolve(config: Option<PathBuf>, flags: &[(&'static str, Option<String>)]) -> Result<SimConfig, CliError> {
    Ok(parse_config(config.as_deref(), &overrides(flags))?)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            algorithm,
            urllc_load,
            embb_load,
            seed,
            runs,
            out,
            packet_trace,
            format,
        } => {
            let cfg = resolve(
                config,
                &[
                    ("algorithm", algorithm.map(|a| a.to_string())),
                    ("urllc_load_mbps", urllc_load.map(|v| v.to_string())),
                    ("embb_load_mbps", embb_load.map(|v| v.to_string())),
                    ("seed", seed.map(|v| v.to_string())),
                    ("runs", runs.map(|v| v.to_string())),
                ],
            )?;
            let manifest = run_command(&cfg, &out, &RunOptions { format, packet_trace })?;
            println!(
                "{} at {} Mbps: {} runs, {} files in {} ({:.1} s)",
                cfg.algorithm,
                cfg.urllc_load_mbps,
                cfg.runs,
                manifest.artifacts.len(),
                out.display(),
                manifest.wall_clock_s
            );
            Ok(())
        }
        Command::Sweep {
            config,
            loads,
            algorithms,
            seed,
            runs,
            out,
            format,
        } => {
            let cfg = resolve(
                config,
                &[("seed", seed.map(|v| v.to_string())), ("runs", runs.map(|v| v.to_string()))],
            )?;
            let loads: Vec<f64> = parse_list(&loads, "load")?;
            let algorithms: Vec<Algorithm> = parse_list(&algorithms, "algorithm")?;
            let outcome = sweep_command(&cfg, &loads, &algorithms, &out, format)?;
            for w in &outcome.manifest.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.manifest.failures {
                eprintln!("failed: {} at {} Mbps: {}", f.algorithm, f.urllc_load_mbps, f.error);
            }
            println!(
                "{} grid points, {} failed, results in {} ({:.1} s)",
                outcome.experiments.len() + outcome.manifest.failures.len(),
                outcome.manifest.failures.len(),
                out.display(),
                outcome.manifest.wall_clock_s
            );
            if outcome.manifest.failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Usage(format!(
                    "{} grid point(s) failed; see manifest.json",
                    outcome.manifest.failures.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
