//! Command-line front door: scripted scenarios, config validation, and
//! standalone space audits.

use clap::{Parser, Subcommand};
use harmlab::audit::{audit_space, AuditConfig};
use harmlab::config::{parse_config, parse_target_spec};
use harmlab::error::Error;
use harmlab::scenario::run_scenario;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "harmlab", version, about = "Harmonic-map laboratory for stratified NPC targets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scripted scenario from a config file.
    Run {
        /// Path to a sectioned key=value config file.
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for the report and CSV traces.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Omit wall-clock timing so reruns are byte-identical.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Parse and validate a config file without running it.
    Validate {
        config: PathBuf,
    },
    /// Audit the metric-space contracts of one target space.
    AuditSpace {
        /// Target spec: euclidean:<dim>, hyperbolic-plane,
        /// star-tree:<l1,l2,...>, cusp, wp-model:<genus>, product:(a;b;...).
        target: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        triples: usize,
        #[arg(long, default_value_t = 10_000)]
        quadruples: usize,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            // I/O failures exit 4; bad input exits 2.
            match e {
                Error::Io(_) => ExitCode::from(4),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn dispatch() -> harmlab::Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, seed, out_dir, no_timestamp } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = parse_config(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out = out_dir.unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
            let report = run_scenario(&cfg, &out, !no_timestamp)?;
            for v in &report.verdicts {
                println!(
                    "[{}] {}: measured {} (want {} {})",
                    v.status, v.name, v.measured, v.comparison, v.threshold
                );
            }
            let report_path = out.join(format!("{}_report.json", report.scenario));
            std::fs::write(&report_path, report.to_json())?;
            println!("report: {}", report_path.display());
            Ok(ExitCode::from(report.exit_code() as u8))
        }
        Command::Validate { config } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = parse_config(&text)?;
            println!("ok: scenario {} (seed {})", cfg.name.as_str(), cfg.seed);
            Ok(ExitCode::SUCCESS)
        }
        Command::AuditSpace { target, seed, triples, quadruples } => {
            let space = parse_target_spec(&target)?;
            let cfg = AuditConfig { triples, quadruples, seed, ..Default::default() };
            let checks = audit_space(&space, &cfg)?;
            let mut ok = true;
            for c in &checks {
                let status = if c.passed() { "pass" } else { "fail" };
                ok &= c.passed();
                println!(
                    "[{status}] {}: measured {} (want {} {})",
                    c.name,
                    c.measured,
                    match c.cmp {
                        harmlab::audit::Cmp::Le => "<=",
                        harmlab::audit::Cmp::Ge => ">=",
                    },
                    c.threshold
                );
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}
