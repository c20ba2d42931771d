//! Command-line interface: spectra, single-point quenches, field sweeps,
//! OTOC series, ancilla-clock reports, and the inequality verifier.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qstopwatch::clock::{
    branches, clock_cosine_identity, clock_qfi_identity, coherence_series, ClockProtocol,
};
use qstopwatch::dynamics::{eigendecompose, ground_state};
use qstopwatch::operators::build_hamiltonian;
use qstopwatch::scrambling::otoc_series;
use qstopwatch::sweep::emit::{emit, format_f64};
use qstopwatch::sweep::{run_point, run_sweep, SweepConfig};

#[derive(Parser)]
#[command(
    name = "qstopwatch",
    version,
    about = "Subsystem QFI, OTOC, and Lyapunov-bound toolkit for quenched Ising chains"
)]
struct Cli {
    /// TOML configuration file; defaults to the reference N=11 configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the worker count (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the eigenvalue spectrum at one field value to CSV.
    Spectrum {
        /// Transverse field h.
        #[arg(long, default_value_t = 1.0)]
        h: f64,
    },
    /// Run a single quench trajectory and write the point bundle JSON.
    Quench {
        #[arg(long, default_value_t = 1.0)]
        h: f64,
    },
    /// Run the full field sweep and write heatmaps, curves, and manifest.
    Heatmap,
    /// Write the four-point OTOC series at one field value to CSV.
    Otoc {
        #[arg(long, default_value_t = 1.0)]
        h: f64,
    },
    /// Run the ancilla-clock identity checks and write the report JSON.
    Clock {
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Grid spacing for the coherence trajectory.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// End of the coherence trajectory.
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
    },
    /// Run every inequality suite over the sweep; exit nonzero on violations.
    Verify,
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

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut config = match &cli.config {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(workers) = cli.workers {
        config.worker_count = workers;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    config.validate()?;
    let out_dir = config.output_dir.clone();

    match cli.command {
        Command::Spectrum { h } => {
            let params = config.chain.at_field(h)?;
            let spec = eigendecompose(&build_hamiltonian(&params)?)?;
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("spectrum.csv");
            let mut text = String::from("index,energy\n");
            for (i, e) in spec.eigenvalues().iter().enumerate() {
                text.push_str(&format!("{i},{}\n", format_f64(*e)));
            }
            std::fs::write(&path, text)?;
            println!("wrote {}", path.display());
        }
        Command::Quench { h } => {
            let bundle = run_point(&config, h)?;
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join(format!("point_h{h}.json"));
            std::fs::write(&path, format!("{}\n", serde_json::to_string_pretty(&bundle)?))?;
            println!("wrote {}", path.display());
            println!(
                "h = {h}: degenerate = {}, gqcrb violations = {}, envelope violations = {}, sandwich violations = {}",
                bundle.degenerate_ground_state,
                bundle.checks.gqcrb.violations.len(),
                bundle.checks.envelope.violations.len(),
                bundle.checks.sandwich_violations.len()
            );
        }
        Command::Heatmap => {
            let result = run_sweep(&config)?;
            let files = emit(&result, &out_dir)?;
            println!(
                "sweep complete: {} points, {} violations, {} failures",
                result.h_grid.len(),
                result.violations.len(),
                result.failures.len()
            );
            for file in files {
                println!("wrote {}", file.display());
            }
        }
        Command::Otoc { h } => {
            let params = config.chain.at_field(h)?;
            let spec = eigendecompose(&build_hamiltonian(&params)?)?;
            let (gs, _) = ground_state(&spec);
            let times = config.t_grid.materialize()?;
            let series = otoc_series(
                &spec,
                &gs,
                &config.otoc_ops.a.to_operator(),
                &config.otoc_ops.b.to_operator(),
                &times,
            )?;
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("otoc.csv");
            let mut text = String::from("t,re,im\n");
            for (t, v) in times.iter().zip(series.iter()) {
                text.push_str(&format!(
                    "{},{},{}\n",
                    format_f64(*t),
                    format_f64(v.re),
                    format_f64(v.im)
                ));
            }
            std::fs::write(&path, text)?;
            println!("wrote {}", path.display());
        }
        Command::Clock { h, dt, t_max } => {
            let params = config.chain.at_field(h)?;
            let spec = eigendecompose(&build_hamiltonian(&params)?)?;
            let (gs, _) = ground_state(&spec);
            let proto = ClockProtocol::new(
                params,
                config.otoc_ops.a.to_operator(),
                config.otoc_ops.b.to_operator(),
                gs,
            )?;
            let n_steps = (t_max / dt).round() as usize;
            let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * dt).collect();
            let coherence = coherence_series(&spec, &proto, &times)?;
            let qfi_report = clock_qfi_identity(&coherence)?;
            let qfi_series = qfi_report.qfi_series(times[0])?;
            let cosine_report = clock_cosine_identity(&qfi_series, &coherence)?;
            let zero = branches(&spec, &proto, 0.0)?.coherence();
            let report = serde_json::json!({
                "h": h,
                "dt": dt,
                "t_max": t_max,
                "coherence_at_zero": { "re": zero.re, "im": zero.im },
                "qfi_identity": qfi_report,
                "cosine_identity": cosine_report,
            });
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("clock_report.json");
            std::fs::write(&path, format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            println!("wrote {}", path.display());
            println!(
                "QFI identity max relative deviation: {:.3e}",
                qfi_report.max_rel_dev
            );
            println!(
                "cosine identity max deviation: {:.3e} over window ending t = {:.3}",
                cosine_report.max_abs_dev, cosine_report.window_end
            );
        }
        Command::Verify => {
            let result = run_sweep(&config)?;
            let mut counts = std::collections::BTreeMap::new();
            for v in &result.violations {
                *counts.entry(format!("{:?}", v.kind)).or_insert(0usize) += 1;
            }
            println!("inequality suite over {} field points:", result.h_grid.len());
            for kind in ["Gqcrb", "Envelope", "SandwichLower", "SandwichUpper", "BoundVsLambda"] {
                let n = counts.get(kind).copied().unwrap_or(0);
                println!("  {kind:<16} {}", if n == 0 { "PASS".to_string() } else { format!("FAIL ({n} violations)") });
            }
            if !result.failures.is_empty() {
                println!("  {} point(s) failed to run", result.failures.len());
            }
            if result.violations.is_empty() && result.failures.is_empty() {
                println!("all inequality suites passed");
            } else {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
