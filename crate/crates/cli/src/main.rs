//! `foldtail` — simulate threshold-crossing loss scenarios, inspect
//! equilibrium branches, and fit generalized Pareto tails.
//!
//! Exit codes: 0 success (and, for `simulate`, all exact invariants held);
//! 1 a simulation completed but an invariant failed; 2 configuration,
//! sampling, fitting, or I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use foldtail::evt::{build_estimator, empirical_quantile_sorted, extract_exceedances};
use foldtail::potentials::find_equilibria;
use foldtail_cli::config::load_config_str;
use foldtail_cli::run::{run_scenario, RunOverrides};
use foldtail_cli::tables::{fmt_float, write_tables};

#[derive(Parser)]
#[command(name = "foldtail", version, about = "Threshold-crossing tail-risk laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a scenario, verify its tail identities, and emit tables.
    Simulate {
        /// Scenario configuration (JSON).
        config: PathBuf,
        /// Directory for the emitted tables (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's sample count.
        #[arg(long)]
        samples: Option<u64>,
        /// Worker threads for sampling; output bytes never depend on this.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the equilibrium branches of the configured potential.
    Equilibria {
        /// Scenario configuration (JSON).
        config: PathBuf,
        /// Alpha grid as LO:HI:N (N points, endpoints included).
        #[arg(long, value_name = "LO:HI:N")]
        alpha_grid: String,
    },
    /// Fit a generalized Pareto tail to losses from a CSV file.
    Fit {
        /// CSV of losses: one value per line; `#` lines and a non-numeric
        /// header are skipped.
        losses: PathBuf,
        /// Threshold quantile for peak-over-threshold extraction.
        #[arg(long, default_value_t = 0.95)]
        u_quantile: f64,
        /// Estimator: `mle` or `pwm`.
        #[arg(long, default_value = "mle")]
        method: String,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            samples,
            workers,
        } => simulate(&config, &out, RunOverrides { seed, n_samples: samples, workers }),
        Command::Equilibria { config, alpha_grid } => equilibria(&config, &alpha_grid),
        Command::Fit {
            losses,
            u_quantile,
            method,
        } => fit(&losses, u_quantile, &method),
    }
}

fn read_config(path: &PathBuf) -> Result<(String, foldtail_cli::config::ScenarioConfig), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let digest = hex_digest(text.as_bytes());
    let cfg = load_config_str(&text).map_err(|e| e.to_string())?;
    Ok((digest, cfg))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in out {
        let _ = std::fmt::Write::write_fmt(&mut hex, format_args!("{b:02x}"));
    }
    hex
}

fn simulate(config: &PathBuf, out: &PathBuf, overrides: RunOverrides) -> Result<ExitCode, String> {
    let (digest, cfg) = read_config(config)?;
    let artifacts = run_scenario(&cfg, &digest, &overrides).map_err(|e| e.to_string())?;
    let paths = write_tables(&artifacts, out).map_err(|e| e.to_string())?;

    println!("config_sha256={digest}");
    println!("n_samples={} seed={}", artifacts.n_samples, artifacts.seed);
    println!(
        "regime={} xi_fitted={:.6} xi_predicted={:.6} relative_gap={:.6}",
        artifacts.tail.regime.label(),
        artifacts.tail.xi_fitted,
        artifacts.tail.xi_predicted,
        artifacts.tail.relative_gap
    );
    println!(
        "threshold={:.6} exceedances={} fraction={:.6}",
        artifacts.tail.threshold,
        artifacts.exceedances.len(),
        artifacts.tail.exceedance_fraction
    );
    println!(
        "equivalence_mismatches={} subset_violations={} boundary_excluded={}",
        artifacts.equivalence.total_mismatches(),
        artifacts.equivalence.total_subset_violations(),
        artifacts
            .equivalence
            .boundary_excluded_per_y
            .iter()
            .sum::<usize>()
    );
    println!("band_max_ratio={:.4}", artifacts.band_max_ratio);
    for path in &paths {
        println!("wrote {}", path.display());
    }
    if artifacts.verified {
        println!("verification: PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verification: FAIL");
        Ok(ExitCode::from(1))
    }
}

fn equilibria(config: &PathBuf, alpha_grid: &str) -> Result<ExitCode, String> {
    let (digest, cfg) = read_config(config)?;
    let (lo, hi, count) = parse_grid(alpha_grid)?;
    println!("# config_sha256={digest}");
    println!("alpha,x,stability");
    for i in 0..count {
        let alpha = if count == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (count - 1) as f64
        };
        let set = find_equilibria(cfg.potential.as_ref(), alpha)
            .map_err(|e| format!("alpha = {alpha}: {e}"))?;
        for eq in &set.equilibria {
            println!(
                "{},{},{}",
                fmt_float(alpha),
                fmt_float(eq.location),
                eq.stability.label()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_grid(text: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("--alpha-grid must be LO:HI:N, got `{text}`"));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| format!("bad grid start `{}`", parts[0]))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad grid end `{}`", parts[1]))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| format!("bad grid count `{}`", parts[2]))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("grid bounds must be finite with lo <= hi, got `{text}`"));
    }
    if count == 0 {
        return Err("grid needs at least one point".to_string());
    }
    Ok((lo, hi, count))
}

fn fit(losses_path: &PathBuf, u_quantile: f64, method: &str) -> Result<ExitCode, String> {
    if !(u_quantile > 0.0 && u_quantile < 1.0) {
        return Err(format!(
            "--u-quantile must lie strictly inside (0, 1), got {u_quantile}"
        ));
    }
    let estimator = build_estimator(method).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(losses_path)
        .map_err(|e| format!("cannot read {}: {e}", losses_path.display()))?;
    let mut losses = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        // First column; a non-numeric field is treated as a header and
        // skipped, so plain exports from the simulate tables also load.
        let field = line.split(',').next().unwrap_or(line).trim();
        if let Ok(v) = field.parse::<f64>() {
            losses.push(v);
        }
    }
    if losses.is_empty() {
        return Err(format!(
            "no numeric losses found in {}",
            losses_path.display()
        ));
    }
    let finite: Vec<f64> = losses.iter().copied().filter(|l| l.is_finite()).collect();
    if finite.is_empty() {
        return Err("all losses are non-finite".to_string());
    }
    let mut sorted = finite.clone();
    sorted.sort_by(f64::total_cmp);
    let u = empirical_quantile_sorted(&sorted, u_quantile);
    let set = extract_exceedances(&finite, u);
    let fit = estimator.fit(&set).map_err(|e| e.to_string())?;
    println!("method,u,u_quantile,n_exceedances,xi,beta,log_likelihood");
    println!(
        "{},{},{},{},{},{},{}",
        fit.method.label(),
        fmt_float(u),
        fmt_float(u_quantile),
        fit.n_exceedances,
        fmt_float(fit.xi),
        fmt_float(fit.beta),
        fmt_float(fit.log_likelihood)
    );
    Ok(ExitCode::SUCCESS)
}
