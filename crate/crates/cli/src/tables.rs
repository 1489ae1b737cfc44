//! Plain-text tables. Every file carries the same provenance header (config
//! digest, seed, sample count, generator version — never a timestamp), uses
//! `.` as the decimal separator unconditionally, and prints floats with 17
//! significant digits so parsing a table back recovers the exact bits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::run::RunArtifacts;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Lossless, locale-independent float rendering.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn provenance(artifacts: &RunArtifacts) -> String {
    format!(
        "# generator=foldtail {}\n# config_sha256={}\n# seed={}\n# n_samples={}\n",
        env!("CARGO_PKG_VERSION"),
        artifacts.config_digest,
        artifacts.seed,
        artifacts.n_samples,
    )
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, TableError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| TableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

/// The four plot-ready tables: survival curve, mean-excess curve, Hill plot,
/// and equilibrium branch diagram. An empty exceedance set leaves the
/// exceedance-derived files with a header row only.
pub fn emit_plot_data(artifacts: &RunArtifacts, dir: &Path) -> Result<Vec<PathBuf>, TableError> {
    std::fs::create_dir_all(dir).map_err(|source| TableError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let head = provenance(artifacts);
    let mut paths = Vec::new();

    let mut survival = head.clone();
    survival.push_str("y,empirical_survival,analytic_survival,gpd_survival\n");
    let fraction = artifacts.tail.exceedance_fraction;
    let u = artifacts.tail.threshold;
    for ((&y, &e), &a) in artifacts
        .tail
        .y_grid
        .iter()
        .zip(&artifacts.tail.empirical_survival)
        .zip(&artifacts.tail.analytic_survival)
    {
        // Unconditional GPD survival: exceedance fraction times the fitted
        // conditional excess law. Only meaningful at or above the threshold,
        // which is where the grid lives.
        let g = fraction * artifacts.tail.fit.excess_survival(y - u);
        let _ = writeln!(
            survival,
            "{},{},{},{}",
            fmt_float(y),
            fmt_float(e),
            fmt_float(a),
            fmt_float(g)
        );
    }
    paths.push(write_file(dir, "survival.csv", &survival)?);

    let mut mean_excess = head.clone();
    mean_excess.push_str("u,mean_excess,count,low_count\n");
    for point in &artifacts.mean_excess {
        let _ = writeln!(
            mean_excess,
            "{},{},{},{}",
            fmt_float(point.u),
            fmt_float(point.mean_excess),
            point.count,
            u8::from(point.low_count)
        );
    }
    paths.push(write_file(dir, "mean_excess.csv", &mean_excess)?);

    let mut hill = head.clone();
    hill.push_str("k,hill,tail_index\n");
    for est in &artifacts.hill_curve {
        let _ = writeln!(
            hill,
            "{},{},{}",
            est.k,
            fmt_float(est.hill),
            fmt_float(est.tail_index)
        );
    }
    paths.push(write_file(dir, "hill.csv", &hill)?);

    let mut branches = head.clone();
    branches.push_str("alpha,x,stability\n");
    for point in &artifacts.branch_diagram {
        let _ = writeln!(
            branches,
            "{},{},{}",
            fmt_float(point.alpha),
            fmt_float(point.x),
            point.stability
        );
    }
    paths.push(write_file(dir, "branch_diagram.csv", &branches)?);

    Ok(paths)
}

/// All tables: the four plot files plus the exceedance list, the
/// equivalence report, and the one-row fit summary.
pub fn write_tables(artifacts: &RunArtifacts, dir: &Path) -> Result<Vec<PathBuf>, TableError> {
    let mut paths = emit_plot_data(artifacts, dir)?;
    let head = provenance(artifacts);

    let mut equivalence = head.clone();
    equivalence.push_str("y,mismatches,boundary_excluded,subset_violations,n\n");
    for (((&y, &miss), &excl), &sub) in artifacts
        .equivalence
        .y_grid
        .iter()
        .zip(&artifacts.equivalence.mismatches_per_y)
        .zip(&artifacts.equivalence.boundary_excluded_per_y)
        .zip(&artifacts.equivalence.subset_violations_per_y)
    {
        let _ = writeln!(
            equivalence,
            "{},{miss},{excl},{sub},{}",
            fmt_float(y),
            artifacts.equivalence.n
        );
    }
    paths.push(write_file(dir, "equivalence.csv", &equivalence)?);

    let mut exceedances = head.clone();
    let _ = writeln!(exceedances, "# u={}", fmt_float(artifacts.exceedances.u));
    exceedances.push_str("excess\n");
    for &z in &artifacts.exceedances.excesses {
        let _ = writeln!(exceedances, "{}", fmt_float(z));
    }
    paths.push(write_file(dir, "exceedances.csv", &exceedances)?);

    let mut summary = head.clone();
    summary.push_str(
        "method,threshold,u_quantile,n_exceedances,exceedance_fraction,xi,beta,\
         log_likelihood,xi_predicted,regime,relative_gap,exponent_product,\
         hill_k,hill_tail_index,band_max_ratio,equivalence_mismatches,\
         subset_violations,verified\n",
    );
    let fit = &artifacts.tail.fit;
    let (hill_k, hill_tail) = match &artifacts.hill_summary {
        Some(est) => (est.k.to_string(), fmt_float(est.tail_index)),
        None => ("0".to_string(), "nan".to_string()),
    };
    let _ = writeln!(
        summary,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        fit.method.label(),
        fmt_float(artifacts.tail.threshold),
        fmt_float(artifacts.u_quantile),
        fit.n_exceedances,
        fmt_float(artifacts.tail.exceedance_fraction),
        fmt_float(fit.xi),
        fmt_float(fit.beta),
        fmt_float(fit.log_likelihood),
        fmt_float(artifacts.tail.xi_predicted),
        artifacts.tail.regime.label(),
        fmt_float(artifacts.tail.relative_gap),
        fmt_float(artifacts.exponent_product),
        hill_k,
        hill_tail,
        fmt_float(artifacts.band_max_ratio),
        artifacts.equivalence.total_mismatches(),
        artifacts.equivalence.total_subset_violations(),
        u8::from(artifacts.verified)
    );
    paths.push(write_file(dir, "fit_summary.csv", &summary)?);

    Ok(paths)
}
