//! Scenario execution: sample, verify, diagnose, and bundle everything a
//! table writer or a caller needs. No wall-clock state enters the artifacts,
//! so the same inputs always produce the same bundle.

use foldtail::evt::{
    extract_exceedances, hill_estimator, mean_excess_curve, ExceedanceSet, HillEstimate,
    MeanExcessPoint,
};
use foldtail::potentials::find_equilibria;
use foldtail::sampling::sample_losses;
use foldtail::verify::{
    check_event_equivalence, check_tail_match, EquivalenceReport, TailMatchReport,
};
use thiserror::Error;

use crate::config::ScenarioConfig;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Sampling(#[from] foldtail::sampling::SamplingError),
    #[error(transparent)]
    Verify(#[from] foldtail::verify::VerifyError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Command-line overrides applied on top of the config's `run` section.
#[derive(Debug, Default, Clone, Copy)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub n_samples: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub alpha: f64,
    pub x: f64,
    pub stability: &'static str,
}

/// Everything a run produces, ready for table emission.
pub struct RunArtifacts {
    pub config_digest: String,
    pub seed: u64,
    pub n_samples: u64,
    pub u_quantile: f64,
    pub exponent_product: f64,
    pub equivalence: EquivalenceReport,
    pub tail: TailMatchReport,
    pub exceedances: ExceedanceSet,
    pub hill_curve: Vec<HillEstimate>,
    pub hill_summary: Option<HillEstimate>,
    pub mean_excess: Vec<MeanExcessPoint>,
    pub branch_diagram: Vec<BranchPoint>,
    /// Max over the level grid of |empirical - analytic| in units of three
    /// binomial standard errors. Reported, not gated: it is a statistical
    /// band, not an identity.
    pub band_max_ratio: f64,
    pub analytic_curve_valid: bool,
    /// True iff every exact invariant held: zero event mismatches, zero
    /// subset violations, and a well-formed analytic survival curve.
    pub verified: bool,
}

pub fn run_scenario(
    cfg: &ScenarioConfig,
    config_digest: &str,
    overrides: &RunOverrides,
) -> Result<RunArtifacts, RunError> {
    let seed = overrides.seed.unwrap_or(cfg.run.seed);
    let n_samples = overrides.n_samples.unwrap_or(cfg.run.n_samples);

    // The sampler is counter-based, so the pool size cannot change a single
    // bit of the output; the knob exists so that claim stays testable.
    let batch = match overrides.workers {
        Some(workers) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| RunError::Pool(e.to_string()))?;
            pool.install(|| sample_losses(cfg.dist.as_ref(), &cfg.spec, &cfg.map, n_samples, seed))?
        }
        None => sample_losses(cfg.dist.as_ref(), &cfg.spec, &cfg.map, n_samples, seed)?,
    };

    let tail = check_tail_match(
        &batch,
        &cfg.spec,
        &cfg.map,
        cfg.dist.as_ref(),
        cfg.run.u_quantile,
        cfg.run.y_grid_size,
    )?;
    let equivalence = check_event_equivalence(&batch, &cfg.spec, &cfg.map, &tail.y_grid)?;

    // Diagnostics run on the finite losses; a divergent-mode draw landing
    // exactly on alpha_c would contribute an infinite loss, which the
    // survival curves count but log-based estimators cannot.
    let finite: Vec<f64> = batch
        .losses
        .iter()
        .copied()
        .filter(|l| l.is_finite())
        .collect();
    let exceedances = extract_exceedances(&finite, tail.threshold);

    let positives = finite.iter().filter(|&&l| l > 0.0).count();
    let hill_curve = hill_curve_over_windows(&finite, positives);
    let hill_summary = hill_summary_window(positives)
        .and_then(|k| hill_estimator(&finite, k).ok());

    let mut sorted = finite.clone();
    sorted.sort_by(f64::total_cmp);
    let me_thresholds = mean_excess_thresholds(&sorted);
    let mean_excess = mean_excess_curve(&finite, &me_thresholds);

    let branch_diagram = branch_diagram(cfg);

    let n = batch.len() as f64;
    let mut band_max_ratio: f64 = 0.0;
    for (&e, &a) in tail.empirical_survival.iter().zip(&tail.analytic_survival) {
        let var = a * (1.0 - a) / n;
        if var > 0.0 {
            band_max_ratio = band_max_ratio.max((e - a).abs() / (3.0 * var.sqrt()));
        } else if e != a {
            band_max_ratio = f64::INFINITY;
        }
    }

    let analytic_curve_valid = tail
        .analytic_survival
        .iter()
        .all(|&a| (0.0..=1.0).contains(&a))
        && tail
            .analytic_survival
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12);

    let verified = equivalence.total_mismatches() == 0
        && equivalence.total_subset_violations() == 0
        && analytic_curve_valid;

    Ok(RunArtifacts {
        config_digest: config_digest.to_string(),
        seed,
        n_samples,
        u_quantile: cfg.run.u_quantile,
        exponent_product: cfg.spec.exponent * cfg.map.exponent,
        equivalence,
        tail,
        exceedances,
        hill_curve,
        hill_summary,
        mean_excess,
        branch_diagram,
        band_max_ratio,
        analytic_curve_valid,
        verified,
    })
}

/// Hill estimates over a geometric ladder of window sizes, for the Hill
/// plot. Windows that fail (too few positives, flat top) are skipped.
fn hill_curve_over_windows(finite: &[f64], positives: usize) -> Vec<HillEstimate> {
    let k_max = positives.saturating_sub(1).min(100_000);
    if k_max < 10 {
        return Vec::new();
    }
    let points = 30usize;
    let ratio = (k_max as f64 / 10.0).max(1.0);
    let mut ks: Vec<usize> = (0..points)
        .map(|i| (10.0 * ratio.powf(i as f64 / (points - 1) as f64)).round() as usize)
        .collect();
    ks.dedup();
    ks.into_iter()
        .filter_map(|k| hill_estimator(finite, k).ok())
        .collect()
}

/// Single-number Hill window: 1% of the positive losses, clamped to the
/// estimator's valid range.
fn hill_summary_window(positives: usize) -> Option<usize> {
    let k = (positives / 100).clamp(10, 100_000);
    (k + 1 <= positives).then_some(k)
}

fn mean_excess_thresholds(sorted_finite: &[f64]) -> Vec<f64> {
    if sorted_finite.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<f64> = Vec::new();
    for i in 0..25 {
        let q = 0.50 + 0.49 * i as f64 / 24.0;
        let u = foldtail::evt::empirical_quantile_sorted(sorted_finite, q);
        if out.last().map_or(true, |&prev| u > prev) {
            out.push(u);
        }
    }
    out
}

fn branch_diagram(cfg: &ScenarioConfig) -> Vec<BranchPoint> {
    let (lo, hi) = cfg.potential.alpha_range();
    let steps = 200usize;
    let mut rows = Vec::new();
    for i in 0..=steps {
        let alpha = lo + (hi - lo) * i as f64 / steps as f64;
        // Interior alphas where the leading coefficient collapses have no
        // well-defined equilibrium set; the diagram simply has a gap there.
        if let Ok(set) = find_equilibria(cfg.potential.as_ref(), alpha) {
            for eq in &set.equilibria {
                rows.push(BranchPoint {
                    alpha,
                    x: eq.location,
                    stability: eq.stability.label(),
                });
            }
        }
    }
    rows
}
