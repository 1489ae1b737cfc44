//! Cross-checks tying the three layers together.
//!
//! Two independent routes to the same tail must agree:
//!
//! 1. **Event equivalence** — per sample, `{Y > y}` must coincide with the
//!    parameter-side event (`alpha > alpha_c + eta(y)` for bounded branches,
//!    `alpha_c < alpha < alpha_c + eta(y)` for divergent ones). This is an
//!    identity, so the check is exact; samples within a narrow relative band
//!    of the level `y` are tallied separately because the two sides may
//!    round differently there.
//! 2. **Tail match** — the empirical survival curve is compared against the
//!    closed-form survival implied by pushing the parameter law through the
//!    loss map, and the fitted GPD shape against the predicted one.

use thiserror::Error;

use crate::evt::{extract_exceedances, fit_gpd_mle, GpdFit};
use crate::jumpmap::{predict_tail, BranchMode, BranchSpec, JumpError, LossMap, Regime};
use crate::sampling::{AlphaDistribution, SampleBatch};

/// Relative half-width of the boundary band around each level `y`.
pub const BOUNDARY_BAND: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid level grid: {reason}")]
    InvalidGrid { reason: String },
    #[error("only {got} losses exceed the threshold; need at least {needed}")]
    TooFewExceedances { needed: usize, got: usize },
    #[error("empty sample batch")]
    EmptyBatch,
    #[error(transparent)]
    Jump(#[from] JumpError),
    #[error(transparent)]
    Evt(#[from] crate::evt::EvtError),
}

/// Outcome of the per-sample event-identity check.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub y_grid: Vec<f64>,
    /// Samples (outside the boundary band) where the two events disagree.
    pub mismatches_per_y: Vec<usize>,
    /// Samples whose loss fell within the boundary band of the level.
    pub boundary_excluded_per_y: Vec<usize>,
    /// Samples with `Y > y` but `alpha < alpha_c`, violating the containment
    /// of the exceedance event in the supercritical region.
    pub subset_violations_per_y: Vec<usize>,
    pub n: usize,
}

impl EquivalenceReport {
    pub fn total_mismatches(&self) -> usize {
        self.mismatches_per_y.iter().sum()
    }

    pub fn total_subset_violations(&self) -> usize {
        self.subset_violations_per_y.iter().sum()
    }
}

/// Checks `{Y > y}` against the parameter-side event at every level in
/// `y_grid`, for every sample in the batch.
pub fn check_event_equivalence(
    batch: &SampleBatch,
    spec: &BranchSpec,
    map: &LossMap,
    y_grid: &[f64],
) -> Result<EquivalenceReport, VerifyError> {
    if batch.is_empty() {
        return Err(VerifyError::EmptyBatch);
    }
    if y_grid.is_empty() {
        return Err(VerifyError::InvalidGrid {
            reason: "level grid is empty".to_string(),
        });
    }
    for &y in y_grid {
        if !y.is_finite() || y <= 0.0 || y <= map.baseline {
            return Err(VerifyError::InvalidGrid {
                reason: format!(
                    "level {y} must be finite, positive, and above the baseline {}",
                    map.baseline
                ),
            });
        }
    }

    let mut mismatches_per_y = Vec::with_capacity(y_grid.len());
    let mut boundary_excluded_per_y = Vec::with_capacity(y_grid.len());
    let mut subset_violations_per_y = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        let eta = crate::jumpmap::eta(spec, map, y)?;
        let mut mismatches = 0usize;
        let mut excluded = 0usize;
        let mut subset_violations = 0usize;
        for (&alpha, &l) in batch.alphas.iter().zip(&batch.losses) {
            // An exceedance below the critical point would break the event
            // algebra outright, band or no band.
            if l > y && alpha < spec.alpha_c {
                subset_violations += 1;
            }
            // Near the level the loss side and the parameter side may round
            // in opposite directions; such samples are tallied, not judged.
            if (l - y).abs() <= BOUNDARY_BAND * y {
                excluded += 1;
                continue;
            }
            let loss_side = l > y;
            let param_side = match spec.mode {
                BranchMode::Bounded => alpha > spec.alpha_c + eta,
                BranchMode::Divergent => alpha > spec.alpha_c && alpha < spec.alpha_c + eta,
            };
            if loss_side != param_side {
                mismatches += 1;
            }
        }
        mismatches_per_y.push(mismatches);
        boundary_excluded_per_y.push(excluded);
        subset_violations_per_y.push(subset_violations);
    }
    Ok(EquivalenceReport {
        y_grid: y_grid.to_vec(),
        mismatches_per_y,
        boundary_excluded_per_y,
        subset_violations_per_y,
        n: batch.len(),
    })
}

/// Empirical-vs-analytic tail comparison.
#[derive(Debug, Clone)]
pub struct TailMatchReport {
    pub y_grid: Vec<f64>,
    pub empirical_survival: Vec<f64>,
    pub analytic_survival: Vec<f64>,
    pub fit: GpdFit,
    pub xi_fitted: f64,
    pub xi_predicted: f64,
    /// `|xi_fitted - xi_predicted| / max(xi_predicted, 0.05)`.
    pub relative_gap: f64,
    pub regime: Regime,
    pub threshold: f64,
    pub exceedance_fraction: f64,
}

/// Closed-form `Pr(Y > y)` obtained by pushing the parameter law through
/// the loss map.
pub fn analytic_survival(
    spec: &BranchSpec,
    map: &LossMap,
    dist: &dyn AlphaDistribution,
    y: f64,
) -> Result<f64, VerifyError> {
    let eta = crate::jumpmap::eta(spec, map, y)?;
    let p = match spec.mode {
        BranchMode::Bounded => dist.exceedance_probability(spec.alpha_c + eta),
        BranchMode::Divergent => dist.cdf(spec.alpha_c + eta) - dist.cdf(spec.alpha_c),
    };
    Ok(p.max(0.0))
}

/// Compares the sampled tail to its analytic form and the fitted GPD shape
/// to the predicted one.
///
/// The threshold `u` is the `u_quantile` empirical quantile of the losses;
/// levels run geometrically from just above `u` to the 0.9999 quantile.
pub fn check_tail_match(
    batch: &SampleBatch,
    spec: &BranchSpec,
    map: &LossMap,
    dist: &dyn AlphaDistribution,
    u_quantile: f64,
    grid_size: usize,
) -> Result<TailMatchReport, VerifyError> {
    if batch.is_empty() {
        return Err(VerifyError::EmptyBatch);
    }
    if grid_size < 2 {
        return Err(VerifyError::InvalidGrid {
            reason: format!("grid size {grid_size} must be at least 2"),
        });
    }

    let finite: Vec<f64> = batch.losses.iter().copied().filter(|l| l.is_finite()).collect();
    if finite.is_empty() {
        return Err(VerifyError::EmptyBatch);
    }
    let mut sorted = finite.clone();
    sorted.sort_by(f64::total_cmp);
    let u = crate::evt::empirical_quantile_sorted(&sorted, u_quantile);

    let set = extract_exceedances(&finite, u);
    if set.len() < 1000 {
        return Err(VerifyError::TooFewExceedances {
            needed: 1000,
            got: set.len(),
        });
    }
    let fit = fit_gpd_mle(&set)?;
    let prediction = predict_tail(spec, map, dist)?;

    let y_hi = crate::evt::empirical_quantile_sorted(&sorted, 0.9999).max(u * 1.0001);
    let y_lo = if u > map.baseline && u > 0.0 {
        u
    } else {
        // Threshold sits at or below the invertibility floor; start the grid
        // just above it instead.
        map.baseline.max(0.0) + 1e-9 * (1.0 + map.baseline.abs())
    };
    let ratio = (y_hi / y_lo).max(1.0 + 1e-12);
    let y_grid: Vec<f64> = (0..grid_size)
        .map(|i| y_lo * ratio.powf(i as f64 / (grid_size - 1) as f64))
        .collect();

    let mut empirical = Vec::with_capacity(grid_size);
    let mut analytic = Vec::with_capacity(grid_size);
    for &y in &y_grid {
        empirical.push(
            batch.losses.iter().filter(|&&l| l > y).count() as f64 / batch.len() as f64,
        );
        analytic.push(analytic_survival(spec, map, dist, y)?);
    }

    let xi_predicted = prediction.xi_predicted;
    let relative_gap = (fit.xi - xi_predicted).abs() / xi_predicted.max(0.05);
    Ok(TailMatchReport {
        y_grid,
        empirical_survival: empirical,
        analytic_survival: analytic,
        fit,
        xi_fitted: fit.xi,
        xi_predicted,
        relative_gap,
        regime: prediction.regime,
        threshold: u,
        exceedance_fraction: set.exceedance_fraction(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jumpmap::{BranchMode, BranchSpec, LossMap};
    use crate::sampling::{build_distribution, sample_losses};
    use std::collections::BTreeMap;

    fn uniform01() -> Box<dyn AlphaDistribution> {
        let mut p = BTreeMap::new();
        p.insert("lo".to_string(), 0.0);
        p.insert("hi".to_string(), 1.0);
        build_distribution("uniform", &p).unwrap()
    }

    #[test]
    fn hand_batch_equivalence_is_exact() {
        // Bounded, m = 1, C = 1, alpha_c = 0, p = 1: Y = max(alpha, 0).
        let spec = BranchSpec::new(BranchMode::Bounded, 1.0, 1.0, 0.0).unwrap();
        let map = LossMap::new(1.0, 0.0).unwrap();
        let batch = SampleBatch {
            seed: 0,
            alphas: vec![-1.0, 0.5],
            losses: vec![0.0, 0.5],
        };
        let report = check_event_equivalence(&batch, &spec, &map, &[0.25]).unwrap();
        assert_eq!(report.total_mismatches(), 0);
        assert_eq!(report.boundary_excluded_per_y, vec![0]);
        assert_eq!(report.total_subset_violations(), 0);
    }

    #[test]
    fn sampled_batch_has_zero_mismatches() {
        let spec = BranchSpec::new(BranchMode::Divergent, 0.5, 1.0, 0.0).unwrap();
        let map = LossMap::new(2.0, 0.0).unwrap();
        let dist = uniform01();
        let batch = sample_losses(dist.as_ref(), &spec, &map, 20_000, 7).unwrap();
        let report =
            check_event_equivalence(&batch, &spec, &map, &[1.5, 4.0, 40.0, 1e4]).unwrap();
        assert_eq!(report.total_mismatches(), 0, "{:?}", report.mismatches_per_y);
        assert_eq!(report.total_subset_violations(), 0);
    }

    #[test]
    fn subcritical_exceedance_is_flagged_as_subset_violation() {
        let spec = BranchSpec::new(BranchMode::Bounded, 1.0, 1.0, 0.0).unwrap();
        let map = LossMap::new(1.0, 0.0).unwrap();
        // A loss above the level with alpha below alpha_c cannot arise from
        // the map; a corrupted batch must be caught, not silently passed.
        let batch = SampleBatch {
            seed: 0,
            alphas: vec![-1.0, 2.0],
            losses: vec![10.0, 2.0],
        };
        let report = check_event_equivalence(&batch, &spec, &map, &[1.0]).unwrap();
        assert_eq!(report.subset_violations_per_y, vec![1]);
        assert_eq!(report.mismatches_per_y, vec![1]);
    }

    #[test]
    fn grid_rejects_baseline_and_nonpositive_levels() {
        let spec = BranchSpec::new(BranchMode::Bounded, 0.5, 1.0, 0.0).unwrap();
        let map = LossMap::new(2.0, 0.1).unwrap();
        let batch = SampleBatch {
            seed: 0,
            alphas: vec![0.0],
            losses: vec![0.1],
        };
        assert!(matches!(
            check_event_equivalence(&batch, &spec, &map, &[0.1]),
            Err(VerifyError::InvalidGrid { .. })
        ));
        assert!(matches!(
            check_event_equivalence(&batch, &spec, &map, &[-1.0]),
            Err(VerifyError::InvalidGrid { .. })
        ));
        assert!(matches!(
            check_event_equivalence(&batch, &spec, &map, &[]),
            Err(VerifyError::InvalidGrid { .. })
        ));
    }

    #[test]
    fn analytic_survival_matches_closed_form() {
        // Divergent, m = 1/2, C = 1, p = 2, Uniform(0,1):
        // Pr(Y > y) = Pr(alpha < 1/y) = 1/y for y >= 1.
        let spec = BranchSpec::new(BranchMode::Divergent, 0.5, 1.0, 0.0).unwrap();
        let map = LossMap::new(2.0, 0.0).unwrap();
        let dist = uniform01();
        for &y in &[1.0, 2.0, 10.0, 1e4] {
            let s = analytic_survival(&spec, &map, dist.as_ref(), y).unwrap();
            assert!((s - 1.0 / y).abs() <= 1e-12 / y, "y {y}: {s}");
        }
    }

    #[test]
    fn tail_match_on_reference_scenario() {
        let spec = BranchSpec::new(BranchMode::Divergent, 0.5, 1.0, 0.0).unwrap();
        let map = LossMap::new(2.0, 0.0).unwrap();
        let dist = uniform01();
        let batch = sample_losses(dist.as_ref(), &spec, &map, 200_000, 11).unwrap();
        let report =
            check_tail_match(&batch, &spec, &map, dist.as_ref(), 0.99, 20).unwrap();
        assert_eq!(report.y_grid.len(), 20);
        assert!((report.xi_predicted - 1.0).abs() < 1e-12);
        assert!(report.relative_gap < 0.15, "gap {}", report.relative_gap);
        // Analytic curve tracks the sample at every grid level.
        for (e, a) in report
            .empirical_survival
            .iter()
            .zip(&report.analytic_survival)
        {
            assert!((e - a).abs() < 5.0 / (batch.len() as f64).sqrt() + 0.1 * a);
        }
    }

    #[test]
    fn tail_match_needs_enough_exceedances() {
        let spec = BranchSpec::new(BranchMode::Divergent, 0.5, 1.0, 0.0).unwrap();
        let map = LossMap::new(2.0, 0.0).unwrap();
        let dist = uniform01();
        let batch = sample_losses(dist.as_ref(), &spec, &map, 5_000, 3).unwrap();
        assert!(matches!(
            check_tail_match(&batch, &spec, &map, dist.as_ref(), 0.99, 20),
            Err(VerifyError::TooFewExceedances { .. })
        ));
    }
}
