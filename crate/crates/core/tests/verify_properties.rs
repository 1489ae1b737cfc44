//! The event identity and the tail cross-check, end to end.

use foldtail::jumpmap::{self, BranchMode, BranchSpec, LossMap};
use foldtail::sampling::rng::unit_uniform;
use foldtail::sampling::{build_distribution, sample_losses};
use foldtail::verify::{analytic_survival, check_event_equivalence, check_tail_match};
use foldtail::Regime;
use std::collections::BTreeMap;

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

#[test]
fn equivalence_holds_across_random_scenarios() {
    // 100 random branch/loss/distribution combinations, zero tolerance for
    // event mismatches outside the rounding band.
    for trial in 0..100u64 {
        let draw = |j: u64| unit_uniform(8080, trial * 16 + j);
        let mode = if draw(0) < 0.5 {
            BranchMode::Divergent
        } else {
            BranchMode::Bounded
        };
        let m = 0.4 + 1.6 * draw(1);
        let c = 0.5 + 1.5 * draw(2);
        let alpha_c = 4.0 * draw(3) - 2.0;
        let p = 0.4 + 1.6 * draw(4);
        let baseline = if draw(5) < 0.5 { 0.0 } else { 0.3 * draw(6) };
        let spec = BranchSpec::new(mode, m, c, alpha_c).unwrap();
        let map = LossMap::new(p, baseline).unwrap();
        let dist = build_distribution(
            "uniform",
            &params(&[("lo", alpha_c - 1.0), ("hi", alpha_c + 2.0)]),
        )
        .unwrap();

        let batch = sample_losses(dist.as_ref(), &spec, &map, 5_000, 300 + trial).unwrap();
        let y_grid = [baseline + 0.3, baseline + 1.0, baseline + 5.0, baseline + 50.0];
        let report = check_event_equivalence(&batch, &spec, &map, &y_grid).unwrap();
        assert_eq!(
            report.total_mismatches(),
            0,
            "trial {trial}: {:?} excluded {:?}",
            report.mismatches_per_y,
            report.boundary_excluded_per_y
        );
    }
}

#[test]
fn parameter_side_events_are_nested() {
    // Rising levels shrink the event: the parameter set at y2 > y1 must be
    // a subset of the one at y1, for both branch modes.
    for (mode, seed) in [(BranchMode::Bounded, 71u64), (BranchMode::Divergent, 72u64)] {
        let spec = BranchSpec::new(mode, 0.7, 1.3, 0.25).unwrap();
        let map = LossMap::new(1.4, 0.0).unwrap();
        let dist = build_distribution(
            "uniform",
            &params(&[("lo", -0.75), ("hi", 2.25)]),
        )
        .unwrap();
        let batch = sample_losses(dist.as_ref(), &spec, &map, 10_000, seed).unwrap();

        let levels = [0.5, 2.0, 8.0, 32.0];
        let members: Vec<Vec<bool>> = levels
            .iter()
            .map(|&y| {
                let eta = jumpmap::eta(&spec, &map, y).unwrap();
                batch
                    .alphas
                    .iter()
                    .map(|&a| match mode {
                        BranchMode::Bounded => a > spec.alpha_c + eta,
                        BranchMode::Divergent => a > spec.alpha_c && a < spec.alpha_c + eta,
                    })
                    .collect()
            })
            .collect();
        for w in members.windows(2) {
            for (i, (&narrow, &wide)) in w[1].iter().zip(&w[0]).enumerate() {
                assert!(
                    !narrow || wide,
                    "sample {i}: event at higher level not contained in lower"
                );
            }
        }
    }
}

#[test]
fn tail_match_on_parameter_tail_scenario() {
    // Bounded branch driven by a Pareto parameter tail: alpha has index 2,
    // the pipeline has m * p = 1, so the loss shape is 1/2.
    let spec = BranchSpec::new(BranchMode::Bounded, 0.5, 1.0, 0.0).unwrap();
    let map = LossMap::new(2.0, 0.0).unwrap();
    let dist = build_distribution(
        "pareto",
        &params(&[("scale", 1.0), ("tail_index", 2.0), ("shift", 0.0)]),
    )
    .unwrap();
    let batch = sample_losses(dist.as_ref(), &spec, &map, 200_000, 21).unwrap();
    let report = check_tail_match(&batch, &spec, &map, dist.as_ref(), 0.99, 20).unwrap();

    assert_eq!(report.regime, Regime::ParameterTailDriven);
    assert!((report.xi_predicted - 0.5).abs() < 1e-12);
    assert!(
        (report.xi_fitted - 0.5).abs() < 0.1,
        "fitted {}",
        report.xi_fitted
    );
    assert!(report.relative_gap < 0.2, "gap {}", report.relative_gap);
    // Analytic curve: Pr(Y > y) = y^(-2) on this scenario, up to the
    // rounding of the CDF complement at the unit scale.
    for (&y, &a) in report.y_grid.iter().zip(&report.analytic_survival) {
        assert!(
            (a - y.powi(-2)).abs() <= 1e-12 * a + 4e-16,
            "y {y}: {a}"
        );
    }
    for (e, a) in report
        .empirical_survival
        .iter()
        .zip(&report.analytic_survival)
    {
        assert!((e - a).abs() <= 6.0 / (batch.len() as f64).sqrt() + 0.15 * a);
    }
}

#[test]
fn analytic_survival_integrates_both_modes() {
    let map = LossMap::new(2.0, 0.0).unwrap();
    let dist = build_distribution("uniform", &params(&[("lo", 0.0), ("hi", 1.0)])).unwrap();

    // Divergent: Pr(Y > y) = Pr(alpha < eta) with eta = y^(-1) here.
    let div = BranchSpec::new(BranchMode::Divergent, 0.5, 1.0, 0.0).unwrap();
    for &y in &[1.5, 3.0, 30.0] {
        let s = analytic_survival(&div, &map, dist.as_ref(), y).unwrap();
        assert!((s - 1.0 / y).abs() <= 1e-13);
    }

    // Bounded: Pr(Y > y) = Pr(alpha > eta) with eta = y here (m*p = 1).
    let bnd = BranchSpec::new(BranchMode::Bounded, 0.5, 1.0, 0.0).unwrap();
    for &y in &[0.2, 0.5, 0.9] {
        let s = analytic_survival(&bnd, &map, dist.as_ref(), y).unwrap();
        assert!((s - (1.0 - y)).abs() <= 1e-13, "y {y}: {s}");
    }
}
