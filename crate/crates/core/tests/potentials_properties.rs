//! Equilibrium-finding checked against closed forms and residual bounds.

use foldtail::potentials::{
    build_potential, find_critical_threshold, find_equilibria, Side, ROOT_TOL,
};
use foldtail::sampling::rng::unit_uniform;
use foldtail::Stability;

/// Interleaved custom-polynomial coefficients for the fold `x^3 - alpha x`.
const FOLD_AS_CUSTOM: &[f64] = &[0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0];

#[test]
fn fold_equilibria_match_closed_form() {
    let fold = build_potential("fold", &[], (-2.0, 5.0)).unwrap();
    for i in 1..=400 {
        let alpha = 5.0 * i as f64 / 400.0;
        let set = find_equilibria(fold.as_ref(), alpha).unwrap();
        let expected = (alpha / 3.0).sqrt();
        assert_eq!(set.len(), 2, "alpha {alpha}");
        assert!(
            (set.equilibria[0].location + expected).abs() <= 1e-12 * (1.0 + expected),
            "alpha {alpha}: {} vs {}",
            set.equilibria[0].location,
            -expected
        );
        assert!((set.equilibria[1].location - expected).abs() <= 1e-12 * (1.0 + expected));
        assert_eq!(set.equilibria[0].stability, Stability::Unstable);
        assert_eq!(set.equilibria[1].stability, Stability::Stable);
    }
}

#[test]
fn equilibrium_residuals_stay_within_tolerance() {
    // Random interleaved degree-3..5 models; every reported equilibrium must
    // actually zero the gradient to within the scaled residual tolerance.
    let mut checked = 0usize;
    for trial in 0..1000u64 {
        let draw = |j: u64| unit_uniform(2024, trial * 64 + j);
        let degree = 3 + (
            // degree in {3, 4, 5}
            (draw(0) * 3.0) as usize
        ).min(2);
        let mut coeffs = vec![0.0; 2 * (degree + 1)];
        for k in 0..degree {
            coeffs[2 * k] = 4.0 * draw(2 * k as u64 + 1) - 2.0;
            coeffs[2 * k + 1] = 4.0 * draw(2 * k as u64 + 2) - 2.0;
        }
        // Leading coefficient constant and bounded away from zero so the
        // degree never collapses anywhere in the range.
        coeffs[2 * degree] = 0.5 + draw(60);
        coeffs[2 * degree + 1] = 0.0;
        let model = build_potential("custom_polynomial", &coeffs, (-1.0, 1.0)).unwrap();
        let alpha = 2.0 * draw(61) - 1.0;
        let set = find_equilibria(model.as_ref(), alpha).unwrap();
        let grad = model.poly_at(alpha).derivative();
        for eq in &set.equilibria {
            let residual = grad.eval(eq.location).abs();
            assert!(
                residual <= ROOT_TOL * (1.0 + eq.location.abs()),
                "trial {trial}: residual {residual} at {}",
                eq.location
            );
            checked += 1;
        }
    }
    assert!(checked > 500, "only {checked} equilibria seen");
}

#[test]
fn translation_of_the_argument_preserves_equilibrium_structure() {
    // Recoordinatizing x -> x + c leaves the physics alone: same number of
    // equilibria, same stabilities, locations shifted by exactly -c.
    fn binom(k: usize, j: usize) -> f64 {
        let mut v = 1.0;
        for t in 0..j {
            v = v * (k - t) as f64 / (t + 1) as f64;
        }
        v
    }
    for trial in 0..100u64 {
        let draw = |j: u64| unit_uniform(77, trial * 16 + j);
        let r1 = 3.0 * draw(0) - 1.5;
        let r2 = r1 + 0.5 + draw(1);
        let r3 = r2 + 0.5 + draw(2);
        // Gradient 3(x-r1)(x-r2)(x-r3) integrates to a quartic potential.
        let e2 = r1 + r2 + r3;
        let e1 = r1 * r2 + r1 * r3 + r2 * r3;
        let e0 = r1 * r2 * r3;
        let base = [
            0.0, 0.0, // constant
            -3.0 * e0, 0.0, // x
            1.5 * e1, 0.0, // x^2
            -e2, 0.0, // x^3
            0.75, 0.0, // x^4
        ];
        let c = 4.0 * draw(3) - 2.0;
        // W(x) = V(x + c): push the shift through both the constant and the
        // alpha-linear coefficient vectors by binomial expansion.
        let mut translated = [0.0f64; 10];
        for j in 0..5 {
            for k in j..5 {
                let w = binom(k, j) * c.powi((k - j) as i32);
                translated[2 * j] += base[2 * k] * w;
                translated[2 * j + 1] += base[2 * k + 1] * w;
            }
        }
        let a = build_potential("custom_polynomial", &base, (-1.0, 1.0)).unwrap();
        let b = build_potential("custom_polynomial", &translated, (-1.0, 1.0)).unwrap();
        let alpha = 2.0 * draw(5) - 1.0;
        let sa = find_equilibria(a.as_ref(), alpha).unwrap();
        let sb = find_equilibria(b.as_ref(), alpha).unwrap();
        assert_eq!(
            sa.len(),
            3,
            "trial {trial}: {:?}",
            sa.locations().collect::<Vec<_>>()
        );
        assert_eq!(sa.len(), sb.len());
        for (x, y) in sa.equilibria.iter().zip(&sb.equilibria) {
            assert!(
                (y.location - (x.location - c)).abs() <= 1e-8 * (1.0 + x.location.abs()),
                "trial {trial}: {} vs {} - {c}",
                y.location,
                x.location
            );
            assert_eq!(x.stability, y.stability);
        }
    }
}

#[test]
fn fold_threshold_and_branch_exponent() {
    let fold = build_potential("fold", &[], (-1.0, 1.0)).unwrap();
    let t = find_critical_threshold(fold.as_ref(), (-1.0, 1.0)).unwrap();
    assert!(t.alpha_c.abs() <= 1e-9, "alpha_c {}", t.alpha_c);
    assert!(t.bracket.0 <= t.alpha_c && t.alpha_c <= t.bracket.1);

    let m = foldtail::potentials::branch_exponent_estimate(fold.as_ref(), 0.0, Side::Above)
        .unwrap();
    assert!((m - 0.5).abs() < 0.01, "exponent {m}");
}

#[test]
fn custom_fold_reproduces_builtin_threshold() {
    let custom = build_potential("custom_polynomial", FOLD_AS_CUSTOM, (-1.0, 1.0)).unwrap();
    let t = find_critical_threshold(custom.as_ref(), (-1.0, 1.0)).unwrap();
    assert!(t.alpha_c.abs() <= 1e-9);
}

#[test]
fn cusp_threshold_agrees_with_dense_scan() {
    // Symmetric cusp: stable count changes where the quadratic term of the
    // gradient changes sign. Locate it by brute-force scan, then compare.
    let cusp = build_potential("cusp", &[0.0, -1.0, 0.0, 0.0], (-1.0, 1.0)).unwrap();

    let stable_count = |alpha: f64| {
        find_equilibria(cusp.as_ref(), alpha)
            .map(|s| s.stable_count())
            .unwrap_or(0)
    };
    let n = 20_000;
    let mut scan_alpha = f64::NAN;
    let mut prev = stable_count(-1.0);
    for i in 1..=n {
        let a = -1.0 + 2.0 * i as f64 / n as f64;
        let c = stable_count(a);
        if c != prev {
            scan_alpha = a;
            break;
        }
        prev = c;
    }
    assert!(scan_alpha.is_finite(), "no transition found by scan");

    let t = find_critical_threshold(cusp.as_ref(), (-1.0, 1.0)).unwrap();
    assert!(
        (t.alpha_c - scan_alpha).abs() <= 2.0 / n as f64 + 1e-9,
        "bisection {} vs scan {}",
        t.alpha_c,
        scan_alpha
    );

    // The symmetric cusp opens two stable branches at once; displacement
    // still scales as the square root.
    let m = foldtail::potentials::branch_exponent_estimate(
        cusp.as_ref(),
        t.alpha_c,
        Side::Above,
    )
    .unwrap();
    assert!((m - 0.5).abs() < 0.02, "exponent {m}");
}

#[test]
fn cusp_fold_line_matches_discriminant_zero() {
    // Cusp with a = -1 fixed and b = alpha: the gradient x^3 - x + alpha
    // loses two of its three roots where the cubic discriminant
    // 4 - 27 alpha^2 vanishes, i.e. at alpha = 2 / (3 sqrt 3).
    let cusp = build_potential("cusp", &[-1.0, 0.0, 0.0, 1.0], (0.0, 1.0)).unwrap();
    let below = find_equilibria(cusp.as_ref(), 0.1).unwrap();
    let above = find_equilibria(cusp.as_ref(), 0.9).unwrap();
    assert_eq!(below.len(), 3);
    assert_eq!(above.len(), 1);
    let t = find_critical_threshold(cusp.as_ref(), (0.0, 1.0)).unwrap();
    let exact = 2.0 / (3.0 * 3.0f64.sqrt());
    assert!(
        (t.alpha_c - exact).abs() <= 1e-6,
        "alpha_c {} vs {exact}",
        t.alpha_c
    );
}
