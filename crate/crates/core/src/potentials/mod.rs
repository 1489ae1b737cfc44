//! Polynomial potential families and their equilibrium structure.
//!
//! A potential is a polynomial in the state `x` whose coefficients depend
//! affinely on the control parameter `alpha`. Equilibria are roots of
//! `dV/dx`; their stability is the sign of `d^2V/dx^2`. As `alpha` moves, the
//! stable-equilibrium count changes at critical thresholds, and the new
//! branch born at a threshold separates from it like a power of the distance
//! to the threshold — the branch exponent measured here.
//!
//! Forms register by name (see [`FORM_REGISTRY`]) so configuration can pick
//! them at runtime; every form only has to expose its polynomial at a given
//! `alpha`.

mod forms;

pub use forms::{Cusp, CustomPolynomial, Fold};

use crate::poly::{real_roots, Polynomial};
use thiserror::Error;

/// Residual tolerance for accepted equilibria: `|dV/dx| <= ROOT_TOL * (1 + |x|)`.
pub const ROOT_TOL: f64 = 1e-10;
/// Dead band for stability classification on `d^2V/dx^2`.
pub const HESS_TOL: f64 = 1e-8;
/// Relative bracket width at which threshold bisection stops.
pub const BRACKET_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PotentialError {
    #[error("unknown potential form `{name}`")]
    UnknownForm { name: String },
    #[error("form `{form}` expects {expected} coefficients, got {got}")]
    BadCoefficientCount {
        form: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("polynomial degree {degree} outside supported range 2..=6")]
    DegreeOutOfRange { degree: usize },
    #[error("leading coefficient vanishes at alpha = {alpha}")]
    LeadingCoefficientVanishes { alpha: f64 },
    #[error("alpha range ({lo}, {hi}) is not a finite increasing interval")]
    BadAlphaRange { lo: f64, hi: f64 },
    #[error("derivative leading coefficient degenerate at alpha = {alpha}")]
    DegenerateLeadingCoefficient { alpha: f64 },
    #[error("stable-equilibrium count identical at both ends of the alpha range")]
    NoTransitionInRange,
    #[error("no displaced equilibrium branch on the {side:?} side")]
    NoBranchOnSide { side: Side },
}

/// Which derivative of the potential to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    Value,
    First,
    Second,
}

/// A potential family member: a polynomial in `x` for every `alpha`.
pub trait Potential: Send + Sync {
    fn form_name(&self) -> &'static str;

    /// Declared parameter interval; construction guarantees the leading
    /// coefficient is nonzero at both ends and the midpoint.
    fn alpha_range(&self) -> (f64, f64);

    /// Degree of the family, independent of any particular `alpha`.
    fn nominal_degree(&self) -> usize;

    /// Coefficients of `V(.; alpha)`, ascending powers of `x`.
    fn poly_at(&self, alpha: f64) -> Polynomial;

    /// `V`, `dV/dx`, or `d^2V/dx^2` at `(x, alpha)`. Exact polynomial
    /// arithmetic, Horner order fixed highest-degree-first.
    fn evaluate(&self, x: f64, alpha: f64, order: DerivativeOrder) -> f64 {
        let mut p = self.poly_at(alpha);
        if matches!(order, DerivativeOrder::First | DerivativeOrder::Second) {
            p = p.derivative();
        }
        if matches!(order, DerivativeOrder::Second) {
            p = p.derivative();
        }
        p.eval(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Degenerate,
}

impl Stability {
    pub fn label(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Equilibrium {
    pub location: f64,
    pub stability: Stability,
}

/// All equilibria of `V(.; alpha)`, locations strictly increasing.
#[derive(Debug, Clone)]
pub struct EquilibriumSet {
    pub alpha: f64,
    pub equilibria: Vec<Equilibrium>,
}

impl EquilibriumSet {
    pub fn len(&self) -> usize {
        self.equilibria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equilibria.is_empty()
    }

    pub fn stable_count(&self) -> usize {
        self.equilibria
            .iter()
            .filter(|e| e.stability == Stability::Stable)
            .count()
    }

    pub fn locations(&self) -> impl Iterator<Item = f64> + '_ {
        self.equilibria.iter().map(|e| e.location)
    }
}

/// A bisection-located critical threshold with its final bracket.
#[derive(Debug, Clone, Copy)]
pub struct CriticalThreshold {
    pub alpha_c: f64,
    pub bracket: (f64, f64),
}

/// Side of a threshold on the `alpha` axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

/// Equilibria of `V(.; alpha)`: real roots of the derivative, classified by
/// the sign of the second derivative within [`HESS_TOL`].
pub fn find_equilibria(
    model: &dyn Potential,
    alpha: f64,
) -> Result<EquilibriumSet, PotentialError> {
    let v = model.poly_at(alpha);
    if v.degree() < model.nominal_degree()
        || v.leading().abs() <= 1e-14 * v.max_coeff_magnitude()
    {
        return Err(PotentialError::DegenerateLeadingCoefficient { alpha });
    }
    let dv = v.derivative();
    let ddv = dv.derivative();
    let equilibria = real_roots(&dv)
        .into_iter()
        .map(|location| {
            let h = ddv.eval(location);
            let stability = if h > HESS_TOL {
                Stability::Stable
            } else if h < -HESS_TOL {
                Stability::Unstable
            } else {
                Stability::Degenerate
            };
            Equilibrium {
                location,
                stability,
            }
        })
        .collect();
    Ok(EquilibriumSet { alpha, equilibria })
}

/// Bisection on the stable-equilibrium count over `alpha_range`, stopping at
/// bracket width `BRACKET_TOL * (1 + |alpha_c|)`.
pub fn find_critical_threshold(
    model: &dyn Potential,
    alpha_range: (f64, f64),
) -> Result<CriticalThreshold, PotentialError> {
    let (mut lo, mut hi) = alpha_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(PotentialError::BadAlphaRange { lo, hi });
    }
    let stable_count =
        |a: f64| -> Result<usize, PotentialError> { Ok(find_equilibria(model, a)?.stable_count()) };
    let count_lo = stable_count(lo)?;
    if count_lo == stable_count(hi)? {
        return Err(PotentialError::NoTransitionInRange);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BRACKET_TOL * (1.0 + mid.abs()) {
            break;
        }
        if stable_count(mid)? == count_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalThreshold {
        alpha_c: 0.5 * (lo + hi),
        bracket: (lo, hi),
    })
}

/// Log-log regression estimate of the exponent with which the newborn
/// equilibrium branch separates from the threshold configuration.
///
/// Eight geometric offsets in `[1e-6, 1e-3]` on the requested side; the
/// branch displacement at each offset is the largest distance from any
/// equilibrium there to its nearest equilibrium at `alpha_c`, which isolates
/// the new branch from ones that persist through the threshold.
pub fn branch_exponent_estimate(
    model: &dyn Potential,
    alpha_c: f64,
    side: Side,
) -> Result<f64, PotentialError> {
    let reference = find_equilibria(model, alpha_c)?;
    if reference.is_empty() {
        return Err(PotentialError::NoBranchOnSide { side });
    }
    let sign = match side {
        Side::Above => 1.0,
        Side::Below => -1.0,
    };
    let mut log_offset = Vec::with_capacity(8);
    let mut log_disp = Vec::with_capacity(8);
    for i in 0..8 {
        let delta = 1e-6 * 1e3f64.powf(i as f64 / 7.0);
        let set = find_equilibria(model, alpha_c + sign * delta)?;
        if set.is_empty() {
            return Err(PotentialError::NoBranchOnSide { side });
        }
        let displacement = set
            .locations()
            .map(|z| {
                reference
                    .locations()
                    .map(|w| (z - w).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        if displacement <= 1e-12 {
            return Err(PotentialError::NoBranchOnSide { side });
        }
        log_offset.push(delta.ln());
        log_disp.push(displacement.ln());
    }
    Ok(regression_slope(&log_offset, &log_disp))
}

fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    num / den
}

/// Constructor signature shared by every registered form.
pub type PotentialBuilder =
    fn(&[f64], (f64, f64)) -> Result<Box<dyn Potential>, PotentialError>;

/// Potential forms selectable by name at runtime.
pub const FORM_REGISTRY: &[(&str, PotentialBuilder)] = &[
    ("fold", forms::build_fold),
    ("cusp", forms::build_cusp),
    ("custom_polynomial", forms::build_custom_polynomial),
];

pub fn form_names() -> Vec<&'static str> {
    FORM_REGISTRY.iter().map(|(n, _)| *n).collect()
}

/// Build a registered form from its coefficient list and alpha range.
pub fn build_potential(
    form: &str,
    coefficients: &[f64],
    alpha_range: (f64, f64),
) -> Result<Box<dyn Potential>, PotentialError> {
    let builder = FORM_REGISTRY
        .iter()
        .find(|(name, _)| *name == form)
        .map(|(_, b)| b)
        .ok_or_else(|| PotentialError::UnknownForm {
            name: form.to_string(),
        })?;
    builder(coefficients, alpha_range)
}
