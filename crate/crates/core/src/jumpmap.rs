//! Post-crossing branch scaling, the loss map, and the predicted tail index.
//!
//! Past the threshold the displacement of interest scales like a power of
//! the overshoot `alpha - alpha_c`:
//!
//! * `Bounded`   — `x = C (alpha - alpha_c)^m`, a branch growing from zero;
//! * `Divergent` — `x = C (alpha - alpha_c)^(-m)`, a response blowing up as
//!   the threshold is approached from above.
//!
//! The loss map `g(x) = |x|^p` turns the displacement into a loss, so above
//! the threshold `loss = C^p (alpha - alpha_c)^(+/- m p)`. Because the map
//! is strictly monotone in the overshoot, `{loss > y}` is exactly an event
//! about `alpha` with boundary offset `eta(y)`:
//!
//! * `Bounded`:   `{loss > y} = {alpha > alpha_c + eta(y)}`, with
//!   `eta(y) = (y / C^p)^(1/(m p))`;
//! * `Divergent`: `{loss > y} = {alpha_c < alpha < alpha_c + eta(y)}`, with
//!   `eta(y) = (C^p / y)^(1/(m p))`.
//!
//! That identity is what [`crate::verify`] checks sample-by-sample, and it
//! pins the tail index of the loss distribution before any fitting happens:
//! a divergent branch fed by finite parameter density at the threshold gives
//! shape `xi = m p`; a bounded branch fed by a Pareto parameter tail of
//! index `a` gives `xi = m p / a`.

use crate::sampling::AlphaDistribution;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum JumpError {
    #[error("branch parameter {name} = {value} must be positive and finite")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("alpha = {alpha} is not above the threshold alpha_c = {alpha_c}")]
    BelowThreshold { alpha: f64, alpha_c: f64 },
    #[error("loss level y = {y} is not above the baseline {baseline}")]
    NotInvertible { y: f64, baseline: f64 },
    #[error("no heavy-tail regime: {reason}")]
    NoHeavyTailRegime { reason: &'static str },
}

/// Direction of the post-crossing branch in the overshoot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchMode {
    /// `x = C (alpha - alpha_c)^(-m)`: singular at the threshold.
    Divergent,
    /// `x = C (alpha - alpha_c)^(+m)`: grows from zero.
    Bounded,
}

impl BranchMode {
    pub fn from_name(name: &str) -> Option<BranchMode> {
        match name {
            "divergent" => Some(BranchMode::Divergent),
            "bounded" => Some(BranchMode::Bounded),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BranchMode::Divergent => "divergent",
            BranchMode::Bounded => "bounded",
        }
    }
}

/// Branch scaling `x = amplitude * (alpha - alpha_c)^(+/- exponent)`.
#[derive(Debug, Clone, Copy)]
pub struct BranchSpec {
    pub mode: BranchMode,
    /// Scaling exponent `m > 0`.
    pub exponent: f64,
    /// Prefactor `C > 0`.
    pub amplitude: f64,
    pub alpha_c: f64,
}

impl BranchSpec {
    pub fn new(
        mode: BranchMode,
        exponent: f64,
        amplitude: f64,
        alpha_c: f64,
    ) -> Result<Self, JumpError> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(JumpError::InvalidParameter {
                name: "m",
                value: exponent,
            });
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(JumpError::InvalidParameter {
                name: "c",
                value: amplitude,
            });
        }
        if !alpha_c.is_finite() {
            return Err(JumpError::InvalidParameter {
                name: "alpha_c",
                value: alpha_c,
            });
        }
        Ok(BranchSpec {
            mode,
            exponent,
            amplitude,
            alpha_c,
        })
    }
}

/// Loss map `g(x) = |x|^p` plus the sub-threshold baseline.
#[derive(Debug, Clone, Copy)]
pub struct LossMap {
    /// Loss exponent `p > 0`.
    pub exponent: f64,
    /// Loss reported below the threshold; defaults to zero.
    pub baseline: f64,
}

impl LossMap {
    pub fn new(exponent: f64, baseline: f64) -> Result<Self, JumpError> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(JumpError::InvalidParameter {
                name: "p",
                value: exponent,
            });
        }
        if !(baseline.is_finite() && baseline >= 0.0) {
            return Err(JumpError::InvalidParameter {
                name: "baseline",
                value: baseline,
            });
        }
        Ok(LossMap { exponent, baseline })
    }

    pub fn apply(&self, x: f64) -> f64 {
        x.abs().powf(self.exponent)
    }
}

/// Branch displacement strictly above the threshold.
pub fn branch_value(spec: &BranchSpec, alpha: f64) -> Result<f64, JumpError> {
    let overshoot = alpha - spec.alpha_c;
    if !(overshoot > 0.0) {
        return Err(JumpError::BelowThreshold {
            alpha,
            alpha_c: spec.alpha_c,
        });
    }
    let power = match spec.mode {
        BranchMode::Divergent => -spec.exponent,
        BranchMode::Bounded => spec.exponent,
    };
    Ok(spec.amplitude * overshoot.powf(power))
}

/// Total loss pipeline: baseline below the threshold, `g(branch)` above.
///
/// Exactly at the threshold the bounded branch starts from zero, so the loss
/// merges with the baseline; the divergent branch is singular there and the
/// loss is reported as `+inf`.
pub fn loss(spec: &BranchSpec, map: &LossMap, alpha: f64) -> f64 {
    let overshoot = alpha - spec.alpha_c;
    if overshoot < 0.0 {
        return map.baseline;
    }
    if overshoot == 0.0 {
        return match spec.mode {
            BranchMode::Bounded => map.baseline,
            BranchMode::Divergent => f64::INFINITY,
        };
    }
    let x = spec.amplitude * overshoot.powf(match spec.mode {
        BranchMode::Divergent => -spec.exponent,
        BranchMode::Bounded => spec.exponent,
    });
    map.apply(x)
}

/// Overshoot at which the loss crosses level `y`: the exact inverse of the
/// above-threshold loss curve. Requires `y > baseline` and `y > 0`.
pub fn eta(spec: &BranchSpec, map: &LossMap, y: f64) -> Result<f64, JumpError> {
    if !(y > map.baseline) || !(y > 0.0) || !y.is_finite() {
        return Err(JumpError::NotInvertible {
            y,
            baseline: map.baseline,
        });
    }
    let cp = spec.amplitude.powf(map.exponent);
    let inv_mp = 1.0 / (spec.exponent * map.exponent);
    Ok(match spec.mode {
        BranchMode::Divergent => (cp / y).powf(inv_mp),
        BranchMode::Bounded => (y / cp).powf(inv_mp),
    })
}

/// Which mechanism produces the heavy loss tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Divergent branch sampled with finite positive parameter density at
    /// the threshold: the tail comes from near-threshold fluctuations.
    FluctuationDriven,
    /// Bounded branch driven by a Pareto parameter tail: the loss inherits
    /// (a rescaling of) the parameter tail.
    ParameterTailDriven,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::FluctuationDriven => "fluctuation_driven",
            Regime::ParameterTailDriven => "parameter_tail_driven",
        }
    }
}

/// Predicted generalized-Pareto shape of the loss tail.
#[derive(Debug, Clone, Copy)]
pub struct TailPrediction {
    pub xi_predicted: f64,
    pub regime: Regime,
    /// The product `m * p` the prediction is built from.
    pub exponent_product: f64,
}

/// Tail index implied by the branch geometry and the parameter law.
pub fn predict_tail(
    spec: &BranchSpec,
    map: &LossMap,
    dist: &dyn AlphaDistribution,
) -> Result<TailPrediction, JumpError> {
    let mp = spec.exponent * map.exponent;
    match spec.mode {
        BranchMode::Divergent => {
            let density = dist.density(spec.alpha_c);
            let mass_above = dist.exceedance_probability(spec.alpha_c);
            if density > 0.0 && density.is_finite() && mass_above > 0.0 {
                Ok(TailPrediction {
                    xi_predicted: mp,
                    regime: Regime::FluctuationDriven,
                    exponent_product: mp,
                })
            } else {
                Err(JumpError::NoHeavyTailRegime {
                    reason: "divergent branch needs positive finite parameter density at the threshold",
                })
            }
        }
        BranchMode::Bounded => match dist.pareto_tail_index() {
            Some(a) => Ok(TailPrediction {
                xi_predicted: mp / a,
                regime: Regime::ParameterTailDriven,
                exponent_product: mp,
            }),
            None => Err(JumpError::NoHeavyTailRegime {
                reason: "bounded branch needs a Pareto parameter tail",
            }),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{Pareto, Uniform};

    fn spec(mode: BranchMode, m: f64, c: f64, alpha_c: f64) -> BranchSpec {
        BranchSpec::new(mode, m, c, alpha_c).unwrap()
    }

    #[test]
    fn branch_values() {
        let div = spec(BranchMode::Divergent, 0.5, 2.0, 1.0);
        assert_eq!(branch_value(&div, 5.0).unwrap(), 1.0);
        let bnd = spec(BranchMode::Bounded, 0.5, 2.0, 1.0);
        assert_eq!(branch_value(&bnd, 5.0).unwrap(), 4.0);
    }

    #[test]
    fn branch_below_threshold_errors() {
        let div = spec(BranchMode::Divergent, 0.5, 2.0, 1.0);
        assert!(matches!(
            branch_value(&div, 1.0),
            Err(JumpError::BelowThreshold { .. })
        ));
        assert!(branch_value(&div, 0.0).is_err());
    }

    #[test]
    fn loss_pipeline_values() {
        let map = LossMap::new(2.0, 0.0).unwrap();
        let bnd = spec(BranchMode::Bounded, 0.5, 1.0, 0.0);
        assert_eq!(loss(&bnd, &map, -1.0), 0.0);
        assert_eq!(loss(&bnd, &map, 0.0), 0.0);
        assert!((loss(&bnd, &map, 4.0) - 4.0).abs() < 1e-12);

        let div = spec(BranchMode::Divergent, 0.5, 1.0, 0.0);
        assert_eq!(loss(&div, &map, 0.0), f64::INFINITY);
        assert!((loss(&div, &map, 0.25) - 4.0).abs() < 1e-12);

        let shifted = LossMap::new(2.0, 0.75).unwrap();
        assert_eq!(loss(&bnd, &shifted, -3.0), 0.75);
    }

    #[test]
    fn eta_inverts_loss() {
        let map = LossMap::new(2.0, 0.0).unwrap();
        for mode in [BranchMode::Divergent, BranchMode::Bounded] {
            let s = spec(mode, 0.5, 1.5, 0.3);
            for y in [0.1, 1.0, 7.5, 400.0] {
                let h = eta(&s, &map, y).unwrap();
                let roundtrip = loss(&s, &map, s.alpha_c + h);
                assert!(
                    (roundtrip - y).abs() <= 1e-9 * y,
                    "mode {mode:?}, y {y}: roundtrip {roundtrip}"
                );
            }
        }
    }

    #[test]
    fn eta_rejects_non_invertible_levels() {
        let map = LossMap::new(2.0, 0.5).unwrap();
        let s = spec(BranchMode::Bounded, 0.5, 1.0, 0.0);
        assert!(matches!(
            eta(&s, &map, 0.5),
            Err(JumpError::NotInvertible { .. })
        ));
        assert!(eta(&s, &map, 0.0).is_err());
    }

    #[test]
    fn tail_prediction_regimes() {
        let map = LossMap::new(2.0, 0.0).unwrap();
        let uniform = Uniform::new(0.0, 1.0).unwrap();

        let div = spec(BranchMode::Divergent, 0.5, 1.0, 0.0);
        let t = predict_tail(&div, &map, &uniform).unwrap();
        assert_eq!(t.regime, Regime::FluctuationDriven);
        assert_eq!(t.xi_predicted, 1.0);
        assert_eq!(t.exponent_product, 1.0);

        let bnd = spec(BranchMode::Bounded, 0.5, 1.0, 0.0);
        let pareto = Pareto::new(1.0, 2.0, 0.0).unwrap();
        let t = predict_tail(&bnd, &map, &pareto).unwrap();
        assert_eq!(t.regime, Regime::ParameterTailDriven);
        assert_eq!(t.xi_predicted, 0.5);

        assert!(matches!(
            predict_tail(&bnd, &map, &uniform),
            Err(JumpError::NoHeavyTailRegime { .. })
        ));
    }

    #[test]
    fn divergent_needs_mass_at_threshold() {
        let map = LossMap::new(1.0, 0.0).unwrap();
        // Threshold at the top of the support: no mass above it.
        let div = spec(BranchMode::Divergent, 1.0, 1.0, 1.0);
        let uniform = Uniform::new(0.0, 1.0).unwrap();
        assert!(predict_tail(&div, &map, &uniform).is_err());
    }
}
