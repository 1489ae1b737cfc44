//! The registered parameter-distribution families.
//!
//! Every family exposes closed-form CDF, quantile, and density. Sampling is
//! inverse-CDF only, so the quantile function is the single source of
//! randomness-to-parameter mapping.

use super::{AlphaDistribution, SamplingError};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use std::collections::BTreeMap;

fn require_finite(family: &'static str, name: &'static str, value: f64) -> Result<f64, SamplingError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(SamplingError::InvalidParameter {
            family,
            message: format!("{name} = {value} must be finite"),
        })
    }
}

/// Uniform on `[lo, hi)`.
#[derive(Debug, Clone)]
pub struct Uniform {
    lo: f64,
    hi: f64,
}

impl Uniform {
    pub fn new(lo: f64, hi: f64) -> Result<Self, SamplingError> {
        require_finite("uniform", "lo", lo)?;
        require_finite("uniform", "hi", hi)?;
        if !(lo < hi) {
            return Err(SamplingError::InvalidParameter {
                family: "uniform",
                message: format!("requires lo < hi, got ({lo}, {hi})"),
            });
        }
        Ok(Uniform { lo, hi })
    }
}

impl AlphaDistribution for Uniform {
    fn family_name(&self) -> &'static str {
        "uniform"
    }

    fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn cdf(&self, a: f64) -> f64 {
        ((a - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    fn density(&self, a: f64) -> f64 {
        if a >= self.lo && a <= self.hi {
            1.0 / (self.hi - self.lo)
        } else {
            0.0
        }
    }

    fn quantile_unchecked(&self, q: f64) -> f64 {
        self.lo + q * (self.hi - self.lo)
    }
}

/// Normal(mu, sigma) conditioned on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct TruncatedNormal {
    mu: f64,
    sigma: f64,
    lo: f64,
    hi: f64,
    std: Normal,
    phi_lo: f64,
    phi_hi: f64,
}

impl TruncatedNormal {
    pub fn new(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self, SamplingError> {
        for (name, value) in [("mu", mu), ("sigma", sigma), ("lo", lo), ("hi", hi)] {
            require_finite("truncated_normal", name, value)?;
        }
        if !(sigma > 0.0) {
            return Err(SamplingError::InvalidParameter {
                family: "truncated_normal",
                message: format!("sigma = {sigma} must be positive"),
            });
        }
        if !(lo < hi) {
            return Err(SamplingError::InvalidParameter {
                family: "truncated_normal",
                message: format!("requires lo < hi, got ({lo}, {hi})"),
            });
        }
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        let phi_lo = std.cdf((lo - mu) / sigma);
        let phi_hi = std.cdf((hi - mu) / sigma);
        if !(phi_hi - phi_lo > 0.0) {
            return Err(SamplingError::InvalidParameter {
                family: "truncated_normal",
                message: "truncation window carries no probability mass".into(),
            });
        }
        Ok(TruncatedNormal {
            mu,
            sigma,
            lo,
            hi,
            std,
            phi_lo,
            phi_hi,
        })
    }
}

impl AlphaDistribution for TruncatedNormal {
    fn family_name(&self) -> &'static str {
        "truncated_normal"
    }

    fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn cdf(&self, a: f64) -> f64 {
        if a <= self.lo {
            return 0.0;
        }
        if a >= self.hi {
            return 1.0;
        }
        let z = (a - self.mu) / self.sigma;
        ((self.std.cdf(z) - self.phi_lo) / (self.phi_hi - self.phi_lo)).clamp(0.0, 1.0)
    }

    fn density(&self, a: f64) -> f64 {
        if a < self.lo || a > self.hi {
            return 0.0;
        }
        let z = (a - self.mu) / self.sigma;
        self.std.pdf(z) / (self.sigma * (self.phi_hi - self.phi_lo))
    }

    fn quantile_unchecked(&self, q: f64) -> f64 {
        let target = self.phi_lo + q * (self.phi_hi - self.phi_lo);
        let mut z = self.std.inverse_cdf(target);
        // Two Newton corrections push the inverse to machine precision so
        // the quantile/CDF round trip holds to 1e-10 inside the support.
        for _ in 0..2 {
            let err = self.std.cdf(z) - target;
            let slope = self.std.pdf(z);
            if slope <= f64::MIN_POSITIVE || !err.is_finite() {
                break;
            }
            let step = err / slope;
            z -= step;
            if step.abs() <= 1e-16 * (1.0 + z.abs()) {
                break;
            }
        }
        (self.mu + self.sigma * z).clamp(self.lo, self.hi)
    }
}

/// Exponential with the given rate, shifted to start at `shift`.
#[derive(Debug, Clone)]
pub struct Exponential {
    rate: f64,
    shift: f64,
}

impl Exponential {
    pub fn new(rate: f64, shift: f64) -> Result<Self, SamplingError> {
        require_finite("exponential", "rate", rate)?;
        require_finite("exponential", "shift", shift)?;
        if !(rate > 0.0) {
            return Err(SamplingError::InvalidParameter {
                family: "exponential",
                message: format!("rate = {rate} must be positive"),
            });
        }
        Ok(Exponential { rate, shift })
    }
}

impl AlphaDistribution for Exponential {
    fn family_name(&self) -> &'static str {
        "exponential"
    }

    fn support(&self) -> (f64, f64) {
        (self.shift, f64::INFINITY)
    }

    fn cdf(&self, a: f64) -> f64 {
        if a <= self.shift {
            0.0
        } else {
            -(-self.rate * (a - self.shift)).exp_m1()
        }
    }

    fn density(&self, a: f64) -> f64 {
        if a < self.shift {
            0.0
        } else {
            self.rate * (-self.rate * (a - self.shift)).exp()
        }
    }

    fn quantile_unchecked(&self, q: f64) -> f64 {
        self.shift - (1.0 - q).ln() / self.rate
    }
}

/// Pareto with scale `x_m`, tail index `a`, shifted so the support starts at
/// `shift + scale`. Survival `((a - shift)/scale)^(-tail_index)` above that.
#[derive(Debug, Clone)]
pub struct Pareto {
    scale: f64,
    tail_index: f64,
    shift: f64,
}

impl Pareto {
    pub fn new(scale: f64, tail_index: f64, shift: f64) -> Result<Self, SamplingError> {
        require_finite("pareto", "scale", scale)?;
        require_finite("pareto", "tail_index", tail_index)?;
        require_finite("pareto", "shift", shift)?;
        if !(scale > 0.0) {
            return Err(SamplingError::InvalidParameter {
                family: "pareto",
                message: format!("scale = {scale} must be positive"),
            });
        }
        if !(tail_index > 0.0) {
            return Err(SamplingError::InvalidParameter {
                family: "pareto",
                message: format!("tail_index = {tail_index} must be positive"),
            });
        }
        Ok(Pareto {
            scale,
            tail_index,
            shift,
        })
    }
}

impl AlphaDistribution for Pareto {
    fn family_name(&self) -> &'static str {
        "pareto"
    }

    fn support(&self) -> (f64, f64) {
        (self.shift + self.scale, f64::INFINITY)
    }

    fn cdf(&self, a: f64) -> f64 {
        let start = self.shift + self.scale;
        if a <= start {
            0.0
        } else {
            1.0 - (self.scale / (a - self.shift)).powf(self.tail_index)
        }
    }

    fn density(&self, a: f64) -> f64 {
        let start = self.shift + self.scale;
        if a < start {
            0.0
        } else {
            self.tail_index * self.scale.powf(self.tail_index)
                / (a - self.shift).powf(self.tail_index + 1.0)
        }
    }

    fn quantile_unchecked(&self, q: f64) -> f64 {
        self.shift + self.scale * (1.0 - q).powf(-1.0 / self.tail_index)
    }

    fn pareto_tail_index(&self) -> Option<f64> {
        Some(self.tail_index)
    }
}

type Params = BTreeMap<String, f64>;

fn take(
    params: &Params,
    family: &'static str,
    name: &'static str,
) -> Result<f64, SamplingError> {
    params
        .get(name)
        .copied()
        .ok_or(SamplingError::MissingParameter { family, name })
}

fn reject_unknown(
    params: &Params,
    family: &'static str,
    known: &[&str],
) -> Result<(), SamplingError> {
    for key in params.keys() {
        if !known.contains(&key.as_str()) {
            return Err(SamplingError::UnknownParameter {
                family,
                name: key.clone(),
            });
        }
    }
    Ok(())
}

fn build_uniform(params: &Params) -> Result<Box<dyn AlphaDistribution>, SamplingError> {
    reject_unknown(params, "uniform", &["lo", "hi"])?;
    Ok(Box::new(Uniform::new(
        take(params, "uniform", "lo")?,
        take(params, "uniform", "hi")?,
    )?))
}

fn build_truncated_normal(params: &Params) -> Result<Box<dyn AlphaDistribution>, SamplingError> {
    reject_unknown(params, "truncated_normal", &["mu", "sigma", "lo", "hi"])?;
    Ok(Box::new(TruncatedNormal::new(
        take(params, "truncated_normal", "mu")?,
        take(params, "truncated_normal", "sigma")?,
        take(params, "truncated_normal", "lo")?,
        take(params, "truncated_normal", "hi")?,
    )?))
}

fn build_exponential(params: &Params) -> Result<Box<dyn AlphaDistribution>, SamplingError> {
    reject_unknown(params, "exponential", &["rate", "shift"])?;
    Ok(Box::new(Exponential::new(
        take(params, "exponential", "rate")?,
        take(params, "exponential", "shift")?,
    )?))
}

fn build_pareto(params: &Params) -> Result<Box<dyn AlphaDistribution>, SamplingError> {
    reject_unknown(params, "pareto", &["scale", "tail_index", "shift"])?;
    Ok(Box::new(Pareto::new(
        take(params, "pareto", "scale")?,
        take(params, "pareto", "tail_index")?,
        take(params, "pareto", "shift")?,
    )?))
}

/// Constructor signature shared by every registered family.
pub type DistributionBuilder =
    fn(&Params) -> Result<Box<dyn AlphaDistribution>, SamplingError>;

/// Parameter-distribution families selectable by name at runtime.
pub const FAMILY_REGISTRY: &[(&str, DistributionBuilder)] = &[
    ("uniform", build_uniform),
    ("truncated_normal", build_truncated_normal),
    ("exponential", build_exponential),
    ("pareto", build_pareto),
];

pub fn family_names() -> Vec<&'static str> {
    FAMILY_REGISTRY.iter().map(|(n, _)| *n).collect()
}

/// Build a registered family from named parameters.
pub fn build_distribution(
    family: &str,
    params: &Params,
) -> Result<Box<dyn AlphaDistribution>, SamplingError> {
    let builder = FAMILY_REGISTRY
        .iter()
        .find(|(name, _)| *name == family)
        .map(|(_, b)| b)
        .ok_or_else(|| SamplingError::UnknownFamily {
            name: family.to_string(),
        })?;
    builder(params)
}
