//! Parameter distributions and the deterministic Monte Carlo sampler.
//!
//! Sampling is inverse-CDF only: draw `u ~ (0,1)` from the counter-based
//! stream keyed by `(seed, index)`, map it through the family quantile, feed
//! the parameter to the loss pipeline. Because every array slot depends only
//! on `(seed, index)`, batches are bitwise reproducible regardless of thread
//! count or evaluation order.

mod families;
pub mod rng;

pub use families::{
    build_distribution, family_names, DistributionBuilder, Exponential, Pareto,
    TruncatedNormal, Uniform, FAMILY_REGISTRY,
};

use crate::jumpmap::{self, BranchSpec, LossMap};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error("unknown distribution family `{name}`")]
    UnknownFamily { name: String },
    #[error("family `{family}` is missing parameter `{name}`")]
    MissingParameter {
        family: &'static str,
        name: &'static str,
    },
    #[error("family `{family}` does not take parameter `{name}`")]
    UnknownParameter { family: &'static str, name: String },
    #[error("family `{family}`: {message}")]
    InvalidParameter {
        family: &'static str,
        message: String,
    },
    #[error("quantile argument q = {q} outside the open interval (0, 1)")]
    OutOfRange { q: f64 },
    #[error("no probability mass at or above the threshold alpha_c = {alpha_c}")]
    NoThresholdMass { alpha_c: f64 },
    #[error("requested an empty batch")]
    EmptyBatch,
}

/// A parameter law with closed-form CDF, quantile, and density.
pub trait AlphaDistribution: Send + Sync {
    fn family_name(&self) -> &'static str;

    /// Support interval; the upper end may be `+inf`.
    fn support(&self) -> (f64, f64);

    /// Right-continuous CDF, clamped to `[0, 1]`.
    fn cdf(&self, a: f64) -> f64;

    fn density(&self, a: f64) -> f64;

    /// Inverse CDF for `q` strictly inside `(0, 1)`.
    fn quantile_unchecked(&self, q: f64) -> f64;

    /// Pareto tail index when the family has a regularly varying upper tail.
    fn pareto_tail_index(&self) -> Option<f64> {
        None
    }

    /// Validated inverse CDF.
    fn quantile(&self, q: f64) -> Result<f64, SamplingError> {
        if q.is_nan() || q <= 0.0 || q >= 1.0 {
            return Err(SamplingError::OutOfRange { q });
        }
        Ok(self.quantile_unchecked(q))
    }

    /// `Pr(alpha > threshold)`, the exact complement of the CDF.
    fn exceedance_probability(&self, threshold: f64) -> f64 {
        1.0 - self.cdf(threshold)
    }
}

/// A reproducible Monte Carlo draw: `losses[i]` is exactly the loss pipeline
/// applied to `alphas[i]`, and `alphas[i]` depends only on `(seed, i)`.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub losses: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }
}

/// Draw `n` parameters and push each through the loss pipeline.
///
/// Refuses distributions that place no mass at or above the threshold, since
/// such a scenario can never exceed the baseline.
pub fn sample_losses(
    dist: &dyn AlphaDistribution,
    spec: &BranchSpec,
    map: &LossMap,
    n: u64,
    seed: u64,
) -> Result<SampleBatch, SamplingError> {
    if n == 0 {
        return Err(SamplingError::EmptyBatch);
    }
    if !(dist.exceedance_probability(spec.alpha_c) > 0.0) {
        return Err(SamplingError::NoThresholdMass {
            alpha_c: spec.alpha_c,
        });
    }
    let (alphas, losses) = (0..n)
        .into_par_iter()
        .map(|i| {
            let alpha = dist.quantile_unchecked(rng::unit_uniform(seed, i));
            (alpha, jumpmap::loss(spec, map, alpha))
        })
        .unzip();
    Ok(SampleBatch {
        seed,
        alphas,
        losses,
    })
}
