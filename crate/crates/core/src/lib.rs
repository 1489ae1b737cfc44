//! Threshold-crossing tail-risk laboratory.
//!
//! A scalar system sits in a stable equilibrium of a polynomial potential
//! `V(x; alpha)` whose shape is controlled by a parameter `alpha`. When
//! `alpha` crosses a critical value the equilibrium is destroyed and the
//! state jumps to a new branch; a loss map turns the post-jump displacement
//! into a nonnegative loss. Randomness in `alpha` then produces a loss
//! distribution whose upper tail is generically power-law, and the modules
//! here close the loop between the mechanism and the measured tail:
//!
//! * [`potentials`] — polynomial potential families, equilibria, critical
//!   thresholds, and branch-exponent measurement.
//! * [`jumpmap`] — post-crossing branch scaling, the loss map, its exact
//!   inversion, and the predicted tail index.
//! * [`sampling`] — parameter distributions and a counter-based, order- and
//!   parallelism-independent Monte Carlo sampler.
//! * [`evt`] — peaks-over-threshold machinery: GPD fits (profile-likelihood
//!   MLE and probability-weighted moments), Hill estimator, mean-excess
//!   diagnostics.
//! * [`verify`] — sample-level checks that the simulated losses obey the
//!   exact event identities and that fitted tails match predicted ones.
//!
//! Potential forms, parameter-distribution families, and GPD estimators are
//! all trait objects registered by name, so configuration files select them
//! at runtime and new variants slot in without touching the pipeline.

pub mod evt;
pub mod jumpmap;
pub mod poly;
pub mod potentials;
pub mod sampling;
pub mod verify;

pub use jumpmap::{BranchMode, BranchSpec, LossMap, Regime, TailPrediction};
pub use potentials::{CriticalThreshold, Equilibrium, EquilibriumSet, Potential, Stability};
pub use sampling::{AlphaDistribution, SampleBatch};
