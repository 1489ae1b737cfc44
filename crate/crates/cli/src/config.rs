//! Scenario configuration: a five-section JSON document validated as a
//! whole. Problems are collected across every section and reported together,
//! so a config with a bad exponent *and* a missing sample count names both.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use foldtail::jumpmap::{BranchMode, BranchSpec, LossMap};
use foldtail::potentials::{
    branch_exponent_estimate, build_potential, find_critical_threshold, Potential, Side,
};
use foldtail::sampling::{build_distribution, AlphaDistribution};
use serde_json::{Map, Value};
use thiserror::Error;

pub const TOP_LEVEL_SECTIONS: [&str; 5] = ["potential", "branch", "loss", "alpha_dist", "run"];

/// Maximum allowed gap between a declared branch exponent and the one
/// measured from the potential.
pub const M_AGREEMENT_TOL: f64 = 0.05;

pub const DEFAULT_U_QUANTILE: f64 = 0.99;
pub const DEFAULT_Y_GRID_SIZE: usize = 20;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// Every problem found in the document, not just the first.
#[derive(Debug)]
pub struct ValidationError {
    pub failures: Vec<String>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "invalid configuration ({} problem{}):",
            self.failures.len(),
            if self.failures.len() == 1 { "" } else { "s" }
        )?;
        for failure in &self.failures {
            writeln!(f, "  - {failure}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub n_samples: u64,
    pub seed: u64,
    pub u_quantile: f64,
    pub y_grid_size: usize,
}

/// A fully resolved scenario: every module object is already constructed,
/// so nothing downstream can fail for configuration reasons.
pub struct ScenarioConfig {
    pub potential: Box<dyn Potential>,
    pub spec: BranchSpec,
    pub map: LossMap,
    pub dist: Box<dyn AlphaDistribution>,
    pub run: RunSettings,
    /// True when `alpha_c` was located from the potential rather than given.
    pub alpha_c_auto: bool,
    /// Branch exponent measured from the potential during validation.
    pub m_estimate: f64,
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_config_str(&text)
}

pub fn load_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let doc: Value = serde_json::from_str(text)?;
    let mut failures = Vec::new();

    let root = match doc.as_object() {
        Some(obj) => obj,
        None => {
            return Err(ValidationError {
                failures: vec!["top level must be a JSON object".to_string()],
            }
            .into())
        }
    };

    for key in root.keys() {
        if !TOP_LEVEL_SECTIONS.contains(&key.as_str()) {
            failures.push(format!("unknown top-level section `{key}`"));
        }
    }
    for section in TOP_LEVEL_SECTIONS {
        if !root.contains_key(section) {
            failures.push(format!("missing required section `{section}`"));
        }
    }

    let potential = root
        .get("potential")
        .and_then(|v| parse_potential(v, &mut failures));
    let branch = root
        .get("branch")
        .and_then(|v| parse_branch(v, &mut failures));
    let map = root.get("loss").and_then(|v| parse_loss(v, &mut failures));
    let dist = root
        .get("alpha_dist")
        .and_then(|v| parse_alpha_dist(v, &mut failures));
    let run = root.get("run").and_then(|v| parse_run(v, &mut failures));

    // Resolve alpha_c, then cross-check the declared exponent against the
    // branch geometry the potential actually has. Both need a valid
    // potential, so they only run once the section-level parses succeeded.
    let mut resolved = None;
    if let (Some(potential), Some(branch)) = (potential, branch) {
        let (mode, m, amplitude, alpha_c_field) = branch;
        let alpha_c = match alpha_c_field {
            AlphaC::Auto => match find_critical_threshold(potential.as_ref(), potential.alpha_range()) {
                Ok(t) => Some(t.alpha_c),
                Err(e) => {
                    failures.push(format!(
                        "branch.alpha_c = \"auto\" needs a detectable transition: {e}"
                    ));
                    None
                }
            },
            AlphaC::Given(v) => Some(v),
        };
        if let Some(alpha_c) = alpha_c {
            let spec = match BranchSpec::new(mode, m, amplitude, alpha_c) {
                Ok(spec) => Some(spec),
                Err(e) => {
                    failures.push(format!("branch: {e}"));
                    None
                }
            };
            let estimate = measure_branch_exponent(potential.as_ref(), alpha_c, m);
            match estimate {
                Some(est) if (est - m).abs() > M_AGREEMENT_TOL => {
                    failures.push(format!(
                        "branch.m = {m} disagrees with the exponent {est:.4} measured \
                         from the potential at alpha_c = {alpha_c} (tolerance {M_AGREEMENT_TOL})"
                    ));
                }
                None => {
                    failures.push(format!(
                        "no emerging branch detected on either side of alpha_c = {alpha_c}; \
                         the potential has no transition there"
                    ));
                }
                _ => {}
            }
            if let (Some(spec), Some(est)) = (spec, estimate) {
                resolved = Some((potential, spec, est, matches!(alpha_c_field, AlphaC::Auto)));
            }
        }
    }

    if !failures.is_empty() {
        return Err(ValidationError { failures }.into());
    }
    // All parses succeeded and no failure was recorded, so every piece is
    // present.
    let (potential, spec, m_estimate, alpha_c_auto) = resolved.unwrap();
    Ok(ScenarioConfig {
        potential,
        spec,
        map: map.unwrap(),
        dist: dist.unwrap(),
        run: run.unwrap(),
        alpha_c_auto,
        m_estimate,
    })
}

/// Measured emerging-branch exponent, trying both sides of the transition:
/// which side the branch lives on depends on the potential. When both sides
/// carry a branch the one closest to the declared exponent is the relevant
/// comparison.
fn measure_branch_exponent(potential: &dyn Potential, alpha_c: f64, m: f64) -> Option<f64> {
    [Side::Above, Side::Below]
        .into_iter()
        .filter_map(|side| branch_exponent_estimate(potential, alpha_c, side).ok())
        .filter(|est| est.is_finite())
        .min_by(|a, b| (a - m).abs().total_cmp(&(b - m).abs()))
}

enum AlphaC {
    Auto,
    Given(f64),
}

fn section<'v>(
    value: &'v Value,
    name: &str,
    allowed: &[&str],
    failures: &mut Vec<String>,
) -> Option<&'v Map<String, Value>> {
    let obj = match value.as_object() {
        Some(obj) => obj,
        None => {
            failures.push(format!("section `{name}` must be a JSON object"));
            return None;
        }
    };
    let mut ok = true;
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            failures.push(format!("section `{name}` has unknown field `{key}`"));
            ok = false;
        }
    }
    ok.then_some(obj)
}

fn need_f64(
    obj: &Map<String, Value>,
    section: &str,
    key: &str,
    failures: &mut Vec<String>,
) -> Option<f64> {
    match obj.get(key) {
        Some(v) => match v.as_f64() {
            Some(x) => Some(x),
            None => {
                failures.push(format!("`{section}.{key}` must be a number, got {v}"));
                None
            }
        },
        None => {
            failures.push(format!("`{section}` is missing required field `{key}`"));
            None
        }
    }
}

fn need_str<'v>(
    obj: &'v Map<String, Value>,
    section: &str,
    key: &str,
    failures: &mut Vec<String>,
) -> Option<&'v str> {
    match obj.get(key) {
        Some(v) => match v.as_str() {
            Some(s) => Some(s),
            None => {
                failures.push(format!("`{section}.{key}` must be a string, got {v}"));
                None
            }
        },
        None => {
            failures.push(format!("`{section}` is missing required field `{key}`"));
            None
        }
    }
}

fn parse_potential(value: &Value, failures: &mut Vec<String>) -> Option<Box<dyn Potential>> {
    let obj = section(value, "potential", &["form", "coefficients", "alpha_range"], failures)?;
    let form = need_str(obj, "potential", "form", failures);
    let coefficients = match obj.get("coefficients") {
        Some(Value::Array(items)) => {
            let mut coeffs = Vec::with_capacity(items.len());
            let mut ok = true;
            for (i, item) in items.iter().enumerate() {
                match item.as_f64() {
                    Some(x) => coeffs.push(x),
                    None => {
                        failures.push(format!(
                            "`potential.coefficients[{i}]` must be a number, got {item}"
                        ));
                        ok = false;
                    }
                }
            }
            ok.then_some(coeffs)
        }
        Some(v) => {
            failures.push(format!("`potential.coefficients` must be an array, got {v}"));
            None
        }
        None => {
            failures.push("`potential` is missing required field `coefficients`".to_string());
            None
        }
    };
    let alpha_range = match obj.get("alpha_range") {
        Some(Value::Array(items)) if items.len() == 2 => {
            match (items[0].as_f64(), items[1].as_f64()) {
                (Some(lo), Some(hi)) => Some((lo, hi)),
                _ => {
                    failures.push("`potential.alpha_range` entries must be numbers".to_string());
                    None
                }
            }
        }
        Some(v) => {
            failures.push(format!(
                "`potential.alpha_range` must be a two-element array [lo, hi], got {v}"
            ));
            None
        }
        None => {
            failures.push("`potential` is missing required field `alpha_range`".to_string());
            None
        }
    };
    match (form, coefficients, alpha_range) {
        (Some(form), Some(coeffs), Some(range)) => {
            match build_potential(form, &coeffs, range) {
                Ok(p) => Some(p),
                Err(e) => {
                    failures.push(format!("potential: {e}"));
                    None
                }
            }
        }
        _ => None,
    }
}

type BranchFields = (BranchMode, f64, f64, AlphaC);

fn parse_branch(value: &Value, failures: &mut Vec<String>) -> Option<BranchFields> {
    let obj = section(value, "branch", &["mode", "m", "c", "C", "alpha_c"], failures)?;
    let mode = need_str(obj, "branch", "mode", failures).and_then(|s| {
        let mode = BranchMode::from_name(s);
        if mode.is_none() {
            failures.push(format!(
                "`branch.mode` must be \"bounded\" or \"divergent\", got \"{s}\""
            ));
        }
        mode
    });
    let m = need_f64(obj, "branch", "m", failures).and_then(|m| {
        if m.is_finite() && m > 0.0 {
            Some(m)
        } else {
            failures.push(format!("`branch.m` must be positive and finite, got {m}"));
            None
        }
    });
    // The prefactor is written C in most notations; accept either case.
    let amplitude = match (obj.get("c"), obj.get("C")) {
        (Some(_), Some(_)) => {
            failures.push("`branch` defines both `c` and `C`; use one".to_string());
            None
        }
        (Some(v), None) | (None, Some(v)) => match v.as_f64() {
            Some(x) if x.is_finite() && x > 0.0 => Some(x),
            Some(x) => {
                failures.push(format!("`branch.c` must be positive and finite, got {x}"));
                None
            }
            None => {
                failures.push(format!("`branch.c` must be a number, got {v}"));
                None
            }
        },
        (None, None) => {
            failures.push("`branch` is missing required field `c`".to_string());
            None
        }
    };
    let alpha_c = match obj.get("alpha_c") {
        Some(Value::String(s)) if s == "auto" => Some(AlphaC::Auto),
        Some(v) => match v.as_f64() {
            Some(x) => Some(AlphaC::Given(x)),
            None => {
                failures.push(format!(
                    "`branch.alpha_c` must be a number or \"auto\", got {v}"
                ));
                None
            }
        },
        None => {
            failures.push("`branch` is missing required field `alpha_c`".to_string());
            None
        }
    };
    match (mode, m, amplitude, alpha_c) {
        (Some(mode), Some(m), Some(c), Some(a)) => Some((mode, m, c, a)),
        _ => None,
    }
}

fn parse_loss(value: &Value, failures: &mut Vec<String>) -> Option<LossMap> {
    let obj = section(value, "loss", &["p", "baseline"], failures)?;
    let p = need_f64(obj, "loss", "p", failures);
    let baseline = match obj.get("baseline") {
        Some(v) => match v.as_f64() {
            Some(x) => Some(x),
            None => {
                failures.push(format!("`loss.baseline` must be a number, got {v}"));
                None
            }
        },
        None => Some(0.0),
    };
    match (p, baseline) {
        (Some(p), Some(baseline)) => match LossMap::new(p, baseline) {
            Ok(map) => Some(map),
            Err(e) => {
                failures.push(format!("loss: {e}"));
                None
            }
        },
        _ => None,
    }
}

fn parse_alpha_dist(
    value: &Value,
    failures: &mut Vec<String>,
) -> Option<Box<dyn AlphaDistribution>> {
    let obj = section(value, "alpha_dist", &["family", "parameters"], failures)?;
    let family = need_str(obj, "alpha_dist", "family", failures);
    let params = match obj.get("parameters") {
        Some(Value::Object(map)) => {
            let mut out = BTreeMap::new();
            let mut ok = true;
            for (k, v) in map {
                match v.as_f64() {
                    Some(x) => {
                        out.insert(k.clone(), x);
                    }
                    None => {
                        failures.push(format!(
                            "`alpha_dist.parameters.{k}` must be a number, got {v}"
                        ));
                        ok = false;
                    }
                }
            }
            ok.then_some(out)
        }
        Some(v) => {
            failures.push(format!("`alpha_dist.parameters` must be an object, got {v}"));
            None
        }
        None => {
            failures.push("`alpha_dist` is missing required field `parameters`".to_string());
            None
        }
    };
    match (family, params) {
        (Some(family), Some(params)) => match build_distribution(family, &params) {
            Ok(d) => Some(d),
            Err(e) => {
                failures.push(format!("alpha_dist: {e}"));
                None
            }
        },
        _ => None,
    }
}

fn parse_run(value: &Value, failures: &mut Vec<String>) -> Option<RunSettings> {
    let obj = section(
        value,
        "run",
        &["n_samples", "seed", "u_quantile", "y_grid_size"],
        failures,
    )?;
    let n_samples = match obj.get("n_samples") {
        Some(v) => match v.as_u64() {
            Some(0) => {
                failures.push("`run.n_samples` must be at least 1".to_string());
                None
            }
            Some(n) => Some(n),
            None => {
                failures.push(format!(
                    "`run.n_samples` must be a nonnegative integer, got {v}"
                ));
                None
            }
        },
        None => {
            failures.push("`run` is missing required field `n_samples`".to_string());
            None
        }
    };
    let seed = match obj.get("seed") {
        Some(v) => match v.as_u64() {
            Some(s) => Some(s),
            None => {
                failures.push(format!("`run.seed` must be a nonnegative integer, got {v}"));
                None
            }
        },
        None => {
            failures.push("`run` is missing required field `seed`".to_string());
            None
        }
    };
    let u_quantile = match obj.get("u_quantile") {
        Some(v) => match v.as_f64() {
            Some(q) if q > 0.0 && q < 1.0 => Some(q),
            Some(q) => {
                failures.push(format!(
                    "`run.u_quantile` must lie strictly inside (0, 1), got {q}"
                ));
                None
            }
            None => {
                failures.push(format!("`run.u_quantile` must be a number, got {v}"));
                None
            }
        },
        None => Some(DEFAULT_U_QUANTILE),
    };
    let y_grid_size = match obj.get("y_grid_size") {
        Some(v) => match v.as_u64() {
            Some(n) if n >= 2 => Some(n as usize),
            Some(n) => {
                failures.push(format!("`run.y_grid_size` must be at least 2, got {n}"));
                None
            }
            None => {
                failures.push(format!(
                    "`run.y_grid_size` must be a nonnegative integer, got {v}"
                ));
                None
            }
        },
        None => Some(DEFAULT_Y_GRID_SIZE),
    };
    match (n_samples, seed, u_quantile, y_grid_size) {
        (Some(n_samples), Some(seed), Some(u_quantile), Some(y_grid_size)) => Some(RunSettings {
            n_samples,
            seed,
            u_quantile,
            y_grid_size,
        }),
        _ => None,
    }
}
