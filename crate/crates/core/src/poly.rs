//! Dense univariate polynomials and real root extraction.
//!
//! Degrees stay small (potentials are degree <= 6, so derivatives are degree
//! <= 5); roots come from closed forms through cubics and from companion
//! matrix eigenvalues above that, each followed by a short Newton polish.

use nalgebra::DMatrix;

/// Dense polynomial with ascending-power coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// `coeffs[k]` multiplies `x^k`. Exact trailing zeros are trimmed so the
    /// stored degree matches the leading nonzero coefficient.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().expect("coeffs nonempty")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Horner evaluation, highest power first.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Horner on |coeffs| and |x|: the natural backward-error scale at `x`.
    pub fn eval_magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * ax + c.abs();
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::new(vec![0.0]);
        }
        let d = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Polynomial::new(d)
    }

    pub fn max_coeff_magnitude(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, &c| m.max(c.abs()))
    }
}

/// All real roots, ascending and deduplicated.
///
/// Closed forms through degree 3, companion-matrix eigenvalues for degree 4
/// and 5, then a short Newton polish on every candidate. Near-real complex
/// pairs (|Im| <= 1e-7 * (1 + |Re|)) are treated as a real root; duplicates
/// closer than 1e-8 * (1 + |z|) collapse to the candidate with the smallest
/// residual, so a degenerate (multiple) root is reported once.
pub fn real_roots(p: &Polynomial) -> Vec<f64> {
    let c = p.coeffs();
    let raw = match p.degree() {
        0 => Vec::new(),
        1 => vec![-c[0] / c[1]],
        2 => quadratic_roots(c[2], c[1], c[0]),
        3 => cubic_roots(c[3], c[2], c[1], c[0]),
        _ => companion_real_roots(p),
    };
    polish_and_dedupe(p, raw)
}

/// Roots of `a x^2 + b x + c`, numerically stable split.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    let sq = disc.sqrt();
    let q = if b >= 0.0 { -0.5 * (b + sq) } else { -0.5 * (b - sq) };
    if q == 0.0 {
        // b == 0 and c == 0 cannot reach here (disc == 0 above); q == 0 only
        // if both b and disc vanish, so this is defensive.
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Roots of `a x^3 + b x^2 + c x + d` via the depressed cubic.
fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let bn = b / a;
    let cn = c / a;
    let dn = d / a;
    let shift = bn / 3.0;
    let p = cn - bn * bn / 3.0;
    let q = 2.0 * bn * bn * bn / 27.0 - bn * cn / 3.0 + dn;
    depressed_cubic_roots(p, q)
        .into_iter()
        .map(|t| t - shift)
        .collect()
}

/// Real roots of `t^3 + p t + q`.
fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    if q == 0.0 {
        let mut r = vec![0.0];
        if p < 0.0 {
            let s = (-p).sqrt();
            r.push(s);
            r.push(-s);
        }
        return r;
    }
    if p == 0.0 {
        return vec![(-q).cbrt()];
    }
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if disc > 0.0 {
        // Three real roots; p < 0 is implied.
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (-4.0 * q / (m * m * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        vec![
            m * theta.cos(),
            m * (theta - tau).cos(),
            m * (theta + tau).cos(),
        ]
    } else {
        // One real root; pick the cube root with no cancellation.
        let dsq = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let w = if q >= 0.0 { -q / 2.0 - dsq } else { -q / 2.0 + dsq };
        let u = w.cbrt();
        if u == 0.0 {
            return vec![0.0];
        }
        let v = -p / (3.0 * u);
        vec![u + v]
    }
}

/// Real eigenvalues of the companion matrix of `p` (degree >= 4).
fn companion_real_roots(p: &Polynomial) -> Vec<f64> {
    let n = p.degree();
    let lead = p.leading();
    let monic: Vec<f64> = p.coeffs()[..n].iter().map(|&c| c / lead).collect();
    let mat = DMatrix::from_fn(n, n, |r, c| {
        if c == n - 1 {
            -monic[r]
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    mat.complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect()
}

fn polish_and_dedupe(p: &Polynomial, raw: Vec<f64>) -> Vec<f64> {
    let dp = p.derivative();
    let mut roots: Vec<f64> = raw
        .into_iter()
        .filter(|z| z.is_finite())
        .map(|z| polish(p, &dp, z))
        .collect();
    roots.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for z in roots {
        if let Some(&last) = out.last() {
            if (z - last).abs() <= 1e-8 * (1.0 + z.abs()) {
                if p.eval(z).abs() < p.eval(last).abs() {
                    *out.last_mut().expect("nonempty") = z;
                }
                continue;
            }
        }
        out.push(z);
    }
    out
}

/// Up to three Newton steps, stopping once the residual reaches the
/// backward-error floor or a step fails to improve it.
fn polish(p: &Polynomial, dp: &Polynomial, mut z: f64) -> f64 {
    for _ in 0..3 {
        let f = p.eval(z);
        if f.abs() <= 1e-15 * p.eval_magnitude(z) {
            break;
        }
        let d = dp.eval(z);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = z - f / d;
        if !next.is_finite() || p.eval(next).abs() >= f.abs() {
            break;
        }
        z = next;
    }
    z
}
