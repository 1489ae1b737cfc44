//! The registered potential forms.

use super::{Potential, PotentialError};
use crate::poly::Polynomial;

fn check_range(alpha_range: (f64, f64)) -> Result<(), PotentialError> {
    let (lo, hi) = alpha_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(PotentialError::BadAlphaRange { lo, hi });
    }
    Ok(())
}

/// `V(x; alpha) = x^3 - alpha x`. No free coefficients; the canonical
/// threshold sits at `alpha = 0` with the stable branch at `+sqrt(alpha/3)`.
#[derive(Debug, Clone)]
pub struct Fold {
    alpha_range: (f64, f64),
}

impl Fold {
    pub fn new(alpha_range: (f64, f64)) -> Result<Self, PotentialError> {
        check_range(alpha_range)?;
        Ok(Fold { alpha_range })
    }
}

impl Potential for Fold {
    fn form_name(&self) -> &'static str {
        "fold"
    }

    fn alpha_range(&self) -> (f64, f64) {
        self.alpha_range
    }

    fn nominal_degree(&self) -> usize {
        3
    }

    fn poly_at(&self, alpha: f64) -> Polynomial {
        Polynomial::new(vec![0.0, -alpha, 0.0, 1.0])
    }
}

/// `V(x; alpha) = x^4/4 + a(alpha) x^2/2 + b(alpha) x` with affine
/// `a = a0 + a1 alpha`, `b = b0 + b1 alpha`. Coefficients `[a0, a1, b0, b1]`.
#[derive(Debug, Clone)]
pub struct Cusp {
    a0: f64,
    a1: f64,
    b0: f64,
    b1: f64,
    alpha_range: (f64, f64),
}

impl Cusp {
    pub fn new(coeffs: [f64; 4], alpha_range: (f64, f64)) -> Result<Self, PotentialError> {
        check_range(alpha_range)?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(PotentialError::BadCoefficientCount {
                form: "cusp",
                expected: 4,
                got: coeffs.iter().filter(|c| c.is_finite()).count(),
            });
        }
        Ok(Cusp {
            a0: coeffs[0],
            a1: coeffs[1],
            b0: coeffs[2],
            b1: coeffs[3],
            alpha_range,
        })
    }
}

impl Potential for Cusp {
    fn form_name(&self) -> &'static str {
        "cusp"
    }

    fn alpha_range(&self) -> (f64, f64) {
        self.alpha_range
    }

    fn nominal_degree(&self) -> usize {
        4
    }

    fn poly_at(&self, alpha: f64) -> Polynomial {
        let a = self.a0 + self.a1 * alpha;
        let b = self.b0 + self.b1 * alpha;
        Polynomial::new(vec![0.0, b, a / 2.0, 0.0, 0.25])
    }
}

/// `V(x; alpha) = sum_k (c_k + d_k alpha) x^k`, degree 2..=6.
///
/// Coefficients arrive interleaved `[c0, d0, c1, d1, ...]`; the family degree
/// is the highest `k` with `(c_k, d_k) != (0, 0)`, and the leading
/// coefficient must be nonzero at both ends and the midpoint of the declared
/// alpha range.
#[derive(Debug, Clone)]
pub struct CustomPolynomial {
    base: Vec<f64>,
    slope: Vec<f64>,
    degree: usize,
    alpha_range: (f64, f64),
}

impl CustomPolynomial {
    pub fn new(interleaved: &[f64], alpha_range: (f64, f64)) -> Result<Self, PotentialError> {
        check_range(alpha_range)?;
        if interleaved.is_empty() || interleaved.len() % 2 != 0 || interleaved.len() > 14 {
            return Err(PotentialError::BadCoefficientCount {
                form: "custom_polynomial",
                expected: 14,
                got: interleaved.len(),
            });
        }
        let base: Vec<f64> = interleaved.iter().step_by(2).copied().collect();
        let slope: Vec<f64> = interleaved.iter().skip(1).step_by(2).copied().collect();
        let degree = base
            .iter()
            .zip(&slope)
            .enumerate()
            .rev()
            .find(|(_, (c, d))| **c != 0.0 || **d != 0.0)
            .map(|(k, _)| k)
            .unwrap_or(0);
        if !(2..=6).contains(&degree) {
            return Err(PotentialError::DegreeOutOfRange { degree });
        }
        let model = CustomPolynomial {
            base: base[..=degree].to_vec(),
            slope: slope[..=degree].to_vec(),
            degree,
            alpha_range,
        };
        let (lo, hi) = alpha_range;
        for alpha in [lo, 0.5 * (lo + hi), hi] {
            if model.base[degree] + model.slope[degree] * alpha == 0.0 {
                return Err(PotentialError::LeadingCoefficientVanishes { alpha });
            }
        }
        Ok(model)
    }
}

impl Potential for CustomPolynomial {
    fn form_name(&self) -> &'static str {
        "custom_polynomial"
    }

    fn alpha_range(&self) -> (f64, f64) {
        self.alpha_range
    }

    fn nominal_degree(&self) -> usize {
        self.degree
    }

    fn poly_at(&self, alpha: f64) -> Polynomial {
        let coeffs = self
            .base
            .iter()
            .zip(&self.slope)
            .map(|(c, d)| c + d * alpha)
            .collect();
        Polynomial::new(coeffs)
    }
}

pub(super) fn build_fold(
    coeffs: &[f64],
    alpha_range: (f64, f64),
) -> Result<Box<dyn Potential>, PotentialError> {
    if !coeffs.is_empty() {
        return Err(PotentialError::BadCoefficientCount {
            form: "fold",
            expected: 0,
            got: coeffs.len(),
        });
    }
    Ok(Box::new(Fold::new(alpha_range)?))
}

pub(super) fn build_cusp(
    coeffs: &[f64],
    alpha_range: (f64, f64),
) -> Result<Box<dyn Potential>, PotentialError> {
    let arr: [f64; 4] = coeffs
        .try_into()
        .map_err(|_| PotentialError::BadCoefficientCount {
            form: "cusp",
            expected: 4,
            got: coeffs.len(),
        })?;
    Ok(Box::new(Cusp::new(arr, alpha_range)?))
}

pub(super) fn build_custom_polynomial(
    coeffs: &[f64],
    alpha_range: (f64, f64),
) -> Result<Box<dyn Potential>, PotentialError> {
    Ok(Box::new(CustomPolynomial::new(coeffs, alpha_range)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_rejects_degree_out_of_range() {
        // Pure linear family: degree 1.
        assert!(matches!(
            CustomPolynomial::new(&[0.0, 0.0, 1.0, 0.5], (-1.0, 1.0)),
            Err(PotentialError::DegreeOutOfRange { degree: 1 })
        ));
    }

    #[test]
    fn custom_rejects_vanishing_leading_coefficient() {
        // Leading term (1 - alpha) x^2 vanishes at alpha = 1, the range top.
        assert!(matches!(
            CustomPolynomial::new(&[0.0, 0.0, 0.0, 0.0, 1.0, -1.0], (0.0, 1.0)),
            Err(PotentialError::LeadingCoefficientVanishes { .. })
        ));
    }

    #[test]
    fn custom_trims_to_family_degree() {
        let p = CustomPolynomial::new(&[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0], (0.0, 1.0))
            .unwrap();
        assert_eq!(p.nominal_degree(), 2);
        assert_eq!(p.poly_at(0.3).coeffs(), &[1.0, 0.0, 2.0]);
    }

    #[test]
    fn bad_alpha_ranges_rejected() {
        assert!(Fold::new((1.0, 1.0)).is_err());
        assert!(Fold::new((2.0, 1.0)).is_err());
        assert!(Fold::new((0.0, f64::INFINITY)).is_err());
    }
}
