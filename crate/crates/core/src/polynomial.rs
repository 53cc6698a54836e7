//! Dense polynomials in ascending-power form and their action on vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matvec, Matrix, Vector};

/// Which orthogonal family a polynomial belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Orthogonal for `c`, normalized so that `P_k(0) = 1`.
    P,
    /// Monic, orthogonal for the shifted functional `c⁽¹⁾`.
    P1,
    /// Result of structural arithmetic, no normalization implied.
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
    family: Family,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial::with_family(coeffs, Family::Free)
    }

    pub(crate) fn with_family(mut coeffs: Vec<f64>, family: Family) -> Self {
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs, family }
    }

    pub fn one() -> Self {
        Polynomial::new(vec![1.0])
    }

    /// `x^j`
    pub fn monomial(j: usize) -> Self {
        Polynomial::one().shift_mul(j)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Structural degree: index of the last stored coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.degree()]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeffs.get(i).unwrap_or(&0.0) + other.coeffs.get(i).unwrap_or(&0.0)).collect();
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Multiply by `x^j`.
    pub fn shift_mul(&self, j: usize) -> Polynomial {
        let mut coeffs = vec![0.0; j];
        coeffs.extend_from_slice(&self.coeffs);
        Polynomial::new(coeffs)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }

    /// Coefficients of `t ↦ p(m + h t)`.
    pub fn substitute_affine(&self, m: f64, h: f64) -> Polynomial {
        let inner = Polynomial::new(vec![m, h]);
        let mut out = Polynomial::new(vec![0.0]);
        for &c in self.coeffs.iter().rev() {
            out = out.mul(&inner).add(&Polynomial::new(vec![c]));
        }
        out.coeffs.truncate(self.coeffs.len());
        Polynomial::with_family(out.coeffs, self.family)
    }

    /// Coefficients padded with zeros to `len` entries.
    pub fn padded(&self, len: usize) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        c.resize(len.max(c.len()), 0.0);
        c
    }
}

/// `p(A) v`, evaluated Horner-style with `degree(p)` products.
pub fn poly_matrix_apply(p: &Polynomial, a: &Matrix, v: &Vector) -> Result<Vector> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: a.cols() });
    }
    if a.cols() != v.len() {
        return Err(Error::DimensionMismatch { expected: a.cols(), found: v.len() });
    }
    let mut coeffs = p.coeffs().iter().rev();
    let mut acc = v.scaled(*coeffs.next().expect("polynomial has a coefficient"));
    for &c in coeffs {
        acc = matvec(a, &acc)?;
        acc.axpy(c, v);
    }
    Ok(acc)
}
