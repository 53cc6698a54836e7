//! Moment sequences `c_i = (y, Aⁱ r₀)`, the functionals `c` and `c⁽¹⁾`, and
//! the Hankel determinants `H⁽¹⁾_k` that decide existence of the orthogonal
//! polynomials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{determinant, matvec, Matrix, Vector};
use crate::polynomial::Polynomial;

/// Relative threshold of the Hankel singularity test.
pub const HANKEL_TOL: f64 = 1e-12;

/// Labels of the matrix and vectors a moment sequence was built from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub matrix: String,
    pub r0: String,
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    values: Vec<f64>,
    pub provenance: Provenance,
}

/// `c` or its shift `c⁽¹⁾(xⁱ) = c(xⁱ⁺¹)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Functional {
    C,
    C1,
}

impl Functional {
    fn shift(self) -> usize {
        match self {
            Functional::C => 0,
            Functional::C1 => 1,
        }
    }
}

impl MomentSequence {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("moment sequence needs c_0".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericOverflow);
        }
        Ok(MomentSequence { values, provenance: Provenance::default() })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Highest available index `m`.
    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, i: usize) -> Result<f64> {
        self.values.get(i).copied().ok_or(Error::MomentRangeExceeded { required: i, available: self.max_index() })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Every moment multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        MomentSequence { values: self.values.iter().map(|v| v * s).collect(), provenance: self.provenance.clone() }
    }

    /// Moments of `A / s`, i.e. `c_i / sⁱ`.
    pub fn variable_scaled(&self, s: f64) -> Self {
        let mut factor = 1.0;
        let values = self
            .values
            .iter()
            .map(|v| {
                let scaled = v * factor;
                factor /= s;
                scaled
            })
            .collect();
        MomentSequence { values, provenance: self.provenance.clone() }
    }

    /// Growth rate `(|c_m| / |c_0|)^(1/m)` of the first `m + 1` moments, or 1
    /// when that is not a usable positive number.
    pub fn growth_rate(&self, m: usize) -> f64 {
        let m = m.min(self.max_index());
        if m == 0 {
            return 1.0;
        }
        let rate = (self.values[m].abs() / self.values[0].abs()).powf(1.0 / m as f64);
        if rate.is_finite() && rate > 0.0 {
            rate
        } else {
            1.0
        }
    }

    /// The `k × k` Hankel matrix `[c_{i+j+1}]`.
    pub fn hankel_matrix(&self, k: usize) -> Result<Matrix> {
        if k == 0 {
            return Err(Error::InvalidInput("empty Hankel matrix".into()));
        }
        self.get(2 * k - 1)?;
        let data = (0..k).flat_map(|i| (0..k).map(move |j| i + j + 1)).map(|idx| self.values[idx]).collect();
        Matrix::dense(k, k, data)
    }
}

/// `c_i = (y, Aⁱ r₀)` for `i = 0..=m`, reusing one iterated vector.
pub fn compute_moments(a: &Matrix, r0: &Vector, y: &Vector, m: usize) -> Result<MomentSequence> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: a.cols() });
    }
    for v in [r0, y] {
        if v.len() != a.rows() {
            return Err(Error::DimensionMismatch { expected: a.rows(), found: v.len() });
        }
    }
    let mut values = Vec::with_capacity(m + 1);
    let mut power = r0.clone();
    values.push(y.dot(&power));
    for _ in 0..m {
        power = matvec(a, &power)?;
        values.push(y.dot(&power));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericOverflow);
    }
    Ok(MomentSequence { values, provenance: Provenance::default() })
}

/// `c(x^power · p)` or `c⁽¹⁾(x^power · p)`.
pub fn apply_functional(c: &MomentSequence, p: &Polynomial, functional: Functional, power: usize) -> Result<f64> {
    let offset = power + functional.shift();
    let required = offset + p.degree();
    if required > c.max_index() {
        return Err(Error::MomentRangeExceeded { required, available: c.max_index() });
    }
    Ok(p.coeffs().iter().zip(&c.values[offset..]).map(|(pj, cj)| pj * cj).sum())
}

/// `H⁽¹⁾_k`, with `H⁽¹⁾_0 = 1`.
pub fn hankel_det(c: &MomentSequence, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    determinant(&c.hankel_matrix(k)?)
}

/// Scale-aware zero test: `|H⁽¹⁾_k| < 1e-12 · (max |entry|)^k`.
pub fn hankel_is_singular(c: &MomentSequence, k: usize) -> Result<bool> {
    if k == 0 {
        return Ok(false);
    }
    let h = c.hankel_matrix(k)?;
    let det = determinant(&h)?;
    Ok(!(det.abs() >= HANKEL_TOL * h.max_abs().powi(k as i32)))
}
