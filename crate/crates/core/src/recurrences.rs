//! The A13 and B13 recurrences, and numerical certificates for the existence
//! or nonexistence of the relation forms A11, A13, A14, B11 and B13.
//!
//! A13 builds `P_k` from `P_{k-2}` and `P⁽¹⁾_{k-3}`:
//!
//! ```text
//! P_k = A_k [ (x² + B_k x + C_k) P_{k-2} + (E_k x² + F_k x) P⁽¹⁾_{k-3} ],   A_k C_k = 1
//! ```
//!
//! B13 builds the monic `P⁽¹⁾_k` from `P⁽¹⁾_{k-3}` and `P⁽¹⁾_{k-2}`:
//!
//! ```text
//! P⁽¹⁾_k = (C_k x + D_k) P⁽¹⁾_{k-3} + (x² + F_k x + G_k) P⁽¹⁾_{k-2}
//! ```
//!
//! Every coefficient is a function of a dozen functional values, which the
//! solver obtains as inner products with the left vectors `u_j = (Aᵀ)ʲ y`.

use serde::{Deserialize, Serialize};

use crate::error::{BreakdownKind, Error, Result};
use crate::linalg::{least_squares, solve_dense, Matrix, Vector};
use crate::moments::{apply_functional, Functional, MomentSequence};
use crate::oracle::{oracle, oracle_p, oracle_p1};
use crate::polynomial::{poly_matrix_apply, Family, Polynomial};

/// Default relative threshold for every breakdown test.
pub const DEFAULT_BREAKDOWN_EPS: f64 = 1e-12;

/// Below this relative residual a relation is certified to exist.
pub const EXISTS_TOL: f64 = 1e-8;

/// Above this relative residual a relation is certified not to exist.
pub const NONEXISTENCE_TOL: f64 = 1e-3;

/// Relative residual below which a candidate column counts as dependent on
/// the columns already selected.
pub const COLUMN_DEPENDENCE_TOL: f64 = 1e-9;

/// Functional values needed by one A13/B13 step at degree `k`.
///
/// Entry `j` of each array is the value at power offset `j`:
///
/// * `p_prev[j]  = c(x^{k-2+j} P_{k-2})      = (u_{k-2+j}, r_{k-2})`
/// * `q_older[j] = c⁽¹⁾(x^{k-3+j} P⁽¹⁾_{k-3}) = (u_{k-2+j}, z_{k-3})`
/// * `q_prev[j]  = c⁽¹⁾(x^{k-2+j} P⁽¹⁾_{k-2}) = (u_{k-1+j}, z_{k-2})`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarProducts {
    pub degree: usize,
    pub p_prev: [f64; 4],
    pub q_older: [f64; 4],
    pub q_prev: [f64; 4],
}

impl ScalarProducts {
    /// The same values computed from oracle polynomials and the moment
    /// functionals instead of vectors.
    pub fn from_moments(c: &MomentSequence, k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidInput(format!("recurrence degree {k} < 3")));
        }
        let p = oracle_p(c, k - 2)?;
        let q3 = oracle_p1(c, k - 3)?;
        let q2 = oracle_p1(c, k - 2)?;
        let mut sp = ScalarProducts { degree: k, p_prev: [0.0; 4], q_older: [0.0; 4], q_prev: [0.0; 4] };
        for j in 0..4 {
            sp.p_prev[j] = apply_functional(c, &p, Functional::C, k - 2 + j)?;
            sp.q_older[j] = apply_functional(c, &q3, Functional::C1, k - 3 + j)?;
            sp.q_prev[j] = apply_functional(c, &q2, Functional::C1, k - 2 + j)?;
        }
        Ok(sp)
    }

    /// Largest of `q_older`, the scale for the true-breakdown test on
    /// `q_older[0]`.
    fn older_scale(&self) -> f64 {
        self.q_older.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Inner products for one step; `u_window` holds `u_{k-2} … u_{k+2}`.
pub fn assemble_scalar_products(
    k: usize,
    u_window: &[Vector],
    r_km2: &Vector,
    z_km3: &Vector,
    z_km2: &Vector,
) -> Result<ScalarProducts> {
    if u_window.len() != 5 {
        return Err(Error::DimensionMismatch { expected: 5, found: u_window.len() });
    }
    let n = r_km2.len();
    if let Some(bad) = u_window.iter().chain([z_km3, z_km2]).find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
    }
    let mut sp = ScalarProducts { degree: k, p_prev: [0.0; 4], q_older: [0.0; 4], q_prev: [0.0; 4] };
    for j in 0..4 {
        sp.p_prev[j] = u_window[j].dot(r_km2);
        sp.q_older[j] = u_window[j].dot(z_km3);
        sp.q_prev[j] = u_window[j + 1].dot(z_km2);
    }
    Ok(sp)
}

/// A 3×3 coefficient system kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct System3 {
    pub a: [[f64; 3]; 3],
    pub b: [f64; 3],
}

impl System3 {
    pub fn max_abs(&self) -> f64 {
        self.a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn determinant(&self) -> f64 {
        let a = &self.a;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Row and column scalings that bring every row and column maximum to 1.
    fn equilibration(&self) -> Option<([f64; 3], [f64; 3])> {
        let mut rows = [0.0; 3];
        for (r, row) in rows.iter_mut().zip(&self.a) {
            *r = row.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        }
        let mut cols = [0.0; 3];
        for (j, c) in cols.iter_mut().enumerate() {
            *c = (0..3).fold(0.0_f64, |m, i| m.max((self.a[i][j] / rows[i]).abs()));
        }
        let usable = |v: &[f64; 3]| v.iter().all(|x| x.is_finite() && *x > 0.0);
        (usable(&rows) && usable(&cols)).then_some((rows, cols))
    }

    /// `|Δ|` of the equilibrated system divided by the product of its column
    /// norms; 1 for orthogonal columns, 0 for a singular system. Invariant
    /// under scaling of any row or column.
    pub fn relative_determinant(&self) -> f64 {
        let Some((rows, cols)) = self.equilibration() else { return 0.0 };
        let s: Vec<f64> = (0..9).map(|idx| self.a[idx / 3][idx % 3] / (rows[idx / 3] * cols[idx % 3])).collect();
        let scaled = System3 { a: [[s[0], s[1], s[2]], [s[3], s[4], s[5]], [s[6], s[7], s[8]]], b: self.b };
        let hadamard: f64 = (0..3).map(|j| (0..3).map(|i| scaled.a[i][j].powi(2)).sum::<f64>().sqrt()).product();
        scaled.determinant().abs() / hadamard
    }

    fn solve(&self, eps: f64, degree: usize) -> Result<([f64; 3], f64)> {
        let ghost = || Error::breakdown(BreakdownKind::Ghost, degree);
        let delta = self.determinant();
        let relative = self.relative_determinant();
        if !(relative >= eps) || !delta.is_finite() {
            return Err(ghost());
        }
        let (rows, cols) = self.equilibration().ok_or_else(ghost)?;
        let scaled: Vec<f64> = (0..9).map(|idx| self.a[idx / 3][idx % 3] / (rows[idx / 3] * cols[idx % 3])).collect();
        let m = Matrix::dense(3, 3, scaled).map_err(|_| ghost())?;
        let rhs = Vector::new((0..3).map(|i| self.b[i] / rows[i]).collect()).map_err(|_| ghost())?;
        let w = solve_dense(&m, &rhs).map_err(|_| ghost())?;
        Ok(([w[0] / cols[0], w[1] / cols[1], w[2] / cols[2]], delta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A13Coeffs {
    pub a_k: f64,
    pub b_k: f64,
    pub c_k: f64,
    pub e_k: f64,
    pub f_k: f64,
    pub delta_k: f64,
    pub system: System3,
}

impl A13Coeffs {
    /// `A_k [(x² + B_k x + C_k) P_{k-2} + (E_k x² + F_k x) P⁽¹⁾_{k-3}]`
    pub fn polynomial(&self, p_km2: &Polynomial, q_km3: &Polynomial) -> Polynomial {
        let quad = Polynomial::new(vec![self.c_k, self.b_k, 1.0]);
        let cubic = Polynomial::new(vec![0.0, self.f_k, self.e_k]);
        quad.mul(p_km2).add(&cubic.mul(q_km3)).scale(self.a_k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct B13Coeffs {
    pub c_k: f64,
    pub d_k: f64,
    pub f_k: f64,
    pub g_k: f64,
    pub delta_prime_k: f64,
    pub system: System3,
}

impl B13Coeffs {
    /// `(C_k x + D_k) P⁽¹⁾_{k-3} + (x² + F_k x + G_k) P⁽¹⁾_{k-2}`
    pub fn polynomial(&self, q_km3: &Polynomial, q_km2: &Polynomial) -> Polynomial {
        let lin = Polynomial::new(vec![self.d_k, self.c_k]);
        let quad = Polynomial::new(vec![self.g_k, self.f_k, 1.0]);
        lin.mul(q_km3).add(&quad.mul(q_km2))
    }
}

/// A13 coefficients from the functional values of one step.
///
/// `E_k` comes from the orthogonality condition at `i = k-4`; `(B_k, C_k, F_k)`
/// solve the conditions at `i = k-3, k-2, k-1`; `D_k = G_k = 0` and
/// `A_k = 1 / C_k`.
pub fn a13_coefficients(sp: &ScalarProducts, eps: f64) -> Result<A13Coeffs> {
    let k = sp.degree;
    let (p, q) = (&sp.p_prev, &sp.q_older);
    if !(q[0].abs() >= eps * sp.older_scale()) || !q[0].is_finite() {
        return Err(Error::breakdown(BreakdownKind::True, k));
    }
    let e_k = -p[0] / q[0];
    let system = System3 {
        a: [[p[0], 0.0, q[0]], [p[1], p[0], q[1]], [p[2], p[1], q[2]]],
        b: [-p[1] - e_k * q[1], -p[2] - e_k * q[2], -p[3] - e_k * q[3]],
    };
    let ([b_k, c_k, f_k], delta_k) = system.solve(eps, k)?;
    if !(c_k.abs() > eps * b_k * b_k) {
        return Err(Error::breakdown(BreakdownKind::Normalization, k));
    }
    let a_k = 1.0 / c_k;
    if !a_k.is_finite() {
        return Err(Error::breakdown(BreakdownKind::Normalization, k));
    }
    Ok(A13Coeffs { a_k, b_k, c_k, e_k, f_k, delta_k, system })
}

/// B13 coefficients from the functional values of one step.
///
/// `C_k` comes from the condition at `i = k-4`; `(D_k, F_k, G_k)` solve the
/// conditions at `i = k-3, k-2, k-1`. The leading block is monic (`E_k = 1`)
/// and the cubic and quadratic multipliers of `P⁽¹⁾_{k-3}` vanish.
pub fn b13_coefficients(sp: &ScalarProducts, eps: f64) -> Result<B13Coeffs> {
    let k = sp.degree;
    let (o, q) = (&sp.q_older, &sp.q_prev);
    if !(o[0].abs() >= eps * sp.older_scale()) || !o[0].is_finite() {
        return Err(Error::breakdown(BreakdownKind::True, k));
    }
    let c_k = -q[0] / o[0];
    let system = System3 {
        a: [[o[0], q[0], 0.0], [o[1], q[1], q[0]], [o[2], q[2], q[1]]],
        b: [-q[1] - c_k * o[1], -q[2] - c_k * o[2], -q[3] - c_k * o[3]],
    };
    // a'12 = a'23 divide in the closed-form back-substitution
    let divisor_scale = q[..3].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(q[0].abs() >= eps * divisor_scale) {
        return Err(Error::breakdown(BreakdownKind::Divisor, k));
    }
    let ([d_k, f_k, g_k], delta_prime_k) = system.solve(eps, k)?;
    Ok(B13Coeffs { c_k, d_k, f_k, g_k, delta_prime_k, system })
}

/// One multiplier block of a relation: `(x^0 … x^degree) · family_{k+offset}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub family: Family,
    pub offset: isize,
    pub multiplier_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationForm {
    pub name: String,
    pub target: Family,
    pub terms: Vec<Term>,
}

const fn term(family: Family, offset: isize, multiplier_degree: usize) -> Term {
    Term { family, offset, multiplier_degree }
}

impl RelationForm {
    pub fn new(name: &str, target: Family, terms: Vec<Term>) -> Result<Self> {
        let reach = terms.iter().map(|t| t.offset + t.multiplier_degree as isize).max();
        if reach != Some(0) || terms.iter().any(|t| t.offset >= 0) {
            return Err(Error::InvalidInput(format!("relation {name} cannot reach degree k")));
        }
        Ok(RelationForm { name: name.to_string(), target, terms })
    }

    fn known(name: &str, target: Family, terms: [Term; 2]) -> Self {
        RelationForm::new(name, target, terms.to_vec()).expect("built-in forms are degree consistent")
    }

    /// `P_k = (cubic) P_{k-3} + (linear) P⁽¹⁾_{k-1}`
    pub fn a11() -> Self {
        Self::known("A11", Family::P, [term(Family::P, -3, 3), term(Family::P1, -1, 1)])
    }

    /// `P_k = (quadratic) P_{k-2} + (cubic) P⁽¹⁾_{k-3}`
    pub fn a13() -> Self {
        Self::known("A13", Family::P, [term(Family::P, -2, 2), term(Family::P1, -3, 3)])
    }

    /// `P_k = (quadratic) P⁽¹⁾_{k-2} + (cubic) P⁽¹⁾_{k-3}`
    pub fn a14() -> Self {
        Self::known("A14", Family::P, [term(Family::P1, -2, 2), term(Family::P1, -3, 3)])
    }

    /// `P⁽¹⁾_k = (cubic) P_{k-3} + (linear) P_{k-1}`
    pub fn b11() -> Self {
        Self::known("B11", Family::P1, [term(Family::P, -3, 3), term(Family::P, -1, 1)])
    }

    /// `P⁽¹⁾_k = (cubic) P⁽¹⁾_{k-3} + (quadratic) P⁽¹⁾_{k-2}`
    pub fn b13() -> Self {
        Self::known("B13", Family::P1, [term(Family::P1, -3, 3), term(Family::P1, -2, 2)])
    }

    pub fn all() -> Vec<Self> {
        vec![Self::a11(), Self::a13(), Self::a14(), Self::b11(), Self::b13()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Exists,
    Nonexistent,
    Indeterminate,
}

impl Verdict {
    pub fn from_residual(relative_residual: f64) -> Self {
        if relative_residual < EXISTS_TOL {
            Verdict::Exists
        } else if relative_residual > NONEXISTENCE_TOL {
            Verdict::Nonexistent
        } else {
            Verdict::Indeterminate
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub form: RelationForm,
    pub k: usize,
    /// Fitted multiplier coefficients per term, ascending powers.
    pub multipliers: Vec<Vec<f64>>,
    /// `(term, power)` columns that were dependent on earlier ones and fixed at zero.
    pub dropped: Vec<(usize, usize)>,
    pub relative_residual: f64,
    pub exists: bool,
    pub verdict: Verdict,
    pub normalization_ok: bool,
}

impl FitReport {
    /// The fitted polynomial multiplying term `t`.
    pub fn multiplier(&self, t: usize) -> Polynomial {
        Polynomial::new(self.multipliers[t].clone())
    }
}

struct Column {
    term: usize,
    power: usize,
    values: Vec<f64>,
}

/// Centre and spread `(m, h)` of the moment functional: `m = c₁/c₀`,
/// `h² = |c₂/c₀ - m²|`. Falls back to `(0, 1)` when degenerate.
fn functional_window(c: &MomentSequence) -> (f64, f64) {
    let v = c.values();
    if v.len() < 3 || v[0] == 0.0 {
        return (0.0, 1.0);
    }
    let m = v[1] / v[0];
    let h = (v[2] / v[0] - m * m).abs().sqrt();
    if m.is_finite() && h.is_finite() && h > 0.0 {
        (m, h)
    } else {
        (0.0, 1.0)
    }
}

/// Norm in which a relation's defect is measured.
#[derive(Debug, Clone, Copy)]
pub enum FitNorm<'a> {
    /// Euclidean norm of the coefficients in `t = (x - m) / h`, with `m` and
    /// `h` the centre and spread of the functional.
    Coefficients,
    /// `‖p(A) r₀‖`, the size of the polynomial acting on the starting
    /// residual. A norm for degrees below the grade of `r₀`.
    Krylov { a: &'a Matrix, r0: &'a Vector },
}

/// Fit the expanded relation against the oracle target polynomial, with the
/// defect measured in [`FitNorm::Coefficients`].
pub fn fit_relation(form: &RelationForm, c: &MomentSequence, k: usize) -> Result<FitReport> {
    fit_relation_in(form, c, k, FitNorm::Coefficients)
}

/// Fit the expanded relation against the oracle target polynomial.
///
/// Each term contributes the columns `xʲ · poly(family, k + offset)`. Columns
/// are admitted in order of increasing power `j` (then term order) and a
/// column that is numerically dependent on those already admitted is fixed
/// at zero, so small `k` where the design is rank deficient still yields one
/// deterministic fit. One extra row enforces `P(0) = 1` (family P) or a unit
/// leading coefficient (family P1). Multipliers are coefficients of `xʲ`
/// whatever the norm.
pub fn fit_relation_in(form: &RelationForm, c: &MomentSequence, k: usize, norm: FitNorm<'_>) -> Result<FitReport> {
    let target = oracle(c, form.target, k)?;
    let (m, h) = functional_window(c);
    let realize = |p: &Polynomial, scale: f64| -> Result<Vec<f64>> {
        match norm {
            FitNorm::Coefficients => Ok(p.substitute_affine(m, h).padded(k + 1)),
            FitNorm::Krylov { a, r0 } => Ok(poly_matrix_apply(p, a, r0)?.iter().map(|v| v / scale).collect()),
        }
    };
    let target_scale = match norm {
        FitNorm::Coefficients => 1.0,
        FitNorm::Krylov { a, r0 } => {
            let t = poly_matrix_apply(&target, a, r0)?.norm();
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidInput(format!("target vanishes on r0 at degree {k}")));
            }
            t
        }
    };
    let target_t = realize(&target, target_scale)?;
    let rows = target_t.len();
    let normalization = |p: &Polynomial| match form.target {
        Family::P1 => p.padded(k + 1)[k],
        _ => p.coeffs()[0],
    };

    let mut columns = Vec::new();
    for (t, term) in form.terms.iter().enumerate() {
        let degree = k as isize + term.offset;
        if degree < 0 {
            return Err(Error::InvalidInput(format!("{} needs k >= {}", form.name, -term.offset)));
        }
        let base = oracle(c, term.family, degree as usize)?;
        for power in 0..=term.multiplier_degree {
            let shifted = base.shift_mul(power);
            let mut values = realize(&shifted, target_scale)?;
            values.push(normalization(&shifted));
            columns.push(Column { term: t, power, values });
        }
    }
    columns.sort_by_key(|col| (col.power, col.term));

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for col in &columns {
        let mut w = col.values.clone();
        for _ in 0..2 {
            for q in &basis {
                let s: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= s * qi);
            }
        }
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let col_norm = col.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > COLUMN_DEPENDENCE_TOL * col_norm && basis.len() < rows + 1 {
            basis.push(w.iter().map(|v| v / norm).collect());
            kept.push(col);
        } else {
            dropped.push((col.term, col.power));
        }
    }

    let col_norms: Vec<f64> = kept.iter().map(|col| col.values.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let design: Vec<f64> =
        (0..=rows).flat_map(|i| kept.iter().zip(&col_norms).map(move |(col, s)| col.values[i] / s)).collect();
    let design = Matrix::dense(rows + 1, kept.len(), design)?;
    let mut rhs = target_t.clone();
    rhs.push(1.0);
    let (equilibrated, _) = least_squares(&design, &Vector::new(rhs)?)?;
    let fitted: Vec<f64> = equilibrated.iter().zip(&col_norms).map(|(v, s)| v / s).collect();

    let mut multipliers: Vec<Vec<f64>> = form.terms.iter().map(|t| vec![0.0; t.multiplier_degree + 1]).collect();
    for (col, value) in kept.iter().zip(fitted.iter()) {
        multipliers[col.term][col.power] = *value;
    }

    let mut approx = vec![0.0; rows];
    for (col, value) in kept.iter().zip(fitted.iter()) {
        for (a, v) in approx.iter_mut().zip(&col.values[..rows]) {
            *a += value * v;
        }
    }
    let target_norm = target_t.iter().map(|v| v * v).sum::<f64>().sqrt();
    let diff = approx.iter().zip(&target_t).map(|(a, t)| (a - t).powi(2)).sum::<f64>().sqrt();
    let relative_residual = diff / target_norm;

    let fitted_normalization: f64 = kept.iter().zip(fitted.iter()).map(|(col, v)| v * col.values[rows]).sum();
    let normalization_ok = (fitted_normalization - 1.0).abs() <= EXISTS_TOL;
    let verdict = Verdict::from_residual(relative_residual);
    Ok(FitReport {
        form: form.clone(),
        k,
        multipliers,
        dropped,
        relative_residual,
        exists: verdict == Verdict::Exists,
        verdict,
        normalization_ok,
    })
}
