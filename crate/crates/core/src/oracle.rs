//! Brute-force construction of `P_k` and `P⁽¹⁾_k` from their moment systems.
//!
//! This is the ground truth the recurrences and the solver are checked
//! against. Moment systems are Hankel and ill-conditioned, so the oracle is
//! only meant for `k <= 10` at desk scale. Both systems are solved for the
//! moments of `A / s`, with `s` the growth rate of the moments, and the
//! coefficients mapped back; this balances the Hankel rows without changing
//! the polynomials.

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, Vector, DENSE_LIMIT};
use crate::moments::MomentSequence;
use crate::polynomial::{Family, Polynomial};

/// Largest degree the oracle will build.
pub const MAX_ORACLE_DEGREE: usize = DENSE_LIMIT;

fn check_degree(k: usize) -> Result<()> {
    if k > MAX_ORACLE_DEGREE {
        return Err(Error::InvalidInput(format!("oracle degree {k} exceeds {MAX_ORACLE_DEGREE}")));
    }
    Ok(())
}

fn solve_hankel(c: &MomentSequence, k: usize, rhs: Vec<f64>) -> Result<Vector> {
    let h = c.hankel_matrix(k)?;
    match solve_dense(&h, &Vector::from_raw(rhs)) {
        Err(Error::SingularSystem { .. }) | Err(Error::NumericOverflow) => {
            Err(Error::NonexistentPolynomial { degree: k })
        }
        other => other,
    }
}

/// `P_k` with `P_k(0) = 1` and `c(xⁱ P_k) = 0` for `i < k`.
///
/// Solves `Σ_{j=1..k} α_j c_{i+j} = -c_i`, `i = 0..k-1`.
pub fn oracle_p(c: &MomentSequence, k: usize) -> Result<Polynomial> {
    check_degree(k)?;
    if k == 0 {
        return Ok(Polynomial::with_family(vec![1.0], Family::P));
    }
    c.get(2 * k - 1)?;
    let s = c.growth_rate(2 * k - 1);
    let scaled = c.variable_scaled(s);
    let rhs = (0..k).map(|i| -scaled.values()[i]).collect();
    let alpha = solve_hankel(&scaled, k, rhs)?;
    let mut coeffs = Vec::with_capacity(k + 1);
    coeffs.push(1.0);
    coeffs.extend(alpha.iter().zip(1..).map(|(a, j)| a / s.powi(j)));
    Ok(Polynomial::with_family(coeffs, Family::P))
}

/// Monic `P⁽¹⁾_k` with `c⁽¹⁾(xⁱ P⁽¹⁾_k) = 0` for `i < k`.
///
/// Solves `Σ_{j<k} β_j c_{i+j+1} = -c_{i+k+1}`, `i = 0..k-1`; the matrix is
/// the same `H⁽¹⁾_k` as for [`oracle_p`].
pub fn oracle_p1(c: &MomentSequence, k: usize) -> Result<Polynomial> {
    check_degree(k)?;
    if k == 0 {
        return Ok(Polynomial::with_family(vec![1.0], Family::P1));
    }
    c.get(2 * k)?;
    let s = c.growth_rate(2 * k);
    let scaled = c.variable_scaled(s);
    let rhs = (0..k).map(|i| -scaled.values()[i + k + 1]).collect();
    let beta = solve_hankel(&scaled, k, rhs)?;
    let mut coeffs: Vec<f64> = beta.iter().zip(0..).map(|(b, j)| b * s.powi(k as i32 - j)).collect();
    coeffs.push(1.0);
    Ok(Polynomial::with_family(coeffs, Family::P1))
}

/// Dispatch on family; `Free` is rejected.
pub fn oracle(c: &MomentSequence, family: Family, k: usize) -> Result<Polynomial> {
    match family {
        Family::P => oracle_p(c, k),
        Family::P1 => oracle_p1(c, k),
        Family::Free => Err(Error::InvalidInput("no oracle for free polynomials".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::moments::{apply_functional, compute_moments, Functional};

    fn d2() -> MomentSequence {
        let ones = Vector::ones(2);
        compute_moments(&Matrix::diagonal(&[1.0, 2.0]), &ones, &ones, 6).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn p_examples() {
        let c = d2();
        assert_eq!(oracle_p(&c, 0).unwrap().coeffs(), &[1.0]);
        assert!(close(oracle_p(&c, 1).unwrap().coeffs(), &[1.0, -2.0 / 3.0], 1e-15));
        assert!(close(oracle_p(&c, 2).unwrap().coeffs(), &[1.0, -1.5, 0.5], 1e-13));
    }

    #[test]
    fn p1_examples() {
        let c = d2();
        assert_eq!(oracle_p1(&c, 0).unwrap().coeffs(), &[1.0]);
        let p = oracle_p1(&c, 1).unwrap();
        assert!(close(p.coeffs(), &[-5.0 / 3.0, 1.0], 1e-15));
        assert_eq!(oracle_p1(&c, 2).unwrap().leading(), 1.0);
    }

    #[test]
    fn degree_beyond_spectrum_is_nonexistent() {
        // two eigenvalues, so H_3 vanishes
        let c = d2();
        assert_eq!(oracle_p(&c, 3).unwrap_err(), Error::NonexistentPolynomial { degree: 3 });
        assert_eq!(oracle_p1(&c, 3).unwrap_err(), Error::NonexistentPolynomial { degree: 3 });
    }

    #[test]
    fn insufficient_moments() {
        let c = MomentSequence::from_values(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(oracle_p(&c, 2), Err(Error::MomentRangeExceeded { .. })));
        assert!(oracle_p(&c, 11).is_err());
    }

    #[test]
    fn orthogonality_on_diag_fixture() {
        let vals: Vec<f64> = (1..=8).map(f64::from).collect();
        let ones = Vector::ones(8);
        let c = compute_moments(&Matrix::diagonal(&vals), &ones, &ones, 12).unwrap();
        for k in 1..=5 {
            let tol = 1e-10 * c.values()[..=2 * k].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let p = oracle_p(&c, k).unwrap();
            assert_eq!(p.coeffs()[0], 1.0);
            for i in 0..k {
                assert!(apply_functional(&c, &p, Functional::C, i).unwrap().abs() < tol);
            }
            assert!(apply_functional(&c, &p, Functional::C, k).unwrap().abs() > tol);
            let q = oracle_p1(&c, k).unwrap();
            assert_eq!(q.leading(), 1.0);
            for i in 0..k {
                assert!(apply_functional(&c, &q, Functional::C1, i).unwrap().abs() < tol);
            }
        }
    }
}
