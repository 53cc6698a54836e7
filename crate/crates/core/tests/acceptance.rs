//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the verdict lines always print. A
//! failing criterion is reported, not asserted; the process only exits
//! non-zero if the suite itself cannot run.

use std::time::{Duration, Instant};

use fop_core::fixtures::{random_sdd, MomentFixture};
use fop_core::solver::{solve_observed, StepView};
use fop_core::verify::{verify_relations, VerifyConfig};
use fop_core::{
    a13_coefficients, b13_coefficients, fit_relation, matvec, oracle_p, oracle_p1, poly_matrix_apply, solve,
    transpose_matvec, Matrix, RelationForm, ScalarProducts, SolveStatus, SolverConfig, Vector,
};

const ROT_SEEDS: [u64; 6] = [0, 1, 2, 3, 4, 5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, title: &str, outcome: Outcome, elapsed: Duration) -> bool {
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    println!("criterion {id} {tag}  {title}: {} [{:.2?}]", outcome.detail, elapsed);
    outcome.pass
}

fn rel_inf(fit: &[f64], expected: &[f64]) -> f64 {
    let scale = expected.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diff = fit.iter().zip(expected).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    diff / scale
}

fn relation_table() -> Outcome {
    let report = verify_relations(&VerifyConfig::default()).expect("verify runs");
    let parts: Vec<String> = report
        .forms
        .iter()
        .map(|f| {
            let agree = if f.expected_exists { f.exists_count } else { f.nonexistent_count };
            format!("{} {}/{} med {:.1e}", f.form, agree, f.runs - f.skipped, f.median_residual)
        })
        .collect();
    Outcome { pass: report.all_match, detail: parts.join(", ") }
}

fn coefficient_agreement() -> Outcome {
    let mut worst_fit = 0.0_f64;
    let mut worst_zero = 0.0_f64;
    for seed in &ROT_SEEDS[..3] {
        let fx = MomentFixture::rotation_blocks(12, *seed, 20).expect("fixture");
        for k in 5..=8 {
            let sp = ScalarProducts::from_moments(&fx.moments, k).expect("scalar products");
            let ac = a13_coefficients(&sp, 1e-12).expect("A13 coefficients");
            let fit = fit_relation(&RelationForm::a13(), &fx.moments, k).expect("A13 fit");
            let expected = [ac.a_k * ac.c_k, ac.a_k * ac.b_k, ac.a_k, 0.0, ac.a_k * ac.f_k, ac.a_k * ac.e_k];
            let got = [&fit.multipliers[0][..3], &fit.multipliers[1][..3]].concat();
            worst_fit = worst_fit.max(rel_inf(&got, &expected));
            let scale = expected.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            worst_zero = worst_zero.max(fit.multipliers[1][0].abs() / scale);
            worst_zero = worst_zero.max(fit.multipliers[1][3].abs() / scale);

            let bc = b13_coefficients(&sp, 1e-12).expect("B13 coefficients");
            let fit = fit_relation(&RelationForm::b13(), &fx.moments, k).expect("B13 fit");
            let expected = [bc.d_k, bc.c_k, bc.g_k, bc.f_k, 1.0];
            let got = [&fit.multipliers[0][..2], &fit.multipliers[1][..3]].concat();
            worst_fit = worst_fit.max(rel_inf(&got, &expected));
            let scale = expected.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            worst_zero = worst_zero.max(fit.multipliers[0][2].abs() / scale);
            worst_zero = worst_zero.max(fit.multipliers[0][3].abs() / scale);
            worst_zero = worst_zero.max((fit.multipliers[1][2] - 1.0).abs());
        }
    }
    Outcome {
        pass: worst_fit <= 1e-8 && worst_zero <= 1e-8,
        detail: format!("rotblocks:12 seeds 0-2, k=5..8, coefficients {worst_fit:.1e}, derived zeros {worst_zero:.1e}"),
    }
}

fn recurrence_vs_oracle() -> Outcome {
    let mut worst = 0.0_f64;
    let mut seen = 0;
    let config = SolverConfig { tol: 1e-14, max_iter: Some(8), max_restarts: 0, ..SolverConfig::default() };
    for seed in &ROT_SEEDS[..3] {
        let fx = MomentFixture::rotation_blocks(12, *seed, 20).expect("fixture");
        let x0 = Vector::zeros(12);
        let r0_norm = fx.r0.norm();
        solve_observed(&fx.a, &fx.r0, &x0, &fx.y, &config, |view: &StepView<'_>| {
            let k = view.state.degree();
            if view.restarts > 0 || !(5..=8).contains(&k) {
                return;
            }
            let r = poly_matrix_apply(&oracle_p(&fx.moments, k).unwrap(), &fx.a, &fx.r0).unwrap();
            let z = poly_matrix_apply(&oracle_p1(&fx.moments, k).unwrap(), &fx.a, &fx.r0).unwrap();
            worst = worst.max(view.state.r().sub(&r).norm() / r0_norm);
            worst = worst.max(view.state.z().sub(&z).norm() / r0_norm);
            seen += 1;
        })
        .expect("solve runs");
    }
    Outcome {
        pass: seen == 12 && worst <= 1e-8,
        detail: format!("rotblocks:12 seeds 0-2, {seen}/12 steps checked, max error {worst:.1e}·‖r0‖"),
    }
}

/// Direct tridiagonal solve by forward elimination and back substitution.
fn thomas(n: usize, lower: f64, diag: f64, upper: f64, rhs: &[f64]) -> Vector {
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let m = diag - if i > 0 { lower * c[i - 1] } else { 0.0 };
        c[i] = upper / m;
        d[i] = (rhs[i] - if i > 0 { lower * d[i - 1] } else { 0.0 }) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Vector::new(d).expect("finite solution")
}

fn tridiag_convergence() -> Outcome {
    let n = 50;
    let a = Matrix::tridiagonal(n, -1.0, 2.0, -1.0);
    let ones = Vector::ones(n);
    let b = matvec(&a, &ones).unwrap();
    let config = SolverConfig { tol: 1e-8, max_iter: Some(60), max_restarts: 3, ..SolverConfig::default() };
    let start = Instant::now();
    let (x, report) = solve(&a, &b, &Vector::zeros(n), &config).expect("solve runs");
    let elapsed = start.elapsed();
    let direct = thomas(n, -1.0, 2.0, -1.0, b.as_slice());
    let err = x.sub(&direct).norm_inf();
    let pass = report.status == SolveStatus::Converged
        && report.final_relative_residual <= 1e-8
        && report.iterations <= 60
        && report.restarts.len() <= 3
        && err <= 1e-6
        && elapsed < Duration::from_secs(1);
    Outcome {
        pass,
        detail: format!(
            "tridiag:50 status {:?}, {} iterations, {} restarts, residual {:.1e}, error {:.1e}",
            report.status,
            report.iterations,
            report.restarts.len(),
            report.final_relative_residual,
            err
        ),
    }
}

fn finite_termination() -> Outcome {
    let a = random_sdd(6, 0);
    let b = matvec(&a, &Vector::ones(6)).unwrap();
    let config = SolverConfig { tol: 1e-10, max_iter: Some(6), max_restarts: 0, ..SolverConfig::default() };
    let (_, report) = solve(&a, &b, &Vector::zeros(6), &config).expect("solve runs");
    Outcome {
        pass: report.final_relative_residual <= 1e-10,
        detail: format!(
            "randsdd:6,0 status {:?} after {} iterations, relative residual {:.1e}",
            report.status, report.iterations, report.final_relative_residual
        ),
    }
}

fn orthogonality_suite() -> Outcome {
    let mut worst_orth = 0.0_f64;
    let mut worst_consistency = 0.0_f64;
    let config = SolverConfig { tol: 1e-10, ..SolverConfig::default() };
    for seed in ROT_SEEDS {
        let fx = MomentFixture::rotation_blocks(12, seed, 4).expect("fixture");
        let x0 = Vector::zeros(12);
        let b_norm = fx.r0.norm();
        let mut u = vec![fx.y.clone()];
        while u.len() < 8 {
            u.push(transpose_matvec(&fx.a, u.last().unwrap()).unwrap());
        }
        solve_observed(&fx.a, &fx.r0, &x0, &fx.y, &config, |view: &StepView<'_>| {
            let st = view.state;
            let true_r = fx.r0.sub(&matvec(&fx.a, st.x()).unwrap());
            worst_consistency = worst_consistency.max(true_r.sub(st.r()).norm() / b_norm);
            let k = st.degree();
            if view.restarts == 0 && k <= 8 {
                let r_norm = st.r().norm();
                for u_i in &u[..k] {
                    worst_orth = worst_orth.max(u_i.dot(st.r()).abs() / (u_i.norm() * r_norm));
                }
            }
        })
        .expect("solve runs");
    }
    Outcome {
        pass: worst_orth <= 1e-6 && worst_consistency <= 1e-6,
        detail: format!(
            "rotblocks:12 seeds 0-5, orthogonality {worst_orth:.1e}, consistency {worst_consistency:.1e}·‖b‖"
        ),
    }
}

fn determinism() -> Outcome {
    let run = || {
        let a = random_sdd(40, 11);
        let b = matvec(&a, &Vector::ones(40)).unwrap();
        let config = SolverConfig { tol: 1e-12, max_restarts: 4, seed: 42, ..SolverConfig::default() };
        let (x, report) = solve(&a, &b, &Vector::zeros(40), &config).expect("solve runs");
        let bits: Vec<u64> = x.as_slice().iter().map(|v| v.to_bits()).collect();
        (bits, format!("{report:?}"), report.restarts.len())
    };
    let (first, second) = (run(), run());
    let tridiag = || {
        let a = Matrix::tridiagonal(50, -1.0, 2.0, -1.0);
        let b = matvec(&a, &Vector::ones(50)).unwrap();
        let config = SolverConfig { max_iter: Some(60), max_restarts: 3, seed: 7, ..SolverConfig::default() };
        let (x, report) = solve(&a, &b, &Vector::zeros(50), &config).expect("solve runs");
        let bits: Vec<u64> = x.as_slice().iter().map(|v| v.to_bits()).collect();
        (bits, format!("{report:?}"), report.restarts.len())
    };
    let (third, fourth) = (tridiag(), tridiag());
    Outcome {
        pass: first == second && third == fourth,
        detail: format!(
            "randsdd:40,11 (restarts: {}) and tridiag:50 (restarts: {}) repeated bit for bit",
            first.2, third.2
        ),
    }
}

fn main() {
    type Check = fn() -> Outcome;
    let checks: [(&str, Check, Duration); 7] = [
        ("relation table", relation_table, Duration::from_secs(10)),
        ("coefficient agreement", coefficient_agreement, Duration::MAX),
        ("recurrence vs oracle vectors", recurrence_vs_oracle, Duration::MAX),
        ("solver convergence", tridiag_convergence, Duration::MAX),
        ("finite termination", finite_termination, Duration::MAX),
        ("orthogonality and consistency", orthogonality_suite, Duration::MAX),
        ("determinism", determinism, Duration::MAX),
    ];
    let suite = Instant::now();
    let mut passed = 0;
    for (i, (title, check, budget)) in checks.into_iter().enumerate() {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if elapsed > budget {
            outcome.pass = false;
            outcome.detail.push_str(&format!(", over the {budget:?} budget"));
        }
        if report(i + 1, title, outcome, elapsed) {
            passed += 1;
        }
    }
    println!("acceptance: {passed}/7 criteria passed in {:.2?}", suite.elapsed());
}
