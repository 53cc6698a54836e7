//! Lanczos-type solver built on the A13/B13 recurrence pair.
//!
//! Degrees 1–4 are produced directly from the moment systems. From degree 5
//! on, each step advances the left window `u_j = (Aᵀ)ʲ y` by one product,
//! reads the twelve functional values as inner products, and updates
//!
//! ```text
//! r_k = A_k [(A² + B_k A + C_k I) r_{k-2} + (E_k A² + F_k A) z_{k-3}]
//! x_k = x_{k-2} - A_k [(A + B_k I) r_{k-2} + (E_k A + F_k I) z_{k-3}]
//! z_k = (C'_k A + D'_k I) z_{k-3} + (A² + F'_k A + G'_k I) z_{k-2}
//! ```
//!
//! with six products by `A` per step. Breakdowns trigger a restart from the
//! best iterate with a freshly drawn `y`.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{BreakdownKind, Error, Result};
use crate::linalg::{matvec, transpose_matvec, Matrix, Vector};
use crate::moments::compute_moments;
use crate::oracle::{oracle_p, oracle_p1};
use crate::recurrences::{a13_coefficients, assemble_scalar_products, b13_coefficients, DEFAULT_BREAKDOWN_EPS};

/// Degree at which the closed-form recurrences take over.
pub const FIRST_RECURRENCE_DEGREE: usize = 5;

const BOOTSTRAP_DEGREE: usize = FIRST_RECURRENCE_DEGREE - 1;

/// Rejection threshold for a redrawn left vector: `|(y, r₀)| < 1e-10 ‖y‖‖r₀‖`.
const LEFT_VECTOR_REJECT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Target for `‖r_k‖ / ‖b‖`.
    pub tol: f64,
    /// Iteration cap; `None` means `2n + 10`.
    pub max_iter: Option<usize>,
    pub max_restarts: usize,
    pub breakdown_eps: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-8, max_iter: None, max_restarts: 5, breakdown_eps: DEFAULT_BREAKDOWN_EPS, seed: 0 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == Some(0) {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if !(self.breakdown_eps > 0.0 && self.breakdown_eps < 1e-6) {
            return Err(Error::InvalidInput(format!(
                "breakdown_eps must lie in (0, 1e-6), got {}",
                self.breakdown_eps
            )));
        }
        Ok(())
    }

    pub fn max_iter_for(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(2 * n + 10)
    }
}

/// Iteration state between steps. Windows are stored newest first.
#[derive(Debug, Clone)]
pub struct SolverState {
    k: usize,
    x0: Vector,
    r0: Vector,
    y: Vector,
    x: [Vector; 2],
    r: [Vector; 2],
    z: [Vector; 3],
    u: VecDeque<Vector>,
    history: Vec<(usize, f64)>,
    converged_at: Option<usize>,
}

impl SolverState {
    /// Degree the next [`step`] will produce.
    pub fn next_degree(&self) -> usize {
        self.k
    }

    /// Degree of the newest iterate.
    pub fn degree(&self) -> usize {
        self.converged_at.unwrap_or(self.k - 1)
    }

    pub fn converged(&self) -> bool {
        self.converged_at.is_some()
    }

    pub fn x(&self) -> &Vector {
        &self.x[0]
    }

    /// Recursively updated residual `r_k = P_k(A) r₀`.
    pub fn r(&self) -> &Vector {
        &self.r[0]
    }

    /// `z_k = P⁽¹⁾_k(A) r₀`.
    pub fn z(&self) -> &Vector {
        &self.z[0]
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    pub fn r0(&self) -> &Vector {
        &self.r0
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    /// Left window `u_{k-3} … u_{k+1}` ahead of the next step.
    pub fn u_window(&self) -> impl Iterator<Item = &Vector> {
        self.u.iter()
    }

    /// `(degree, ‖r_degree‖)` for every degree produced since bootstrap.
    pub fn history(&self) -> &[(usize, f64)] {
        &self.history
    }
}

fn check_system(a: &Matrix, b: &Vector, x0: &Vector, y: &Vector) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: a.cols() });
    }
    let n = a.rows();
    for v in [b, x0, y] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    Ok(n)
}

fn residual(a: &Matrix, b: &Vector, x: &Vector) -> Result<Vector> {
    Ok(b.sub(&matvec(a, x)?))
}

/// Build degrees 1–4 from the moment systems and position the state for
/// degree 5.
///
/// Stops early, with the state marked converged, as soon as some
/// `‖r_j‖ <= tol ‖b‖`. A moment system that is singular before convergence
/// raises [`Error::BootstrapBreakdown`].
pub fn bootstrap(a: &Matrix, b: &Vector, x0: &Vector, y: &Vector, config: &SolverConfig) -> Result<SolverState> {
    check_system(a, b, x0, y)?;
    let threshold = config.tol * b.norm();
    let r0 = residual(a, b, x0)?;

    let mut krylov = vec![r0.clone()];
    for i in 0..BOOTSTRAP_DEGREE {
        krylov.push(matvec(a, &krylov[i])?);
    }
    let moments = compute_moments(a, &r0, y, 2 * BOOTSTRAP_DEGREE + 1)?;

    let mut xs = vec![x0.clone()];
    let mut rs = vec![r0.clone()];
    let mut zs = vec![r0.clone()];
    let mut history = Vec::new();
    let mut converged_at = (r0.norm() <= threshold).then_some(0);

    for j in 1..=BOOTSTRAP_DEGREE {
        if converged_at.is_some() {
            break;
        }
        let p = oracle_p(&moments, j).map_err(|_| Error::BootstrapBreakdown { degree: j })?;
        let alpha = p.coeffs();
        let terms: Vec<(f64, &Vector)> = alpha.iter().copied().zip(&krylov).collect();
        let r_j = Vector::combination(&terms);
        let mut x_j = x0.clone();
        for i in 1..=j {
            x_j.axpy(-alpha[i], &krylov[i - 1]);
        }
        let q = oracle_p1(&moments, j).map_err(|_| Error::BootstrapBreakdown { degree: j })?;
        let terms: Vec<(f64, &Vector)> = q.coeffs().iter().copied().zip(&krylov).collect();
        let z_j = Vector::combination(&terms);

        let norm = r_j.norm();
        history.push((j, norm));
        if norm <= threshold {
            converged_at = Some(j);
        }
        xs.push(x_j);
        rs.push(r_j);
        zs.push(z_j);
    }

    let mut u = VecDeque::with_capacity(5);
    if converged_at.is_none() {
        let mut u_j = y.clone();
        for j in 0..=BOOTSTRAP_DEGREE + 2 {
            if j >= FIRST_RECURRENCE_DEGREE - 3 {
                u.push_back(u_j.clone());
            }
            if j < BOOTSTRAP_DEGREE + 2 {
                u_j = transpose_matvec(a, &u_j)?;
            }
        }
    }

    let last = xs.len() - 1;
    let prev = last.saturating_sub(1);
    let older = last.saturating_sub(2);
    Ok(SolverState {
        k: last + 1,
        x0: x0.clone(),
        r0,
        y: y.clone(),
        x: [xs[last].clone(), xs[prev].clone()],
        r: [rs[last].clone(), rs[prev].clone()],
        z: [zs[last].clone(), zs[prev].clone(), zs[older].clone()],
        u,
        history,
        converged_at,
    })
}

/// Produce degree `k` from degrees `k-1 … k-3` with the A13/B13 recurrences.
///
/// On a breakdown the state is left unchanged.
pub fn step(state: &mut SolverState, a: &Matrix, breakdown_eps: f64) -> Result<()> {
    let k = state.k;
    if state.converged() || k < FIRST_RECURRENCE_DEGREE || state.u.len() != 5 {
        return Err(Error::InvalidInput(format!("state at degree {k} cannot take a recurrence step")));
    }
    let u_next = transpose_matvec(a, state.u.back().expect("window is full"))?;
    let window: Vec<Vector> = state.u.iter().skip(1).cloned().chain([u_next.clone()]).collect();
    let r_km2 = &state.r[1];
    let [_, z_km2, z_km3] = &state.z;
    let sp = assemble_scalar_products(k, &window, r_km2, z_km3, z_km2)?;
    let ac = a13_coefficients(&sp, breakdown_eps)?;
    let bc = b13_coefficients(&sp, breakdown_eps)?;

    let ar = matvec(a, r_km2)?;
    let aar = matvec(a, &ar)?;
    let az3 = matvec(a, z_km3)?;
    let aaz3 = matvec(a, &az3)?;
    let az2 = matvec(a, z_km2)?;
    let aaz2 = matvec(a, &az2)?;

    let r_k = Vector::combination(&[(1.0, &aar), (ac.b_k, &ar), (ac.c_k, r_km2), (ac.e_k, &aaz3), (ac.f_k, &az3)])
        .scaled(ac.a_k);
    let mut x_k = state.x[1].clone();
    x_k.axpy(-ac.a_k, &Vector::combination(&[(1.0, &ar), (ac.b_k, r_km2), (ac.e_k, &az3), (ac.f_k, z_km3)]));
    let z_k = Vector::combination(&[(bc.c_k, &az3), (bc.d_k, z_km3), (1.0, &aaz2), (bc.f_k, &az2), (bc.g_k, z_km2)]);
    if !(r_k.is_finite() && x_k.is_finite() && z_k.is_finite()) {
        return Err(Error::breakdown(BreakdownKind::Ghost, k));
    }

    let norm = r_k.norm();
    state.r.swap(0, 1);
    state.r[0] = r_k;
    state.x.swap(0, 1);
    state.x[0] = x_k;
    state.z.rotate_right(1);
    state.z[0] = z_k;
    state.u.pop_front();
    state.u.push_back(u_next);
    state.history.push((k, norm));
    state.k += 1;
    Ok(())
}

/// Seeded source of fresh left vectors for restarts.
#[derive(Debug, Clone)]
pub struct RestartPolicy {
    rng: ChaCha8Rng,
    count: usize,
    max: usize,
}

impl RestartPolicy {
    pub fn new(config: &SolverConfig) -> Self {
        RestartPolicy { rng: ChaCha8Rng::seed_from_u64(config.seed), count: 0, max: config.max_restarts }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Unit-normal `y`, redrawn while nearly orthogonal to `r0`.
    pub fn draw_left_vector(&mut self, r0: &Vector) -> Vector {
        let r_norm = r0.norm();
        let mut y = Vector::zeros(r0.len());
        for _ in 0..100 {
            y = Vector::from_raw((0..r0.len()).map(|_| StandardNormal.sample(&mut self.rng)).collect());
            if y.dot(r0).abs() >= LEFT_VECTOR_REJECT * y.norm() * r_norm {
                break;
            }
        }
        y
    }
}

/// Restart from `best_x` with a freshly drawn `y`.
pub fn restart(
    best_x: &Vector,
    a: &Matrix,
    b: &Vector,
    config: &SolverConfig,
    policy: &mut RestartPolicy,
) -> Result<SolverState> {
    if policy.count >= policy.max {
        return Err(Error::RestartsExhausted { max: policy.max });
    }
    policy.count += 1;
    let r0 = residual(a, b, best_x)?;
    let y = if r0.norm() <= config.tol * b.norm() { r0.clone() } else { policy.draw_left_vector(&r0) };
    bootstrap(a, b, best_x, &y, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    BreakdownExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartEvent {
    pub iteration: usize,
    pub cause: BreakdownKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub k: usize,
    pub residual_norm: f64,
    pub event: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub restarts: Vec<RestartEvent>,
    pub residual_history: Vec<HistoryEntry>,
    pub final_relative_residual: f64,
}

/// What an observer sees after each accepted bootstrap or step.
pub struct StepView<'a> {
    pub iteration: usize,
    pub restarts: usize,
    pub state: &'a SolverState,
}

/// Solve `Ax = b` with `y = r₀` as the initial left vector.
pub fn solve(a: &Matrix, b: &Vector, x0: &Vector, config: &SolverConfig) -> Result<(Vector, SolveReport)> {
    let r0 = residual(a, b, x0)?;
    solve_observed(a, b, x0, &r0, config, |_| {})
}

/// Solve with an explicit initial left vector `y`.
pub fn solve_with_left_vector(
    a: &Matrix,
    b: &Vector,
    x0: &Vector,
    y: &Vector,
    config: &SolverConfig,
) -> Result<(Vector, SolveReport)> {
    solve_observed(a, b, x0, y, config, |_| {})
}

struct Run<'a> {
    a: &'a Matrix,
    b: &'a Vector,
    threshold: f64,
    max_iter: usize,
    iteration: usize,
    history: Vec<HistoryEntry>,
    restarts: Vec<RestartEvent>,
    best_x: Vector,
    best_norm: f64,
}

impl Run<'_> {
    fn record(&mut self, residual_norm: f64, event: impl Into<String>) {
        self.iteration += 1;
        self.history.push(HistoryEntry { k: self.iteration, residual_norm, event: event.into() });
    }

    fn offer(&mut self, x: &Vector, norm: f64) {
        if norm < self.best_norm {
            self.best_norm = norm;
            self.best_x = x.clone();
        }
    }

    fn finish(self, status: SolveStatus) -> Result<(Vector, SolveReport)> {
        let b_norm = self.b.norm();
        let true_norm = residual(self.a, self.b, &self.best_x)?.norm();
        let final_relative_residual = if b_norm > 0.0 { true_norm / b_norm } else { true_norm };
        let report = SolveReport {
            status,
            iterations: self.iteration,
            restarts: self.restarts,
            residual_history: self.history,
            final_relative_residual,
        };
        Ok((self.best_x, report))
    }
}

/// Full solve loop; `observer` runs after every accepted bootstrap and step.
///
/// Contract violations (dimensions, config) are errors; every numerical
/// outcome is reported through [`SolveReport::status`].
pub fn solve_observed(
    a: &Matrix,
    b: &Vector,
    x0: &Vector,
    y: &Vector,
    config: &SolverConfig,
    mut observer: impl FnMut(&StepView<'_>),
) -> Result<(Vector, SolveReport)> {
    config.validate()?;
    let n = check_system(a, b, x0, y)?;
    let r0 = residual(a, b, x0)?;
    let mut run = Run {
        a,
        b,
        threshold: config.tol * b.norm(),
        max_iter: config.max_iter_for(n),
        iteration: 0,
        history: vec![HistoryEntry { k: 0, residual_norm: r0.norm(), event: "init".into() }],
        restarts: Vec::new(),
        best_x: x0.clone(),
        best_norm: r0.norm(),
    };
    if run.best_norm <= run.threshold {
        return run.finish(SolveStatus::Converged);
    }

    let mut policy = RestartPolicy::new(config);
    let mut attempt = bootstrap(a, b, x0, y, config);
    loop {
        let cause = match attempt {
            Ok(mut state) => {
                let mut cause = None;
                for &(_, norm) in state.history() {
                    if run.iteration >= run.max_iter {
                        return run.finish(SolveStatus::MaxIterations);
                    }
                    run.record(norm, "bootstrap");
                }
                run.offer(state.x(), state.r().norm());
                observer(&StepView { iteration: run.iteration, restarts: run.restarts.len(), state: &state });
                if state.converged() {
                    if residual(a, b, state.x())?.norm() <= run.threshold {
                        return run.finish(SolveStatus::Converged);
                    }
                    cause = Some(BreakdownKind::Ghost);
                }
                while cause.is_none() {
                    if run.iteration >= run.max_iter {
                        return run.finish(SolveStatus::MaxIterations);
                    }
                    match step(&mut state, a, config.breakdown_eps) {
                        Ok(()) => {
                            let norm = state.r().norm();
                            run.record(norm, "step");
                            run.offer(state.x(), norm);
                            observer(&StepView {
                                iteration: run.iteration,
                                restarts: run.restarts.len(),
                                state: &state,
                            });
                            if norm <= run.threshold {
                                if residual(a, b, state.x())?.norm() <= run.threshold {
                                    return run.finish(SolveStatus::Converged);
                                }
                                cause = Some(BreakdownKind::Ghost);
                            }
                        }
                        Err(e) => match e.breakdown_kind() {
                            Some(kind) => cause = Some(kind),
                            None => return Err(e),
                        },
                    }
                }
                cause.expect("loop exits with a cause")
            }
            Err(e) => match e.breakdown_kind() {
                Some(kind) => kind,
                None => return Err(e),
            },
        };

        if run.iteration >= run.max_iter {
            return run.finish(SolveStatus::MaxIterations);
        }
        let restart_norm = residual(a, b, &run.best_x)?.norm();
        run.record(restart_norm, format!("restart:{cause}"));
        run.restarts.push(RestartEvent { iteration: run.iteration, cause });
        if restart_norm <= run.threshold {
            return run.finish(SolveStatus::Converged);
        }
        let best_x = run.best_x.clone();
        match restart(&best_x, a, b, config, &mut policy) {
            Err(Error::RestartsExhausted { .. }) => return run.finish(SolveStatus::BreakdownExhausted),
            other => attempt = other,
        }
        // the restart point's true residual replaces the recursive estimate
        run.best_norm = restart_norm;
    }
}
