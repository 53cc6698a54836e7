use serde::{Deserialize, Serialize};

use fop_core::solver::RestartEvent;
use fop_core::{SolveReport, SolveStatus, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixInfo {
    pub source: String,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub tol: f64,
    pub max_iter: usize,
    pub max_restarts: usize,
    pub seed: u64,
    pub breakdown_eps: f64,
    pub rhs: String,
}

/// The JSON document written by `fop solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveJson {
    pub status: String,
    pub iterations: usize,
    pub restarts: usize,
    pub restart_events: Vec<RestartEvent>,
    pub final_residual: f64,
    pub config: ConfigEcho,
    pub matrix: MatrixInfo,
}

pub fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIterations => "max_iterations",
        SolveStatus::BreakdownExhausted => "breakdown_exhausted",
    }
}

impl SolveJson {
    pub fn new(report: &SolveReport, config: &SolverConfig, rhs: &str, matrix: MatrixInfo) -> Self {
        SolveJson {
            status: status_name(report.status).to_string(),
            iterations: report.iterations,
            restarts: report.restarts.len(),
            restart_events: report.restarts.clone(),
            final_residual: report.final_relative_residual,
            config: ConfigEcho {
                tol: config.tol,
                max_iter: config.max_iter_for(matrix.rows),
                max_restarts: config.max_restarts,
                seed: config.seed,
                breakdown_eps: config.breakdown_eps,
                rhs: rhs.to_string(),
            },
            matrix,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub k: usize,
    pub residual_norm: f64,
    pub event: String,
}

impl HistoryRow {
    pub fn from_report(report: &SolveReport) -> Vec<HistoryRow> {
        report
            .residual_history
            .iter()
            .map(|h| HistoryRow { k: h.k, residual_norm: h.residual_norm, event: h.event.clone() })
            .collect()
    }
}
