//! Relation existence table over seeded random fixtures.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fixtures::MomentFixture;
use crate::recurrences::{fit_relation_in, FitNorm, RelationForm, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub n: usize,
    pub runs: usize,
    pub base_seed: u64,
    /// Degree at which the nonexistent forms (A11, B11) are fitted.
    pub k_nonexistence: usize,
    /// Degree at which the existing forms (A13, A14, B13) are fitted.
    pub k_existence: usize,
    /// Fraction of evaluated runs that must agree for a consensus.
    pub consensus_fraction: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { n: 10, runs: 20, base_seed: 0, k_nonexistence: 6, k_existence: 7, consensus_fraction: 0.95 }
    }
}

/// Whether each built-in form is expected to exist.
pub fn expected_existence(form: &RelationForm) -> bool {
    matches!(form.name.as_str(), "A13" | "A14" | "B13")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormSummary {
    pub form: String,
    pub k: usize,
    pub runs: usize,
    pub skipped: usize,
    pub exists_count: usize,
    pub nonexistent_count: usize,
    pub indeterminate_count: usize,
    pub consensus: Verdict,
    pub median_residual: f64,
    pub expected_exists: bool,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub forms: Vec<FormSummary>,
    pub all_match: bool,
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Fit every built-in form on `config.runs` seeded fixtures.
///
/// Each relation's defect is measured on the fixture's Krylov space,
/// `‖(fit - target)(A) r₀‖ / ‖target(A) r₀‖`. A fixture on which an oracle
/// polynomial does not exist is counted as skipped and left out of the
/// consensus.
pub fn verify_relations(config: &VerifyConfig) -> Result<VerifyReport> {
    let max_k = config.k_existence.max(config.k_nonexistence);
    let fixtures: Vec<MomentFixture> = (0..config.runs as u64)
        .map(|i| MomentFixture::random_sdd(config.n, config.base_seed + i, 2 * max_k + 2))
        .collect::<Result<_>>()?;

    let forms = RelationForm::all()
        .into_iter()
        .map(|form| {
            let expected_exists = expected_existence(&form);
            let k = if expected_exists { config.k_existence } else { config.k_nonexistence };
            let mut residuals = Vec::new();
            let (mut exists_count, mut nonexistent_count, mut indeterminate_count, mut skipped) = (0, 0, 0, 0);
            for fixture in &fixtures {
                let norm = FitNorm::Krylov { a: &fixture.a, r0: &fixture.r0 };
                match fit_relation_in(&form, &fixture.moments, k, norm) {
                    Ok(fit) => {
                        residuals.push(fit.relative_residual);
                        match fit.verdict {
                            Verdict::Exists => exists_count += 1,
                            Verdict::Nonexistent => nonexistent_count += 1,
                            Verdict::Indeterminate => indeterminate_count += 1,
                        }
                    }
                    Err(_) => skipped += 1,
                }
            }
            let evaluated = residuals.len();
            let need = config.consensus_fraction * evaluated as f64;
            let consensus = if evaluated > 0 && exists_count as f64 >= need {
                Verdict::Exists
            } else if evaluated > 0 && nonexistent_count as f64 >= need {
                Verdict::Nonexistent
            } else {
                Verdict::Indeterminate
            };
            let median_residual = median(&mut residuals);
            let matches = if expected_exists {
                consensus == Verdict::Exists && median_residual < crate::recurrences::EXISTS_TOL
            } else {
                consensus == Verdict::Nonexistent
            };
            FormSummary {
                form: form.name.clone(),
                k,
                runs: config.runs,
                skipped,
                exists_count,
                nonexistent_count,
                indeterminate_count,
                consensus,
                median_residual,
                expected_exists,
                matches,
            }
        })
        .collect::<Vec<_>>();

    let all_match = forms.iter().all(|f| f.matches);
    Ok(VerifyReport { config: config.clone(), forms, all_match })
}
