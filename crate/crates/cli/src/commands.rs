use onecopy_core::asymptotics::BOUND_SLACK;
use onecopy_core::{
    block_spectrum, bound_chain, compare_oracle, fh_slope_from_series, fit_log, integral_check, report,
    saturation_test, scan, BlockSpectrum, FhFit, MethodPair, ModelSpec, Quantity, ScalingFit, ScanRow, ScanSeries,
    ToeplitzCoeffs,
};
use serde::{Deserialize, Serialize};

use crate::args::{CheckKind, Format, RunConfig, Task};
use crate::emit::{to_csv, to_json};
use crate::CliError;

/// Allowed distance of the integral from `-1/6`.
pub const INTEGRAL_TOL: f64 = 1e-9;
/// Quadrature tolerance requested by the integral check.
pub const INTEGRAL_QUAD_TOL: f64 = 1e-12;
/// Allowed Gaussian/exact-diagonalization spectrum difference.
pub const ORACLE_TOL: f64 = 1e-8;
/// Smallest many-body gap for which the oracle comparison counts.
pub const ORACLE_MIN_GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub fit: ScalingFit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturated: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ModelSpec,
    pub critical: bool,
    pub grid: Vec<usize>,
    pub rows: Vec<ScanRow>,
    pub fits: Vec<FitEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fisher_hartwig: Option<FhFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    #[serde(with = "onecopy_core::serde_ext")]
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub model: ModelSpec,
    pub checks: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Bytes to emit, and whether the run counts as a failed check.
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub check_failed: bool,
    pub failed_rows: usize,
    /// Lines destined for stderr.
    pub log: Vec<String>,
}

fn json<T: Serialize>(r: &T) -> Result<Vec<u8>, CliError> {
    to_json(r).map_err(|e| CliError::Io(e.to_string()))
}

fn progress(log: &mut Vec<String>, rows: &[ScanRow]) {
    for r in rows {
        log.push(match &r.error {
            None => format!(
                "L={} e1_cont_bits={:.6} entropy_bits={:.6}",
                r.block_len, r.e1_cont_bits, r.entropy_bits
            ),
            Some(e) => format!("L={} failed: {e}", r.block_len),
        });
    }
}

fn without_spectra(mut s: ScanSeries) -> ScanSeries {
    s.spectra.clear();
    s
}

pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut log = Vec::new();
    let mut check_failed = false;
    let mut failed_rows = 0;
    let bytes = match &config.task {
        Task::Analyze {
            model,
            block_len,
            options,
        } => json(&report(model, *block_len, options)?)?,
        Task::Scan { model, grid, tol } => {
            let series = without_spectra(scan(model, grid, *tol)?);
            progress(&mut log, &series.rows);
            failed_rows = series.rows.iter().filter(|r| r.is_failed()).count();
            match config.format {
                Format::Json => json(&series)?,
                Format::Csv => to_csv(&series),
            }
        }
        Task::Fit {
            model,
            grid,
            tol,
            quantities,
            window,
            saturation_eps,
            fisher_hartwig,
        } => {
            let series = scan(model, grid, *tol)?;
            progress(&mut log, &series.rows);
            failed_rows = series.rows.iter().filter(|r| r.is_failed()).count();
            let fits = quantities
                .iter()
                .map(|&q| fit_entry(&series, q, *window, *saturation_eps))
                .collect::<Result<Vec<_>, CliError>>()?;
            let fisher_hartwig = if *fisher_hartwig {
                Some(fh_slope_from_series(&series)?)
            } else {
                None
            };
            let series = without_spectra(series);
            json(&FitReport {
                model: series.model,
                critical: series.critical,
                grid: series.grid,
                rows: series.rows,
                fits,
                fisher_hartwig,
            })?
        }
        Task::Oracle {
            model,
            n,
            block_len,
            pair,
        } => json(&compare_oracle(model, *n, *block_len, *pair)?)?,
        Task::Check {
            checks,
            model,
            block_len,
            tol,
        } => {
            let mut outcomes = Vec::new();
            for kind in checks {
                match kind {
                    CheckKind::Integral => outcomes.push(check_integral()),
                    CheckKind::Oracle => outcomes.extend(check_oracle()),
                    CheckKind::BoundChain => outcomes.push(check_bound_chain(model, *block_len, *tol)),
                }
            }
            for c in &outcomes {
                log.push(format!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
            }
            let r = CheckReport {
                model: model.clone(),
                checks: outcomes,
            };
            check_failed = !r.passed();
            json(&r)?
        }
    };
    Ok(Outcome {
        bytes,
        check_failed,
        failed_rows,
        log,
    })
}

fn fit_entry(
    series: &ScanSeries,
    q: Quantity,
    window: (usize, usize),
    eps: Option<f64>,
) -> Result<FitEntry, CliError> {
    Ok(FitEntry {
        fit: fit_log(series, q, window)?,
        saturated: eps.map(|e| saturation_test(series, q, e)).transpose()?,
    })
}

fn check_integral() -> CheckOutcome {
    let reference = -1.0 / 6.0;
    match integral_check(INTEGRAL_QUAD_TOL) {
        Ok(c) => CheckOutcome {
            name: "integral".into(),
            pass: (c.value_natural_log - reference).abs() <= INTEGRAL_TOL,
            value: c.value_natural_log,
            reference,
            tolerance: INTEGRAL_TOL,
            detail: format!(
                "natural log {:.15}, log2 {:.15}, error estimate {:.1e}",
                c.value_natural_log, c.value_log2, c.error_estimate
            ),
        },
        Err(e) => failed("integral", reference, INTEGRAL_TOL, e),
    }
}

fn failed(name: &str, reference: f64, tolerance: f64, e: impl std::fmt::Display) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        pass: false,
        value: f64::NAN,
        reference,
        tolerance,
        detail: e.to_string(),
    }
}

fn check_oracle() -> Vec<CheckOutcome> {
    let cases = [
        (ModelSpec::xx(2.0).expect("xx preset"), 10, 5),
        (ModelSpec::ising(), 9, 3),
    ];
    cases
        .into_iter()
        .map(|(model, n, l)| {
            let name = format!("oracle {} n={n} L={l}", label(&model));
            match compare_oracle(&model, n, l, MethodPair::GaussianVsEd) {
                Ok(c) => CheckOutcome {
                    pass: c.max_abs_diff < ORACLE_TOL && c.gap > ORACLE_MIN_GAP,
                    value: c.max_abs_diff,
                    reference: 0.0,
                    tolerance: ORACLE_TOL,
                    detail: format!("max abs diff {:.3e}, many-body gap {:.6e}", c.max_abs_diff, c.gap),
                    name,
                },
                Err(e) => failed(&name, 0.0, ORACLE_TOL, e),
            }
        })
        .collect()
}

fn check_bound_chain(model: &ModelSpec, block_len: usize, tol: f64) -> CheckOutcome {
    let name = format!("bound chain L={block_len}");
    let spectrum: Result<BlockSpectrum, onecopy_core::Error> = ToeplitzCoeffs::compute(model, block_len, tol)
        .and_then(|c| c.toeplitz(block_len))
        .and_then(|t| block_spectrum(&t));
    match spectrum {
        Ok(s) => {
            let b = bound_chain(&s);
            let excess = (b.mid - b.lhs).max(b.lhs - b.rhs);
            CheckOutcome {
                pass: b.forced_relations_hold(),
                value: excess,
                reference: 0.0,
                tolerance: BOUND_SLACK,
                detail: format!("lhs {:.12e}, mid {:.12e}, rhs {:.12e}", b.lhs, b.mid, b.rhs),
                name,
            }
        }
        Err(e) => failed(&name, 0.0, BOUND_SLACK, e),
    }
}

fn label(model: &ModelSpec) -> String {
    use onecopy_core::ModelLabel;
    match &model.label {
        ModelLabel::Xx { a } => format!("xx(a={a})"),
        ModelLabel::Xy { a, gamma } => format!("xy(a={a}, gamma={gamma})"),
        ModelLabel::Ising => "ising".into(),
        ModelLabel::Custom => "custom".into(),
    }
}
