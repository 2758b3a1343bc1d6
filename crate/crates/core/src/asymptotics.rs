//! Block-length scans and the scaling laws read off them.

use std::f64::consts::{LN_2, PI};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entangle::single_copy_e1_ln;
use crate::error::{Error, Result};
use crate::model::{classify_criticality, ModelSpec, DEFAULT_ROOT_TOL};
use crate::quad;
use crate::toeplitz::{block_spectrum, BlockSpectrum, ToeplitzCoeffs, DEFAULT_ABS_TOL};

pub const MAX_SCAN_LEN: usize = 4096;
pub const DEFAULT_SATURATION_EPS: f64 = 0.01;
pub const BOUND_SLACK: f64 = 1e-10;

/// Per-row scalar selected for fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "e1_cont_bits")]
    E1Cont,
    #[serde(rename = "E1_bits")]
    E1,
    #[serde(rename = "entropy_bits")]
    Entropy,
    #[serde(rename = "ln_absdet_T")]
    LnAbsdetT,
    #[serde(rename = "rms_term_bits")]
    RmsTerm,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::E1Cont,
        Quantity::E1,
        Quantity::Entropy,
        Quantity::LnAbsdetT,
        Quantity::RmsTerm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::E1Cont => "e1_cont_bits",
            Quantity::E1 => "E1_bits",
            Quantity::Entropy => "entropy_bits",
            Quantity::LnAbsdetT => "ln_absdet_T",
            Quantity::RmsTerm => "rms_term_bits",
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown quantity {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "L")]
    pub block_len: usize,
    #[serde(with = "crate::serde_ext")]
    pub e1_cont_bits: f64,
    #[serde(rename = "E1_bits", with = "crate::serde_ext")]
    pub e1_bits: f64,
    #[serde(with = "crate::serde_ext")]
    pub entropy_bits: f64,
    #[serde(rename = "ln_absdet_T", with = "crate::serde_ext")]
    pub ln_absdet_t: f64,
    #[serde(with = "crate::serde_ext")]
    pub rms_term_bits: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScanRow {
    fn from_spectrum(s: &BlockSpectrum) -> Result<Self> {
        let e1 = single_copy_e1_ln(s.ln_alpha1)?;
        Ok(ScanRow {
            block_len: s.block_len,
            e1_cont_bits: e1.e1_cont_bits,
            e1_bits: e1.e1_bits,
            entropy_bits: s.entropy_bits,
            ln_absdet_t: s.ln_absdet_t,
            rms_term_bits: s.rms_term_bits,
            error: None,
        })
    }

    fn failed(block_len: usize, e: &Error) -> Self {
        ScanRow {
            block_len,
            e1_cont_bits: f64::NAN,
            e1_bits: f64::NAN,
            entropy_bits: f64::NAN,
            ln_absdet_t: f64::NAN,
            rms_term_bits: f64::NAN,
            error: Some(e.to_string()),
        }
    }

    pub fn get(&self, q: Quantity) -> f64 {
        match q {
            Quantity::E1Cont => self.e1_cont_bits,
            Quantity::E1 => self.e1_bits,
            Quantity::Entropy => self.entropy_bits,
            Quantity::LnAbsdetT => self.ln_absdet_t,
            Quantity::RmsTerm => self.rms_term_bits,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSeries {
    pub model: ModelSpec,
    pub critical: bool,
    pub grid: Vec<usize>,
    pub rows: Vec<ScanRow>,
    /// Singular values behind each successful row.
    #[serde(skip)]
    pub spectra: Vec<Option<BlockSpectrum>>,
}

impl ScanSeries {
    /// Successful rows with `lo <= L <= hi`.
    pub fn window(&self, lo: usize, hi: usize) -> impl Iterator<Item = &ScanRow> {
        self.rows
            .iter()
            .filter(move |r| !r.is_failed() && r.block_len >= lo && r.block_len <= hi)
    }

    pub fn row(&self, block_len: usize) -> Option<&ScanRow> {
        self.rows.iter().find(|r| r.block_len == block_len)
    }
}

/// Geometric grid `l_min · 2^(k/per_octave)`, rounded, up to `l_max`.
pub fn geometric_grid(l_min: usize, l_max: usize, per_octave: usize) -> Result<Vec<usize>> {
    if l_min == 0 || l_min > l_max || per_octave == 0 {
        return Err(Error::InvalidArgument(format!(
            "bad grid: L_min = {l_min}, L_max = {l_max}, per octave = {per_octave}"
        )));
    }
    let mut grid = Vec::new();
    for k in 0.. {
        let l = (l_min as f64 * (k as f64 / per_octave as f64).exp2()).round() as usize;
        if l > l_max {
            break;
        }
        if grid.last() != Some(&l) {
            grid.push(l);
        }
    }
    if grid.last() != Some(&l_max) && (l_max as f64) > *grid.last().unwrap() as f64 * 1.01 {
        grid.push(l_max);
    }
    Ok(grid)
}

/// `L = 64 .. 2048`, two points per octave.
pub fn default_grid() -> Vec<usize> {
    geometric_grid(64, 2048, 2).expect("static grid")
}

pub fn scan(model: &ModelSpec, grid: &[usize], abs_tol: f64) -> Result<ScanSeries> {
    validate_grid(grid)?;
    let critical = classify_criticality(model, DEFAULT_ROOT_TOL)?.critical;
    let l_max = *grid.last().unwrap();
    let coeffs = ToeplitzCoeffs::compute(model, l_max, abs_tol)?;
    let results: Vec<(ScanRow, Option<BlockSpectrum>)> = grid
        .par_iter()
        .map(|&l| {
            let spectrum = coeffs.toeplitz(l).and_then(|t| block_spectrum(&t));
            match spectrum.and_then(|s| ScanRow::from_spectrum(&s).map(|r| (r, s))) {
                Ok((row, s)) => (row, Some(s)),
                Err(e) => (ScanRow::failed(l, &e), None),
            }
        })
        .collect();
    let (rows, spectra) = results.into_iter().unzip();
    Ok(ScanSeries {
        model: model.clone(),
        critical,
        grid: grid.to_vec(),
        rows,
        spectra,
    })
}

fn validate_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() || grid[0] == 0 {
        return Err(Error::InvalidArgument("grid must be non-empty with L >= 1".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    if *grid.last().unwrap() > MAX_SCAN_LEN {
        return Err(Error::InvalidArgument(format!("L above {MAX_SCAN_LEN}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTermFit {
    /// Coefficient of `log₂ L`.
    pub a: f64,
    /// Coefficient of `log₂ log₂ L`.
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub quantity: String,
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub grid_range: (usize, usize),
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_term: Option<TwoTermFit>,
}

/// Least squares of `quantity` against `log₂ L` over `window`.
pub fn fit_log(series: &ScanSeries, quantity: Quantity, window: (usize, usize)) -> Result<ScalingFit> {
    let (xs, ys, ls) = collect_points(series, quantity, window);
    let mut fit = fit_points(quantity.name(), &xs, &ys, &ls)?;
    if ls.iter().all(|&l| l >= 3) && xs.len() >= 4 {
        fit.two_term = two_term(&xs, &ys).ok();
    }
    Ok(fit)
}

fn collect_points(series: &ScanSeries, q: Quantity, window: (usize, usize)) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ls = Vec::new();
    for r in series.window(window.0, window.1) {
        let y = r.get(q);
        if y.is_finite() {
            xs.push((r.block_len as f64).log2());
            ys.push(y);
            ls.push(r.block_len);
        }
    }
    (xs, ys, ls)
}

fn fit_points(name: &str, xs: &[f64], ys: &[f64], ls: &[usize]) -> Result<ScalingFit> {
    let (slope, intercept, rms) = ols(xs, ys)?;
    Ok(ScalingFit {
        quantity: name.to_string(),
        slope,
        intercept,
        rms_residual: rms,
        grid_range: (*ls.first().unwrap(), *ls.last().unwrap()),
        points: xs.len(),
        two_term: None,
    })
}

/// `(slope, intercept, rms residual)` of `y ≈ slope·x + intercept`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(Error::InvalidArgument(format!("need at least 3 points, got {n}")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 1e-300) {
        return Err(Error::InvalidArgument("degenerate design: all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok((slope, intercept, (rss / n as f64).sqrt()))
}

fn two_term(xs: &[f64], ys: &[f64]) -> Result<TwoTermFit> {
    let n = xs.len();
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => xs[i],
        1 => xs[i].log2(),
        _ => 1.0,
    });
    let svd = design.svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-10 * sv.max() {
        return Err(Error::InvalidArgument("degenerate two-term design".into()));
    }
    let coef = svd
        .solve(&DVector::from_column_slice(ys), 0.0)
        .map_err(|e| Error::InvalidArgument(e.into()))?;
    Ok(TwoTermFit {
        a: coef[0],
        b: coef[1],
        c: coef[2],
    })
}

/// Spread of `quantity` over the top octave of the grid is below `epsilon`.
pub fn saturation_test(series: &ScanSeries, quantity: Quantity, epsilon: f64) -> Result<bool> {
    let ok: Vec<&ScanRow> = series.rows.iter().filter(|r| !r.is_failed()).collect();
    let (Some(first), Some(last)) = (ok.first(), ok.last()) else {
        return Err(Error::InvalidArgument("no successful rows".into()));
    };
    if last.block_len < 4 * first.block_len {
        return Err(Error::InvalidArgument("grid must span at least two octaves".into()));
    }
    let top = last.block_len as f64 / 2.0;
    let values: Vec<f64> = ok
        .iter()
        .filter(|r| r.block_len as f64 >= top)
        .map(|r| r.get(quantity))
        .collect();
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(hi - lo < epsilon)
}

/// The three determinant quantities, in natural-log units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundChain {
    /// `-Σ ln((1+μ)/2)`.
    pub lhs: f64,
    /// `-(1/2) Σ ln((1+μ²)/2)`.
    pub mid: f64,
    /// `-(1/2) Σ ln μ`; `+inf` when some `μ` vanishes.
    #[serde(with = "crate::serde_ext")]
    pub rhs: f64,
}

impl BoundChain {
    /// `lhs ≥ mid` and `lhs ≤ rhs`, both forced factor by factor.
    pub fn forced_relations_hold(&self) -> bool {
        self.lhs >= self.mid - BOUND_SLACK && (self.rhs.is_infinite() || self.lhs <= self.rhs + BOUND_SLACK)
    }

    /// `mid ≥ rhs`, which per factor would need `(1+μ²)/2 ≤ μ`.
    pub fn mid_dominates_rhs(&self) -> bool {
        self.mid >= self.rhs
    }
}

pub fn bound_chain(s: &BlockSpectrum) -> BoundChain {
    let mut lhs = 0.0;
    let mut mid = 0.0;
    for &m in &s.mu {
        lhs -= m.ln_1p() - LN_2;
        mid -= 0.5 * ((m * m).ln_1p() - LN_2);
    }
    BoundChain {
        lhs,
        mid,
        rhs: -0.5 * s.ln_absdet_t,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FhFit {
    /// `-ln|det T_L|` against `ln L`.
    pub fit: ScalingFit,
    /// `Σ Re β²` over the jumps of the symbol.
    pub predicted: f64,
    /// Grid points dropped because the determinant vanished.
    pub excluded: Vec<usize>,
}

/// Growth of `-ln|det T_L|` per unit `ln L`.
pub fn fh_slope(model: &ModelSpec, grid: &[usize]) -> Result<FhFit> {
    let series = scan(model, grid, DEFAULT_ABS_TOL)?;
    fh_slope_from_series(&series)
}

pub fn fh_slope_from_series(series: &ScanSeries) -> Result<FhFit> {
    let predicted = classify_criticality(&series.model, DEFAULT_ROOT_TOL)?.fisher_hartwig_exponent();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ls = Vec::new();
    let mut excluded = Vec::new();
    for r in series.rows.iter().filter(|r| !r.is_failed()) {
        if r.ln_absdet_t.is_finite() {
            xs.push((r.block_len as f64).ln());
            ys.push(-r.ln_absdet_t);
            ls.push(r.block_len);
        } else {
            excluded.push(r.block_len);
        }
    }
    let fit = fit_points("neg_ln_absdet_T", &xs, &ys, &ls)?;
    Ok(FhFit {
        fit,
        predicted,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralCheck {
    pub value_natural_log: f64,
    pub value_log2: f64,
    pub error_estimate: f64,
}

/// `ln((1+|x|)/2) / (1-x²)`; finite at `x = ±1` with limit `-1/4`.
pub fn integrand(x: f64) -> f64 {
    half_integrand(1.0 - x.abs())
}

/// The integrand in `s = 1 - |x|`, written so `s → 0` does not cancel.
fn half_integrand(s: f64) -> f64 {
    if s == 0.0 {
        -0.25
    } else {
        (-0.5 * s).ln_1p() / (s * (2.0 - s))
    }
}

/// `(2/π²) ∫₋₁¹ ln((1+|x|)/2)/(1-x²) dx`, which equals `-1/6`.
pub fn integral_check(abs_tol: f64) -> Result<IntegralCheck> {
    if !(abs_tol >= 1e-12) {
        return Err(Error::InvalidArgument("abs_tol must be at least 1e-12".into()));
    }
    let scale = 4.0 / (PI * PI);
    let (half, err) = quad::adaptive(&half_integrand, 0.0, 1.0, abs_tol / scale / 4.0, 1 << 20)?;
    let value = scale * half;
    Ok(IntegralCheck {
        value_natural_log: value,
        value_log2: value / LN_2,
        error_estimate: scale * err,
    })
}
