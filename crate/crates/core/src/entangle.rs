//! Entanglement quantities of the block reduction.
//!
//! Every eigenvalue of the reduced state of a Gaussian block is a product
//! `∏ (1 ± μ_l)/2`. From the singular values this module derives the
//! deterministic single-copy entanglement `E₁ = log₂⌊1/α₁⌋`, its continuous
//! counterpart `-log₂ α₁`, the block entropy, the probabilistic rate `E_p`
//! (a linear program over ensembles of maximally entangled targets), and the
//! decomposition into particle-number sectors.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp;
use crate::model::{classify_criticality, ModelSpec, DEFAULT_ROOT_TOL};
use crate::toeplitz::{block_spectrum, BlockSpectrum, ToeplitzCoeffs, DEFAULT_ABS_TOL};

const NORM_TOL: f64 = 1e-9;
const MAJORIZATION_SLACK: f64 = 1e-12;
/// Above this many bits `⌊1/α₁⌋` is no longer resolvable in `f64`.
pub const FLOOR_SATURATION_BITS: f64 = 52.0;
pub const MAX_EP_DIMS: usize = 1024;
const FLOOR_GUARD_ULPS: f64 = 4.0;
pub const MAX_SECTOR_MODES: usize = 4096;

/// How a mode's occupation probability is read off `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupation {
    /// Occupied with probability `(1+μ)/2`.
    #[default]
    Plus,
    /// Occupied with probability `(1-μ)/2`.
    Minus,
}

impl Occupation {
    fn nu(self, mu: f64) -> f64 {
        match self {
            Occupation::Plus => 0.5 * (1.0 + mu),
            Occupation::Minus => 0.5 * (1.0 - mu),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumOrigin {
    Explicit,
    DerivedFromMu { mu: Vec<f64>, convention: Occupation },
}

/// A normalized probability vector in non-increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SortedSpectrum {
    pub values: Vec<f64>,
    pub origin: SpectrumOrigin,
}

impl SortedSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let s = SortedSpectrum {
            values,
            origin: SpectrumOrigin::Explicit,
        };
        s.validate()?;
        Ok(s)
    }

    /// Sorts and wraps values that are already known to be a distribution.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    /// The full `2^L` product spectrum; only for small `L`.
    pub fn from_mu(mu: &[f64]) -> Result<Self> {
        if mu.len() > 24 {
            return Err(Error::InvalidArgument(
                "full product spectrum limited to 24 modes".into(),
            ));
        }
        let mut values = vec![1.0];
        for &m in mu {
            let (p, q) = (0.5 * (1.0 + m), 0.5 * (1.0 - m));
            values = values.iter().flat_map(|&v| [v * p, v * q]).collect();
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let s = SortedSpectrum {
            values,
            origin: SpectrumOrigin::DerivedFromMu {
                mu: mu.to_vec(),
                convention: Occupation::Plus,
            },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.values;
        if v.is_empty() {
            return Err(Error::InvalidSpectrum("empty".into()));
        }
        if v.iter().any(|&x| !(-1e-15..=1.0 + 1e-12).contains(&x)) {
            return Err(Error::InvalidSpectrum("entry outside [0, 1]".into()));
        }
        if v.windows(2).any(|w| w[1] > w[0] + 1e-15) {
            return Err(Error::InvalidSpectrum("not sorted non-increasing".into()));
        }
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidSpectrum(format!("sums to {total}")));
        }
        Ok(())
    }

    pub fn alpha1(&self) -> f64 {
        self.values[0]
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.values
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| -x * x.log2())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleCopy {
    #[serde(rename = "E1_bits")]
    pub e1_bits: f64,
    pub e1_cont_bits: f64,
    /// `⌊1/α₁⌋`, saturating at `u64::MAX`.
    #[serde(rename = "M_max")]
    pub m_max: u64,
    /// The floor could not be resolved; `E1_bits` equals `e1_cont_bits`.
    pub floor_saturated: bool,
}

pub fn single_copy_e1(alpha1: f64) -> Result<SingleCopy> {
    if !(alpha1 > 0.0) {
        return Err(Error::InvalidSpectrum(format!("alpha1 = {alpha1}")));
    }
    single_copy_e1_ln(alpha1.ln())
}

/// Same as [`single_copy_e1`] from `ln α₁`, which survives underflow.
pub fn single_copy_e1_ln(ln_alpha1: f64) -> Result<SingleCopy> {
    if ln_alpha1.is_nan() || ln_alpha1 == f64::NEG_INFINITY || ln_alpha1 > 1e-12_f64.ln_1p() {
        return Err(Error::InvalidSpectrum(format!("ln alpha1 = {ln_alpha1}")));
    }
    let ln_a = ln_alpha1.min(0.0);
    let cont = (0.0 - ln_a) / LN_2;
    if cont > FLOOR_SATURATION_BITS {
        let m_max = if cont < 64.0 {
            cont.exp2().floor() as u64
        } else {
            u64::MAX
        };
        return Ok(SingleCopy {
            e1_bits: cont,
            e1_cont_bits: cont,
            m_max,
            floor_saturated: true,
        });
    }
    let alpha = ln_a.exp();
    // Largest M with M·α₁ ≤ 1, where products within a few ulps of 1 count
    // as ties (a renormalized uniform spectrum is rarely exact).
    let limit = 1.0 + FLOOR_GUARD_ULPS * f64::EPSILON;
    let mut m = (1.0 / alpha).floor().max(1.0) as u64;
    while (m + 1) as f64 * alpha <= limit {
        m += 1;
    }
    while m > 1 && m as f64 * alpha > limit {
        m -= 1;
    }
    Ok(SingleCopy {
        e1_bits: (m as f64).log2(),
        e1_cont_bits: cont,
        m_max: m,
        floor_saturated: false,
    })
}

/// Deterministic LOCC conversion into an `M × M` maximally entangled state:
/// every partial sum of the sorted spectrum stays below `K/M`.
pub fn nielsen_transformable(spectrum: &SortedSpectrum, m: usize) -> Result<bool> {
    if m == 0 {
        return Err(Error::InvalidArgument("target dimension must be >= 1".into()));
    }
    spectrum.validate()?;
    let mut partial = 0.0;
    for k in 1..=m {
        partial += spectrum.values.get(k - 1).copied().unwrap_or(0.0);
        if partial > k as f64 / m as f64 + MAJORIZATION_SLACK {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The leading part of a (possibly astronomically long) spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct TopSpectrum {
    /// Largest eigenvalues, non-increasing.
    pub values: Vec<f64>,
    /// Total weight of everything not listed.
    pub tail: f64,
    /// Length of the full spectrum, saturating.
    pub dim: u64,
}

impl TopSpectrum {
    pub fn complete(s: &SortedSpectrum) -> Self {
        TopSpectrum {
            values: s.values.clone(),
            tail: 0.0,
            dim: s.values.len() as u64,
        }
    }

    pub fn is_truncated(&self) -> bool {
        (self.values.len() as u64) < self.dim
    }

    /// A lower bound on `Σ_{j≥l} α_j` (1-based `l`). Exact for `l` inside
    /// the listed part; beyond it every unlisted value is at most the last
    /// listed one.
    pub fn tail_sum_lower(&self, l: usize) -> f64 {
        let r = self.values.len();
        if l as u64 > self.dim {
            return 0.0;
        }
        if l <= r {
            self.values[l - 1..].iter().sum::<f64>() + self.tail
        } else {
            let last = self.values.last().copied().unwrap_or(0.0);
            (self.tail - (l - r - 1) as f64 * last).max(0.0)
        }
    }
}

/// Largest `count` eigenvalues of `∏ (1 ± μ_l)/2`, by best-first expansion
/// over sets of flipped modes (never materializing the full spectrum).
pub fn top_eigenvalues(mu: &[f64], count: usize) -> TopSpectrum {
    let dim = if mu.len() < 64 { 1u64 << mu.len() } else { u64::MAX };
    let ln_top: f64 = mu.iter().map(|&m| m.ln_1p() - LN_2).sum();
    // Flipping mode l multiplies the product by (1-μ)/(1+μ); modes with μ = 1
    // only ever contribute zeros.
    let mut ln_ratio: Vec<f64> = mu
        .iter()
        .filter(|&&m| m < 1.0)
        .map(|&m| (-m).ln_1p() - m.ln_1p())
        .collect();
    ln_ratio.sort_by(|a, b| b.total_cmp(a));

    let mut values = Vec::with_capacity(count.min(1 << 16));
    if count > 0 {
        values.push(ln_top.exp());
    }
    let mut heap = BinaryHeap::new();
    if !ln_ratio.is_empty() {
        heap.push(Candidate {
            ln_value: ln_top + ln_ratio[0],
            last: 0,
        });
    }
    while values.len() < count {
        let Some(c) = heap.pop() else { break };
        values.push(c.ln_value.exp());
        let next = c.last + 1;
        if next < ln_ratio.len() {
            heap.push(Candidate {
                ln_value: c.ln_value + ln_ratio[next],
                last: next,
            });
            heap.push(Candidate {
                ln_value: c.ln_value - ln_ratio[c.last] + ln_ratio[next],
                last: next,
            });
        }
    }
    let listed: f64 = values.iter().sum();
    TopSpectrum {
        tail: (1.0 - listed).max(0.0),
        values,
        dim,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    ln_value: f64,
    last: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ln_value.total_cmp(&other.ln_value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilisticRate {
    #[serde(rename = "Ep_bits")]
    pub ep_bits: f64,
    /// `(M, p_M)` pairs with non-negligible probability.
    pub ensemble: Vec<(u64, f64)>,
    /// Computed from a truncated spectrum; `Ep_bits` is then a lower bound.
    pub truncated: bool,
}

/// Best average `log₂ M` over LOCC conversions into ensembles of maximally
/// entangled states, capped at target dimension `m_max`.
pub fn probabilistic_ep(spectrum: &SortedSpectrum, m_max: usize) -> Result<ProbabilisticRate> {
    spectrum.validate()?;
    probabilistic_ep_top(&TopSpectrum::complete(spectrum), m_max)
}

/// Linear program over `p_M`, `M = 1..cap`:
///
/// ```text
/// max Σ p_M log₂ M   s.t.   Σ p_M = 1,
///     Σ_M p_M · max(0, (M-l+1)/M) ≤ Σ_{j≥l} α_j   for l ≥ 2.
/// ```
///
/// `p_1` never enters a tail constraint, so it is the slack of `Σ_{M≥2} p_M ≤ 1`.
pub fn probabilistic_ep_top(top: &TopSpectrum, m_max: usize) -> Result<ProbabilisticRate> {
    if m_max == 0 || m_max > MAX_EP_DIMS {
        return Err(Error::InvalidArgument(format!(
            "target dimension cap must be in 1..={MAX_EP_DIMS}"
        )));
    }
    if top.values.is_empty() {
        return Err(Error::InvalidSpectrum("empty".into()));
    }
    // Targets of dimension M need Σ_{j≥M} α_j > 0.
    let mut cap = (m_max as u64).min(top.dim) as usize;
    while cap > 1 && top.tail_sum_lower(cap) <= 0.0 {
        cap -= 1;
    }
    if cap == 1 {
        return Ok(ProbabilisticRate {
            ep_bits: 0.0,
            ensemble: vec![(1, 1.0)],
            truncated: top.is_truncated(),
        });
    }

    let dims: Vec<usize> = (2..=cap).collect();
    let c: Vec<f64> = dims.iter().map(|&m| (m as f64).log2()).collect();
    let mut a = Vec::with_capacity(cap);
    let mut b = Vec::with_capacity(cap);
    a.push(vec![1.0; dims.len()]);
    b.push(1.0);
    for l in 2..=cap {
        a.push(
            dims.iter()
                .map(|&m| {
                    if m >= l {
                        (m - l + 1) as f64 / m as f64
                    } else {
                        0.0
                    }
                })
                .collect(),
        );
        b.push(top.tail_sum_lower(l).max(0.0));
    }
    let sol = lp::maximize(&c, &a, &b)?;

    let used: f64 = sol.x.iter().sum();
    let mut ensemble = Vec::new();
    if 1.0 - used > 1e-12 {
        ensemble.push((1, 1.0 - used));
    }
    for (&m, &p) in dims.iter().zip(&sol.x) {
        if p > 1e-12 {
            ensemble.push((m as u64, p));
        }
    }
    ensemble.sort_by_key(|e| std::cmp::Reverse(e.0));
    Ok(ProbabilisticRate {
        ep_bits: sol.objective.max(0.0),
        ensemble,
        truncated: top.is_truncated(),
    })
}

/// One particle-number sector of the reduced state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    #[serde(rename = "N")]
    pub n: usize,
    pub weight: f64,
    pub max_eigenvalue: f64,
}

/// Weights and largest eigenvalues of the fixed-particle-number blocks of a
/// state that is diagonal in mode occupations.
pub fn sector_decompose(mu: &[f64], convention: Occupation) -> Result<Vec<Sector>> {
    if mu.len() > MAX_SECTOR_MODES {
        return Err(Error::InvalidArgument(format!(
            "sector decomposition limited to {MAX_SECTOR_MODES} modes"
        )));
    }
    let nu: Vec<f64> = mu.iter().map(|&m| convention.nu(m)).collect();
    if nu.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidArgument("occupation outside [0, 1]".into()));
    }
    let weights = poisson_binomial(&nu);

    // The best configuration with N particles fills the N modes with the
    // largest odds ν/(1-ν).
    let mut order: Vec<usize> = (0..nu.len()).collect();
    let odds_ln = |v: f64| v.ln() - (1.0 - v).ln();
    order.sort_by(|&i, &j| odds_ln(nu[j]).total_cmp(&odds_ln(nu[i])));
    let mut ln_max = vec![0.0; nu.len() + 1];
    ln_max[0] = nu.iter().map(|&v| (1.0 - v).ln()).sum();
    let mut acc_occ = 0.0;
    let mut acc_empty = ln_max[0];
    for (k, &i) in order.iter().enumerate() {
        acc_occ += nu[i].ln();
        acc_empty -= (1.0 - nu[i]).ln();
        // Recompute the empty part when it picked up an infinity.
        if !acc_empty.is_finite() {
            acc_empty = order[k + 1..].iter().map(|&j| (1.0 - nu[j]).ln()).sum();
        }
        ln_max[k + 1] = acc_occ + acc_empty;
    }

    Ok(weights
        .into_iter()
        .zip(ln_max)
        .enumerate()
        .map(|(n, (weight, ln_m))| Sector {
            n,
            weight,
            max_eigenvalue: ln_m.exp(),
        })
        .collect())
}

/// Distribution of the number of successes of independent Bernoulli trials.
pub fn poisson_binomial(p: &[f64]) -> Vec<f64> {
    let mut dist = vec![0.0; p.len() + 1];
    dist[0] = 1.0;
    for (i, &pi) in p.iter().enumerate() {
        for n in (1..=i + 1).rev() {
            dist[n] = dist[n] * (1.0 - pi) + dist[n - 1] * pi;
        }
        dist[0] *= 1.0 - pi;
    }
    dist
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub with_ep: bool,
    pub with_sectors: bool,
    /// Number of leading reduced eigenvalues fed to the `E_p` program.
    pub ep_dims: usize,
    /// Largest target dimension in the `E_p` program.
    pub ep_m_max: usize,
    /// Keep only the heaviest sectors.
    pub sector_cutoff: Option<usize>,
    pub convention: Occupation,
    pub abs_tol: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            with_ep: false,
            with_sectors: false,
            ep_dims: 256,
            ep_m_max: MAX_EP_DIMS,
            sector_cutoff: None,
            convention: Occupation::Plus,
            abs_tol: DEFAULT_ABS_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(rename = "ln_absdet_T", with = "crate::serde_ext")]
    pub ln_absdet_t: f64,
    pub rms_term_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub model: ModelSpec,
    #[serde(rename = "L")]
    pub block_len: usize,
    pub critical: bool,
    pub alpha1: f64,
    #[serde(rename = "E1_bits")]
    pub e1_bits: f64,
    pub e1_cont_bits: f64,
    #[serde(rename = "M_max")]
    pub m_max: u64,
    pub floor_saturated: bool,
    pub entropy_bits: f64,
    #[serde(
        rename = "Ep_bits",
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_ext::option"
    )]
    pub ep_bits: Option<f64>,
    #[serde(rename = "Ep_ensemble", default, skip_serializing_if = "Option::is_none")]
    pub ep_ensemble: Option<Vec<(u64, f64)>>,
    #[serde(rename = "Ep_truncated", default, skip_serializing_if = "Option::is_none")]
    pub ep_truncated: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sectors: Option<Vec<Sector>>,
    pub diagnostics: Diagnostics,
}

/// Full pipeline for one block length.
pub fn report(model: &ModelSpec, block_len: usize, options: &ReportOptions) -> Result<EntanglementReport> {
    let coeffs = ToeplitzCoeffs::compute(model, block_len, options.abs_tol)?;
    let critical = classify_criticality(model, DEFAULT_ROOT_TOL)?.critical;
    report_from_coeffs(model, &coeffs, block_len, critical, options)
}

/// [`report`] on a precomputed coefficient table.
pub fn report_from_coeffs(
    model: &ModelSpec,
    coeffs: &ToeplitzCoeffs,
    block_len: usize,
    critical: bool,
    options: &ReportOptions,
) -> Result<EntanglementReport> {
    let spectrum = block_spectrum(&coeffs.toeplitz(block_len)?)?;
    report_from_spectrum(model, &spectrum, critical, options)
}

pub fn report_from_spectrum(
    model: &ModelSpec,
    spectrum: &BlockSpectrum,
    critical: bool,
    options: &ReportOptions,
) -> Result<EntanglementReport> {
    let e1 = single_copy_e1_ln(spectrum.ln_alpha1)?;

    let (ep_bits, ep_ensemble, ep_truncated) = if options.with_ep {
        let top = top_eigenvalues(&spectrum.mu, options.ep_dims.max(1));
        let rate = probabilistic_ep_top(&top, options.ep_m_max)?;
        (Some(rate.ep_bits), Some(rate.ensemble), Some(rate.truncated))
    } else {
        (None, None, None)
    };

    let sectors = if options.with_sectors && model.is_isotropic() {
        let mut s = sector_decompose(&spectrum.mu, options.convention)?;
        if let Some(keep) = options.sector_cutoff {
            s.sort_by(|a, b| b.weight.total_cmp(&a.weight));
            s.truncate(keep);
            s.sort_by_key(|x| x.n);
        }
        Some(s)
    } else {
        None
    };

    Ok(EntanglementReport {
        model: model.clone(),
        block_len: spectrum.block_len,
        critical,
        alpha1: spectrum.alpha1(),
        e1_bits: e1.e1_bits,
        e1_cont_bits: e1.e1_cont_bits,
        m_max: e1.m_max,
        floor_saturated: e1.floor_saturated,
        entropy_bits: spectrum.entropy_bits,
        ep_bits,
        ep_ensemble,
        ep_truncated,
        sectors,
        diagnostics: Diagnostics {
            ln_absdet_t: spectrum.ln_absdet_t,
            rms_term_bits: spectrum.rms_term_bits,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(v: &[f64]) -> SortedSpectrum {
        SortedSpectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn e1_floor_examples() {
        let r = single_copy_e1(0.3).unwrap();
        assert_eq!(r.m_max, 3);
        assert_abs_diff_eq!(r.e1_bits, 3f64.log2(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.e1_bits, 1.58496, epsilon = 1e-5);

        let r = single_copy_e1(1.0).unwrap();
        assert_eq!((r.m_max, r.e1_bits, r.e1_cont_bits), (1, 0.0, 0.0));

        let r = single_copy_e1(0.500001).unwrap();
        assert_eq!(r.m_max, 1);
        assert_eq!(r.e1_bits, 0.0);

        let r = single_copy_e1(0.5).unwrap();
        assert_eq!(r.m_max, 2);
        assert_eq!(r.e1_bits, 1.0);

        let r = single_copy_e1(0.25).unwrap();
        assert_eq!(r.m_max, 4);
    }

    #[test]
    fn renormalized_uniform_prefix_hits_the_floor() {
        for len in 1..=32usize {
            for k in 1..=len {
                let raw: Vec<f64> = (0..len).map(|i| if i < k { 1.0 / k as f64 } else { 0.0 }).collect();
                let total: f64 = raw.iter().sum();
                let s = SortedSpectrum::from_unsorted(raw.iter().map(|x| x / total).collect()).unwrap();
                assert_eq!(single_copy_e1(s.alpha1()).unwrap().m_max, k as u64, "len {len}, k {k}");
                assert!(nielsen_transformable(&s, k).unwrap());
                assert!(!nielsen_transformable(&s, k + 1).unwrap());
            }
        }
    }

    #[test]
    fn e1_rejects_invalid() {
        assert!(single_copy_e1(0.0).is_err());
        assert!(single_copy_e1(-0.1).is_err());
        assert!(single_copy_e1(1.0 + 1e-9).is_err());
        assert!(single_copy_e1(f64::NAN).is_err());
        assert!(single_copy_e1(1.0 + 1e-13).is_ok());
    }

    #[test]
    fn e1_saturates_in_log_domain() {
        let r = single_copy_e1_ln(-100.0 * LN_2).unwrap();
        assert!(r.floor_saturated);
        assert_abs_diff_eq!(r.e1_bits, 100.0, epsilon = 1e-12);
        assert_eq!(r.m_max, u64::MAX);
        let r = single_copy_e1_ln(-40.0 * LN_2).unwrap();
        assert!(!r.floor_saturated);
        assert_eq!(r.m_max, 1 << 40);
    }

    #[test]
    fn nielsen_examples() {
        assert!(nielsen_transformable(&spec(&[0.5, 0.5]), 2).unwrap());
        assert!(!nielsen_transformable(&spec(&[0.6, 0.4]), 2).unwrap());
        assert!(nielsen_transformable(&spec(&[0.3, 0.3, 0.2, 0.2]), 3).unwrap());
        assert!(!nielsen_transformable(&spec(&[0.3, 0.3, 0.2, 0.2]), 4).unwrap());
        // Padding: a qubit spectrum never reaches M = 3.
        assert!(!nielsen_transformable(&spec(&[0.5, 0.5]), 3).unwrap());
        assert!(nielsen_transformable(&spec(&[1.0]), 1).unwrap());
    }

    #[test]
    fn spectrum_validation() {
        assert!(SortedSpectrum::new(vec![0.4, 0.6]).is_err());
        assert!(SortedSpectrum::new(vec![0.5, 0.4]).is_err());
        assert!(SortedSpectrum::new(vec![]).is_err());
        assert!(SortedSpectrum::new(vec![1.2, -0.2]).is_err());
        assert!(nielsen_transformable(&SortedSpectrum { values: vec![0.4, 0.6], origin: SpectrumOrigin::Explicit }, 2).is_err());
    }

    #[test]
    fn ep_examples() {
        let r = probabilistic_ep(&spec(&[0.75, 0.25]), 1024).unwrap();
        assert_abs_diff_eq!(r.ep_bits, 0.5, epsilon = 1e-12);
        assert_eq!(r.ensemble.len(), 2);
        assert_eq!(r.ensemble[0].0, 2);
        assert_abs_diff_eq!(r.ensemble[0].1, 0.5, epsilon = 1e-12);
        assert_eq!(r.ensemble[1].0, 1);
        assert_abs_diff_eq!(r.ensemble[1].1, 0.5, epsilon = 1e-12);

        let r = probabilistic_ep(&spec(&[0.25; 4]), 1024).unwrap();
        assert_abs_diff_eq!(r.ep_bits, 2.0, epsilon = 1e-12);
        assert_eq!(r.ensemble, vec![(4, 1.0)]);

        let r = probabilistic_ep(&spec(&[1.0]), 1024).unwrap();
        assert_eq!(r.ep_bits, 0.0);
        assert_eq!(r.ensemble, vec![(1, 1.0)]);
    }

    #[test]
    fn ep_cap_respected() {
        let r = probabilistic_ep(&spec(&[0.25; 4]), 2).unwrap();
        assert_abs_diff_eq!(r.ep_bits, 1.0, epsilon = 1e-12);
        assert!(probabilistic_ep(&spec(&[1.0]), 0).is_err());
        assert!(probabilistic_ep(&spec(&[1.0]), 2000).is_err());
    }

    #[test]
    fn top_eigenvalues_match_enumeration() {
        let mu = [0.9, 0.7, 0.7, 0.2, 0.05, 1.0];
        let full = SortedSpectrum::from_mu(&mu).unwrap();
        let top = top_eigenvalues(&mu, 40);
        assert_eq!(top.values.len(), 32); // the μ = 1 mode halves the support
        for (a, b) in top.values.iter().zip(&full.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        assert_eq!(top.dim, 64);
        assert_abs_diff_eq!(top.tail, 0.0, epsilon = 1e-14);

        let few = top_eigenvalues(&mu, 5);
        assert_eq!(few.values.len(), 5);
        assert_abs_diff_eq!(few.tail, full.values[5..].iter().sum::<f64>(), epsilon = 1e-14);
    }

    #[test]
    fn truncated_tail_bound_is_conservative() {
        let full = SortedSpectrum::from_mu(&[0.3, 0.2, 0.1, 0.6, 0.0]).unwrap();
        let top = top_eigenvalues(&[0.3, 0.2, 0.1, 0.6, 0.0], 6);
        for l in 1..=full.values.len() + 3 {
            let exact: f64 = full.values.iter().skip(l - 1).sum();
            assert!(top.tail_sum_lower(l) <= exact + 1e-14, "l = {l}");
        }
        // Truncation gives a lower bound on the complete program.
        let exact = probabilistic_ep(&full, 32).unwrap().ep_bits;
        let bound = probabilistic_ep_top(&top, 32).unwrap();
        assert!(bound.truncated);
        assert!(bound.ep_bits <= exact + 1e-9);
        assert!(bound.ep_bits >= single_copy_e1(full.alpha1()).unwrap().e1_bits - 1e-9);
    }

    #[test]
    fn sector_examples() {
        let s = sector_decompose(&[0.5], Occupation::Plus).unwrap();
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s[0].weight, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s[0].max_eigenvalue, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1].weight, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1].max_eigenvalue, 0.75, epsilon = 1e-15);

        // ν = (0.75, 0.6)
        let s = sector_decompose(&[0.5, 0.2], Occupation::Plus).unwrap();
        assert_abs_diff_eq!(s[1].weight, 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1].max_eigenvalue, 0.30, epsilon = 1e-15);

        let s = sector_decompose(&[0.0, 0.0], Occupation::Plus).unwrap();
        let w: Vec<f64> = s.iter().map(|x| x.weight).collect();
        assert_eq!(w, vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn sector_conventions_mirror() {
        let mu = [0.9, 0.4, 0.1, 0.75];
        let plus = sector_decompose(&mu, Occupation::Plus).unwrap();
        let minus = sector_decompose(&mu, Occupation::Minus).unwrap();
        let l = mu.len();
        for s in &plus {
            let m = &minus[l - s.n];
            assert_abs_diff_eq!(s.weight, m.weight, epsilon = 1e-15);
            assert_abs_diff_eq!(s.max_eigenvalue, m.max_eigenvalue, epsilon = 1e-15);
        }
    }

    #[test]
    fn sector_errors() {
        assert!(sector_decompose(&[1.5], Occupation::Plus).is_err());
        assert!(sector_decompose(&vec![0.5; 5000], Occupation::Plus).is_err());
    }

    #[test]
    fn report_examples() {
        let opts = ReportOptions::default();
        let r = report(&ModelSpec::custom(vec![1.0], vec![]).unwrap(), 8, &opts).unwrap();
        assert_eq!(r.e1_bits, 0.0);
        assert_eq!(r.entropy_bits, 0.0);
        assert!(!r.critical);

        let xx = ModelSpec::xx(2.0).unwrap();
        let r = report(&xx, 1, &opts).unwrap();
        assert_abs_diff_eq!(r.alpha1, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(r.e1_bits, 0.0);
        assert_abs_diff_eq!(r.entropy_bits, 0.9182958340544896, epsilon = 1e-14);
        assert!(r.critical);

        let a = report(&xx, 64, &opts).unwrap();
        let b = report(&xx, 128, &opts).unwrap();
        assert!(b.e1_cont_bits > a.e1_cont_bits);
    }

    #[test]
    fn report_with_ep_and_sectors() {
        let opts = ReportOptions {
            with_ep: true,
            with_sectors: true,
            ..Default::default()
        };
        let r = report(&ModelSpec::xx(2.0).unwrap(), 32, &opts).unwrap();
        let ep = r.ep_bits.unwrap();
        assert!(r.e1_bits <= ep + 1e-9);
        assert!(ep <= r.entropy_bits + 1e-9);
        assert_eq!(r.ep_truncated, Some(true));
        let sectors = r.sectors.unwrap();
        assert_abs_diff_eq!(sectors.iter().map(|s| s.weight).sum::<f64>(), 1.0, epsilon = 1e-9);
        let best = sectors.iter().map(|s| s.max_eigenvalue).fold(0.0, f64::max);
        assert_abs_diff_eq!(best, r.alpha1, epsilon = 1e-12);

        // Sectors are skipped for anisotropic chains.
        let r = report(&ModelSpec::xy(2.0, 0.5).unwrap(), 8, &opts).unwrap();
        assert!(r.sectors.is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_spectrum() -> impl Strategy<Value = SortedSpectrum> {
            prop::collection::vec(0.0f64..1.0, 1..32).prop_filter_map("nonzero", |v| {
                let total: f64 = v.iter().sum();
                (total > 1e-6).then(|| {
                    SortedSpectrum::from_unsorted(v.iter().map(|x| x / total).collect()).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn floor_sandwich(alpha in 1e-12f64..=1.0) {
                let r = single_copy_e1(alpha).unwrap();
                prop_assert!(r.e1_bits <= r.e1_cont_bits + 1e-12);
                prop_assert!(r.e1_cont_bits < r.e1_bits + 1.0);
                prop_assert!(r.m_max as f64 * alpha <= 1.0 + 1e-12);
                prop_assert!((r.m_max + 1) as f64 * alpha > 1.0 - 1e-12);
            }

            #[test]
            fn nielsen_matches_floor(s in random_spectrum()) {
                let best = (1..=40).filter(|&m| nielsen_transformable(&s, m).unwrap()).max().unwrap();
                prop_assert_eq!(best as u64, single_copy_e1(s.alpha1()).unwrap().m_max);
            }

            #[test]
            fn ep_between_e1_and_entropy(s in random_spectrum()) {
                let e1 = single_copy_e1(s.alpha1()).unwrap();
                let ep = probabilistic_ep(&s, 64).unwrap();
                prop_assert!(ep.ep_bits >= e1.e1_bits - 1e-9);
                prop_assert!(ep.ep_bits <= s.entropy_bits() + 1e-9);
                let p: f64 = ep.ensemble.iter().map(|x| x.1).sum();
                prop_assert!((p - 1.0).abs() < 1e-9);
            }

            #[test]
            fn sector_weights_match_enumeration(mu in prop::collection::vec(0.0f64..=1.0, 1..12)) {
                let sectors = sector_decompose(&mu, Occupation::Plus).unwrap();
                let l = mu.len();
                let mut weight = vec![0.0; l + 1];
                let mut best = vec![0.0f64; l + 1];
                for mask in 0u32..(1 << l) {
                    let mut v = 1.0;
                    for (i, &m) in mu.iter().enumerate() {
                        v *= if mask >> i & 1 == 1 { 0.5 * (1.0 + m) } else { 0.5 * (1.0 - m) };
                    }
                    let n = mask.count_ones() as usize;
                    weight[n] += v;
                    best[n] = best[n].max(v);
                }
                for s in &sectors {
                    prop_assert!((s.weight - weight[s.n]).abs() < 1e-12);
                    prop_assert!((s.max_eigenvalue - best[s.n]).abs() < 1e-12);
                }
                let alpha1: f64 = mu.iter().map(|m| 0.5 * (1.0 + m)).product();
                let env = sectors.iter().map(|s| s.max_eigenvalue).fold(0.0, f64::max);
                prop_assert!((env - alpha1).abs() < 1e-12);
            }

            #[test]
            fn entropy_matches_product_spectrum(mu in prop::collection::vec(0.0f64..=1.0, 1..10)) {
                let bs = BlockSpectrum::from_mu(mu.clone()).unwrap();
                let full = SortedSpectrum::from_mu(&mu).unwrap();
                prop_assert!((bs.entropy_bits - full.entropy_bits()).abs() < 1e-10);
            }
        }
    }
}
