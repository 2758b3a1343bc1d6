//! Fourier coefficients of the symbol, the Toeplitz block `T_L`, the
//! Majorana covariance block `γ_L`, and the singular-value spectrum of `T_L`.

use std::f64::consts::{LN_2, PI, TAU};

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dispersion_zeros, ModelSpec};
use crate::quad::GaussLegendre;

pub const DEFAULT_ABS_TOL: f64 = 1e-12;
/// Largest node count spent on one coefficient.
pub const NODE_BUDGET: usize = 1 << 16;
/// Phase of `e^{-ilk}` swept by one 64-point panel on the first pass.
const PANEL_PHASE: f64 = 40.0;
const CLAMP_WARN: f64 = 1e-10;
const CLAMP_FAIL: f64 = 1e-8;
const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffMethod {
    ClosedForm,
    Quadrature,
}

/// `t_l` for `l = -(L-1)..=(L-1)`, shared by every block of length `<= L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzCoeffs {
    #[serde(rename = "L")]
    pub block_len: usize,
    pub t: Vec<f64>,
    pub method: CoeffMethod,
    pub abs_tol: f64,
    /// Difference between the last two refinements (zero for closed form).
    pub achieved: f64,
}

impl ToeplitzCoeffs {
    /// Closed form for isotropic models, quadrature otherwise.
    pub fn compute(model: &ModelSpec, block_len: usize, abs_tol: f64) -> Result<Self> {
        if model.is_isotropic() {
            Self::closed_form(model, block_len)
        } else {
            Self::quadrature(model, block_len, abs_tol)
        }
    }

    /// Isotropic symbols are `±1` between Fermi points, so every coefficient
    /// is a finite sum of sines: `t_l = (1/π) Σ s_i ∫ cos(lk) dk` over `[0, π]`.
    pub fn closed_form(model: &ModelSpec, block_len: usize) -> Result<Self> {
        check_len(block_len)?;
        if !model.is_isotropic() {
            return Err(Error::InvalidArgument(
                "closed-form coefficients need an isotropic model".into(),
            ));
        }
        let mut cuts = vec![0.0];
        cuts.extend(
            dispersion_zeros(model, 0.0)?
                .into_iter()
                .filter(|&k| k > 0.0 && k < PI),
        );
        cuts.push(PI);
        let pieces: Vec<(f64, f64, f64)> = cuts
            .windows(2)
            .map(|w| {
                let s = model.dispersion(0.5 * (w[0] + w[1])).re.signum();
                (w[0], w[1], s)
            })
            .collect();

        let n = block_len as i64;
        let mut t = vec![0.0; 2 * block_len - 1];
        for l in 0..n {
            let v = if l == 0 {
                pieces.iter().map(|&(a, b, s)| s * (b - a)).sum::<f64>() / PI
            } else {
                let lf = l as f64;
                let sin_at = |k: f64| {
                    if k == 0.0 || k == PI {
                        0.0
                    } else {
                        (lf * k).sin()
                    }
                };
                pieces
                    .iter()
                    .map(|&(a, b, s)| s * (sin_at(b) - sin_at(a)))
                    .sum::<f64>()
                    / (PI * lf)
            };
            t[(l + n - 1) as usize] = v;
            t[(n - 1 - l) as usize] = v;
        }
        Ok(ToeplitzCoeffs {
            block_len,
            t,
            method: CoeffMethod::ClosedForm,
            abs_tol: 0.0,
            achieved: 0.0,
        })
    }

    /// Composite 64-point Gauss–Legendre over panels split at every zero of
    /// the dispersion, refined by uniform panel doubling until two successive
    /// passes agree to `abs_tol` on every coefficient.
    pub fn quadrature(model: &ModelSpec, block_len: usize, abs_tol: f64) -> Result<Self> {
        check_len(block_len)?;
        if !(abs_tol > 0.0) {
            return Err(Error::InvalidArgument("abs_tol must be positive".into()));
        }
        let mut cuts = vec![0.0];
        cuts.extend(dispersion_zeros(model, 0.0)?.into_iter().filter(|&k| k > 0.0));
        cuts.push(TAU);

        let l_max = (block_len - 1) as f64;
        let mut panels: Vec<usize> = cuts
            .windows(2)
            .map(|w| (((w[1] - w[0]) * l_max.max(1.0) / PANEL_PHASE).ceil() as usize).max(1))
            .collect();

        let mut prev = coefficients_on(model, &cuts, &panels, block_len)?;
        loop {
            for p in panels.iter_mut() {
                *p *= 2;
            }
            let nodes: usize = panels.iter().sum::<usize>() * 64;
            let next = coefficients_on(model, &cuts, &panels, block_len)?;
            let diff = prev
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if diff < abs_tol {
                let mut t = Vec::with_capacity(next.len());
                for (i, z) in next.iter().enumerate() {
                    if z.im.abs() >= abs_tol {
                        return Err(Error::CoefficientAccuracy {
                            l: i as i64 - (block_len as i64 - 1),
                            achieved: z.im.abs(),
                            wanted: abs_tol,
                        });
                    }
                    t.push(z.re);
                }
                return Ok(ToeplitzCoeffs {
                    block_len,
                    t,
                    method: CoeffMethod::Quadrature,
                    abs_tol,
                    achieved: diff,
                });
            }
            if nodes * 2 > NODE_BUDGET {
                let worst = prev
                    .iter()
                    .zip(&next)
                    .enumerate()
                    .max_by(|a, b| (a.1 .0 - a.1 .1).norm().total_cmp(&(b.1 .0 - b.1 .1).norm()))
                    .map(|(i, _)| i as i64 - (block_len as i64 - 1))
                    .unwrap_or(0);
                return Err(Error::CoefficientAccuracy {
                    l: worst,
                    achieved: diff,
                    wanted: abs_tol,
                });
            }
            prev = next;
        }
    }

    /// `t_l`; panics outside the stored range.
    pub fn get(&self, l: i64) -> f64 {
        let off = self.block_len as i64 - 1;
        assert!(l.abs() <= off, "coefficient t_{l} outside table");
        self.t[(l + off) as usize]
    }

    /// `T_L[i][j] = t_{j-i}` for any `L` up to the table length.
    pub fn toeplitz(&self, block_len: usize) -> Result<DMatrix<f64>> {
        self.check_fits(block_len)?;
        Ok(DMatrix::from_fn(block_len, block_len, |i, j| {
            self.get(j as i64 - i as i64)
        }))
    }

    /// Block Toeplitz `γ_L` with 2×2 blocks `M_{i-j} = [[0, t_{i-j}], [-t_{j-i}, 0]]`.
    pub fn gamma(&self, block_len: usize) -> Result<DMatrix<f64>> {
        self.check_fits(block_len)?;
        let n = 2 * block_len;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..block_len {
            for j in 0..block_len {
                let d = i as i64 - j as i64;
                g[(2 * i, 2 * j + 1)] = self.get(d);
                g[(2 * i + 1, 2 * j)] = -self.get(-d);
            }
        }
        Ok(g)
    }

    fn check_fits(&self, block_len: usize) -> Result<()> {
        check_len(block_len)?;
        if block_len > self.block_len {
            return Err(Error::InvalidArgument(format!(
                "block length {block_len} exceeds coefficient table ({})",
                self.block_len
            )));
        }
        Ok(())
    }
}

fn check_len(block_len: usize) -> Result<()> {
    if block_len == 0 {
        return Err(Error::InvalidArgument("block length must be >= 1".into()));
    }
    Ok(())
}

/// All `t_l` for `|l| < block_len` on a fixed composite rule. Entries are
/// complex so the caller can check the imaginary residue.
fn coefficients_on(
    model: &ModelSpec,
    cuts: &[f64],
    panels: &[usize],
    block_len: usize,
) -> Result<Vec<Complex64>> {
    let rule = GaussLegendre::order64();
    let mut nodes = Vec::new();
    for (w, &count) in cuts.windows(2).zip(panels) {
        let h = (w[1] - w[0]) / count as f64;
        for p in 0..count {
            let a = w[0] + p as f64 * h;
            for (k, wt) in rule.panel(a, a + h) {
                nodes.push((k, wt, model.symbol(k)?));
            }
        }
    }

    let n = block_len;
    let mut pos = vec![Complex64::new(0.0, 0.0); n];
    let mut neg = vec![Complex64::new(0.0, 0.0); n];
    for &(k, wt, g) in &nodes {
        let step = Complex64::new(k.cos(), -k.sin());
        let mut phase = Complex64::new(1.0, 0.0);
        let wg = g * wt;
        for l in 0..n {
            if l % 64 == 0 && l > 0 {
                let (s, c) = (l as f64 * k).sin_cos();
                phase = Complex64::new(c, -s);
            }
            // e^{-ilk} for t_l, e^{+ilk} for t_{-l}
            pos[l] += wg * phase;
            neg[l] += wg * phase.conj();
            phase *= step;
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    for l in 0..n {
        out[n - 1 + l] = pos[l] / TAU;
        out[n - 1 - l] = neg[l] / TAU;
    }
    Ok(out)
}

/// Single coefficient `t_l` to absolute accuracy `abs_tol`.
pub fn fourier_coefficient(model: &ModelSpec, l: i64, abs_tol: f64) -> Result<f64> {
    let len = l.unsigned_abs() as usize + 1;
    Ok(ToeplitzCoeffs::compute(model, len, abs_tol)?.get(l))
}

pub fn build_t(model: &ModelSpec, block_len: usize, abs_tol: f64) -> Result<DMatrix<f64>> {
    ToeplitzCoeffs::compute(model, block_len, abs_tol)?.toeplitz(block_len)
}

pub fn build_gamma(model: &ModelSpec, block_len: usize, abs_tol: f64) -> Result<DMatrix<f64>> {
    ToeplitzCoeffs::compute(model, block_len, abs_tol)?.gamma(block_len)
}

/// Singular values `μ_l` of `T_L` with their log-domain aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpectrum {
    #[serde(rename = "L")]
    pub block_len: usize,
    /// Non-increasing, in `[0, 1]`.
    pub mu: Vec<f64>,
    /// `Σ ln((1+μ)/2)`, the log of the largest reduced eigenvalue.
    pub ln_alpha1: f64,
    /// `Σ ln μ`; `-inf` once any `μ` underflows.
    #[serde(rename = "ln_absdet_T", with = "crate::serde_ext")]
    pub ln_absdet_t: f64,
    /// `Σ H₂((1+μ)/2)` in bits.
    pub entropy_bits: f64,
    /// `-(1/2) Σ log₂((1+μ²)/2)`.
    pub rms_term_bits: f64,
    /// Largest amount by which a raw singular value exceeded 1 before clamping.
    pub max_overshoot: f64,
}

impl BlockSpectrum {
    /// Clamps, sorts and aggregates raw values of `μ`.
    pub fn from_mu(mut mu: Vec<f64>) -> Result<Self> {
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::Decomposition("non-finite singular value".into()));
        }
        let mut overshoot: f64 = 0.0;
        for v in mu.iter_mut() {
            if *v > 1.0 {
                overshoot = overshoot.max(*v - 1.0);
                if *v > 1.0 + CLAMP_FAIL {
                    return Err(Error::ContractionViolated { mu: *v });
                }
                *v = 1.0;
            } else if *v < 0.0 {
                *v = 0.0;
            }
        }
        mu.sort_by(|a, b| b.total_cmp(a));

        let mut ln_alpha1 = 0.0;
        let mut ln_det = 0.0;
        let mut entropy = 0.0;
        let mut rms = 0.0;
        for &m in &mu {
            ln_alpha1 += m.ln_1p() - LN_2;
            ln_det += if m < UNDERFLOW { f64::NEG_INFINITY } else { m.ln() };
            entropy += binary_entropy_bits(m);
            rms -= 0.5 * ((m * m).ln_1p() - LN_2) / LN_2;
        }
        Ok(BlockSpectrum {
            block_len: mu.len(),
            mu,
            ln_alpha1,
            ln_absdet_t: ln_det,
            entropy_bits: entropy,
            rms_term_bits: rms,
            max_overshoot: overshoot,
        })
    }

    pub fn alpha1(&self) -> f64 {
        self.ln_alpha1.exp()
    }

    /// `-log₂ α₁`.
    pub fn e1_cont_bits(&self) -> f64 {
        -self.ln_alpha1 / LN_2
    }

    /// True if clamping absorbed more than benign rounding.
    pub fn clamp_warning(&self) -> bool {
        self.max_overshoot > CLAMP_WARN
    }
}

/// `H₂((1+μ)/2)` in bits, evaluated without cancellation near `μ = 1`.
pub fn binary_entropy_bits(mu: f64) -> f64 {
    let p = 0.5 * (1.0 + mu);
    let q = 0.5 * (1.0 - mu);
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(q)
}

/// Dense SVD of `T_L` followed by [`BlockSpectrum::from_mu`].
pub fn block_spectrum(t: &DMatrix<f64>) -> Result<BlockSpectrum> {
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::Decomposition("non-finite matrix entry".into()));
    }
    if t.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let svd = SVD::try_new(t.clone(), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Decomposition("SVD did not converge".into()))?;
    BlockSpectrum::from_mu(svd.singular_values.iter().copied().collect())
}
