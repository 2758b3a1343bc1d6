//! Independent ground states of finite open chains.
//!
//! Two routes: the normal-mode covariance of the quadratic form, and brute
//! force in the `2^n`-dimensional Fock space. Agreement of either with the
//! Toeplitz pipeline is the end-to-end check of the whole construction.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::entangle::top_eigenvalues;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::toeplitz::{block_spectrum, BlockSpectrum, ToeplitzCoeffs, DEFAULT_ABS_TOL};

pub const MAX_GAUSSIAN_SITES: usize = 4096;
pub const MAX_ED_SITES: usize = 12;
pub const ZERO_MODE_TOL: f64 = 1e-10;
pub const ED_GAP_TOL: f64 = 1e-8;
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
pub const COMPARE_TOP: usize = 64;
pub const MISMATCH_TOL: f64 = 1e-6;

/// An open chain of `n` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChain {
    pub model: ModelSpec,
    pub n: usize,
    /// `h` in `H = (i/4) Σ h_ab m_a m_b`, Majoranas interleaved as
    /// `m_{2j} = a_j + a_j†`, `m_{2j+1} = i(a_j† - a_j)`.
    pub quadratic_form: DMatrix<f64>,
    /// Lowest single-particle excitation energy.
    pub gap: f64,
}

impl FiniteChain {
    pub fn new(model: &ModelSpec, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_GAUSSIAN_SITES {
            return Err(Error::InvalidArgument(format!(
                "chain length must be in 1..={MAX_GAUSSIAN_SITES}"
            )));
        }
        model.validate()?;
        let k = coupling_matrix(model, n);
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for l in 0..n {
                h[(2 * j, 2 * l + 1)] = -2.0 * k[(j, l)];
                h[(2 * l + 1, 2 * j)] = 2.0 * k[(j, l)];
            }
        }
        let gap = 2.0 * polar_factor(&k).1.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(FiniteChain {
            model: model.clone(),
            n,
            quadratic_form: h,
            gap,
        })
    }

    /// Real-space hopping matrix `A_jk = A_{j-k}`.
    pub fn hopping(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |j, l| self.model.a_at(j as i64 - l as i64))
    }

    /// Real-space pairing matrix `B_jk = B_{j-k}`.
    pub fn pairing(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |j, l| self.model.b_at(j as i64 - l as i64))
    }
}

/// `K = B - A/2`, with `H = -i Σ K_jk x_j p_k` up to a constant.
fn coupling_matrix(model: &ModelSpec, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |j, l| {
        let d = j as i64 - l as i64;
        model.b_at(d) - 0.5 * model.a_at(d)
    })
}

/// Block data of a finite-chain Gaussian ground state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianGround {
    pub spectrum: BlockSpectrum,
    pub gap: f64,
    /// Zero modes were present and left half-filled.
    pub degenerate: bool,
}

/// Ground covariance of the open chain, restricted to the centered block.
pub fn finite_gaussian_ground(model: &ModelSpec, n: usize, block_len: usize) -> Result<GaussianGround> {
    check_lengths(n, block_len, MAX_GAUSSIAN_SITES)?;
    model.validate()?;
    let k = coupling_matrix(model, n);
    // ⟨i x_j p_k⟩ in the ground state is the polar factor of K.
    let (polar, sigma, residue) = polar_factor(&k);
    if residue > ORTHOGONALITY_TOL {
        return Err(Error::Decomposition(format!(
            "canonical transformation off orthogonal by {residue:e}"
        )));
    }
    let degenerate = sigma.iter().any(|&v| v < ZERO_MODE_TOL);

    let offset = (n - block_len) / 2;
    let block = polar.view((offset, offset), (block_len, block_len)).into_owned();
    let gap = 2.0 * sigma.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GaussianGround {
        spectrum: block_spectrum(&block)?,
        gap,
        degenerate,
    })
}

/// `Σ_{σ>0} u vᵀ` over the singular triples of `k`, with the singular values
/// and the residue of the decomposition.
///
/// Read off the symmetric dilation `[[0, K], [Kᵀ, 0]]`, whose eigenpairs are
/// `±σ, (u, ±v)/√2`: twice the off-diagonal block of the projector onto its
/// positive eigenspace is the polar factor, independent of how degenerate
/// eigenspaces are resolved.
fn polar_factor(k: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, f64) {
    let n = k.nrows();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, n), (n, n)).copy_from(k);
    s.view_mut((n, 0), (n, n)).copy_from(&k.transpose());
    let (values, w) = dense::symmetric_eigen(&s);

    let scale = k.amax().max(f64::MIN_POSITIVE);
    let residue = (w.transpose() * &w - DMatrix::identity(2 * n, 2 * n))
        .amax()
        .max((&s * &w - &w * DMatrix::from_diagonal(&values)).amax() / scale);

    let mut polar = DMatrix::zeros(n, n);
    for (i, &lambda) in values.iter().enumerate() {
        if lambda >= ZERO_MODE_TOL {
            let col = w.column(i);
            polar.ger(2.0, &col.rows(0, n), &col.rows(n, n), 1.0);
        }
    }
    // Eigenvalues come in ± pairs; the upper half are the singular values.
    let mut sigma: Vec<f64> = values.iter().skip(n).map(|v| v.abs()).collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    (polar, sigma, residue)
}

/// The Hamiltonian `Σ A_jk a_j† a_k + Σ B_jk a_j† a_k† - Σ B_jk a_j a_k` on
/// the full Fock space, bit `j` of the basis index being the occupation of
/// site `j` (Jordan–Wigner order).
pub fn fock_hamiltonian(model: &ModelSpec, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 || n > MAX_ED_SITES {
        return Err(Error::InvalidArgument(format!(
            "exact diagonalization limited to 1..={MAX_ED_SITES} sites"
        )));
    }
    model.validate()?;
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    let pairs: Vec<(usize, usize, f64, f64)> = (0..n)
        .flat_map(|j| (0..n).map(move |l| (j, l)))
        .map(|(j, l)| {
            let d = j as i64 - l as i64;
            (j, l, model.a_at(d), model.b_at(d))
        })
        .filter(|&(_, _, a, b)| a != 0.0 || b != 0.0)
        .collect();
    for s in 0..dim {
        for &(j, l, a, b) in &pairs {
            if a != 0.0 {
                if let Some((t, sign)) = annihilate(s, l).and_then(|(t, s1)| create(t, j).map(|(t, s2)| (t, s1 * s2))) {
                    h[(t, s)] += a * sign;
                }
            }
            if b != 0.0 {
                if let Some((t, sign)) = create(s, l).and_then(|(t, s1)| create(t, j).map(|(t, s2)| (t, s1 * s2))) {
                    h[(t, s)] += b * sign;
                }
                if let Some((t, sign)) = annihilate(s, l).and_then(|(t, s1)| annihilate(t, j).map(|(t, s2)| (t, s1 * s2))) {
                    h[(t, s)] -= b * sign;
                }
            }
        }
    }
    Ok(h)
}

fn string_sign(state: usize, site: usize) -> f64 {
    if (state & ((1 << site) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn create(state: usize, site: usize) -> Option<(usize, f64)> {
    (state >> site & 1 == 0).then(|| (state | 1 << site, string_sign(state, site)))
}

fn annihilate(state: usize, site: usize) -> Option<(usize, f64)> {
    (state >> site & 1 == 1).then(|| (state & !(1 << site), string_sign(state, site)))
}

/// Ground vector and many-body gap.
#[derive(Debug, Clone)]
pub struct ManyBodyGround {
    pub energies: Vec<f64>,
    pub vector: Vec<f64>,
    pub gap: f64,
}

pub fn many_body_ground(model: &ModelSpec, n: usize) -> Result<ManyBodyGround> {
    let h = fock_hamiltonian(model, n)?;
    let (values, vectors) = dense::symmetric_eigen(&h);
    let energies: Vec<f64> = values.iter().copied().collect();
    let gap = if energies.len() > 1 {
        energies[1] - energies[0]
    } else {
        f64::INFINITY
    };
    let v = vectors.column(0);
    let residual = (&h * v - v * energies[0]).amax();
    if residual > 1e-9 * h.amax().max(f64::MIN_POSITIVE) {
        return Err(Error::Decomposition(format!("ground vector residual {residual:e}")));
    }
    Ok(ManyBodyGround {
        vector: v.iter().copied().collect(),
        energies,
        gap,
    })
}

/// Reduced-state spectrum of the centered block, by brute force.
pub fn exact_diag_ground(model: &ModelSpec, n: usize, block_len: usize) -> Result<(Vec<f64>, f64)> {
    check_lengths(n, block_len, MAX_ED_SITES)?;
    let ground = many_body_ground(model, n)?;
    if !(ground.gap > ED_GAP_TOL) {
        return Err(Error::DegenerateGround { gap: ground.gap });
    }
    let offset = (n - block_len) / 2;
    let rho = reduced_density(&ground.vector, n, offset, block_len);
    let mut ev: Vec<f64> = dense::symmetric_eigenvalues(&rho).into_iter().map(|v| v.max(0.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok((ev, ground.gap))
}

/// Partial trace onto sites `offset..offset+len` of a real state vector.
pub fn reduced_density(psi: &[f64], n: usize, offset: usize, len: usize) -> DMatrix<f64> {
    let inner = 1usize << len;
    let left = 1usize << offset;
    let right = 1usize << (n - offset - len);
    // psi[l + left * (b + inner * r)] viewed as a (inner × env) matrix.
    let mut m = DMatrix::zeros(inner, left * right);
    for r in 0..right {
        for b in 0..inner {
            for l in 0..left {
                m[(b, l + left * r)] = psi[l + left * (b + inner * r)];
            }
        }
    }
    &m * m.transpose()
}

fn check_lengths(n: usize, block_len: usize, max_n: usize) -> Result<()> {
    if block_len == 0 || block_len > n || n > max_n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= L <= n <= {max_n}, got L = {block_len}, n = {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodPair {
    #[serde(rename = "gaussian-vs-ed")]
    GaussianVsEd,
    #[serde(rename = "gaussian-vs-thermodynamic")]
    GaussianVsThermodynamic,
}

impl std::str::FromStr for MethodPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-vs-ed" | "ed" => Ok(MethodPair::GaussianVsEd),
            "gaussian-vs-thermodynamic" | "thermodynamic" => Ok(MethodPair::GaussianVsThermodynamic),
            _ => Err(Error::InvalidArgument(format!("unknown method pair {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub n: usize,
    #[serde(rename = "L")]
    pub block_len: usize,
    pub gap: f64,
    pub max_abs_diff: f64,
    /// Top reduced eigenvalues from the finite-chain Gaussian state.
    pub spectrum_gaussian: Vec<f64>,
    /// The same from the second method.
    pub spectrum_reference: Vec<f64>,
    pub method_pair: MethodPair,
    pub degenerate: bool,
}

/// Runs both methods and compares the top of the two reduced spectra.
pub fn compare_oracle(model: &ModelSpec, n: usize, block_len: usize, pair: MethodPair) -> Result<OracleComparison> {
    let g = finite_gaussian_ground(model, n, block_len)?;
    let ours = padded(top_eigenvalues(&g.spectrum.mu, COMPARE_TOP).values);
    let (reference, gap) = match pair {
        MethodPair::GaussianVsEd => {
            let (ev, gap) = exact_diag_ground(model, n, block_len)?;
            (padded(ev), gap)
        }
        MethodPair::GaussianVsThermodynamic => {
            let t = ToeplitzCoeffs::compute(model, block_len, DEFAULT_ABS_TOL)?.toeplitz(block_len)?;
            let s = block_spectrum(&t)?;
            (padded(top_eigenvalues(&s.mu, COMPARE_TOP).values), g.gap)
        }
    };
    let max_abs_diff = ours
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if pair == MethodPair::GaussianVsEd && max_abs_diff > MISMATCH_TOL && gap > MISMATCH_TOL {
        return Err(Error::Decomposition(format!(
            "Gaussian and exact spectra differ by {max_abs_diff:e} at gap {gap:e}"
        )));
    }
    Ok(OracleComparison {
        n,
        block_len,
        gap,
        max_abs_diff,
        spectrum_gaussian: ours,
        spectrum_reference: reference,
        method_pair: pair,
        degenerate: g.degenerate,
    })
}

fn padded(mut v: Vec<f64>) -> Vec<f64> {
    v.truncate(COMPARE_TOP);
    v.resize(COMPARE_TOP, 0.0);
    v
}
