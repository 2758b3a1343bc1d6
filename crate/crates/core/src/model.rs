//! Finite-range translationally invariant quadratic chains.
//!
//! A chain is described by its coupling table: the symmetric hopping part
//! `A_0..A_w` and the antisymmetric pairing part `B_1..B_w`. The dispersion
//! is
//!
//! ```text
//! Λ(k) = A_0 + 2 Σ_j A_j cos(jk) − 4i Σ_j B_j sin(jk)
//! ```
//!
//! and the unimodular symbol `g(k) = Λ(k)/|Λ(k)|` generates the Toeplitz
//! data of every block. Zeros of `Λ` at which `g` jumps are Fermi points;
//! a chain is critical exactly when it has at least one.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which preset (if any) produced a coupling table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelLabel {
    Xx { a: f64 },
    Xy { a: f64, gamma: f64 },
    Ising,
    Custom,
}

/// Coupling table of a quadratic chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub w: usize,
    /// `A_0..A_w`; `A_{-j} = A_j`.
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    /// `B_1..B_w`; `B_{-j} = -B_j`, `B_0 = 0`.
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    pub label: ModelLabel,
}

/// Request for a model, before validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Xx { a: f64 },
    Xy { a: f64, gamma: f64 },
    Ising,
    Custom { a: Vec<f64>, b: Vec<f64> },
}

impl ModelSpec {
    pub fn build(preset: Preset) -> Result<Self> {
        match preset {
            Preset::Xx { a } => {
                let mut m = Self::xy_table(a, 0.0)?;
                m.label = ModelLabel::Xx { a };
                Ok(m)
            }
            Preset::Xy { a, gamma } => Self::xy_table(a, gamma),
            Preset::Ising => {
                let mut m = Self::xy_table(1.0, 1.0)?;
                m.label = ModelLabel::Ising;
                Ok(m)
            }
            Preset::Custom { a, b } => Self::custom(a, b),
        }
    }

    pub fn xx(a: f64) -> Result<Self> {
        Self::build(Preset::Xx { a })
    }

    pub fn xy(a: f64, gamma: f64) -> Result<Self> {
        Self::build(Preset::Xy { a, gamma })
    }

    pub fn ising() -> Self {
        Self::build(Preset::Ising).expect("ising preset is valid")
    }

    /// Explicit coupling table. `b` may be shorter than `a.len() - 1`; it is
    /// zero-padded. A longer `b` extends the range.
    pub fn custom(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() && b.is_empty() {
            return Err(Error::InvalidModel("empty coupling table".into()));
        }
        let w = a.len().saturating_sub(1).max(b.len());
        let mut a = a;
        let mut b = b;
        a.resize(w + 1, 0.0);
        b.resize(w, 0.0);
        let m = ModelSpec {
            w,
            a,
            b,
            label: ModelLabel::Custom,
        };
        m.validate()?;
        Ok(m)
    }

    fn xy_table(a: f64, gamma: f64) -> Result<Self> {
        if !a.is_finite() || !gamma.is_finite() {
            return Err(Error::InvalidModel("preset parameters must be finite".into()));
        }
        let m = ModelSpec {
            w: 1,
            a: vec![-1.0, a / 2.0],
            b: vec![0.0 - gamma * a / 4.0],
            label: ModelLabel::Xy { a, gamma },
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.len() != self.w + 1 || self.b.len() != self.w {
            return Err(Error::InvalidModel(format!(
                "coupling arrays do not match range w = {}",
                self.w
            )));
        }
        if self.a.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite coupling".into()));
        }
        if self.a.iter().chain(&self.b).all(|&v| v == 0.0) {
            return Err(Error::InvalidModel("all couplings are zero".into()));
        }
        Ok(())
    }

    /// True when every pairing coefficient vanishes.
    pub fn is_isotropic(&self) -> bool {
        self.b.iter().all(|&v| v == 0.0)
    }

    /// `A_j` for any signed offset, zero outside the range.
    pub fn a_at(&self, j: i64) -> f64 {
        let j = j.unsigned_abs() as usize;
        if j <= self.w {
            self.a[j]
        } else {
            0.0
        }
    }

    /// `B_j` for any signed offset, zero outside the range.
    pub fn b_at(&self, j: i64) -> f64 {
        let m = j.unsigned_abs() as usize;
        if m == 0 || m > self.w {
            return 0.0;
        }
        if j > 0 {
            self.b[m - 1]
        } else {
            -self.b[m - 1]
        }
    }

    /// Sum of coupling magnitudes, an upper bound on `|Λ|`.
    pub fn scale(&self) -> f64 {
        self.a[0].abs()
            + 2.0 * self.a[1..].iter().map(|v| v.abs()).sum::<f64>()
            + 4.0 * self.b.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn dispersion(&self, k: f64) -> Complex64 {
        let mut re = self.a[0];
        let mut im = 0.0;
        for j in 1..=self.w {
            let (s, c) = (j as f64 * k).sin_cos();
            re += 2.0 * self.a[j] * c;
            im -= 4.0 * self.b[j - 1] * s;
        }
        Complex64::new(re, im)
    }

    /// The unimodular symbol `Λ(k)/|Λ(k)|`.
    pub fn symbol(&self, k: f64) -> Result<Complex64> {
        let lam = self.dispersion(k);
        let r = lam.norm();
        if !(r >= 1e-300) {
            return Err(Error::SingularSymbol { k });
        }
        Ok(lam / r)
    }
}

/// A discontinuity of the symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    /// Angle in `[0, 2π)`.
    pub k: f64,
    /// Limit of `g` approaching `k` from below.
    pub left_limit: Complex64,
    /// Limit of `g` approaching `k` from above.
    pub right_limit: Complex64,
    /// `β` with `exp(2πiβ) = left/right`, `Re β ∈ (-1/2, 1/2]`.
    pub jump_exponent: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolProfile {
    pub model: ModelSpec,
    pub jumps: Vec<Jump>,
    pub critical: bool,
    pub fermi_points: Vec<f64>,
    /// Zeros of `Λ` across which the symbol stays continuous (tangential
    /// zeros at the boundary of a critical region).
    pub marginal_points: Vec<f64>,
}

impl SymbolProfile {
    /// `Σ β_j²` over the jump list, the Fisher–Hartwig exponent of
    /// `|det T_L|`.
    pub fn fisher_hartwig_exponent(&self) -> f64 {
        self.jumps
            .iter()
            .map(|j| (j.jump_exponent * j.jump_exponent).re)
            .sum()
    }
}

pub const SCAN_POINTS: usize = 4096;
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
const TANGENTIAL_TOL: f64 = 1e-8;

/// Locates the zeros of `Λ` on `[0, 2π)` and the jumps of the symbol.
pub fn classify_criticality(model: &ModelSpec, root_tol: f64) -> Result<SymbolProfile> {
    if !(root_tol > 0.0) {
        return Err(Error::InvalidArgument("root_tol must be positive".into()));
    }
    let zeros = dispersion_zeros(model, root_tol)?;

    let mut jumps = Vec::new();
    let mut marginal = Vec::new();
    for k in zeros {
        let (left, right) = one_sided_limits(model, k);
        if (left - right).norm() > 1e-6 {
            jumps.push(Jump {
                k,
                left_limit: left,
                right_limit: right,
                jump_exponent: jump_exponent(left, right),
            });
        } else {
            marginal.push(k);
        }
    }
    let fermi_points = jumps.iter().map(|j| j.k).collect();
    Ok(SymbolProfile {
        model: model.clone(),
        critical: !jumps.is_empty(),
        jumps,
        fermi_points,
        marginal_points: marginal,
    })
}

/// Principal `β` with `exp(2πiβ) = left/right`.
pub fn jump_exponent(left: Complex64, right: Complex64) -> Complex64 {
    let ratio = left / right;
    // ln(ratio) / 2πi; the imaginary part carries any modulus mismatch.
    let mut re = ratio.arg() / TAU;
    if re <= -0.5 + 1e-12 {
        re += 1.0;
    }
    let im = -ratio.norm().ln() / TAU;
    Complex64::new(re, im)
}

/// `d^m Λ / dk^m`.
pub fn dispersion_derivative(model: &ModelSpec, k: f64, m: u32) -> Complex64 {
    if m == 0 {
        return model.dispersion(k);
    }
    let shift = m as f64 * std::f64::consts::FRAC_PI_2;
    let mut re = 0.0;
    let mut im = 0.0;
    for j in 1..=model.w {
        let jf = j as f64;
        let pow = jf.powi(m as i32);
        re += 2.0 * model.a[j] * pow * (jf * k + shift).cos();
        im -= 4.0 * model.b[j - 1] * pow * (jf * k + shift).sin();
    }
    Complex64::new(re, im)
}

/// One-sided limits of `g` at a zero of `Λ`, from the leading non-vanishing
/// derivative: `Λ(k ± h) ≈ (±h)^m Λ^(m)(k) / m!`.
fn one_sided_limits(model: &ModelSpec, k: f64) -> (Complex64, Complex64) {
    let scale = model.scale() * (model.w.max(1) as f64).powi(4);
    for m in 1..=4u32 {
        let d = dispersion_derivative(model, k, m);
        if d.norm() > 1e-7 * scale || m == 4 {
            let right = d / d.norm();
            let left = if m % 2 == 1 { -right } else { right };
            return (left, right);
        }
    }
    unreachable!()
}

/// All zeros of the dispersion on `[0, 2π)`, sorted and deduplicated.
pub fn dispersion_zeros(model: &ModelSpec, root_tol: f64) -> Result<Vec<f64>> {
    let scale = model.scale();
    let n = SCAN_POINTS;
    let grid: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
    let lam: Vec<Complex64> = grid.iter().map(|&k| model.dispersion(k)).collect();

    let flat = lam.iter().filter(|z| z.norm() <= 1e-13 * scale).count();
    if flat * 4 > n {
        return Err(Error::DegenerateDispersion);
    }

    let mut zeros = Vec::new();
    let isotropic = model.is_isotropic();
    // Isotropic: Λ is real, use its sign changes. Otherwise Λ = 0 needs the
    // odd imaginary part to vanish, so bracket its sign changes and keep the
    // roots where the real part vanishes too.
    let part = |k: f64| {
        let z = model.dispersion(k);
        if isotropic {
            z.re
        } else {
            z.im
        }
    };
    let vals: Vec<f64> = lam.iter().map(|z| if isotropic { z.re } else { z.im }).collect();
    for i in 0..n {
        let j = (i + 1) % n;
        let hi_k = if j == 0 { TAU } else { grid[j] };
        if vals[i] == 0.0 {
            zeros.push(grid[i]);
        } else if vals[i] * vals[j] < 0.0 {
            zeros.push(bisect(&part, grid[i], hi_k, vals[i], root_tol));
        }
    }
    if !isotropic {
        zeros.retain(|&k| model.dispersion(k).re.abs() <= TANGENTIAL_TOL * scale);
    }

    // Tangential zeros never change sign; catch them as local minima of |Λ|.
    let abs = |k: f64| model.dispersion(k).norm();
    for i in 0..n {
        let prev = lam[(i + n - 1) % n].norm();
        let next = lam[(i + 1) % n].norm();
        let here = lam[i].norm();
        if here <= prev && here <= next {
            let k = golden_min(&abs, grid[i] - TAU / n as f64, grid[i] + TAU / n as f64);
            if abs(k) < TANGENTIAL_TOL * scale {
                zeros.push(k.rem_euclid(TAU));
            }
        }
    }

    for z in zeros.iter_mut() {
        *z = z.rem_euclid(TAU);
        if TAU - *z < 1e-12 {
            *z = 0.0;
        }
    }
    zeros.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(zeros.len());
    for z in zeros {
        let dup = out
            .iter()
            .any(|&o| (o - z).abs() < 1e-7 || TAU - (o - z).abs() < 1e-7);
        if !dup {
            out.push(z);
        }
    }
    Ok(out)
}

/// Bisection on a bracketed sign change. `tol = 0` runs to machine precision.
pub(crate) fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64, tol: f64) -> f64 {
    let mut f_lo = f_lo;
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn presets_expand() {
        let m = ModelSpec::ising();
        assert_eq!(m.w, 1);
        assert_eq!(m.a, vec![-1.0, 0.5]);
        assert_eq!(m.b, vec![-0.25]);
        assert_eq!(m.b_at(-1), 0.25);

        let m = ModelSpec::xy(2.0, 0.0).unwrap();
        assert_eq!(m.a, vec![-1.0, 1.0]);
        assert_eq!(m.b, vec![0.0]);
        assert!(m.is_isotropic());

        let m = ModelSpec::custom(vec![1.0], vec![]).unwrap();
        assert_eq!(m.w, 0);
        for k in [0.0, 1.0, 3.0] {
            assert_eq!(m.symbol(k).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(ModelSpec::custom(vec![0.0, 0.0], vec![0.0]).is_err());
        assert!(ModelSpec::custom(vec![f64::NAN], vec![]).is_err());
        assert!(ModelSpec::xy(f64::INFINITY, 0.5).is_err());
        assert!(ModelSpec::custom(vec![], vec![]).is_err());
    }

    #[test]
    fn symbol_values() {
        let g = ModelSpec::ising().symbol(PI).unwrap();
        assert_abs_diff_eq!(g.re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.im, 0.0, epsilon = 1e-15);

        let g = ModelSpec::xx(2.0).unwrap().symbol(0.0).unwrap();
        assert_eq!(g, Complex64::new(1.0, 0.0));

        // (a cos k − 1 + i aγ sin k)/|…| at a = 1, γ = 0.5, k = π/2.
        let g = ModelSpec::xy(1.0, 0.5).unwrap().symbol(PI / 2.0).unwrap();
        let expect = Complex64::new(-1.0, 0.5) / 1.25f64.sqrt();
        assert_abs_diff_eq!(g.re, expect.re, epsilon = 1e-15);
        assert_abs_diff_eq!(g.im, expect.im, epsilon = 1e-15);
    }

    #[test]
    fn singular_symbol_is_signalled() {
        let m = ModelSpec::xx(1.0).unwrap();
        assert!(matches!(m.symbol(0.0), Err(Error::SingularSymbol { .. })));
    }

    #[test]
    fn xx_fermi_points() {
        let p = classify_criticality(&ModelSpec::xx(2.0).unwrap(), DEFAULT_ROOT_TOL).unwrap();
        assert!(p.critical);
        assert_eq!(p.fermi_points.len(), 2);
        assert_abs_diff_eq!(p.fermi_points[0], PI / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.fermi_points[1], 5.0 * PI / 3.0, epsilon = 1e-9);
        for j in &p.jumps {
            assert_abs_diff_eq!(j.jump_exponent.re.abs(), 0.5, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(p.fisher_hartwig_exponent(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn gapped_xy_is_continuous() {
        let p = classify_criticality(&ModelSpec::xy(2.0, 0.5).unwrap(), DEFAULT_ROOT_TOL).unwrap();
        assert!(!p.critical);
        assert!(p.jumps.is_empty());
    }

    #[test]
    fn ising_single_jump() {
        let p = classify_criticality(&ModelSpec::ising(), DEFAULT_ROOT_TOL).unwrap();
        assert!(p.critical);
        assert_eq!(p.jumps.len(), 1);
        let j = &p.jumps[0];
        assert_abs_diff_eq!(j.k, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.jump_exponent.re, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(j.jump_exponent.im, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(j.left_limit.im, -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(j.right_limit.im, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn tangential_zero_is_marginal() {
        let p = classify_criticality(&ModelSpec::xx(1.0).unwrap(), DEFAULT_ROOT_TOL).unwrap();
        assert!(!p.critical);
        assert_eq!(p.marginal_points.len(), 1);
        assert_abs_diff_eq!(p.marginal_points[0], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn classification_is_deterministic() {
        let m = ModelSpec::xy(1.0, 0.3).unwrap();
        let a = classify_criticality(&m, DEFAULT_ROOT_TOL).unwrap();
        let b = classify_criticality(&m, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multi_band_isotropic() {
        // Λ = 2 cos 2k: four Fermi points at π/4 + mπ/2.
        let m = ModelSpec::custom(vec![0.0, 0.0, 1.0], vec![]).unwrap();
        let p = classify_criticality(&m, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(p.fermi_points.len(), 4);
        for (i, k) in p.fermi_points.iter().enumerate() {
            assert_abs_diff_eq!(*k, PI / 4.0 + i as f64 * PI / 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_nonpositive_root_tol() {
        assert!(classify_criticality(&ModelSpec::ising(), 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_model() -> impl Strategy<Value = ModelSpec> {
            (
                prop::collection::vec(-2.0f64..2.0, 1..4),
                prop::collection::vec(-1.0f64..1.0, 0..3),
            )
                .prop_filter_map("nonzero", |(a, b)| ModelSpec::custom(a, b).ok())
        }

        proptest! {
            #[test]
            fn symbol_unimodular_and_conjugate(m in any_model(), k in 0.0f64..TAU) {
                if let (Ok(g), Ok(h)) = (m.symbol(k), m.symbol(TAU - k)) {
                    prop_assert!((g.norm() - 1.0).abs() < 1e-14);
                    prop_assert!((g - h.conj()).norm() < 1e-12);
                }
            }

            #[test]
            fn xy_off_critical_line(a in 1.05f64..5.0, gamma in prop_oneof![-1.0f64..-0.05, 0.05f64..1.0]) {
                let p = classify_criticality(&ModelSpec::xy(a, gamma).unwrap(), DEFAULT_ROOT_TOL).unwrap();
                prop_assert!(!p.critical);
            }

            #[test]
            fn xy_on_critical_line(gamma in prop_oneof![-0.99f64..-0.01, 0.01f64..=1.0]) {
                let p = classify_criticality(&ModelSpec::xy(1.0, gamma).unwrap(), DEFAULT_ROOT_TOL).unwrap();
                prop_assert!(p.critical);
                prop_assert!((p.jumps[0].jump_exponent.re - 0.5).abs() < 1e-9);
            }

            #[test]
            fn isotropic_jumps_have_half_exponent(a in prop::collection::vec(-2.0f64..2.0, 2..4)) {
                if let Ok(m) = ModelSpec::custom(a, vec![]) {
                    let p = classify_criticality(&m, DEFAULT_ROOT_TOL).unwrap();
                    for j in &p.jumps {
                        prop_assert!((j.jump_exponent.norm() - 0.5).abs() < 1e-9);
                    }
                }
            }

            #[test]
            fn jumps_closed_under_reflection(m in any_model()) {
                let p = classify_criticality(&m, DEFAULT_ROOT_TOL).unwrap();
                for &k in &p.fermi_points {
                    let r = (TAU - k).rem_euclid(TAU);
                    let found = p.fermi_points.iter().any(|&o| {
                        let d = (o - r).abs();
                        d < 1e-7 || TAU - d < 1e-7
                    });
                    prop_assert!(found);
                }
            }
        }
    }
}
