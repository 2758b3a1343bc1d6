//! Gauss–Legendre rules and a panel-bisecting adaptive integrator.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared 64-point rule.
    pub fn order64() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(64))
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Mapped nodes and scaled weights on `[a, b]`.
    pub fn panel(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive integration: a panel is accepted when its rule value agrees with
/// the sum over its two halves to within its share of `abs_tol`.
pub fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<(f64, f64)> {
    let rule = GaussLegendre::new(15);
    let whole = rule.integrate(f, a, b);
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut total = 0.0;
    let mut err = 0.0;
    let mut evals = rule.nodes.len();
    let width = b - a;
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(f, lo, mid);
        let right = rule.integrate(f, mid, hi);
        evals += 2 * rule.nodes.len();
        let fine = left + right;
        let diff = (fine - coarse).abs();
        let share = abs_tol * (hi - lo) / width;
        if diff <= share || depth >= 60 || evals > max_evals {
            total += fine;
            err += diff;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    if err > abs_tol {
        return Err(Error::Quadrature {
            achieved: err,
            wanted: abs_tol,
        });
    }
    Ok((total, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let r = GaussLegendre::new(8);
        // Degree 15 is exact for 8 points.
        let v = r.integrate(&|x| x.powi(14) + 3.0 * x.powi(15), -1.0, 1.0);
        assert_abs_diff_eq!(v, 2.0 / 15.0, epsilon = 1e-14);
        let w: f64 = GaussLegendre::order64().weights.iter().sum();
        assert_abs_diff_eq!(w, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn nodes_symmetric_and_sorted() {
        let r = GaussLegendre::order64();
        for i in 0..64 {
            assert_abs_diff_eq!(r.nodes[i], -r.nodes[63 - i], epsilon = 1e-15);
        }
        assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let (v, _) = adaptive(&|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-8, 1 << 22).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = adaptive(&|x: f64| 1.0 / x, 0.0, 1.0, 1e-12, 2000);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
