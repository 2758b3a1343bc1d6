//! Dense tableau simplex for `max cᵀx s.t. Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The origin is feasible, so no phase one is needed. Every solution is
//! checked against its dual certificate before it is returned.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;
/// Slack allowed in the primal/dual feasibility and duality-gap checks.
pub const CERT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual multipliers, one per constraint row.
    pub dual: Vec<f64>,
    pub iterations: usize,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = b.len();
    if a.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::LinearProgram("constraint matrix shape mismatch".into()));
    }
    if b.iter().any(|&v| !(v >= 0.0)) || c.iter().chain(a.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::LinearProgram("needs finite data with b >= 0".into()));
    }

    let width = n + m + 1;
    let mut tab = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let row = &mut tab[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = 1.0;
        row[width - 1] = b[i];
    }
    {
        let obj = &mut tab[m * width..];
        for j in 0..n {
            obj[j] = -c[j];
        }
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 50 * (n + m) + 100;
    let mut iterations = 0;
    let mut degenerate_run = 0;
    loop {
        let obj = &tab[m * width..(m + 1) * width - 1];
        // Dantzig's rule, falling back to Bland's after a long degenerate run.
        let entering = if degenerate_run > 50 {
            obj.iter().position(|&v| v < -PIVOT_EPS)
        } else {
            obj.iter()
                .enumerate()
                .filter(|(_, &v)| v < -PIVOT_EPS)
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(j, _)| j)
        };
        let Some(col) = entering else { break };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = tab[i * width + col];
            if aij > PIVOT_EPS {
                let ratio = tab[i * width + width - 1] / aij;
                let better = match leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, ratio)) = leave else {
            return Err(Error::LinearProgram("unbounded".into()));
        };
        degenerate_run = if ratio <= 1e-15 { degenerate_run + 1 } else { 0 };

        pivot(&mut tab, width, m, row, col);
        basis[row] = col;
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::LinearProgram(format!(
                "no convergence after {iterations} pivots"
            )));
        }
    }

    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab[i * width + width - 1].max(0.0);
        }
    }
    let dual: Vec<f64> = (0..m).map(|i| tab[m * width + n + i]).collect();
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    let sol = LpSolution {
        x,
        objective,
        dual,
        iterations,
    };
    verify(c, a, b, &sol)?;
    Ok(sol)
}

fn pivot(tab: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = tab[row * width + col];
    for v in &mut tab[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = tab[row * width..(row + 1) * width].to_vec();
    for i in 0..=m {
        if i == row {
            continue;
        }
        let f = tab[i * width + col];
        if f != 0.0 {
            let r = &mut tab[i * width..(i + 1) * width];
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            r[col] = 0.0;
        }
    }
}

/// Primal feasibility, dual feasibility and a closed duality gap.
pub fn verify(c: &[f64], a: &[Vec<f64>], b: &[f64], sol: &LpSolution) -> Result<()> {
    let scale = 1.0 + sol.objective.abs();
    for (i, row) in a.iter().enumerate() {
        let lhs: f64 = row.iter().zip(&sol.x).map(|(aij, xj)| aij * xj).sum();
        if lhs > b[i] + CERT_TOL {
            return Err(Error::LinearProgram(format!("row {i} violated by {:e}", lhs - b[i])));
        }
    }
    if sol.x.iter().any(|&v| v < -CERT_TOL) || sol.dual.iter().any(|&v| v < -CERT_TOL) {
        return Err(Error::LinearProgram("negative primal or dual entry".into()));
    }
    for j in 0..c.len() {
        let reduced: f64 = (0..b.len()).map(|i| a[i][j] * sol.dual[i]).sum::<f64>() - c[j];
        if reduced < -CERT_TOL * scale {
            return Err(Error::LinearProgram(format!("dual infeasible at column {j}")));
        }
    }
    let dual_obj: f64 = b.iter().zip(&sol.dual).map(|(bi, yi)| bi * yi).sum();
    if (dual_obj - sol.objective).abs() > CERT_TOL * scale {
        return Err(Error::LinearProgram(format!(
            "duality gap {:e}",
            dual_obj - sol.objective
        )));
    }
    Ok(())
}
