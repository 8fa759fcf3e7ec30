//! Simultaneous-iteration (Aberth–Ehrlich) polynomial root finder and the
//! minimal-total-distance matching used to track roots along a grid.

use num_complex::Complex64;
use thiserror::Error;

use crate::tolerances::{ROOT_MAX_ITER, ROOT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("zero polynomial has no well-defined roots")]
    ZeroPolynomial,
    #[error("root finder did not converge after {iterations} iterations (last step {last_step:e}, residuals {residuals:?})")]
    NonConvergence { iterations: usize, last_step: f64, residuals: Vec<f64> },
}

/// Coefficients are low to high: c[0] + c[1] u + ... + c[n] u^n.
pub fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// All complex roots with multiplicity. Trailing zero coefficients at the
/// top are dropped; exact zero roots are split off before iterating.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, RootError> {
    let top = coeffs.iter().rposition(|c| c.norm() != 0.0).ok_or(RootError::ZeroPolynomial)?;
    let zeros = coeffs.iter().position(|c| c.norm() != 0.0).unwrap_or(0);
    let lead = coeffs[top];
    let mut monic: Vec<Complex64> = coeffs[zeros..=top].iter().map(|c| c / lead).collect();
    let n = monic.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); zeros];
    if n == 0 {
        return Ok(out);
    }
    // scale u = sigma w so the constant term has modulus one
    let sigma = monic[0].norm().powf(1.0 / n as f64);
    for (k, c) in monic.iter_mut().enumerate() {
        *c *= sigma.powi(k as i32 - n as i32);
    }
    if n == 1 {
        out.push(-monic[0] * sigma);
        return Ok(out);
    }
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let mut last_step = f64::INFINITY;
    let mut converged = false;
    for _ in 0..ROOT_MAX_ITER {
        last_step = 0.0;
        for i in 0..n {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                last_step = last_step.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if last_step <= ROOT_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        let residuals = z.iter().map(|&r| horner(&monic, r).0.norm()).collect();
        return Err(RootError::NonConvergence { iterations: ROOT_MAX_ITER, last_step, residuals });
    }
    for r in z.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = horner(&monic, *r);
            let step = p / dp;
            if step.is_finite() && step.norm() < 1e-6 * (1.0 + r.norm()) {
                *r -= step;
            }
        }
    }
    out.extend(z.into_iter().map(|r| r * sigma));
    Ok(out)
}

/// Assignment minimizing the total cost; returns `col[row]`. O(n^3) Hungarian
/// method on a square matrix.
pub fn min_cost_matching(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col = vec![0; n];
    for j in 1..=n {
        col[p[j] - 1] = j - 1;
    }
    col
}

/// Matches `next` to `prev` by minimal total distance; returns `next`
/// reordered so that entry i continues entry i of `prev`.
pub fn track(prev: &[Complex64], next: &[Complex64]) -> Vec<Complex64> {
    let cost: Vec<Vec<f64>> =
        prev.iter().map(|a| next.iter().map(|b| (a - b).norm()).collect()).collect();
    min_cost_matching(&cost).into_iter().map(|j| next[j]).collect()
}
