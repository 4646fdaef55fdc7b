//! Dense two-phase primal simplex for small standard-form programs:
//! maximize c^T x subject to A x = b, x >= 0. Bland's rule, so no cycling.
//! Problem sizes here are tiny (tens of variables), dense tableaus are fine.

use crate::error::{Error, Result};

const EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// Optimal objective value and a maximizer.
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// Solves max c^T x, A x = b, x >= 0 on a dense tableau.
/// Rows of `a` must each have `c.len()` entries.
pub fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpOutcome> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch("LP shape mismatch".into()));
    }
    if m == 0 {
        // Feasible at x = 0; unbounded iff some c_j > 0 (no constraints).
        if c.iter().any(|&cj| cj > EPS) {
            return Ok(LpOutcome::Unbounded);
        }
        return Ok(LpOutcome::Optimal { value: 0.0, x: vec![0.0; n] });
    }

    // Phase 1: artificial variable per row, minimize their sum. Flip rows so
    // b >= 0 first.
    let mut t = vec![vec![0.0; n + m + 1]; m];
    for i in 0..m {
        let sgn = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sgn * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][n + m] = sgn * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase-1 objective row: maximize -(sum of artificials).
    let mut obj = vec![0.0; n + m + 1];
    for j in n..n + m {
        obj[j] = -1.0;
    }
    reduce_objective(&mut obj, &t, &basis);
    run_simplex(&mut t, &mut obj, &mut basis)?;
    // obj[n + m] = -(phase-1 value) = sum of artificials at optimum.
    if obj[n + m] > 1e-8 {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive any artificial still basic out of the basis (degenerate rows),
    // or drop the row if it is identically zero on the original columns.
    for i in 0..m {
        if basis[i] >= n {
            let piv = (0..n).find(|&j| t[i][j].abs() > EPS);
            match piv {
                Some(j) => pivot(&mut t, &mut obj, &mut basis, i, j),
                None => {
                    // Redundant constraint; zero it so it never pivots again.
                    for v in t[i].iter_mut() {
                        *v = 0.0;
                    }
                }
            }
        }
    }

    // Phase 2: real objective over the original columns only.
    let mut obj2 = vec![0.0; n + m + 1];
    obj2[..n].copy_from_slice(c);
    // Block artificial columns.
    for row in t.iter_mut() {
        for j in n..n + m {
            row[j] = 0.0;
        }
    }
    reduce_objective(&mut obj2, &t, &basis);
    match run_simplex(&mut t, &mut obj2, &mut basis)? {
        true => {
            let mut x = vec![0.0; n];
            for i in 0..m {
                if basis[i] < n {
                    x[basis[i]] = t[i][n + m];
                }
            }
            Ok(LpOutcome::Optimal { value: -obj2[n + m], x })
        }
        false => Ok(LpOutcome::Unbounded),
    }
}

/// Subtracts basic rows so the objective row has zero reduced cost on the
/// basis. Convention: the last entry of `obj` holds minus the objective
/// value of the current basic solution, and pivots preserve that.
fn reduce_objective(obj: &mut [f64], t: &[Vec<f64>], basis: &[usize]) {
    let w = obj.len();
    for (i, &bi) in basis.iter().enumerate() {
        let coef = obj[bi];
        if coef.abs() > 0.0 {
            for j in 0..w {
                obj[j] -= coef * t[i][j];
            }
        }
    }
}

/// Bland's rule primal simplex on a tableau already in canonical form.
/// Returns Ok(true) on optimal, Ok(false) on unbounded.
fn run_simplex(t: &mut [Vec<f64>], obj: &mut [f64], basis: &mut [usize]) -> Result<bool> {
    let m = t.len();
    let w = obj.len();
    let ncols = w - 1;
    let mut iters = 0usize;
    let max_iters = 50_000 + 100 * (m + ncols) * (m + ncols);
    loop {
        iters += 1;
        if iters > max_iters {
            return Err(Error::LpFailure("iteration limit exceeded".into()));
        }
        // Entering: smallest index with positive reduced cost (maximization).
        let enter = (0..ncols).find(|&j| obj[j] > EPS);
        let Some(j) = enter else {
            return Ok(true);
        };
        // Leaving: min ratio, ties by smallest basis index (Bland).
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][j] > EPS {
                let ratio = t[i][ncols] / t[i][j];
                if ratio < best - EPS
                    || (ratio < best + EPS && leave.map_or(true, |l| basis[i] < basis[l]))
                {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(i) = leave else {
            return Ok(false);
        };
        pivot_obj(t, obj, basis, i, j);
    }
}

fn pivot_obj(t: &mut [Vec<f64>], obj: &mut [f64], basis: &mut [usize], r: usize, c: usize) {
    let w = t[r].len();
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    for i in 0..t.len() {
        if i != r && t[i][c].abs() > 0.0 {
            let f = t[i][c];
            for j in 0..w {
                t[i][j] -= f * t[r][j];
            }
        }
    }
    let f = obj[c];
    if f.abs() > 0.0 {
        for j in 0..w {
            obj[j] -= f * t[r][j];
        }
    }
    basis[r] = c;
}

fn pivot(t: &mut [Vec<f64>], obj: &mut [f64], basis: &mut [usize], r: usize, c: usize) {
    pivot_obj(t, obj, basis, r, c);
}
