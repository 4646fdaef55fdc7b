//! Admissibility of a blow-up configuration p_1..p_m: the d x m matrix
//! M with entries M[j][l] = xi_j(p_l) must have full rank d (condition 1)
//! and its kernel must meet the open positive cone (condition 2). The cone
//! test is a linear program: maximize t subject to M a = 0, sum a <= 1,
//! a_i >= t; the configuration is admissible iff the optimum exceeds a
//! positivity tolerance, in which case the maximizer has sum a = 1 and is
//! returned as a witness.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel_basis::{ConfigPoint, KernelBasis};
use crate::simplex::{self, LpOutcome};

/// Rank decisions use this relative singular-value threshold.
pub const RANK_TOL: f64 = 1e-9;
/// The LP optimum must exceed this for a positive verdict.
pub const POS_TOL: f64 = 1e-9;

/// The evaluation matrix with row labels (kernel functions) retained.
#[derive(Debug, Clone)]
pub struct AdmissibilityMatrix {
    /// d x m, row j = kernel function j, column l = point l.
    pub matrix: DMatrix<f64>,
    pub row_labels: Vec<String>,
}

impl AdmissibilityMatrix {
    pub fn d(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn m(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Outcome of the positive-kernel linear program.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeOutcome {
    /// Optimal min-coefficient t* (always >= 0 for this formulation since
    /// a = 0, t = 0 is feasible).
    pub t_star: f64,
    /// Kernel meets the open positive cone.
    pub positive: bool,
    /// t* is within tolerance of zero but the kernel still meets the closed
    /// cone nontrivially: a boundary configuration.
    pub marginal: bool,
    /// Maximizer a with sum a = 1 when positive.
    pub witness: Option<Vec<f64>>,
}

/// Full two-condition report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub d: usize,
    pub m: usize,
    /// Numerical rank (condition 1 value).
    pub c1: usize,
    pub kernel_dim: usize,
    /// Kernel meets the open positive cone (condition 2).
    pub c2: bool,
    pub margin: f64,
    /// t* within tolerance of zero but the kernel meets the closed cone.
    pub marginal: bool,
    pub witness: Option<Vec<f64>>,
    /// verdict = (c1 == d) && c2.
    pub verdict: bool,
    /// Complex dimension of the model, when known.
    pub n: Option<usize>,
    /// Normalizing constant c_n, when n is known and >= 2.
    pub cn: Option<f64>,
    /// a_0 = c_n * (sum of witness coefficients), when both are available.
    pub a0: Option<f64>,
    pub row_labels: Vec<String>,
    /// Row-major copy of the matrix at full double precision.
    pub matrix: Vec<Vec<f64>>,
}

/// Evaluates the basis at every point: column l is basis(p_l).
pub fn build_matrix(basis: &KernelBasis, points: &[ConfigPoint]) -> Result<AdmissibilityMatrix> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points given".into()));
    }
    let d = basis.len();
    let mut matrix = DMatrix::zeros(d, points.len());
    for (l, p) in points.iter().enumerate() {
        let col = basis.evaluate(p)?;
        for (j, v) in col.iter().enumerate() {
            matrix[(j, l)] = *v;
        }
    }
    Ok(AdmissibilityMatrix { matrix, row_labels: basis.labels.clone() })
}

/// Numerical rank at relative threshold `RANK_TOL`.
pub fn rank(mat: &AdmissibilityMatrix) -> usize {
    rank_of(&mat.matrix)
}

pub(crate) fn rank_of(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

/// Positive-kernel test via LP. Standard form variables:
/// b_i = a_i - t >= 0 (i = 1..m), t = u - v with u, v >= 0, slack s >= 0 on
/// the normalization row. Rows: M b + (M 1)(u - v) = 0 and
/// sum b + m (u - v) + s = 1. Objective: maximize u - v.
pub fn positive_kernel(mat: &AdmissibilityMatrix) -> Result<ConeOutcome> {
    let d = mat.d();
    let m = mat.m();
    let ncols = m + 3;
    let mut a = vec![vec![0.0; ncols]; d + 1];
    let mut b = vec![0.0; d + 1];
    for j in 0..d {
        let row_sum: f64 = (0..m).map(|l| mat.matrix[(j, l)]).sum();
        for l in 0..m {
            a[j][l] = mat.matrix[(j, l)];
        }
        a[j][m] = row_sum; // u
        a[j][m + 1] = -row_sum; // v
    }
    for l in 0..m {
        a[d][l] = 1.0;
    }
    a[d][m] = m as f64;
    a[d][m + 1] = -(m as f64);
    a[d][m + 2] = 1.0; // slack
    b[d] = 1.0;
    let mut c = vec![0.0; ncols];
    c[m] = 1.0;
    c[m + 1] = -1.0;

    let (t_star, x) = match simplex::solve(&a, &b, &c)? {
        LpOutcome::Optimal { value, x } => (value, x),
        LpOutcome::Infeasible => {
            return Err(Error::LpFailure("cone LP infeasible (a = 0 should always be feasible)".into()))
        }
        LpOutcome::Unbounded => {
            return Err(Error::LpFailure("cone LP unbounded (t <= 1/m by construction)".into()))
        }
    };

    let positive = t_star > POS_TOL;
    let witness = if positive {
        let t = x[m] - x[m + 1];
        let a_vec: Vec<f64> = (0..m).map(|l| x[l] + t).collect();
        validate_witness(mat, &a_vec, t_star)?;
        Some(a_vec)
    } else {
        None
    };

    // When t* ~ 0, separate a true boundary configuration (kernel meets the
    // closed cone nontrivially) from an empty intersection, by maximizing
    // sum a over M a = 0, 0 <= a_i <= 1.
    let marginal = if positive {
        false
    } else {
        closed_cone_mass(mat)? > POS_TOL
    };

    Ok(ConeOutcome { t_star, positive, marginal, witness })
}

/// max sum a s.t. M a = 0, 0 <= a <= 1. Zero iff kernel meets the closed
/// positive cone only at the origin.
fn closed_cone_mass(mat: &AdmissibilityMatrix) -> Result<f64> {
    let d = mat.d();
    let m = mat.m();
    // Columns: a_1..a_m, then one slack per upper bound.
    let ncols = 2 * m;
    let mut a = vec![vec![0.0; ncols]; d + m];
    let mut b = vec![0.0; d + m];
    for j in 0..d {
        for l in 0..m {
            a[j][l] = mat.matrix[(j, l)];
        }
    }
    for l in 0..m {
        a[d + l][l] = 1.0;
        a[d + l][m + l] = 1.0;
        b[d + l] = 1.0;
    }
    let mut c = vec![0.0; ncols];
    for l in 0..m {
        c[l] = 1.0;
    }
    match simplex::solve(&a, &b, &c)? {
        LpOutcome::Optimal { value, .. } => Ok(value),
        other => Err(Error::LpFailure(format!("bounded cone LP returned {other:?}"))),
    }
}

/// Post-hoc checks on an LP witness: kernel residual, normalization, and
/// min coefficient consistent with t*.
fn validate_witness(mat: &AdmissibilityMatrix, a: &[f64], t_star: f64) -> Result<()> {
    let m = mat.m();
    let mut residual = 0.0_f64;
    for j in 0..mat.d() {
        let r: f64 = (0..m).map(|l| mat.matrix[(j, l)] * a[l]).sum();
        residual = residual.max(r.abs());
    }
    let scale = 1.0 + mat.matrix.iter().cloned().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if residual > 1e-9 * scale {
        return Err(Error::Inconsistency(format!("witness kernel residual {residual}")));
    }
    let sum: f64 = a.iter().sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(Error::Inconsistency(format!("witness sum {sum}, expected 1 at a positive optimum")));
    }
    let min = a.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < t_star - 1e-8 {
        return Err(Error::Inconsistency(format!("witness min {min} below t* = {t_star}")));
    }
    Ok(())
}

/// The normalizing volume constant c_n for complex dimension n >= 2:
/// c_2 = 4 pi^2 and c_n = 4 (n - 2)(n - 1) * 2 pi^n / (n - 1)! for n >= 3.
pub fn cn(n: usize) -> Option<f64> {
    use std::f64::consts::PI;
    match n {
        0 | 1 => None,
        2 => Some(4.0 * PI * PI),
        _ => {
            let nf = n as f64;
            let mut fact = 1.0;
            for k in 2..n {
                fact *= k as f64;
            }
            Some(4.0 * (nf - 2.0) * (nf - 1.0) * 2.0 * PI.powi(n as i32) / fact)
        }
    }
}

/// Full admissibility check of a configuration against a basis.
pub fn check(basis: &KernelBasis, points: &[ConfigPoint]) -> Result<AdmissibilityReport> {
    let mat = build_matrix(basis, points)?;
    report_from_matrix(basis, mat)
}

fn report_from_matrix(basis: &KernelBasis, mat: AdmissibilityMatrix) -> Result<AdmissibilityReport> {
    let c1 = rank(&mat);
    let cone = positive_kernel(&mat)?;
    let verdict = c1 == mat.d() && cone.positive;
    let n = basis.manifold.complex_dimension();
    let cn_val = n.and_then(cn);
    let a0 = match (&cone.witness, cn_val) {
        (Some(w), Some(c)) => Some(c * w.iter().sum::<f64>()),
        _ => None,
    };
    Ok(AdmissibilityReport {
        d: mat.d(),
        m: mat.m(),
        c1,
        kernel_dim: mat.m().saturating_sub(c1),
        c2: cone.positive,
        margin: cone.t_star,
        marginal: cone.marginal,
        witness: cone.witness,
        verdict,
        n,
        cn: cn_val,
        a0,
        row_labels: mat.row_labels.clone(),
        matrix: (0..mat.d())
            .map(|j| (0..mat.m()).map(|l| mat.matrix[(j, l)]).collect())
            .collect(),
    })
}

/// Equivariant admissibility for orbit representatives under a finite
/// symmetry group: the reduced matrix has one column per orbit, weighted by
/// orbit size, over a basis of the invariant subspace. A consistency oracle
/// expands the orbits into a flat point list and re-checks with uniform
/// weights; verdicts must agree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivariantReport {
    pub reduced: AdmissibilityReport,
    pub orbit_sizes: Vec<usize>,
    /// Reduced and expanded verdicts agree.
    pub consistent: bool,
    /// Verdict of the expanded check.
    pub expanded_admissible: bool,
}

pub fn equivariant_check(
    basis: &KernelBasis,
    group: &crate::kernel_basis::SymmetryGroup,
    reps: &[ConfigPoint],
    seed: u64,
) -> Result<EquivariantReport> {
    if reps.is_empty() {
        return Err(Error::InvalidInput("no orbit representatives given".into()));
    }
    let inv = crate::kernel_basis::invariant_subbasis(basis, group, seed)?;
    if inv.is_empty() {
        return Err(Error::EmptyKernel);
    }

    let orbits: Vec<Vec<ConfigPoint>> = reps.iter().map(|p| group.orbit(p)).collect();
    let orbit_sizes: Vec<usize> = orbits.iter().map(|o| o.len()).collect();

    // Reduced matrix: invariant functions are constant on orbits, so one
    // weighted column per representative.
    let d = inv.len();
    let m = reps.len();
    let mut matrix = DMatrix::zeros(d, m);
    for (l, p) in reps.iter().enumerate() {
        let col = inv.evaluate(p)?;
        for (j, v) in col.iter().enumerate() {
            matrix[(j, l)] = orbit_sizes[l] as f64 * v;
        }
    }
    let mat = AdmissibilityMatrix { matrix, row_labels: inv.labels.clone() };
    let reduced = report_from_matrix(&inv, mat)?;

    // Oracle: same invariant basis over the flattened orbit points.
    let expanded: Vec<ConfigPoint> = orbits.into_iter().flatten().collect();
    let full = check(&inv, &expanded)?;
    let consistent = full.verdict == reduced.verdict;
    if !consistent {
        return Err(Error::Inconsistency(format!(
            "reduced verdict {} disagrees with orbit-expanded verdict {}",
            reduced.verdict, full.verdict
        )));
    }
    Ok(EquivariantReport { reduced, orbit_sizes, consistent, expanded_admissible: full.verdict })
}

/// Brute-force oracle for kernel dimension <= 2: parameterize the null space
/// by SVD, grid the coefficient sphere, and look for a strictly positive
/// kernel vector. Used by tests to cross-check the LP.
pub fn brute_force_positive(mat: &AdmissibilityMatrix, grid: usize) -> Result<Option<Vec<f64>>> {
    let m = mat.m();
    // The Gram matrix M^T M is m x m, so its full SVD exposes the whole
    // null space (singular values are squared, threshold accordingly).
    let gram = mat.matrix.transpose() * &mat.matrix;
    let svd = gram.svd(false, true);
    let vt = svd.v_t.as_ref().ok_or_else(|| Error::LpFailure("svd failed".into()))?;
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let r = if smax == 0.0 {
        0
    } else {
        // Squaring RANK_TOL would land below the SVD noise floor for exact
        // zeros (~eps * smax), so clamp the threshold from below.
        let tol = smax * (RANK_TOL * RANK_TOL).max(64.0 * m as f64 * f64::EPSILON);
        svd.singular_values.iter().filter(|&&s| s > tol).count()
    };
    let k = m - r;
    if k > 2 {
        return Err(Error::InvalidInput(format!("brute force limited to kernel dim <= 2, got {k}")));
    }
    if k == 0 {
        return Ok(None);
    }
    // Null space rows of V^T are indices r..m.
    let basis: Vec<Vec<f64>> = (r..m).map(|i| (0..m).map(|j| vt[(i, j)]).collect()).collect();
    let is_pos = |v: &[f64]| v.iter().all(|&x| x > 1e-9);
    if k == 1 {
        for sgn in [1.0, -1.0] {
            let cand: Vec<f64> = basis[0].iter().map(|x| sgn * x).collect();
            if is_pos(&cand) {
                return Ok(Some(cand));
            }
        }
        return Ok(None);
    }
    for i in 0..grid {
        let theta = std::f64::consts::TAU * i as f64 / grid as f64;
        let (c0, c1) = (theta.cos(), theta.sin());
        let cand: Vec<f64> =
            (0..m).map(|j| c0 * basis[0][j] + c1 * basis[1][j]).collect();
        if is_pos(&cand) {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}
