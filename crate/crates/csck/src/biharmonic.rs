//! Per-mode biharmonic extensions on the unit sphere in R^{2n}, the
//! Cauchy-data difference map P_gamma, and the linear mode matching used to
//! kill jumps between an inner and an outer model across r = 1.
//!
//! Everything acts diagonally per spherical-harmonic degree gamma: for a
//! degree-gamma harmonic Y and a radial power r^e,
//!
//!   Lap(r^e Y) = [e (e + 2n - 2) - gamma (gamma + 2n - 2)] r^{e-2} Y,
//!
//! so a biharmonic mode is spanned by r^gamma, r^{gamma+2} inside and
//! r^{2-2n-gamma}, r^{4-2n-gamma} outside. The factors
//! mu_gamma = 4 (gamma + n) and nu_gamma = -4 (gamma + n - 2) below are
//! derived from that identity and cross-checked by the finite-difference
//! oracle in the tests, with harmonics realized as Re((x1 + i x2)^gamma).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lap(r^{gamma+2} Y_gamma) = mu_gamma r^gamma Y_gamma.
pub fn mu_gamma(gamma: usize, n: usize) -> f64 {
    4.0 * (gamma + n) as f64
}

/// Lap(r^{4-2n-gamma} Y_gamma) = nu_gamma r^{2-2n-gamma} Y_gamma.
/// Vanishes for n = 2, gamma = 0 (the degenerate constant solution).
pub fn nu_gamma(gamma: usize, n: usize) -> f64 {
    -4.0 * (gamma as f64 + n as f64 - 2.0)
}

/// Boundary data of one mode on r = 1: the coefficients of the trace and
/// of the Laplacian trace against a fixed degree-gamma harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeData {
    pub gamma: usize,
    pub n: usize,
    pub h: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Inner,
    Outer,
}

/// A biharmonic mode (c1 r^{e1} + c2 r^{e2}) Y_gamma, valid on r <= 1
/// (inner) or r >= 1 (outer).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialSolution {
    pub side: Side,
    pub gamma: usize,
    pub n: usize,
    pub exponents: [i64; 2],
    pub coefficients: [f64; 2],
}

impl RadialSolution {
    fn sector(&self, e: i64) -> f64 {
        // Lap(r^e Y) / r^{e-2} Y.
        let g = self.gamma as f64;
        let m = 2.0 * self.n as f64 - 2.0;
        let e = e as f64;
        e * (e + m) - g * (g + m)
    }

    /// Radial profile p(r) with the solution p(r) Y_gamma.
    pub fn profile(&self, r: f64) -> f64 {
        self.coefficients[0] * r.powi(self.exponents[0] as i32)
            + self.coefficients[1] * r.powi(self.exponents[1] as i32)
    }

    pub fn profile_dr(&self, r: f64) -> f64 {
        self.coefficients[0]
            * self.exponents[0] as f64
            * r.powi(self.exponents[0] as i32 - 1)
            + self.coefficients[1]
                * self.exponents[1] as f64
                * r.powi(self.exponents[1] as i32 - 1)
    }

    /// Profile of the Laplacian (again times Y_gamma).
    pub fn laplacian_profile(&self, r: f64) -> f64 {
        self.sector(self.exponents[0])
            * self.coefficients[0]
            * r.powi(self.exponents[0] as i32 - 2)
            + self.sector(self.exponents[1])
                * self.coefficients[1]
                * r.powi(self.exponents[1] as i32 - 2)
    }

    pub fn laplacian_profile_dr(&self, r: f64) -> f64 {
        self.sector(self.exponents[0])
            * self.coefficients[0]
            * (self.exponents[0] - 2) as f64
            * r.powi(self.exponents[0] as i32 - 3)
            + self.sector(self.exponents[1])
                * self.coefficients[1]
                * (self.exponents[1] - 2) as f64
                * r.powi(self.exponents[1] as i32 - 3)
    }

    /// The solution as a function on R^{2n}, with Y_gamma realized as the
    /// homogeneous harmonic Re((x1 + i x2)^gamma) divided by r^gamma.
    pub fn eval_ambient(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y = harmonic_poly(self.gamma, x);
        self.profile(r) * y / r.powi(self.gamma as i32)
    }

    /// Relative bilaplacian residual at x by finite differences. The base
    /// step is rescaled by the mode's derivative growth rate: quartic
    /// differences lose eps/h^4 to rounding while the truncation error
    /// grows like h^4 times the eighth derivative, so the step balancing
    /// the two shrinks as the radial exponents grow.
    pub fn fd_residual(&self, x: &[f64]) -> f64 {
        let p = self
            .exponents
            .iter()
            .map(|e| (e - self.gamma as i64).unsigned_abs())
            .max()
            .unwrap();
        let growth = (p + self.gamma as u64 + 8) as f64;
        let f = |y: &[f64]| self.eval_ambient(y);
        [0.08, 0.12, 0.2, 0.3, 0.45, 0.7]
            .iter()
            .map(|c| {
                let h = (c / growth).clamp(1e-3, 7e-2);
                let (bi, scale) = fd_bilaplacian(&f, x, h);
                bi.abs() / scale
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Re((x1 + i x2)^gamma): a degree-gamma homogeneous harmonic polynomial
/// in any ambient dimension >= 2.
pub fn harmonic_poly(gamma: usize, x: &[f64]) -> f64 {
    let mut re = 1.0_f64;
    let mut im = 0.0_f64;
    for _ in 0..gamma {
        let nr = re * x[0] - im * x[1];
        im = re * x[1] + im * x[0];
        re = nr;
    }
    re
}

/// Bounded biharmonic extension to the ball with trace h and Laplacian
/// trace k on one mode.
pub fn inner_extension_mode(md: ModeData) -> RadialSolution {
    let mu = mu_gamma(md.gamma, md.n);
    let c2 = md.k / mu;
    let c1 = md.h - c2;
    RadialSolution {
        side: Side::Inner,
        gamma: md.gamma,
        n: md.n,
        exponents: [md.gamma as i64, md.gamma as i64 + 2],
        coefficients: [c1, c2],
    }
}

/// Decaying biharmonic extension to the exterior. For gamma = 0 the data
/// must have k = 0: the second radial solution either violates the decay
/// class (n >= 3) or degenerates to a constant (n = 2), and no logarithm is
/// introduced.
pub fn outer_extension_mode(md: ModeData) -> Result<RadialSolution> {
    let e1 = 2 - 2 * md.n as i64 - md.gamma as i64;
    let e2 = 4 - 2 * md.n as i64 - md.gamma as i64;
    if md.gamma == 0 {
        if md.k != 0.0 {
            return Err(Error::MeanZeroViolation(md.k));
        }
        return Ok(RadialSolution {
            side: Side::Outer,
            gamma: 0,
            n: md.n,
            exponents: [e1, e2],
            coefficients: [md.h, 0.0],
        });
    }
    let nu = nu_gamma(md.gamma, md.n);
    let c2 = md.k / nu;
    let c1 = md.h - c2;
    Ok(RadialSolution {
        side: Side::Outer,
        gamma: md.gamma,
        n: md.n,
        exponents: [e1, e2],
        coefficients: [c1, c2],
    })
}

/// The map P_gamma taking shared boundary data (h, k) to the jump of
/// (radial derivative, radial derivative of the Laplacian) between the
/// outer and inner extensions at r = 1. Upper triangular with diagonal
/// -(2n - 2 + 2 gamma), hence always invertible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoissonMap {
    pub gamma: usize,
    pub n: usize,
    pub matrix: [[f64; 2]; 2],
    pub det: f64,
    pub condition: f64,
    /// gamma = 0 acts on the k = 0 subspace only; the matrix is then the
    /// scalar h -> (2 - 2n) h padded to 2x2.
    pub restricted: bool,
}

impl PoissonMap {
    pub fn apply(&self, h: f64, k: f64) -> (f64, f64) {
        (
            self.matrix[0][0] * h + self.matrix[0][1] * k,
            self.matrix[1][0] * h + self.matrix[1][1] * k,
        )
    }

    fn solve(&self, b0: f64, b1: f64) -> Result<(f64, f64)> {
        if self.det.abs() < 1e-12 {
            return Err(Error::Inconsistency(format!(
                "singular mode map at gamma = {}, n = {}",
                self.gamma, self.n
            )));
        }
        // Upper triangular.
        let k = b1 / self.matrix[1][1];
        let h = (b0 - self.matrix[0][1] * k) / self.matrix[0][0];
        Ok((h, k))
    }
}

/// Jump data of the outer extension at r = 1 for data (h, k):
/// (d_r H, d_r Lap H). For the inner side see `match_mode`.
pub fn poisson_map_mode(gamma: usize, n: usize) -> PoissonMap {
    let diag = -(2.0 * n as f64 - 2.0 + 2.0 * gamma as f64);
    let (matrix, restricted) = if gamma == 0 {
        ([[diag, 0.0], [0.0, diag]], true)
    } else {
        let mu = mu_gamma(gamma, n);
        let nu = nu_gamma(gamma, n);
        ([[diag, 2.0 * (1.0 / nu - 1.0 / mu)], [0.0, diag]], false)
    };
    let m = nalgebra::Matrix2::new(matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1]);
    let svd = m.svd(false, false);
    let smax = svd.singular_values[0].max(svd.singular_values[1]);
    let smin = svd.singular_values[0].min(svd.singular_values[1]);
    PoissonMap {
        gamma,
        n,
        matrix,
        det: diag * diag,
        condition: smax / smin,
        restricted,
    }
}

/// Result of matching one mode across r = 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub inner: ModeData,
    pub outer: ModeData,
    /// gamma = 0 only: coefficient of the extra model solution (r^{4-2n}
    /// for n >= 3, 2 log r for n = 2) that absorbs the fourth condition.
    pub model_coef: f64,
}

/// Cauchy data (value, d_r, Lap, d_r Lap) at r = 1 of the gamma = 0 model
/// adjustment direction.
fn radial_model_data(n: usize) -> [f64; 4] {
    if n == 2 {
        // 2 log r in R^4.
        [0.0, 2.0, 4.0, -8.0]
    } else {
        let e = 4.0 - 2.0 * n as f64;
        let nu = nu_gamma(0, n);
        [1.0, e, nu, (2.0 - 2.0 * n as f64) * nu]
    }
}

/// Solves for boundary data of inner and outer biharmonic corrections so
/// that the corrected two-sided function has matching value, radial
/// derivative, Laplacian, and radial derivative of the Laplacian at r = 1,
/// given the jumps (outer model - inner model) of those four quantities.
///
/// For gamma >= 1 the four corrections (h, k) per side are determined by
/// direct matching of value and Laplacian plus inversion of P_gamma. For
/// gamma = 0 the outer correction is restricted to k = 0 and the model
/// coefficient direction supplies the missing degree of freedom.
pub fn match_mode(
    gamma: usize,
    n: usize,
    jump_h: f64,
    jump_dh: f64,
    jump_lap: f64,
    jump_dlap: f64,
) -> Result<MatchOutcome> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("need n >= 2, got {n}")));
    }
    if gamma == 0 {
        let mu = mu_gamma(0, n);
        let m = radial_model_data(n);
        // Unknowns: t (model coefficient), k_i, h_o, h_i. The system is
        // triangular in that order.
        if m[3] == 0.0 {
            return Err(Error::Inconsistency(
                "degenerate radial model direction".into(),
            ));
        }
        let t = -jump_dlap / m[3];
        let k_i = jump_lap + m[2] * t;
        let diag = 2.0 - 2.0 * n as f64;
        let h_o = (-jump_dh - m[1] * t + 2.0 * k_i / mu) / diag;
        let h_i = h_o + t * m[0] + jump_h;
        return Ok(MatchOutcome {
            inner: ModeData { gamma, n, h: h_i, k: k_i },
            outer: ModeData { gamma, n, h: h_o, k: 0.0 },
            model_coef: t,
        });
    }

    let p = poisson_map_mode(gamma, n);
    // With h_i = h_o + jump_h and k_i = k_o + jump_lap the derivative
    // conditions reduce to P (h_o, k_o) = -(jump_dh, jump_dlap)
    // + D_inner(jump_h, jump_lap), where D_inner is the inner side's
    // boundary-to-derivative map.
    let mu = mu_gamma(gamma, n);
    let g = gamma as f64;
    let di = (g * jump_h + 2.0 * jump_lap / mu, g * jump_lap);
    let (h_o, k_o) = p.solve(-jump_dh + di.0, -jump_dlap + di.1)?;
    Ok(MatchOutcome {
        inner: ModeData { gamma, n, h: h_o + jump_h, k: k_o + jump_lap },
        outer: ModeData { gamma, n, h: h_o, k: k_o },
        model_coef: 0.0,
    })
}

/// Offsets absorbed into the boundary data when the model's decay
/// coefficient is shifted from a to a_tilde: the value offset
/// (a_tilde - a) eps^{2n-2} r_eps^{4-2n} and the Laplacian offset
/// 2 (4 - 2n) times it. For n = 2 the radial power degenerates to the
/// logarithm's coefficient and the Laplacian offset vanishes; the same
/// formulas specialize correctly.
pub fn reparameterize(a: f64, a_tilde: f64, eps: f64, n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("need n >= 2, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("need 0 < eps < 1, got {eps}")));
    }
    let radii = crate::asymptotics::glue_radii(eps, n)?;
    let h = (a_tilde - a)
        * radii.r.powi(4 - 2 * n as i32)
        * eps.powi(2 * n as i32 - 2);
    let k = 2.0 * (4.0 - 2.0 * n as f64) * h;
    Ok((h, k))
}

/// Laplacian by central differences with one Richardson step (O(h^4)).
pub fn fd_laplacian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> f64 {
    let lap = |h: f64| -> f64 {
        let f0 = f(x);
        let mut acc = 0.0;
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            acc += (fp - 2.0 * f0 + fm) / (h * h);
        }
        acc
    };
    let a = lap(h);
    let b = lap(h / 2.0);
    (4.0 * b - a) / 3.0
}

/// Bilaplacian by direct fourth-difference and mixed stencils with one
/// Richardson step. Returns (value, scale) where scale is the magnitude of
/// the individual stencil contributions, for relative residual tests.
pub fn fd_bilaplacian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> (f64, f64) {
    let d = x.len();
    let eval = |h: f64| -> (f64, f64) {
        let f0 = f(x);
        let h4 = h * h * h * h;
        let mut total = 0.0;
        let mut scale = 0.0_f64;
        let mut xp = x.to_vec();
        let shift = |xp: &mut Vec<f64>, i: usize, s: f64| {
            xp[i] = x[i] + s * h;
        };
        for i in 0..d {
            shift(&mut xp, i, 2.0);
            let f2p = f(&xp);
            shift(&mut xp, i, 1.0);
            let f1p = f(&xp);
            shift(&mut xp, i, -1.0);
            let f1m = f(&xp);
            shift(&mut xp, i, -2.0);
            let f2m = f(&xp);
            xp[i] = x[i];
            let term = (f2p - 4.0 * f1p + 6.0 * f0 - 4.0 * f1m + f2m) / h4;
            total += term;
            scale = scale.max(term.abs());
        }
        for i in 0..d {
            for j in i + 1..d {
                let mut v = |si: f64, sj: f64| -> f64 {
                    xp[i] = x[i] + si * h;
                    xp[j] = x[j] + sj * h;
                    let val = f(&xp);
                    xp[i] = x[i];
                    xp[j] = x[j];
                    val
                };
                let term = (v(1.0, 1.0) + v(1.0, -1.0) + v(-1.0, 1.0) + v(-1.0, -1.0)
                    - 2.0 * (v(1.0, 0.0) + v(-1.0, 0.0) + v(0.0, 1.0) + v(0.0, -1.0))
                    + 4.0 * f0)
                    / h4;
                total += 2.0 * term;
                scale = scale.max(term.abs());
            }
        }
        (total, scale)
    };
    // Two Richardson levels: the plain stencil is O(h^2), one level gives
    // O(h^4), two give O(h^6), which lets h stay large enough that the
    // eps/h^4 rounding loss is negligible.
    let (a, sa) = eval(h);
    let (b, sb) = eval(h / 2.0);
    let (c, sc) = eval(h / 4.0);
    let c1 = (4.0 * b - a) / 3.0;
    let c2 = (4.0 * c - b) / 3.0;
    ((16.0 * c2 - c1) / 15.0, sa.max(sb).max(sc).max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive;
    use rand::Rng;

    fn random_point(n: usize, r_lo: f64, r_hi: f64, counter: u64) -> Vec<f64> {
        let mut rng = derive(crate::DEFAULT_SEED, "biharmonic-test", counter);
        let d = 2 * n;
        loop {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > 0.3 {
                let target = rng.gen_range(r_lo..r_hi);
                return x.iter().map(|v| v * target / r).collect();
            }
        }
    }

    #[test]
    fn mu_verified_by_finite_differences() {
        for n in 2..=3 {
            for gamma in 0..=4 {
                let f = |x: &[f64]| {
                    let r2 = x.iter().map(|v| v * v).sum::<f64>();
                    r2 * harmonic_poly(gamma, x)
                };
                for c in 0..5 {
                    let x = random_point(n, 0.5, 1.2, 100 * gamma as u64 + c);
                    let lap = fd_laplacian(&f, &x, 1e-3);
                    let expect = mu_gamma(gamma, n) * harmonic_poly(gamma, &x);
                    let scale = 1.0 + expect.abs();
                    assert!(
                        (lap - expect).abs() / scale < 1e-6,
                        "n={n} gamma={gamma}: fd {lap} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn nu_verified_by_finite_differences() {
        for n in 2..=3 {
            for gamma in 0..=3 {
                let e = 4 - 2 * n as i32 - gamma as i32;
                let f = |x: &[f64]| {
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    r.powi(e) * harmonic_poly(gamma, x) / r.powi(gamma as i32)
                };
                for c in 0..5 {
                    let x = random_point(n, 0.9, 1.5, 500 + 100 * gamma as u64 + c);
                    let lap = fd_laplacian(&f, &x, 1e-4);
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let expect = nu_gamma(gamma, n)
                        * r.powi(2 - 2 * n as i32 - gamma as i32)
                        * harmonic_poly(gamma, &x)
                        / r.powi(gamma as i32);
                    let scale = 1.0 + expect.abs();
                    assert!(
                        (lap - expect).abs() / scale < 1e-5,
                        "n={n} gamma={gamma}: fd {lap} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn trivial_extensions() {
        let one = inner_extension_mode(ModeData { gamma: 0, n: 3, h: 1.0, k: 0.0 });
        assert_eq!(one.coefficients, [1.0, 0.0]);
        assert!((one.profile(0.37) - 1.0).abs() < 1e-15);

        let zero = inner_extension_mode(ModeData { gamma: 0, n: 3, h: 0.0, k: 0.0 });
        assert_eq!(zero.coefficients, [0.0, 0.0]);

        // gamma=1, h=0, k=1, n=2: c1 + c2 = 0, mu_1 c2 = 1.
        let s = inner_extension_mode(ModeData { gamma: 1, n: 2, h: 0.0, k: 1.0 });
        assert!((s.coefficients[0] + s.coefficients[1]).abs() < 1e-15);
        assert!((mu_gamma(1, 2) * s.coefficients[1] - 1.0).abs() < 1e-15);
        // Oracle value of mu_1 in R^4: Lap(r^3 Y_1) = mu_1 r Y_1.
        let f = |x: &[f64]| {
            let r2 = x.iter().map(|v| v * v).sum::<f64>();
            r2 * x[0]
        };
        let x = random_point(2, 0.5, 1.0, 7);
        let mu_fd = fd_laplacian(&f, &x, 1e-3) / x[0];
        assert!((mu_fd - mu_gamma(1, 2)).abs() < 1e-5, "mu_fd = {mu_fd}");
    }

    #[test]
    fn outer_examples() {
        let s = outer_extension_mode(ModeData { gamma: 0, n: 3, h: 1.0, k: 0.0 }).unwrap();
        assert_eq!(s.exponents[0], -4);
        assert_eq!(s.coefficients, [1.0, 0.0]);

        match outer_extension_mode(ModeData { gamma: 0, n: 3, h: 1.0, k: 0.1 }) {
            Err(Error::MeanZeroViolation(k)) => assert!((k - 0.1).abs() < 1e-15),
            other => panic!("expected mean-zero violation, got {other:?}"),
        }

        // gamma=1, n=2: dominant decay exponent exactly 3 - 2n = -1.
        let s = outer_extension_mode(ModeData { gamma: 1, n: 2, h: 1.0, k: 0.0 }).unwrap();
        assert_eq!(s.exponents.iter().max().unwrap(), &-1);
        for gamma in 1..6 {
            let s =
                outer_extension_mode(ModeData { gamma, n: 2, h: 1.0, k: 0.5 }).unwrap();
            assert!(s.exponents.iter().all(|&e| e <= 3 - 2 * 2));
        }
    }

    #[test]
    fn boundary_traces_roundtrip() {
        for n in 2..=4 {
            for gamma in 0..=6 {
                let md = ModeData { gamma, n, h: 0.7, k: if gamma == 0 { 0.0 } else { -1.3 } };
                let inner = inner_extension_mode(md);
                assert!((inner.profile(1.0) - md.h).abs() < 1e-10);
                assert!((inner.laplacian_profile(1.0) - md.k).abs() < 1e-10);
                let outer = outer_extension_mode(md).unwrap();
                assert!((outer.profile(1.0) - md.h).abs() < 1e-10);
                assert!((outer.laplacian_profile(1.0) - md.k).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn extension_linearity() {
        let a = ModeData { gamma: 2, n: 3, h: 1.1, k: -0.4 };
        let b = ModeData { gamma: 2, n: 3, h: -0.3, k: 2.2 };
        let (al, be) = (0.6, -1.7);
        let comb = ModeData {
            gamma: 2,
            n: 3,
            h: al * a.h + be * b.h,
            k: al * a.k + be * b.k,
        };
        let ea = inner_extension_mode(a);
        let eb = inner_extension_mode(b);
        let ec = inner_extension_mode(comb);
        for i in 0..2 {
            assert!(
                (ec.coefficients[i] - (al * ea.coefficients[i] + be * eb.coefficients[i]))
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn biharmonic_fd_residuals() {
        let mut counter = 0;
        for n in 2..=3usize {
            for gamma in [0usize, 1, 3, 5] {
                let k = if gamma == 0 { 0.0 } else { 0.8 };
                let md = ModeData { gamma, n, h: 1.0, k };
                let cases = [
                    (inner_extension_mode(md), 0.5, 1.0),
                    (outer_extension_mode(md).unwrap(), 1.0, 1.6),
                ];
                for (sol, lo, hi) in cases {
                    for _ in 0..20 {
                        counter += 1;
                        let x = random_point(n, lo, hi, 10_000 + counter);
                        let res = sol.fd_residual(&x);
                        assert!(
                            res < 1e-6,
                            "n={n} gamma={gamma} side={:?}: residual {res}",
                            sol.side
                        );
                    }
                }
            }
        }
        // Negative control: r^4 is not biharmonic and must be flagged.
        let fake = RadialSolution {
            side: Side::Inner,
            gamma: 0,
            n: 2,
            exponents: [4, 4],
            coefficients: [0.5, 0.5],
        };
        let x = random_point(2, 0.5, 1.0, 999_999);
        assert!(fake.fd_residual(&x) > 1e-4, "oracle failed to flag r^4");
    }

    #[test]
    fn poisson_map_sweep() {
        for n in 2..=5 {
            for gamma in 0..=20 {
                let p = poisson_map_mode(gamma, n);
                assert!(p.det.abs() > 1e-8, "n={n} gamma={gamma}");
                assert!(p.condition.is_finite());
                assert_eq!(p.apply(0.0, 0.0), (0.0, 0.0));
            }
        }
        assert!(poisson_map_mode(1, 2).det.abs() > 1e-6);
    }

    #[test]
    fn poisson_map_matches_extensions() {
        // P applied to (h, k) equals the derivative jumps of the actual
        // extensions for gamma >= 1.
        for n in 2..=4 {
            for gamma in 1..=6 {
                let md = ModeData { gamma, n, h: 0.9, k: -0.5 };
                let inner = inner_extension_mode(md);
                let outer = outer_extension_mode(md).unwrap();
                let p = poisson_map_mode(gamma, n);
                let (d1, d2) = p.apply(md.h, md.k);
                assert!((d1 - (outer.profile_dr(1.0) - inner.profile_dr(1.0))).abs() < 1e-10);
                assert!(
                    (d2 - (outer.laplacian_profile_dr(1.0)
                        - inner.laplacian_profile_dr(1.0)))
                    .abs()
                        < 1e-10
                );
            }
        }
    }

    #[test]
    fn match_zero_jumps() {
        for gamma in [0usize, 1, 4] {
            let m = match_mode(gamma, 3, 0.0, 0.0, 0.0, 0.0).unwrap();
            assert_eq!(m.inner.h, 0.0);
            assert_eq!(m.inner.k, 0.0);
            assert_eq!(m.outer.h, 0.0);
            assert_eq!(m.outer.k, 0.0);
            assert_eq!(m.model_coef, 0.0);
        }
    }

    #[test]
    fn match_roundtrip_known_pair() {
        for n in 2..=4 {
            for gamma in 1..=8 {
                let mdi = ModeData { gamma, n, h: 0.4, k: 1.7 };
                let mdo = ModeData { gamma, n, h: -1.1, k: 0.6 };
                let inner = inner_extension_mode(mdi);
                let outer = outer_extension_mode(mdo).unwrap();
                let j_val = outer.profile(1.0) - inner.profile(1.0);
                let j_dr = outer.profile_dr(1.0) - inner.profile_dr(1.0);
                let j_lap = outer.laplacian_profile(1.0) - inner.laplacian_profile(1.0);
                let j_dlap =
                    outer.laplacian_profile_dr(1.0) - inner.laplacian_profile_dr(1.0);
                let m = match_mode(gamma, n, j_val, j_dr, j_lap, j_dlap).unwrap();
                assert!((m.inner.h + mdi.h).abs() < 1e-10, "n={n} gamma={gamma}");
                assert!((m.inner.k + mdi.k).abs() < 1e-10);
                assert!((m.outer.h + mdo.h).abs() < 1e-10);
                assert!((m.outer.k + mdo.k).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn radial_match_consistent_with_reparameterization() {
        // Jumps produced by shifting the model decay coefficient from a to
        // a_tilde are absorbed entirely by the model direction.
        for n in 3..=5 {
            let (a, a_tilde, eps) = (1.0, 2.5, 1e-2);
            let (h_off, k_off) = reparameterize(a, a_tilde, eps, n).unwrap();
            assert!((k_off - 2.0 * (4.0 - 2.0 * n as f64) * h_off).abs() < 1e-15);
            let m = radial_model_data(n);
            let j: Vec<f64> = m.iter().map(|c| -h_off * c).collect();
            let out = match_mode(0, n, j[0], j[1], j[2], j[3]).unwrap();
            let scale = h_off.abs();
            assert!((out.model_coef - h_off).abs() < 1e-12 * scale.max(1.0));
            assert!(out.inner.h.abs() < 1e-10 * scale.max(1.0));
            assert!(out.inner.k.abs() < 1e-10 * scale.max(1.0));
            assert!(out.outer.h.abs() < 1e-10 * scale.max(1.0));
        }
        // k_off / h_off = 2 (4 - 2n) specializes to 0 at n = 2.
        let (h2, k2) = reparameterize(0.3, 0.9, 1e-2, 2).unwrap();
        assert!(h2 > 0.0);
        assert_eq!(k2, 0.0);
    }

    #[test]
    fn match_n2_log_direction() {
        // The n = 2 radial matching uses the 2 log r direction, whose
        // Cauchy data is (0, 2, 4, -8).
        let t = 0.37;
        let j = [0.0, -2.0 * t, -4.0 * t, 8.0 * t];
        let out = match_mode(0, 2, j[0], j[1], j[2], j[3]).unwrap();
        assert!((out.model_coef - t).abs() < 1e-12);
        assert!(out.inner.h.abs() < 1e-12);
        assert!(out.inner.k.abs() < 1e-12);
        assert!(out.outer.h.abs() < 1e-12);
    }

    #[test]
    fn reparameterize_examples() {
        let (h, _) = reparameterize(1.0, 1.0, 1e-2, 4).unwrap();
        assert_eq!(h, 0.0);
        // n=3, a_tilde - a = 1, eps = 1e-2: eps^4 r^{-2} = eps^{18/7}.
        let (h, _) = reparameterize(0.0, 1.0, 1e-2, 3).unwrap();
        let expect = 1e-2f64.powf(18.0 / 7.0);
        assert!((h - expect).abs() / expect < 1e-12, "h = {h}, expect {expect}");
        assert!(reparameterize(0.0, 1.0, 2.0, 3).is_err());
    }
}
