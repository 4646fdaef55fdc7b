//! Randomized property suites under a fixed RNG seed. Each suite encodes an
//! invariant the library promises, not a regression value.

use csck::admissibility::{self, AdmissibilityMatrix};
use csck::asymptotics::{self, q, AffineExp, EpsPower, InequalityGroup};
use csck::biharmonic::{inner_extension_mode, match_mode, outer_extension_mode, ModeData};
use csck::kernel_basis::{
    pn_kernel_basis, ConfigPoint, Factor, FactorPoint, KernelBasis, KernelFn, ModelManifold,
    SymmetryGroup,
};
use csck::point_search::{adjoin_point, random_rank_search};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(csck::DEFAULT_SEED),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn matrix_strategy(max_d: usize, max_kdim: usize) -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1..=max_d, 1..=max_kdim).prop_flat_map(|(d, k)| {
        let m = d + k;
        (Just(d), Just(m), proptest::collection::vec(-1.0..1.0f64, d * m))
    })
}

fn to_matrix(d: usize, m: usize, data: &[f64]) -> AdmissibilityMatrix {
    AdmissibilityMatrix {
        matrix: DMatrix::from_row_slice(d, m, data),
        row_labels: (0..d).map(|i| format!("r{i}")).collect(),
    }
}

proptest! {
    #![proptest_config(cfg(128))]

    // Verdict is invariant under invertible changes of the kernel basis
    // (left multiplication), column permutations, and positive column
    // scaling; the kernel of the matrix does not move.
    #[test]
    fn verdict_invariance((d, m, data) in matrix_strategy(4, 2),
                          t_off in proptest::collection::vec(-0.3..0.3f64, 16),
                          shift in 0usize..6,
                          scales in proptest::collection::vec(-2.0..2.0f64, 6)) {
        let mat = to_matrix(d, m, &data);
        prop_assume!(admissibility::rank(&mat) == d);
        let lp = admissibility::positive_kernel(&mat).unwrap();
        prop_assume!(lp.t_star.abs() > 1e-6); // off the cone boundary

        // Diagonally dominant T: invertible with modest condition number.
        let t = DMatrix::from_fn(d, d, |i, j| {
            if i == j { 2.5 } else { t_off[(i * d + j) % t_off.len()] }
        });
        let tm = AdmissibilityMatrix { matrix: &t * &mat.matrix, row_labels: mat.row_labels.clone() };
        prop_assert_eq!(admissibility::positive_kernel(&tm).unwrap().positive, lp.positive);

        let shift = shift % m;
        let pm = DMatrix::from_fn(d, m, |i, j| mat.matrix[(i, (j + shift) % m)]);
        let pmat = AdmissibilityMatrix { matrix: pm, row_labels: mat.row_labels.clone() };
        prop_assert_eq!(admissibility::positive_kernel(&pmat).unwrap().positive, lp.positive);

        let sm = DMatrix::from_fn(d, m, |i, j| mat.matrix[(i, j)] * 10f64.powf(scales[j % scales.len()]));
        let smat = AdmissibilityMatrix { matrix: sm, row_labels: mat.row_labels.clone() };
        prop_assert_eq!(admissibility::positive_kernel(&smat).unwrap().positive, lp.positive);
    }

    // LP verdict against the brute-force cone grid for kernel dim <= 2.
    #[test]
    fn lp_matches_brute_force((d, m, data) in matrix_strategy(4, 2)) {
        let mat = to_matrix(d, m, &data);
        prop_assume!(admissibility::rank(&mat) == d);
        let lp = admissibility::positive_kernel(&mat).unwrap();
        prop_assume!(lp.t_star.abs() > 1e-3); // grid resolution decides otherwise
        let brute = admissibility::brute_force_positive(&mat, 20_000).unwrap();
        prop_assert_eq!(lp.positive, brute.is_some());
        if let Some(w) = &lp.witness {
            let wv = nalgebra::DVector::from_row_slice(w);
            let residual = (&mat.matrix * &wv).amax();
            prop_assert!(residual < 1e-9, "witness not in the kernel: {residual}");
            prop_assert!(w.iter().all(|&x| x > 0.0));
        }
    }

    // Report bookkeeping: kernel_dim = m - c1, margin sign matches the
    // verdict, and a witness exists exactly when the verdict is true.
    #[test]
    fn report_bookkeeping(n in 1usize..=2, extra in 1usize..=3, seed in 0u64..1000) {
        let basis = pn_kernel_basis(n).unwrap();
        let res = random_rank_search(&basis, basis.len() + extra, seed, 50).unwrap();
        let r = &res.report;
        prop_assert_eq!(r.kernel_dim, r.m - r.c1);
        prop_assert_eq!(r.verdict, r.c1 == r.d && r.c2);
        prop_assert_eq!(r.c2, r.margin > 1e-9);
        prop_assert_eq!(r.witness.is_some(), r.c2);
        prop_assert!(r.m > r.d || !r.verdict); // no admissible config with m <= d
    }

    // Projective points are scale free: multiplying the raw coordinates by
    // any nonzero complex number leaves every kernel function value fixed.
    #[test]
    fn projective_scale_free(re in proptest::collection::vec(-1.0..1.0f64, 3),
                             im in proptest::collection::vec(-1.0..1.0f64, 3),
                             s_re in -3.0..3.0f64, s_im in -3.0..3.0f64) {
        let z: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let norm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let s = Complex64::new(s_re, s_im);
        prop_assume!(s.norm() > 1e-3);
        let p = ConfigPoint::new(vec![FactorPoint::Projective(z.clone())]).unwrap();
        let q = ConfigPoint::new(vec![FactorPoint::Projective(z.iter().map(|c| c * s).collect())]).unwrap();
        let basis = pn_kernel_basis(2).unwrap();
        for f in &basis.functions {
            prop_assert!((f.eval(&p) - f.eval(&q)).abs() < 1e-12);
        }
        prop_assert!(p.distance(&q) < 1e-7);
    }

    // Group averaging is idempotent and lands in the invariant subspace:
    // averaged functions take equal values along every orbit.
    #[test]
    fn group_average_idempotent(re in proptest::collection::vec(-1.0..1.0f64, 3),
                                im in proptest::collection::vec(-1.0..1.0f64, 3),
                                a in 0usize..2, b in 1usize..3) {
        prop_assume!(a < b);
        let norm: f64 = re.iter().zip(&im).map(|(&x, &y)| x * x + y * y).sum::<f64>();
        prop_assume!(norm > 1e-6);
        let g = std::sync::Arc::new(SymmetryGroup::sign_flips(2).unwrap());
        let base = KernelFn::Xi { factor: 0, a, b };
        let avg = KernelFn::Averaged { base: Box::new(base), group: g.clone() };
        let avg2 = KernelFn::Averaged { base: Box::new(avg.clone()), group: g.clone() };
        let z: Vec<Complex64> = re.iter().zip(&im).map(|(&x, &y)| Complex64::new(x, y)).collect();
        let p = ConfigPoint::new(vec![FactorPoint::Projective(z)]).unwrap();
        prop_assert!((avg.eval(&p) - avg2.eval(&p)).abs() < 1e-12);
        for q_pt in g.orbit(&p) {
            prop_assert!((avg.eval(&p) - avg.eval(&q_pt)).abs() < 1e-12);
        }
    }

    // Adjoining a random point to an admissible configuration preserves
    // admissibility (200 cases per the stated budget).
    #[test]
    fn adjoin_preserves_admissibility(seed in 0u64..100_000, pseed in 0u64..100_000) {
        let manifold = ModelManifold::new(vec![Factor::Projective(1)]).unwrap();
        let basis = KernelBasis {
            manifold,
            functions: vec![KernelFn::XiTilde { factor: 0, a: 0 }],
            labels: vec!["xitilde_1".into()],
        };
        let res = random_rank_search(&basis, 3, seed, 50).unwrap();
        prop_assume!(res.report.verdict);
        let mut rng = csck::rng::derive(pseed, "prop-adjoin", 0);
        let p = csck::kernel_basis::sample_point(&res.config.manifold, &mut rng);
        if let Ok((cfg2, rep2)) = adjoin_point(&basis, &res.config, &res.report, p) {
            prop_assert!(rep2.verdict);
            prop_assert_eq!(cfg2.m(), res.config.m() + 1);
            prop_assert!(rep2.margin > 0.0);
        }
    }

    // Ledger consistency: every inequality passes at delta exactly when
    // delta lies in the intersection window solved from the affine gaps.
    #[test]
    fn ledger_matches_delta_window(n in 2usize..=6, num in -40i64..=40, den in 1i64..=12) {
        let delta = q(num, den);
        let groups = [
            InequalityGroup::Inner,
            InequalityGroup::Neck,
            InequalityGroup::Radial,
            InequalityGroup::Outer,
        ];
        let window = asymptotics::delta_window(n, &groups).unwrap();
        let ledger = asymptotics::verify_ledger(n, delta).unwrap();
        prop_assert_eq!(ledger.all_pass, window.contains(delta));
    }

    // Exponent algebra: products add minimal exponents; normalize is
    // idempotent and preserves evaluation.
    #[test]
    fn eps_power_algebra(c1 in -2.0..2.0f64, c2 in -2.0..2.0f64,
                         b1 in -6i64..=6, b2 in -6i64..=6,
                         s1 in -3i64..=3, s2 in -3i64..=3,
                         dn in -5i64..=5, dd in 1i64..=4) {
        prop_assume!(c1.abs() > 1e-6 && c2.abs() > 1e-6);
        let delta = q(dn, dd);
        let e1 = EpsPower::term(c1, AffineExp { base: q(b1, 2), slope: q(s1, 2) });
        let e2 = EpsPower::term(c2, AffineExp { base: q(b2, 2), slope: q(s2, 2) });
        let prod = e1.clone() * e2.clone();
        let m1 = e1.min_exponent_at(delta).unwrap();
        let m2 = e2.min_exponent_at(delta).unwrap();
        prop_assert_eq!(prod.min_exponent_at(delta).unwrap(), m1 + m2);
        let sum = e1.clone() + e1.clone();
        // Merging equal exponents: one term, doubled coefficient.
        prop_assert_eq!(sum.terms().len(), 1);
        prop_assert!((sum.terms()[0].0 - 2.0 * c1).abs() < 1e-12);
    }

    // Mode matching is linear in the Cauchy-data jumps.
    #[test]
    fn match_mode_linear(n in 2usize..=5, gamma in 1usize..=10,
                         j1 in proptest::collection::vec(-1.0..1.0f64, 4),
                         j2 in proptest::collection::vec(-1.0..1.0f64, 4)) {
        let a = match_mode(gamma, n, j1[0], j1[1], j1[2], j1[3]).unwrap();
        let b = match_mode(gamma, n, j2[0], j2[1], j2[2], j2[3]).unwrap();
        let s = match_mode(gamma, n,
            j1[0] + j2[0], j1[1] + j2[1], j1[2] + j2[2], j1[3] + j2[3]).unwrap();
        prop_assert!((s.inner.h - (a.inner.h + b.inner.h)).abs() < 1e-9);
        prop_assert!((s.inner.k - (a.inner.k + b.inner.k)).abs() < 1e-9);
        prop_assert!((s.outer.h - (a.outer.h + b.outer.h)).abs() < 1e-9);
        prop_assert!((s.outer.k - (a.outer.k + b.outer.k)).abs() < 1e-9);
    }

    // Radial extensions hit their boundary traces exactly and solve the
    // biharmonic equation to finite-difference accuracy.
    #[test]
    fn extension_traces_and_residual(n in 2usize..=4, gamma in 0usize..=4,
                                     h in -1.0..1.0f64, k in -1.0..1.0f64,
                                     dir in proptest::collection::vec(-1.0..1.0f64, 8),
                                     radius in 0.7..1.5f64, outer_side in proptest::bool::ANY) {
        let k = if outer_side && gamma == 0 { 0.0 } else { k };
        let sol = if outer_side {
            outer_extension_mode(ModeData { gamma, n, h, k }).unwrap()
        } else {
            inner_extension_mode(ModeData { gamma, n, h, k })
        };
        prop_assert!((sol.profile(1.0) - h).abs() < 1e-10);
        prop_assert!((sol.laplacian_profile(1.0) - k).abs() < 1e-10);
        let dim = 2 * n;
        let norm: f64 = dir[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(norm > 0.3);
        let x: Vec<f64> = dir[..dim].iter().map(|v| v * radius / norm).collect();
        prop_assert!(sol.fd_residual(&x) < 1e-6);
    }
}
