//! Model manifolds, the explicit kernel functions of the Lichnerowicz
//! operator on projective factors, and invariant sub-bases under finite
//! symmetry groups.
//!
//! On P^n (seen as the quotient of the unit sphere in C^{n+1} by the S^1
//! action) the nonconstant kernel is spanned by the n^2 + 2n functions
//!
//!   xi_ab    = z_a conj(z_b) + z_b conj(z_a)        (1 <= a < b <= n+1)
//!   xihat_ab = i (z_a conj(z_b) - z_b conj(z_a))    (1 <= a < b <= n+1)
//!   xitilde_a = |z_a|^2 - |z_{a+1}|^2               (a = 1..n)
//!
//! all phase-invariant and mean-zero against the uniform sphere measure.
//! Product manifolds concatenate the bases of their projective factors;
//! rigid factors (no vanishing holomorphic vector fields) contribute nothing.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng;

pub const PHASE_TOL: f64 = 1e-12;

/// One factor of a model manifold.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// Complex projective space of complex dimension n >= 1.
    Projective(usize),
    /// A factor without nontrivial vanishing holomorphic vector fields.
    /// It contributes nothing to the kernel; points on it are opaque labels.
    /// The complex dimension may be unknown.
    Rigid { dim: Option<usize> },
}

/// A product of projective and rigid factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelManifold {
    pub factors: Vec<Factor>,
}

impl ModelManifold {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("manifold needs at least one factor".into()));
        }
        for f in &factors {
            if let Factor::Projective(n) = f {
                if *n < 1 {
                    return Err(Error::InvalidDimension(format!("projective factor with n = {n}")));
                }
            }
        }
        Ok(Self { factors })
    }

    /// P^n as a single factor.
    pub fn pn(n: usize) -> Result<Self> {
        Self::new(vec![Factor::Projective(n)])
    }

    /// Total kernel dimension d = sum over projective factors of n^2 + 2n.
    pub fn kernel_dim(&self) -> usize {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Projective(n) => n * n + 2 * n,
                Factor::Rigid { .. } => 0,
            })
            .sum()
    }

    /// Total complex dimension, if every factor's dimension is known.
    pub fn complex_dimension(&self) -> Option<usize> {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Projective(n) => Some(*n),
                Factor::Rigid { dim } => *dim,
            })
            .sum()
    }

    /// Indices (into `factors`) and dimensions of the projective factors.
    pub fn projective_factors(&self) -> Vec<(usize, usize)> {
        self.factors
            .iter()
            .enumerate()
            .filter_map(|(i, f)| match f {
                Factor::Projective(n) => Some((i, *n)),
                Factor::Rigid { .. } => None,
            })
            .collect()
    }
}

/// One component of a configuration point.
#[derive(Debug, Clone)]
pub enum FactorPoint {
    /// Unit homogeneous coordinates on a projective factor.
    Projective(Vec<Complex64>),
    /// Opaque label on a rigid factor.
    Rigid(String),
}

/// A point of a (product) model manifold.
#[derive(Debug, Clone)]
pub struct ConfigPoint {
    pub factors: Vec<FactorPoint>,
}

impl ConfigPoint {
    /// Build a point, normalizing each projective component to unit norm.
    pub fn new(factors: Vec<FactorPoint>) -> Result<Self> {
        let mut out = Vec::with_capacity(factors.len());
        for f in factors {
            match f {
                FactorPoint::Projective(coords) => {
                    let norm: f64 = coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if !(norm > 1e-12) || !norm.is_finite() {
                        return Err(Error::InvalidInput("projective point with zero or non-finite norm".into()));
                    }
                    out.push(FactorPoint::Projective(coords.into_iter().map(|z| z / norm).collect()));
                }
                r @ FactorPoint::Rigid(_) => out.push(r),
            }
        }
        Ok(Self { factors: out })
    }

    /// P^n point from homogeneous coordinates (single projective factor).
    pub fn projective(coords: Vec<Complex64>) -> Result<Self> {
        Self::new(vec![FactorPoint::Projective(coords)])
    }

    /// P^n point from real homogeneous coordinates.
    pub fn projective_real(coords: &[f64]) -> Result<Self> {
        Self::projective(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Canonical phase representative per projective factor: the first
    /// coordinate of modulus > 1e-12 is made real and positive. Used only
    /// for deduplication and distances; all kernel functions are
    /// phase-invariant so evaluation never depends on this.
    pub fn canonical(&self) -> ConfigPoint {
        let factors = self
            .factors
            .iter()
            .map(|f| match f {
                FactorPoint::Projective(coords) => {
                    let mut phase = Complex64::new(1.0, 0.0);
                    for z in coords {
                        if z.norm() > 1e-12 {
                            phase = z.conj() / z.norm();
                            break;
                        }
                    }
                    FactorPoint::Projective(coords.iter().map(|z| z * phase).collect())
                }
                r => r.clone(),
            })
            .collect();
        ConfigPoint { factors }
    }

    /// Phase-invariant distance: per projective factor min over unit c of
    /// |p - c q| (the phase-aligned coordinate difference), rigid factors
    /// contribute 0 (same label) or 1; factors combined as a Euclidean norm.
    /// The difference is formed in coordinates so equal points come out at
    /// the rounding level, not at the sqrt(eps) floor of the inner-product
    /// chordal formula.
    pub fn distance(&self, other: &ConfigPoint) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.factors.iter().zip(&other.factors) {
            match (a, b) {
                (FactorPoint::Projective(p), FactorPoint::Projective(q)) if p.len() == q.len() => {
                    let inner: Complex64 = p.iter().zip(q).map(|(x, y)| x * y.conj()).sum();
                    if inner.norm() < 1e-12 {
                        acc += 2.0; // orthogonal: |p - c q|^2 = 2 for any phase
                    } else {
                        let c = inner / inner.norm();
                        acc += p
                            .iter()
                            .zip(q)
                            .map(|(x, y)| (x - c * y).norm_sqr())
                            .sum::<f64>();
                    }
                }
                (FactorPoint::Rigid(x), FactorPoint::Rigid(y)) => {
                    if x != y {
                        acc += 1.0;
                    }
                }
                _ => acc += 1.0,
            }
        }
        acc.sqrt()
    }

    /// Checks compatibility with a manifold's factor shape.
    pub fn compatible_with(&self, m: &ModelManifold) -> bool {
        self.factors.len() == m.factors.len()
            && self.factors.iter().zip(&m.factors).all(|(p, f)| match (p, f) {
                (FactorPoint::Projective(c), Factor::Projective(n)) => c.len() == n + 1,
                (FactorPoint::Rigid(_), Factor::Rigid { .. }) => true,
                _ => false,
            })
    }

    fn projective_coords(&self, factor: usize) -> &[Complex64] {
        match &self.factors[factor] {
            FactorPoint::Projective(c) => c,
            FactorPoint::Rigid(_) => panic!("kernel function addressed a rigid factor"),
        }
    }
}

/// Action of a group element on one projective factor: coordinate j of the
/// image is phase[j] * z[perm[j]].
#[derive(Debug, Clone)]
pub struct FactorAction {
    pub perm: Vec<usize>,
    pub phase: Vec<Complex64>,
}

impl FactorAction {
    pub fn identity(ncoords: usize) -> Self {
        Self { perm: (0..ncoords).collect(), phase: vec![Complex64::new(1.0, 0.0); ncoords] }
    }

    fn validate(&self, ncoords: usize) -> Result<()> {
        if self.perm.len() != ncoords || self.phase.len() != ncoords {
            return Err(Error::InvalidGroup("action length does not match factor".into()));
        }
        let mut seen = vec![false; ncoords];
        for &p in &self.perm {
            if p >= ncoords || seen[p] {
                return Err(Error::InvalidGroup("not a permutation".into()));
            }
            seen[p] = true;
        }
        for ph in &self.phase {
            if (ph.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidGroup("phase multiplier not unit modulus".into()));
            }
        }
        Ok(())
    }

    fn apply(&self, coords: &[Complex64]) -> Vec<Complex64> {
        (0..coords.len()).map(|j| self.phase[j] * coords[self.perm[j]]).collect()
    }

    /// g then self: (self . g)(z) = self(g(z)).
    fn compose(&self, g: &FactorAction) -> FactorAction {
        let n = self.perm.len();
        let mut perm = vec![0; n];
        let mut phase = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            perm[j] = g.perm[self.perm[j]];
            phase[j] = self.phase[j] * g.phase[self.perm[j]];
        }
        FactorAction { perm, phase }
    }

    fn inverse(&self) -> FactorAction {
        let n = self.perm.len();
        let mut perm = vec![0; n];
        let mut phase = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            perm[self.perm[j]] = j;
            phase[self.perm[j]] = self.phase[j].conj() / self.phase[j].norm_sqr().sqrt();
        }
        FactorAction { perm, phase }
    }

    fn key(&self) -> Vec<(usize, i64, i64)> {
        self.perm
            .iter()
            .zip(&self.phase)
            .map(|(&p, ph)| (p, (ph.re * 1e8).round() as i64, (ph.im * 1e8).round() as i64))
            .collect()
    }
}

/// A group element acts on each projective factor independently (rigid
/// factors are fixed pointwise). `actions` is ordered like
/// `ModelManifold::projective_factors()`.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub actions: Vec<FactorAction>,
}

impl GroupElement {
    fn key(&self) -> Vec<Vec<(usize, i64, i64)>> {
        self.actions.iter().map(|a| a.key()).collect()
    }

    fn compose(&self, g: &GroupElement) -> GroupElement {
        GroupElement {
            actions: self.actions.iter().zip(&g.actions).map(|(a, b)| a.compose(b)).collect(),
        }
    }

    fn inverse(&self) -> GroupElement {
        GroupElement { actions: self.actions.iter().map(|a| a.inverse()).collect() }
    }
}

/// A finite group of signed-permutation-with-phase maps, closed under
/// composition and inverse (verified at construction).
#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    /// Number of homogeneous coordinates of each projective factor, in
    /// factor order.
    pub coord_sizes: Vec<usize>,
    elements: Vec<GroupElement>,
}

impl SymmetryGroup {
    /// Validates identity, closure and inverses.
    pub fn new(coord_sizes: Vec<usize>, elements: Vec<GroupElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidGroup("group has no elements".into()));
        }
        for e in &elements {
            if e.actions.len() != coord_sizes.len() {
                return Err(Error::InvalidGroup("element does not act on every projective factor".into()));
            }
            for (a, &nc) in e.actions.iter().zip(&coord_sizes) {
                a.validate(nc)?;
            }
        }
        let index: HashMap<_, usize> =
            elements.iter().enumerate().map(|(i, e)| (e.key(), i)).collect();
        if index.len() != elements.len() {
            return Err(Error::InvalidGroup("duplicate elements".into()));
        }
        let id = GroupElement {
            actions: coord_sizes.iter().map(|&nc| FactorAction::identity(nc)).collect(),
        };
        if !index.contains_key(&id.key()) {
            return Err(Error::InvalidGroup("identity missing".into()));
        }
        for a in &elements {
            if !index.contains_key(&a.inverse().key()) {
                return Err(Error::InvalidGroup("inverse missing".into()));
            }
            for b in &elements {
                if !index.contains_key(&a.compose(b).key()) {
                    return Err(Error::InvalidGroup("not closed under composition".into()));
                }
            }
        }
        Ok(Self { coord_sizes, elements })
    }

    /// Closes a generating set under composition (BFS), then validates.
    pub fn from_generators(
        coord_sizes: Vec<usize>,
        generators: Vec<GroupElement>,
        max_order: usize,
    ) -> Result<Self> {
        let id = GroupElement {
            actions: coord_sizes.iter().map(|&nc| FactorAction::identity(nc)).collect(),
        };
        for g in &generators {
            if g.actions.len() != coord_sizes.len() {
                return Err(Error::InvalidGroup("generator does not act on every projective factor".into()));
            }
            for (a, &nc) in g.actions.iter().zip(&coord_sizes) {
                a.validate(nc)?;
            }
        }
        let mut elements = vec![id.clone()];
        let mut index: HashMap<_, usize> = HashMap::new();
        index.insert(id.key(), 0);
        let mut frontier = vec![0usize];
        while let Some(i) = frontier.pop() {
            let e = elements[i].clone();
            for g in &generators {
                let h = g.compose(&e);
                let k = h.key();
                if !index.contains_key(&k) {
                    index.insert(k, elements.len());
                    frontier.push(elements.len());
                    elements.push(h);
                    if elements.len() > max_order {
                        return Err(Error::InvalidGroup(format!(
                            "group order exceeds {max_order}"
                        )));
                    }
                }
            }
        }
        Self::new(coord_sizes, elements)
    }

    /// Trivial group for a manifold shape.
    pub fn trivial(coord_sizes: Vec<usize>) -> Self {
        let id = GroupElement {
            actions: coord_sizes.iter().map(|&nc| FactorAction::identity(nc)).collect(),
        };
        Self { coord_sizes, elements: vec![id] }
    }

    /// Per-coordinate sign flips on a single P^n factor (Example-1 group).
    pub fn sign_flips(n: usize) -> Result<Self> {
        let nc = n + 1;
        let gens = (0..nc)
            .map(|i| {
                let mut phase = vec![Complex64::new(1.0, 0.0); nc];
                phase[i] = Complex64::new(-1.0, 0.0);
                GroupElement { actions: vec![FactorAction { perm: (0..nc).collect(), phase }] }
            })
            .collect();
        Self::from_generators(vec![nc], gens, 1 << (nc + 1))
    }

    /// Full coordinate-permutation group on a single P^n factor.
    pub fn coordinate_permutations(n: usize) -> Result<Self> {
        let nc = n + 1;
        let mut gens = Vec::new();
        for i in 0..nc - 1 {
            let mut perm: Vec<usize> = (0..nc).collect();
            perm.swap(i, i + 1);
            gens.push(GroupElement {
                actions: vec![FactorAction { perm, phase: vec![Complex64::new(1.0, 0.0); nc] }],
            });
        }
        let mut order = 1usize;
        for k in 2..=nc {
            order = order.saturating_mul(k);
        }
        Self::from_generators(vec![nc], gens, order + 1)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// Applies an element to a point (rigid components unchanged).
    pub fn apply(&self, e: &GroupElement, p: &ConfigPoint) -> ConfigPoint {
        let mut proj_idx = 0;
        let factors = p
            .factors
            .iter()
            .map(|f| match f {
                FactorPoint::Projective(coords) => {
                    let out = FactorPoint::Projective(e.actions[proj_idx].apply(coords));
                    proj_idx += 1;
                    out
                }
                r => r.clone(),
            })
            .collect();
        ConfigPoint { factors }
    }

    /// The orbit of a point, deduplicated by canonical representatives.
    pub fn orbit(&self, p: &ConfigPoint) -> Vec<ConfigPoint> {
        let mut orbit: Vec<ConfigPoint> = Vec::new();
        for e in &self.elements {
            let q = self.apply(e, p);
            if orbit.iter().all(|r| r.distance(&q) > 1e-9) {
                orbit.push(q);
            }
        }
        orbit
    }
}

/// An evaluable kernel function. Group averages stay exact and evaluable.
#[derive(Debug, Clone)]
pub enum KernelFn {
    /// xi_ab on projective factor `factor` (0-based coordinate indices).
    Xi { factor: usize, a: usize, b: usize },
    /// xihat_ab.
    XiHat { factor: usize, a: usize, b: usize },
    /// xitilde_a = |z_a|^2 - |z_{a+1}|^2.
    XiTilde { factor: usize, a: usize },
    /// Group average (1/|G|) sum_g base(g . z).
    Averaged { base: Box<KernelFn>, group: Arc<SymmetryGroup> },
    /// Finite linear combination, e.g. the permutation-invariant sum of all
    /// xi_ab.
    Combination { terms: Vec<(f64, KernelFn)> },
}

impl KernelFn {
    pub fn eval(&self, p: &ConfigPoint) -> f64 {
        match self {
            KernelFn::Xi { factor, a, b } => {
                let z = p.projective_coords(*factor);
                2.0 * (z[*a] * z[*b].conj()).re
            }
            KernelFn::XiHat { factor, a, b } => {
                let z = p.projective_coords(*factor);
                // i (z_a conj(z_b) - z_b conj(z_a)) = -2 Im(z_a conj(z_b))
                -2.0 * (z[*a] * z[*b].conj()).im
            }
            KernelFn::XiTilde { factor, a } => {
                let z = p.projective_coords(*factor);
                z[*a].norm_sqr() - z[*a + 1].norm_sqr()
            }
            KernelFn::Averaged { base, group } => {
                let mut sum = 0.0;
                for e in group.elements() {
                    sum += base.eval(&group.apply(e, p));
                }
                sum / group.order() as f64
            }
            KernelFn::Combination { terms } => {
                terms.iter().map(|(c, f)| c * f.eval(p)).sum()
            }
        }
    }
}

/// Ordered basis of evaluable kernel functions with labels.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub manifold: ModelManifold,
    pub functions: Vec<KernelFn>,
    pub labels: Vec<String>,
}

impl KernelBasis {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Componentwise evaluation at a configuration point.
    pub fn evaluate(&self, p: &ConfigPoint) -> Result<Vec<f64>> {
        if !p.compatible_with(&self.manifold) {
            return Err(Error::DimensionMismatch("point does not match manifold shape".into()));
        }
        Ok(self.functions.iter().map(|f| f.eval(p)).collect())
    }
}

/// The kernel basis of P^n in the documented deterministic order: all
/// xi_ab for a < b (lexicographic), then all xihat_ab, then xitilde_a for
/// a = 1..n. Exactly n^2 + 2n functions.
pub fn pn_kernel_basis(n: usize) -> Result<KernelBasis> {
    if n < 1 {
        return Err(Error::InvalidDimension(format!("pn_kernel_basis needs n >= 1, got {n}")));
    }
    let manifold = ModelManifold::pn(n)?;
    Ok(factor_basis_into(manifold, 0, n, ""))
}

fn factor_basis_into(manifold: ModelManifold, factor: usize, n: usize, tag: &str) -> KernelBasis {
    let mut functions = Vec::new();
    let mut labels = Vec::new();
    for a in 0..n + 1 {
        for b in a + 1..n + 1 {
            functions.push(KernelFn::Xi { factor, a, b });
            labels.push(format!("xi{}_{}{}", tag, a + 1, b + 1));
        }
    }
    for a in 0..n + 1 {
        for b in a + 1..n + 1 {
            functions.push(KernelFn::XiHat { factor, a, b });
            labels.push(format!("xihat{}_{}{}", tag, a + 1, b + 1));
        }
    }
    for a in 0..n {
        functions.push(KernelFn::XiTilde { factor, a });
        labels.push(format!("xitilde{}_{}", tag, a + 1));
    }
    KernelBasis { manifold, functions, labels }
}

/// Concatenated basis of a product manifold: each projective factor's basis
/// lifted to act on its component; rigid factors contribute nothing.
/// Errors with `EmptyKernel` when there is no projective factor (d = 0):
/// downstream admissibility is vacuous and must be reported as such.
pub fn product_kernel_basis(m: &ModelManifold) -> Result<KernelBasis> {
    let proj = m.projective_factors();
    if proj.is_empty() {
        return Err(Error::EmptyKernel);
    }
    let mut functions = Vec::new();
    let mut labels = Vec::new();
    for (k, (factor, n)) in proj.iter().enumerate() {
        let tag = if proj.len() == 1 && m.factors.len() == 1 {
            String::new()
        } else {
            format!("[f{}]", k + 1)
        };
        let fb = factor_basis_into(m.clone(), *factor, *n, &tag);
        functions.extend(fb.functions);
        labels.extend(fb.labels);
    }
    Ok(KernelBasis { manifold: m.clone(), functions, labels })
}

/// Samples a uniform point: Gaussian-normalized homogeneous coordinates per
/// projective factor, a fresh random label per rigid factor.
pub fn sample_point(m: &ModelManifold, rng: &mut ChaCha8Rng) -> ConfigPoint {
    let factors = m
        .factors
        .iter()
        .map(|f| match f {
            Factor::Projective(n) => {
                let coords: Vec<Complex64> = (0..n + 1)
                    .map(|_| {
                        Complex64::new(gaussian(rng), gaussian(rng))
                    })
                    .collect();
                FactorPoint::Projective(coords)
            }
            Factor::Rigid { .. } => FactorPoint::Rigid(format!("r{:016x}", rng.gen::<u64>())),
        })
        .collect();
    ConfigPoint::new(factors).expect("gaussian sample has positive norm")
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; counter-based stream keeps this deterministic per seed.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Basis of the G-invariant subspace of span(basis): every function is the
/// exact group average of a basis function; a maximal independent subset is
/// extracted by rank-revealing pivoted orthogonalization on >= 4d random
/// sample points (relative threshold 1e-9).
pub fn invariant_subbasis(
    basis: &KernelBasis,
    group: &SymmetryGroup,
    seed: u64,
) -> Result<KernelBasis> {
    let d = basis.len();
    if d == 0 {
        return Ok(basis.clone());
    }
    let garc = Arc::new(group.clone());
    let averaged: Vec<KernelFn> = basis
        .functions
        .iter()
        .map(|f| KernelFn::Averaged { base: Box::new(f.clone()), group: garc.clone() })
        .collect();

    let nsamples = (4 * d).max(16);
    let mut r = rng::derive(seed, "invariant_subbasis", 0);
    let points: Vec<ConfigPoint> =
        (0..nsamples).map(|_| sample_point(&basis.manifold, &mut r)).collect();

    // Column j = averaged function j sampled at the points.
    let mut cols: Vec<Vec<f64>> = averaged
        .iter()
        .map(|f| points.iter().map(|p| f.eval(p)).collect())
        .collect();

    // Pivoted modified Gram-Schmidt; rank-revealing with relative threshold.
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let initial_max = cols.iter().map(|c| norm(c)).fold(0.0_f64, f64::max);
    let tol = 1e-9 * initial_max;
    let mut selected: Vec<usize> = Vec::new();
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut q: Vec<Vec<f64>> = Vec::new();
    while !remaining.is_empty() {
        let (pos, &best) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| norm(&cols[*a.1]).total_cmp(&norm(&cols[*b.1])))
            .unwrap();
        if norm(&cols[best]) <= tol {
            break;
        }
        let mut qv = cols[best].clone();
        let qn = norm(&qv);
        for x in &mut qv {
            *x /= qn;
        }
        remaining.remove(pos);
        selected.push(best);
        for &j in &remaining {
            let dot: f64 = qv.iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            for (x, y) in cols[j].iter_mut().zip(&qv) {
                *x -= dot * y;
            }
        }
        q.push(qv);
    }
    selected.sort_unstable();

    Ok(KernelBasis {
        manifold: basis.manifold.clone(),
        functions: selected.iter().map(|&j| averaged[j].clone()).collect(),
        labels: selected.iter().map(|&j| format!("avg({})", basis.labels[j])).collect(),
    })
}

/// Monte Carlo mean and standard error of each basis function against the
/// uniform sphere measure on each factor. Deterministic for a fixed seed.
pub fn mean_zero_check(
    basis: &KernelBasis,
    samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if samples < 1000 {
        return Err(Error::InvalidInput(format!("need >= 1000 samples, got {samples}")));
    }
    let mut r = rng::derive(seed, "mean_zero_check", 0);
    let d = basis.len();
    let mut sum = vec![0.0; d];
    let mut sumsq = vec![0.0; d];
    for _ in 0..samples {
        let p = sample_point(&basis.manifold, &mut r);
        for (j, f) in basis.functions.iter().enumerate() {
            let v = f.eval(&p);
            sum[j] += v;
            sumsq[j] += v * v;
        }
    }
    let nf = samples as f64;
    Ok((0..d)
        .map(|j| {
            let mean = sum[j] / nf;
            let var = (sumsq[j] / nf - mean * mean).max(0.0);
            (mean, (var / nf).sqrt())
        })
        .collect())
}

/// Residual |Delta_S f + 4(n+1) f| at a point of S^{2n+1} for an arbitrary
/// function of the homogeneous coordinates, via second-order tangential
/// central differences with re-projection to the sphere (Delta negative
/// semidefinite convention). O(h^2) accurate.
pub fn laplace_residual<F: Fn(&[Complex64]) -> f64>(
    n: usize,
    f: F,
    p: &[Complex64],
    h: f64,
) -> Result<f64> {
    if !(1e-5..=1e-2).contains(&h) {
        return Err(Error::InvalidInput(format!("step h = {h} outside [1e-5, 1e-2]")));
    }
    if p.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, expected {}",
            p.len(),
            n + 1
        )));
    }
    let dim = 2 * (n + 1); // ambient real dimension
    let mut pr = vec![0.0; dim];
    for (i, z) in p.iter().enumerate() {
        pr[2 * i] = z.re;
        pr[2 * i + 1] = z.im;
    }
    let nrm = pr.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(nrm > 0.0) {
        return Err(Error::InvalidInput("zero point".into()));
    }
    for x in &mut pr {
        *x /= nrm;
    }

    // Orthonormal tangent basis at pr via Gram-Schmidt against pr.
    let mut tangent: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        let dp: f64 = e.iter().zip(&pr).map(|(a, b)| a * b).sum();
        for (x, y) in e.iter_mut().zip(&pr) {
            *x -= dp * y;
        }
        for t in &tangent {
            let dt: f64 = e.iter().zip(t).map(|(a, b)| a * b).sum();
            for (x, y) in e.iter_mut().zip(t) {
                *x -= dt * y;
            }
        }
        let en = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if en > 1e-6 {
            for x in &mut e {
                *x /= en;
            }
            tangent.push(e);
            if tangent.len() == dim - 1 {
                break;
            }
        }
    }

    let eval_real = |x: &[f64]| -> f64 {
        let z: Vec<Complex64> =
            (0..n + 1).map(|i| Complex64::new(x[2 * i], x[2 * i + 1])).collect();
        f(&z)
    };
    let project = |x: &[f64]| -> Vec<f64> {
        let nn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter().map(|v| v / nn).collect()
    };

    let f0 = eval_real(&pr);
    let mut lap = 0.0;
    for t in &tangent {
        let plus: Vec<f64> = pr.iter().zip(t).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = pr.iter().zip(t).map(|(a, b)| a - h * b).collect();
        lap += (eval_real(&project(&plus)) + eval_real(&project(&minus)) - 2.0 * f0) / (h * h);
    }
    Ok((lap + 4.0 * (n as f64 + 1.0) * f0).abs())
}

/// Eigenvalue residual of basis function `fn_index` of P^n's kernel basis:
/// they are degree-2 harmonics on S^{2n+1}, eigenvalue 4(n+1).
pub fn laplace_eigen_check(
    n: usize,
    fn_index: usize,
    p: &[Complex64],
    h: f64,
) -> Result<f64> {
    let basis = pn_kernel_basis(n)?;
    if fn_index >= basis.len() {
        return Err(Error::InvalidInput(format!("function index {fn_index} out of range")));
    }
    let func = basis.functions[fn_index].clone();
    laplace_residual(
        n,
        move |z| {
            let p = ConfigPoint { factors: vec![FactorPoint::Projective(z.to_vec())] };
            func.eval(&p)
        },
        p,
        h,
    )
}
