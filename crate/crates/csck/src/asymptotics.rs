//! Exact bookkeeping for the gluing-scale estimates. The neck radii are
//! r_eps = eps^{(2n-1)/(2n+1)} and R_eps = r_eps / eps = eps^{-2/(2n+1)},
//! and every smallness claim in the matching argument reduces to comparing
//! exponents of eps that are affine in the weight parameter delta. All
//! verdicts here are computed in rational arithmetic; floats only appear
//! in display fields.

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = Ratio<i64>;

/// Shorthand for an exact rational.
pub fn q(num: i64, den: i64) -> Q {
    Ratio::new(num, den)
}

/// An exponent of eps that is affine in delta: base + slope * delta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineExp {
    pub base: Q,
    pub slope: Q,
}

impl AffineExp {
    pub fn constant(base: Q) -> Self {
        AffineExp { base, slope: Q::zero() }
    }

    pub fn eval(&self, delta: Q) -> Q {
        self.base + self.slope * delta
    }
}

impl std::ops::Add for AffineExp {
    type Output = AffineExp;
    fn add(self, rhs: AffineExp) -> AffineExp {
        AffineExp { base: self.base + rhs.base, slope: self.slope + rhs.slope }
    }
}

impl std::ops::Sub for AffineExp {
    type Output = AffineExp;
    fn sub(self, rhs: AffineExp) -> AffineExp {
        AffineExp { base: self.base - rhs.base, slope: self.slope - rhs.slope }
    }
}

/// Finite formal sum of coefficient * eps^exponent terms. Exponents are
/// exact; the float coefficients never influence a verdict (only sign and
/// presence matter, and those are checked exactly at construction).
#[derive(Debug, Clone, PartialEq)]
pub struct EpsPower {
    terms: Vec<(f64, AffineExp)>,
}

/// Exponent of r_eps in terms of eps.
pub fn r_exponent(n: usize) -> Q {
    q(2 * n as i64 - 1, 2 * n as i64 + 1)
}

/// Exponent of R_eps in terms of eps.
pub fn big_r_exponent(n: usize) -> Q {
    q(-2, 2 * n as i64 + 1)
}

impl EpsPower {
    pub fn zero() -> Self {
        EpsPower { terms: Vec::new() }
    }

    pub fn term(coef: f64, exponent: AffineExp) -> Self {
        let mut p = EpsPower { terms: vec![(coef, exponent)] };
        p.normalize();
        p
    }

    /// coefficient * eps^k.
    pub fn eps_pow(coef: f64, k: Q) -> Self {
        Self::term(coef, AffineExp::constant(k))
    }

    /// coefficient * r_eps^k for dimension n.
    pub fn r_pow(coef: f64, n: usize, k: Q) -> Self {
        Self::term(coef, AffineExp::constant(r_exponent(n) * k))
    }

    /// coefficient * r_eps^{k + delta-slope * delta}.
    pub fn r_pow_affine(coef: f64, n: usize, k: Q, delta_slope: Q) -> Self {
        let rho = r_exponent(n);
        Self::term(coef, AffineExp { base: rho * k, slope: rho * delta_slope })
    }

    /// coefficient * R_eps^k for dimension n.
    pub fn big_r_pow(coef: f64, n: usize, k: Q) -> Self {
        Self::term(coef, AffineExp::constant(big_r_exponent(n) * k))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(f64, AffineExp)] {
        &self.terms
    }

    fn normalize(&mut self) {
        self.terms.sort_by(|a, b| {
            (a.1.base, a.1.slope)
                .partial_cmp(&(b.1.base, b.1.slope))
                .unwrap()
        });
        let mut merged: Vec<(f64, AffineExp)> = Vec::with_capacity(self.terms.len());
        for &(c, e) in &self.terms {
            if let Some(last) = merged.last_mut() {
                if last.1 == e {
                    last.0 += c;
                    continue;
                }
            }
            merged.push((c, e));
        }
        merged.retain(|&(c, _)| c != 0.0);
        self.terms = merged;
    }

    /// Smallest exponent at the given delta (the dominant term as eps -> 0).
    pub fn min_exponent_at(&self, delta: Q) -> Option<Q> {
        self.terms.iter().map(|(_, e)| e.eval(delta)).min()
    }
}

impl std::ops::Add for EpsPower {
    type Output = EpsPower;
    fn add(mut self, rhs: EpsPower) -> EpsPower {
        self.terms.extend(rhs.terms);
        self.normalize();
        self
    }
}

impl std::ops::Mul for EpsPower {
    type Output = EpsPower;
    fn mul(self, rhs: EpsPower) -> EpsPower {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for &(c1, e1) in &self.terms {
            for &(c2, e2) in &rhs.terms {
                out.push((c1 * c2, e1 + e2));
            }
        }
        let mut p = EpsPower { terms: out };
        p.normalize();
        p
    }
}

/// The two gluing radii, as floats plus their exact exponents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlueRadii {
    pub r: f64,
    pub big_r: f64,
    pub r_exponent: Q,
    pub big_r_exponent: Q,
}

pub fn glue_radii(eps: f64, n: usize) -> Result<GlueRadii> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("need n >= 2, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("need 0 < eps < 1, got {eps}")));
    }
    let re = r_exponent(n);
    let bre = big_r_exponent(n);
    let as_f = |x: Q| *x.numer() as f64 / *x.denom() as f64;
    Ok(GlueRadii {
        r: eps.powf(as_f(re)),
        big_r: eps.powf(as_f(bre)),
        r_exponent: re,
        big_r_exponent: bre,
    })
}

/// Difference of dominant exponents at the given delta; positive means the
/// left side is strictly smaller than the right side as eps -> 0.
pub fn exponent_gap(lhs: &EpsPower, rhs: &EpsPower, delta: Q) -> Result<Q> {
    let le = lhs
        .min_exponent_at(delta)
        .ok_or_else(|| Error::InvalidInput("left expression is zero".into()))?;
    let re = rhs
        .min_exponent_at(delta)
        .ok_or_else(|| Error::InvalidInput("right expression is zero".into()))?;
    Ok(le - re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Left side tends to 0 (dominant exponent positive).
    VanishesAtZero,
    /// Left side is strictly smaller order than the right side.
    MuchSmallerThan,
}

/// Groups of inequalities in the catalog, keyed by where they are used:
/// the inner-region error terms, the neck comparison against r^4, the
/// radial ordering of r^{6-delta} against r^{2n+1}, and the outer decay
/// rates in R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityGroup {
    Inner,
    Neck,
    Radial,
    Outer,
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerEntry {
    pub name: &'static str,
    pub group: InequalityGroup,
    pub note: &'static str,
    pub relation: Relation,
    /// Dominant exponents at the evaluated delta.
    pub lhs_exponent: Q,
    pub rhs_exponent: Q,
    pub gap: Q,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateLedger {
    pub n: usize,
    pub delta: Q,
    /// Stated admissible window for delta at this n.
    pub window: (Q, Q),
    pub in_window: bool,
    pub entries: Vec<LedgerEntry>,
    pub all_pass: bool,
}

/// The stated delta window: (0, 2/3) for n = 2 and (4-2n, 5-2n) for n >= 3.
pub fn stated_window(n: usize) -> Result<(Q, Q)> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("need n >= 2, got {n}")));
    }
    if n == 2 {
        Ok((q(0, 1), q(2, 3)))
    } else {
        Ok((q(4 - 2 * n as i64, 1), q(5 - 2 * n as i64, 1)))
    }
}

struct CatalogItem {
    name: &'static str,
    group: InequalityGroup,
    note: &'static str,
    relation: Relation,
    lhs: AffineExp,
    rhs: AffineExp,
}

/// Hard-coded inequality catalog. Exponents are of eps after substituting
/// r_eps = eps^rho (rho = (2n-1)/(2n+1)) and R_eps = eps^{-2/(2n+1)}.
fn catalog(n: usize) -> Vec<CatalogItem> {
    let ni = n as i64;
    let rho = r_exponent(n);
    let br = big_r_exponent(n);
    let c = AffineExp::constant;
    let zero = c(Q::zero());
    vec![
        CatalogItem {
            name: "inner-a",
            group: InequalityGroup::Inner,
            note: "eps^{2n-2} r^{6-4n-delta} -> 0",
            relation: Relation::VanishesAtZero,
            lhs: AffineExp {
                base: q(2 * ni - 2, 1) + rho * q(6 - 4 * ni, 1),
                slope: -rho,
            },
            rhs: zero,
        },
        CatalogItem {
            name: "inner-b",
            group: InequalityGroup::Inner,
            note: "eps^{2n-2} r^{2-2n} -> 0",
            relation: Relation::VanishesAtZero,
            lhs: c(q(2 * ni - 2, 1) + rho * q(2 - 2 * ni, 1)),
            rhs: zero,
        },
        CatalogItem {
            name: "neck-a",
            group: InequalityGroup::Neck,
            note: "r^5 << r^4",
            relation: Relation::MuchSmallerThan,
            lhs: c(rho * q(5, 1)),
            rhs: c(rho * q(4, 1)),
        },
        CatalogItem {
            name: "neck-b",
            group: InequalityGroup::Neck,
            note: "eps^{4n-4} r^{10-6n-delta} << r^4",
            relation: Relation::MuchSmallerThan,
            lhs: AffineExp {
                base: q(4 * ni - 4, 1) + rho * q(10 - 6 * ni, 1),
                slope: -rho,
            },
            rhs: c(rho * q(4, 1)),
        },
        CatalogItem {
            name: "radial",
            group: InequalityGroup::Radial,
            note: "r^{6-delta} << r^{2n+1}, i.e. 6 - delta > 2n + 1",
            relation: Relation::MuchSmallerThan,
            lhs: AffineExp { base: rho * q(6, 1), slope: -rho },
            rhs: c(rho * q(2 * ni + 1, 1)),
        },
        CatalogItem {
            name: "outer-a",
            group: InequalityGroup::Outer,
            note: "R^{3-2n-delta} -> 0",
            relation: Relation::VanishesAtZero,
            lhs: AffineExp { base: br * q(3 - 2 * ni, 1), slope: -br },
            rhs: zero,
        },
        CatalogItem {
            name: "outer-b",
            group: InequalityGroup::Outer,
            note: "R^{2-2n} -> 0",
            relation: Relation::VanishesAtZero,
            lhs: c(br * q(2 - 2 * ni, 1)),
            rhs: zero,
        },
        CatalogItem {
            name: "outer-c",
            group: InequalityGroup::Outer,
            note: "R^{4-4n} -> 0",
            relation: Relation::VanishesAtZero,
            lhs: c(br * q(4 - 4 * ni, 1)),
            rhs: zero,
        },
        CatalogItem {
            name: "outer-d",
            group: InequalityGroup::Outer,
            note: "R^{4-4n} << R^{2-2n}",
            relation: Relation::MuchSmallerThan,
            lhs: c(br * q(4 - 4 * ni, 1)),
            rhs: c(br * q(2 - 2 * ni, 1)),
        },
    ]
}

/// Evaluates the full inequality catalog at an exact delta. Deltas outside
/// the stated window are still evaluated and only flagged.
pub fn verify_ledger(n: usize, delta: Q) -> Result<EstimateLedger> {
    let window = stated_window(n)?;
    let in_window = delta > window.0 && delta < window.1;
    let entries: Vec<LedgerEntry> = catalog(n)
        .into_iter()
        .map(|item| {
            let lhs = item.lhs.eval(delta);
            let rhs = item.rhs.eval(delta);
            let gap = lhs - rhs;
            LedgerEntry {
                name: item.name,
                group: item.group,
                note: item.note,
                relation: item.relation,
                lhs_exponent: lhs,
                rhs_exponent: rhs,
                gap,
                pass: gap.is_positive(),
            }
        })
        .collect();
    let all_pass = entries.iter().all(|e| e.pass);
    Ok(EstimateLedger { n, delta, window, in_window, entries, all_pass })
}

/// A delta interval; open on both sides, None meaning unbounded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaWindow {
    pub lo: Option<Q>,
    pub hi: Option<Q>,
    pub empty: bool,
}

impl DeltaWindow {
    pub fn all() -> Self {
        DeltaWindow { lo: None, hi: None, empty: false }
    }

    pub fn contains(&self, delta: Q) -> bool {
        !self.empty
            && self.lo.map_or(true, |lo| delta > lo)
            && self.hi.map_or(true, |hi| delta < hi)
    }
}

/// Intersects the open solution sets of gap(delta) > 0 for affine gaps.
pub fn solve_affine_constraints(gaps: &[AffineExp]) -> DeltaWindow {
    let mut w = DeltaWindow::all();
    for g in gaps {
        if g.slope.is_zero() {
            if !g.base.is_positive() {
                return DeltaWindow { lo: None, hi: None, empty: true };
            }
        } else {
            let root = -g.base / g.slope;
            if g.slope.is_positive() {
                w.lo = Some(w.lo.map_or(root, |lo| lo.max(root)));
            } else {
                w.hi = Some(w.hi.map_or(root, |hi| hi.min(root)));
            }
        }
    }
    if let (Some(lo), Some(hi)) = (w.lo, w.hi) {
        if lo >= hi {
            w.empty = true;
        }
    }
    w
}

/// Exact delta window on which every inequality of the requested groups
/// holds.
pub fn delta_window(n: usize, groups: &[InequalityGroup]) -> Result<DeltaWindow> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("need n >= 2, got {n}")));
    }
    let gaps: Vec<AffineExp> = catalog(n)
        .into_iter()
        .filter(|item| groups.contains(&item.group))
        .map(|item| item.lhs - item.rhs)
        .collect();
    Ok(solve_affine_constraints(&gaps))
}
