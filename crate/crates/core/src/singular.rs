//! Singularity sets Σ ⊂ X and families of them closed under finite unions.
//!
//! Dense sets are represented by enumerations truncated at a cap; closed
//! nowhere dense sets by finite point lists or zero sets of expressions.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{Cell, OpenSet, Point, SAMPLE_OFFSET};
use crate::error::{FoamError, Result};
use crate::expr::{Evaluator, Node, SmoothExpr};
use crate::scalar::Scalar;
use crate::NUMERIC_ZERO;

/// Points closer than this are identified.
pub const POINT_TOL: f64 = 1e-12;

/// Deterministic enumeration of points.
#[derive(Clone, Debug, PartialEq)]
pub enum Enumeration {
    /// Reduced fractions in (0,1) ordered by denominator, then numerator:
    /// 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, …
    RationalsUnit,
    Explicit(Vec<Point>),
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Enumeration {
    pub fn take(&self, n: usize) -> Vec<Point> {
        match self {
            Enumeration::Explicit(v) => v.iter().take(n).cloned().collect(),
            Enumeration::RationalsUnit => {
                let mut out = Vec::with_capacity(n);
                let mut q = 2u64;
                while out.len() < n {
                    for p in 1..q {
                        if out.len() == n {
                            break;
                        }
                        if gcd(p, q) == 1 {
                            out.push(Point(vec![p as f64 / q as f64]));
                        }
                    }
                    q += 1;
                }
                out
            }
        }
    }

    /// Exact fractions `(p, q)` of the first `n` rationals.
    pub fn rational_fractions(n: usize) -> Vec<(i64, i64)> {
        let mut out = Vec::with_capacity(n);
        let mut q = 2i64;
        while out.len() < n {
            for p in 1..q {
                if out.len() == n {
                    break;
                }
                if gcd(p as u64, q as u64) == 1 {
                    out.push((p, q));
                }
            }
            q += 1;
        }
        out
    }
}

/// Number of reduced fractions in (0,1) with denominator at most `max_den`.
pub fn rationals_up_to_denominator(max_den: u64) -> usize {
    (2..=max_den)
        .map(|q| (1..q).filter(|&p| gcd(p, q) == 1).count())
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub enum SingularKind {
    Empty,
    FinitePoints(Vec<Point>),
    ZeroSet {
        sigma: SmoothExpr,
        /// Known closed nowhere dense by construction (e.g. the zero set of a
        /// nonzero polynomial).
        trusted: bool,
    },
    /// Increasing union Σ_0 ⊆ Σ_1 ⊆ … of closed nowhere dense sets; the last
    /// entry stands for every later index.
    CountableUnion(Vec<SingularSet>),
    DenseEnumerated { enumeration: Enumeration, cap: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularSet {
    kind: SingularKind,
    domain: OpenSet,
}

/// Outcome of a complement-density check.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub dense: bool,
    /// One exterior point per grid cell (when dense).
    pub witnesses: Vec<Point>,
    /// A cell found entirely inside Σ (when not dense).
    pub inside_cell: Option<Cell>,
}

fn dedup_points(points: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| q.dist(&p) < POINT_TOL) {
            out.push(p);
        }
    }
    out
}

/// Factor scale in [`points_polynomial`]; keeps products over many points
/// away from underflow.
pub const POINT_FACTOR_SCALE: i64 = 4;

/// Polynomial whose zero set is exactly the given points, one factor
/// `4(x - q)` (or `16|x - q|²`) per point.
pub fn points_polynomial(points: &[Point]) -> SmoothExpr {
    let k = SmoothExpr::int(POINT_FACTOR_SCALE);
    let mut factors = Vec::with_capacity(points.len());
    for p in points {
        if p.dim() == 1 {
            factors.push(k.clone() * (SmoothExpr::coord(0) - SmoothExpr::constant(Scalar::real(p[0]))));
        } else {
            let sq: Vec<SmoothExpr> = p
                .iter()
                .enumerate()
                .map(|(a, v)| (k.clone() * (SmoothExpr::coord(a) - SmoothExpr::constant(Scalar::real(*v)))).pow(2))
                .collect();
            factors.push(SmoothExpr::sum(sq));
        }
    }
    SmoothExpr::product(factors).simplified()
}

fn factor_bases(e: &SmoothExpr) -> BTreeSet<SmoothExpr> {
    match e.node() {
        Node::Mul(fs) => fs
            .iter()
            .filter(|f| f.as_const().is_none())
            .map(|f| match f.node() {
                Node::Pow(b, n) if *n > 0 => b.clone(),
                _ => f.clone(),
            })
            .collect(),
        Node::Pow(b, n) if *n > 0 => [b.clone()].into_iter().collect(),
        Node::Const(_) => BTreeSet::new(),
        _ => [e.clone()].into_iter().collect(),
    }
}

impl SingularSet {
    pub fn empty(domain: OpenSet) -> Self {
        SingularSet {
            kind: SingularKind::Empty,
            domain,
        }
    }

    pub fn points(domain: OpenSet, points: Vec<Point>) -> Result<Self> {
        if points.iter().any(|p| p.dim() != domain.dim()) {
            return Err(FoamError::Invalid("point dimension differs from domain".into()));
        }
        let points = dedup_points(points);
        if points.is_empty() {
            return Ok(SingularSet::empty(domain));
        }
        Ok(SingularSet {
            kind: SingularKind::FinitePoints(points),
            domain,
        })
    }

    pub fn zero_set(domain: OpenSet, sigma: SmoothExpr, trusted: bool) -> Self {
        SingularSet {
            kind: SingularKind::ZeroSet {
                sigma: sigma.simplified(),
                trusted,
            },
            domain,
        }
    }

    pub fn dense(domain: OpenSet, enumeration: Enumeration, cap: usize) -> Self {
        SingularSet {
            kind: SingularKind::DenseEnumerated { enumeration, cap },
            domain,
        }
    }

    /// Increasing union; returns the set and whether prefix unions had to
    /// be taken to make the list increasing.
    pub fn countable_union(domain: OpenSet, parts: Vec<SingularSet>) -> Result<(Self, bool)> {
        let mut out: Vec<SingularSet> = Vec::with_capacity(parts.len());
        let mut repaired = false;
        for p in parts {
            if !p.is_closed_kind() {
                return Err(FoamError::Invalid(
                    "countable unions are built from point sets and zero sets".into(),
                ));
            }
            let next = match out.last() {
                None => p,
                Some(prev) => {
                    if prev.is_subset_of(&p) {
                        p
                    } else {
                        repaired = true;
                        join_closed(prev, &p)?
                    }
                }
            };
            out.push(next.with_domain(domain.clone()));
        }
        if out.is_empty() {
            return Ok((SingularSet::empty(domain), repaired));
        }
        Ok((
            SingularSet {
                kind: SingularKind::CountableUnion(out),
                domain,
            },
            repaired,
        ))
    }

    pub fn kind(&self) -> &SingularKind {
        &self.kind
    }

    pub fn domain(&self) -> &OpenSet {
        &self.domain
    }

    fn with_domain(mut self, domain: OpenSet) -> Self {
        if let SingularKind::CountableUnion(parts) = &mut self.kind {
            for p in parts.iter_mut() {
                p.domain = domain.clone();
            }
        }
        self.domain = domain;
        self
    }

    pub fn is_empty_kind(&self) -> bool {
        matches!(self.kind, SingularKind::Empty)
    }

    fn is_closed_kind(&self) -> bool {
        matches!(
            self.kind,
            SingularKind::Empty | SingularKind::FinitePoints(_) | SingularKind::ZeroSet { .. }
        )
    }

    /// Enumerated points that lie in the domain.
    pub fn enumerated_points(&self) -> Vec<Point> {
        match &self.kind {
            SingularKind::FinitePoints(ps) => ps.iter().filter(|p| self.domain.contains(p)).cloned().collect(),
            SingularKind::DenseEnumerated { enumeration, cap } => enumeration
                .take(*cap)
                .into_iter()
                .filter(|p| self.domain.contains(p))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Membership of `x` in Σ ∩ domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        if !self.domain.contains(x) {
            return false;
        }
        let near = |p: &Point| p.iter().zip(x).all(|(a, b)| libm::fabs(a - b) < POINT_TOL);
        match &self.kind {
            SingularKind::Empty => false,
            SingularKind::FinitePoints(ps) => ps.iter().any(near),
            SingularKind::ZeroSet { sigma, .. } => Evaluator::new(x).eval(sigma) == 0.0,
            SingularKind::CountableUnion(parts) => parts.iter().any(|p| p.contains(x)),
            SingularKind::DenseEnumerated { enumeration, cap } => {
                enumeration.take(*cap).iter().any(near)
            }
        }
    }

    /// Smooth function on the domain whose zero set is Σ, for closed kinds.
    pub fn defining_function(&self) -> Option<SmoothExpr> {
        match &self.kind {
            SingularKind::Empty => Some(SmoothExpr::one()),
            SingularKind::FinitePoints(ps) => Some(points_polynomial(ps)),
            SingularKind::ZeroSet { sigma, .. } => Some(sigma.clone()),
            _ => None,
        }
    }

    /// Grid check that no cell of the domain lies inside the zero set.
    pub fn is_nowhere_dense_on_grid(&self, res: usize) -> bool {
        match &self.kind {
            SingularKind::Empty | SingularKind::FinitePoints(_) => true,
            SingularKind::ZeroSet { trusted: true, .. } => true,
            SingularKind::ZeroSet { .. } => complement_dense(self, res.max(2)).is_ok_and(|r| r.dense),
            SingularKind::CountableUnion(parts) => parts.iter().all(|p| p.is_nowhere_dense_on_grid(res)),
            SingularKind::DenseEnumerated { .. } => false,
        }
    }

    /// Σ ∩ V with domain V.
    pub fn restrict(&self, v: &OpenSet) -> SingularSet {
        let kind = match &self.kind {
            SingularKind::FinitePoints(ps) => {
                let kept: Vec<Point> = ps.iter().filter(|p| v.contains(p)).cloned().collect();
                if kept.is_empty() {
                    SingularKind::Empty
                } else {
                    SingularKind::FinitePoints(kept)
                }
            }
            SingularKind::CountableUnion(parts) => {
                SingularKind::CountableUnion(parts.iter().map(|p| p.restrict(v)).collect())
            }
            k => k.clone(),
        };
        SingularSet {
            kind,
            domain: v.clone(),
        }
    }

    /// Whether Σ may meet the open ball `B(x, r)`.
    pub fn meets_ball(&self, x: &Point, r: f64) -> bool {
        match &self.kind {
            SingularKind::Empty => false,
            SingularKind::FinitePoints(_) | SingularKind::DenseEnumerated { .. } => self
                .enumerated_points()
                .iter()
                .any(|p| p.dist(x) < r),
            SingularKind::CountableUnion(parts) => parts.iter().any(|p| p.meets_ball(x, r)),
            SingularKind::ZeroSet { sigma, .. } => {
                let n: usize = if x.dim() == 1 { 257 } else { 17 };
                let dim = x.dim();
                let total = n.pow(dim as u32);
                let mut sign = 0.0f64;
                for flat in 0..total {
                    let mut rem = flat;
                    let mut p = Vec::with_capacity(dim);
                    for k in 0..dim {
                        let i = rem % n;
                        rem /= n;
                        p.push(x[k] - r + 2.0 * r * (i as f64 + 0.5) / n as f64);
                    }
                    let p = Point(p);
                    if p.dist(x) >= r || !self.domain.contains(&p) {
                        continue;
                    }
                    let v = Evaluator::new(&p).eval(sigma);
                    if libm::fabs(v) <= NUMERIC_ZERO || v * sign < 0.0 {
                        return true;
                    }
                    sign = v;
                }
                false
            }
        }
    }

    /// Structural inclusion Σ ⊆ other; `false` when undecided.
    pub fn is_subset_of(&self, other: &SingularSet) -> bool {
        use SingularKind::*;
        match (&self.kind, &other.kind) {
            (Empty, _) => true,
            (FinitePoints(ps), _) => ps
                .iter()
                .filter(|p| self.domain.contains(p))
                .all(|p| other.contains(p) || !other.domain.contains(p) && false),
            (ZeroSet { sigma: a, .. }, ZeroSet { sigma: b, .. }) => {
                a == b || factor_bases(a).is_subset(&factor_bases(b)) && !factor_bases(a).is_empty()
            }
            (CountableUnion(parts), _) => parts.iter().all(|p| p.is_subset_of(other)),
            (_, CountableUnion(parts)) => parts.iter().any(|p| self.is_subset_of(p)),
            (
                DenseEnumerated {
                    enumeration: e1,
                    cap: c1,
                },
                DenseEnumerated {
                    enumeration: e2,
                    cap: c2,
                },
            ) => e1 == e2 && c1 <= c2,
            _ => false,
        }
    }

    /// Exterior sample points: one per grid cell at the irrational offset.
    pub fn exterior_samples(&self, res: usize) -> Vec<Point> {
        self.domain
            .sample_points(res)
            .into_iter()
            .filter(|p| !self.contains(p))
            .collect()
    }

    /// Closed pieces Σ_0 ⊆ Σ_1 ⊆ … covering Σ; dense enumerations become
    /// their finite prefixes.
    pub fn as_increasing_list(&self) -> Vec<SingularSet> {
        match &self.kind {
            SingularKind::CountableUnion(parts) => parts.clone(),
            SingularKind::DenseEnumerated { .. } => {
                let pts = self.enumerated_points();
                (1..=pts.len())
                    .map(|n| SingularSet {
                        kind: SingularKind::FinitePoints(pts[..n].to_vec()),
                        domain: self.domain.clone(),
                    })
                    .collect()
            }
            _ => vec![self.clone()],
        }
    }
}

/// Union of two closed nowhere dense sets as a closed set.
pub fn join_closed(a: &SingularSet, b: &SingularSet) -> Result<SingularSet> {
    use SingularKind::*;
    let domain = a.domain.clone();
    Ok(match (&a.kind, &b.kind) {
        (Empty, _) => b.clone().with_domain(domain),
        (_, Empty) => a.clone(),
        (FinitePoints(p), FinitePoints(q)) => {
            let mut all = p.clone();
            all.extend(q.iter().cloned());
            SingularSet::points(domain, all)?
        }
        (ZeroSet { trusted: t1, .. }, _) | (_, ZeroSet { trusted: t1, .. })
            if a.is_closed_kind() && b.is_closed_kind() =>
        {
            let trusted = *t1
                && [a, b].iter().all(|s| match &s.kind {
                    ZeroSet { trusted, .. } => *trusted,
                    _ => true,
                });
            let fa = a.defining_function().unwrap();
            let fb = b.defining_function().unwrap();
            SingularSet::zero_set(domain, fa * fb, trusted)
        }
        _ => {
            return Err(FoamError::JoinNotRepresentable(format!(
                "{:?} with {:?}",
                kind_name(&a.kind),
                kind_name(&b.kind)
            )))
        }
    })
}

fn kind_name(k: &SingularKind) -> &'static str {
    match k {
        SingularKind::Empty => "empty",
        SingularKind::FinitePoints(_) => "points",
        SingularKind::ZeroSet { .. } => "zero_set",
        SingularKind::CountableUnion(_) => "countable_union",
        SingularKind::DenseEnumerated { .. } => "dense",
    }
}

/// Per-cell check that the complement of Σ is dense.
pub fn complement_dense(set: &SingularSet, res: usize) -> Result<DensityReport> {
    if res < 2 {
        return Err(FoamError::Invalid("grid resolution must be at least 2".into()));
    }
    const FRACTIONS: [f64; 5] = [SAMPLE_OFFSET, 0.5, core::f64::consts::FRAC_1_PI, 0.2, 0.9];
    let mut witnesses = Vec::new();
    for cell in set.domain.cells(res) {
        let found = FRACTIONS.iter().map(|&f| cell.at(f)).find(|p| match &set.kind {
            SingularKind::ZeroSet { sigma, .. } => libm::fabs(Evaluator::new(p).eval(sigma)) > NUMERIC_ZERO,
            _ => !set.contains(p),
        });
        match found {
            Some(p) => witnesses.push(p),
            None => {
                return Ok(DensityReport {
                    dense: false,
                    witnesses: Vec::new(),
                    inside_cell: Some(cell),
                })
            }
        }
    }
    Ok(DensityReport {
        dense: true,
        witnesses,
        inside_cell: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyLabel {
    /// Closed nowhere dense sets.
    Snd,
    /// Countable unions of closed nowhere dense sets.
    SBaireDelta,
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityFamily {
    label: FamilyLabel,
    generators: Vec<SingularSet>,
    domain: OpenSet,
}

/// Resolution used when validating family members.
const FAMILY_CHECK_RES: usize = 16;

impl SingularityFamily {
    pub fn new(label: FamilyLabel, generators: Vec<SingularSet>, domain: OpenSet) -> Result<Self> {
        let generators: Vec<SingularSet> = generators
            .into_iter()
            .map(|g| g.with_domain(domain.clone()))
            .collect();
        for g in &generators {
            let admissible = match label {
                FamilyLabel::Snd => g.is_closed_kind() && g.is_nowhere_dense_on_grid(FAMILY_CHECK_RES),
                FamilyLabel::SBaireDelta => !matches!(g.kind, SingularKind::ZeroSet { .. })
                    || g.is_nowhere_dense_on_grid(FAMILY_CHECK_RES),
                FamilyLabel::Custom => true,
            };
            if !admissible {
                return Err(FoamError::Invalid(format!(
                    "{} generator is not admissible in {:?}",
                    kind_name(&g.kind),
                    label
                )));
            }
            if !complement_dense(g, FAMILY_CHECK_RES)?.dense {
                return Err(FoamError::Invalid("generator complement is not dense".into()));
            }
        }
        Ok(SingularityFamily {
            label,
            generators,
            domain,
        })
    }

    pub fn label(&self) -> FamilyLabel {
        self.label
    }

    pub fn generators(&self) -> &[SingularSet] {
        &self.generators
    }

    pub fn domain(&self) -> &OpenSet {
        &self.domain
    }

    /// A member of the family containing `a ∪ b`.
    pub fn union_join(&self, a: &SingularSet, b: &SingularSet) -> Result<SingularSet> {
        if a.is_empty_kind() {
            return Ok(b.clone());
        }
        if b.is_empty_kind() {
            return Ok(a.clone());
        }
        match self.label {
            FamilyLabel::Snd => join_closed(a, b),
            FamilyLabel::SBaireDelta => {
                if a.is_closed_kind() && b.is_closed_kind() {
                    return join_closed(a, b);
                }
                let la = a.as_increasing_list();
                let lb = b.as_increasing_list();
                let n = la.len().max(lb.len());
                let mut parts = Vec::with_capacity(n);
                for i in 0..n {
                    let x = &la[i.min(la.len() - 1)];
                    let y = &lb[i.min(lb.len() - 1)];
                    parts.push(join_closed(x, y)?);
                }
                Ok(SingularSet::countable_union(self.domain.clone(), parts)?.0)
            }
            FamilyLabel::Custom => self
                .generators
                .iter()
                .find(|g| a.is_subset_of(g) && b.is_subset_of(g))
                .cloned()
                .ok_or_else(|| FoamError::JoinNotRepresentable("no generator contains both sets".into())),
        }
    }

    /// Generators, then cumulative unions of the first generators using at
    /// most `max_joins` joins, then pairwise unions.
    pub fn join_candidates(&self, max_joins: usize) -> Vec<SingularSet> {
        let g = &self.generators;
        let mut out: Vec<SingularSet> = g.clone();
        let mut acc = g.first().cloned();
        for next in g.iter().skip(1).take(max_joins) {
            acc = acc.and_then(|a| self.union_join(&a, next).ok());
            if let Some(a) = &acc {
                out.push(a.clone());
            }
        }
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                if let Ok(u) = self.union_join(&g[i], &g[j]) {
                    if !out.contains(&u) {
                        out.push(u);
                    }
                }
            }
        }
        out
    }

    /// A candidate member containing `sigma`.
    pub fn dominating(&self, sigma: &SingularSet, max_joins: usize) -> Option<SingularSet> {
        self.join_candidates(max_joins)
            .into_iter()
            .find(|c| sigma.is_subset_of(c))
    }

    /// Whether `sigma` is admissible in the family's class of sets.
    pub fn admits(&self, sigma: &SingularSet) -> bool {
        match self.label {
            FamilyLabel::Snd => sigma.is_closed_kind() && sigma.is_nowhere_dense_on_grid(FAMILY_CHECK_RES),
            FamilyLabel::SBaireDelta => true,
            FamilyLabel::Custom => self.generators.iter().any(|g| sigma.is_subset_of(g)),
        }
    }
}

/// S|_V = { Σ ∩ V | Σ ∈ S }, with the closure conditions re-checked on V.
pub fn restrict_family(family: &SingularityFamily, v: &OpenSet) -> Result<SingularityFamily> {
    if v.dim() != family.domain.dim() || !v.is_subset_of(&family.domain) {
        return Err(FoamError::NotContained);
    }
    let generators = family.generators.iter().map(|g| g.restrict(v)).collect();
    SingularityFamily::new(family.label, generators, v.clone())
}

/// Singular sets Σ_0, Σ_1, … given by a finite prefix, plus points at which
/// the (infinite) tail is known to accumulate.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaSequence {
    pub prefix: Vec<SingularSet>,
    pub accumulation_points: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LfaWitness {
    pub point: Point,
    /// Radius of a neighbourhood meeting finitely many Σ_l; `None` when the
    /// halving search was exhausted.
    pub radius: Option<f64>,
    /// Prefix indices meeting that neighbourhood.
    pub meeting: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LfaStatus {
    Pass,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LfaReport {
    pub status: LfaStatus,
    pub witnesses: Vec<LfaWitness>,
    /// The union as a member of S|_V, built when the check passes.
    pub union: Option<SingularSet>,
}

impl LfaReport {
    pub fn inconclusive_points(&self) -> Vec<Point> {
        self.witnesses
            .iter()
            .filter(|w| w.radius.is_none())
            .map(|w| w.point.clone())
            .collect()
    }
}

pub const LFA_INITIAL_RADIUS: f64 = 0.5;
pub const LFA_MAX_HALVINGS: u32 = 40;

/// Local finiteness of a sequence of singular sets on V.
pub fn locally_finitely_additive(
    family: &SingularityFamily,
    sigmas: &SigmaSequence,
    v: &OpenSet,
    res: usize,
) -> Result<LfaReport> {
    if !v.is_subset_of(&family.domain) {
        return Err(FoamError::NotContained);
    }
    let mut witnesses = Vec::new();
    for x in v.grid(res) {
        let mut r = LFA_INITIAL_RADIUS;
        let mut radius = None;
        for _ in 0..=LFA_MAX_HALVINGS {
            if sigmas.accumulation_points.iter().all(|a| a.dist(&x) >= r) {
                radius = Some(r);
                break;
            }
            r *= 0.5;
        }
        let meeting = match radius {
            Some(r) => sigmas
                .prefix
                .iter()
                .enumerate()
                .filter(|(_, s)| s.meets_ball(&x, r))
                .map(|(i, _)| i)
                .collect(),
            None => Vec::new(),
        };
        witnesses.push(LfaWitness {
            point: x,
            radius,
            meeting,
        });
    }
    let status = if witnesses.iter().all(|w| w.radius.is_some()) {
        LfaStatus::Pass
    } else {
        LfaStatus::Inconclusive
    };
    let union = if status == LfaStatus::Pass {
        let restricted: Vec<SingularSet> = sigmas.prefix.iter().map(|s| s.restrict(v)).collect();
        let mut parts = Vec::with_capacity(restricted.len());
        let mut acc: Option<SingularSet> = None;
        for s in restricted {
            let next = match &acc {
                None => s,
                Some(a) => family.union_join(a, &s).or_else(|_| join_closed(a, &s))?,
            };
            parts.push(next.clone());
            acc = Some(next);
        }
        if parts.iter().all(SingularSet::is_closed_kind) {
            Some(SingularSet::countable_union(v.clone(), parts)?.0)
        } else {
            acc
        }
    } else {
        None
    };
    Ok(LfaReport {
        status,
        witnesses,
        union,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Bound;

    fn x() -> SmoothExpr {
        SmoothExpr::coord(0)
    }

    fn unit() -> OpenSet {
        OpenSet::interval_i(-1, 1).unwrap()
    }

    #[test]
    fn rational_enumeration_order() {
        let pts = Enumeration::RationalsUnit.take(6);
        let v: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        assert_eq!(v, [0.5, 1.0 / 3.0, 2.0 / 3.0, 0.25, 0.75, 0.2]);
        assert_eq!(rationals_up_to_denominator(8), 21);
    }

    #[test]
    fn density_of_complements() {
        let s = SingularSet::points(unit(), vec![Point(vec![0.0])]).unwrap();
        assert!(complement_dense(&s, 16).unwrap().dense);

        let n = rationals_up_to_denominator(64);
        let q = SingularSet::dense(OpenSet::interval_i(0, 1).unwrap(), Enumeration::RationalsUnit, n);
        let r = complement_dense(&q, 16).unwrap();
        assert!(r.dense);
        assert_eq!(r.witnesses.len(), 16);

        let all = SingularSet::zero_set(unit(), SmoothExpr::zero(), false);
        let r = complement_dense(&all, 16).unwrap();
        assert!(!r.dense && r.inside_cell.is_some());
        assert!(complement_dense(&s, 1).is_err());
    }

    #[test]
    fn unions() {
        let snd = SingularityFamily::new(FamilyLabel::Snd, vec![], unit()).unwrap();
        let a = SingularSet::points(unit(), vec![Point(vec![0.0])]).unwrap();
        let b = SingularSet::points(unit(), vec![Point(vec![1.0])]).unwrap();
        let u = snd.union_join(&a, &b).unwrap();
        assert_eq!(u.kind(), &SingularKind::FinitePoints(vec![Point(vec![0.0]), Point(vec![1.0])]));

        let d = OpenSet::interval_i(-2, 2).unwrap();
        let z1 = SingularSet::zero_set(d.clone(), x(), true);
        let z2 = SingularSet::zero_set(d.clone(), x() - SmoothExpr::one(), true);
        let u = join_closed(&z1, &z2).unwrap();
        let expected = SingularSet::zero_set(d.clone(), x() * (x() - SmoothExpr::one()), true);
        assert_eq!(u, expected);
        assert!(z1.is_subset_of(&u) && z2.is_subset_of(&u));

        let e = SingularSet::empty(unit());
        assert_eq!(snd.union_join(&a, &e).unwrap(), a);
    }

    #[test]
    fn nowhere_dense_unions_stay_nowhere_dense() {
        let d = OpenSet::interval_i(-2, 2).unwrap();
        let z1 = SingularSet::zero_set(d.clone(), x(), false);
        let z2 = SingularSet::zero_set(d.clone(), x().sin(), false);
        let snd = SingularityFamily::new(FamilyLabel::Snd, vec![z1.clone(), z2.clone()], d).unwrap();
        let u = snd.union_join(&z1, &z2).unwrap();
        assert!(u.is_nowhere_dense_on_grid(32));
    }

    #[test]
    fn baire_accepts_nd_generators_and_dense_unions() {
        let d = OpenSet::interval_i(0, 1).unwrap();
        let p = SingularSet::points(d.clone(), vec![Point(vec![0.5])]).unwrap();
        let z = SingularSet::zero_set(d.clone(), x() - SmoothExpr::constant(Scalar::ratio(1, 3)), true);
        let q = SingularSet::dense(d.clone(), Enumeration::RationalsUnit, 10);
        let fam = SingularityFamily::new(FamilyLabel::SBaireDelta, vec![p.clone(), z.clone(), q.clone()], d.clone())
            .unwrap();
        assert!(SingularityFamily::new(FamilyLabel::Snd, vec![p.clone(), z.clone()], d.clone()).is_ok());
        assert!(SingularityFamily::new(FamilyLabel::Snd, vec![q.clone()], d).is_err());
        let u = fam.union_join(&q, &z).unwrap();
        assert!(matches!(u.kind(), SingularKind::CountableUnion(_)));
        let u2 = fam.union_join(&u, &p).unwrap();
        assert!(matches!(u2.kind(), SingularKind::CountableUnion(_)));
        assert!(u2.contains(&[1.0 / 3.0]) && u2.contains(&[0.25]));
    }

    #[test]
    fn custom_join_needs_a_generator() {
        let a = SingularSet::points(unit(), vec![Point(vec![0.0])]).unwrap();
        let b = SingularSet::points(unit(), vec![Point(vec![0.5])]).unwrap();
        let fam = SingularityFamily::new(FamilyLabel::Custom, vec![a.clone(), b.clone()], unit()).unwrap();
        assert!(matches!(fam.union_join(&a, &b), Err(FoamError::JoinNotRepresentable(_))));
    }

    #[test]
    fn restriction() {
        let a = SingularSet::points(unit(), vec![Point(vec![0.0])]).unwrap();
        let snd = SingularityFamily::new(FamilyLabel::Snd, vec![a], unit()).unwrap();
        let v = OpenSet::interval_i(0, 1).unwrap();
        let r = restrict_family(&snd, &v).unwrap();
        assert!(r.generators()[0].is_empty_kind());
        assert_eq!(restrict_family(&snd, &unit()).unwrap(), snd);
        assert_eq!(
            restrict_family(&snd, &OpenSet::interval_i(0, 3).unwrap()),
            Err(FoamError::NotContained)
        );

        let d = OpenSet::interval_i(-2, 2).unwrap();
        let z = SingularSet::zero_set(d, x() * (x() - SmoothExpr::one()), true);
        let w = OpenSet::interval(Bound::finite(1, 2), Bound::int(2)).unwrap();
        let zr = z.restrict(&w);
        let roots: Vec<f64> = w.grid(200).iter().filter(|p| zr.meets_ball(p, 0.006)).map(|p| p[0]).collect();
        assert!(!roots.is_empty() && roots.iter().all(|r| (r - 1.0).abs() < 0.01));
    }

    #[test]
    fn restriction_composes() {
        let d = OpenSet::interval_i(-4, 4).unwrap();
        let gens = vec![
            SingularSet::points(d.clone(), vec![Point(vec![-3.0]), Point(vec![0.5]), Point(vec![2.0])]).unwrap(),
            SingularSet::zero_set(d.clone(), x().sin(), true),
        ];
        let s = SingularityFamily::new(FamilyLabel::Snd, gens, d).unwrap();
        let v = OpenSet::interval_i(-1, 3).unwrap();
        let w = OpenSet::interval_i(0, 1).unwrap();
        let twice = restrict_family(&restrict_family(&s, &v).unwrap(), &w).unwrap();
        assert_eq!(twice, restrict_family(&s, &w).unwrap());
    }

    #[test]
    fn locally_finite_integers() {
        let d = OpenSet::interval_i(-10, 10).unwrap();
        let prefix: Vec<SingularSet> = (0..10)
            .map(|l| SingularSet::points(d.clone(), vec![Point(vec![l as f64])]).unwrap())
            .collect();
        let fam = SingularityFamily::new(FamilyLabel::Snd, vec![], d.clone()).unwrap();
        let seq = SigmaSequence {
            prefix,
            accumulation_points: vec![],
        };
        let rep = locally_finitely_additive(&fam, &seq, &d, 40).unwrap();
        assert_eq!(rep.status, LfaStatus::Pass);
        assert!(rep.witnesses.iter().all(|w| w.radius == Some(0.5) && w.meeting.len() <= 1));
        let u = rep.union.unwrap();
        assert!(u.contains(&[3.0]) && !u.contains(&[3.5]));
    }

    #[test]
    fn accumulation_is_inconclusive_only_there() {
        let d = OpenSet::interval_i(-1, 1).unwrap();
        let prefix: Vec<SingularSet> = (0..30)
            .map(|l| SingularSet::points(d.clone(), vec![Point(vec![1.0 / (l as f64 + 1.0)])]).unwrap())
            .collect();
        let fam = SingularityFamily::new(FamilyLabel::Snd, vec![], d.clone()).unwrap();
        let seq = SigmaSequence {
            prefix,
            accumulation_points: vec![Point(vec![0.0])],
        };
        let rep = locally_finitely_additive(&fam, &seq, &d, 21).unwrap();
        assert_eq!(rep.status, LfaStatus::Inconclusive);
        let bad = rep.inconclusive_points();
        assert_eq!(bad.len(), 1);
        assert!(bad[0][0].abs() < 1e-12);
        assert!(rep.union.is_none());
    }
}
