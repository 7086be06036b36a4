//! Index-parametrised families `w = (w_λ)` of smooth functions.
//!
//! Terms are finite sums of pieces; a masked piece is its expression on the
//! mask, extended by zero elsewhere. Every construction also reports, per
//! point, an index beyond which the germ of the term at that point no longer
//! changes. Membership checking relies on that.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bump::shrinking_plateau;
use crate::domain::{MultiIndex, OpenSet, Point};
use crate::error::{FoamError, Result};
use crate::expr::{Evaluator, SmoothExpr};
use crate::orders::{CofinalEmbedding, Index, IndexOrder};
use crate::scalar::{Rational, Scalar};
use crate::simplify::{germ_at, is_structural_zero};

/// Indices above this are not produced by witness rules.
pub const MAX_WITNESS: u64 = 1 << 50;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    /// `None` means the whole domain.
    pub mask: Option<OpenSet>,
    pub expr: SmoothExpr,
}

impl Piece {
    pub fn is_active(&self, x: &[f64]) -> bool {
        self.mask.as_ref().is_none_or(|m| m.contains(x))
    }
}

/// One term `w_λ`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Term {
    pieces: Vec<Piece>,
}

fn mask_product(a: &Option<OpenSet>, b: &Option<OpenSet>) -> Option<Option<OpenSet>> {
    match (a, b) {
        (None, m) | (m, None) => Some(m.clone()),
        (Some(x), Some(y)) if x == y => Some(Some(x.clone())),
        (Some(x), Some(y)) => x.intersect(y).map(Some),
    }
}

impl Term {
    pub fn zero() -> Self {
        Term::default()
    }

    pub fn smooth(expr: SmoothExpr) -> Self {
        Term::from_pieces(vec![Piece { mask: None, expr }])
    }

    pub fn masked(mask: OpenSet, expr: SmoothExpr) -> Self {
        Term::from_pieces(vec![Piece {
            mask: Some(mask),
            expr,
        }])
    }

    /// Groups pieces by mask and drops zero sums.
    pub fn from_pieces(pieces: Vec<Piece>) -> Self {
        let mut groups: Vec<(Option<OpenSet>, Vec<SmoothExpr>)> = Vec::new();
        for p in pieces {
            match groups.iter_mut().find(|(m, _)| *m == p.mask) {
                Some((_, es)) => es.push(p.expr),
                None => groups.push((p.mask, vec![p.expr])),
            }
        }
        groups.sort_by_key(|(m, _)| m.is_some());
        let pieces = groups
            .into_iter()
            .filter_map(|(mask, es)| {
                let expr = SmoothExpr::sum(es).simplified();
                (!expr.is_const_zero()).then_some(Piece { mask, expr })
            })
            .collect();
        Term { pieces }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// The single unmasked expression, when the term has no masked pieces.
    pub fn as_smooth(&self) -> Option<SmoothExpr> {
        match self.pieces.as_slice() {
            [] => Some(SmoothExpr::zero()),
            [Piece { mask: None, expr }] => Some(expr.clone()),
            _ => None,
        }
    }

    /// Every piece vanishes by rewriting and expansion.
    pub fn is_structural_zero(&self) -> bool {
        self.pieces.iter().all(|p| is_structural_zero(&p.expr))
    }

    pub fn add(&self, other: &Term) -> Term {
        Term::from_pieces(self.pieces.iter().chain(&other.pieces).cloned().collect())
    }

    pub fn neg(&self) -> Term {
        self.scale(Scalar::int(-1))
    }

    pub fn scale(&self, c: Scalar) -> Term {
        let k = SmoothExpr::constant(c);
        Term::from_pieces(
            self.pieces
                .iter()
                .map(|p| Piece {
                    mask: p.mask.clone(),
                    expr: k.clone() * p.expr.clone(),
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Term) -> Term {
        let mut out = Vec::with_capacity(self.pieces.len() * other.pieces.len());
        for a in &self.pieces {
            for b in &other.pieces {
                if let Some(mask) = mask_product(&a.mask, &b.mask) {
                    out.push(Piece {
                        mask,
                        expr: a.expr.clone() * b.expr.clone(),
                    });
                }
            }
        }
        Term::from_pieces(out)
    }

    pub fn derive(&self, p: &MultiIndex) -> Term {
        Term::from_pieces(
            self.pieces
                .iter()
                .map(|q| Piece {
                    mask: q.mask.clone(),
                    expr: q.expr.derive(p),
                })
                .collect(),
        )
    }

    /// `x ↦ w(x + c)`.
    pub fn translate(&self, c: &[Rational]) -> Term {
        let args: Vec<SmoothExpr> = c
            .iter()
            .enumerate()
            .map(|(a, d)| SmoothExpr::coord(a) + SmoothExpr::constant(*d))
            .collect();
        let neg: Vec<Rational> = c.iter().map(|d| -*d).collect();
        Term::from_pieces(
            self.pieces
                .iter()
                .map(|p| Piece {
                    mask: p.mask.as_ref().map(|m| m.translate(&neg)),
                    expr: p.expr.substitute(&args),
                })
                .collect(),
        )
    }

    /// The expression that agrees with the term near `x` (masks are open).
    pub fn local_expr(&self, x: &[f64]) -> SmoothExpr {
        SmoothExpr::sum(
            self.pieces
                .iter()
                .filter(|p| p.is_active(x))
                .map(|p| p.expr.clone())
                .collect(),
        )
        .simplified()
    }

    /// Germ at `x`: glue factors vanishing near `x` are dropped.
    pub fn germ_at(&self, x: &[f64]) -> SmoothExpr {
        germ_at(&self.local_expr(x), x)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut ev = Evaluator::new(x);
        self.pieces
            .iter()
            .filter(|p| p.is_active(x))
            .map(|p| ev.eval(&p.expr))
            .sum()
    }
}

/// Least `l` with `(l+1)·s` comfortably above `width` (so that glue factors
/// are pruned by the germ). `None` for `s == 0` or absurdly large indices.
pub fn plateau_index(s: f64, width: f64) -> Option<u64> {
    let s = libm::fabs(s);
    if s == 0.0 || !s.is_finite() {
        return None;
    }
    let mut l = libm::ceil(width / s);
    if (l + 1.0) * s <= width * (1.0 + 1e-6) {
        l = libm::ceil(2.0 * width / s);
    }
    (l <= MAX_WITNESS as f64).then_some(l as u64)
}

const MAX_LANDMARKS: usize = 256;
const ROOT_CELLS: usize = 2048;

/// Zeros of a one-variable expression on a one-dimensional domain, by sign
/// changes on a fine grid and bisection.
pub fn roots_1d(e: &SmoothExpr, domain: &OpenSet) -> Vec<Point> {
    if domain.dim() != 1 {
        return Vec::new();
    }
    let f = |t: f64| Evaluator::new(&[t]).eval(e);
    let mut out: Vec<Point> = Vec::new();
    let push = |t: f64, out: &mut Vec<Point>| {
        if domain.contains(&[t]) && !out.iter().any(|p| libm::fabs(p[0] - t) < 1e-12) {
            out.push(Point(vec![t]));
        }
    };
    for b in domain.boxes() {
        let (lo, hi) = b.sides[0].window();
        let h = (hi - lo) / ROOT_CELLS as f64;
        let mut prev = f(lo);
        for i in 1..=ROOT_CELLS {
            let t = lo + i as f64 * h;
            let cur = f(t);
            if cur == 0.0 {
                push(t, &mut out);
            } else if prev * cur < 0.0 {
                let (mut a, mut c, mut fa) = (t - h, t, prev);
                for _ in 0..200 {
                    let m = 0.5 * (a + c);
                    if m <= a || m >= c {
                        break;
                    }
                    let fm = f(m);
                    if fm == 0.0 {
                        a = m;
                        c = m;
                        break;
                    }
                    if fa * fm < 0.0 {
                        c = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                }
                let r = if libm::fabs(f(a)) <= libm::fabs(f(c)) { a } else { c };
                push(r, &mut out);
            }
            prev = cur;
        }
    }
    out
}

pub type TermFn = dyn Fn(&Index) -> Term + Send + Sync;
pub type StableFn = dyn Fn(&[f64]) -> Option<Index> + Send + Sync;

pub enum SeqKind {
    Zero,
    /// The constant family `u(ψ)`.
    Diagonal(SmoothExpr),
    /// `l ↦ 1 - η((l+1)σ)`.
    Plateau(SmoothExpr),
    /// `(l, k) ↦ 1 - η((k+1)σ_l)`; the last σ stands for all later `l`.
    BairePlateau(Vec<SmoothExpr>),
    /// `l ↦ (l+1)^a · f((l+1)x₀)` for a one-variable profile `f` that is
    /// constant outside `[-w, w]`.
    Scaled {
        profile: SmoothExpr,
        amplitude: u32,
        half_width: f64,
    },
    Add(FoamSequence, FoamSequence),
    Mul(FoamSequence, FoamSequence),
    Scale(Scalar, FoamSequence),
    Derive(MultiIndex, FoamSequence),
    /// `λ ↦ s(map(λ))`.
    Reindex(CofinalEmbedding, FoamSequence),
    /// Extension by zero outside the mask.
    Masked(OpenSet, FoamSequence),
    /// `λ ↦ β_{l_λ}·t′_λ` on the mask, zero outside, with
    /// `β_l = η((l+1)σ′)` and `l_λ` the least integer dominating λ.
    Flabby {
        sigma_prime: SmoothExpr,
        mask: OpenSet,
        inner: FoamSequence,
        emb: CofinalEmbedding,
    },
    /// `λ ↦ (x ↦ s_λ(x + c))`.
    Translate(Vec<Rational>, FoamSequence),
    Custom {
        name: String,
        term: Arc<TermFn>,
        stable: Option<Arc<StableFn>>,
    },
}

impl fmt::Debug for SeqKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqKind::Zero => f.write_str("Zero"),
            SeqKind::Diagonal(e) => f.debug_tuple("Diagonal").field(e).finish(),
            SeqKind::Plateau(e) => f.debug_tuple("Plateau").field(e).finish(),
            SeqKind::BairePlateau(v) => f.debug_tuple("BairePlateau").field(&v.len()).finish(),
            SeqKind::Scaled { amplitude, .. } => f.debug_struct("Scaled").field("amplitude", amplitude).finish(),
            SeqKind::Add(..) => f.write_str("Add"),
            SeqKind::Mul(..) => f.write_str("Mul"),
            SeqKind::Scale(c, _) => f.debug_tuple("Scale").field(c).finish(),
            SeqKind::Derive(p, _) => f.debug_tuple("Derive").field(p).finish(),
            SeqKind::Reindex(e, _) => f.debug_tuple("Reindex").field(e).finish(),
            SeqKind::Masked(..) => f.write_str("Masked"),
            SeqKind::Flabby { .. } => f.write_str("Flabby"),
            SeqKind::Translate(c, _) => f.debug_tuple("Translate").field(c).finish(),
            SeqKind::Custom { name, .. } => f.debug_tuple("Custom").field(name).finish(),
        }
    }
}

impl PartialEq for SeqKind {
    fn eq(&self, other: &Self) -> bool {
        use SeqKind::*;
        match (self, other) {
            (Zero, Zero) => true,
            (Diagonal(a), Diagonal(b)) | (Plateau(a), Plateau(b)) => a == b,
            (BairePlateau(a), BairePlateau(b)) => a == b,
            (
                Scaled {
                    profile: p1,
                    amplitude: a1,
                    half_width: w1,
                },
                Scaled {
                    profile: p2,
                    amplitude: a2,
                    half_width: w2,
                },
            ) => p1 == p2 && a1 == a2 && w1 == w2,
            (Add(a, b), Add(c, d)) | (Mul(a, b), Mul(c, d)) => a == c && b == d,
            (Scale(c, a), Scale(d, b)) => c == d && a == b,
            (Derive(p, a), Derive(q, b)) => p == q && a == b,
            (Reindex(e, a), Reindex(f, b)) => e == f && a == b,
            (Masked(m, a), Masked(n, b)) => m == n && a == b,
            (
                Flabby {
                    sigma_prime: s1,
                    mask: m1,
                    inner: i1,
                    emb: e1,
                },
                Flabby {
                    sigma_prime: s2,
                    mask: m2,
                    inner: i2,
                    emb: e2,
                },
            ) => s1 == s2 && m1 == m2 && i1 == i2 && e1 == e2,
            (Translate(c, a), Translate(d, b)) => c == d && a == b,
            (Custom { term: a, .. }, Custom { term: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// `w : Λ → C^∞(X)`, generated lazily from its construction.
#[derive(Clone, Debug, PartialEq)]
pub struct FoamSequence {
    order: IndexOrder,
    domain: OpenSet,
    kind: Arc<SeqKind>,
}

fn index_level(idx: &Index) -> u64 {
    match *idx {
        Index::Nat(l) => l,
        Index::Pair(l, k) => l.max(k),
    }
}

impl FoamSequence {
    fn make(order: IndexOrder, domain: OpenSet, kind: SeqKind) -> Self {
        FoamSequence {
            order,
            domain,
            kind: Arc::new(kind),
        }
    }

    fn check_dim(domain: &OpenSet, e: &SmoothExpr) -> Result<()> {
        let needed = e.min_dimension();
        if needed > domain.dim() {
            return Err(FoamError::DimensionMismatch {
                needed,
                got: domain.dim(),
            });
        }
        Ok(())
    }

    pub fn zero(order: IndexOrder, domain: OpenSet) -> Self {
        FoamSequence::make(order, domain, SeqKind::Zero)
    }

    pub fn diagonal(order: IndexOrder, domain: OpenSet, psi: SmoothExpr) -> Result<Self> {
        FoamSequence::check_dim(&domain, &psi)?;
        Ok(FoamSequence::make(order, domain, SeqKind::Diagonal(psi.simplified())))
    }

    /// Shrinking plateaus around the zero set of σ, over ℕ.
    pub fn plateau(domain: OpenSet, sigma: SmoothExpr) -> Result<Self> {
        FoamSequence::check_dim(&domain, &sigma)?;
        Ok(FoamSequence::make(IndexOrder::Nat, domain, SeqKind::Plateau(sigma)))
    }

    /// Plateaus around an increasing list of zero sets, over ℕ×ℕ.
    pub fn baire_plateau(domain: OpenSet, sigmas: Vec<SmoothExpr>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(FoamError::Invalid("empty list of singular sets".into()));
        }
        for s in &sigmas {
            FoamSequence::check_dim(&domain, s)?;
        }
        Ok(FoamSequence::make(IndexOrder::NatPair, domain, SeqKind::BairePlateau(sigmas)))
    }

    pub fn scaled(domain: OpenSet, profile: SmoothExpr, amplitude: u32, half_width: f64) -> Result<Self> {
        FoamSequence::check_dim(&domain, &profile)?;
        if profile.min_dimension() > 1 {
            return Err(FoamError::Invalid("profile must be a function of one variable".into()));
        }
        Ok(FoamSequence::make(
            IndexOrder::Nat,
            domain,
            SeqKind::Scaled {
                profile,
                amplitude,
                half_width,
            },
        ))
    }

    pub fn custom(
        order: IndexOrder,
        domain: OpenSet,
        name: impl Into<String>,
        term: impl Fn(&Index) -> Term + Send + Sync + 'static,
    ) -> Self {
        FoamSequence::make(
            order,
            domain,
            SeqKind::Custom {
                name: name.into(),
                term: Arc::new(term),
                stable: None,
            },
        )
    }

    pub fn with_stability(self, stable: impl Fn(&[f64]) -> Option<Index> + Send + Sync + 'static) -> Self {
        match &*self.kind {
            SeqKind::Custom { name, term, .. } => FoamSequence::make(
                self.order,
                self.domain.clone(),
                SeqKind::Custom {
                    name: name.clone(),
                    term: term.clone(),
                    stable: Some(Arc::new(stable)),
                },
            ),
            _ => self,
        }
    }

    pub fn order(&self) -> IndexOrder {
        self.order
    }

    pub fn domain(&self) -> &OpenSet {
        &self.domain
    }

    pub fn kind(&self) -> &SeqKind {
        &self.kind
    }

    fn compatible(&self, other: &FoamSequence) -> Result<()> {
        if self.order != other.order {
            return Err(FoamError::OrderMismatch);
        }
        if self.domain != other.domain {
            return Err(FoamError::Invalid("sequences live on different domains".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &FoamSequence) -> Result<Self> {
        self.compatible(other)?;
        Ok(FoamSequence::make(
            self.order,
            self.domain.clone(),
            SeqKind::Add(self.clone(), other.clone()),
        ))
    }

    pub fn sub(&self, other: &FoamSequence) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &FoamSequence) -> Result<Self> {
        self.compatible(other)?;
        Ok(FoamSequence::make(
            self.order,
            self.domain.clone(),
            SeqKind::Mul(self.clone(), other.clone()),
        ))
    }

    pub fn scale(&self, c: Scalar) -> Self {
        FoamSequence::make(self.order, self.domain.clone(), SeqKind::Scale(c, self.clone()))
    }

    pub fn neg(&self) -> Self {
        self.scale(Scalar::int(-1))
    }

    pub fn derive(&self, p: &MultiIndex) -> Result<Self> {
        if p.dim() != self.domain.dim() {
            return Err(FoamError::DimensionMismatch {
                needed: self.domain.dim(),
                got: p.dim(),
            });
        }
        if p.order() == 0 {
            return Ok(self.clone());
        }
        Ok(FoamSequence::make(
            self.order,
            self.domain.clone(),
            SeqKind::Derive(p.clone(), self.clone()),
        ))
    }

    /// Same terms on a smaller domain.
    pub fn restrict(&self, v: &OpenSet) -> Result<Self> {
        if v.dim() != self.domain.dim() || !v.is_subset_of(&self.domain) {
            return Err(FoamError::NotContained);
        }
        Ok(FoamSequence {
            order: self.order,
            domain: v.clone(),
            kind: self.kind.clone(),
        })
    }

    /// The sequence on a larger domain `v`, extended by zero.
    pub fn extend_by_zero(&self, v: &OpenSet) -> Result<Self> {
        if !self.domain.is_subset_of(v) {
            return Err(FoamError::NotContained);
        }
        Ok(FoamSequence::make(
            self.order,
            v.clone(),
            SeqKind::Masked(self.domain.clone(), self.clone()),
        ))
    }

    /// `β_{l_λ}·t′_λ` on `mask = self.domain`, zero elsewhere in `v`.
    pub fn flabby(&self, v: &OpenSet, sigma_prime: SmoothExpr, emb: CofinalEmbedding) -> Result<Self> {
        if !self.domain.is_subset_of(v) {
            return Err(FoamError::NotContained);
        }
        if emb.source() != IndexOrder::Nat || emb.target() != self.order {
            return Err(FoamError::MissingEmbedding);
        }
        Ok(FoamSequence::make(
            self.order,
            v.clone(),
            SeqKind::Flabby {
                sigma_prime,
                mask: self.domain.clone(),
                inner: self.clone(),
                emb,
            },
        ))
    }

    /// `x ↦ s(x + c)` on `domain`, which must map into the current domain.
    pub fn translate(&self, c: Vec<Rational>, domain: OpenSet) -> Result<Self> {
        if c.len() != self.domain.dim() || domain.dim() != c.len() {
            return Err(FoamError::DimensionMismatch {
                needed: self.domain.dim(),
                got: c.len(),
            });
        }
        if !domain.translate(&c).is_subset_of(&self.domain) {
            return Err(FoamError::NotContained);
        }
        Ok(FoamSequence::make(self.order, domain, SeqKind::Translate(c, self.clone())))
    }

    /// ρ: restriction along a cofinal embedding, `λ ↦ s(map(λ))`.
    pub fn rho_restrict(&self, emb: &CofinalEmbedding) -> Result<Self> {
        if emb.target() != self.order {
            return Err(FoamError::OrderMismatch);
        }
        Ok(FoamSequence::make(
            emb.source(),
            self.domain.clone(),
            SeqKind::Reindex(*emb, self.clone()),
        ))
    }

    /// The term `w_λ`.
    pub fn term(&self, idx: &Index) -> Term {
        match &*self.kind {
            SeqKind::Zero => Term::zero(),
            SeqKind::Diagonal(psi) => Term::smooth(psi.clone()),
            SeqKind::Plateau(sigma) => Term::smooth(shrinking_plateau(sigma, index_level(idx))),
            SeqKind::BairePlateau(sigmas) => {
                let (l, k) = match *idx {
                    Index::Pair(l, k) => (l, k),
                    Index::Nat(l) => (l, l),
                };
                let s = &sigmas[(l as usize).min(sigmas.len() - 1)];
                Term::smooth(shrinking_plateau(s, k))
            }
            SeqKind::Scaled {
                profile, amplitude, ..
            } => {
                let n = index_level(idx) as i64 + 1;
                let arg = SmoothExpr::int(n) * SmoothExpr::coord(0);
                let amp = SmoothExpr::constant(Scalar::int(n).powi(*amplitude as i32).unwrap_or(Scalar::one()));
                Term::smooth(amp * profile.substitute(&[arg]))
            }
            SeqKind::Add(a, b) => a.term(idx).add(&b.term(idx)),
            SeqKind::Mul(a, b) => a.term(idx).mul(&b.term(idx)),
            SeqKind::Scale(c, a) => a.term(idx).scale(*c),
            SeqKind::Derive(p, a) => a.term(idx).derive(p),
            SeqKind::Reindex(emb, a) => a.term(&emb.map(idx)),
            SeqKind::Masked(mask, a) => {
                let t = a.term(idx);
                Term::from_pieces(
                    t.pieces
                        .into_iter()
                        .filter_map(|p| {
                            mask_product(&Some(mask.clone()), &p.mask).map(|m| Piece { mask: m, expr: p.expr })
                        })
                        .collect(),
                )
            }
            SeqKind::Flabby {
                sigma_prime,
                mask,
                inner,
                emb,
            } => {
                let l = emb.dominating_nat(idx).unwrap_or(0);
                let beta = SmoothExpr::one() - shrinking_plateau(sigma_prime, l);
                Term::masked(mask.clone(), beta).mul(&inner.term(idx))
            }
            SeqKind::Translate(c, a) => a.term(idx).translate(c),
            SeqKind::Custom { term, .. } => term(idx),
        }
    }

    /// An index from which the germ of the term at `x` is the same for all
    /// larger indices; `None` when no such index is known.
    pub fn stable_from(&self, x: &[f64]) -> Option<Index> {
        let least = self.order.least();
        match &*self.kind {
            SeqKind::Zero | SeqKind::Diagonal(_) => Some(least),
            SeqKind::Plateau(sigma) => {
                let s = Evaluator::new(x).eval(sigma);
                if s == 0.0 {
                    Some(least)
                } else {
                    plateau_index(s, 1.0).map(Index::Nat)
                }
            }
            SeqKind::BairePlateau(sigmas) => {
                let mut ev = Evaluator::new(x);
                let mut k = 0;
                for s in sigmas {
                    let v = ev.eval(s);
                    if v != 0.0 {
                        k = k.max(plateau_index(v, 1.0)?);
                    }
                }
                Some(Index::Pair(0, k))
            }
            SeqKind::Scaled {
                amplitude,
                half_width,
                ..
            } => {
                if x[0] == 0.0 {
                    (*amplitude == 0).then_some(least)
                } else {
                    plateau_index(x[0], *half_width).map(Index::Nat)
                }
            }
            SeqKind::Add(a, b) | SeqKind::Mul(a, b) => {
                Some(self.order.join(&a.stable_from(x)?, &b.stable_from(x)?))
            }
            SeqKind::Scale(c, a) => {
                if c.is_zero() {
                    Some(least)
                } else {
                    a.stable_from(x)
                }
            }
            SeqKind::Derive(_, a) => a.stable_from(x),
            SeqKind::Reindex(emb, a) => a.stable_from(x).map(|i| emb.dominate(&i)),
            SeqKind::Masked(mask, a) => {
                if mask.contains(x) {
                    a.stable_from(x)
                } else {
                    Some(least)
                }
            }
            SeqKind::Flabby {
                sigma_prime,
                mask,
                inner,
                emb,
            } => {
                if !mask.contains(x) {
                    return Some(least);
                }
                let s = Evaluator::new(x).eval(sigma_prime);
                let l = plateau_index(s, 1.0)?;
                Some(self.order.join(&emb.map(&Index::Nat(l)), &inner.stable_from(x)?))
            }
            SeqKind::Translate(c, a) => {
                let shifted: Vec<f64> = x
                    .iter()
                    .zip(c)
                    .map(|(v, d)| v + crate::scalar::rat_to_f64(*d))
                    .collect();
                a.stable_from(&shifted)
            }
            SeqKind::Custom { stable, .. } => stable.as_ref().and_then(|f| f(x)),
        }
    }

    /// Points where the construction concentrates (zero sets of the
    /// σ's in one dimension, the kernel centre), worth sampling.
    pub fn landmarks(&self) -> Vec<Point> {
        let mut out = Vec::new();
        self.collect_landmarks(&mut out);
        out.truncate(MAX_LANDMARKS);
        out
    }

    fn collect_landmarks(&self, out: &mut Vec<Point>) {
        match &*self.kind {
            SeqKind::Zero | SeqKind::Diagonal(_) | SeqKind::Custom { .. } => {}
            SeqKind::Plateau(sigma) => out.extend(roots_1d(sigma, &self.domain)),
            SeqKind::BairePlateau(sigmas) => {
                for s in sigmas {
                    out.extend(roots_1d(s, &self.domain));
                }
            }
            SeqKind::Scaled { .. } => out.push(Point(vec![0.0; self.domain.dim()])),
            SeqKind::Add(a, b) | SeqKind::Mul(a, b) => {
                a.collect_landmarks(out);
                b.collect_landmarks(out);
            }
            SeqKind::Scale(_, a) | SeqKind::Derive(_, a) | SeqKind::Reindex(_, a) | SeqKind::Masked(_, a) => {
                a.collect_landmarks(out)
            }
            SeqKind::Flabby {
                sigma_prime, inner, ..
            } => {
                inner.collect_landmarks(out);
                out.extend(roots_1d(sigma_prime, &self.domain));
            }
            SeqKind::Translate(c, a) => {
                let mut inner = Vec::new();
                a.collect_landmarks(&mut inner);
                out.extend(inner.into_iter().map(|p| {
                    Point(p.iter().zip(c).map(|(v, d)| v - crate::scalar::rat_to_f64(*d)).collect())
                }));
            }
        }
    }

    /// Short description of the construction.
    pub fn describe(&self) -> String {
        alloc::format!("{:?}", self.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplify::is_structural_zero;

    fn x() -> SmoothExpr {
        SmoothExpr::coord(0)
    }

    fn unit() -> OpenSet {
        OpenSet::interval_i(-1, 1).unwrap()
    }

    #[test]
    fn plateau_terms_and_witness() {
        let a = FoamSequence::plateau(unit(), x()).unwrap();
        for l in 0..6 {
            assert_eq!(a.term(&Index::Nat(l)).eval(&[0.0]), 1.0);
        }
        assert_eq!(a.stable_from(&[0.5]), Some(Index::Nat(2)));
        assert_eq!(a.stable_from(&[0.0]), Some(Index::Nat(0)));
        for l in 2..10 {
            assert!(is_structural_zero(&a.term(&Index::Nat(l)).germ_at(&[0.5])));
        }
    }

    #[test]
    fn plateau_index_margin() {
        assert_eq!(plateau_index(0.5, 1.0), Some(2));
        assert_eq!(plateau_index(0.25, 1.0), Some(4));
        assert_eq!(plateau_index(0.0, 1.0), None);
        let l = plateau_index(1e-12, 1.0).unwrap() as f64;
        assert!((l + 1.0) * 1e-12 >= 1.5);
    }

    #[test]
    fn masked_products() {
        let v = OpenSet::interval_i(-1, 2).unwrap();
        let inner = FoamSequence::diagonal(IndexOrder::Nat, OpenSet::interval_i(0, 1).unwrap(), x()).unwrap();
        let ext = inner.extend_by_zero(&v).unwrap();
        let t = ext.term(&Index::Nat(0));
        assert_eq!(t.eval(&[0.5]), 0.5);
        assert_eq!(t.eval(&[1.5]), 0.0);
        let sq = ext.mul(&ext).unwrap().term(&Index::Nat(3));
        assert_eq!(sq.pieces().len(), 1);
        assert!(sq.germ_at(&[-0.5]).is_const_zero());
    }

    #[test]
    fn rho_is_pointwise() {
        let d = OpenSet::interval_i(0, 1).unwrap();
        let s = FoamSequence::baire_plateau(d.clone(), vec![x(), x() * (x() - SmoothExpr::one())]).unwrap();
        let r = s.rho_restrict(&CofinalEmbedding::diagonal()).unwrap();
        assert_eq!(r.order(), IndexOrder::Nat);
        assert_eq!(r.term(&Index::Nat(3)), s.term(&Index::Pair(3, 3)));
        let t = FoamSequence::diagonal(IndexOrder::NatPair, d, x().sin()).unwrap();
        let sum = s.add(&t).unwrap().rho_restrict(&CofinalEmbedding::diagonal()).unwrap();
        let sum2 = r.add(&t.rho_restrict(&CofinalEmbedding::diagonal()).unwrap()).unwrap();
        for l in 0..4 {
            assert_eq!(sum.term(&Index::Nat(l)), sum2.term(&Index::Nat(l)));
        }
    }

    #[test]
    fn translation_moves_masks() {
        let inner = FoamSequence::diagonal(IndexOrder::Nat, OpenSet::interval_i(0, 1).unwrap(), x())
            .unwrap()
            .extend_by_zero(&OpenSet::interval_i(-5, 5).unwrap())
            .unwrap();
        let moved = inner
            .translate(vec![Rational::from_integer(4)], OpenSet::interval_i(-9, 1).unwrap())
            .unwrap();
        let t = moved.term(&Index::Nat(0));
        assert!((t.eval(&[-3.5]) - 0.5).abs() < 1e-15);
        assert_eq!(t.eval(&[0.5]), 0.0);
    }

    #[test]
    fn mismatched_orders_are_rejected() {
        let a = FoamSequence::zero(IndexOrder::Nat, unit());
        let b = FoamSequence::zero(IndexOrder::NatPair, unit());
        assert_eq!(a.add(&b), Err(FoamError::OrderMismatch));
        assert_eq!(b.rho_restrict(&CofinalEmbedding::Identity(IndexOrder::Nat)), Err(FoamError::OrderMismatch));
    }
}
