//! Restriction, gluing, separation, partitions of unity and flabby
//! extension for the presheaf `V ↦ B_{L,S|_V}(V)`.

use alloc::vec::Vec;

use crate::algebra::{eq_mod_ideal, GenFunction};
use crate::bump::PartitionOfUnity;
use crate::domain::{OpenSet, Point};
use crate::error::{FoamError, Result};
use crate::expr::{Evaluator, SmoothExpr};
use crate::membership::{check_membership, IdealDescriptor, IdealMode, Membership, MembershipConfig};
use crate::orders::CofinalEmbedding;
use crate::scalar::{rat_to_f64, Scalar};
use crate::sequence::FoamSequence;
use crate::singular::{
    join_closed, locally_finitely_additive, FamilyLabel, LfaStatus, SigmaSequence, SingularSet,
};

/// `T|_V`.
pub fn restrict(t: &GenFunction, v: &OpenSet) -> Result<GenFunction> {
    t.restrict(v)
}

/// Sections `T_i` on the members `V_i` of a cover of `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionAssignment {
    /// The ideal on `V`; piece ideals are its restrictions.
    pub ideal: IdealDescriptor,
    pub cover: Vec<OpenSet>,
    pub pieces: Vec<GenFunction>,
}

impl SectionAssignment {
    pub fn new(ideal: IdealDescriptor, cover: Vec<OpenSet>, pieces: Vec<GenFunction>) -> Result<Self> {
        if cover.is_empty() {
            return Err(FoamError::EmptyCover);
        }
        if cover.len() != pieces.len() {
            return Err(FoamError::PartitionMismatch);
        }
        for (v, t) in cover.iter().zip(&pieces) {
            if t.ideal() != &ideal.restrict(v)? {
                return Err(FoamError::IdealMismatch);
            }
        }
        Ok(SectionAssignment { ideal, cover, pieces })
    }

    /// Restrictions of one global section.
    pub fn from_global(t: &GenFunction, cover: Vec<OpenSet>) -> Result<Self> {
        let pieces = cover.iter().map(|v| t.restrict(v)).collect::<Result<Vec<_>>>()?;
        SectionAssignment::new(t.ideal().clone(), cover, pieces)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlueOutcome {
    pub section: GenFunction,
    /// `((i, j), T_i = T_j on V_i ∩ V_j)` for meeting pairs.
    pub overlaps: Vec<((usize, usize), Membership)>,
    /// `T|_{V_i} = T_i`.
    pub restrictions: Vec<Membership>,
}

impl GlueOutcome {
    pub fn all_verified(&self) -> bool {
        self.overlaps.iter().all(|(_, m)| m.is_verified()) && self.restrictions.iter().all(Membership::is_verified)
    }
}

/// `t = Σ_l α_l·t_{i(l)}`, each product extended by zero off `V_{i(l)}`.
pub fn assemble(pieces: &[FoamSequence], pou: &PartitionOfUnity) -> Result<FoamSequence> {
    let v = &pou.domain;
    let order = pieces.first().ok_or(FoamError::EmptyCover)?.order();
    let mut total = FoamSequence::zero(order, v.clone());
    for (alpha, i) in &pou.functions {
        let piece = pieces.get(*i).ok_or(FoamError::PartitionMismatch)?;
        let a = FoamSequence::diagonal(order, v.clone(), alpha.clone())?;
        total = total.add(&a.mul(&piece.extend_by_zero(v)?)?)?;
    }
    Ok(total)
}

fn overlap_refutation_point(m: &Membership) -> Point {
    m.refutation().map(|r| r.point.clone()).unwrap_or_else(|| Point(Vec::new()))
}

/// The section on `V` restricting to each `T_i`.
pub fn glue(sections: &SectionAssignment, pou: &PartitionOfUnity, cfg: &MembershipConfig) -> Result<GlueOutcome> {
    if pou.cover != sections.cover || pou.domain != sections.ideal.domain {
        return Err(FoamError::PartitionMismatch);
    }
    let n = sections.cover.len();
    let mut overlaps = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let Some(w) = sections.cover[i].intersect(&sections.cover[j]) else {
                continue;
            };
            let m = eq_mod_ideal(&sections.pieces[i].restrict(&w)?, &sections.pieces[j].restrict(&w)?, cfg)?;
            if !m.is_verified() {
                return Err(FoamError::IncompatibleOverlap {
                    left: i,
                    right: j,
                    point: overlap_refutation_point(&m),
                });
            }
            overlaps.push(((i, j), m));
        }
    }
    let reps: Vec<FoamSequence> = sections.pieces.iter().map(|t| t.representative().clone()).collect();
    let section = GenFunction::new(assemble(&reps, pou)?, sections.ideal.clone())?;
    let restrictions = sections
        .cover
        .iter()
        .zip(&sections.pieces)
        .map(|(v, t)| eq_mod_ideal(&section.restrict(v)?, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(GlueOutcome {
        section,
        overlaps,
        restrictions,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparatedOutcome {
    /// `T|_{V_i} = T′|_{V_i}` per cover member.
    pub pieces: Vec<Membership>,
    /// Membership of the assembled difference `w = Σ α_l w_{i(l)}` over the
    /// union of the piece singular sets.
    pub assembled: Option<Membership>,
    pub sigma: Option<SingularSet>,
}

impl SeparatedOutcome {
    pub fn is_verified(&self) -> bool {
        self.pieces.iter().all(Membership::is_verified) && self.assembled.as_ref().is_some_and(Membership::is_verified)
    }

    pub fn is_refuted(&self) -> bool {
        self.pieces.iter().any(Membership::is_refuted) || self.assembled.as_ref().is_some_and(Membership::is_refuted)
    }
}

/// Local equality on a cover implies equality.
pub fn separated_check(
    t: &GenFunction,
    t2: &GenFunction,
    pou: &PartitionOfUnity,
    cfg: &MembershipConfig,
) -> Result<SeparatedOutcome> {
    if t.ideal() != t2.ideal() {
        return Err(FoamError::IdealMismatch);
    }
    let v = t.ideal().domain.clone();
    if pou.domain != v {
        return Err(FoamError::PartitionMismatch);
    }
    let mut pieces = Vec::with_capacity(pou.cover.len());
    let mut diffs = Vec::with_capacity(pou.cover.len());
    for w in &pou.cover {
        let a = t.restrict(w)?;
        let b = t2.restrict(w)?;
        pieces.push(eq_mod_ideal(&a, &b, cfg)?);
        diffs.push(a.sub(&b)?.representative().clone());
    }
    if !pieces.iter().all(Membership::is_verified) {
        return Ok(SeparatedOutcome {
            pieces,
            assembled: None,
            sigma: None,
        });
    }
    let sigma = assembled_sigma(t.ideal(), &pieces, &v)?;
    let w = assemble(&diffs, pou)?;
    let assembled = check_membership(&w, &IdealDescriptor::single(t.ideal().order, sigma.clone())?, cfg)?;
    Ok(SeparatedOutcome {
        pieces,
        assembled: Some(assembled),
        sigma: Some(sigma),
    })
}

/// `Σ = ∪ Σ_l` from the piece certificates, via the locally finitely
/// additive union.
fn assembled_sigma(ideal: &IdealDescriptor, pieces: &[Membership], v: &OpenSet) -> Result<SingularSet> {
    let parts: Vec<SingularSet> = pieces
        .iter()
        .filter_map(|m| m.certificate().map(|c| c.sigma.restrict(v)))
        .collect();
    match &ideal.mode {
        IdealMode::Single(s) => Ok(s.clone()),
        IdealMode::Family(f) => {
            let seq = SigmaSequence {
                prefix: parts,
                accumulation_points: Vec::new(),
            };
            let rep = locally_finitely_additive(f, &seq, v, 8)?;
            match (rep.status, rep.union) {
                (LfaStatus::Pass, Some(u)) => Ok(u),
                _ => Err(FoamError::JoinNotRepresentable("piece singular sets".into())),
            }
        }
    }
}

/// `Σ_l u(α_l) = u(1)` in the quotient.
pub fn unit_partition_identity(pou: &PartitionOfUnity, ideal: &IdealDescriptor, cfg: &MembershipConfig) -> Result<Membership> {
    if ideal.domain != pou.domain {
        return Err(FoamError::PartitionMismatch);
    }
    let sum = pou.sum();
    let w = FoamSequence::diagonal(ideal.order, pou.domain.clone(), sum - SmoothExpr::one())?;
    check_membership(&w, ideal, cfg)
}

/// `σ′` on `V` vanishing on the boundary of `V′` in `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFunction {
    pub sigma_prime: SmoothExpr,
    pub target: OpenSet,
    pub domain: OpenSet,
}

/// Samples per face axis for boundary checks.
const FACE_SAMPLES: usize = 9;

fn face_points(target: &OpenSet, domain: &OpenSet) -> Vec<Point> {
    let mut out = Vec::new();
    for b in target.boxes() {
        let windows: Vec<(f64, f64)> = b.sides.iter().map(|s| s.window()).collect();
        for (axis, side) in b.sides.iter().enumerate() {
            for bound in [side.lo.as_finite(), side.hi.as_finite()].into_iter().flatten() {
                let c = rat_to_f64(bound);
                let others = windows.len() - 1;
                let total = FACE_SAMPLES.pow(others as u32);
                for flat in 0..total {
                    let mut rem = flat;
                    let mut p = Vec::with_capacity(windows.len());
                    for (k, &(lo, hi)) in windows.iter().enumerate() {
                        if k == axis {
                            p.push(c);
                        } else {
                            let i = rem % FACE_SAMPLES;
                            rem /= FACE_SAMPLES;
                            p.push(lo + (hi - lo) * (i as f64 + 0.5) / FACE_SAMPLES as f64);
                        }
                    }
                    let p = Point(p);
                    if domain.contains(&p) && !target.contains(&p) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

impl BoundaryFunction {
    /// Vanishing on sampled boundary points and nonvanishing on an interior
    /// grid of `V′`.
    pub fn check(&self, res: usize) -> bool {
        let on_boundary = face_points(&self.target, &self.domain)
            .iter()
            .all(|p| libm::fabs(Evaluator::new(p).eval(&self.sigma_prime)) <= crate::NUMERIC_ZERO);
        let inside = self
            .target
            .sample_points(res)
            .iter()
            .all(|p| Evaluator::new(p).eval(&self.sigma_prime) != 0.0);
        on_boundary && inside
    }

    /// The closed nowhere dense set `Γ = {σ′ = 0}` in `V`.
    pub fn zero_set(&self) -> SingularSet {
        SingularSet::zero_set(self.domain.clone(), self.sigma_prime.clone(), true)
    }
}

/// Product of the face polynomials `(x_a - lo)`, `(hi - x_a)` of `V′` over
/// faces meeting `V` outside `V′`.
pub fn boundary_function(target: &OpenSet, domain: &OpenSet) -> Result<BoundaryFunction> {
    if target.dim() != domain.dim() || !target.is_subset_of(domain) {
        return Err(FoamError::NotContained);
    }
    let mut faces: Vec<(usize, crate::Rational, bool)> = Vec::new();
    for b in target.boxes() {
        for (axis, side) in b.sides.iter().enumerate() {
            for (bound, lower) in [(side.lo.as_finite(), true), (side.hi.as_finite(), false)] {
                let Some(c) = bound else { continue };
                let probe = face_points(
                    &OpenSet::from_box(b.clone())?,
                    domain,
                )
                .into_iter()
                .any(|p| p[axis] == rat_to_f64(c) && !target.contains(&p));
                if probe && !faces.iter().any(|&(a, v, _)| a == axis && v == c) {
                    faces.push((axis, c, lower));
                }
            }
        }
    }
    let factors: Vec<SmoothExpr> = faces
        .iter()
        .map(|&(axis, c, lower)| {
            let x = SmoothExpr::coord(axis);
            let c = SmoothExpr::constant(Scalar::Rat(c));
            if lower {
                x - c
            } else {
                c - x
            }
        })
        .collect();
    Ok(BoundaryFunction {
        sigma_prime: SmoothExpr::product(factors).simplified(),
        target: target.clone(),
        domain: domain.clone(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlabbyExtension {
    pub section: GenFunction,
    pub boundary: BoundaryFunction,
    /// `t′ - t|_{V′} ∈ J_{L,∅}(V′)`.
    pub restriction: Membership,
}

/// The ideal on `V` for the extension: Σ enlarged by `Γ = {σ′ = 0}`.
fn extended_ideal(ideal_v: &IdealDescriptor, gamma: &SingularSet) -> Result<IdealDescriptor> {
    match &ideal_v.mode {
        IdealMode::Single(s) => {
            let joined = match join_closed(s, gamma) {
                Ok(j) => j,
                Err(_) => {
                    let list = s.as_increasing_list();
                    let parts = list.iter().map(|p| join_closed(p, gamma)).collect::<Result<Vec<_>>>()?;
                    SingularSet::countable_union(ideal_v.domain.clone(), parts)?.0
                }
            };
            IdealDescriptor::single(ideal_v.order, joined)
        }
        IdealMode::Family(f) => {
            if f.label() == FamilyLabel::Custom && !f.admits(gamma) {
                return Err(FoamError::JoinNotRepresentable("boundary set in a custom family".into()));
            }
            Ok(ideal_v.clone())
        }
    }
}

/// Extends `T′` on `V′` to `V` by `t_λ = β_{l_λ}·t′_λ`.
pub fn flabby_extend(
    t_prime: &GenFunction,
    ideal_v: &IdealDescriptor,
    emb: Option<CofinalEmbedding>,
    cfg: &MembershipConfig,
) -> Result<FlabbyExtension> {
    let emb = emb.ok_or(FoamError::MissingEmbedding)?;
    let v_prime = t_prime.ideal().domain.clone();
    let v = ideal_v.domain.clone();
    if &ideal_v.restrict(&v_prime)? != t_prime.ideal() {
        return Err(FoamError::IdealMismatch);
    }
    let boundary = boundary_function(&v_prime, &v)?;
    let ideal = extended_ideal(ideal_v, &boundary.zero_set())?;
    let rep = t_prime
        .representative()
        .flabby(&v, boundary.sigma_prime.clone(), emb)?;
    let section = GenFunction::new(rep, ideal)?;
    let diff = t_prime.representative().sub(&section.representative().restrict(&v_prime)?)?;
    let restriction = check_membership(&diff, &IdealDescriptor::regular(t_prime.ideal().order, v_prime), cfg)?;
    Ok(FlabbyExtension {
        section,
        boundary,
        restriction,
    })
}

/// Extensions of two representatives of one class on `V′` agree on `V`.
pub fn representative_independence(
    t_prime: &GenFunction,
    t_star: &GenFunction,
    ideal_v: &IdealDescriptor,
    emb: Option<CofinalEmbedding>,
    cfg: &MembershipConfig,
) -> Result<Membership> {
    if t_prime.ideal() != t_star.ideal() {
        return Err(FoamError::IdealMismatch);
    }
    let a = flabby_extend(t_prime, ideal_v, emb, cfg)?;
    let b = flabby_extend(t_star, ideal_v, emb, cfg)?;
    eq_mod_ideal(&a.section, &b.section, cfg)
}

/// Convenience: the restriction of `T` to each member of a cover.
pub fn restrict_all(t: &GenFunction, cover: &[OpenSet]) -> Result<Vec<GenFunction>> {
    cover.iter().map(|v| t.restrict(v)).collect()
}
