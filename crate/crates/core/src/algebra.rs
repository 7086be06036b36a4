//! Quotient algebras `B_{L,Σ}(X)` and `B_{L,S}(X)`: classes of families
//! modulo the vanishing ideals, with the canonical constructions of
//! nontrivial ideal members.

use alloc::vec::Vec;

use crate::domain::{MultiIndex, OpenSet};
use crate::error::{FoamError, Result};
use crate::expr::SmoothExpr;
use crate::membership::{check_membership, IdealDescriptor, IdealMode, Membership, MembershipConfig};
use crate::orders::{CofinalEmbedding, IndexOrder};
use crate::scalar::Scalar;
use crate::sequence::FoamSequence;
use crate::simplify::is_structural_zero;
use crate::singular::{complement_dense, SingularKind, SingularSet, SingularityFamily};

/// Grid used to confirm that a zero set leaves a dense complement.
const DENSITY_GRID: usize = 32;

/// `u(ψ)`, the constant family at a smooth function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalElement {
    pub psi: SmoothExpr,
}

impl DiagonalElement {
    pub fn new(psi: SmoothExpr) -> Self {
        DiagonalElement { psi }
    }

    pub fn sequence(&self, order: IndexOrder, domain: OpenSet) -> Result<FoamSequence> {
        FoamSequence::diagonal(order, domain, self.psi.clone())
    }
}

/// A class `t + J` carried by its representative.
#[derive(Clone, Debug, PartialEq)]
pub struct GenFunction {
    representative: FoamSequence,
    ideal: IdealDescriptor,
}

impl GenFunction {
    pub fn new(representative: FoamSequence, ideal: IdealDescriptor) -> Result<Self> {
        if representative.order() != ideal.order {
            return Err(FoamError::OrderMismatch);
        }
        if representative.domain() != &ideal.domain {
            return Err(FoamError::Invalid("representative and ideal live on different domains".into()));
        }
        Ok(GenFunction { representative, ideal })
    }

    pub fn representative(&self) -> &FoamSequence {
        &self.representative
    }

    pub fn ideal(&self) -> &IdealDescriptor {
        &self.ideal
    }

    fn same_ideal(&self, other: &GenFunction) -> Result<()> {
        if self.ideal != other.ideal {
            return Err(FoamError::IdealMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &GenFunction) -> Result<Self> {
        self.same_ideal(other)?;
        GenFunction::new(self.representative.add(&other.representative)?, self.ideal.clone())
    }

    pub fn sub(&self, other: &GenFunction) -> Result<Self> {
        self.same_ideal(other)?;
        GenFunction::new(self.representative.sub(&other.representative)?, self.ideal.clone())
    }

    pub fn mul(&self, other: &GenFunction) -> Result<Self> {
        self.same_ideal(other)?;
        GenFunction::new(self.representative.mul(&other.representative)?, self.ideal.clone())
    }

    pub fn scalar_mul(&self, c: Scalar) -> Self {
        GenFunction {
            representative: self.representative.scale(c),
            ideal: self.ideal.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scalar_mul(Scalar::int(-1))
    }

    /// Termwise partial derivative `D^p`.
    pub fn dp(&self, p: &MultiIndex) -> Result<Self> {
        GenFunction::new(self.representative.derive(p)?, self.ideal.clone())
    }

    /// The class of `ρ t` over the source order of `emb`.
    pub fn rho_restrict(&self, emb: &CofinalEmbedding) -> Result<Self> {
        let ideal = IdealDescriptor {
            order: emb.source(),
            ..self.ideal.clone()
        };
        GenFunction::new(self.representative.rho_restrict(emb)?, ideal)
    }

    /// The class of `t|_V` in the algebra on `V`.
    pub fn restrict(&self, v: &OpenSet) -> Result<Self> {
        GenFunction::new(self.representative.restrict(v)?, self.ideal.restrict(v)?)
    }

    /// Membership of the representative in the ideal.
    pub fn is_zero(&self, cfg: &MembershipConfig) -> Result<Membership> {
        check_membership(&self.representative, &self.ideal, cfg)
    }
}

pub fn embed_smooth(psi: SmoothExpr, d: &IdealDescriptor) -> Result<GenFunction> {
    GenFunction::new(FoamSequence::diagonal(d.order, d.domain.clone(), psi)?, d.clone())
}

/// Equality in the quotient: membership of the difference.
pub fn eq_mod_ideal(a: &GenFunction, b: &GenFunction, cfg: &MembershipConfig) -> Result<Membership> {
    a.sub(b)?.is_zero(cfg)
}

/// `α_l = 1 - η((l+1)σ)`: in `J_{ℕ,Σ}` for `Σ = {σ = 0}` and equal to one
/// on Σ.
pub fn nontrivial_nd(sigma: &SmoothExpr, x: &OpenSet) -> Result<FoamSequence> {
    let sigma = sigma.simplified();
    if is_structural_zero(&sigma) {
        return Err(FoamError::TrivialSingularSet);
    }
    let set = SingularSet::zero_set(x.clone(), sigma.clone(), false);
    if !complement_dense(&set, DENSITY_GRID)?.dense {
        return Err(FoamError::TrivialSingularSet);
    }
    FoamSequence::plateau(x.clone(), sigma)
}

/// The ℕ×ℕ-indexed member built from an increasing union `Σ = ∪ Σ_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaireConstruction {
    pub sequence: FoamSequence,
    /// Σ as an increasing countable union.
    pub sigma: SingularSet,
    /// The defining function of each `Σ_l`.
    pub sigmas: Vec<SmoothExpr>,
    /// The input was not increasing and prefix unions were taken.
    pub repaired: bool,
}

/// `α_{l,k} = 1 - η((k+1)σ_l)`.
pub fn nontrivial_baire(parts: Vec<SingularSet>, x: &OpenSet) -> Result<BaireConstruction> {
    let (sigma, repaired) = SingularSet::countable_union(x.clone(), parts)?;
    let SingularKind::CountableUnion(list) = sigma.kind() else {
        return Err(FoamError::EmptySet);
    };
    let sigmas: Vec<SmoothExpr> = list
        .iter()
        .map(|s| s.defining_function().ok_or(FoamError::JoinNotRepresentable("non-closed part".into())))
        .collect::<Result<_>>()?;
    if sigmas.iter().any(is_structural_zero) || !complement_dense(&sigma, DENSITY_GRID)?.dense {
        return Err(FoamError::TrivialSingularSet);
    }
    Ok(BaireConstruction {
        sequence: FoamSequence::baire_plateau(x.clone(), sigmas.clone())?,
        sigma,
        sigmas,
        repaired,
    })
}

/// `B_{L,Σ}(X) → B_{L,S}(X)`, same representative.
pub fn foam_to_multifoam(t: &GenFunction, family: &SingularityFamily, max_joins: usize) -> Result<GenFunction> {
    let IdealMode::Single(sigma) = &t.ideal.mode else {
        return Err(FoamError::Invalid("source class is already over a family".into()));
    };
    if family.domain() != &t.ideal.domain {
        return Err(FoamError::Invalid("family lives on a different domain".into()));
    }
    if family.dominating(sigma, max_joins).is_none() {
        return Err(FoamError::NotDominated);
    }
    GenFunction::new(
        t.representative.clone(),
        IdealDescriptor::family(t.ideal.order, family.clone()),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct OffDiagonalEntry {
    pub psi: SmoothExpr,
    pub outcome: Membership,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OffDiagonalReport {
    pub entries: Vec<OffDiagonalEntry>,
}

impl OffDiagonalReport {
    /// Every nonzero diagonal element was refuted as an ideal member.
    pub fn all_refuted(&self) -> bool {
        self.entries.iter().all(|e| e.outcome.is_refuted())
    }
}

/// `J ∩ u(C^∞) = {0}` at test scale: every `u(ψ)` must be refuted.
pub fn off_diagonality_suite(
    d: &IdealDescriptor,
    psis: &[SmoothExpr],
    cfg: &MembershipConfig,
) -> Result<OffDiagonalReport> {
    let mut entries = Vec::with_capacity(psis.len());
    for psi in psis {
        if is_structural_zero(psi) {
            return Err(FoamError::Invalid("off-diagonality needs nonzero functions".into()));
        }
        let u = embed_smooth(psi.clone(), d)?;
        entries.push(OffDiagonalEntry {
            psi: psi.clone(),
            outcome: u.is_zero(cfg)?,
        });
    }
    Ok(OffDiagonalReport { entries })
}
