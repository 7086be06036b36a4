//! Certificates for membership in the vanishing ideals `J_{L,Σ}` and
//! `J_{L,S}`.
//!
//! A family `w` is in `J_{L,Σ}(X)` when at every `x ∈ X∖Σ` there is an index
//! beyond which every term vanishes near `x` together with all partial
//! derivatives. The check samples points off Σ, takes a witness index per
//! point, and verifies a finite set of larger indices and derivative orders.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::domain::{MultiIndex, OpenSet, Point};
use crate::error::{FoamError, Result};
use crate::expr::{Evaluator, SmoothExpr};
use crate::orders::{Index, IndexOrder};
use crate::sequence::FoamSequence;
use crate::simplify::is_structural_zero;
use crate::singular::{complement_dense, restrict_family, SingularSet, SingularityFamily, POINT_TOL};
use crate::{NUMERIC_ZERO, REFUTE_THRESHOLD};

/// Resolution of the density check on ideal construction.
const DENSITY_RES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum IdealMode {
    Single(SingularSet),
    Family(SingularityFamily),
}

/// Which ideal: `J_{L,Σ}(X)` or `J_{L,S}(X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealDescriptor {
    pub mode: IdealMode,
    pub order: IndexOrder,
    pub domain: OpenSet,
}

impl IdealDescriptor {
    pub fn single(order: IndexOrder, sigma: SingularSet) -> Result<Self> {
        if !complement_dense(&sigma, DENSITY_RES)?.dense {
            return Err(FoamError::Invalid("singular set has no dense complement".into()));
        }
        Ok(IdealDescriptor {
            domain: sigma.domain().clone(),
            mode: IdealMode::Single(sigma),
            order,
        })
    }

    pub fn family(order: IndexOrder, family: SingularityFamily) -> Self {
        IdealDescriptor {
            domain: family.domain().clone(),
            mode: IdealMode::Family(family),
            order,
        }
    }

    /// The ideal with no singularities.
    pub fn regular(order: IndexOrder, domain: OpenSet) -> Self {
        IdealDescriptor {
            mode: IdealMode::Single(SingularSet::empty(domain.clone())),
            order,
            domain,
        }
    }

    /// The same kind of ideal on `v ⊆ X`.
    pub fn restrict(&self, v: &OpenSet) -> Result<Self> {
        if v.dim() != self.domain.dim() || !v.is_subset_of(&self.domain) {
            return Err(FoamError::NotContained);
        }
        let mode = match &self.mode {
            IdealMode::Single(s) => IdealMode::Single(s.restrict(v)),
            IdealMode::Family(f) => IdealMode::Family(restrict_family(f, v)?),
        };
        Ok(IdealDescriptor {
            mode,
            order: self.order,
            domain: v.clone(),
        })
    }

    pub fn single_sigma(&self) -> Option<&SingularSet> {
        match &self.mode {
            IdealMode::Single(s) => Some(s),
            IdealMode::Family(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipConfig {
    /// Largest total derivative order `P` checked.
    pub deriv_cap: u32,
    /// Indices probed at and above each witness.
    pub probes: usize,
    /// Grid cells per axis for sample points.
    pub grid: usize,
    /// Union joins allowed when searching a family.
    pub max_joins: usize,
    /// Also sample exact cell centres of a `grid + 1` grid.
    pub include_centers: bool,
    pub extra_points: Vec<Point>,
}

impl Default for MembershipConfig {
    fn default() -> Self {
        MembershipConfig {
            deriv_cap: 4,
            probes: 8,
            grid: 32,
            max_joins: 4,
            include_centers: true,
            extra_points: Vec::new(),
        }
    }
}

impl MembershipConfig {
    pub fn with_deriv_cap(mut self, p: u32) -> Self {
        self.deriv_cap = p;
        self
    }

    pub fn with_extra_points(mut self, pts: Vec<Point>) -> Self {
        self.extra_points = pts;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.probes == 0 {
            return Err(FoamError::ZeroCap("index_probe_cap"));
        }
        if self.grid == 0 {
            return Err(FoamError::ZeroCap("grid_resolution"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateEntry {
    pub point: Point,
    pub witness: Index,
    /// Every probed derivative was a structural zero.
    pub structural: bool,
    /// Largest numeric value accepted as zero.
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub sigma: SingularSet,
    pub order: IndexOrder,
    pub deriv_cap: u32,
    pub probes: usize,
    pub entries: Vec<CertificateEntry>,
}

impl Certificate {
    pub fn all_structural(&self) -> bool {
        self.entries.iter().all(|e| e.structural)
    }

    pub fn witnesses(&self) -> Vec<(Point, Index)> {
        self.entries.iter().map(|e| (e.point.clone(), e.witness)).collect()
    }

    pub fn witness_at(&self, x: &[f64]) -> Option<Index> {
        self.entries
            .iter()
            .find(|e| e.point.iter().zip(x).all(|(a, b)| (a - b).abs() < POINT_TOL))
            .map(|e| e.witness)
    }

    /// Per-point joins of two certificates' witnesses (points of `self`).
    pub fn joined_witnesses(&self, other: &Certificate) -> Option<Vec<(Point, Index)>> {
        self.entries
            .iter()
            .map(|e| {
                other
                    .witness_at(&e.point)
                    .map(|w| (e.point.clone(), self.order.join(&e.witness, &w)))
            })
            .collect()
    }
}

/// A point, index and derivative at which the family does not vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct Refutation {
    pub sigma: SingularSet,
    pub point: Point,
    pub index: Index,
    pub multi_index: MultiIndex,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    Verified(Certificate),
    Refuted(Refutation),
    /// Largest residual lies between the zero and refutation thresholds.
    Inconclusive(Refutation),
}

impl Membership {
    pub fn is_verified(&self) -> bool {
        matches!(self, Membership::Verified(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Membership::Refuted(_))
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Membership::Verified(c) => Some(c),
            _ => None,
        }
    }

    pub fn refutation(&self) -> Option<&Refutation> {
        match self {
            Membership::Refuted(r) | Membership::Inconclusive(r) => Some(r),
            Membership::Verified(_) => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Membership::Verified(_) => "verified",
            Membership::Refuted(_) => "refuted",
            Membership::Inconclusive(_) => "inconclusive",
        }
    }
}

enum GermCheck {
    Zero { structural: bool, max_abs: f64 },
    Small(MultiIndex, f64),
    Nonzero(MultiIndex, f64),
}

/// All derivatives of `germ` up to total order `cap` at `x`.
fn check_germ(germ: &SmoothExpr, x: &[f64], cap: u32) -> GermCheck {
    if germ.is_const_zero() || is_structural_zero(germ) {
        return GermCheck::Zero {
            structural: true,
            max_abs: 0.0,
        };
    }
    let dim = x.len();
    let mut derived: BTreeMap<Vec<u32>, SmoothExpr> = BTreeMap::new();
    let mut ev = Evaluator::new(x);
    let mut structural = true;
    let mut max_abs = 0.0f64;
    let mut small = None;
    for p in MultiIndex::up_to(dim, cap) {
        let orders = p.orders().to_vec();
        let d = match orders.iter().position(|&o| o > 0) {
            None => germ.clone(),
            Some(a) => {
                let mut prev = orders.clone();
                prev[a] -= 1;
                derived[&prev].derive_axis(a)
            }
        };
        derived.insert(orders, d.clone());
        if d.is_const_zero() || is_structural_zero(&d) {
            continue;
        }
        structural = false;
        let v = ev.eval(&d);
        let a = libm::fabs(v);
        if !(a <= REFUTE_THRESHOLD) {
            return GermCheck::Nonzero(p, v);
        }
        if a > NUMERIC_ZERO && small.is_none() {
            small = Some((p, v));
        }
        max_abs = max_abs.max(a);
    }
    match small {
        Some((p, v)) => GermCheck::Small(p, v),
        None => GermCheck::Zero { structural, max_abs },
    }
}

enum PointOutcome {
    Zero(CertificateEntry),
    Small(Index, MultiIndex, f64),
    Nonzero(Index, MultiIndex, f64),
}

/// Checks the probes at and above `witness`.
fn check_from(w: &FoamSequence, x: &Point, witness: Index, cfg: &MembershipConfig) -> PointOutcome {
    let mut structural = true;
    let mut max_abs = 0.0f64;
    let mut last_germ: Option<SmoothExpr> = None;
    for mu in w.order().probes_above(&witness, cfg.probes) {
        let germ = w.term(&mu).germ_at(x);
        if last_germ.as_ref() == Some(&germ) {
            continue;
        }
        match check_germ(&germ, x, cfg.deriv_cap) {
            GermCheck::Zero { structural: s, max_abs: m } => {
                structural &= s;
                max_abs = max_abs.max(m);
            }
            GermCheck::Small(p, v) => return PointOutcome::Small(mu, p, v),
            GermCheck::Nonzero(p, v) => return PointOutcome::Nonzero(mu, p, v),
        }
        last_germ = Some(germ);
    }
    PointOutcome::Zero(CertificateEntry {
        point: x.clone(),
        witness,
        structural,
        max_abs,
    })
}

/// Analytic witness when available, otherwise a scan over the first indices.
fn check_point(w: &FoamSequence, x: &Point, cfg: &MembershipConfig) -> PointOutcome {
    let candidates = match w.stable_from(x) {
        Some(l) => alloc::vec![l],
        None => w.order().enumerate(cfg.probes),
    };
    let mut worst = None;
    for c in candidates {
        match check_from(w, x, c, cfg) {
            PointOutcome::Zero(e) => return PointOutcome::Zero(e),
            PointOutcome::Small(i, p, v) => worst = Some(PointOutcome::Small(i, p, v)),
            PointOutcome::Nonzero(i, p, v) => {
                if !matches!(worst, Some(PointOutcome::Small(..))) {
                    worst = Some(PointOutcome::Nonzero(i, p, v));
                }
            }
        }
    }
    worst.expect("at least one candidate index")
}

fn push_unique(out: &mut Vec<Point>, p: Point) {
    if !out.iter().any(|q| q.dist(&p) < POINT_TOL) {
        out.push(p);
    }
}

/// Sample points of `X∖Σ` used by the check.
pub fn sample_points(w: &FoamSequence, sigma: &SingularSet, cfg: &MembershipConfig) -> Vec<Point> {
    let domain = sigma.domain();
    let mut pts = Vec::new();
    for p in domain.sample_points(cfg.grid) {
        push_unique(&mut pts, p);
    }
    if cfg.include_centers {
        for p in domain.exact_grid(cfg.grid + 1) {
            push_unique(&mut pts, p);
        }
    }
    for p in w.landmarks().into_iter().chain(cfg.extra_points.iter().cloned()) {
        if p.dim() == domain.dim() && domain.contains(&p) {
            push_unique(&mut pts, p);
        }
    }
    pts.retain(|p| !sigma.contains(p));
    pts
}

fn check_single(w: &FoamSequence, sigma: &SingularSet, cfg: &MembershipConfig) -> Membership {
    let points = sample_points(w, sigma, cfg);
    let mut entries = Vec::with_capacity(points.len());
    let mut undecided = None;
    for x in &points {
        match check_point(w, x, cfg) {
            PointOutcome::Zero(e) => entries.push(e),
            PointOutcome::Nonzero(index, multi_index, value) => {
                return Membership::Refuted(Refutation {
                    sigma: sigma.clone(),
                    point: x.clone(),
                    index,
                    multi_index,
                    value,
                })
            }
            PointOutcome::Small(index, multi_index, value) => {
                undecided.get_or_insert(Refutation {
                    sigma: sigma.clone(),
                    point: x.clone(),
                    index,
                    multi_index,
                    value,
                });
            }
        }
    }
    match undecided {
        Some(r) => Membership::Inconclusive(r),
        None => Membership::Verified(Certificate {
            sigma: sigma.clone(),
            order: w.order(),
            deriv_cap: cfg.deriv_cap,
            probes: cfg.probes,
            entries,
        }),
    }
}

fn check_compatible(w: &FoamSequence, d: &IdealDescriptor) -> Result<()> {
    if w.order() != d.order {
        return Err(FoamError::OrderMismatch);
    }
    if w.domain().dim() != d.domain.dim() {
        return Err(FoamError::DimensionMismatch {
            needed: d.domain.dim(),
            got: w.domain().dim(),
        });
    }
    if !d.domain.is_subset_of(w.domain()) {
        return Err(FoamError::NotContained);
    }
    Ok(())
}

/// Decides `w ∈ J` at the configured scale.
pub fn check_membership(w: &FoamSequence, d: &IdealDescriptor, cfg: &MembershipConfig) -> Result<Membership> {
    cfg.validate()?;
    check_compatible(w, d)?;
    match &d.mode {
        IdealMode::Single(sigma) => Ok(check_single(w, sigma, cfg)),
        IdealMode::Family(family) => {
            let mut candidates = family.join_candidates(cfg.max_joins);
            if candidates.is_empty() {
                candidates.push(SingularSet::empty(d.domain.clone()));
            }
            let mut first_refuted = None;
            let mut undecided = None;
            for sigma in &candidates {
                match check_single(w, sigma, cfg) {
                    m @ Membership::Verified(_) => return Ok(m),
                    m @ Membership::Inconclusive(_) => {
                        undecided.get_or_insert(m);
                    }
                    m @ Membership::Refuted(_) => {
                        first_refuted.get_or_insert(m);
                    }
                }
            }
            Ok(undecided.or(first_refuted).expect("at least one candidate"))
        }
    }
}

/// Re-checks given witnesses for `w` against `sigma`, skipping points that
/// lie in `sigma`.
pub fn verify_witnesses(
    w: &FoamSequence,
    sigma: &SingularSet,
    witnesses: &[(Point, Index)],
    cfg: &MembershipConfig,
) -> Result<Membership> {
    cfg.validate()?;
    let mut entries = Vec::with_capacity(witnesses.len());
    for (x, idx) in witnesses {
        if sigma.contains(x) {
            continue;
        }
        match check_from(w, x, *idx, cfg) {
            PointOutcome::Zero(e) => entries.push(e),
            PointOutcome::Nonzero(index, multi_index, value) => {
                return Ok(Membership::Refuted(Refutation {
                    sigma: sigma.clone(),
                    point: x.clone(),
                    index,
                    multi_index,
                    value,
                }))
            }
            PointOutcome::Small(index, multi_index, value) => {
                return Ok(Membership::Inconclusive(Refutation {
                    sigma: sigma.clone(),
                    point: x.clone(),
                    index,
                    multi_index,
                    value,
                }))
            }
        }
    }
    Ok(Membership::Verified(Certificate {
        sigma: sigma.clone(),
        order: w.order(),
        deriv_cap: cfg.deriv_cap,
        probes: cfg.probes,
        entries,
    }))
}

/// Accepts an existing certificate for a (possibly larger) singular set.
pub fn revalidate(w: &FoamSequence, cert: &Certificate, sigma: &SingularSet, cfg: &MembershipConfig) -> Result<Membership> {
    verify_witnesses(w, sigma, &cert.witnesses(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Bound;
    use crate::singular::{Enumeration, FamilyLabel};

    fn x() -> SmoothExpr {
        SmoothExpr::coord(0)
    }

    fn unit() -> OpenSet {
        OpenSet::interval_i(-1, 1).unwrap()
    }

    fn origin() -> SingularSet {
        SingularSet::points(unit(), alloc::vec![Point(alloc::vec![0.0])]).unwrap()
    }

    #[test]
    fn plateau_family_is_in_the_ideal() {
        let d = IdealDescriptor::single(IndexOrder::Nat, origin()).unwrap();
        let a = FoamSequence::plateau(unit(), x()).unwrap();
        let m = check_membership(&a, &d, &MembershipConfig::default()).unwrap();
        let c = m.certificate().expect("verified");
        assert!(c.all_structural());
        assert_eq!(c.witness_at(&[0.5]), None);
        let e = c.entries.iter().find(|e| (e.point[0] - 0.25).abs() < 1e-3 || e.point[0] > 0.0).unwrap();
        let expect = (1.0 / e.point[0].abs()).ceil() as u64;
        assert_eq!(e.witness, Index::Nat(expect));
    }

    #[test]
    fn plateau_is_not_regular() {
        let d = IdealDescriptor::regular(IndexOrder::Nat, unit());
        let a = FoamSequence::plateau(unit(), x()).unwrap();
        let r = check_membership(&a, &d, &MembershipConfig::default()).unwrap();
        let r = r.refutation().unwrap().clone();
        assert_eq!(r.point[0], 0.0);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn constants_are_refuted() {
        let d = IdealDescriptor::single(IndexOrder::Nat, origin()).unwrap();
        let one = FoamSequence::diagonal(IndexOrder::Nat, unit(), SmoothExpr::one()).unwrap();
        assert!(check_membership(&one, &d, &MembershipConfig::default()).unwrap().is_refuted());
        let zero = FoamSequence::zero(IndexOrder::Nat, unit());
        let c = check_membership(&zero, &d, &MembershipConfig::default()).unwrap();
        assert!(c.certificate().unwrap().entries.iter().all(|e| e.witness == Index::Nat(0)));
    }

    #[test]
    fn zero_caps_are_errors() {
        let d = IdealDescriptor::single(IndexOrder::Nat, origin()).unwrap();
        let zero = FoamSequence::zero(IndexOrder::Nat, unit());
        let cfg = MembershipConfig {
            probes: 0,
            ..MembershipConfig::default()
        };
        assert_eq!(check_membership(&zero, &d, &cfg), Err(FoamError::ZeroCap("index_probe_cap")));
        let pair = FoamSequence::zero(IndexOrder::NatPair, unit());
        assert_eq!(
            check_membership(&pair, &d, &MembershipConfig::default()),
            Err(FoamError::OrderMismatch)
        );
    }

    #[test]
    fn family_mode_finds_a_generator() {
        let d2 = OpenSet::interval_i(-2, 2).unwrap();
        let gens = alloc::vec![
            SingularSet::points(d2.clone(), alloc::vec![Point(alloc::vec![0.0])]).unwrap(),
            SingularSet::zero_set(d2.clone(), x() - SmoothExpr::one(), true),
        ];
        let fam = SingularityFamily::new(FamilyLabel::Snd, gens, d2.clone()).unwrap();
        let d = IdealDescriptor::family(IndexOrder::Nat, fam);
        let a = FoamSequence::plateau(d2.clone(), x() * (x() - SmoothExpr::one())).unwrap();
        let m = check_membership(&a, &d, &MembershipConfig::default()).unwrap();
        let c = m.certificate().expect("verified through the joined generator");
        assert!(c.sigma.contains(&[0.0]) && c.sigma.contains(&[1.0]));
    }

    #[test]
    fn monotone_in_sigma() {
        let d = IdealDescriptor::single(IndexOrder::Nat, origin()).unwrap();
        let a = FoamSequence::plateau(unit(), x()).unwrap();
        let cert = check_membership(&a, &d, &MembershipConfig::default()).unwrap();
        let bigger = SingularSet::points(
            unit(),
            alloc::vec![Point(alloc::vec![0.0]), Point(alloc::vec![0.5])],
        )
        .unwrap();
        let again = revalidate(&a, cert.certificate().unwrap(), &bigger, &MembershipConfig::default()).unwrap();
        assert!(again.is_verified());
    }

    #[test]
    fn dense_sigma_samples_are_irrational() {
        let d01 = OpenSet::interval(Bound::int(0), Bound::int(1)).unwrap();
        let q = SingularSet::dense(d01.clone(), Enumeration::RationalsUnit, 200);
        let d = IdealDescriptor::single(IndexOrder::Nat, q).unwrap();
        let psi = (SmoothExpr::constant(crate::Scalar::real(core::f64::consts::PI)) * x()).sin();
        let u = FoamSequence::diagonal(IndexOrder::Nat, d01, psi).unwrap();
        let r = check_membership(&u, &d, &MembershipConfig::default()).unwrap();
        assert!(r.is_refuted());
    }
}
