//! Chart atlases for low-dimensional manifolds and chart-level runs of the
//! sheaf operations.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{embed_smooth, eq_mod_ideal, nontrivial_nd, GenFunction};
use crate::bump::partition_of_unity;
use crate::domain::{Bound, OpenSet, Point};
use crate::error::{FoamError, Result};
use crate::expr::{Evaluator, SmoothExpr};
use crate::membership::{IdealDescriptor, Membership, MembershipConfig};
use crate::orders::{CofinalEmbedding, Index, IndexOrder};
use crate::scalar::{rat_to_f64, Rational, Scalar};
use crate::sheaf::{flabby_extend, glue, separated_check, unit_partition_identity, SectionAssignment};
use crate::singular::{FamilyLabel, SingularSet, SingularityFamily};

/// Largest tolerated `|φ_ba(φ_ab(x)) - x|`.
pub const ROUND_TRIP_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub name: String,
    pub domain: OpenSet,
}

/// `φ: region ⊆ from → to`, one coordinate expression per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub region: OpenSet,
    pub map: Vec<SmoothExpr>,
}

impl Transition {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut ev = Evaluator::new(x);
        self.map.iter().map(|e| ev.eval(e)).collect()
    }

    /// `c` when the map is `x ↦ x + c` with rational `c`.
    pub fn shift(&self) -> Option<Vec<Rational>> {
        self.map
            .iter()
            .enumerate()
            .map(|(a, e)| match (e.clone() - SmoothExpr::coord(a)).simplified().as_const()? {
                Scalar::Rat(r) => Some(r),
                Scalar::Real(_) => None,
            })
            .collect()
    }

    /// The image of the region, for translations.
    pub fn image(&self) -> Option<OpenSet> {
        Some(self.region.translate(&self.shift()?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartAtlas {
    pub label: String,
    pub charts: Vec<Chart>,
    pub transitions: Vec<Transition>,
}

fn half(n: i64) -> Rational {
    Rational::new(n, 2)
}

fn open(lo: Rational, hi: Rational) -> OpenSet {
    OpenSet::interval(Bound::Finite(lo), Bound::Finite(hi)).expect("nonempty interval")
}

impl ChartAtlas {
    /// A single chart with no transitions.
    pub fn single_chart(label: &str, domain: OpenSet) -> Self {
        ChartAtlas {
            label: label.to_string(),
            charts: vec![Chart {
                name: "U".into(),
                domain,
            }],
            transitions: Vec::new(),
        }
    }

    /// The circle `ℝ/4ℤ` with charts `(-1/2, 5/2)` and `(3/2, 9/2)`.
    pub fn circle() -> Self {
        let s = SmoothExpr::coord(0);
        let shift = |c: i64| s.clone() + SmoothExpr::int(c);
        let t = |from, to, lo, hi, c| Transition {
            from,
            to,
            region: open(half(lo), half(hi)),
            map: vec![shift(c)],
        };
        ChartAtlas {
            label: "circle".into(),
            charts: vec![
                Chart {
                    name: "A".into(),
                    domain: open(half(-1), half(5)),
                },
                Chart {
                    name: "B".into(),
                    domain: open(half(3), half(9)),
                },
            ],
            transitions: vec![
                t(0, 1, 3, 5, 0),
                t(1, 0, 3, 5, 0),
                t(0, 1, -1, 1, 4),
                t(1, 0, 7, 9, -4),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.charts.first().map_or(0, |c| c.domain.dim())
    }

    /// Regions inside charts, images inside targets, an inverse for every
    /// transition, round trips within [`ROUND_TRIP_TOL`].
    pub fn validate(&self) -> Result<()> {
        if self.charts.is_empty() {
            return Err(FoamError::EmptyCover);
        }
        let dim = self.dim();
        if dim > 2 || self.charts.iter().any(|c| c.domain.dim() != dim) {
            return Err(FoamError::Invalid("charts must share a dimension of at most two".into()));
        }
        for (k, t) in self.transitions.iter().enumerate() {
            let (Some(from), Some(to)) = (self.charts.get(t.from), self.charts.get(t.to)) else {
                return Err(FoamError::Invalid(format!("transition {k} names a missing chart")));
            };
            if t.map.len() != dim || t.region.dim() != dim {
                return Err(FoamError::DimensionMismatch {
                    needed: dim,
                    got: t.map.len(),
                });
            }
            if !t.region.is_subset_of(&from.domain) {
                return Err(FoamError::NotContained);
            }
            let inverse = self
                .inverse_of(k)
                .ok_or_else(|| FoamError::Invalid(format!("transition {k} has no inverse")))?;
            for p in t.region.sample_points(16) {
                let y = t.apply(&p.0);
                let back = inverse.apply(&y);
                let err = back.iter().zip(&p.0).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max);
                if err > ROUND_TRIP_TOL {
                    return Err(FoamError::Invalid(format!("transition {k} round trip error {err:e}")));
                }
                if !to.domain.contains(&Point(y)) {
                    return Err(FoamError::NotContained);
                }
            }
        }
        Ok(())
    }

    /// The transition back from the image of transition `k`.
    pub fn inverse_of(&self, k: usize) -> Option<&Transition> {
        let t = &self.transitions[k];
        let y: Vec<f64> = t.apply(&t.region.sample_points(1)[0].0);
        self.transitions
            .iter()
            .find(|u| u.from == t.to && u.to == t.from && u.region.contains(&Point(y.clone())))
    }

    /// `T_to ∘ φ` on the region of `t`, as a section over `d_from|_region`.
    pub fn pullback(&self, t: &Transition, section: &GenFunction, d_from: &IdealDescriptor) -> Result<GenFunction> {
        let c = t
            .shift()
            .ok_or_else(|| FoamError::Invalid("pullback needs a translation".into()))?;
        let rep = section.representative().translate(c, t.region.clone())?;
        GenFunction::new(rep, d_from.restrict(&t.region)?)
    }
}

/// `Σ_k g(1 - ((x - c - kp)/r)²)` for `k` in `ks`: a bump train with
/// rational period `p`, exact under integer shifts by `p`.
pub fn periodic_bumps(center: Rational, radius: Rational, period: Rational, ks: core::ops::RangeInclusive<i64>) -> SmoothExpr {
    let x = SmoothExpr::coord(0);
    let inv = Scalar::Rat(Rational::from_integer(1) / (radius * radius));
    SmoothExpr::sum(
        ks.map(|k| {
            let c = SmoothExpr::constant(Scalar::Rat(center + period * Rational::from_integer(k)));
            let u = x.clone() - c;
            (SmoothExpr::one() - SmoothExpr::constant(inv) * u.pow(2)).glue_unit()
        })
        .collect(),
    )
    .simplified()
}

/// Bump trains of period 4 centred at `c`, covering both circle charts.
pub fn circle_bumps(c: Rational) -> SmoothExpr {
    periodic_bumps(c, Rational::new(3, 2), Rational::from_integer(4), -2..=2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Verified,
    Refuted,
    Inconclusive,
}

impl CheckStatus {
    pub fn of(m: &Membership) -> Self {
        match m {
            Membership::Verified(_) => CheckStatus::Verified,
            Membership::Refuted(_) => CheckStatus::Refuted,
            Membership::Inconclusive(_) => CheckStatus::Inconclusive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Verified => "verified",
            CheckStatus::Refuted => "refuted",
            CheckStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtlasCheck {
    pub name: String,
    pub chart: String,
    pub expected: CheckStatus,
    pub observed: CheckStatus,
    pub witnesses: Vec<(Point, Index)>,
}

impl AtlasCheck {
    pub fn passed(&self) -> bool {
        self.expected == self.observed
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtlasReport {
    pub label: String,
    pub checks: Vec<AtlasCheck>,
}

impl AtlasReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(AtlasCheck::passed)
    }
}

fn check(name: &str, chart: &str, expected: CheckStatus, m: &Membership) -> AtlasCheck {
    AtlasCheck {
        name: name.into(),
        chart: chart.into(),
        expected,
        observed: CheckStatus::of(m),
        witnesses: m.certificate().map(|c| c.witnesses()).unwrap_or_default(),
    }
}

fn bool_check(name: &str, chart: &str, ok: bool) -> AtlasCheck {
    AtlasCheck {
        name: name.into(),
        chart: chart.into(),
        expected: CheckStatus::Verified,
        observed: if ok { CheckStatus::Verified } else { CheckStatus::Refuted },
        witnesses: Vec::new(),
    }
}

/// Endpoints and midpoint of a bounded 1-D chart.
fn chart_window(domain: &OpenSet) -> Result<(Rational, Rational)> {
    let side = &domain.boxes()[0].sides[0];
    match (side.lo.as_finite(), side.hi.as_finite()) {
        (Some(a), Some(b)) if domain.boxes().len() == 1 => Ok((a, b)),
        _ => Err(FoamError::Invalid("suite charts must be bounded intervals".into())),
    }
}

/// `embed_smooth` of a chart function on every chart.
fn chart_sections(psi: &SmoothExpr, ideals: &[IdealDescriptor]) -> Result<Vec<GenFunction>> {
    ideals.iter().map(|d| embed_smooth(psi.clone(), d)).collect()
}

/// The ideal on a chart: the family `label` generated by the zero set of
/// `x - m` at the chart midpoint `m`.
pub fn chart_ideal(chart: &Chart, label: FamilyLabel, order: IndexOrder) -> Result<IdealDescriptor> {
    let (a, b) = chart_window(&chart.domain)?;
    let mid = (a + b) / Rational::from_integer(2);
    let sigma = SmoothExpr::coord(0) - SmoothExpr::constant(Scalar::Rat(mid));
    let gen = SingularSet::zero_set(chart.domain.clone(), sigma, true);
    let family = SingularityFamily::new(label, vec![gen], chart.domain.clone())?;
    Ok(IdealDescriptor::family(order, family))
}

fn nat_embedding(order: IndexOrder) -> Option<CofinalEmbedding> {
    match order {
        IndexOrder::Nat => Some(CofinalEmbedding::Identity(IndexOrder::Nat)),
        IndexOrder::NatPair => Some(CofinalEmbedding::Diagonal),
    }
}

/// Transition compatibility, chart-level gluing through the overlaps,
/// separation, unit partitions and flabby extension for each chart
/// function in `psis` (functions of the chart coordinate that agree under
/// every transition).
pub fn atlas_section_suite(
    atlas: &ChartAtlas,
    label: FamilyLabel,
    order: IndexOrder,
    psis: &[SmoothExpr],
    cfg: &MembershipConfig,
) -> Result<AtlasReport> {
    atlas.validate()?;
    if atlas.dim() != 1 {
        return Err(FoamError::Invalid("the section suite runs on one-dimensional atlases".into()));
    }
    let ideals = atlas
        .charts
        .iter()
        .map(|c| chart_ideal(c, label, order))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    for (k, psi) in psis.iter().enumerate() {
        let sections = chart_sections(psi, &ideals)?;
        for t in &atlas.transitions {
            let pulled = atlas.pullback(t, &sections[t.to], &ideals[t.from])?;
            let own = sections[t.from].restrict(&t.region)?;
            let name = format!("transition[{k}] {}->{}", atlas.charts[t.from].name, atlas.charts[t.to].name);
            checks.push(check(&name, &atlas.charts[t.from].name, CheckStatus::Verified, &eq_mod_ideal(&own, &pulled, cfg)?));
        }
        for c in 0..atlas.charts.len() {
            checks.extend(chart_gluing(atlas, c, &sections, &ideals, k, cfg)?);
        }
    }
    for (c, chart) in atlas.charts.iter().enumerate() {
        checks.extend(chart_local_checks(chart, &ideals[c], order, psis, cfg)?);
    }
    Ok(AtlasReport {
        label: atlas.label.clone(),
        checks,
    })
}

/// Glue on chart `c` from its own section on a core interval and the
/// pulled-back neighbours on every overlap, then compare with the chart
/// section.
fn chart_gluing(
    atlas: &ChartAtlas,
    c: usize,
    sections: &[GenFunction],
    ideals: &[IdealDescriptor],
    k: usize,
    cfg: &MembershipConfig,
) -> Result<Vec<AtlasCheck>> {
    let chart = &atlas.charts[c];
    let d = &ideals[c];
    let mut cover = Vec::new();
    let mut pieces = Vec::new();
    for t in atlas.transitions.iter().filter(|t| t.from == c) {
        cover.push(t.region.clone());
        pieces.push(atlas.pullback(t, &sections[t.to], d)?);
    }
    let (a, b) = chart_window(&chart.domain)?;
    let quarter = (b - a) / Rational::from_integer(12);
    let core_lo = a + quarter * Rational::from_integer(2);
    let core_hi = b - quarter * Rational::from_integer(2);
    let core = open(core_lo, core_hi);
    cover.push(core.clone());
    pieces.push(sections[c].restrict(&core)?);
    let covered = chart.domain.sample_points(64).iter().all(|p| cover.iter().any(|w| w.contains(p)));
    if !covered {
        cover = vec![chart.domain.clone()];
        pieces = vec![sections[c].clone()];
    }
    let radius = rat_to_f64(quarter) / 2.0;
    let pou = partition_of_unity(&chart.domain, &cover, radius)?;
    let s = SectionAssignment::new(d.clone(), cover, pieces)?;
    let g = glue(&s, &pou, cfg)?;
    let mut out = Vec::new();
    for (i, m) in g.restrictions.iter().enumerate() {
        out.push(check(&format!("glue[{k}] restriction {i}"), &chart.name, CheckStatus::Verified, m));
    }
    out.push(check(
        &format!("glue[{k}] recovers section"),
        &chart.name,
        CheckStatus::Verified,
        &eq_mod_ideal(&g.section, &sections[c], cfg)?,
    ));
    Ok(out)
}

/// Separation, unit partition and flabby extension inside one chart.
fn chart_local_checks(
    chart: &Chart,
    d: &IdealDescriptor,
    order: IndexOrder,
    psis: &[SmoothExpr],
    cfg: &MembershipConfig,
) -> Result<Vec<AtlasCheck>> {
    let (a, b) = chart_window(&chart.domain)?;
    let third = (b - a) / Rational::from_integer(3);
    let split = vec![open(a, a + third * Rational::from_integer(2)), open(a + third, b)];
    let pou = partition_of_unity(&chart.domain, &split, rat_to_f64(third) / 4.0)?;
    let mut out = Vec::new();

    let mid = (a + b) / Rational::from_integer(2);
    let sigma = SmoothExpr::coord(0) - SmoothExpr::constant(Scalar::Rat(mid));
    let member = match order {
        IndexOrder::Nat => nontrivial_nd(&sigma, &chart.domain)?,
        IndexOrder::NatPair => nontrivial_nd(&sigma, &chart.domain)?.rho_restrict(&CofinalEmbedding::Identity(IndexOrder::Nat))?,
    };
    for psi in psis {
        let t = embed_smooth(psi.clone(), d)?;
        if member.order() == order {
            let t2 = GenFunction::new(t.representative().add(&member)?, d.clone())?;
            let r = separated_check(&t, &t2, &pou, cfg)?;
            out.push(bool_check("separated: ideal member", &chart.name, r.is_verified()));
        }
        let t3 = t.add(&embed_smooth(SmoothExpr::one(), d)?)?;
        let r = separated_check(&t, &t3, &pou, cfg)?;
        out.push(AtlasCheck {
            name: "separated: u(1) perturbation".into(),
            chart: chart.name.clone(),
            expected: CheckStatus::Refuted,
            observed: if r.is_refuted() { CheckStatus::Refuted } else { CheckStatus::Verified },
            witnesses: Vec::new(),
        });
    }
    out.push(check(
        "unit partition",
        &chart.name,
        CheckStatus::Verified,
        &unit_partition_identity(&pou, d, cfg)?,
    ));

    let inner = open(a + third / Rational::from_integer(2), b - third / Rational::from_integer(2));
    for psi in psis {
        let t = embed_smooth(psi.clone(), &d.restrict(&inner)?)?;
        let ext = flabby_extend(&t, d, nat_embedding(order), cfg)?;
        out.push(check("flabby restriction", &chart.name, CheckStatus::Verified, &ext.restriction));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic() -> SmoothExpr {
        circle_bumps(Rational::from_integer(1))
    }

    #[test]
    fn circle_is_valid() {
        let a = ChartAtlas::circle();
        a.validate().unwrap();
        assert_eq!(a.transitions[2].shift(), Some(vec![Rational::from_integer(4)]));
        assert_eq!(a.transitions[2].image(), Some(open(half(7), half(9))));
        assert!(core::ptr::eq(a.inverse_of(2).unwrap(), &a.transitions[3]));
    }

    #[test]
    fn broken_atlases_are_rejected() {
        let mut a = ChartAtlas::circle();
        a.transitions.pop();
        assert!(a.validate().is_err());
        let mut b = ChartAtlas::circle();
        b.transitions[3].map = vec![SmoothExpr::coord(0) - SmoothExpr::int(3)];
        assert!(b.validate().is_err());
    }

    #[test]
    fn pullback_matches_translated_terms() {
        let a = ChartAtlas::circle();
        let d = chart_ideal(&a.charts[1], FamilyLabel::Snd, IndexOrder::Nat).unwrap();
        let da = chart_ideal(&a.charts[0], FamilyLabel::Snd, IndexOrder::Nat).unwrap();
        let tb = embed_smooth(SmoothExpr::coord(0), &d).unwrap();
        let p = a.pullback(&a.transitions[2], &tb, &da).unwrap();
        assert_eq!(p.representative().term(&Index::Nat(3)).eval(&[0.25]), 4.25);
        assert_eq!(p.representative().domain(), &open(half(-1), half(1)));
    }

    #[test]
    fn circle_suite() {
        let a = ChartAtlas::circle();
        let r = atlas_section_suite(&a, FamilyLabel::Snd, IndexOrder::Nat, &[periodic()], &MembershipConfig::default())
            .unwrap();
        for c in &r.checks {
            assert!(c.passed(), "{c:?}");
        }
        assert!(r.checks.iter().any(|c| c.name.starts_with("transition")));
    }

    #[test]
    fn non_periodic_function_breaks_compatibility() {
        let a = ChartAtlas::circle();
        let r = atlas_section_suite(&a, FamilyLabel::Snd, IndexOrder::Nat, &[SmoothExpr::coord(0)], &MembershipConfig::default());
        match r {
            Err(FoamError::IncompatibleOverlap { point, .. }) => assert!(point[0] < 0.5 || point[0] > 3.5),
            Ok(rep) => assert!(!rep.all_passed()),
            Err(e) => panic!("{e:?}"),
        }
    }

    #[test]
    fn single_chart_suite() {
        let a = ChartAtlas::single_chart("line", OpenSet::interval_i(-1, 1).unwrap());
        let r = atlas_section_suite(&a, FamilyLabel::Snd, IndexOrder::Nat, &[SmoothExpr::coord(0).cos()], &MembershipConfig::default())
            .unwrap();
        assert!(r.all_passed());
    }
}
