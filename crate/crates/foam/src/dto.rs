//! JSON shapes for domains, orders, singular sets, families, certificates
//! and atlases.

use foam_core::atlas::{Chart, ChartAtlas, Transition};
use foam_core::membership::{Certificate, Membership, Refutation};
use foam_core::singular::{Enumeration, SingularKind};
use foam_core::{
    Bound, BoxRegion, FamilyLabel, Index, IndexOrder, Interval, OpenSet, Point, Rational, SingularSet,
    SingularityFamily,
};
use serde::{Deserialize, Serialize};

use crate::sexpr;
use crate::ScenarioError;

type Result<T> = std::result::Result<T, ScenarioError>;

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

/// An interval endpoint: an integer, or a string `"n/d"`, `"-inf"`, `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundDto {
    Int(i64),
    Text(String),
}

impl BoundDto {
    pub fn to_bound(&self) -> Result<Bound> {
        match self {
            BoundDto::Int(v) => Ok(Bound::int(*v)),
            BoundDto::Text(s) => match s.trim() {
                "-inf" => Ok(Bound::NegInf),
                "inf" | "+inf" => Ok(Bound::PosInf),
                t => parse_rational(t).map(Bound::Finite),
            },
        }
    }

    pub fn from_bound(b: Bound) -> Self {
        match b {
            Bound::NegInf => BoundDto::Text("-inf".into()),
            Bound::PosInf => BoundDto::Text("inf".into()),
            Bound::Finite(r) if r.is_integer() => BoundDto::Int(*r.numer()),
            Bound::Finite(r) => BoundDto::Text(format!("{}/{}", r.numer(), r.denom())),
        }
    }
}

pub fn parse_rational(t: &str) -> Result<Rational> {
    let bad = || invalid(format!("bad rational `{t}`"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => t.parse::<i64>().map(Rational::from_integer).map_err(|_| bad()),
    }
}

/// A finite union of boxes; each box lists `[lo, hi]` per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDto {
    pub boxes: Vec<Vec<[BoundDto; 2]>>,
}

impl DomainDto {
    pub fn to_open_set(&self) -> Result<OpenSet> {
        let boxes = self
            .boxes
            .iter()
            .map(|sides| {
                let ivs = sides
                    .iter()
                    .map(|[lo, hi]| Ok(Interval::new(lo.to_bound()?, hi.to_bound()?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BoxRegion::new(ivs))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OpenSet::new(boxes)?)
    }

    pub fn from_open_set(v: &OpenSet) -> Self {
        DomainDto {
            boxes: v
                .boxes()
                .iter()
                .map(|b| {
                    b.sides
                        .iter()
                        .map(|s| [BoundDto::from_bound(s.lo), BoundDto::from_bound(s.hi)])
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderDto {
    Nat,
    NatPair,
}

impl From<OrderDto> for IndexOrder {
    fn from(o: OrderDto) -> Self {
        match o {
            OrderDto::Nat => IndexOrder::Nat,
            OrderDto::NatPair => IndexOrder::NatPair,
        }
    }
}

impl From<IndexOrder> for OrderDto {
    fn from(o: IndexOrder) -> Self {
        match o {
            IndexOrder::Nat => OrderDto::Nat,
            IndexOrder::NatPair => OrderDto::NatPair,
        }
    }
}

/// `l` or `[l, k]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexDto {
    Nat(u64),
    Pair([u64; 2]),
}

impl From<Index> for IndexDto {
    fn from(i: Index) -> Self {
        match i {
            Index::Nat(l) => IndexDto::Nat(l),
            Index::Pair(l, k) => IndexDto::Pair([l, k]),
        }
    }
}

impl From<IndexDto> for Index {
    fn from(i: IndexDto) -> Self {
        match i {
            IndexDto::Nat(l) => Index::Nat(l),
            IndexDto::Pair([l, k]) => Index::Pair(l, k),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDto {
    Empty,
    Points {
        points: Vec<Vec<f64>>,
    },
    ZeroSet {
        sigma: String,
        #[serde(default)]
        trusted: bool,
    },
    CountableUnion {
        parts: Vec<SetDto>,
    },
    /// The first `cap` rationals of (0,1) by denominator.
    Rationals {
        cap: usize,
    },
    Dense {
        points: Vec<Vec<f64>>,
    },
}

impl SetDto {
    pub fn to_set(&self, domain: &OpenSet) -> Result<SingularSet> {
        Ok(match self {
            SetDto::Empty => SingularSet::empty(domain.clone()),
            SetDto::Points { points } => {
                SingularSet::points(domain.clone(), points.iter().cloned().map(Point).collect())?
            }
            SetDto::ZeroSet { sigma, trusted } => SingularSet::zero_set(domain.clone(), sexpr::parse(sigma)?, *trusted),
            SetDto::CountableUnion { parts } => {
                let parts = parts.iter().map(|p| p.to_set(domain)).collect::<Result<Vec<_>>>()?;
                SingularSet::countable_union(domain.clone(), parts)?.0
            }
            SetDto::Rationals { cap } => SingularSet::dense(domain.clone(), Enumeration::RationalsUnit, *cap),
            SetDto::Dense { points } => SingularSet::dense(
                domain.clone(),
                Enumeration::Explicit(points.iter().cloned().map(Point).collect()),
                points.len(),
            ),
        })
    }

    pub fn from_set(s: &SingularSet) -> Self {
        match s.kind() {
            SingularKind::Empty => SetDto::Empty,
            SingularKind::FinitePoints(p) => SetDto::Points {
                points: p.iter().map(|q| q.0.clone()).collect(),
            },
            SingularKind::ZeroSet { sigma, trusted } => SetDto::ZeroSet {
                sigma: sexpr::print(sigma),
                trusted: *trusted,
            },
            SingularKind::CountableUnion(parts) => SetDto::CountableUnion {
                parts: parts.iter().map(SetDto::from_set).collect(),
            },
            SingularKind::DenseEnumerated {
                enumeration: Enumeration::RationalsUnit,
                cap,
            } => SetDto::Rationals { cap: *cap },
            SingularKind::DenseEnumerated {
                enumeration: Enumeration::Explicit(p),
                ..
            } => SetDto::Dense {
                points: p.iter().map(|q| q.0.clone()).collect(),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelDto {
    Snd,
    SbaireDelta,
    Custom,
}

impl From<LabelDto> for FamilyLabel {
    fn from(l: LabelDto) -> Self {
        match l {
            LabelDto::Snd => FamilyLabel::Snd,
            LabelDto::SbaireDelta => FamilyLabel::SBaireDelta,
            LabelDto::Custom => FamilyLabel::Custom,
        }
    }
}

impl From<FamilyLabel> for LabelDto {
    fn from(l: FamilyLabel) -> Self {
        match l {
            FamilyLabel::Snd => LabelDto::Snd,
            FamilyLabel::SBaireDelta => LabelDto::SbaireDelta,
            FamilyLabel::Custom => LabelDto::Custom,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDto {
    pub label: LabelDto,
    #[serde(default)]
    pub generators: Vec<SetDto>,
}

impl FamilyDto {
    pub fn to_family(&self, domain: &OpenSet) -> Result<SingularityFamily> {
        let gens = self.generators.iter().map(|g| g.to_set(domain)).collect::<Result<Vec<_>>>()?;
        Ok(SingularityFamily::new(self.label.into(), gens, domain.clone())?)
    }

    pub fn from_family(f: &SingularityFamily) -> Self {
        FamilyDto {
            label: f.label().into(),
            generators: f.generators().iter().map(SetDto::from_set).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDto {
    pub status: String,
    pub sigma: SetDto,
    #[serde(rename = "P")]
    pub deriv_cap: u32,
    pub probes: usize,
    pub sample_points: Vec<Vec<f64>>,
    pub witnesses: Vec<IndexDto>,
    pub all_structural: bool,
    pub max_abs: f64,
}

impl CertificateDto {
    pub fn from_certificate(c: &Certificate) -> Self {
        CertificateDto {
            status: "verified".into(),
            sigma: SetDto::from_set(&c.sigma),
            deriv_cap: c.deriv_cap,
            probes: c.probes,
            sample_points: c.entries.iter().map(|e| e.point.0.clone()).collect(),
            witnesses: c.entries.iter().map(|e| e.witness.into()).collect(),
            all_structural: c.all_structural(),
            max_abs: c.entries.iter().map(|e| e.max_abs).fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefutationDto {
    pub status: String,
    pub point: Vec<f64>,
    pub index: IndexDto,
    pub multi_index: Vec<u32>,
    pub value: f64,
}

impl RefutationDto {
    pub fn from_refutation(status: &str, r: &Refutation) -> Self {
        RefutationDto {
            status: status.into(),
            point: r.point.0.clone(),
            index: r.index.into(),
            multi_index: r.multi_index.orders().to_vec(),
            value: r.value,
        }
    }
}

/// A membership outcome: a certificate or the refuting evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MembershipDto {
    Certificate(CertificateDto),
    Refutation(RefutationDto),
}

impl MembershipDto {
    pub fn from_membership(m: &Membership) -> Self {
        match m {
            Membership::Verified(c) => MembershipDto::Certificate(CertificateDto::from_certificate(c)),
            Membership::Refuted(r) => MembershipDto::Refutation(RefutationDto::from_refutation("refuted", r)),
            Membership::Inconclusive(r) => {
                MembershipDto::Refutation(RefutationDto::from_refutation("inconclusive", r))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDto {
    pub name: String,
    pub domain: DomainDto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDto {
    pub from: String,
    pub to: String,
    pub region: DomainDto,
    /// One s-expression per coordinate.
    pub map: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasDto {
    pub label: String,
    pub charts: Vec<ChartDto>,
    #[serde(default)]
    pub transitions: Vec<TransitionDto>,
}

impl AtlasDto {
    pub fn to_atlas(&self) -> Result<ChartAtlas> {
        let charts = self
            .charts
            .iter()
            .map(|c| {
                Ok(Chart {
                    name: c.name.clone(),
                    domain: c.domain.to_open_set()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let find = |name: &str| {
            charts
                .iter()
                .position(|c| c.name == name)
                .ok_or_else(|| invalid(format!("unknown chart `{name}`")))
        };
        let transitions = self
            .transitions
            .iter()
            .map(|t| {
                Ok(Transition {
                    from: find(&t.from)?,
                    to: find(&t.to)?,
                    region: t.region.to_open_set()?,
                    map: t.map.iter().map(|m| sexpr::parse(m)).collect::<std::result::Result<_, _>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let atlas = ChartAtlas {
            label: self.label.clone(),
            charts,
            transitions,
        };
        atlas.validate()?;
        Ok(atlas)
    }

    pub fn from_atlas(a: &ChartAtlas) -> Self {
        AtlasDto {
            label: a.label.clone(),
            charts: a
                .charts
                .iter()
                .map(|c| ChartDto {
                    name: c.name.clone(),
                    domain: DomainDto::from_open_set(&c.domain),
                })
                .collect(),
            transitions: a
                .transitions
                .iter()
                .map(|t| TransitionDto {
                    from: a.charts[t.from].name.clone(),
                    to: a.charts[t.to].name.clone(),
                    region: DomainDto::from_open_set(&t.region),
                    map: t.map.iter().map(sexpr::print).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains_round_trip() {
        let v = OpenSet::interval(Bound::finite(-1, 2), Bound::PosInf).unwrap();
        let d = DomainDto::from_open_set(&v);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"boxes":[[["-1/2","inf"]]]}"#);
        let back: DomainDto = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_open_set().unwrap(), v);
        let ints: DomainDto = serde_json::from_str(r#"{"boxes":[[[-1,1]]]}"#).unwrap();
        assert_eq!(ints.to_open_set().unwrap(), OpenSet::interval_i(-1, 1).unwrap());
    }

    #[test]
    fn orders_and_indices() {
        assert_eq!(serde_json::to_string(&OrderDto::NatPair).unwrap(), r#""nat_pair""#);
        let i: IndexDto = serde_json::from_str("[2,3]").unwrap();
        assert_eq!(Index::from(i), Index::Pair(2, 3));
        let j: IndexDto = serde_json::from_str("7").unwrap();
        assert_eq!(Index::from(j), Index::Nat(7));
    }

    #[test]
    fn sets_round_trip() {
        let d = OpenSet::interval_i(-2, 2).unwrap();
        let json = r#"{"kind":"countable_union","parts":[{"kind":"points","points":[[0.5]]},{"kind":"zero_set","sigma":"(coord 0)","trusted":true}]}"#;
        let dto: SetDto = serde_json::from_str(json).unwrap();
        let s = dto.to_set(&d).unwrap();
        let again = SetDto::from_set(&s).to_set(&d).unwrap();
        assert_eq!(again, s);
        assert!(serde_json::from_str::<SetDto>(r#"{"kind":"circle"}"#).is_err());
    }

    #[test]
    fn circle_atlas_round_trip() {
        let a = ChartAtlas::circle();
        let dto = AtlasDto::from_atlas(&a);
        let json = serde_json::to_string_pretty(&dto).unwrap();
        let back: AtlasDto = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_atlas().unwrap(), a);
    }
}
