//! Named check generators. Each one parses its parameters up front and
//! returns a job that runs against a [`Context`].

use anyhow::{anyhow, bail, Context as _};
use foam_core::algebra::{embed_smooth, eq_mod_ideal, nontrivial_baire, nontrivial_nd, off_diagonality_suite};
use foam_core::atlas::{atlas_section_suite, circle_bumps, ChartAtlas, CheckStatus};
use foam_core::bump::partition_of_unity;
use foam_core::distribution::{
    delta_sequence, heaviside_sequence, pair_term, weak_limit_report, MollifierKernel, TestFunction,
};
use foam_core::expr::Evaluator;
use foam_core::membership::verify_witnesses;
use foam_core::quadrature::QuadratureConfig;
use foam_core::sequence::roots_1d;
use foam_core::sheaf::{
    flabby_extend, glue, representative_independence, separated_check, unit_partition_identity, SectionAssignment,
};
use foam_core::singular::{
    locally_finitely_additive, rationals_up_to_denominator, Enumeration, LfaStatus, SigmaSequence,
};
use foam_core::{
    check_membership, CofinalEmbedding, FamilyLabel, FoamSequence, GenFunction, IdealDescriptor, IdealMode, Index,
    IndexOrder, Membership, MembershipConfig, MultiIndex, OpenSet, Point, Rational, SingularSet, SingularityFamily,
    SmoothExpr, NUMERIC_ZERO,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::Corpus;
use crate::dto::{AtlasDto, DomainDto, LabelDto, MembershipDto, SetDto};
use crate::sexpr;
use crate::ScenarioError;

/// Everything a check may depend on besides its own parameters.
#[derive(Clone, Debug)]
pub struct Context {
    pub domain: OpenSet,
    pub order: IndexOrder,
    pub ideal: IdealDescriptor,
    pub cfg: MembershipConfig,
    pub quad: QuadratureConfig,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Refuted,
    Inconclusive,
    Error,
}

impl Status {
    pub fn of(m: &Membership) -> Self {
        match m {
            Membership::Verified(_) => Status::Verified,
            Membership::Refuted(_) => Status::Refuted,
            Membership::Inconclusive(_) => Status::Inconclusive,
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Verified
        } else {
            Status::Refuted
        }
    }

    /// Refuted wins over inconclusive, which wins over verified.
    pub fn combine(items: impl IntoIterator<Item = Status>) -> Status {
        items.into_iter().fold(Status::Verified, |acc, s| match (acc, s) {
            (Status::Error, _) | (_, Status::Error) => Status::Error,
            (Status::Refuted, _) | (_, Status::Refuted) => Status::Refuted,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Verified,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::Refuted => "refuted",
            Status::Inconclusive => "inconclusive",
            Status::Error => "error",
        }
    }
}

/// Rows for a CSV sidecar.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub details: Value,
    pub table: Option<Table>,
}

impl Outcome {
    fn new(status: Status, details: Value) -> Self {
        Outcome {
            status,
            details,
            table: None,
        }
    }

    fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

pub type Job = Box<dyn Fn(&Context) -> anyhow::Result<Outcome> + Send + Sync>;

pub struct Generator {
    pub name: &'static str,
    pub summary: &'static str,
    prepare: fn(&Value) -> Result<Job, ScenarioError>,
}

impl Generator {
    /// Validates `params` and returns the runnable check.
    pub fn prepare(&self, params: &Value) -> Result<Job, ScenarioError> {
        (self.prepare)(params)
    }
}

/// All generators, sorted by name.
pub fn generators() -> &'static [Generator] {
    &REGISTRY
}

pub fn find_generator(name: &str) -> Option<&'static Generator> {
    REGISTRY.iter().find(|g| g.name == name)
}

static REGISTRY: [Generator; 16] = [
    Generator {
        name: "atlas",
        summary: "section suite on a chart atlas: transition compatibility, chart gluing, separation, unit partitions, flabby restriction",
        prepare: prepare_atlas,
    },
    Generator {
        name: "delta_pairing",
        summary: "pairings of the mollified delta sequence with test functions and their convergence rate",
        prepare: prepare_delta_pairing,
    },
    Generator {
        name: "diagonal",
        summary: "membership of the constant family u(psi) in the ideal",
        prepare: prepare_diagonal,
    },
    Generator {
        name: "eq26",
        summary: "nowhere dense construction alpha_l = 1 - eta((l+1) sigma): ideal member equal to one on the singular set",
        prepare: prepare_eq26,
    },
    Generator {
        name: "eq29",
        summary: "first category construction alpha_(l,k) = 1 - eta((k+1) sigma_l) over pairs of naturals",
        prepare: prepare_eq29,
    },
    Generator {
        name: "flabby_extend",
        summary: "extension of sections from a sub-box by boundary functions, restriction identity and representative independence",
        prepare: prepare_flabby,
    },
    Generator {
        name: "glue",
        summary: "glue of the restrictions of global sections over a box cover",
        prepare: prepare_glue,
    },
    Generator {
        name: "heaviside",
        summary: "derivative of the mollified step equals the delta sequence termwise",
        prepare: prepare_heaviside,
    },
    Generator {
        name: "ideal_laws",
        summary: "closure under addition, absorption and derivation stability on a seeded corpus",
        prepare: prepare_ideal_laws,
    },
    Generator {
        name: "lfa",
        summary: "local finiteness of a sequence of singular sets",
        prepare: prepare_lfa,
    },
    Generator {
        name: "off_diagonal",
        summary: "the ideal meets the constant families only in zero",
        prepare: prepare_off_diagonal,
    },
    Generator {
        name: "rho",
        summary: "restriction along the diagonal embedding of the naturals into pairs",
        prepare: prepare_rho,
    },
    Generator {
        name: "ring_laws",
        summary: "quotient ring laws and the Leibniz rule on seeded triples",
        prepare: prepare_ring_laws,
    },
    Generator {
        name: "separated",
        summary: "sections equal on every cover member are equal",
        prepare: prepare_separated,
    },
    Generator {
        name: "unit_partition",
        summary: "a partition of unity sums to one in the quotient",
        prepare: prepare_unit_partition,
    },
    Generator {
        name: "zero",
        summary: "membership of the zero family",
        prepare: prepare_zero,
    },
];

fn params<T: DeserializeOwned>(v: &Value) -> Result<T, ScenarioError> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    Ok(serde_json::from_value(v)?)
}

fn expr(s: &str) -> Result<SmoothExpr, ScenarioError> {
    Ok(sexpr::parse(s)?)
}

fn exprs(v: &[String]) -> Result<Vec<SmoothExpr>, ScenarioError> {
    v.iter().map(|s| expr(s)).collect()
}

fn membership_json(m: &Membership) -> Value {
    serde_json::to_value(MembershipDto::from_membership(m)).unwrap_or(Value::Null)
}

fn points_json(pts: &[Point]) -> Value {
    json!(pts.iter().map(|p| p.0.clone()).collect::<Vec<_>>())
}

fn default_radius() -> f64 {
    0.1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverParams {
    cover: Vec<DomainDto>,
    #[serde(default = "default_radius")]
    locality_radius: f64,
}

impl CoverParams {
    fn check(&self) -> Result<(), ScenarioError> {
        if self.cover.is_empty() {
            return Err(ScenarioError::Invalid("cover is empty".into()));
        }
        for c in &self.cover {
            c.to_open_set()?;
        }
        Ok(())
    }

    fn cover(&self) -> anyhow::Result<Vec<OpenSet>> {
        Ok(self.cover.iter().map(|c| c.to_open_set()).collect::<Result<_, _>>()?)
    }
}

/// A plateau member of the ideal on `sigma = 0` over the context order.
fn plateau_member(ctx: &Context, domain: &OpenSet, sigma: &SmoothExpr) -> anyhow::Result<FoamSequence> {
    Ok(match ctx.order {
        IndexOrder::Nat => FoamSequence::plateau(domain.clone(), sigma.clone())?,
        IndexOrder::NatPair => FoamSequence::baire_plateau(domain.clone(), vec![sigma.clone()])?,
    })
}

fn nat_embedding(order: IndexOrder) -> CofinalEmbedding {
    match order {
        IndexOrder::Nat => CofinalEmbedding::Identity(IndexOrder::Nat),
        IndexOrder::NatPair => CofinalEmbedding::Diagonal,
    }
}

fn kernel(name: &str, quad: &QuadratureConfig) -> anyhow::Result<MollifierKernel> {
    match name {
        "matched_step" => Ok(MollifierKernel::matched_step()),
        "standard_bump" => Ok(MollifierKernel::standard_bump(quad)?),
        other => bail!("unknown kernel `{other}`"),
    }
}

fn check_kernel_name(name: &str) -> Result<(), ScenarioError> {
    match name {
        "matched_step" | "standard_bump" => Ok(()),
        other => Err(ScenarioError::Invalid(format!("unknown kernel `{other}`"))),
    }
}

fn default_kernel() -> String {
    "matched_step".into()
}

// zero, diagonal

fn prepare_zero(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {}
    let _: P = params(v)?;
    Ok(Box::new(|ctx: &Context| {
        let w = FoamSequence::zero(ctx.order, ctx.domain.clone());
        let m = check_membership(&w, &ctx.ideal, &ctx.cfg)?;
        Ok(Outcome::new(Status::of(&m), json!({ "membership": membership_json(&m) })))
    }))
}

fn prepare_diagonal(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        psi: String,
    }
    let p: P = params(v)?;
    let psi = expr(&p.psi)?;
    Ok(Box::new(move |ctx: &Context| {
        let u = embed_smooth(psi.clone(), &ctx.ideal)?;
        let m = u.is_zero(&ctx.cfg)?;
        Ok(Outcome::new(
            Status::of(&m),
            json!({ "psi": sexpr::print(&psi), "membership": membership_json(&m) }),
        ))
    }))
}

// eq26, eq29

fn default_levels() -> u64 {
    8
}

fn prepare_eq26(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        sigma: Option<String>,
        zeros: Option<Vec<Vec<f64>>>,
        #[serde(default = "default_levels")]
        levels: u64,
    }
    let p: P = params(v)?;
    let sigma = p.sigma.as_deref().map(expr).transpose()?;
    Ok(Box::new(move |ctx: &Context| {
        if ctx.order != IndexOrder::Nat {
            bail!("the nowhere dense construction is indexed by the naturals");
        }
        let sigma = match &sigma {
            Some(s) => s.clone(),
            None => ctx
                .ideal
                .single_sigma()
                .and_then(SingularSet::defining_function)
                .ok_or_else(|| anyhow!("no sigma given and the ideal has no defining function"))?,
        };
        let seq = nontrivial_nd(&sigma, &ctx.domain)?;
        let m = check_membership(&seq, &ctx.ideal, &ctx.cfg)?;
        let zeros: Vec<Point> = match &p.zeros {
            Some(z) => z.iter().cloned().map(Point).collect(),
            None if ctx.domain.dim() == 1 => roots_1d(&sigma, &ctx.domain),
            None => bail!("zeros must be listed for multi-dimensional sigma"),
        };
        let mut failures = Vec::new();
        for z in &zeros {
            for l in 0..=p.levels {
                let v = seq.term(&Index::Nat(l)).eval(z);
                if v != 1.0 {
                    failures.push(json!({ "zero": z.0, "index": l, "value": v }));
                }
            }
        }
        let nontrivial = failures.is_empty() && !zeros.is_empty();
        let all_structural = m.certificate().is_some_and(|c| c.all_structural());
        let status = if nontrivial { Status::of(&m) } else { Status::Refuted };
        Ok(Outcome::new(
            status,
            json!({
                "sigma": sexpr::print(&sigma),
                "membership": membership_json(&m),
                "all_structural": all_structural,
                "zeros": points_json(&zeros),
                "levels": p.levels,
                "nontrivial": nontrivial,
                "failures": failures,
            }),
        ))
    }))
}

fn default_max_den() -> u64 {
    8
}

fn default_k_levels() -> u64 {
    3
}

/// Increasing prefixes `Σ_l` of the first `count` rationals of (0,1).
fn rational_prefixes(domain: &OpenSet, count: usize) -> anyhow::Result<(Vec<Point>, Vec<SingularSet>)> {
    let qs = Enumeration::RationalsUnit.take(count);
    let parts = (1..=count)
        .map(|n| SingularSet::points(domain.clone(), qs[..n].to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((qs, parts))
}

fn prepare_eq29(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(default = "default_max_den")]
        max_denominator: u64,
        #[serde(default = "default_k_levels")]
        k_levels: u64,
    }
    let p: P = params(v)?;
    if p.max_denominator < 2 {
        return Err(ScenarioError::Invalid("max_denominator must be at least 2".into()));
    }
    Ok(Box::new(move |ctx: &Context| {
        let count = rationals_up_to_denominator(p.max_denominator);
        let (qs, parts) = rational_prefixes(&ctx.domain, count)?;
        let c = nontrivial_baire(parts, &ctx.domain)?;
        let ideal = IdealDescriptor::single(IndexOrder::NatPair, c.sigma.clone())?;
        let m = check_membership(&c.sequence, &ideal, &ctx.cfg)?;
        let mut failures = Vec::new();
        for l in 0..count {
            for q in &qs[..=l] {
                for k in 0..=p.k_levels {
                    let v = c.sequence.term(&Index::Pair(l as u64, k)).eval(q);
                    if v != 1.0 {
                        failures.push(json!({ "q": q.0, "index": [l, k], "value": v }));
                    }
                }
            }
        }
        let nontrivial = failures.is_empty();
        let status = if nontrivial { Status::of(&m) } else { Status::Refuted };
        Ok(Outcome::new(
            status,
            json!({
                "rationals": points_json(&qs),
                "repaired": c.repaired,
                "membership": membership_json(&m),
                "all_structural": m.certificate().is_some_and(|c| c.all_structural()),
                "nontrivial": nontrivial,
                "failures": failures,
            }),
        ))
    }))
}

// off_diagonal

fn prepare_off_diagonal(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        psis: Vec<String>,
    }
    let p: P = params(v)?;
    let psis = exprs(&p.psis)?;
    if psis.is_empty() {
        return Err(ScenarioError::Invalid("psis is empty".into()));
    }
    Ok(Box::new(move |ctx: &Context| {
        let rep = off_diagonality_suite(&ctx.ideal, &psis, &ctx.cfg)?;
        let status = if rep.all_refuted() {
            Status::Verified
        } else if rep.entries.iter().any(|e| e.outcome.is_verified()) {
            Status::Refuted
        } else {
            Status::Inconclusive
        };
        let mut table = Table::new(&["psi", "status", "value"]);
        let entries: Vec<Value> = rep
            .entries
            .iter()
            .map(|e| {
                let value = e.outcome.refutation().map(|r| r.value);
                table.push(vec![
                    sexpr::print(&e.psi),
                    e.outcome.status().into(),
                    value.map(|v| format!("{v:e}")).unwrap_or_default(),
                ]);
                json!({ "psi": sexpr::print(&e.psi), "membership": membership_json(&e.outcome) })
            })
            .collect();
        Ok(Outcome::new(status, json!({ "entries": entries })).with_table(table))
    }))
}

// sheaf checks

fn prepare_glue(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(flatten)]
        cover: CoverParams,
        psis: Vec<String>,
    }
    let p: P = params(v)?;
    p.cover.check()?;
    let psis = exprs(&p.psis)?;
    Ok(Box::new(move |ctx: &Context| {
        let cover = p.cover.cover()?;
        let pou = partition_of_unity(&ctx.domain, &cover, p.cover.locality_radius)?;
        let mut statuses = Vec::new();
        let mut entries = Vec::new();
        for psi in &psis {
            let t = embed_smooth(psi.clone(), &ctx.ideal)?;
            let sections = SectionAssignment::from_global(&t, cover.clone())?;
            let g = glue(&sections, &pou, &ctx.cfg)?;
            let back = eq_mod_ideal(&g.section, &t, &ctx.cfg)?;
            let s = Status::combine(g.restrictions.iter().map(Status::of).chain([Status::of(&back)]));
            statuses.push(s);
            entries.push(json!({
                "psi": sexpr::print(psi),
                "status": s.as_str(),
                "restrictions": g.restrictions.iter().map(membership_json).collect::<Vec<_>>(),
                "recovers_global": membership_json(&back),
            }));
        }
        Ok(Outcome::new(Status::combine(statuses), json!({ "sections": entries })))
    }))
}

fn prepare_separated(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(flatten)]
        cover: CoverParams,
        psi: String,
        /// Defining function of an ideal member added to the second section.
        member_sigma: Option<String>,
        /// A smooth function added to the second section.
        perturbation: Option<String>,
    }
    let p: P = params(v)?;
    p.cover.check()?;
    let psi = expr(&p.psi)?;
    let member = p.member_sigma.as_deref().map(expr).transpose()?;
    let shift = p.perturbation.as_deref().map(expr).transpose()?;
    Ok(Box::new(move |ctx: &Context| {
        let cover = p.cover.cover()?;
        let pou = partition_of_unity(&ctx.domain, &cover, p.cover.locality_radius)?;
        let t = embed_smooth(psi.clone(), &ctx.ideal)?;
        let mut rep = t.representative().clone();
        if let Some(s) = &member {
            rep = rep.add(&plateau_member(ctx, &ctx.domain, s)?)?;
        }
        if let Some(s) = &shift {
            rep = rep.add(&FoamSequence::diagonal(ctx.order, ctx.domain.clone(), s.clone())?)?;
        }
        let t2 = GenFunction::new(rep, ctx.ideal.clone())?;
        let out = separated_check(&t, &t2, &pou, &ctx.cfg)?;
        let status = if out.is_verified() {
            Status::Verified
        } else if out.is_refuted() {
            Status::Refuted
        } else {
            Status::Inconclusive
        };
        Ok(Outcome::new(
            status,
            json!({
                "pieces": out.pieces.iter().map(membership_json).collect::<Vec<_>>(),
                "assembled": out.assembled.as_ref().map(membership_json),
                "sigma": out.sigma.as_ref().map(SetDto::from_set),
            }),
        ))
    }))
}

pub const PARTITION_GRID: usize = 101;

fn prepare_unit_partition(v: &Value) -> Result<Job, ScenarioError> {
    let p: CoverParams = params(v)?;
    p.check()?;
    Ok(Box::new(move |ctx: &Context| {
        let pou = partition_of_unity(&ctx.domain, &p.cover()?, p.locality_radius)?;
        let m = unit_partition_identity(&pou, &ctx.ideal, &ctx.cfg)?;
        let sum = pou.sum();
        let deviation = ctx
            .domain
            .grid(PARTITION_GRID)
            .iter()
            .map(|x| (Evaluator::new(x).eval(&sum) - 1.0).abs())
            .fold(0.0, f64::max);
        let status = if deviation > NUMERIC_ZERO {
            Status::Refuted
        } else {
            Status::of(&m)
        };
        Ok(Outcome::new(
            status,
            json!({
                "functions": pou.functions.len(),
                "max_sum_deviation": deviation,
                "membership": membership_json(&m),
            }),
        ))
    }))
}

fn prepare_flabby(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        v_prime: DomainDto,
        psis: Vec<String>,
        /// Defining function of a member on V′ giving a second representative.
        member_sigma: Option<String>,
    }
    let p: P = params(v)?;
    p.v_prime.to_open_set()?;
    let psis = exprs(&p.psis)?;
    let member = p.member_sigma.as_deref().map(expr).transpose()?;
    Ok(Box::new(move |ctx: &Context| {
        let v_prime = p.v_prime.to_open_set()?;
        let ideal_vp = ctx.ideal.restrict(&v_prime)?;
        let emb = nat_embedding(ctx.order);
        let mut statuses = Vec::new();
        let mut entries = Vec::new();
        for psi in &psis {
            let t = embed_smooth(psi.clone(), &ideal_vp)?;
            let ext = flabby_extend(&t, &ctx.ideal, Some(emb), &ctx.cfg)?;
            let mut s = vec![Status::of(&ext.restriction), Status::from_bool(ext.boundary.check(64))];
            let independence = match &member {
                Some(sig) => {
                    let rep = t.representative().add(&plateau_member(ctx, &v_prime, sig)?)?;
                    let t_star = GenFunction::new(rep, ideal_vp.clone())?;
                    let m = representative_independence(&t, &t_star, &ctx.ideal, Some(emb), &ctx.cfg)?;
                    s.push(Status::of(&m));
                    Some(m)
                }
                None => None,
            };
            let status = Status::combine(s);
            statuses.push(status);
            entries.push(json!({
                "psi": sexpr::print(psi),
                "status": status.as_str(),
                "boundary": sexpr::print(&ext.boundary.sigma_prime),
                "restriction": membership_json(&ext.restriction),
                "representative_independence": independence.as_ref().map(membership_json),
            }));
        }
        Ok(Outcome::new(Status::combine(statuses), json!({ "sections": entries })))
    }))
}

fn prepare_atlas(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        atlas: Option<AtlasDto>,
        #[serde(default = "default_label")]
        family: LabelDto,
        psis: Option<Vec<String>>,
    }
    fn default_label() -> LabelDto {
        LabelDto::Snd
    }
    let p: P = params(v)?;
    let atlas = match &p.atlas {
        Some(a) => a.to_atlas()?,
        None => ChartAtlas::circle(),
    };
    let psis = match &p.psis {
        Some(v) => exprs(v)?,
        None => vec![circle_bumps(Rational::from_integer(1)), SmoothExpr::one()],
    };
    let label: FamilyLabel = p.family.into();
    Ok(Box::new(move |ctx: &Context| {
        let rep = atlas_section_suite(&atlas, label, ctx.order, &psis, &ctx.cfg)?;
        let status = if rep.all_passed() {
            Status::Verified
        } else if rep.checks.iter().any(|c| !c.passed() && c.observed == CheckStatus::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Refuted
        };
        let mut table = Table::new(&["check", "chart", "expected", "observed"]);
        let checks: Vec<Value> = rep
            .checks
            .iter()
            .map(|c| {
                table.push(vec![
                    c.name.clone(),
                    c.chart.clone(),
                    c.expected.as_str().into(),
                    c.observed.as_str().into(),
                ]);
                json!({
                    "name": c.name,
                    "chart": c.chart,
                    "expected": c.expected.as_str(),
                    "observed": c.observed.as_str(),
                    "witnesses": c.witnesses.len(),
                })
            })
            .collect();
        Ok(Outcome::new(status, json!({ "atlas": rep.label, "checks": checks })).with_table(table))
    }))
}

// lfa

fn prepare_lfa(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        sets: Vec<SetDto>,
        #[serde(default)]
        accumulation_points: Vec<Vec<f64>>,
        region: Option<DomainDto>,
        #[serde(default = "default_res")]
        res: usize,
    }
    fn default_res() -> usize {
        21
    }
    let p: P = params(v)?;
    if p.res == 0 {
        return Err(ScenarioError::Invalid("res must be positive".into()));
    }
    Ok(Box::new(move |ctx: &Context| {
        let family = match &ctx.ideal.mode {
            IdealMode::Family(f) => f.clone(),
            IdealMode::Single(_) => SingularityFamily::new(FamilyLabel::Snd, vec![], ctx.domain.clone())?,
        };
        let region = match &p.region {
            Some(r) => r.to_open_set()?,
            None => ctx.domain.clone(),
        };
        let prefix = p
            .sets
            .iter()
            .map(|s| s.to_set(&ctx.domain))
            .collect::<Result<Vec<_>, _>>()?;
        let seq = SigmaSequence {
            prefix,
            accumulation_points: p.accumulation_points.iter().cloned().map(Point).collect(),
        };
        let rep = locally_finitely_additive(&family, &seq, &region, p.res)?;
        let status = match rep.status {
            LfaStatus::Pass => Status::Verified,
            LfaStatus::Inconclusive => Status::Inconclusive,
        };
        let mut table = Table::new(&["point", "radius", "meeting"]);
        for w in &rep.witnesses {
            table.push(vec![
                format!("{:?}", w.point.0),
                w.radius.map(|r| r.to_string()).unwrap_or_default(),
                format!("{:?}", w.meeting),
            ]);
        }
        let radii: Vec<f64> = rep.witnesses.iter().filter_map(|w| w.radius).collect();
        Ok(Outcome::new(
            status,
            json!({
                "points": rep.witnesses.len(),
                "min_radius": radii.iter().copied().fold(f64::INFINITY, f64::min),
                "max_meeting": rep.witnesses.iter().map(|w| w.meeting.len()).max().unwrap_or(0),
                "inconclusive_points": points_json(&rep.inconclusive_points()),
                "union": rep.union.as_ref().map(SetDto::from_set),
            }),
        )
        .with_table(table))
    }))
}

// distributions

fn default_delta_indices() -> Vec<u64> {
    vec![4, 8, 16, 32]
}

fn default_window() -> [f64; 2] {
    [-1.0, 1.0]
}

fn default_ratio() -> [f64; 2] {
    [3.5, 4.5]
}

/// Errors below this are rounding noise and carry no rate.
pub const RATE_FLOOR: f64 = 1e-10;

fn prepare_delta_pairing(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        psis: Vec<String>,
        #[serde(default = "default_delta_indices")]
        indices: Vec<u64>,
        #[serde(default = "default_window")]
        window: [f64; 2],
        #[serde(default = "default_kernel")]
        kernel: String,
        #[serde(default = "default_ratio")]
        ratio_range: [f64; 2],
        /// Indices for a Cauchy check of the pairings.
        weak_limit: Option<Vec<u64>>,
    }
    let p: P = params(v)?;
    let psis = exprs(&p.psis)?;
    check_kernel_name(&p.kernel)?;
    if p.weak_limit.as_ref().is_some_and(|w| w.len() < 3) {
        return Err(ScenarioError::Invalid("weak_limit needs at least three indices".into()));
    }
    if p.indices.len() < 2 || !p.indices.windows(2).all(|w| w[0] < w[1]) {
        return Err(ScenarioError::Invalid("indices must be increasing, at least two".into()));
    }
    if !(p.window[0] < 0.0 && 0.0 < p.window[1]) {
        return Err(ScenarioError::Invalid("window must contain 0".into()));
    }
    Ok(Box::new(move |ctx: &Context| {
        let k = kernel(&p.kernel, &ctx.quad)?;
        let seq = delta_sequence(&k, ctx.domain.clone())?;
        let mut table = Table::new(&["psi", "index", "pairing", "error"]);
        let mut statuses = Vec::new();
        let mut entries = Vec::new();
        for psi in &psis {
            let tf = TestFunction::new(psi.clone(), (p.window[0], p.window[1]));
            let target = Evaluator::new(&[0.0]).eval(psi);
            let mut pairings = Vec::new();
            let mut errors = Vec::new();
            for &l in &p.indices {
                let v = pair_term(&seq, &Index::Nat(l), &tf, &ctx.quad)?;
                let e = (v - target).abs();
                table.push(vec![sexpr::print(psi), l.to_string(), format!("{v:.17e}"), format!("{e:.6e}")]);
                pairings.push(v);
                errors.push(e);
            }
            let n = errors.len();
            let (a, b) = (errors[n - 2], errors[n - 1]);
            let ratio = if b > RATE_FLOOR { Some(a / b) } else { None };
            let decays = errors[n - 1] <= errors[0] + RATE_FLOOR;
            let rate_ok = match ratio {
                Some(r) if a > RATE_FLOOR => r >= p.ratio_range[0] && r <= p.ratio_range[1],
                _ => true,
            };
            let mut s = Status::from_bool(decays && rate_ok);
            let weak = match &p.weak_limit {
                Some(w) => {
                    let idx: Vec<Index> = w.iter().map(|&l| Index::Nat(l)).collect();
                    let rep = weak_limit_report(&seq, &tf, &idx, &ctx.quad)?;
                    if !rep.convergent {
                        s = Status::combine([s, Status::Inconclusive]);
                    }
                    Some(json!({
                        "indices": w,
                        "pairings": rep.pairings,
                        "diffs": rep.diffs,
                        "convergent": rep.convergent,
                    }))
                }
                None => None,
            };
            statuses.push(s);
            // C with |pairing - psi(0)| ≈ C/(l+1)² at each index.
            let fitted: Vec<f64> = p
                .indices
                .iter()
                .zip(&errors)
                .map(|(&l, e)| e * ((l + 1) as f64).powi(2))
                .collect();
            entries.push(json!({
                "psi": sexpr::print(psi),
                "target": target,
                "pairings": pairings,
                "errors": errors,
                "fitted_constant": fitted,
                "finest_ratio": ratio,
                "weak_limit": weak,
                "status": s.as_str(),
            }));
        }
        Ok(Outcome::new(
            Status::combine(statuses),
            json!({ "kernel": p.kernel, "indices": p.indices, "entries": entries }),
        )
        .with_table(table))
    }))
}

fn prepare_heaviside(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(default = "default_kernel")]
        kernel: String,
        #[serde(default = "default_levels")]
        levels: u64,
    }
    let p: P = params(v)?;
    check_kernel_name(&p.kernel)?;
    Ok(Box::new(move |ctx: &Context| {
        if ctx.domain.dim() != 1 {
            bail!("the step function lives on the line");
        }
        let k = kernel(&p.kernel, &ctx.quad)?;
        let h = heaviside_sequence(&k, ctx.domain.clone())?;
        let d = delta_sequence(&k, ctx.domain.clone())?;
        let dh = h.derive(&MultiIndex::unit(1, 0))?;
        let diff = dh.sub(&d)?;
        let failing: Vec<u64> = (0..=p.levels)
            .filter(|&l| !diff.term(&Index::Nat(l)).is_structural_zero())
            .collect();
        Ok(Outcome::new(
            Status::from_bool(failing.is_empty()),
            json!({ "kernel": p.kernel, "levels": p.levels, "structural": failing.is_empty(), "failing": failing }),
        ))
    }))
}

// seeded corpora

fn default_size() -> usize {
    20
}

fn default_max_order() -> u32 {
    2
}

/// The singular set to check a sum against, given the certificates of the
/// summands.
fn sum_sigma(ideal: &IdealDescriptor, a: &SingularSet, b: &SingularSet) -> anyhow::Result<SingularSet> {
    if a == b {
        return Ok(a.clone());
    }
    match &ideal.mode {
        IdealMode::Single(s) => Ok(s.clone()),
        IdealMode::Family(f) => Ok(f.union_join(a, b)?),
    }
}

fn prepare_ideal_laws(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(default = "default_size")]
        size: usize,
        #[serde(default = "default_max_order")]
        max_order: u32,
    }
    let p: P = params(v)?;
    if p.size < 2 {
        return Err(ScenarioError::Invalid("size must be at least 2".into()));
    }
    Ok(Box::new(move |ctx: &Context| {
        if p.max_order > ctx.cfg.deriv_cap {
            bail!("max_order exceeds the derivative cap");
        }
        let mut corpus = Corpus::new(ctx.seed, &ctx.ideal);
        if !corpus.has_members() {
            bail!("the ideal offers no plateau members");
        }
        let mut members = Vec::with_capacity(p.size);
        for _ in 0..p.size {
            let w = corpus.member().context("corpus member")?;
            let m = check_membership(&w, &ctx.ideal, &ctx.cfg)?;
            members.push((w, m));
        }
        let mut table = Table::new(&["member", "law", "status"]);
        let mut statuses = Vec::new();
        let mut record = |i: usize, law: String, s: Status| {
            table.push(vec![i.to_string(), law, s.as_str().into()]);
            statuses.push(s);
        };
        let dim = ctx.domain.dim();
        for i in 0..p.size {
            let (w, m) = &members[i];
            record(i, "member".into(), Status::of(m));
            let Some(c) = m.certificate() else { continue };
            let (w2, m2) = &members[(i + 1) % p.size];
            if let Some(c2) = m2.certificate() {
                let s = match c.joined_witnesses(c2) {
                    Some(wit) => {
                        let sigma = sum_sigma(&ctx.ideal, &c.sigma, &c2.sigma)?;
                        Status::of(&verify_witnesses(&w.add(w2)?, &sigma, &wit, &ctx.cfg)?)
                    }
                    None => Status::Inconclusive,
                };
                record(i, "closure_under_addition".into(), s);
            }
            let s = FoamSequence::diagonal(ctx.order, ctx.domain.clone(), corpus.smooth())?;
            let absorbed = verify_witnesses(&s.mul(w)?, &c.sigma, &c.witnesses(), &ctx.cfg)?;
            record(i, "absorption".into(), Status::of(&absorbed));
            for q in MultiIndex::up_to(dim, p.max_order).into_iter().filter(|q| q.order() > 0) {
                let reduced = ctx.cfg.clone().with_deriv_cap(ctx.cfg.deriv_cap - q.order());
                let dm = verify_witnesses(&w.derive(&q)?, &c.sigma, &c.witnesses(), &reduced)?;
                record(i, format!("derivation {:?}", q.orders()), Status::of(&dm));
            }
        }
        let status = Status::combine(statuses);
        let checks = table.rows.len();
        Ok(Outcome::new(status, json!({ "size": p.size, "checks": checks, "seed": ctx.seed })).with_table(table))
    }))
}

fn prepare_ring_laws(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(default = "default_size")]
        triples: usize,
    }
    let p: P = params(v)?;
    Ok(Box::new(move |ctx: &Context| {
        let d = &ctx.ideal;
        let mut corpus = Corpus::new(ctx.seed, d);
        let mut class = |with_member: bool| -> anyhow::Result<GenFunction> {
            let mut rep = FoamSequence::diagonal(ctx.order, ctx.domain.clone(), corpus.smooth())?;
            if with_member {
                if let Some(w) = corpus.member() {
                    rep = rep.add(&w)?;
                }
            }
            Ok(GenFunction::new(rep, d.clone())?)
        };
        let one = embed_smooth(SmoothExpr::one(), d)?;
        let mut table = Table::new(&["triple", "law", "status"]);
        let mut statuses = Vec::new();
        for i in 0..p.triples {
            let (a, b, c) = (class(true)?, class(false)?, class(i % 2 == 0)?);
            let eq = |x: &GenFunction, y: &GenFunction| -> anyhow::Result<Status> {
                Ok(Status::of(&eq_mod_ideal(x, y, &ctx.cfg)?))
            };
            let laws = [
                ("add_commutes", eq(&a.add(&b)?, &b.add(&a)?)?),
                ("mul_commutes", eq(&a.mul(&b)?, &b.mul(&a)?)?),
                ("mul_associates", eq(&a.mul(&b)?.mul(&c)?, &a.mul(&b.mul(&c)?)?)?),
                ("distributes", eq(&a.mul(&b.add(&c)?)?, &a.mul(&b)?.add(&a.mul(&c)?)?)?),
                ("unit", eq(&a.mul(&one)?, &a)?),
            ];
            for (law, s) in laws {
                table.push(vec![i.to_string(), law.into(), s.as_str().into()]);
                statuses.push(s);
            }
            for axis in 0..ctx.domain.dim() {
                let e = MultiIndex::unit(ctx.domain.dim(), axis);
                let lhs = a.mul(&b)?.dp(&e)?;
                let rhs = a.dp(&e)?.mul(&b)?.add(&a.mul(&b.dp(&e)?)?)?;
                let diff = lhs.sub(&rhs)?;
                let structural = ctx
                    .order
                    .enumerate(9)
                    .iter()
                    .all(|idx| diff.representative().term(idx).is_structural_zero());
                let s = Status::from_bool(structural);
                table.push(vec![i.to_string(), format!("leibniz axis {axis}"), s.as_str().into()]);
                statuses.push(s);
            }
        }
        let checks = table.rows.len();
        Ok(Outcome::new(Status::combine(statuses), json!({ "triples": p.triples, "checks": checks, "seed": ctx.seed }))
            .with_table(table))
    }))
}

fn prepare_rho(v: &Value) -> Result<Job, ScenarioError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(default = "default_max_den")]
        max_denominator: u64,
        #[serde(default = "default_pairs")]
        pairs: usize,
    }
    fn default_pairs() -> usize {
        10
    }
    let p: P = params(v)?;
    if p.max_denominator < 2 {
        return Err(ScenarioError::Invalid("max_denominator must be at least 2".into()));
    }
    Ok(Box::new(move |ctx: &Context| {
        let emb = CofinalEmbedding::Diagonal;
        let count = rationals_up_to_denominator(p.max_denominator);
        let (_, parts) = rational_prefixes(&ctx.domain, count)?;
        let mut table = Table::new(&["case", "status"]);
        let mut statuses = Vec::new();
        let mut full_sigma = None;
        for n in 1..=count {
            let c = nontrivial_baire(parts[..n].to_vec(), &ctx.domain)?;
            let w = c.sequence.rho_restrict(&emb)?;
            let ideal = IdealDescriptor::single(IndexOrder::Nat, c.sigma.clone())?;
            let s = Status::of(&check_membership(&w, &ideal, &ctx.cfg)?);
            table.push(vec![format!("member {n}"), s.as_str().into()]);
            statuses.push(s);
            full_sigma = Some(c.sigma);
        }
        let sigma = full_sigma.ok_or_else(|| anyhow!("empty corpus"))?;
        let pair_ideal = IdealDescriptor::single(IndexOrder::NatPair, sigma)?;
        let mut corpus = Corpus::new(ctx.seed, &pair_ideal);
        let mut class = || -> anyhow::Result<GenFunction> {
            let mut rep = FoamSequence::diagonal(IndexOrder::NatPair, ctx.domain.clone(), corpus.smooth())?;
            if let Some(w) = corpus.member() {
                rep = rep.add(&w)?;
            }
            Ok(GenFunction::new(rep, pair_ideal.clone())?)
        };
        for i in 0..p.pairs {
            let (a, b) = (class()?, class()?);
            let (ra, rb) = (a.rho_restrict(&emb)?, b.rho_restrict(&emb)?);
            let add = eq_mod_ideal(&a.add(&b)?.rho_restrict(&emb)?, &ra.add(&rb)?, &ctx.cfg)?;
            let mul = eq_mod_ideal(&a.mul(&b)?.rho_restrict(&emb)?, &ra.mul(&rb)?, &ctx.cfg)?;
            for (law, m) in [("add", add), ("mul", mul)] {
                let s = Status::of(&m);
                table.push(vec![format!("pair {i} {law}"), s.as_str().into()]);
                statuses.push(s);
            }
        }
        Ok(Outcome::new(
            Status::combine(statuses),
            json!({ "members": count, "pairs": p.pairs, "embedding": "diagonal" }),
        )
        .with_table(table))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    pub(crate) fn context(json_text: &str) -> Context {
        let s = Scenario::from_json(json_text).unwrap();
        Context {
            domain: s.open_set().unwrap(),
            order: s.index_order(),
            ideal: s.ideal_descriptor().unwrap(),
            cfg: s.membership_config().unwrap(),
            quad: s.quadrature().unwrap(),
            seed: s.seed,
        }
    }

    const POINT: &str = r#"{
        "name": "t",
        "domain": {"boxes": [[[-1, 1]]]},
        "order": "nat",
        "ideal": {"sigma": {"kind": "points", "points": [[0.0]]}},
        "checks": [{"name": "z", "generator": "zero"}]
    }"#;

    fn run(name: &str, params: Value) -> Outcome {
        let job = find_generator(name).unwrap().prepare(&params).unwrap();
        job(&context(POINT)).unwrap()
    }

    #[test]
    fn registry_is_sorted() {
        let names: Vec<&str> = generators().iter().map(|g| g.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert!(find_generator("eq26").is_some());
        assert!(find_generator("flabby_extend").is_some());
        assert!(find_generator("nope").is_none());
    }

    #[test]
    fn statuses_combine() {
        use Status::*;
        assert_eq!(Status::combine([Verified, Inconclusive]), Inconclusive);
        assert_eq!(Status::combine([Inconclusive, Refuted, Verified]), Refuted);
        assert_eq!(Status::combine([Refuted, Error]), Error);
        assert_eq!(Status::combine([]), Verified);
    }

    #[test]
    fn simple_generators() {
        assert_eq!(run("zero", Value::Null).status, Status::Verified);
        assert_eq!(run("diagonal", json!({"psi": "(const 1)"})).status, Status::Refuted);
        let eq26 = run("eq26", Value::Null);
        assert_eq!(eq26.status, Status::Verified);
        assert_eq!(eq26.details["nontrivial"], json!(true));
        assert_eq!(eq26.details["all_structural"], json!(true));
        assert_eq!(run("heaviside", json!({"levels": 3})).status, Status::Verified);
        let weak = run(
            "delta_pairing",
            json!({"psis": ["(pow (coord 0) 2)"], "weak_limit": [250, 500, 1000, 2000]}),
        );
        assert_eq!(weak.status, Status::Verified);
        assert_eq!(weak.details["entries"][0]["weak_limit"]["convergent"], json!(true));
    }

    #[test]
    fn bad_params_are_rejected() {
        let g = find_generator("diagonal").unwrap();
        assert!(g.prepare(&json!({})).is_err());
        assert!(g.prepare(&json!({"psi": "(tan (coord 0))"})).is_err());
        assert!(g.prepare(&json!({"psi": "(coord 0)", "extra": 1})).is_err());
        let d = find_generator("delta_pairing").unwrap();
        assert!(d.prepare(&json!({"psis": ["(const 1)"], "indices": [4]})).is_err());
        assert!(d.prepare(&json!({"psis": ["(const 1)"], "kernel": "box"})).is_err());
    }
}
