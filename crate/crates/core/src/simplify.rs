//! Canonical forms, expansion and local germs of symbolic expressions.
//!
//! [`simplify`] is a terminating bottom-up rewrite: flattening of sums and
//! products, constant folding, collection of like terms and of equal bases.
//! It is sound but not complete, so [`is_structural_zero`] additionally tries
//! a budgeted polynomial expansion. [`germ_at`] drops every glue primitive
//! whose argument is strictly negative at a point; what remains agrees with
//! the original expression on a neighbourhood of that point.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{Analytic, Evaluator, Node, SmoothExpr};
use crate::poly::GlueFactor;
use crate::scalar::Scalar;

/// Default cap on the number of monomials produced while expanding.
pub const EXPAND_BUDGET: usize = 20_000;

/// Glue arguments below `-GERM_MARGIN` are treated as locally negative.
pub const GERM_MARGIN: f64 = 1e-10;

pub fn simplify(e: &SmoothExpr) -> SmoothExpr {
    Simplifier::default().run(e)
}

/// `true` when `e` is identically zero by rewriting alone.
pub fn is_structural_zero(e: &SmoothExpr) -> bool {
    let s = simplify(e);
    if s.is_const_zero() {
        return true;
    }
    expand(&s, EXPAND_BUDGET).is_some_and(|x| x.is_const_zero())
}

/// Structural equality modulo rewriting and expansion.
pub fn structurally_equal(a: &SmoothExpr, b: &SmoothExpr) -> bool {
    simplify(a) == simplify(b) || is_structural_zero(&(a - b))
}

#[derive(Default)]
struct Simplifier {
    memo: BTreeMap<usize, (SmoothExpr, SmoothExpr)>,
}

impl Simplifier {
    fn run(&mut self, e: &SmoothExpr) -> SmoothExpr {
        if let Some((_, r)) = self.memo.get(&e.ptr()) {
            return r.clone();
        }
        let out = match e.node() {
            Node::Const(_) | Node::Coord(_) => e.clone(),
            Node::Add(ts) => {
                let ts = ts.iter().map(|t| self.run(t)).collect();
                make_sum(ts)
            }
            Node::Neg(a) => {
                let a = self.run(a);
                make_product(vec![SmoothExpr::int(-1), a])
            }
            Node::Mul(fs) => {
                let fs = fs.iter().map(|f| self.run(f)).collect();
                make_product(fs)
            }
            Node::Pow(b, n) => {
                let b = self.run(b);
                make_pow(b, *n)
            }
            Node::Apply(f, a) => {
                let a = self.run(a);
                make_apply(*f, a)
            }
            Node::Glue(r, a) => {
                let a = self.run(a);
                make_glue(r, a)
            }
        };
        self.memo.insert(e.ptr(), (e.clone(), out.clone()));
        out
    }
}

fn split_coefficient(t: &SmoothExpr) -> (Scalar, Option<SmoothExpr>) {
    match t.node() {
        Node::Const(c) => (*c, None),
        Node::Mul(fs) => match fs.first().and_then(SmoothExpr::as_const) {
            Some(c) => {
                let rest = if fs.len() == 2 {
                    fs[1].clone()
                } else {
                    SmoothExpr::product(fs[1..].to_vec())
                };
                (c, Some(rest))
            }
            None => (Scalar::one(), Some(t.clone())),
        },
        _ => (Scalar::one(), Some(t.clone())),
    }
}

fn scaled(c: Scalar, m: SmoothExpr) -> SmoothExpr {
    if c.is_one() {
        return m;
    }
    match m.node() {
        Node::Mul(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(SmoothExpr::constant(c));
            v.extend(fs.iter().cloned());
            SmoothExpr::product(v)
        }
        _ => SmoothExpr::product(vec![SmoothExpr::constant(c), m]),
    }
}

/// Canonical sum of canonical terms.
pub(crate) fn make_sum(terms: Vec<SmoothExpr>) -> SmoothExpr {
    let mut constant = Scalar::zero();
    let mut monomials: BTreeMap<SmoothExpr, Scalar> = BTreeMap::new();
    let mut push = |t: &SmoothExpr, constant: &mut Scalar| {
        let (c, m) = split_coefficient(t);
        match m {
            None => *constant = constant.add(c),
            Some(m) => {
                let slot = monomials.entry(m).or_insert_with(Scalar::zero);
                *slot = slot.add(c);
            }
        }
    };
    for t in &terms {
        match t.node() {
            Node::Add(inner) => inner.iter().for_each(|i| push(i, &mut constant)),
            _ => push(t, &mut constant),
        }
    }
    let mut out = Vec::new();
    if !constant.is_zero() {
        out.push(SmoothExpr::constant(constant));
    }
    for (m, c) in monomials {
        if !c.is_zero() {
            out.push(scaled(c, m));
        }
    }
    match out.len() {
        0 => SmoothExpr::zero(),
        1 => out.pop().unwrap(),
        _ => SmoothExpr::sum(out),
    }
}

/// Canonical product of canonical factors.
pub(crate) fn make_product(factors: Vec<SmoothExpr>) -> SmoothExpr {
    let mut coeff = Scalar::one();
    let mut bases: BTreeMap<SmoothExpr, i64> = BTreeMap::new();
    let mut push = |f: &SmoothExpr, coeff: &mut Scalar| match f.node() {
        Node::Const(c) => *coeff = coeff.mul(*c),
        Node::Pow(b, n) if b.as_const().is_none() => {
            *bases.entry(b.clone()).or_insert(0) += *n as i64;
        }
        _ => *bases.entry(f.clone()).or_insert(0) += 1,
    };
    for f in &factors {
        match f.node() {
            Node::Mul(inner) => inner.iter().for_each(|i| push(i, &mut coeff)),
            _ => push(f, &mut coeff),
        }
    }
    if coeff.is_zero() {
        return SmoothExpr::zero();
    }
    let mut out = Vec::new();
    for (b, n) in bases {
        match n {
            0 => {}
            1 => out.push(b),
            n => out.push(SmoothExpr::from_node(Node::Pow(
                b,
                i32::try_from(n).expect("exponent overflow"),
            ))),
        }
    }
    if out.is_empty() {
        return SmoothExpr::constant(coeff);
    }
    if coeff.is_one() {
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        return SmoothExpr::product(out);
    }
    out.insert(0, SmoothExpr::constant(coeff));
    SmoothExpr::product(out)
}

pub(crate) fn make_pow(b: SmoothExpr, n: i32) -> SmoothExpr {
    if n == 0 {
        return SmoothExpr::one();
    }
    if n == 1 {
        return b;
    }
    match b.node() {
        Node::Const(c) => match c.powi(n) {
            Some(v) => SmoothExpr::constant(v),
            None => SmoothExpr::from_node(Node::Pow(b.clone(), n)),
        },
        Node::Pow(inner, m) => make_pow(inner.clone(), m.checked_mul(n).expect("exponent overflow")),
        Node::Mul(fs) => make_product(fs.iter().map(|f| make_pow(f.clone(), n)).collect()),
        _ => SmoothExpr::from_node(Node::Pow(b, n)),
    }
}

fn make_apply(f: Analytic, a: SmoothExpr) -> SmoothExpr {
    match a.as_const() {
        Some(c) if c.is_zero() => match f {
            Analytic::Exp | Analytic::Cos => SmoothExpr::one(),
            Analytic::Sin => SmoothExpr::zero(),
        },
        Some(c) => SmoothExpr::constant(Scalar::real(f.eval(c.to_f64()))),
        None => SmoothExpr::from_node(Node::Apply(f, a)),
    }
}

fn make_glue(r: &GlueFactor, a: SmoothExpr) -> SmoothExpr {
    if r.is_zero() {
        return SmoothExpr::zero();
    }
    match a.as_const() {
        Some(c) => {
            let t = c.to_f64();
            if t <= 0.0 {
                SmoothExpr::zero()
            } else {
                SmoothExpr::constant(Scalar::real(r.eval(t)))
            }
        }
        None => SmoothExpr::from_node(Node::Glue(r.clone(), a)),
    }
}

/// Expands products over sums, returning the canonical sum of monomials or
/// `None` if more than `budget` monomials would be produced.
pub fn expand(e: &SmoothExpr, budget: usize) -> Option<SmoothExpr> {
    let mut ex = Expander {
        memo: BTreeMap::new(),
        budget,
    };
    let terms = ex.terms(&simplify(e))?;
    Some(make_sum(terms))
}

struct Expander {
    memo: BTreeMap<usize, (SmoothExpr, Vec<SmoothExpr>)>,
    budget: usize,
}

impl Expander {
    fn spend(&mut self, n: usize) -> Option<()> {
        self.budget = self.budget.checked_sub(n)?;
        Some(())
    }

    fn atom(&mut self, e: &SmoothExpr) -> Option<SmoothExpr> {
        let ts = self.terms(e)?;
        Some(make_sum(ts))
    }

    fn multiply(&mut self, a: &[SmoothExpr], b: &[SmoothExpr]) -> Option<Vec<SmoothExpr>> {
        self.spend(a.len() * b.len())?;
        let mut out = Vec::with_capacity(a.len() * b.len());
        for x in a {
            for y in b {
                out.push(make_product(vec![x.clone(), y.clone()]));
            }
        }
        // collect like terms early to keep the cartesian products small
        Some(match make_sum(out) {
            s if s.is_const_zero() => Vec::new(),
            s => match s.node() {
                Node::Add(ts) => ts.clone(),
                _ => vec![s],
            },
        })
    }

    fn terms(&mut self, e: &SmoothExpr) -> Option<Vec<SmoothExpr>> {
        if let Some((_, t)) = self.memo.get(&e.ptr()) {
            return Some(t.clone());
        }
        let out = match e.node() {
            Node::Const(c) if c.is_zero() => Vec::new(),
            Node::Const(_) | Node::Coord(_) => vec![e.clone()],
            Node::Add(ts) => {
                let mut v = Vec::new();
                for t in ts {
                    v.extend(self.terms(t)?);
                }
                v
            }
            Node::Neg(a) => {
                let ts = self.terms(a)?;
                ts.into_iter()
                    .map(|t| make_product(vec![SmoothExpr::int(-1), t]))
                    .collect()
            }
            Node::Mul(fs) => {
                let mut acc = vec![SmoothExpr::one()];
                for f in fs {
                    let tf = self.terms(f)?;
                    acc = self.multiply(&acc, &tf)?;
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
            Node::Pow(b, n) if *n > 0 => {
                let tb = self.terms(b)?;
                if tb.len() == 1 {
                    vec![make_pow(tb[0].clone(), *n)]
                } else {
                    let mut acc = vec![SmoothExpr::one()];
                    for _ in 0..*n {
                        acc = self.multiply(&acc, &tb)?;
                    }
                    acc
                }
            }
            Node::Pow(b, n) => {
                let base = self.atom(b)?;
                vec![make_pow(base, *n)]
            }
            Node::Apply(f, a) => {
                let a = self.atom(a)?;
                vec![make_apply(*f, a)]
            }
            Node::Glue(r, a) => {
                let a = self.atom(a)?;
                vec![make_glue(r, a)]
            }
        };
        self.spend(1)?;
        self.memo.insert(e.ptr(), (e.clone(), out.clone()));
        Some(out)
    }
}

/// Germ of `e` at `x`: glue primitives with strictly negative argument at
/// `x` vanish on a neighbourhood of `x` and are replaced by zero.
pub fn germ_at(e: &SmoothExpr, x: &[f64]) -> SmoothExpr {
    let mut g = Germ {
        ev: Evaluator::new(x),
        memo: BTreeMap::new(),
    };
    simplify(&g.run(e))
}

struct Germ<'a> {
    ev: Evaluator<'a>,
    memo: BTreeMap<usize, (SmoothExpr, SmoothExpr)>,
}

impl Germ<'_> {
    fn run(&mut self, e: &SmoothExpr) -> SmoothExpr {
        if let Some((_, r)) = self.memo.get(&e.ptr()) {
            return r.clone();
        }
        let out = match e.node() {
            Node::Const(_) | Node::Coord(_) => e.clone(),
            Node::Add(ts) => SmoothExpr::sum(ts.iter().map(|t| self.run(t)).collect()),
            Node::Mul(fs) => SmoothExpr::product(fs.iter().map(|f| self.run(f)).collect()),
            Node::Neg(a) => -self.run(a),
            Node::Pow(b, n) => self.run(b).pow(*n),
            Node::Apply(f, a) => SmoothExpr::from_node(Node::Apply(*f, self.run(a))),
            Node::Glue(r, a) => {
                if self.ev.eval(a) < -GERM_MARGIN {
                    SmoothExpr::zero()
                } else {
                    self.run(a).glue(r.clone())
                }
            }
        };
        self.memo.insert(e.ptr(), (e.clone(), out.clone()));
        out
    }
}
