//! Symbolic smooth functions on open subsets of ℝⁿ.
//!
//! The node language is closed under partial differentiation. Besides the
//! analytic nodes it contains the glue primitive `r(t)·exp(-1/t)` (zero for
//! `t <= 0`), which is what bump functions, smooth steps and plateau cut-offs
//! are built from. Trees are immutable and share subtrees through [`Arc`].

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops;

use crate::domain::MultiIndex;
use crate::error::{FoamError, Result};
use crate::poly::GlueFactor;
use crate::scalar::Scalar;
use crate::simplify::simplify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Analytic {
    Exp,
    Sin,
    Cos,
}

impl Analytic {
    pub fn eval(self, v: f64) -> f64 {
        match self {
            Analytic::Exp => libm::exp(v),
            Analytic::Sin => libm::sin(v),
            Analytic::Cos => libm::cos(v),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Analytic::Exp => "exp",
            Analytic::Sin => "sin",
            Analytic::Cos => "cos",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Node {
    Const(Scalar),
    Coord(usize),
    Add(Vec<SmoothExpr>),
    Neg(SmoothExpr),
    Mul(Vec<SmoothExpr>),
    /// Integer power. Negative exponents denote reciprocals; constructions
    /// only divide by expressions that stay positive.
    Pow(SmoothExpr, i32),
    Apply(Analytic, SmoothExpr),
    Glue(GlueFactor, SmoothExpr),
}

impl Node {
    fn rank(&self) -> u8 {
        match self {
            Node::Const(_) => 0,
            Node::Coord(_) => 1,
            Node::Apply(..) => 2,
            Node::Glue(..) => 3,
            Node::Pow(..) => 4,
            Node::Mul(_) => 5,
            Node::Add(_) => 6,
            Node::Neg(_) => 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SmoothExpr(Arc<Node>);

impl SmoothExpr {
    pub fn from_node(node: Node) -> Self {
        SmoothExpr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: impl Into<Scalar>) -> Self {
        SmoothExpr::from_node(Node::Const(c.into()))
    }

    pub fn int(v: i64) -> Self {
        SmoothExpr::constant(Scalar::int(v))
    }

    pub fn zero() -> Self {
        SmoothExpr::int(0)
    }

    pub fn one() -> Self {
        SmoothExpr::int(1)
    }

    pub fn coord(axis: usize) -> Self {
        SmoothExpr::from_node(Node::Coord(axis))
    }

    pub fn sum(terms: Vec<SmoothExpr>) -> Self {
        SmoothExpr::from_node(Node::Add(terms))
    }

    pub fn product(factors: Vec<SmoothExpr>) -> Self {
        SmoothExpr::from_node(Node::Mul(factors))
    }

    pub fn pow(&self, n: i32) -> Self {
        SmoothExpr::from_node(Node::Pow(self.clone(), n))
    }

    pub fn recip(&self) -> Self {
        self.pow(-1)
    }

    pub fn exp(&self) -> Self {
        SmoothExpr::from_node(Node::Apply(Analytic::Exp, self.clone()))
    }

    pub fn sin(&self) -> Self {
        SmoothExpr::from_node(Node::Apply(Analytic::Sin, self.clone()))
    }

    pub fn cos(&self) -> Self {
        SmoothExpr::from_node(Node::Apply(Analytic::Cos, self.clone()))
    }

    /// `r(self)·exp(-1/self)` where `self > 0`, else `0`.
    pub fn glue(&self, factor: GlueFactor) -> Self {
        SmoothExpr::from_node(Node::Glue(factor, self.clone()))
    }

    /// The basic glue primitive `exp(-1/t)` applied to `self`.
    pub fn glue_unit(&self) -> Self {
        self.glue(GlueFactor::one())
    }

    pub fn as_const(&self) -> Option<Scalar> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const_zero(&self) -> bool {
        self.as_const().is_some_and(Scalar::is_zero)
    }

    pub fn is_const_one(&self) -> bool {
        self.as_const().is_some_and(Scalar::is_one)
    }

    pub fn children(&self) -> Vec<&SmoothExpr> {
        match self.node() {
            Node::Const(_) | Node::Coord(_) => Vec::new(),
            Node::Add(ts) | Node::Mul(ts) => ts.iter().collect(),
            Node::Neg(a) | Node::Pow(a, _) | Node::Apply(_, a) | Node::Glue(_, a) => vec![a],
        }
    }

    /// Smallest point dimension the expression can be evaluated at.
    pub fn min_dimension(&self) -> usize {
        fn go(e: &SmoothExpr, seen: &mut BTreeMap<usize, usize>) -> usize {
            if let Some(d) = seen.get(&e.ptr()) {
                return *d;
            }
            let d = match e.node() {
                Node::Coord(a) => a + 1,
                _ => e.children().into_iter().map(|c| go(c, seen)).max().unwrap_or(0),
            };
            seen.insert(e.ptr(), d);
            d
        }
        go(self, &mut BTreeMap::new())
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn node_count(&self) -> usize {
        fn go(e: &SmoothExpr, seen: &mut BTreeMap<usize, ()>) {
            if seen.insert(e.ptr(), ()).is_some() {
                return;
            }
            for c in e.children() {
                go(c, seen);
            }
        }
        let mut seen = BTreeMap::new();
        go(self, &mut seen);
        seen.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let needed = self.min_dimension();
        if x.len() < needed {
            return Err(FoamError::DimensionMismatch {
                needed,
                got: x.len(),
            });
        }
        Ok(Evaluator::new(x).eval(self))
    }

    /// Single-axis partial derivative, simplified.
    pub fn derive_axis(&self, axis: usize) -> SmoothExpr {
        simplify(&derive_raw(self, axis, &mut BTreeMap::new()))
    }

    /// `D^p self`, applying the axes in increasing order.
    pub fn derive(&self, p: &MultiIndex) -> SmoothExpr {
        let mut out = self.clone();
        for (axis, &k) in p.orders().iter().enumerate() {
            for _ in 0..k {
                out = out.derive_axis(axis);
            }
        }
        out
    }

    /// Replace every `Coord(i)` with `args[i]`.
    pub fn substitute(&self, args: &[SmoothExpr]) -> SmoothExpr {
        fn go(e: &SmoothExpr, args: &[SmoothExpr], memo: &mut BTreeMap<usize, SmoothExpr>) -> SmoothExpr {
            if let Some(r) = memo.get(&e.ptr()) {
                return r.clone();
            }
            let out = match e.node() {
                Node::Const(_) => e.clone(),
                Node::Coord(a) => args.get(*a).cloned().unwrap_or_else(|| e.clone()),
                Node::Add(ts) => SmoothExpr::sum(ts.iter().map(|t| go(t, args, memo)).collect()),
                Node::Mul(ts) => SmoothExpr::product(ts.iter().map(|t| go(t, args, memo)).collect()),
                Node::Neg(a) => -go(a, args, memo),
                Node::Pow(a, n) => go(a, args, memo).pow(*n),
                Node::Apply(f, a) => SmoothExpr::from_node(Node::Apply(*f, go(a, args, memo))),
                Node::Glue(r, a) => go(a, args, memo).glue(r.clone()),
            };
            memo.insert(e.ptr(), out.clone());
            out
        }
        simplify(&go(self, args, &mut BTreeMap::new()))
    }

    pub fn simplified(&self) -> SmoothExpr {
        simplify(self)
    }
}

fn derive_raw(e: &SmoothExpr, axis: usize, memo: &mut BTreeMap<usize, SmoothExpr>) -> SmoothExpr {
    if let Some(d) = memo.get(&e.ptr()) {
        return d.clone();
    }
    let d = match e.node() {
        Node::Const(_) => SmoothExpr::zero(),
        Node::Coord(a) => SmoothExpr::int(if *a == axis { 1 } else { 0 }),
        Node::Add(ts) => SmoothExpr::sum(
            ts.iter()
                .map(|t| derive_raw(t, axis, memo))
                .filter(|t| !t.is_const_zero())
                .collect(),
        ),
        Node::Neg(a) => -derive_raw(a, axis, memo),
        Node::Mul(fs) => {
            let mut terms = Vec::new();
            for i in 0..fs.len() {
                let di = derive_raw(&fs[i], axis, memo);
                if di.is_const_zero() {
                    continue;
                }
                let mut factors = fs.clone();
                factors[i] = di;
                terms.push(SmoothExpr::product(factors));
            }
            SmoothExpr::sum(terms)
        }
        Node::Pow(b, n) => {
            let db = derive_raw(b, axis, memo);
            if db.is_const_zero() || *n == 0 {
                SmoothExpr::zero()
            } else {
                SmoothExpr::product(vec![SmoothExpr::int(*n as i64), b.pow(n - 1), db])
            }
        }
        Node::Apply(f, a) => {
            let da = derive_raw(a, axis, memo);
            if da.is_const_zero() {
                SmoothExpr::zero()
            } else {
                let outer = match f {
                    Analytic::Exp => e.clone(),
                    Analytic::Sin => a.cos(),
                    Analytic::Cos => -a.sin(),
                };
                SmoothExpr::product(vec![outer, da])
            }
        }
        Node::Glue(r, a) => {
            let da = derive_raw(a, axis, memo);
            if da.is_const_zero() {
                SmoothExpr::zero()
            } else {
                SmoothExpr::product(vec![a.glue(r.derivative()), da])
            }
        }
    };
    memo.insert(e.ptr(), d.clone());
    d
}

/// Evaluates expressions at a fixed point, caching shared subtrees.
pub struct Evaluator<'a> {
    x: &'a [f64],
    // keys stay alive through the stored clone, so addresses are never reused
    memo: BTreeMap<usize, (SmoothExpr, f64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(x: &'a [f64]) -> Self {
        Evaluator {
            x,
            memo: BTreeMap::new(),
        }
    }

    pub fn point(&self) -> &[f64] {
        self.x
    }

    pub fn eval(&mut self, e: &SmoothExpr) -> f64 {
        if let Some((_, v)) = self.memo.get(&e.ptr()) {
            return *v;
        }
        let v = match e.node() {
            Node::Const(c) => c.to_f64(),
            Node::Coord(a) => self.x.get(*a).copied().unwrap_or(f64::NAN),
            Node::Add(ts) => ts.iter().map(|t| self.eval(t)).sum(),
            Node::Neg(a) => -self.eval(a),
            Node::Mul(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= self.eval(f);
                    if acc == 0.0 {
                        break;
                    }
                }
                acc
            }
            Node::Pow(b, n) => libm::pow(self.eval(b), *n as f64),
            Node::Apply(f, a) => f.eval(self.eval(a)),
            Node::Glue(r, a) => r.eval(self.eval(a)),
        };
        self.memo.insert(e.ptr(), (e.clone(), v));
        v
    }
}

impl PartialEq for SmoothExpr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SmoothExpr {}

impl PartialOrd for SmoothExpr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Structural total order used to canonicalize sums and products.
impl Ord for SmoothExpr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (a, b) = (self.node(), other.node());
        a.rank().cmp(&b.rank()).then_with(|| match (a, b) {
            (Node::Const(x), Node::Const(y)) => x.cmp(y),
            (Node::Coord(x), Node::Coord(y)) => x.cmp(y),
            (Node::Add(x), Node::Add(y)) | (Node::Mul(x), Node::Mul(y)) => x.cmp(y),
            (Node::Neg(x), Node::Neg(y)) => x.cmp(y),
            (Node::Pow(x, n), Node::Pow(y, m)) => x.cmp(y).then(n.cmp(m)),
            (Node::Apply(f, x), Node::Apply(g, y)) => f.cmp(g).then_with(|| x.cmp(y)),
            (Node::Glue(r, x), Node::Glue(s, y)) => x.cmp(y).then_with(|| r.cmp(s)),
            _ => Ordering::Equal,
        })
    }
}

impl ops::Add for SmoothExpr {
    type Output = SmoothExpr;
    fn add(self, rhs: SmoothExpr) -> SmoothExpr {
        SmoothExpr::sum(vec![self, rhs])
    }
}

impl ops::Sub for SmoothExpr {
    type Output = SmoothExpr;
    fn sub(self, rhs: SmoothExpr) -> SmoothExpr {
        SmoothExpr::sum(vec![self, -rhs])
    }
}

impl ops::Mul for SmoothExpr {
    type Output = SmoothExpr;
    fn mul(self, rhs: SmoothExpr) -> SmoothExpr {
        SmoothExpr::product(vec![self, rhs])
    }
}

impl ops::Neg for SmoothExpr {
    type Output = SmoothExpr;
    fn neg(self) -> SmoothExpr {
        SmoothExpr::from_node(Node::Neg(self))
    }
}

impl ops::Add for &SmoothExpr {
    type Output = SmoothExpr;
    fn add(self, rhs: &SmoothExpr) -> SmoothExpr {
        self.clone() + rhs.clone()
    }
}

impl ops::Sub for &SmoothExpr {
    type Output = SmoothExpr;
    fn sub(self, rhs: &SmoothExpr) -> SmoothExpr {
        self.clone() - rhs.clone()
    }
}

impl ops::Mul for &SmoothExpr {
    type Output = SmoothExpr;
    fn mul(self, rhs: &SmoothExpr) -> SmoothExpr {
        self.clone() * rhs.clone()
    }
}

impl ops::Neg for &SmoothExpr {
    type Output = SmoothExpr;
    fn neg(self) -> SmoothExpr {
        -self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::scalar::Rational;
    use crate::simplify::is_structural_zero;

    fn x0() -> SmoothExpr {
        SmoothExpr::coord(0)
    }

    #[test]
    fn eval_polynomial() {
        let e = x0().pow(2) + SmoothExpr::one();
        assert_eq!(e.eval(&[2.0]).unwrap(), 5.0);
    }

    #[test]
    fn eval_glue_branches() {
        let g = x0().glue_unit();
        assert_eq!(g.eval(&[-3.0]).unwrap(), 0.0);
        assert!((g.eval(&[1.0]).unwrap() - 0.367_879_4).abs() < 1e-7);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let e = SmoothExpr::coord(2);
        assert_eq!(
            e.eval(&[1.0]),
            Err(FoamError::DimensionMismatch { needed: 3, got: 1 })
        );
    }

    #[test]
    fn derive_cube() {
        let d = x0().pow(3).derive(&MultiIndex::new(vec![1]));
        let expected = (SmoothExpr::int(3) * x0().pow(2)).simplified();
        assert_eq!(d, expected);
    }

    #[test]
    fn derive_glue_adds_inverse_square() {
        let d = x0().glue_unit().derive(&MultiIndex::new(vec![1]));
        let factor = GlueFactor::new(
            Poly::constant(Rational::from_integer(1)),
            Poly::monomial(Rational::from_integer(1), 2),
        )
        .unwrap();
        assert_eq!(d, x0().glue(factor));
        for &t in &[0.5f64, 1.0, 2.0] {
            let h = 1e-5;
            let g = x0().glue_unit();
            let fd = (g.eval(&[t + h]).unwrap() - g.eval(&[t - h]).unwrap()) / (2.0 * h);
            let v = d.eval(&[t]).unwrap();
            assert!((v - fd).abs() <= 1e-6 * fd.abs(), "t={t} v={v} fd={fd}");
        }
    }

    #[test]
    fn mixed_partial() {
        let e = x0().sin() * SmoothExpr::coord(1);
        let d = e.derive(&MultiIndex::new(vec![1, 1]));
        assert_eq!(d, x0().cos());
    }

    #[test]
    fn derive_by_zero_index_is_identity() {
        let e = x0().sin() * SmoothExpr::coord(1) + x0().glue_unit();
        assert!(Arc::ptr_eq(&e.derive(&MultiIndex::zero(2)).0, &e.0));
    }

    #[test]
    fn derivatives_commute() {
        let e = (x0() * SmoothExpr::coord(1)).exp() * (x0() - SmoothExpr::coord(1)).glue_unit();
        let a = e.derive_axis(0).derive_axis(1);
        let b = e.derive_axis(1).derive_axis(0);
        assert!(is_structural_zero(&(a - b)));
    }

    #[test]
    fn substitution_composes() {
        let e = x0().pow(2);
        let s = e.substitute(&[x0() + SmoothExpr::one()]);
        assert_eq!(s.eval(&[2.0]).unwrap(), 9.0);
    }
}
