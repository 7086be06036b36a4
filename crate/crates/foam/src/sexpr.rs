//! S-expression text form of [`SmoothExpr`].
//!
//! ```text
//! (const c) (coord a) (+ e…) (neg e) (* e…) (pow e n)
//! (exp e) (sin e) (cos e) (glue (num…) (den…) e)
//! ```
//!
//! Rational constants print as `n` or `n/d`; real constants always carry a
//! decimal point or exponent so they read back as reals.

use std::fmt::Write;

use foam_core::poly::{GlueFactor, Poly};
use foam_core::{Analytic, Node, Rational, Scalar, SmoothExpr};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SexprError {
    #[error("malformed s-expression: {0}")]
    Syntax(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("`{op}` expects {expected}")]
    Arity { op: String, expected: &'static str },
    #[error("bad number `{0}`")]
    Number(String),
}

type Result<T> = std::result::Result<T, SexprError>;

pub fn print(e: &SmoothExpr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn real(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'E']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn coeffs(out: &mut String, p: &Poly) {
    out.push('(');
    for (i, c) in p.coeffs().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&rational(c));
    }
    out.push(')');
}

fn write_expr(out: &mut String, e: &SmoothExpr) {
    match e.node() {
        Node::Const(Scalar::Rat(r)) => {
            let _ = write!(out, "(const {})", rational(r));
        }
        Node::Const(Scalar::Real(v)) => {
            let _ = write!(out, "(const {})", real(*v));
        }
        Node::Coord(a) => {
            let _ = write!(out, "(coord {a})");
        }
        Node::Add(ts) | Node::Mul(ts) => {
            out.push_str(if matches!(e.node(), Node::Add(_)) { "(+" } else { "(*" });
            for t in ts {
                out.push(' ');
                write_expr(out, t);
            }
            out.push(')');
        }
        Node::Neg(a) => {
            out.push_str("(neg ");
            write_expr(out, a);
            out.push(')');
        }
        Node::Pow(a, n) => {
            out.push_str("(pow ");
            write_expr(out, a);
            let _ = write!(out, " {n})");
        }
        Node::Apply(f, a) => {
            let _ = write!(out, "({} ", f.name());
            write_expr(out, a);
            out.push(')');
        }
        Node::Glue(r, a) => {
            out.push_str("(glue ");
            coeffs(out, r.num());
            out.push(' ');
            coeffs(out, r.den());
            out.push(' ');
            write_expr(out, a);
            out.push(')');
        }
    }
}

pub fn parse(text: &str) -> Result<SmoothExpr> {
    let mut tokens = tokenize(text).into_iter().peekable();
    let tree = read(&mut tokens)?;
    if let Some(t) = tokens.next() {
        return Err(SexprError::Syntax(format!("trailing input at `{t}`")));
    }
    from_tree(&tree)
}

/// The reader keeps atoms as text so numbers are converted by the standard
/// library, which rounds reals correctly.
enum Tree {
    Atom(String),
    List(Vec<Tree>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut atom = String::new();
    for c in text.chars() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if !atom.is_empty() {
                out.push(std::mem::take(&mut atom));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            atom.push(c);
        }
    }
    if !atom.is_empty() {
        out.push(atom);
    }
    out
}

fn read(tokens: &mut std::iter::Peekable<std::vec::IntoIter<String>>) -> Result<Tree> {
    match tokens.next().as_deref() {
        None => Err(SexprError::Syntax("unexpected end of input".into())),
        Some(")") => Err(SexprError::Syntax("unexpected `)`".into())),
        Some("(") => {
            let mut items = Vec::new();
            loop {
                match tokens.peek().map(String::as_str) {
                    None => return Err(SexprError::Syntax("unclosed `(`".into())),
                    Some(")") => {
                        tokens.next();
                        return Ok(Tree::List(items));
                    }
                    _ => items.push(read(tokens)?),
                }
            }
        }
        Some(a) => Ok(Tree::Atom(a.to_string())),
    }
}

fn atom(t: &Tree) -> Result<&str> {
    match t {
        Tree::Atom(a) => Ok(a),
        Tree::List(_) => Err(SexprError::Syntax("expected an atom, found a list".into())),
    }
}

fn parse_rational(t: &Tree) -> Result<Rational> {
    let a = atom(t)?;
    let bad = || SexprError::Number(a.to_string());
    match a.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.parse().map_err(|_| bad())?;
            let d: i64 = d.parse().map_err(|_| bad())?;
            if d <= 0 {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => a.parse::<i64>().map(Rational::from_integer).map_err(|_| bad()),
    }
}

fn parse_scalar(t: &Tree) -> Result<Scalar> {
    parse_rational(t).map(Scalar::Rat).or_else(|e| {
        atom(t)?
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Scalar::Real)
            .ok_or(e)
    })
}

fn parse_int<T: TryFrom<i64>>(t: &Tree) -> Result<T> {
    let a = atom(t)?;
    a.parse::<i64>()
        .ok()
        .and_then(|n| T::try_from(n).ok())
        .ok_or_else(|| SexprError::Number(a.to_string()))
}

fn poly(t: &Tree) -> Result<Poly> {
    match t {
        Tree::List(items) => Ok(Poly::new(items.iter().map(parse_rational).collect::<Result<_>>()?)),
        Tree::Atom(a) => Err(SexprError::Syntax(format!("expected coefficient list, found `{a}`"))),
    }
}

fn from_tree(t: &Tree) -> Result<SmoothExpr> {
    let Tree::List(items) = t else {
        return Err(SexprError::Syntax(format!("expected an expression, found `{}`", atom(t)?)));
    };
    let (head, args) = items.split_first().ok_or_else(|| SexprError::Syntax("empty list".into()))?;
    let op = atom(head)?;
    let arity = |n: usize, expected: &'static str| {
        if args.len() == n {
            Ok(())
        } else {
            Err(SexprError::Arity {
                op: op.to_string(),
                expected,
            })
        }
    };
    let node = match op {
        "const" => {
            arity(1, "one number")?;
            Node::Const(parse_scalar(&args[0])?)
        }
        "coord" => {
            arity(1, "one axis")?;
            Node::Coord(parse_int(&args[0])?)
        }
        "+" | "*" => {
            if args.len() < 2 {
                return Err(SexprError::Arity {
                    op: op.into(),
                    expected: "at least two operands",
                });
            }
            let ts = args.iter().map(from_tree).collect::<Result<Vec<_>>>()?;
            if op == "+" {
                Node::Add(ts)
            } else {
                Node::Mul(ts)
            }
        }
        "neg" => {
            arity(1, "one operand")?;
            Node::Neg(from_tree(&args[0])?)
        }
        "pow" => {
            arity(2, "a base and an integer exponent")?;
            Node::Pow(from_tree(&args[0])?, parse_int(&args[1])?)
        }
        "exp" | "sin" | "cos" => {
            arity(1, "one operand")?;
            let f = match op {
                "exp" => Analytic::Exp,
                "sin" => Analytic::Sin,
                _ => Analytic::Cos,
            };
            Node::Apply(f, from_tree(&args[0])?)
        }
        "glue" => {
            arity(3, "numerator and denominator coefficient lists and an operand")?;
            let r = GlueFactor::new(poly(&args[0])?, poly(&args[1])?)
                .ok_or_else(|| SexprError::Number("zero glue denominator".into()))?;
            Node::Glue(r, from_tree(&args[2])?)
        }
        other => return Err(SexprError::UnknownOperator(other.into())),
    };
    Ok(SmoothExpr::from_node(node))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_and_reads_back() {
        let x = SmoothExpr::coord(0);
        let e = ((x.clone() * SmoothExpr::constant(Scalar::ratio(3, 4))).sin() + x.pow(-2)).simplified();
        let s = print(&e);
        assert_eq!(parse(&s).unwrap(), e);
    }

    #[test]
    fn reals_stay_real() {
        let e = SmoothExpr::constant(Scalar::real(2.0));
        assert_eq!(print(&e), "(const 2.0)");
        assert_eq!(parse("(const 2.0)").unwrap(), e);
        assert_eq!(parse("(const 2)").unwrap(), SmoothExpr::int(2));
        assert_eq!(parse("(const -1/2)").unwrap(), SmoothExpr::constant(Scalar::ratio(-1, 2)));
        for v in [-0.24831128130457686, 1e-300, 6.02e23] {
            let e = SmoothExpr::constant(Scalar::real(v));
            assert_eq!(parse(&print(&e)).unwrap(), e);
        }
    }

    #[test]
    fn glue_factors() {
        let e = parse("(glue (0 1) (1) (coord 0))").unwrap();
        assert_eq!(print(&e), "(glue (0 1) (1) (coord 0))");
        assert!(parse("(glue (1) () (coord 0))").is_err());
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("(tan (coord 0))"), Err(SexprError::UnknownOperator(_))));
        assert!(matches!(parse("(neg)"), Err(SexprError::Arity { .. })));
        assert!(matches!(parse("(+ (coord 0)"), Err(SexprError::Syntax(_))));
        assert!(matches!(parse("(coord x)"), Err(SexprError::Number(_))));
        assert!(matches!(parse("(coord 0))"), Err(SexprError::Syntax(_))));
        assert!(matches!(parse("(const 1/0)"), Err(SexprError::Number(_))));
    }
}
