//! Univariate polynomials with rational coefficients and the rational
//! prefactors carried by the glue primitive `r(t)·exp(-1/t)`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Zero};

use crate::scalar::{rat_to_f64, Rational};

/// Coefficients from the constant term upwards, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

fn checked(r: Option<Rational>) -> Rational {
    r.expect("rational coefficient overflow in glue prefactor")
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    /// `c·t^k`
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// `Some((c, k))` when the polynomial is exactly `c·t^k`.
    pub fn as_monomial(&self) -> Option<(Rational, usize)> {
        let k = self.degree()?;
        if self.coeffs[..k].iter().all(|c| c.is_zero()) {
            Some((self.coeffs[k], k))
        } else {
            None
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + rat_to_f64(*c))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = Rational::zero();
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&z);
                let b = other.coeffs.get(i).unwrap_or(&z);
                checked(a.checked_add(b))
            })
            .collect();
        Poly::new(coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = Rational::zero();
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&z);
                let b = other.coeffs.get(i).unwrap_or(&z);
                checked(a.checked_sub(b))
            })
            .collect();
        Poly::new(coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::new(Vec::new());
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = checked(out[i + j].checked_add(&checked(a.checked_mul(b))));
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: Rational) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| checked(a.checked_mul(&c))).collect())
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.extend_from_slice(&self.coeffs);
        Poly::new(coeffs)
    }

    pub fn derivative(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| checked(c.checked_mul(&Rational::from_integer(i as i64))))
            .collect();
        Poly::new(coeffs)
    }
}

/// The prefactor `r = num/den` of a glue primitive. The denominator may only
/// vanish at `t = 0`; constructions keep it a monomial `c·t^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlueFactor {
    num: Poly,
    den: Poly,
}

impl GlueFactor {
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(GlueFactor { num, den })
    }

    /// `r = 1`, giving the plain `exp(-1/t)` primitive.
    pub fn one() -> Self {
        GlueFactor {
            num: Poly::constant(Rational::from_integer(1)),
            den: Poly::constant(Rational::from_integer(1)),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Prefactor of `d/dt [r(t) exp(-1/t)] = (r' + r/t²) exp(-1/t)`.
    pub fn derivative(&self) -> GlueFactor {
        let p = &self.num;
        if let Some((c, k)) = self.den.as_monomial() {
            // r = p/(c t^k):  r' + r/t² = (t² p' - k t p + p) / (c t^(k+2))
            let num = p
                .derivative()
                .shift(2)
                .sub(&p.shift(1).scale(Rational::from_integer(k as i64)))
                .add(p);
            return GlueFactor {
                num,
                den: Poly::monomial(c, k + 2),
            };
        }
        let q = &self.den;
        let num = p
            .derivative()
            .mul(q)
            .sub(&p.mul(&q.derivative()))
            .shift(2)
            .add(&p.mul(q));
        GlueFactor {
            num,
            den: q.mul(q).shift(2),
        }
    }

    /// `r(t)·exp(-1/t)` for `t > 0`, exactly `0` otherwise.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || self.num.is_zero() {
            return 0.0;
        }
        let e = libm::exp(-1.0 / t);
        if e == 0.0 {
            // r grows at most polynomially in 1/t, far slower than the decay
            return 0.0;
        }
        self.num.eval(t) / self.den.eval(t) * e
    }
}

impl PartialOrd for GlueFactor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GlueFactor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.num
            .cmp(&other.num)
            .then_with(|| self.den.cmp(&other.den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn glue_derivative_matches_chain_rule() {
        // d/dt exp(-1/t) = exp(-1/t)/t²
        let d = GlueFactor::one().derivative();
        assert_eq!(d.num(), &Poly::constant(r(1)));
        assert_eq!(d.den(), &Poly::monomial(r(1), 2));
        for &t in &[0.5, 1.0, 2.0] {
            let h = 1e-5;
            let g = GlueFactor::one();
            let fd = (g.eval(t + h) - g.eval(t - h)) / (2.0 * h);
            assert!((d.eval(t) - fd).abs() <= 1e-6 * fd.abs());
        }
    }

    #[test]
    fn general_denominator_derivative_agrees_with_monomial_path() {
        let mono = GlueFactor::new(Poly::constant(r(1)), Poly::monomial(r(1), 1)).unwrap();
        // same function written as t/t²
        let general =
            GlueFactor::new(Poly::monomial(r(1), 1), Poly::new(vec![r(0), r(0), r(1)])).unwrap();
        let a = mono.derivative();
        let b = general.derivative();
        for &t in &[0.3, 0.9, 1.7] {
            assert!((a.eval(t) - b.eval(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn glue_is_zero_off_positive_axis() {
        let g = GlueFactor::one();
        assert_eq!(g.eval(-3.0), 0.0);
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(1e-300), 0.0);
        assert!((g.eval(1.0) - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn monomial_detection() {
        assert_eq!(Poly::monomial(r(3), 2).as_monomial(), Some((r(3), 2)));
        assert_eq!(Poly::new(vec![r(1), r(1)]).as_monomial(), None);
    }
}
