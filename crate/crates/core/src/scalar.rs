//! Exact rationals with a double-precision fallback.

use core::cmp::Ordering;
use core::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i64>;

/// A constant: exact rational whenever arithmetic stays in range, otherwise
/// a double.
#[derive(Clone, Copy, Debug)]
pub enum Scalar {
    Rat(Rational),
    Real(f64),
}

impl Scalar {
    pub fn int(v: i64) -> Self {
        Scalar::Rat(Rational::from_integer(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Rat(Rational::new(num, den))
    }

    pub fn real(v: f64) -> Self {
        // -0.0 and 0.0 must compare equal structurally
        Scalar::Real(if v == 0.0 { 0.0 } else { v })
    }

    pub fn zero() -> Self {
        Scalar::int(0)
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Scalar::Rat(r) => rat_to_f64(r),
            Scalar::Real(v) => v,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Real(v) => v == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Real(v) => v == 1.0,
        }
    }

    pub fn add(self, other: Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => match a.checked_add(&b) {
                Some(r) => Scalar::Rat(r),
                None => Scalar::real(rat_to_f64(a) + rat_to_f64(b)),
            },
            (a, b) => Scalar::real(a.to_f64() + b.to_f64()),
        }
    }

    pub fn mul(self, other: Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => match a.checked_mul(&b) {
                Some(r) => Scalar::Rat(r),
                None => Scalar::real(rat_to_f64(a) * rat_to_f64(b)),
            },
            (a, b) => Scalar::real(a.to_f64() * b.to_f64()),
        }
    }

    pub fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Real(v) => Scalar::real(-v),
        }
    }

    /// Integer power; `None` for a negative power of zero.
    pub fn powi(self, n: i32) -> Option<Scalar> {
        if n < 0 {
            if self.is_zero() {
                return None;
            }
            let inv = match self {
                Scalar::Rat(r) => Scalar::Rat(r.recip()),
                Scalar::Real(v) => Scalar::real(1.0 / v),
            };
            return inv.powi(-n);
        }
        let mut acc = Scalar::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        Some(acc)
    }

    pub fn is_negative(self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_negative(),
            Scalar::Real(v) => v < 0.0,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Scalar::Rat(_) => 0,
            Scalar::Real(_) => 1,
        }
    }
}

pub(crate) fn rat_to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| *r.numer() as f64 / *r.denom() as f64)
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Structural order: rationals before doubles, then by value.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a.cmp(b),
            (Scalar::Real(a), Scalar::Real(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Rat(r)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::real(v)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Scalar::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            // Debug formatting is the shortest round-trip form and always
            // carries a '.' or exponent, keeping doubles distinct from rationals.
            Scalar::Real(v) => write!(f, "{:?}", v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_overflow_falls_back_to_double() {
        let big = Scalar::int(i64::MAX / 2);
        let p = big.mul(Scalar::int(4));
        assert!(matches!(p, Scalar::Real(_)));
        assert!((p.to_f64() - (i64::MAX / 2) as f64 * 4.0).abs() < 1e6);
    }

    #[test]
    fn negative_powers_are_exact() {
        assert_eq!(Scalar::ratio(2, 3).powi(-2), Some(Scalar::ratio(9, 4)));
        assert_eq!(Scalar::zero().powi(-1), None);
        assert_eq!(Scalar::int(5).powi(0), Some(Scalar::one()));
    }

    #[test]
    fn negative_zero_is_zero() {
        assert_eq!(Scalar::real(-0.0), Scalar::real(0.0));
        assert!(Scalar::real(-0.0).is_zero());
    }

    #[test]
    fn display_distinguishes_kinds() {
        assert_eq!(alloc::format!("{}", Scalar::int(3)), "3");
        assert_eq!(alloc::format!("{}", Scalar::ratio(-1, 3)), "-1/3");
        assert_eq!(alloc::format!("{}", Scalar::real(1.0)), "1.0");
    }
}
