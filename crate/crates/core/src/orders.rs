//! Right-directed index orders (ℕ and ℕ×ℕ) and cofinal embeddings.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexOrder {
    /// ℕ with its total order.
    Nat,
    /// ℕ×ℕ ordered componentwise.
    NatPair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    Nat(u64),
    Pair(u64, u64),
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Nat(l) => write!(f, "{l}"),
            Index::Pair(l, k) => write!(f, "({l},{k})"),
        }
    }
}

impl Index {
    pub fn order(&self) -> IndexOrder {
        match self {
            Index::Nat(_) => IndexOrder::Nat,
            Index::Pair(..) => IndexOrder::NatPair,
        }
    }
}

/// Unranks `i` along the anti-diagonals of ℕ×ℕ: (0,0), (1,0), (0,1), (2,0), …
fn diagonal_unrank(i: u64) -> (u64, u64) {
    let mut d = 0u64;
    let mut start = 0u64;
    while start + d < i {
        start += d + 1;
        d += 1;
    }
    let j = i - start;
    (d - j, j)
}

impl IndexOrder {
    pub fn least(self) -> Index {
        match self {
            IndexOrder::Nat => Index::Nat(0),
            IndexOrder::NatPair => Index::Pair(0, 0),
        }
    }

    pub fn contains(self, a: &Index) -> bool {
        a.order() == self
    }

    /// The partial order; `None` when the elements are incomparable or
    /// belong to another order.
    pub fn compare(self, a: &Index, b: &Index) -> Option<Ordering> {
        match (self, a, b) {
            (IndexOrder::Nat, Index::Nat(x), Index::Nat(y)) => Some(x.cmp(y)),
            (IndexOrder::NatPair, Index::Pair(a0, a1), Index::Pair(b0, b1)) => {
                match (a0.cmp(b0), a1.cmp(b1)) {
                    (x, y) if x == y => Some(x),
                    (Ordering::Equal, y) => Some(y),
                    (x, Ordering::Equal) => Some(x),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    pub fn leq(self, a: &Index, b: &Index) -> bool {
        matches!(self.compare(a, b), Some(Ordering::Less | Ordering::Equal))
    }

    /// Least upper bound: max on ℕ, componentwise max on ℕ×ℕ.
    pub fn join(self, a: &Index, b: &Index) -> Index {
        match (a, b) {
            (Index::Nat(x), Index::Nat(y)) => Index::Nat(*x.max(y)),
            (Index::Pair(a0, a1), Index::Pair(b0, b1)) => Index::Pair(*a0.max(b0), *a1.max(b1)),
            _ => panic!("join of indices from different orders: {a} and {b} in {self:?}"),
        }
    }

    /// The `i`-th element of the canonical enumeration.
    pub fn nth(self, i: u64) -> Index {
        match self {
            IndexOrder::Nat => Index::Nat(i),
            IndexOrder::NatPair => {
                let (l, k) = diagonal_unrank(i);
                Index::Pair(l, k)
            }
        }
    }

    pub fn enumerate(self, n: usize) -> Vec<Index> {
        (0..n as u64).map(|i| self.nth(i)).collect()
    }

    /// `n` elements `μ >= base`, offsets taken in canonical order.
    pub fn probes_above(self, base: &Index, n: usize) -> Vec<Index> {
        (0..n as u64)
            .map(|i| match (self.nth(i), base) {
                (Index::Nat(o), Index::Nat(b)) => Index::Nat(b.saturating_add(o)),
                (Index::Pair(o0, o1), Index::Pair(b0, b1)) => {
                    Index::Pair(b0.saturating_add(o0), b1.saturating_add(o1))
                }
                _ => panic!("probe base {base} is not in {self:?}"),
            })
            .collect()
    }
}

/// Order-preserving cofinal map between index orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CofinalEmbedding {
    Identity(IndexOrder),
    /// ℕ → ℕ×ℕ, `l ↦ (l, l)`.
    Diagonal,
}

impl CofinalEmbedding {
    pub fn diagonal() -> Self {
        CofinalEmbedding::Diagonal
    }

    pub fn source(&self) -> IndexOrder {
        match self {
            CofinalEmbedding::Identity(o) => *o,
            CofinalEmbedding::Diagonal => IndexOrder::Nat,
        }
    }

    pub fn target(&self) -> IndexOrder {
        match self {
            CofinalEmbedding::Identity(o) => *o,
            CofinalEmbedding::Diagonal => IndexOrder::NatPair,
        }
    }

    pub fn map(&self, a: &Index) -> Index {
        match (self, a) {
            (CofinalEmbedding::Identity(_), _) => *a,
            (CofinalEmbedding::Diagonal, Index::Nat(l)) => Index::Pair(*l, *l),
            _ => panic!("{a} is not in the source of {self:?}"),
        }
    }

    /// Least source element whose image dominates `target`.
    pub fn dominate(&self, target: &Index) -> Index {
        match (self, target) {
            (CofinalEmbedding::Identity(_), _) => *target,
            (CofinalEmbedding::Diagonal, Index::Pair(l, k)) => Index::Nat(*l.max(k)),
            _ => panic!("{target} is not in the target of {self:?}"),
        }
    }

    /// Least `l ∈ ℕ` with `target <= map(l)`, for embeddings of ℕ.
    pub fn dominating_nat(&self, target: &Index) -> Option<u64> {
        if self.source() != IndexOrder::Nat {
            return None;
        }
        match self.dominate(target) {
            Index::Nat(l) => Some(l),
            Index::Pair(..) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair() -> impl Strategy<Value = Index> {
        (0u64..20, 0u64..20).prop_map(|(l, k)| Index::Pair(l, k))
    }

    #[test]
    fn joins() {
        assert_eq!(IndexOrder::Nat.join(&Index::Nat(3), &Index::Nat(5)), Index::Nat(5));
        assert_eq!(IndexOrder::Nat.join(&Index::Nat(4), &Index::Nat(4)), Index::Nat(4));
        assert_eq!(
            IndexOrder::NatPair.join(&Index::Pair(2, 7), &Index::Pair(5, 1)),
            Index::Pair(5, 7)
        );
    }

    #[test]
    fn diagonal_embedding() {
        let e = CofinalEmbedding::diagonal();
        assert_eq!(e.map(&Index::Nat(3)), Index::Pair(3, 3));
        assert_eq!(e.dominate(&Index::Pair(2, 9)), Index::Nat(9));
        assert!(IndexOrder::NatPair.leq(&Index::Pair(2, 9), &e.map(&Index::Nat(9))));
        assert!(IndexOrder::NatPair.leq(&e.map(&Index::Nat(1)), &e.map(&Index::Nat(4))));
    }

    #[test]
    fn enumeration_is_injective() {
        let v = IndexOrder::NatPair.enumerate(55);
        for (i, a) in v.iter().enumerate() {
            assert!(!v[i + 1..].contains(a));
        }
        assert_eq!(v[..4], [Index::Pair(0, 0), Index::Pair(1, 0), Index::Pair(0, 1), Index::Pair(2, 0)]);
    }

    #[test]
    fn probes_dominate_base() {
        let base = Index::Pair(3, 4);
        for p in IndexOrder::NatPair.probes_above(&base, 8) {
            assert!(IndexOrder::NatPair.leq(&base, &p));
        }
    }

    proptest! {
        #[test]
        fn pair_order_axioms(a in pair(), b in pair(), c in pair()) {
            let o = IndexOrder::NatPair;
            prop_assert!(o.leq(&a, &a));
            if o.leq(&a, &b) && o.leq(&b, &a) { prop_assert_eq!(a, b); }
            if o.leq(&a, &b) && o.leq(&b, &c) { prop_assert!(o.leq(&a, &c)); }
            let j = o.join(&a, &b);
            prop_assert!(o.leq(&a, &j) && o.leq(&b, &j));
        }

        #[test]
        fn nat_order_axioms(a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
            let o = IndexOrder::Nat;
            let (a, b, c) = (Index::Nat(a), Index::Nat(b), Index::Nat(c));
            prop_assert!(o.leq(&a, &a));
            if o.leq(&a, &b) && o.leq(&b, &a) { prop_assert_eq!(a, b); }
            if o.leq(&a, &b) && o.leq(&b, &c) { prop_assert!(o.leq(&a, &c)); }
            prop_assert!(o.compare(&a, &b).is_some());
            let j = o.join(&a, &b);
            prop_assert!(o.leq(&a, &j) && o.leq(&b, &j));
        }

        #[test]
        fn diagonal_is_cofinal_and_monotone(t in pair(), l in 0u64..50, m in 0u64..50) {
            let e = CofinalEmbedding::diagonal();
            let s = e.dominate(&t);
            prop_assert!(IndexOrder::NatPair.leq(&t, &e.map(&s)));
            if l <= m {
                prop_assert!(IndexOrder::NatPair.leq(&e.map(&Index::Nat(l)), &e.map(&Index::Nat(m))));
            }
        }
    }
}
