//! Points, multi-indices and open sets given as finite unions of open boxes.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Deref;

use crate::error::{FoamError, Result};
use crate::scalar::{rat_to_f64, Rational};

/// Half-width used in place of an infinite side when sampling.
pub const UNBOUNDED_WINDOW: f64 = 10.0;

/// Irrational offset placing samples inside grid cells. Any enumeration of
/// rationals with bounded denominators misses these points.
pub const SAMPLE_OFFSET: f64 = core::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        libm::sqrt(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        )
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Derivative orders per axis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(orders: Vec<u32>) -> Self {
        MultiIndex(orders)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = vec![0; dim];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn orders(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// All multi-indices of dimension `dim` with `|p| <= max_order`, ordered
    /// by total order and then lexicographically.
    pub fn up_to(dim: usize, max_order: u32) -> Vec<MultiIndex> {
        fn fill(dim: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() == dim {
                out.push(MultiIndex(prefix.clone()));
                return;
            }
            for k in 0..=remaining {
                prefix.push(k);
                fill(dim, remaining - k, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        fill(dim, max_order, &mut Vec::new(), &mut out);
        out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| b.0.cmp(&a.0)));
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl Bound {
    pub fn finite(num: i64, den: i64) -> Self {
        Bound::Finite(Rational::new(num, den))
    }

    pub fn int(v: i64) -> Self {
        Bound::Finite(Rational::from_integer(v))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Bound::NegInf => f64::NEG_INFINITY,
            Bound::Finite(r) => rat_to_f64(r),
            Bound::PosInf => f64::INFINITY,
        }
    }

    pub fn as_finite(self) -> Option<Rational> {
        match self {
            Bound::Finite(r) => Some(r),
            _ => None,
        }
    }

    fn key(self) -> (u8, Rational) {
        match self {
            Bound::NegInf => (0, Rational::from_integer(0)),
            Bound::Finite(r) => (1, r),
            Bound::PosInf => (2, Rational::from_integer(0)),
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Open interval `(lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    pub fn new(lo: Bound, hi: Bound) -> Self {
        Interval { lo, hi }
    }

    pub fn ints(lo: i64, hi: i64) -> Self {
        Interval::new(Bound::int(lo), Bound::int(hi))
    }

    pub fn is_nonvoid(&self) -> bool {
        self.lo < self.hi && self.lo != Bound::PosInf && self.hi != Bound::NegInf
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo.to_f64() < v && v < self.hi.to_f64()
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Finite window used for sampling: infinite sides are replaced by
    /// `UNBOUNDED_WINDOW` around the finite end, or around the origin.
    pub fn window(&self) -> (f64, f64) {
        match (self.lo, self.hi) {
            (Bound::Finite(a), Bound::Finite(b)) => (rat_to_f64(a), rat_to_f64(b)),
            (Bound::Finite(a), _) => (rat_to_f64(a), rat_to_f64(a) + UNBOUNDED_WINDOW),
            (_, Bound::Finite(b)) => (rat_to_f64(b) - UNBOUNDED_WINDOW, rat_to_f64(b)),
            _ => (-UNBOUNDED_WINDOW, UNBOUNDED_WINDOW),
        }
    }
}

/// Axis-aligned open box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxRegion {
    pub sides: Vec<Interval>,
}

/// A grid cell of a sampling window (closed, in floating point).
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Cell {
    /// Point at relative position `frac ∈ (0,1)` along every axis.
    pub fn at(&self, frac: f64) -> Point {
        Point(
            self.lo
                .iter()
                .zip(&self.hi)
                .map(|(a, b)| a + frac * (b - a))
                .collect(),
        )
    }

    pub fn center(&self) -> Point {
        self.at(0.5)
    }
}

impl BoxRegion {
    pub fn new(sides: Vec<Interval>) -> Self {
        BoxRegion { sides }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn is_nonvoid(&self) -> bool {
        !self.sides.is_empty() && self.sides.iter().all(Interval::is_nonvoid)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.sides.len() && self.sides.iter().zip(x).all(|(s, v)| s.contains(*v))
    }

    pub fn intersect(&self, other: &BoxRegion) -> BoxRegion {
        BoxRegion::new(
            self.sides
                .iter()
                .zip(&other.sides)
                .map(|(a, b)| a.intersect(b))
                .collect(),
        )
    }

    pub fn is_subset_of(&self, other: &BoxRegion) -> bool {
        self.sides.len() == other.sides.len()
            && self.sides.iter().zip(&other.sides).all(|(a, b)| a.is_subset_of(b))
    }

    /// `n` cells per axis over the sampling window.
    pub fn cells(&self, n: usize) -> Vec<Cell> {
        let windows: Vec<(f64, f64)> = self.sides.iter().map(Interval::window).collect();
        let dim = windows.len();
        let total = n.pow(dim as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut lo = Vec::with_capacity(dim);
            let mut hi = Vec::with_capacity(dim);
            for &(a, b) in &windows {
                let i = rem % n;
                rem /= n;
                let h = (b - a) / n as f64;
                lo.push(a + i as f64 * h);
                hi.push(a + (i + 1) as f64 * h);
            }
            out.push(Cell { lo, hi });
        }
        out
    }
}

/// Nonvoid open subset of ℝⁿ given as a finite union of open boxes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenSet {
    dim: usize,
    boxes: Vec<BoxRegion>,
}

impl OpenSet {
    pub fn new(boxes: Vec<BoxRegion>) -> Result<Self> {
        let boxes: Vec<BoxRegion> = boxes.into_iter().filter(BoxRegion::is_nonvoid).collect();
        let dim = boxes.first().ok_or(FoamError::EmptySet)?.dim();
        if boxes.iter().any(|b| b.dim() != dim) {
            return Err(FoamError::Invalid("boxes of different dimensions".into()));
        }
        Ok(OpenSet { dim, boxes })
    }

    pub fn from_box(b: BoxRegion) -> Result<Self> {
        OpenSet::new(vec![b])
    }

    /// One-dimensional open interval with integer or rational ends.
    pub fn interval(lo: Bound, hi: Bound) -> Result<Self> {
        OpenSet::from_box(BoxRegion::new(vec![Interval::new(lo, hi)]))
    }

    pub fn interval_i(lo: i64, hi: i64) -> Result<Self> {
        OpenSet::interval(Bound::int(lo), Bound::int(hi))
    }

    pub fn cube(lo: Bound, hi: Bound, dim: usize) -> Result<Self> {
        OpenSet::from_box(BoxRegion::new(vec![Interval::new(lo, hi); dim]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[BoxRegion] {
        &self.boxes
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    pub fn intersect(&self, other: &OpenSet) -> Option<OpenSet> {
        if self.dim != other.dim {
            return None;
        }
        let mut boxes = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                let c = a.intersect(b);
                if c.is_nonvoid() && !boxes.contains(&c) {
                    boxes.push(c);
                }
            }
        }
        OpenSet::new(boxes).ok()
    }

    /// Containment: exact when every box lies in a single box of `other`,
    /// otherwise decided on a sampling grid.
    pub fn is_subset_of(&self, other: &OpenSet) -> bool {
        if self.dim != other.dim {
            return false;
        }
        self.boxes.iter().all(|b| {
            other.boxes.iter().any(|o| b.is_subset_of(o))
                || b.cells(24).iter().all(|c| {
                    [0.5, 0.02, 0.98, SAMPLE_OFFSET]
                        .iter()
                        .all(|&f| other.contains(&c.at(f)))
                })
        })
    }

    /// Cells of a grid with `n` cells per axis on every box.
    pub fn cells(&self, n: usize) -> Vec<Cell> {
        self.boxes.iter().flat_map(|b| b.cells(n)).collect()
    }

    /// Cell centres; every point lies in the set.
    pub fn grid(&self, n: usize) -> Vec<Point> {
        self.cells(n).iter().map(Cell::center).collect()
    }

    /// `{x + c | x ∈ self}`.
    pub fn translate(&self, c: &[Rational]) -> OpenSet {
        let shift = |b: Bound, d: Rational| match b {
            Bound::Finite(v) => Bound::Finite(v + d),
            other => other,
        };
        OpenSet {
            dim: self.dim,
            boxes: self
                .boxes
                .iter()
                .map(|b| {
                    BoxRegion::new(
                        b.sides
                            .iter()
                            .zip(c)
                            .map(|(s, d)| Interval::new(shift(s.lo, *d), shift(s.hi, *d)))
                            .collect(),
                    )
                })
                .collect(),
        }
    }

    /// Cell centres computed in exact arithmetic on bounded sides, so that
    /// e.g. an odd grid on `(-1, 1)` contains `0` exactly.
    pub fn exact_grid(&self, n: usize) -> Vec<Point> {
        let mut out = Vec::new();
        for b in &self.boxes {
            let dim = b.sides.len();
            let total = n.pow(dim as u32);
            for flat in 0..total {
                let mut rem = flat;
                let mut p = Vec::with_capacity(dim);
                for side in &b.sides {
                    let i = rem % n;
                    rem /= n;
                    let v = match (side.lo.as_finite(), side.hi.as_finite()) {
                        (Some(lo), Some(hi)) => rat_to_f64(
                            lo + (hi - lo) * Rational::new(2 * i as i64 + 1, 2 * n as i64),
                        ),
                        _ => {
                            let (a, c) = side.window();
                            a + (i as f64 + 0.5) * (c - a) / n as f64
                        }
                    };
                    p.push(v);
                }
                out.push(Point(p));
            }
        }
        out
    }

    /// One point per cell at the irrational offset `SAMPLE_OFFSET`.
    pub fn sample_points(&self, n: usize) -> Vec<Point> {
        self.cells(n).iter().map(|c| c.at(SAMPLE_OFFSET)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_indices_up_to_order() {
        assert_eq!(MultiIndex::up_to(1, 4).len(), 5);
        assert_eq!(MultiIndex::up_to(2, 4).len(), 15);
        assert_eq!(MultiIndex::up_to(2, 2)[0], MultiIndex::zero(2));
    }

    #[test]
    fn membership_is_strict() {
        let v = OpenSet::interval_i(-1, 1).unwrap();
        assert!(v.contains(&[0.0]));
        assert!(!v.contains(&[1.0]));
        assert!(!v.contains(&[-1.0]));
    }

    #[test]
    fn empty_sets_are_rejected() {
        assert_eq!(OpenSet::interval_i(1, 1), Err(FoamError::EmptySet));
    }

    #[test]
    fn intersections_and_subsets() {
        let a = OpenSet::interval_i(-1, 1).unwrap();
        let b = OpenSet::interval(Bound::finite(1, 2), Bound::int(2)).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!(c, OpenSet::interval(Bound::finite(1, 2), Bound::int(1)).unwrap());
        assert!(c.is_subset_of(&a));
        assert!(!b.is_subset_of(&a));
        let union = OpenSet::new(vec![
            BoxRegion::new(vec![Interval::ints(-1, 0)]),
            BoxRegion::new(vec![Interval::new(Bound::finite(-1, 2), Bound::int(1))]),
        ])
        .unwrap();
        assert!(OpenSet::interval(Bound::finite(-3, 4), Bound::finite(3, 4))
            .unwrap()
            .is_subset_of(&union));
    }

    #[test]
    fn grids_stay_inside() {
        let v = OpenSet::cube(Bound::int(-1), Bound::int(2), 2).unwrap();
        let g = v.sample_points(8);
        assert_eq!(g.len(), 64);
        assert!(g.iter().all(|p| v.contains(p)));
    }

    #[test]
    fn unbounded_sides_are_windowed() {
        let v = OpenSet::interval(Bound::int(0), Bound::PosInf).unwrap();
        let g = v.grid(10);
        assert!(g.iter().all(|p| p[0] > 0.0 && p[0] < UNBOUNDED_WINDOW));
    }
}
