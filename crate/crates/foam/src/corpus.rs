//! Seeded random corpora of smooth functions and ideal members.

use foam_core::singular::{points_polynomial, SingularKind};
use foam_core::{FoamSequence, IdealDescriptor, IdealMode, IndexOrder, OpenSet, Point, Scalar, SingularSet, SmoothExpr};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Corpus {
    rng: ChaCha8Rng,
    dim: usize,
    domain: OpenSet,
    order: IndexOrder,
    /// Defining functions whose zero sets lie in Σ.
    sigmas: Vec<SmoothExpr>,
}

fn small_rational(rng: &mut ChaCha8Rng, max: i64) -> Scalar {
    Scalar::ratio(rng.gen_range(-max..=max), rng.gen_range(1..=4))
}

/// Defining functions for pieces of Σ usable by plateau members.
fn sigma_pieces(sigma: &SingularSet) -> Vec<SmoothExpr> {
    match sigma.kind() {
        SingularKind::FinitePoints(pts) => {
            let mut out: Vec<SmoothExpr> = pts.iter().map(|p| points_polynomial(std::slice::from_ref(p))).collect();
            if pts.len() > 1 {
                out.push(points_polynomial(pts));
            }
            out
        }
        SingularKind::ZeroSet { sigma, .. } => vec![sigma.clone()],
        SingularKind::CountableUnion(parts) => parts.iter().flat_map(sigma_pieces).collect(),
        _ => Vec::new(),
    }
}

impl Corpus {
    /// `ideal` supplies Σ (single mode) or the family generators.
    pub fn new(seed: u64, ideal: &IdealDescriptor) -> Self {
        let sigmas = match &ideal.mode {
            IdealMode::Single(s) => sigma_pieces(s),
            IdealMode::Family(f) => f.generators().iter().flat_map(sigma_pieces).collect(),
        };
        Corpus {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dim: ideal.domain.dim(),
            domain: ideal.domain.clone(),
            order: ideal.order,
            sigmas,
        }
    }

    pub fn has_members(&self) -> bool {
        !self.sigmas.is_empty()
    }

    /// A random smooth function of a random coordinate.
    pub fn smooth(&mut self) -> SmoothExpr {
        let axis = self.rng.gen_range(0..self.dim);
        let x = SmoothExpr::coord(axis);
        let a = SmoothExpr::constant(small_rational(&mut self.rng, 3));
        let b = SmoothExpr::constant(small_rational(&mut self.rng, 3));
        let k = SmoothExpr::int(self.rng.gen_range(1..=3));
        match self.rng.gen_range(0..6) {
            0 => a + b * x,
            1 => (k * x).sin() + a,
            2 => (k * x.clone()).cos() * x,
            3 => (b * x).exp(),
            4 => {
                let c = x - a;
                (SmoothExpr::one() - SmoothExpr::int(4) * c.pow(2)).glue_unit() + b
            }
            _ => x.clone() * x + a,
        }
        .simplified()
    }

    /// A random member of the ideal: a plateau on a piece of Σ, possibly
    /// scaled by a smooth function.
    pub fn member(&mut self) -> Option<FoamSequence> {
        let sigma = self.sigmas.choose(&mut self.rng)?.clone();
        let base = match self.order {
            IndexOrder::Nat => FoamSequence::plateau(self.domain.clone(), sigma).ok()?,
            IndexOrder::NatPair => FoamSequence::baire_plateau(self.domain.clone(), vec![sigma]).ok()?,
        };
        if self.rng.gen_bool(0.5) {
            let psi = self.smooth();
            let s = FoamSequence::diagonal(self.order, self.domain.clone(), psi).ok()?;
            s.mul(&base).ok()
        } else {
            Some(base)
        }
    }

    pub fn point(&mut self) -> Point {
        let w = self.domain.boxes()[0].sides.iter().map(|s| s.window()).collect::<Vec<_>>();
        Point(w.iter().map(|&(lo, hi)| self.rng.gen_range(lo..hi)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal() -> IdealDescriptor {
        let d = OpenSet::interval_i(-1, 1).unwrap();
        let s = SingularSet::points(d, vec![Point(vec![0.0]), Point(vec![0.5])]).unwrap();
        IdealDescriptor::single(IndexOrder::Nat, s).unwrap()
    }

    #[test]
    fn seeded_corpora_repeat() {
        let mut a = Corpus::new(7, &ideal());
        let mut b = Corpus::new(7, &ideal());
        for _ in 0..10 {
            assert_eq!(a.smooth(), b.smooth());
        }
        assert!(a.has_members());
        assert_eq!(a.member().unwrap().describe(), b.member().unwrap().describe());
    }

    #[test]
    fn members_are_members() {
        let d = ideal();
        let mut c = Corpus::new(0, &d);
        for _ in 0..4 {
            let w = c.member().unwrap();
            let m = foam_core::check_membership(&w, &d, &Default::default()).unwrap();
            assert!(m.is_verified(), "{}", w.describe());
        }
    }
}
