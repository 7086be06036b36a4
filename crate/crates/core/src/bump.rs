//! Smooth steps, the transition function η, shrinking plateaus and
//! partitions of unity subordinate to box covers.

use alloc::vec::Vec;

use crate::domain::{BoxRegion, OpenSet, Point};
use crate::error::{FoamError, Result};
use crate::expr::{Evaluator, SmoothExpr};
use crate::scalar::{rat_to_f64, Rational, Scalar};

fn c(v: i64) -> SmoothExpr {
    SmoothExpr::int(v)
}

/// `s(u) = g(u) / (g(u) + g(1-u))` with `g(t) = exp(-1/t)` for `t > 0`:
/// zero for `u <= 0`, one for `u >= 1`, strictly monotone in between.
pub fn smooth_step(u: &SmoothExpr) -> SmoothExpr {
    let g = u.glue_unit();
    let h = (c(1) - u.clone()).glue_unit();
    (g.clone() * (g + h).recip()).simplified()
}

/// η(t) = s(2t-1) + s(-2t-1).
pub fn eta_of(t: &SmoothExpr) -> SmoothExpr {
    let right = c(2) * t.clone() - c(1);
    let left = c(-2) * t.clone() - c(1);
    (smooth_step(&right) + smooth_step(&left)).simplified()
}

/// Even transition function: 0 on `[-1/2, 1/2]`, 1 outside `(-1, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionEta {
    expr: SmoothExpr,
}

impl TransitionEta {
    /// η as an expression in `Coord(0)`.
    pub fn expr(&self) -> &SmoothExpr {
        &self.expr
    }

    pub fn apply(&self, arg: &SmoothExpr) -> SmoothExpr {
        self.expr.substitute(core::slice::from_ref(arg))
    }

    pub fn eval(&self, t: f64) -> f64 {
        Evaluator::new(&[t]).eval(&self.expr)
    }
}

pub fn make_eta() -> TransitionEta {
    TransitionEta {
        expr: eta_of(&SmoothExpr::coord(0)),
    }
}

/// `α_l = 1 - η((l+1)·σ)`: equal to one on the zero set of σ and zero
/// wherever `|σ| >= 1/(l+1)`.
pub fn shrinking_plateau(sigma: &SmoothExpr, l: u64) -> SmoothExpr {
    let scale = SmoothExpr::constant(Scalar::int(l as i64 + 1));
    (c(1) - eta_of(&(scale * sigma.clone()))).simplified()
}

/// Finite smooth partition of unity on `domain`, one function per cover
/// element. The support of `functions[i].0` lies in `cover[functions[i].1]`
/// (relatively closed in `domain`).
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    pub domain: OpenSet,
    pub cover: Vec<OpenSet>,
    pub functions: Vec<(SmoothExpr, usize)>,
    /// Width of the transition layer inside each cut face.
    pub margin: Rational,
    pub locality_radius: f64,
    /// Largest `|Σ α_l - 1|` seen on the verification grid.
    pub max_sum_deviation: f64,
}

impl PartitionOfUnity {
    pub fn sum(&self) -> SmoothExpr {
        SmoothExpr::sum(self.functions.iter().map(|(a, _)| a.clone()).collect()).simplified()
    }

    /// Indices of the partition functions whose cover element contains `x`.
    pub fn active_at(&self, x: &[f64]) -> Vec<usize> {
        (0..self.functions.len())
            .filter(|&l| self.cover[self.functions[l].1].contains(x))
            .collect()
    }
}

/// Grid resolution used to verify partitions of unity.
pub fn verification_resolution(dim: usize) -> usize {
    if dim <= 1 {
        101
    } else {
        21
    }
}

fn face_meets(domain: &OpenSet, b: &BoxRegion, axis: usize, value: f64) -> bool {
    domain.boxes().iter().any(|d| {
        d.sides.iter().enumerate().all(|(k, side)| {
            if k == axis {
                side.contains(value)
            } else {
                side.intersect(&b.sides[k]).is_nonvoid()
            }
        })
    })
}

/// Faces of `b` that must be cut off inside `domain`: `(axis, bound, is_lower)`.
fn cut_faces(domain: &OpenSet, b: &BoxRegion) -> Vec<(usize, Rational, bool)> {
    let mut faces = Vec::new();
    for (k, side) in b.sides.iter().enumerate() {
        if let Some(a) = side.lo.as_finite() {
            if face_meets(domain, b, k, rat_to_f64(a)) {
                faces.push((k, a, true));
            }
        }
        if let Some(z) = side.hi.as_finite() {
            if face_meets(domain, b, k, rat_to_f64(z)) {
                faces.push((k, z, false));
            }
        }
    }
    faces
}

fn box_cutoff(faces: &[(usize, Rational, bool)], delta: Rational) -> SmoothExpr {
    let d = SmoothExpr::constant(Scalar::Rat(delta));
    let inv = SmoothExpr::constant(Scalar::Rat(delta.recip()));
    let mut factors = Vec::new();
    for &(k, a, lower) in faces {
        let x = SmoothExpr::coord(k);
        let a = SmoothExpr::constant(Scalar::Rat(a));
        // zero within `delta` of the face, one beyond `2·delta`
        let u = if lower {
            inv.clone() * (x - a - d.clone())
        } else {
            inv.clone() * (a - d.clone() - x)
        };
        factors.push(smooth_step(&u));
    }
    SmoothExpr::product(factors).simplified()
}

fn in_core(x: &[f64], b: &BoxRegion, faces: &[(usize, Rational, bool)], delta: Rational) -> bool {
    let d2 = 2.0 * rat_to_f64(delta);
    b.contains(x)
        && faces.iter().all(|&(k, a, lower)| {
            let a = rat_to_f64(a);
            if lower {
                x[k] >= a + d2
            } else {
                x[k] <= a - d2
            }
        })
}

fn median_witness(points: &[Point], cover: &[OpenSet], domain: &OpenSet) -> Point {
    let dim = points[0].dim();
    let mut med = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut v: Vec<f64> = points.iter().map(|p| p[k]).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        med.push(if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        });
    }
    let med = Point(med);
    if domain.contains(&med) && !cover.iter().any(|w| w.contains(&med)) {
        med
    } else {
        points[0].clone()
    }
}

/// Partition of unity subordinate to a finite box cover of `domain`.
///
/// With cut-offs χ_i equal to one on a shrunken core of `cover[i]`, the
/// functions are `α_1 = χ_1` and `α_j = (1-χ_1)···(1-χ_{j-1})·χ_j`, so
/// `Σ α_j = 1 - Π(1-χ_i)` is exactly one wherever some core is reached.
pub fn partition_of_unity(
    domain: &OpenSet,
    cover: &[OpenSet],
    locality_radius: f64,
) -> Result<PartitionOfUnity> {
    if cover.is_empty() {
        return Err(FoamError::EmptyCover);
    }
    if !(locality_radius > 0.0) {
        return Err(FoamError::Invalid("locality radius must be positive".into()));
    }
    if cover.iter().any(|w| w.dim() != domain.dim()) {
        return Err(FoamError::Invalid("cover dimension differs from domain".into()));
    }
    let dim = domain.dim();
    let res = if dim == 1 { 100 } else { 24 };
    let grid = domain.grid(res);
    let uncovered: Vec<Point> = grid
        .iter()
        .filter(|p| !cover.iter().any(|w| w.contains(p)))
        .cloned()
        .collect();
    if !uncovered.is_empty() {
        return Err(FoamError::NotACover {
            witness: median_witness(&uncovered, cover, domain),
        });
    }

    let faces: Vec<Vec<Vec<(usize, Rational, bool)>>> = cover
        .iter()
        .map(|w| w.boxes().iter().map(|b| cut_faces(domain, b)).collect())
        .collect();

    let mut delta: Option<Rational> = None;
    for (w, fw) in cover.iter().zip(&faces) {
        for (b, fb) in w.boxes().iter().zip(fw) {
            for &(k, _, _) in fb {
                let side = b.sides[k];
                let width = match (side.lo.as_finite(), side.hi.as_finite()) {
                    (Some(a), Some(z)) => z - a,
                    _ => Rational::from_integer(1),
                };
                let cand = width / Rational::from_integer(8);
                delta = Some(delta.map_or(cand, |d: Rational| d.min(cand)));
            }
        }
    }
    let mut delta = delta.unwrap_or_else(|| Rational::new(1, 8));

    let check_grid = domain.grid(if dim == 1 { 512 } else { 48 });
    let covered_by_cores = |delta: Rational| {
        check_grid.iter().all(|x| {
            cover.iter().zip(&faces).any(|(w, fw)| {
                w.boxes()
                    .iter()
                    .zip(fw)
                    .any(|(b, fb)| in_core(x, b, fb, delta))
            })
        })
    };
    let mut halvings = 0;
    while !covered_by_cores(delta) {
        halvings += 1;
        if halvings > 30 {
            return Err(FoamError::NotACover {
                witness: check_grid[0].clone(),
            });
        }
        delta /= Rational::from_integer(2);
    }

    let chis: Vec<SmoothExpr> = cover
        .iter()
        .zip(&faces)
        .map(|(w, fw)| {
            let per_box: Vec<SmoothExpr> = w
                .boxes()
                .iter()
                .zip(fw)
                .map(|(_, fb)| box_cutoff(fb, delta))
                .collect();
            if per_box.len() == 1 {
                per_box[0].clone()
            } else {
                let miss = SmoothExpr::product(
                    per_box.into_iter().map(|chi| c(1) - chi).collect(),
                );
                (c(1) - miss).simplified()
            }
        })
        .collect();

    let mut functions = Vec::with_capacity(chis.len());
    for (j, chi) in chis.iter().enumerate() {
        let mut factors: Vec<SmoothExpr> = chis[..j].iter().map(|x| c(1) - x.clone()).collect();
        factors.push(chi.clone());
        functions.push((SmoothExpr::product(factors).simplified(), j));
    }

    let mut pou = PartitionOfUnity {
        domain: domain.clone(),
        cover: cover.to_vec(),
        functions,
        margin: delta,
        locality_radius,
        max_sum_deviation: 0.0,
    };
    let sum = pou.sum();
    pou.max_sum_deviation = domain
        .grid(verification_resolution(dim))
        .iter()
        .map(|x| libm::fabs(Evaluator::new(x).eval(&sum) - 1.0))
        .fold(0.0, f64::max);
    Ok(pou)
}
