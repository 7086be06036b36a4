//! Mollifier representatives of the delta and Heaviside distributions and
//! weak pairings against test functions.

use alloc::vec;
use alloc::vec::Vec;

use crate::bump::smooth_step;
use crate::domain::OpenSet;
use crate::error::{FoamError, Result};
use crate::expr::{Evaluator, SmoothExpr};
use crate::orders::Index;
use crate::quadrature::{integrate_1d, QuadratureConfig};
use crate::scalar::Scalar;
use crate::sequence::{FoamSequence, SeqKind, Term};
use crate::simplify::{germ_at, structurally_equal};

/// Tolerance on `∫ c·φ = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// `φ(y) = ½ s′((y+1)/2)`, the derivative of the smooth step stretched
    /// over `[-1, 1]`; it has the closed-form primitive `s((y+1)/2)`.
    MatchedStep,
    /// `φ(y) = exp(-1/(1-y²))` on `(-1, 1)`.
    StandardBump,
}

/// An even bump supported in `[-1, 1]` with `∫ c·φ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MollifierKernel {
    pub kind: KernelKind,
    pub phi: SmoothExpr,
    pub normalization: f64,
    /// `H` with `H′ = c·φ`, `H = 0` left of `-1` and `1` right of `1`.
    pub primitive: Option<SmoothExpr>,
}

/// Results of the kernel sanity checks.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelReport {
    pub integral: f64,
    pub even_structural: bool,
    pub max_even_defect: f64,
    pub support_ok: bool,
    pub second_moment: f64,
}

impl KernelReport {
    pub fn is_valid(&self) -> bool {
        libm::fabs(self.integral - 1.0) <= NORMALIZATION_TOL && self.max_even_defect <= 1e-14 && self.support_ok
    }
}

fn y() -> SmoothExpr {
    SmoothExpr::coord(0)
}

impl MollifierKernel {
    pub fn matched_step() -> Self {
        let u = (y() + SmoothExpr::one()) * SmoothExpr::constant(Scalar::ratio(1, 2));
        let h = smooth_step(&u.simplified());
        let phi = h.derive_axis(0);
        MollifierKernel {
            kind: KernelKind::MatchedStep,
            phi,
            normalization: 1.0,
            primitive: Some(h),
        }
    }

    pub fn standard_bump(quad: &QuadratureConfig) -> Result<Self> {
        let phi = (SmoothExpr::one() - y().pow(2)).simplified().glue_unit();
        let mass = integrate_1d(|t| Evaluator::new(&[t]).eval(&phi), -1.0, 1.0, quad)?;
        Ok(MollifierKernel {
            kind: KernelKind::StandardBump,
            phi,
            normalization: 1.0 / mass,
            primitive: None,
        })
    }

    /// `c·φ` as one expression.
    pub fn density(&self) -> SmoothExpr {
        if self.normalization == 1.0 {
            self.phi.clone()
        } else {
            (SmoothExpr::constant(Scalar::real(self.normalization)) * self.phi.clone()).simplified()
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.normalization * Evaluator::new(&[t]).eval(&self.phi)
    }

    pub fn check(&self, quad: &QuadratureConfig) -> Result<KernelReport> {
        let integral = integrate_1d(|t| self.eval(t), -1.0, 1.0, quad)?;
        let second_moment = integrate_1d(|t| t * t * self.eval(t), -1.0, 1.0, quad)?;
        let mirrored = self.phi.substitute(&[-y()]);
        let even_structural = structurally_equal(&self.phi, &mirrored);
        let mut max_even_defect = 0.0f64;
        for i in 0..=200 {
            let t = -1.2 + 2.4 * i as f64 / 200.0;
            let a = self.eval(t);
            let b = self.eval(-t);
            max_even_defect = max_even_defect.max(libm::fabs(a - b));
        }
        let support_ok = (1..=20).all(|i| {
            let t = 1.0 + 0.05 * i as f64;
            germ_at(&self.phi, &[t]).is_const_zero() && germ_at(&self.phi, &[-t]).is_const_zero()
        });
        Ok(KernelReport {
            integral,
            even_structural,
            max_even_defect,
            support_ok,
            second_moment,
        })
    }
}

/// `l ↦ (l+1)·c·φ((l+1)x₀)`.
pub fn delta_sequence(kernel: &MollifierKernel, domain: OpenSet) -> Result<FoamSequence> {
    FoamSequence::scaled(domain, kernel.density(), 1, 1.0)
}

/// `l ↦ H((l+1)x₀)` with `H` the primitive of the kernel.
pub fn heaviside_sequence(kernel: &MollifierKernel, domain: OpenSet) -> Result<FoamSequence> {
    let h = kernel
        .primitive
        .clone()
        .ok_or_else(|| FoamError::Invalid("kernel has no closed-form primitive".into()))?;
    FoamSequence::scaled(domain, h, 0, 1.0)
}

/// A test function with its integration window.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub psi: SmoothExpr,
    pub window: (f64, f64),
}

impl TestFunction {
    pub fn new(psi: SmoothExpr, window: (f64, f64)) -> Self {
        TestFunction { psi, window }
    }
}

/// `∫ f·ψ` over the window, split at `breaks`.
pub fn pairing_with_breaks(
    f: impl Fn(f64) -> f64,
    psi: &TestFunction,
    breaks: &[f64],
    quad: &QuadratureConfig,
) -> Result<f64> {
    if psi.psi.min_dimension() > 1 {
        return Err(FoamError::DimensionMismatch {
            needed: psi.psi.min_dimension(),
            got: 1,
        });
    }
    let (a, b) = psi.window;
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|t| *t > a && *t < b).collect();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_1d(|t| f(t) * Evaluator::new(&[t]).eval(&psi.psi), w[0], w[1], quad)?;
    }
    Ok(total)
}

/// `∫ f·ψ` for a single expression in `x₀`.
pub fn pairing(f: &SmoothExpr, psi: &TestFunction, quad: &QuadratureConfig) -> Result<f64> {
    if f.min_dimension() > 1 {
        return Err(FoamError::DimensionMismatch {
            needed: f.min_dimension(),
            got: 1,
        });
    }
    pairing_with_breaks(|t| Evaluator::new(&[t]).eval(f), psi, &[], quad)
}

/// Points where the term at `idx` changes character (edges of the scaled
/// kernel support).
fn breakpoints(seq: &FoamSequence, idx: &Index) -> Vec<f64> {
    match seq.kind() {
        SeqKind::Scaled { half_width, .. } => {
            let n = match *idx {
                Index::Nat(l) => l,
                Index::Pair(l, k) => l.max(k),
            } as f64
                + 1.0;
            vec![-half_width / n, half_width / n]
        }
        SeqKind::Derive(_, a) | SeqKind::Scale(_, a) => breakpoints(a, idx),
        SeqKind::Add(a, b) | SeqKind::Mul(a, b) => {
            let mut v = breakpoints(a, idx);
            v.extend(breakpoints(b, idx));
            v
        }
        _ => Vec::new(),
    }
}

/// `∫ w_λ·ψ`.
pub fn pair_term(seq: &FoamSequence, idx: &Index, psi: &TestFunction, quad: &QuadratureConfig) -> Result<f64> {
    if seq.domain().dim() != 1 {
        return Err(FoamError::DimensionMismatch {
            needed: 1,
            got: seq.domain().dim(),
        });
    }
    let term: Term = seq.term(idx);
    pairing_with_breaks(|t| term.eval(&[t]), psi, &breakpoints(seq, idx), quad)
}

/// Pairings along a list of indices and their successive differences.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakLimitReport {
    pub indices: Vec<Index>,
    pub pairings: Vec<f64>,
    pub diffs: Vec<f64>,
    /// The last three pairings agree within [`CAUCHY_TOL`].
    pub convergent: bool,
}

pub const CAUCHY_TOL: f64 = 1e-6;

pub fn weak_limit_report(
    seq: &FoamSequence,
    psi: &TestFunction,
    indices: &[Index],
    quad: &QuadratureConfig,
) -> Result<WeakLimitReport> {
    let pairings = indices
        .iter()
        .map(|i| pair_term(seq, i, psi, quad))
        .collect::<Result<Vec<f64>>>()?;
    let diffs: Vec<f64> = pairings.windows(2).map(|w| w[1] - w[0]).collect();
    let convergent = diffs.len() >= 2 && diffs[diffs.len() - 2..].iter().all(|d| libm::fabs(*d) <= CAUCHY_TOL);
    Ok(WeakLimitReport {
        indices: indices.to_vec(),
        pairings,
        diffs,
        convergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::MultiIndex;
    use crate::simplify::is_structural_zero;

    fn line() -> OpenSet {
        OpenSet::interval_i(-2, 2).unwrap()
    }

    fn quad() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn kernels_are_normalized_even_and_supported() {
        let k = MollifierKernel::matched_step();
        let r = k.check(&quad()).unwrap();
        assert!(r.is_valid(), "{r:?}");
        let b = MollifierKernel::standard_bump(&quad()).unwrap();
        let rb = b.check(&quad()).unwrap();
        assert!(rb.is_valid() && rb.even_structural, "{rb:?}");
    }

    #[test]
    fn step_kernel_second_moment() {
        // composite Simpson oracle over [-1, 1]
        let k = MollifierKernel::matched_step();
        let n = 20_000;
        let h = 2.0 / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let t = -1.0 + i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * t * t * k.eval(t);
        }
        s *= h / 3.0;
        let r = k.check(&quad()).unwrap();
        assert!((r.second_moment - s).abs() < 1e-9);
        assert!((r.second_moment - 0.107_674_840_684_328_82).abs() < 1e-12);
    }

    #[test]
    fn delta_pairings() {
        let k = MollifierKernel::matched_step();
        let d = delta_sequence(&k, line()).unwrap();
        let one = TestFunction::new(SmoothExpr::one(), (-2.0, 2.0));
        let x = TestFunction::new(y(), (-2.0, 2.0));
        for l in [0u64, 3, 10, 32] {
            let p = pair_term(&d, &Index::Nat(l), &one, &quad()).unwrap();
            assert!((p - 1.0).abs() < 1e-12);
            assert!(pair_term(&d, &Index::Nat(l), &x, &quad()).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn heaviside_plateaus_and_derivative() {
        let k = MollifierKernel::matched_step();
        let h = heaviside_sequence(&k, line()).unwrap();
        let d = delta_sequence(&k, line()).unwrap();
        for l in 1..6u64 {
            let t = h.term(&Index::Nat(l));
            assert_eq!(t.eval(&[1.0]), 1.0);
            assert_eq!(t.eval(&[-1.0]), 0.0);
            let dh = t.derive(&MultiIndex::new(vec![1])).as_smooth().unwrap();
            let dl = d.term(&Index::Nat(l)).as_smooth().unwrap();
            assert!(is_structural_zero(&(dh - dl)), "l={l}");
        }
        assert!(heaviside_sequence(&MollifierKernel::standard_bump(&quad()).unwrap(), line()).is_err());
    }

    #[test]
    fn weak_limits() {
        let k = MollifierKernel::matched_step();
        let d = delta_sequence(&k, line()).unwrap();
        let x2 = TestFunction::new(y().pow(2), (-2.0, 2.0));
        let idx: Vec<Index> = [250u64, 500, 1000, 2000].iter().map(|&l| Index::Nat(l)).collect();
        let r = weak_limit_report(&d, &x2, &idx, &quad()).unwrap();
        assert!(r.convergent);
        assert!(r.pairings[3] < 1e-7);
        let u = FoamSequence::diagonal(crate::IndexOrder::Nat, line(), y().cos()).unwrap();
        let r = weak_limit_report(&u, &x2, &idx, &quad()).unwrap();
        assert!(r.diffs.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn plain_pairings() {
        let one = SmoothExpr::one();
        let p = pairing(&one, &TestFunction::new(one.clone(), (0.0, 1.0)), &quad()).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        let p = pairing(&y(), &TestFunction::new(one.clone(), (-1.0, 1.0)), &quad()).unwrap();
        assert!(p.abs() < 1e-15);
        let two = SmoothExpr::coord(1);
        assert!(pairing(&two, &TestFunction::new(one, (0.0, 1.0)), &quad()).is_err());
    }
}
