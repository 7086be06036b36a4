//! Composite Gauss–Legendre quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{FoamError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureConfig {
    /// Nodes per panel.
    pub order: usize,
    /// Panels per axis.
    pub subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            order: 16,
            subdivisions: 64,
        }
    }
}

/// Nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "quadrature order must be positive");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if libm::fabs(dx) < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule over `[a, b]`.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if cfg.order == 0 || cfg.subdivisions == 0 {
        return Err(FoamError::ZeroCap("quadrature"));
    }
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(FoamError::Invalid("integration window must be a finite interval".into()));
    }
    let gl = GaussLegendre::new(cfg.order);
    let h = (b - a) / cfg.subdivisions as f64;
    let mut total = 0.0;
    for j in 0..cfg.subdivisions {
        let lo = a + j as f64 * h;
        let mid = lo + 0.5 * h;
        let mut panel = 0.0;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            panel += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * panel;
    }
    Ok(total)
}

/// Tensor-product composite rule over a box `∏ [a_i, b_i]`.
pub fn integrate_box(f: impl Fn(&[f64]) -> f64, window: &[(f64, f64)], cfg: &QuadratureConfig) -> Result<f64> {
    if window.is_empty() {
        return Err(FoamError::Invalid("empty integration window".into()));
    }
    if cfg.order == 0 || cfg.subdivisions == 0 {
        return Err(FoamError::ZeroCap("quadrature"));
    }
    let gl = GaussLegendre::new(cfg.order);
    let per_axis: Vec<Vec<(f64, f64)>> = window
        .iter()
        .map(|&(a, b)| {
            let h = (b - a) / cfg.subdivisions as f64;
            let mut pts = Vec::with_capacity(cfg.order * cfg.subdivisions);
            for j in 0..cfg.subdivisions {
                let mid = a + (j as f64 + 0.5) * h;
                for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                    pts.push((mid + 0.5 * h * x, 0.5 * h * w));
                }
            }
            pts
        })
        .collect();
    let dim = window.len();
    let n = per_axis[0].len();
    let total_pts = n.pow(dim as u32);
    let mut x = alloc::vec![0.0; dim];
    let mut total = 0.0;
    for flat in 0..total_pts {
        let mut rem = flat;
        let mut w = 1.0;
        for a in 0..dim {
            let (xa, wa) = per_axis[a][rem % n];
            rem /= n;
            x[a] = xa;
            w *= wa;
        }
        total += w * f(&x);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 32] {
            let gl = GaussLegendre::new(n);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let gl = GaussLegendre::new(5);
        let q: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(8)).sum();
        assert!((q - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn composite_integrals() {
        let cfg = QuadratureConfig::default();
        assert!((integrate_1d(|_| 1.0, 0.0, 1.0, &cfg).unwrap() - 1.0).abs() < 1e-14);
        assert!(integrate_1d(|x| x, -1.0, 1.0, &cfg).unwrap().abs() < 1e-15);
        let s = integrate_1d(f64::sin, 0.0, PI, &cfg).unwrap();
        assert!((s - 2.0).abs() < 1e-13);
        let small = QuadratureConfig {
            order: 4,
            subdivisions: 8,
        };
        let b = integrate_box(|x| x[0] * x[1], &[(0.0, 1.0), (0.0, 2.0)], &small).unwrap();
        assert!((b - 1.0).abs() < 1e-14);
        assert!(integrate_1d(|x| x, 1.0, 0.0, &cfg).is_err());
    }
}
