//! Gauss–Legendre rules and collapsed (Duffy) product rules on triangles.
//!
//! Only used for reference integrals (errors, convergence studies); the
//! energy itself uses the vertex rule and the exact edge-midpoint rule.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "at least one quadrature point");
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-type initial guess, refined by Newton's method.
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule.reverse();
    rule
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Quadrature on the reference triangle `{(s, t): s, t ≥ 0, s + t ≤ 1}` as
/// barycentric triples `(λ0, λ1, λ2)` with weights summing to 1/2.
/// `n` points per direction integrate polynomials of degree `2n − 2` exactly.
pub fn triangle_rule(n: usize) -> Vec<([f64; 3], f64)> {
    let gl = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for &(xi, wi) in &gl {
        let s = 0.5 * (xi + 1.0);
        for &(xj, wj) in &gl {
            let r = 0.5 * (xj + 1.0);
            let t = r * (1.0 - s);
            let w = 0.25 * wi * wj * (1.0 - s);
            out.push(([1.0 - s - t, s, t], w));
        }
    }
    out
}

/// Integrates `f(x)` over the triangle with vertices `v` using `rule`.
pub fn integrate_triangle<F>(v: &[[f64; 2]; 3], rule: &[([f64; 3], f64)], mut f: F) -> f64
where
    F: FnMut([f64; 2], [f64; 3]) -> f64,
{
    let area2 = ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
        - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]))
        .abs();
    rule.iter()
        .map(|&(l, w)| {
            let x = [
                l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
                l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
            ];
            w * area2 * f(x, l)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(5);
        let w: f64 = rule.iter().map(|r| r.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        // x^8 integrates to 2/9
        let i: f64 = rule.iter().map(|&(x, w)| w * x.powi(8)).sum();
        assert!((i - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_rule_moments() {
        let rule = triangle_rule(6);
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        // ∫ x^a y^b = a! b! / (a + b + 2)!
        let i = integrate_triangle(&v, &rule, |x, _| x[0].powi(3) * x[1].powi(4));
        assert!((i - 144.0 / 362880.0).abs() < 1e-15, "{i}");
    }
}
