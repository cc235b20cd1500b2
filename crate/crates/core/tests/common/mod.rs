#![allow(dead_code)]

use fvk_core::{DktField, P1VectorField, Triangulation};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_w(mesh: &Triangulation, rng: &mut StdRng, scale: f64) -> DktField {
    DktField {
        values: (0..mesh.num_nodes()).map(|_| scale * rng.gen_range(-1.0..1.0)).collect(),
        grads: (0..mesh.num_grad_slots())
            .map(|_| [scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0)])
            .collect(),
    }
}

pub fn random_u(mesh: &Triangulation, rng: &mut StdRng, scale: f64) -> P1VectorField {
    P1VectorField {
        values: (0..mesh.num_nodes())
            .map(|_| [scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0)])
            .collect(),
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Field-layout index of element unknown `k` of triangle `t`.
pub fn field_index(mesh: &Triangulation, t: usize, k: usize) -> usize {
    let v = mesh.triangles()[t][k / 3];
    match k % 3 {
        0 => v,
        c => mesh.num_nodes() + 2 * mesh.grad_slot(v, mesh.subdomain(t)) + (c - 1),
    }
}

/// Two triangles touching only at the origin, one per subdomain, with the
/// origin as the single crease node. The configuration is mirror symmetric
/// in `x₁ ↦ −x₁`.
pub fn bow_tie() -> Triangulation {
    Triangulation::new(
        vec![[0.0, 0.0], [-1.0, -0.6], [-1.0, 0.6], [1.0, -0.6], [1.0, 0.6]],
        vec![[0, 2, 1], [0, 3, 4]],
        Some(vec![1, 2]),
        vec![0],
    )
    .unwrap()
}

/// Least-squares slope of `log e` against `log h`.
pub fn loglog_slope(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
