//! Discrete Kirchhoff triangle: the space `W_h`, the discrete gradient
//! `∇_h : W_h → Θ_h` and the discrete Hessian `∇∇_h`.
//!
//! Element degrees of freedom are ordered `(w, ∂₁w, ∂₂w)` per vertex, vertices
//! in counter-clockwise order. `θ_h = ∇_h w_h` is the P2 vector field with
//!
//! * `θ_h(z) = ∇w_h(z)` at the vertices,
//! * `θ_h(z_S)·n_S = ½(∇w_h(z_S¹) + ∇w_h(z_S²))·n_S` at edge midpoints,
//! * `θ_h(z_S)·t_S = ∂_t w_h(z_S)` where `w_h|_S` is the cubic Hermite
//!   interpolant along the edge, which gives
//!   `∂_t w_h(z_S) = 3/(2|S|) (w(z_S²) − w(z_S¹)) − ¼ (∇w(z_S¹) + ∇w(z_S²))·t_S`.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{Mat2, Vec2};
use crate::mesh::Triangulation;
use crate::p1::barycentric_gradients;
use crate::{Error, Result};

/// Out-of-plane deflection: one value per node and one gradient per slot
/// (crease nodes own a second slot for the right subdomain).
#[derive(Debug, Clone, PartialEq)]
pub struct DktField {
    pub values: Vec<f64>,
    pub grads: Vec<Vec2>,
}

impl DktField {
    pub fn zeros(mesh: &Triangulation) -> Self {
        DktField {
            values: vec![0.0; mesh.num_nodes()],
            grads: vec![[0.0; 2]; mesh.num_grad_slots()],
        }
    }

    /// Nodal DKT interpolant: values and gradients sampled exactly. Both
    /// gradient slots of a crease node receive the same sample.
    pub fn interpolate<W, G>(mesh: &Triangulation, w: W, grad: G) -> Self
    where
        W: Fn(Vec2) -> f64,
        G: Fn(Vec2) -> Vec2,
    {
        let values = mesh.nodes().iter().map(|&z| w(z)).collect();
        let grads = (0..mesh.num_grad_slots())
            .map(|s| grad(mesh.nodes()[mesh.slot_node(s)]))
            .collect();
        DktField { values, grads }
    }

    /// The nine element degrees of freedom of triangle `t`.
    pub fn element_dofs(&self, mesh: &Triangulation, t: usize) -> [f64; 9] {
        let tri = mesh.triangles()[t];
        let side = mesh.subdomain(t);
        let mut d = [0.0; 9];
        for (i, &v) in tri.iter().enumerate() {
            let g = self.grads[mesh.grad_slot(v, side)];
            d[3 * i] = self.values[v];
            d[3 * i + 1] = g[0];
            d[3 * i + 2] = g[1];
        }
        d
    }

    /// Gradient degree of freedom of local vertex `i` of triangle `t`.
    pub fn vertex_gradient(&self, mesh: &Triangulation, t: usize, i: usize) -> Vec2 {
        let v = mesh.triangles()[t][i];
        self.grads[mesh.grad_slot(v, mesh.subdomain(t))]
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Per-element operators of the discrete gradient.
#[derive(Debug, Clone)]
pub struct DktElementOperators {
    pub area: f64,
    /// Barycentric gradients of the element.
    pub bary_grads: [Vec2; 3],
    /// Rows `2k + a`: component `a` of `θ_h` at Lagrange node `k`
    /// (vertices 0..3, then the midpoint of the edge opposite vertex `k − 3`).
    pub gradient: [[f64; 9]; 12],
    /// `∇θ_h` at the three edge midpoints (the exact quadrature points for
    /// quadratics); rows `2a + b` hold `∂_b θ_a`.
    pub hessian_at_midpoints: [[[f64; 9]; 4]; 3],
    /// `∫_T ∇∇_h v : ∇∇_h w`, row-major 9×9.
    pub bending: [f64; 81],
    /// `∫_T tr ∇∇_h v`.
    pub trace_load: [f64; 9],
}

/// Builds the element operators of triangle `t`.
pub fn build_discrete_gradient(mesh: &Triangulation, t: usize) -> Result<DktElementOperators> {
    let coords = mesh.triangle_coords(t);
    let area = mesh.area(t);
    let h = mesh.diameter(t);
    if !(area > 1e-14 * h * h) {
        return Err(Error::DegenerateTriangle { triangle: t, area });
    }
    let tri = mesh.triangles()[t];
    let edges = mesh.triangle_edges(t);
    let mut g = [[0.0; 9]; 12];
    for (i, row) in g.chunks_mut(2).take(3).enumerate() {
        row[0][3 * i + 1] = 1.0;
        row[1][3 * i + 2] = 1.0;
    }
    for e in 0..3 {
        let edge = &mesh.edges()[edges[e]];
        let local = |v: usize| tri.iter().position(|&x| x == v).expect("edge of triangle");
        let (p, q) = (local(edge.nodes[0]), local(edge.nodes[1]));
        let (n, tg, len) = (edge.normal, edge.tangent, edge.length);
        for a in 0..2 {
            let row = &mut g[2 * (3 + e) + a];
            row[3 * p] -= 1.5 / len * tg[a];
            row[3 * q] += 1.5 / len * tg[a];
            for b in 0..2 {
                let c = 0.5 * n[a] * n[b] - 0.25 * tg[a] * tg[b];
                row[3 * p + 1 + b] += c;
                row[3 * q + 1 + b] += c;
            }
        }
    }

    let bary_grads = barycentric_gradients(&coords);
    let mut hess = [[[0.0; 9]; 4]; 3];
    for (e, h_q) in hess.iter_mut().enumerate() {
        let mut lambda = [0.5; 3];
        lambda[e] = 0.0;
        *h_q = hessian_rows(&g, &bary_grads, lambda);
    }

    let w = area / 3.0;
    let mut bending = [0.0; 81];
    let mut trace_load = [0.0; 9];
    for h_q in &hess {
        for i in 0..9 {
            trace_load[i] += w * (h_q[0][i] + h_q[3][i]);
            for j in 0..9 {
                bending[9 * i + j] += w * (0..4).map(|r| h_q[r][i] * h_q[r][j]).sum::<f64>();
            }
        }
    }

    Ok(DktElementOperators {
        area,
        bary_grads,
        gradient: g,
        hessian_at_midpoints: hess,
        bending,
        trace_load,
    })
}

/// Gradients of the six P2 Lagrange basis functions at barycentric point `lambda`.
fn p2_basis_gradients(bary_grads: &[Vec2; 3], lambda: [f64; 3]) -> [Vec2; 6] {
    let mut out = [[0.0; 2]; 6];
    for i in 0..3 {
        let f = 4.0 * lambda[i] - 1.0;
        out[i] = [f * bary_grads[i][0], f * bary_grads[i][1]];
    }
    for e in 0..3 {
        let (i, j) = ((e + 1) % 3, (e + 2) % 3);
        for b in 0..2 {
            out[3 + e][b] = 4.0 * (lambda[j] * bary_grads[i][b] + lambda[i] * bary_grads[j][b]);
        }
    }
    out
}

fn p2_basis_values(lambda: [f64; 3]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for i in 0..3 {
        out[i] = lambda[i] * (2.0 * lambda[i] - 1.0);
    }
    for e in 0..3 {
        out[3 + e] = 4.0 * lambda[(e + 1) % 3] * lambda[(e + 2) % 3];
    }
    out
}

fn hessian_rows(g: &[[f64; 9]; 12], bary_grads: &[Vec2; 3], lambda: [f64; 3]) -> [[f64; 9]; 4] {
    let dphi = p2_basis_gradients(bary_grads, lambda);
    let mut rows = [[0.0; 9]; 4];
    for a in 0..2 {
        for b in 0..2 {
            for (k, dphi_k) in dphi.iter().enumerate() {
                let c = dphi_k[b];
                for d in 0..9 {
                    rows[2 * a + b][d] += g[2 * k + a][d] * c;
                }
            }
        }
    }
    rows
}

impl DktElementOperators {
    /// `θ_h` at the six Lagrange nodes.
    pub fn theta_at_nodes(&self, dofs: &[f64; 9]) -> [Vec2; 6] {
        let mut out = [[0.0; 2]; 6];
        for (k, o) in out.iter_mut().enumerate() {
            *o = [
                dot9(&self.gradient[2 * k], dofs),
                dot9(&self.gradient[2 * k + 1], dofs),
            ];
        }
        out
    }

    /// `θ_h` at a barycentric point.
    pub fn theta_at(&self, dofs: &[f64; 9], lambda: [f64; 3]) -> Vec2 {
        let nodes = self.theta_at_nodes(dofs);
        let phi = p2_basis_values(lambda);
        let mut out = [0.0; 2];
        for k in 0..6 {
            out[0] += phi[k] * nodes[k][0];
            out[1] += phi[k] * nodes[k][1];
        }
        out
    }

    /// `∇∇_h w` (unsymmetrized) at a barycentric point.
    pub fn hessian_at(&self, dofs: &[f64; 9], lambda: [f64; 3]) -> Mat2 {
        let rows = hessian_rows(&self.gradient, &self.bary_grads, lambda);
        [
            [dot9(&rows[0], dofs), dot9(&rows[1], dofs)],
            [dot9(&rows[2], dofs), dot9(&rows[3], dofs)],
        ]
    }

    /// `½ ∫_T |∇∇_h w − α I|²`, integrated exactly.
    pub fn bending_energy(&self, dofs: &[f64; 9], alpha: f64) -> f64 {
        let mut kd = 0.0;
        for i in 0..9 {
            kd += dofs[i] * dot9(self.bending[9 * i..9 * i + 9].try_into().unwrap(), dofs);
        }
        0.5 * kd - alpha * dot9(&self.trace_load, dofs) + alpha * alpha * self.area
    }
}

#[inline]
fn dot9(a: &[f64; 9], b: &[f64; 9]) -> f64 {
    let mut s = 0.0;
    for i in 0..9 {
        s += a[i] * b[i];
    }
    s
}

/// A mesh together with its (immutable) DKT element operators.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: Triangulation,
    ops: Vec<DktElementOperators>,
}

impl Discretization {
    pub fn new(mesh: Triangulation) -> Result<Self> {
        let ops = (0..mesh.num_triangles())
            .map(|t| build_discrete_gradient(&mesh, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Discretization { mesh, ops })
    }

    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn element(&self, t: usize) -> &DktElementOperators {
        &self.ops[t]
    }

    pub fn elements(&self) -> &[DktElementOperators] {
        &self.ops
    }
}

/// Elementwise-linear matrix field given by its values at the three vertices
/// of every triangle.
#[derive(Debug, Clone)]
pub struct PiecewiseLinearMatrixField {
    pub vertex_values: Vec<[Mat2; 3]>,
}

impl PiecewiseLinearMatrixField {
    /// Value at a barycentric point of triangle `t`.
    pub fn at(&self, t: usize, lambda: [f64; 3]) -> Mat2 {
        let v = &self.vertex_values[t];
        let mut out = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                out[a][b] = (0..3).map(|i| lambda[i] * v[i][a][b]).sum();
            }
        }
        out
    }

    /// Element mean (value at the centroid).
    pub fn mean(&self, t: usize) -> Mat2 {
        self.at(t, [1.0 / 3.0; 3])
    }
}

/// The discrete Hessian `∇∇_h w` on every triangle.
pub fn discrete_hessian(disc: &Discretization, w: &DktField) -> PiecewiseLinearMatrixField {
    let mesh = disc.mesh();
    let vertex_values = (0..mesh.num_triangles())
        .map(|t| {
            let dofs = w.element_dofs(mesh, t);
            let op = disc.element(t);
            let mut vals = [[[0.0; 2]; 2]; 3];
            for (i, val) in vals.iter_mut().enumerate() {
                let mut lambda = [0.0; 3];
                lambda[i] = 1.0;
                *val = op.hessian_at(&dofs, lambda);
            }
            vals
        })
        .collect();
    PiecewiseLinearMatrixField { vertex_values }
}

/// `‖∇∇_h w‖_{L²}` computed with the exact midpoint rule.
pub fn hessian_l2_norm(disc: &Discretization, w: &DktField) -> f64 {
    let mesh = disc.mesh();
    let mut s = 0.0;
    for t in 0..mesh.num_triangles() {
        let dofs = w.element_dofs(mesh, t);
        s += 2.0 * disc.element(t).bending_energy(&dofs, 0.0);
    }
    libm::sqrt(s.max(0.0))
}

/// Error functionals measured with a 25-point Gauss rule per element
/// (exact for the polynomial parts up to degree 8).
fn gauss_sum<F: FnMut(usize, [f64; 3], Vec2) -> f64>(disc: &Discretization, mut f: F) -> f64 {
    let rule = crate::quadrature::triangle_rule(5);
    let mesh = disc.mesh();
    (0..mesh.num_triangles())
        .map(|t| {
            let v = mesh.triangle_coords(t);
            crate::quadrature::integrate_triangle(&v, &rule, |x, l| f(t, l, x))
        })
        .sum()
}

/// `‖∇_h w − g‖_{L²}` against an exact gradient `g`.
pub fn gradient_error_l2<G: Fn(Vec2) -> Vec2>(disc: &Discretization, w: &DktField, grad: G) -> f64 {
    let mesh = disc.mesh();
    let s = gauss_sum(disc, |t, l, x| {
        let th = disc.element(t).theta_at(&w.element_dofs(mesh, t), l);
        let g = grad(x);
        (th[0] - g[0]) * (th[0] - g[0]) + (th[1] - g[1]) * (th[1] - g[1])
    });
    libm::sqrt(s)
}

/// `‖∇∇_h w − H‖_{L²}` against an exact Hessian `H`.
pub fn hessian_error_l2<H: Fn(Vec2) -> Mat2>(disc: &Discretization, w: &DktField, hess: H) -> f64 {
    let mesh = disc.mesh();
    let s = gauss_sum(disc, |t, l, x| {
        let a = disc.element(t).hessian_at(&w.element_dofs(mesh, t), l);
        let b = hess(x);
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]))
            .sum()
    });
    libm::sqrt(s)
}

/// `‖∇_h w‖_{L²}`.
pub fn discrete_gradient_l2(disc: &Discretization, w: &DktField) -> f64 {
    gradient_error_l2(disc, w, |_| [0.0; 2])
}

/// `‖∇w_h‖_{L²}` of the conforming reduced cubic and
/// `‖∇_h w_h − ∇w_h‖_{L²}`, both elementwise.
pub fn reduced_cubic_gradient_norms(disc: &Discretization, w: &DktField) -> (f64, f64) {
    let mesh = disc.mesh();
    let cubics: Vec<Option<ReducedCubic>> = (0..mesh.num_triangles())
        .map(|t| ReducedCubic::new(&mesh.triangle_coords(t), &w.element_dofs(mesh, t)))
        .collect();
    let norm = gauss_sum(disc, |t, _, x| {
        let g = cubics[t].as_ref().map_or([0.0; 2], |c| c.gradient(x));
        g[0] * g[0] + g[1] * g[1]
    });
    let d = gauss_sum(disc, |t, l, x| {
        let g = cubics[t].as_ref().map_or([0.0; 2], |c| c.gradient(x));
        let th = disc.element(t).theta_at(&w.element_dofs(mesh, t), l);
        (th[0] - g[0]) * (th[0] - g[0]) + (th[1] - g[1]) * (th[1] - g[1])
    });
    (libm::sqrt(norm), libm::sqrt(d))
}

/// The reduced cubic `w_h|_T ∈ P3_red(T)` determined by the nine element
/// degrees of freedom and the centroid condition
/// `p(x_T) = ⅓ Σ_z (p(z) + ∇p(z)·(x_T − z))`.
///
/// Built by a direct 10×10 solve in monomials of `(x − x_T)/h_T`; used for
/// evaluating the conforming deflection, not for assembly.
#[derive(Debug, Clone)]
pub struct ReducedCubic {
    center: Vec2,
    scale: f64,
    coeffs: [f64; 10],
}

const MONOMIALS: [(i32, i32); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

fn monomial_rows(xi: Vec2, scale: f64) -> ([f64; 10], [f64; 10], [f64; 10]) {
    let mut v = [0.0; 10];
    let mut dx = [0.0; 10];
    let mut dy = [0.0; 10];
    let pow = |x: f64, k: i32| if k <= 0 { 1.0 } else { libm::pow(x, k as f64) };
    for (m, &(a, b)) in MONOMIALS.iter().enumerate() {
        v[m] = pow(xi[0], a) * pow(xi[1], b);
        if a > 0 {
            dx[m] = a as f64 * pow(xi[0], a - 1) * pow(xi[1], b) / scale;
        }
        if b > 0 {
            dy[m] = b as f64 * pow(xi[0], a) * pow(xi[1], b - 1) / scale;
        }
    }
    (v, dx, dy)
}

impl ReducedCubic {
    pub fn new(coords: &[Vec2; 3], dofs: &[f64; 9]) -> Option<Self> {
        let center = [
            (coords[0][0] + coords[1][0] + coords[2][0]) / 3.0,
            (coords[0][1] + coords[1][1] + coords[2][1]) / 3.0,
        ];
        let scale = (0..3)
            .map(|i| {
                let d = [coords[i][0] - center[0], coords[i][1] - center[1]];
                libm::sqrt(d[0] * d[0] + d[1] * d[1])
            })
            .fold(0.0, f64::max);
        let local = |x: Vec2| [(x[0] - center[0]) / scale, (x[1] - center[1]) / scale];
        let mut a = Vec::with_capacity(100);
        let mut rhs = Vec::with_capacity(10);
        for i in 0..3 {
            let (v, dx, dy) = monomial_rows(local(coords[i]), scale);
            a.extend_from_slice(&v);
            rhs.push(dofs[3 * i]);
            a.extend_from_slice(&dx);
            rhs.push(dofs[3 * i + 1]);
            a.extend_from_slice(&dy);
            rhs.push(dofs[3 * i + 2]);
        }
        // centroid condition: p(x_T) − ⅓ Σ (p(z) + ∇p(z)·(x_T − z)) = 0
        let (vc, _, _) = monomial_rows([0.0, 0.0], scale);
        let mut row = vc;
        for z in coords {
            let (v, dx, dy) = monomial_rows(local(*z), scale);
            let d = [center[0] - z[0], center[1] - z[1]];
            for m in 0..10 {
                row[m] -= (v[m] + dx[m] * d[0] + dy[m] * d[1]) / 3.0;
            }
        }
        a.extend_from_slice(&row);
        rhs.push(0.0);
        let sol = crate::dense::solve(a, rhs)?;
        let mut coeffs = [0.0; 10];
        coeffs.copy_from_slice(&sol);
        Some(ReducedCubic {
            center,
            scale,
            coeffs,
        })
    }

    pub fn value(&self, x: Vec2) -> f64 {
        let xi = [(x[0] - self.center[0]) / self.scale, (x[1] - self.center[1]) / self.scale];
        let (v, _, _) = monomial_rows(xi, self.scale);
        (0..10).map(|m| v[m] * self.coeffs[m]).sum()
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let xi = [(x[0] - self.center[0]) / self.scale, (x[1] - self.center[1]) / self.scale];
        let (_, dx, dy) = monomial_rows(xi, self.scale);
        [
            (0..10).map(|m| dx[m] * self.coeffs[m]).sum(),
            (0..10).map(|m| dy[m] * self.coeffs[m]).sum(),
        ]
    }
}
