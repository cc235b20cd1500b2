//! The discrete energy `E_h^θ`, the implicit step functional of the
//! deflection update with its derivatives, the linear in-plane update and
//! shape diagnostics.
//!
//! Deflection unknowns are handled in two layouts:
//!
//! * the *field* layout `[w(z) for nodes, ∇w for gradient slots]`, matching
//!   [`DktField`], in which crease nodes carry one value and two gradients;
//! * the *split* layout with three entries `(w, ∂₁w, ∂₂w)` per gradient slot,
//!   in which crease nodes also carry one value per side. Elements only see
//!   their own side, so the crease subproblems decouple and continuity is
//!   restored by constraints.

use alloc::vec;
use alloc::vec::Vec;

use crate::dkt::{DktField, Discretization};
use crate::linalg::{dyad, frobenius_dot, mat_add, Mat2, Vec2};
use crate::mesh::Triangulation;
use crate::p1::P1VectorField;
use crate::problem::ProblemSpec;

/// Energy contributions; `total = bending + membrane − force`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub bending: f64,
    pub membrane: f64,
    pub force: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    /// Bending plus membrane energy.
    pub fn elastic(&self) -> f64 {
        self.bending + self.membrane
    }
}

/// Evaluates `E_h^θ(u, w)` with the problem's full load.
pub fn assemble_energy(disc: &Discretization, spec: &ProblemSpec, u: &P1VectorField, w: &DktField) -> EnergyBreakdown {
    assemble_energy_with_load(disc, spec, &spec.force, u, w)
}

/// Evaluates `E_h^θ(u, w)` for an explicit nodal load.
pub fn assemble_energy_with_load(
    disc: &Discretization,
    spec: &ProblemSpec,
    force: &[f64],
    u: &P1VectorField,
    w: &DktField,
) -> EnergyBreakdown {
    let mesh = disc.mesh();
    let (mut bending, mut membrane, mut load) = (0.0, 0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let op = disc.element(t);
        let dofs = w.element_dofs(mesh, t);
        bending += op.bending_energy(&dofs, spec.alpha_on(mesh, t));
        let strain = u.strain(mesh, t);
        let beta = op.area / 3.0;
        for (i, &v) in mesh.triangles()[t].iter().enumerate() {
            let g = [dofs[3 * i + 1], dofs[3 * i + 2]];
            let phi = mat_add(&dyad(g, g), &strain);
            membrane += beta * frobenius_dot(&phi, &phi);
            load += beta * force[v] * dofs[3 * i];
        }
    }
    membrane *= 0.5 * spec.theta;
    EnergyBreakdown {
        bending,
        membrane,
        force: load,
        total: bending + membrane - load,
    }
}

/// `(φ_h, φ_h)_h` and `∫ |φ_h|²` for `φ_h = ∇_h w ⊗ ∇_h w + ε̃(u)`.
///
/// At the vertices `∇_h w` equals the gradient degrees of freedom, so the
/// first value is the vertex rule used by the membrane energy; the second is
/// integrated exactly (the integrand is a polynomial of degree 8).
pub fn membrane_quadrature_pair(disc: &Discretization, u: &P1VectorField, w: &DktField) -> (f64, f64) {
    let mesh = disc.mesh();
    let rule = crate::quadrature::triangle_rule(5);
    let (mut vertex, mut exact) = (0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let op = disc.element(t);
        let dofs = w.element_dofs(mesh, t);
        let strain = u.strain(mesh, t);
        let phi_sq = |l: [f64; 3]| {
            let g = op.theta_at(&dofs, l);
            let phi = mat_add(&dyad(g, g), &strain);
            frobenius_dot(&phi, &phi)
        };
        for i in 0..3 {
            let mut l = [0.0; 3];
            l[i] = 1.0;
            vertex += op.area / 3.0 * phi_sq(l);
        }
        exact += crate::quadrature::integrate_triangle(&mesh.triangle_coords(t), &rule, |_, l| phi_sq(l));
    }
    (vertex, exact)
}

/// Shape diagnostics of a state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// Area-weighted means of `(∇∇_h w)_{11}` and `(∇∇_h w)_{22}`.
    pub mean_curv: [f64; 2],
    /// `(max u₁ − min u₁) / (max u₂ − min u₂)`; `None` when the denominator
    /// is below `1e-14`.
    pub q_sym: Option<f64>,
}

pub fn diagnostics(disc: &Discretization, w: &DktField, u: &P1VectorField) -> Diagnostics {
    let mesh = disc.mesh();
    let mut mc = [0.0; 2];
    let mut area = 0.0;
    for t in 0..mesh.num_triangles() {
        let op = disc.element(t);
        let h = op.hessian_at(&w.element_dofs(mesh, t), [1.0 / 3.0; 3]);
        mc[0] += op.area * h[0][0];
        mc[1] += op.area * h[1][1];
        area += op.area;
    }
    Diagnostics {
        mean_curv: [mc[0] / area, mc[1] / area],
        q_sym: q_sym(u),
    }
}

pub fn q_sym(u: &P1VectorField) -> Option<f64> {
    let range = |a: usize| {
        let (lo, hi) = u
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[a]), hi.max(v[a])));
        hi - lo
    };
    let den = range(1);
    if !(den >= 1e-14) {
        return None;
    }
    Some(range(0) / den)
}

/// Copies a field into the split layout.
pub fn to_split(mesh: &Triangulation, w: &DktField) -> Vec<f64> {
    let slots = mesh.num_grad_slots();
    let mut x = vec![0.0; 3 * slots];
    for s in 0..slots {
        x[3 * s] = w.values[mesh.slot_node(s)];
        x[3 * s + 1] = w.grads[s][0];
        x[3 * s + 2] = w.grads[s][1];
    }
    x
}

/// Field from the split layout; crease values are taken from the
/// subdomain-1 copy.
pub fn from_split(mesh: &Triangulation, x: &[f64]) -> DktField {
    let n = mesh.num_nodes();
    DktField {
        values: (0..n).map(|v| x[3 * v]).collect(),
        grads: (0..mesh.num_grad_slots()).map(|s| [x[3 * s + 1], x[3 * s + 2]]).collect(),
    }
}

/// Largest difference between the two value copies of a crease node.
pub fn crease_jump(mesh: &Triangulation, x: &[f64]) -> f64 {
    let n = mesh.num_nodes();
    mesh.crease_polyline()
        .iter()
        .enumerate()
        .map(|(k, &v)| (x[3 * v] - x[3 * (n + k)]).abs())
        .fold(0.0, f64::max)
}

/// Flattens a field into `[values, grads]`.
pub fn field_to_vec(w: &DktField) -> Vec<f64> {
    let mut out = w.values.clone();
    for g in &w.grads {
        out.extend_from_slice(g);
    }
    out
}

pub fn vec_to_field(mesh: &Triangulation, v: &[f64]) -> DktField {
    let n = mesh.num_nodes();
    DktField {
        values: v[..n].to_vec(),
        grads: (0..mesh.num_grad_slots()).map(|s| [v[n + 2 * s], v[n + 2 * s + 1]]).collect(),
    }
}

/// Global split-layout indices of the nine element degrees of freedom.
pub fn element_split_dofs(mesh: &Triangulation, t: usize) -> [usize; 9] {
    let side = mesh.subdomain(t);
    let mut out = [0; 9];
    for (i, &v) in mesh.triangles()[t].iter().enumerate() {
        let s = mesh.grad_slot(v, side);
        out[3 * i] = 3 * s;
        out[3 * i + 1] = 3 * s + 1;
        out[3 * i + 2] = 3 * s + 2;
    }
    out
}

/// The implicit deflection step as a minimization problem,
///
/// `G(w) = ½‖w − w_p‖²_ver + τ [ ½‖∇∇_h w − αI‖² + (θ/2)(|∇w|⁴, 1)_h
///         + (θ/2)(ε̃(u_p) : (∇w + ∇w_p)⊗(∇w + ∇w_p), 1)_h − (f, w)_h ]`,
///
/// whose Euler–Lagrange equation is the Newton system `F_k(w) = 0`.
#[derive(Debug, Clone)]
pub struct StepFunctional<'a> {
    disc: &'a Discretization,
    theta: f64,
    alpha: Vec<f64>,
    l2: bool,
    force: Vec<f64>,
    strain_prev: Vec<Mat2>,
    x_prev: Vec<f64>,
    tau: f64,
}

impl<'a> StepFunctional<'a> {
    /// `force` is the nodal load used for this step.
    pub fn new(
        disc: &'a Discretization,
        spec: &ProblemSpec,
        force: &[f64],
        u_prev: &P1VectorField,
        w_prev: &DktField,
        tau: f64,
    ) -> Self {
        let mesh = disc.mesh();
        StepFunctional {
            disc,
            theta: spec.theta,
            alpha: (0..mesh.num_triangles()).map(|t| spec.alpha_on(mesh, t)).collect(),
            l2: spec.metric.l2_vertical,
            force: force.to_vec(),
            strain_prev: (0..mesh.num_triangles()).map(|t| u_prev.strain(mesh, t)).collect(),
            x_prev: to_split(mesh, w_prev),
            tau,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn x_prev(&self) -> &[f64] {
        &self.x_prev
    }

    fn gather(x: &[f64], idx: &[usize; 9]) -> [f64; 9] {
        let mut d = [0.0; 9];
        for k in 0..9 {
            d[k] = x[idx[k]];
        }
        d
    }

    /// `G` in the split layout.
    pub fn merit(&self, x: &[f64]) -> f64 {
        let mesh = self.disc.mesh();
        let (tau, theta) = (self.tau, self.theta);
        let mut m = 0.0;
        for t in 0..mesh.num_triangles() {
            let op = self.disc.element(t);
            let idx = element_split_dofs(mesh, t);
            let d = Self::gather(x, &idx);
            let dp = Self::gather(&self.x_prev, &idx);
            let mut diff = [0.0; 9];
            for k in 0..9 {
                diff[k] = d[k] - dp[k];
            }
            m += 0.5 * quad_form(&op.bending, &diff) + tau * op.bending_energy(&d, self.alpha[t]);
            let e = &self.strain_prev[t];
            let beta = op.area / 3.0;
            for (i, &v) in mesh.triangles()[t].iter().enumerate() {
                let g = [d[3 * i + 1], d[3 * i + 2]];
                let s = [g[0] + dp[3 * i + 1], g[1] + dp[3 * i + 2]];
                if self.l2 {
                    m += 0.5 * beta * diff[3 * i] * diff[3 * i];
                }
                let g2 = g[0] * g[0] + g[1] * g[1];
                let es = e[0][0] * s[0] * s[0] + 2.0 * e[0][1] * s[0] * s[1] + e[1][1] * s[1] * s[1];
                m += tau * beta * (0.5 * theta * (g2 * g2 + es) - self.force[v] * d[3 * i]);
            }
        }
        m
    }

    /// `∇G` in the split layout.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mesh = self.disc.mesh();
        let (tau, theta) = (self.tau, self.theta);
        let mut r = vec![0.0; x.len()];
        for t in 0..mesh.num_triangles() {
            let op = self.disc.element(t);
            let idx = element_split_dofs(mesh, t);
            let d = Self::gather(x, &idx);
            let dp = Self::gather(&self.x_prev, &idx);
            let mut re = [0.0; 9];
            for k in 0..9 {
                let row = &op.bending[9 * k..9 * k + 9];
                let mut kd = 0.0;
                let mut kdp = 0.0;
                for l in 0..9 {
                    kd += row[l] * d[l];
                    kdp += row[l] * dp[l];
                }
                re[k] = (1.0 + tau) * kd - kdp - tau * self.alpha[t] * op.trace_load[k];
            }
            let e = &self.strain_prev[t];
            let beta = op.area / 3.0;
            for (i, &v) in mesh.triangles()[t].iter().enumerate() {
                let g = [d[3 * i + 1], d[3 * i + 2]];
                let s = [g[0] + dp[3 * i + 1], g[1] + dp[3 * i + 2]];
                if self.l2 {
                    re[3 * i] += beta * (d[3 * i] - dp[3 * i]);
                }
                re[3 * i] -= tau * beta * self.force[v];
                let g2 = g[0] * g[0] + g[1] * g[1];
                for a in 0..2 {
                    let es = e[a][0] * s[0] + e[a][1] * s[1];
                    re[3 * i + 1 + a] += tau * theta * beta * (2.0 * g2 * g[a] + es);
                }
            }
            for k in 0..9 {
                r[idx[k]] += re[k];
            }
        }
        r
    }

    /// Element Jacobian of triangle `t` (row-major 9×9) at the split state `x`.
    pub fn element_jacobian(&self, x: &[f64], t: usize) -> [f64; 81] {
        let mesh = self.disc.mesh();
        let (tau, theta) = (self.tau, self.theta);
        let op = self.disc.element(t);
        let idx = element_split_dofs(mesh, t);
        let d = Self::gather(x, &idx);
        let mut j = [0.0; 81];
        for k in 0..81 {
            j[k] = (1.0 + tau) * op.bending[k];
        }
        let e = &self.strain_prev[t];
        let beta = op.area / 3.0;
        for i in 0..3 {
            if self.l2 {
                j[30 * i] += beta;
            }
            let g = [d[3 * i + 1], d[3 * i + 2]];
            let g2 = g[0] * g[0] + g[1] * g[1];
            for a in 0..2 {
                for b in 0..2 {
                    let delta = if a == b { 2.0 * g2 } else { 0.0 };
                    let row = 3 * i + 1 + a;
                    let col = 3 * i + 1 + b;
                    j[9 * row + col] += tau * theta * beta * (4.0 * g[a] * g[b] + delta + e[a][b]);
                }
            }
        }
        j
    }

    /// Dense split-layout Jacobian; intended for small meshes and tests.
    pub fn jacobian_dense(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mesh = self.disc.mesh();
        let mut out = vec![0.0; n * n];
        for t in 0..mesh.num_triangles() {
            let idx = element_split_dofs(mesh, t);
            let je = self.element_jacobian(x, t);
            for a in 0..9 {
                for b in 0..9 {
                    out[idx[a] * n + idx[b]] += je[9 * a + b];
                }
            }
        }
        out
    }

    /// `G` as a function of a field (crease values shared by both sides).
    pub fn merit_field(&self, w: &DktField) -> f64 {
        self.merit(&to_split(self.disc.mesh(), w))
    }

    /// `∇G` in the field layout `[values, grads]`.
    pub fn residual_field(&self, w: &DktField) -> Vec<f64> {
        let mesh = self.disc.mesh();
        let r = self.residual(&to_split(mesh, w));
        split_to_field_covector(mesh, &r)
    }

    /// Dense Jacobian in the field layout.
    pub fn jacobian_field_dense(&self, w: &DktField) -> Vec<f64> {
        let mesh = self.disc.mesh();
        let x = to_split(mesh, w);
        let js = self.jacobian_dense(&x);
        let ns = x.len();
        let n = mesh.num_nodes();
        let nf = n + 2 * mesh.num_grad_slots();
        let map = |k: usize| if k % 3 == 0 { mesh.slot_node(k / 3) } else { n + 2 * (k / 3) + k % 3 - 1 };
        let mut out = vec![0.0; nf * nf];
        for a in 0..ns {
            for b in 0..ns {
                out[map(a) * nf + map(b)] += js[a * ns + b];
            }
        }
        out
    }
}

/// Sums the split-layout entries belonging to each field-layout unknown.
pub fn split_to_field_covector(mesh: &Triangulation, r: &[f64]) -> Vec<f64> {
    let n = mesh.num_nodes();
    let slots = mesh.num_grad_slots();
    let mut out = vec![0.0; n + 2 * slots];
    for s in 0..slots {
        out[mesh.slot_node(s)] += r[3 * s];
        out[n + 2 * s] = r[3 * s + 1];
        out[n + 2 * s + 1] = r[3 * s + 2];
    }
    out
}

#[inline]
fn quad_form(k: &[f64; 81], d: &[f64; 9]) -> f64 {
    let mut s = 0.0;
    for a in 0..9 {
        let mut row = 0.0;
        for b in 0..9 {
            row += k[9 * a + b] * d[b];
        }
        s += d[a] * row;
    }
    s
}

/// `‖∇∇_h x‖²` (plus the lumped `‖x‖²_h` when `l2`) for a split-layout
/// increment.
pub fn vertical_norm_sq(disc: &Discretization, x: &[f64], l2: bool) -> f64 {
    let mesh = disc.mesh();
    let mut s = 0.0;
    for t in 0..mesh.num_triangles() {
        let op = disc.element(t);
        let idx = element_split_dofs(mesh, t);
        let d = StepFunctional::gather(x, &idx);
        s += quad_form(&op.bending, &d);
        if l2 {
            for i in 0..3 {
                s += op.area / 3.0 * d[3 * i] * d[3 * i];
            }
        }
    }
    s.max(0.0)
}

/// `‖ε̃(u)‖²` (plus the lumped `‖u‖²_h` when `l2`).
pub fn horizontal_norm_sq(mesh: &Triangulation, u: &P1VectorField, l2: bool) -> f64 {
    let mut s = 0.0;
    for t in 0..mesh.num_triangles() {
        let e = u.strain(mesh, t);
        let area = mesh.area(t);
        s += area * (e[0][0] * e[0][0] + 2.0 * e[0][1] * e[0][1] + e[1][1] * e[1][1]);
        if l2 {
            for &v in &mesh.triangles()[t] {
                let z = u.values[v];
                s += area / 3.0 * (z[0] * z[0] + z[1] * z[1]);
            }
        }
    }
    s
}

/// `ε̃(φ_i e_a)` for the six P1 basis functions of an element, ordered
/// `2i + a`.
pub fn basis_strains(bary_grads: &[Vec2; 3]) -> [Mat2; 6] {
    let mut out = [[[0.0; 2]; 2]; 6];
    for i in 0..3 {
        for a in 0..2 {
            let s = &mut out[2 * i + a];
            for b in 0..2 {
                s[a][b] += bary_grads[i][b];
                s[b][a] += bary_grads[i][b];
            }
        }
    }
    out
}

/// Element contribution to the in-plane step
///
/// `(ε̃(u − u_p), ε̃(z)) [+ (u − u_p, z)_h] = −τθ [(ε̃(u), ε̃(z)) + (∇w⊗∇w, ε̃(z))_h]`,
///
/// as a 6×6 matrix and right-hand side in the element unknowns `2i + a`.
pub fn u_step_element(
    disc: &Discretization,
    theta: f64,
    l2: bool,
    w: &DktField,
    u_prev: &P1VectorField,
    tau: f64,
    t: usize,
) -> ([f64; 36], [f64; 6]) {
    let mesh = disc.mesh();
    let op = disc.element(t);
    let tri = mesh.triangles()[t];
    let strains = basis_strains(&op.bary_grads);
    let beta = op.area / 3.0;
    let mut load = [[0.0; 2]; 2];
    for i in 0..3 {
        let g = w.vertex_gradient(mesh, t, i);
        for a in 0..2 {
            for b in 0..2 {
                load[a][b] += beta * g[a] * g[b];
            }
        }
    }
    let mut up = [0.0; 6];
    for i in 0..3 {
        up[2 * i] = u_prev.values[tri[i]][0];
        up[2 * i + 1] = u_prev.values[tri[i]][1];
    }
    let mut mat = [0.0; 36];
    let mut rhs = [0.0; 6];
    let c = tau * theta;
    for p in 0..6 {
        for q in 0..6 {
            let a = op.area * frobenius_dot(&strains[p], &strains[q]);
            let m = if l2 && p == q { beta } else { 0.0 };
            mat[6 * p + q] = (1.0 + c) * a + m;
            rhs[p] += (a + m) * up[q];
        }
        rhs[p] -= c * frobenius_dot(&load, &strains[p]);
    }
    (mat, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_disc_mesh, make_square_mesh, CreaseSpec};

    #[test]
    fn flat_state_energies() {
        let mesh = make_square_mesh(1.0, 0.25, CreaseSpec::None).unwrap();
        let disc = Discretization::new(mesh).unwrap();
        let mesh = disc.mesh();
        let u = P1VectorField::zeros(mesh.num_nodes());
        let w = DktField::zeros(mesh);
        let e = assemble_energy(&disc, &ProblemSpec::new(mesh, 3.0, 1.0), &u, &w);
        assert!((e.bending - 4.0).abs() < 1e-12);
        assert_eq!(e.membrane, 0.0);
        assert!((e.total - 4.0).abs() < 1e-12);
        let e0 = assemble_energy(&disc, &ProblemSpec::new(mesh, 3.0, 0.0), &u, &w);
        assert_eq!(e0.total, 0.0);
    }

    #[test]
    fn paraboloid_has_small_bending_and_unit_curvatures() {
        let disc = Discretization::new(make_disc_mesh(1.0, 0.1).unwrap()).unwrap();
        let mesh = disc.mesh();
        let w = DktField::interpolate(mesh, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]), |x| x);
        let u = P1VectorField::zeros(mesh.num_nodes());
        let e = assemble_energy(&disc, &ProblemSpec::new(mesh, 0.0, 1.0), &u, &w);
        assert!(e.bending < 1e-3, "bending {}", e.bending);
        let d = diagnostics(&disc, &w, &u);
        assert!((d.mean_curv[0] - 1.0).abs() < 5e-2 && (d.mean_curv[1] - 1.0).abs() < 5e-2);
        assert_eq!(d.q_sym, None);

        let cyl = DktField::interpolate(mesh, |x| 0.5 * x[1] * x[1], |x| [0.0, x[1]]);
        let d = diagnostics(&disc, &cyl, &u);
        assert!(d.mean_curv[0].abs() < 5e-2 && (d.mean_curv[1] - 1.0).abs() < 5e-2);
    }

    #[test]
    fn q_sym_of_equal_ranges_is_one() {
        let u = P1VectorField {
            values: vec![[-1.0, 0.5], [1.0, -1.5], [0.0, 0.0]],
        };
        assert_eq!(q_sym(&u), Some(1.0));
    }

    #[test]
    fn pure_spontaneous_curvature_load() {
        let disc = Discretization::new(make_square_mesh(1.0, 0.5, CreaseSpec::None).unwrap()).unwrap();
        let mesh = disc.mesh();
        let spec = ProblemSpec::new(mesh, 10.0, 1.0);
        let u = P1VectorField::zeros(mesh.num_nodes());
        let w = DktField::zeros(mesh);
        let tau = 0.7;
        let step = StepFunctional::new(&disc, &spec, &spec.force, &u, &w, tau);
        let r = step.residual(&to_split(mesh, &w));
        let mut want = vec![0.0; r.len()];
        for t in 0..mesh.num_triangles() {
            let idx = element_split_dofs(mesh, t);
            for k in 0..9 {
                want[idx[k]] -= tau * disc.element(t).trace_load[k];
            }
        }
        for (a, b) in r.iter().zip(&want) {
            assert!((a - b).abs() < 1e-13);
        }
        let zero = StepFunctional::new(&disc, &ProblemSpec::new(mesh, 10.0, 0.0), &spec.force, &u, &w, tau);
        assert!(zero.residual(&to_split(mesh, &w)).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn split_layout_round_trip() {
        let mesh = make_square_mesh(1.0, 0.25, CreaseSpec::Straight { x: 0.0 }).unwrap();
        let w = DktField::interpolate(&mesh, |x| x[0] * x[1], |x| [x[1], x[0]]);
        let x = to_split(&mesh, &w);
        assert_eq!(crease_jump(&mesh, &x), 0.0);
        assert_eq!(from_split(&mesh, &x), w);
        assert_eq!(vec_to_field(&mesh, &field_to_vec(&w)), w);
    }
}
