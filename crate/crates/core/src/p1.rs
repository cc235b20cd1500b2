//! Continuous P1 vector fields and the interpolated (vertex-rule) inner product.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{Mat2, Vec2};
use crate::mesh::Triangulation;

/// In-plane displacement with one 2-vector per node.
#[derive(Debug, Clone, PartialEq)]
pub struct P1VectorField {
    pub values: Vec<Vec2>,
}

impl P1VectorField {
    pub fn zeros(num_nodes: usize) -> Self {
        P1VectorField {
            values: vec![[0.0; 2]; num_nodes],
        }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate<F: Fn(Vec2) -> Vec2>(mesh: &Triangulation, f: F) -> Self {
        P1VectorField {
            values: mesh.nodes().iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Constant gradient `∇u` on triangle `t`, `(∇u)_{ab} = ∂_b u_a`.
    pub fn gradient(&self, mesh: &Triangulation, t: usize) -> Mat2 {
        let grads = barycentric_gradients(&mesh.triangle_coords(t));
        let tri = mesh.triangles()[t];
        let mut g = [[0.0; 2]; 2];
        for (i, &v) in tri.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    g[a][b] += self.values[v][a] * grads[i][b];
                }
            }
        }
        g
    }

    /// Twice the symmetric gradient, `ε̃(u) = ∇u + ∇uᵀ`, on triangle `t`.
    pub fn strain(&self, mesh: &Triangulation, t: usize) -> Mat2 {
        symmetrized(&self.gradient(mesh, t))
    }
}

/// `A + Aᵀ`.
pub fn symmetrized(g: &Mat2) -> Mat2 {
    [
        [2.0 * g[0][0], g[0][1] + g[1][0]],
        [g[0][1] + g[1][0], 2.0 * g[1][1]],
    ]
}

/// Gradients of the barycentric coordinates of a counter-clockwise triangle.
pub fn barycentric_gradients(v: &[Vec2; 3]) -> [Vec2; 3] {
    let area2 = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
        - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]);
    let mut out = [[0.0; 2]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        out[i] = [(v[j][1] - v[k][1]) / area2, (v[k][0] - v[j][0]) / area2];
    }
    out
}

/// Vertex-rule weights `β_z^T = ∫_T φ_z = |T|/3`.
#[derive(Debug, Clone)]
pub struct VertexQuadrature {
    weights: Vec<[f64; 3]>,
}

impl VertexQuadrature {
    pub fn new(mesh: &Triangulation) -> Self {
        VertexQuadrature {
            weights: (0..mesh.num_triangles())
                .map(|t| [mesh.area(t) / 3.0; 3])
                .collect(),
        }
    }

    pub fn weight(&self, t: usize, local: usize) -> f64 {
        self.weights[t][local]
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().flat_map(|w| w.iter()).sum()
    }
}

/// `(v, w)_h = Σ_T Σ_{z ∈ T} β_z^T v|_T(z) · w|_T(z)`.
///
/// `v(t, i)` and `w(t, i)` evaluate the fields on triangle `t` at its local
/// vertex `i`, so fields that jump across edges are handled per element.
pub fn interpolated_inner_product<const L: usize, V, W>(mesh: &Triangulation, v: V, w: W) -> f64
where
    V: Fn(usize, usize) -> [f64; L],
    W: Fn(usize, usize) -> [f64; L],
{
    let mut sum = 0.0;
    for t in 0..mesh.num_triangles() {
        let beta = mesh.area(t) / 3.0;
        for i in 0..3 {
            let (a, b) = (v(t, i), w(t, i));
            sum += beta * a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>();
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_square_mesh, CreaseSpec};

    #[test]
    fn affine_field_has_exact_gradient() {
        let mesh = make_square_mesh(1.0, 0.25, CreaseSpec::None).unwrap();
        let u = P1VectorField::interpolate(&mesh, |x| [x[0], 0.0]);
        for t in 0..mesh.num_triangles() {
            let g = u.gradient(&mesh, t);
            let e = u.strain(&mesh, t);
            for a in 0..2 {
                for b in 0..2 {
                    let want = if a == 0 && b == 0 { 1.0 } else { 0.0 };
                    assert!((g[a][b] - want).abs() < 1e-14);
                    assert!((e[a][b] - 2.0 * want).abs() < 1e-14);
                }
            }
        }
        let zero = P1VectorField::zeros(mesh.num_nodes());
        assert_eq!(zero.strain(&mesh, 3), [[0.0; 2]; 2]);
    }

    #[test]
    fn gradient_matches_closed_form_on_reference_triangle() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let mesh = Triangulation::new(nodes, vec![[0, 1, 2]], None, Vec::new()).unwrap();
        let u = P1VectorField {
            values: vec![[0.3, -1.2], [2.5, 0.7], [-0.4, 1.9]],
        };
        // on the reference triangle ∂_1 u = u(1,0) - u(0,0), ∂_2 u = u(0,1) - u(0,0)
        let g = u.gradient(&mesh, 0);
        for a in 0..2 {
            assert!((g[a][0] - (u.values[1][a] - u.values[0][a])).abs() < 1e-14);
            assert!((g[a][1] - (u.values[2][a] - u.values[0][a])).abs() < 1e-14);
        }
    }

    #[test]
    fn vertex_rule_examples() {
        let unit = make_square_mesh(0.5, 0.1, CreaseSpec::None).unwrap();
        let one = interpolated_inner_product(&unit, |_, _| [1.0], |_, _| [1.0]);
        assert!((one - 1.0).abs() < 1e-14);

        let mesh = make_square_mesh(1.0, 0.1, CreaseSpec::None).unwrap();
        let odd = interpolated_inner_product(
            &mesh,
            |t, i| [mesh.nodes()[mesh.triangles()[t][i]][0]],
            |_, _| [1.0],
        );
        assert!(odd.abs() < 1e-13);

        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let tri = Triangulation::new(nodes, vec![[0, 1, 2]], None, Vec::new()).unwrap();
        let x1 = |t: usize, i: usize| [tri.nodes()[tri.triangles()[t][i]][0]];
        let val = interpolated_inner_product(&tri, x1, x1);
        assert_eq!(val, 1.0 / 6.0);

        let q = VertexQuadrature::new(&mesh);
        assert!((q.total() - 4.0).abs() < 1e-12 * 4.0);
    }
}
