//! Discrete energies against continuum integrals.

use fvk_core::energy::{assemble_energy, membrane_quadrature_pair};
use fvk_core::mesh::make_square_mesh;
use fvk_core::p1::{interpolated_inner_product, VertexQuadrature};
use fvk_core::quadrature::{integrate_triangle, triangle_rule};
use fvk_core::{CreaseSpec, Discretization, DktField, P1VectorField, ProblemSpec};

fn w_exact(x: [f64; 2]) -> f64 {
    0.3 * x[0].sin() * x[1].cos() + 0.2 * x[0] * x[1]
}
fn w_grad(x: [f64; 2]) -> [f64; 2] {
    [
        0.3 * x[0].cos() * x[1].cos() + 0.2 * x[1],
        -0.3 * x[0].sin() * x[1].sin() + 0.2 * x[0],
    ]
}
fn w_hess(x: [f64; 2]) -> [[f64; 2]; 2] {
    let off = -0.3 * x[0].cos() * x[1].sin() + 0.2;
    let d = -0.3 * x[0].sin() * x[1].cos();
    [[d, off], [off, d]]
}
fn u_exact(x: [f64; 2]) -> [f64; 2] {
    [0.1 * (x[1]).sin(), 0.05 * x[0] * x[1]]
}
fn u_grad(x: [f64; 2]) -> [[f64; 2]; 2] {
    [[0.0, 0.1 * x[1].cos()], [0.05 * x[1], 0.05 * x[0]]]
}
fn force(x: [f64; 2]) -> f64 {
    1.0 + x[0] * x[0]
}

const THETA: f64 = 10.0;
const ALPHA: f64 = 0.5;

/// `E^θ(u, w)` on `[-1, 1]²` by a high-order rule on a fine subdivision.
fn continuum_energy() -> f64 {
    let mesh = make_square_mesh(1.0, 0.05, CreaseSpec::None).unwrap();
    let rule = triangle_rule(8);
    (0..mesh.num_triangles())
        .map(|t| {
            integrate_triangle(&mesh.triangle_coords(t), &rule, |x, _| {
                let h = w_hess(x);
                let bend = (h[0][0] - ALPHA).powi(2) + 2.0 * h[0][1] * h[0][1] + (h[1][1] - ALPHA).powi(2);
                let g = w_grad(x);
                let du = u_grad(x);
                let mut mem = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        let phi = g[a] * g[b] + du[a][b] + du[b][a];
                        mem += phi * phi;
                    }
                }
                0.5 * bend + 0.5 * THETA * mem - force(x) * w_exact(x)
            })
        })
        .sum()
}

#[test]
fn energy_converges_to_continuum_value() {
    let exact = continuum_energy();
    let mut errors = vec![];
    for h in [0.2, 0.1, 0.05] {
        let disc = Discretization::new(make_square_mesh(1.0, h, CreaseSpec::None).unwrap()).unwrap();
        let mesh = disc.mesh();
        let mut spec = ProblemSpec::new(mesh, THETA, ALPHA);
        spec.force = mesh.nodes().iter().map(|&x| force(x)).collect();
        let w = DktField::interpolate(mesh, w_exact, w_grad);
        let u = P1VectorField::interpolate(mesh, u_exact);
        let e = assemble_energy(&disc, &spec, &u, &w);
        assert!((e.total - (e.bending + e.membrane - e.force)).abs() <= 1e-14 * e.total.abs().max(1.0));
        errors.push((e.total - exact).abs() / exact.abs());
    }
    eprintln!("relative energy errors {errors:?}");
    assert!(errors.windows(2).all(|p| p[1] < p[0]));
}

/// `|(φ_h, φ_h)_h − ∫|φ_h|²|` vanishes under refinement for
/// `φ_h = ∇_h w_h ⊗ ∇_h w_h + ε̃(u_h)`.
#[test]
fn vertex_rule_error_decays() {
    let mut errors = vec![];
    for h in [0.2, 0.1, 0.05] {
        let disc = Discretization::new(make_square_mesh(1.0, h, CreaseSpec::None).unwrap()).unwrap();
        let mesh = disc.mesh();
        let w = DktField::interpolate(mesh, w_exact, w_grad);
        let u = P1VectorField::interpolate(mesh, u_exact);
        let (vertex, exact) = membrane_quadrature_pair(&disc, &u, &w);
        errors.push((vertex - exact).abs());
    }
    eprintln!("vertex-rule errors {errors:?}");
    assert!(errors.windows(2).all(|p| p[1] < p[0]));
}

#[test]
fn vertex_weights_sum_to_area_and_integrate_affine_exactly() {
    let mesh = make_square_mesh(1.0, 0.1, CreaseSpec::None).unwrap();
    let q = VertexQuadrature::new(&mesh);
    assert!((q.total() - 4.0).abs() <= 1e-12 * 4.0);
    // ∫ (1 + 2x₁ + 3x₂) · 1 = 4 on the symmetric square
    let v = interpolated_inner_product::<1, _, _>(
        &mesh,
        |t, i| {
            let x = mesh.nodes()[mesh.triangles()[t][i]];
            [1.0 + 2.0 * x[0] + 3.0 * x[1]]
        },
        |_, _| [1.0],
    );
    assert!((v - 4.0).abs() < 1e-12);
}

/// Splitting the square along a crease does not change the energy of a
/// continuous field when both sides share `α`.
#[test]
fn two_subdomain_assembly_equals_single_domain() {
    let plain = Discretization::new(make_square_mesh(1.0, 0.1, CreaseSpec::None).unwrap()).unwrap();
    let creased = Discretization::new(make_square_mesh(1.0, 0.1, CreaseSpec::Straight { x: 0.0 }).unwrap()).unwrap();
    assert_eq!(plain.mesh().triangles(), creased.mesh().triangles());
    let energy = |disc: &Discretization| {
        let mesh = disc.mesh();
        let spec = ProblemSpec::new(mesh, THETA, ALPHA);
        let w = DktField::interpolate(mesh, w_exact, w_grad);
        let u = P1VectorField::interpolate(mesh, u_exact);
        assemble_energy(disc, &spec, &u, &w)
    };
    assert_eq!(energy(&plain), energy(&creased));
}
