//! Structural invariants of the generated meshes over random refinements.

use fvk_core::mesh::{make_disc_mesh_warped, make_square_mesh};
use fvk_core::{CreaseSpec, Triangulation};
use proptest::prelude::*;

fn centroid(mesh: &Triangulation, t: usize) -> [f64; 2] {
    let c = mesh.triangle_coords(t);
    [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn check_common(mesh: &Triangulation) -> Result<(), TestCaseError> {
    for t in 0..mesh.num_triangles() {
        let [a, b, c] = mesh.triangle_coords(t);
        let signed = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
        prop_assert!(signed > 0.0, "triangle {} is not counter-clockwise", t);
        prop_assert!((signed - mesh.area(t)).abs() <= 1e-14);
    }
    // Euler characteristic of a disc-like domain
    let (v, e, f) = (mesh.num_nodes() as i64, mesh.edges().len() as i64, mesh.num_triangles() as i64);
    prop_assert_eq!(v - e + f, 1);
    for edge in mesh.edges() {
        prop_assert!((dot(edge.normal, edge.normal) - 1.0).abs() <= 1e-12);
        prop_assert!((dot(edge.tangent, edge.tangent) - 1.0).abs() <= 1e-12);
        prop_assert!(dot(edge.normal, edge.tangent).abs() <= 1e-12);
        let t0 = edge.triangles[0].unwrap();
        match edge.triangles[1] {
            Some(t1) => {
                prop_assert!(t0 < t1);
                let d = [centroid(mesh, t1)[0] - centroid(mesh, t0)[0], centroid(mesh, t1)[1] - centroid(mesh, t0)[1]];
                prop_assert!(dot(edge.normal, d) > 0.0, "interior normal must point to the higher triangle");
            }
            None => {
                let c = centroid(mesh, t0);
                let d = [edge.midpoint[0] - c[0], edge.midpoint[1] - c[1]];
                prop_assert!(dot(edge.normal, d) > 0.0, "boundary normal must point outward");
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn disc_meshes_are_valid(h in 0.08f64..0.7, warp in -0.1f64..0.1) {
        let mesh = make_disc_mesh_warped(1.0, h, warp).unwrap();
        check_common(&mesh)?;
        prop_assert!(mesh.mesh_size() <= h * (1.0 + 2.0 * warp.abs()) + 1e-12);
        let area = mesh.total_area();
        prop_assert!(area <= std::f64::consts::PI && area > 0.8 * std::f64::consts::PI);
        for v in mesh.boundary_nodes() {
            let z = mesh.nodes()[v];
            prop_assert!((z[0].hypot(z[1]) - 1.0).abs() <= 1e-12);
        }
        prop_assert_eq!(mesh.nodes()[mesh.nearest_node([0.0, 0.0])], [0.0, 0.0]);
    }

    #[test]
    fn square_meshes_are_valid(n in 1usize..12, creased in any::<bool>()) {
        let h = 1.0 / n as f64;
        let crease = if creased { CreaseSpec::Straight { x: 0.0 } } else { CreaseSpec::None };
        let mesh = make_square_mesh(1.0, h, crease).unwrap();
        check_common(&mesh)?;
        prop_assert!((mesh.total_area() - 4.0).abs() <= 1e-12);
        prop_assert!(mesh.mesh_size() <= h * 2f64.sqrt() + 1e-12);
        prop_assert_eq!(mesh.has_crease(), creased);
        if creased {
            prop_assert_eq!(mesh.num_crease_nodes(), 2 * n + 1);
            prop_assert_eq!(mesh.num_grad_slots(), mesh.num_nodes() + 2 * n + 1);
            for (t, tri) in mesh.triangles().iter().enumerate() {
                let side = if centroid(&mesh, t)[0] < 0.0 { 1 } else { 2 };
                prop_assert_eq!(mesh.subdomain(t), side);
                for &v in tri {
                    let slot = mesh.grad_slot(v, side);
                    prop_assert_eq!(mesh.slot_node(slot), v);
                }
            }
        }
    }
}
