//! Builds meshes, problems and initial states from a configuration.

use fvk_core::mesh::{make_disc_mesh_warped, make_square_mesh};
use fvk_core::{
    BoundaryCondition, CreaseSpec, Discretization, DktField, ForceRamp, MetricOptions, P1VectorField, ProblemSpec,
    Result, Triangulation, Vec2,
};

use crate::config::{BoundaryKind, BoundaryNodes, Domain, ExperimentConfig, InitialShape, Profile};

pub fn build_mesh(cfg: &ExperimentConfig, crease: CreaseSpec) -> Result<Triangulation> {
    let m = &cfg.mesh;
    match m.domain {
        Domain::Disc => make_disc_mesh_warped(m.radius, m.h, m.warp),
        Domain::Square => make_square_mesh(m.half_width, m.h, crease),
    }
}

pub fn build_discretization(cfg: &ExperimentConfig, crease: CreaseSpec) -> Result<Discretization> {
    Discretization::new(build_mesh(cfg, crease)?)
}

fn profile(cfg: &ExperimentConfig) -> (impl Fn(Vec2) -> f64, impl Fn(Vec2) -> Vec2) {
    let a = cfg.mesh.extent();
    let parabolic = cfg.boundary_profile == Profile::Parabolic;
    (
        move |z: Vec2| if parabolic { -0.5 * (z[1] * z[1] - a * a) } else { 0.0 },
        move |z: Vec2| if parabolic { [0.0, -z[1]] } else { [0.0, 0.0] },
    )
}

/// Boundary nodes selected by the configuration.
pub fn boundary_nodes(cfg: &ExperimentConfig, mesh: &Triangulation) -> Vec<usize> {
    let a = cfg.mesh.extent();
    let on_edge = |v: usize| (mesh.nodes()[v][1].abs() - a).abs() <= 1e-12 * a.max(1.0);
    let mut left = vec![false; mesh.num_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if mesh.subdomain(t) == 1 {
            for &v in tri {
                left[v] = true;
            }
        }
    }
    mesh.boundary_nodes()
        .filter(|&v| match cfg.boundary_nodes {
            BoundaryNodes::All => true,
            BoundaryNodes::HorizontalEdges => on_edge(v),
            BoundaryNodes::HorizontalEdgesLeft => on_edge(v) && left[v],
        })
        .collect()
}

/// Problem data for parameters `theta`, `alpha` on a discretized mesh.
pub fn build_problem(cfg: &ExperimentConfig, mesh: &Triangulation, theta: f64, alpha: [f64; 2]) -> ProblemSpec {
    let mut spec = ProblemSpec::new(mesh, theta, 0.0);
    spec.alpha = alpha;
    if cfg.force.value != 0.0 {
        spec = spec.with_ball_force(mesh, cfg.force.center, cfg.force.radius, cfg.force.value);
    }
    spec.ramp = ForceRamp {
        iterations: cfg.force.ramp,
    };
    let (wd, grad) = profile(cfg);
    spec.boundary = match cfg.boundary {
        BoundaryKind::None => BoundaryCondition::None,
        BoundaryKind::SimpleSupport => BoundaryCondition::simple_support(mesh, boundary_nodes(cfg, mesh), wd),
        BoundaryKind::Clamped => BoundaryCondition::clamped(mesh, boundary_nodes(cfg, mesh), wd, grad),
    };
    spec.metric = MetricOptions {
        l2_vertical: cfg.l2_vertical,
        l2_horizontal: cfg.l2_horizontal,
        pinned_node: cfg.pin_origin.then(|| mesh.nearest_node([0.0, 0.0])),
    };
    spec
}

pub fn initial_state(cfg: &ExperimentConfig, mesh: &Triangulation) -> (P1VectorField, DktField) {
    let u = P1VectorField::zeros(mesh.num_nodes());
    let w = match cfg.initial {
        InitialShape::Zero => DktField::zeros(mesh),
        InitialShape::Profile => {
            let (wd, grad) = profile(cfg);
            DktField::interpolate(mesh, wd, grad)
        }
    };
    (u, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;

    #[test]
    fn cardboard_supports_both_horizontal_edges() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::Cardboard);
        cfg.mesh.h = 0.25;
        let mesh = build_mesh(&cfg, CreaseSpec::None).unwrap();
        let nodes = boundary_nodes(&cfg, &mesh);
        // 9 grid points on each of the two edges
        assert_eq!(nodes.len(), 18);
        let spec = build_problem(&cfg, &mesh, cfg.theta, cfg.alpha);
        let BoundaryCondition::SimpleSupport { values, .. } = &spec.boundary else {
            panic!("expected simple support");
        };
        assert!(values.iter().all(|&v| v == 0.0));
        let (_, w0) = initial_state(&cfg, &mesh);
        let c = mesh.nearest_node([0.0, 0.0]);
        assert_eq!(w0.values[c], 0.5);
    }

    #[test]
    fn bilayer_supports_only_the_left_part() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::BilayerFold);
        cfg.mesh.h = 0.25;
        let mesh = build_mesh(&cfg, CreaseSpec::Straight { x: 0.0 }).unwrap();
        let nodes = boundary_nodes(&cfg, &mesh);
        assert_eq!(nodes.len(), 10);
        assert!(nodes.iter().all(|&v| mesh.nodes()[v][0] <= 1e-12));
    }

    #[test]
    fn pinning_picks_the_origin() {
        let cfg = ExperimentConfig::defaults(ExperimentKind::CurvatureInversion);
        let mesh = build_mesh(&cfg, CreaseSpec::None).unwrap();
        let spec = build_problem(&cfg, &mesh, 0.0, [1.0; 2]);
        let p = spec.metric.pinned_node.unwrap();
        assert_eq!(mesh.nodes()[p], [0.0, 0.0]);
    }
}
