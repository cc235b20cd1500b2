//! Problem data: material parameters, loads, boundary conditions and the
//! choice of flow metric.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Vec2;
use crate::mesh::Triangulation;
use crate::{Error, Result};

/// Boundary conditions on the deflection `w`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    None,
    /// Prescribes `w(z) = values[i]` at `nodes[i]`; gradients stay free.
    SimpleSupport { nodes: Vec<usize>, values: Vec<f64> },
    /// Prescribes value and gradient (all gradient slots of the node).
    Clamped {
        nodes: Vec<usize>,
        values: Vec<f64>,
        grads: Vec<Vec2>,
    },
}

impl BoundaryCondition {
    /// Simple support on `nodes` with values sampled from `w_d`.
    pub fn simple_support<F: Fn(Vec2) -> f64>(mesh: &Triangulation, nodes: Vec<usize>, w_d: F) -> Self {
        let values = nodes.iter().map(|&v| w_d(mesh.nodes()[v])).collect();
        BoundaryCondition::SimpleSupport { nodes, values }
    }

    /// Clamped conditions on `nodes` sampled from `w_d` and its gradient.
    pub fn clamped<F, G>(mesh: &Triangulation, nodes: Vec<usize>, w_d: F, grad: G) -> Self
    where
        F: Fn(Vec2) -> f64,
        G: Fn(Vec2) -> Vec2,
    {
        let values = nodes.iter().map(|&v| w_d(mesh.nodes()[v])).collect();
        let grads = nodes.iter().map(|&v| grad(mesh.nodes()[v])).collect();
        BoundaryCondition::Clamped {
            nodes,
            values,
            grads,
        }
    }

    pub fn nodes(&self) -> &[usize] {
        match self {
            BoundaryCondition::None => &[],
            BoundaryCondition::SimpleSupport { nodes, .. } | BoundaryCondition::Clamped { nodes, .. } => nodes,
        }
    }
}

/// Inner products defining the flow metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricOptions {
    /// Adds `(w, v)_h` to `(D_h² w, D_h² v)`.
    pub l2_vertical: bool,
    /// Adds `(u, z)_h` to `(ε̃(u), ε̃(z))`.
    pub l2_horizontal: bool,
    /// Node whose deflection is fixed to zero.
    pub pinned_node: Option<usize>,
}

impl MetricOptions {
    pub fn l2_both() -> Self {
        MetricOptions {
            l2_vertical: true,
            l2_horizontal: true,
            pinned_node: None,
        }
    }
}

/// Linear load ramp: iteration `k` uses `min(k / iterations, 1) · f`.
/// `iterations = 0` applies the full load from the start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ForceRamp {
    pub iterations: usize,
}

impl ForceRamp {
    pub fn factor(&self, k: usize) -> f64 {
        if self.iterations == 0 {
            1.0
        } else {
            (k as f64 / self.iterations as f64).min(1.0)
        }
    }
}

/// Everything that defines the energy and the constraints, independent of
/// the solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub theta: f64,
    /// `α` on subdomain 1 and subdomain 2.
    pub alpha: [f64; 2],
    /// Vertical load density per node.
    pub force: Vec<f64>,
    pub ramp: ForceRamp,
    pub boundary: BoundaryCondition,
    /// Prescribed in-plane displacements `(node, value)`.
    pub displacement_bc: Vec<(usize, Vec2)>,
    pub metric: MetricOptions,
}

impl ProblemSpec {
    /// Unloaded, unconstrained problem with uniform `α`.
    pub fn new(mesh: &Triangulation, theta: f64, alpha: f64) -> Self {
        ProblemSpec {
            theta,
            alpha: [alpha; 2],
            force: vec![0.0; mesh.num_nodes()],
            ramp: ForceRamp::default(),
            boundary: BoundaryCondition::None,
            displacement_bc: Vec::new(),
            metric: MetricOptions::default(),
        }
    }

    /// `α` on triangle `t`, chosen by its subdomain tag.
    pub fn alpha_on(&self, mesh: &Triangulation, t: usize) -> f64 {
        if mesh.subdomain(t) == 2 {
            self.alpha[1]
        } else {
            self.alpha[0]
        }
    }

    /// Sets the load to `value` on nodes inside the closed ball `B_r(center)`.
    pub fn with_ball_force(mut self, mesh: &Triangulation, center: Vec2, radius: f64, value: f64) -> Self {
        for (f, z) in self.force.iter_mut().zip(mesh.nodes()) {
            let d = libm::hypot(z[0] - center[0], z[1] - center[1]);
            *f = if d <= radius + 1e-12 { value } else { 0.0 };
        }
        self
    }

    pub fn validate(&self, mesh: &Triangulation) -> Result<()> {
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return Err(Error::InvalidInput(format!("theta must be finite and nonnegative, got {}", self.theta)));
        }
        if !self.alpha.iter().all(|a| a.is_finite()) {
            return Err(Error::InvalidInput("alpha must be finite".into()));
        }
        if self.force.len() != mesh.num_nodes() || !self.force.iter().all(|f| f.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "force field needs {} finite nodal values, got {}",
                mesh.num_nodes(),
                self.force.len()
            )));
        }
        let n = mesh.num_nodes();
        match &self.boundary {
            BoundaryCondition::None => {}
            BoundaryCondition::SimpleSupport { nodes, values } => {
                if nodes.len() != values.len() {
                    return Err(Error::InvalidInput("simple support: one value per node".into()));
                }
            }
            BoundaryCondition::Clamped { nodes, values, grads } => {
                if nodes.len() != values.len() || nodes.len() != grads.len() {
                    return Err(Error::InvalidInput("clamped: one value and gradient per node".into()));
                }
            }
        }
        for &v in self.boundary.nodes() {
            if v >= n || !mesh.is_boundary_node(v) {
                return Err(Error::InvalidInput(format!("boundary condition on non-boundary node {v}")));
            }
        }
        for &(v, _) in &self.displacement_bc {
            if v >= n {
                return Err(Error::InvalidInput(format!("displacement condition on missing node {v}")));
            }
        }
        if let Some(p) = self.metric.pinned_node {
            if p >= n {
                return Err(Error::InvalidInput(format!("pinned node {p} does not exist")));
            }
            if self.boundary.nodes().contains(&p) {
                return Err(Error::InvalidInput(format!(
                    "node {p} is both pinned and carries a boundary condition"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_square_mesh, CreaseSpec};

    #[test]
    fn ramp_is_linear_then_flat() {
        let r = ForceRamp { iterations: 20 };
        assert_eq!(r.factor(0), 0.0);
        assert_eq!(r.factor(10), 0.5);
        assert_eq!(r.factor(20), 1.0);
        assert_eq!(r.factor(57), 1.0);
        assert_eq!(ForceRamp::default().factor(0), 1.0);
    }

    #[test]
    fn validation_rejects_bad_data() {
        let mesh = make_square_mesh(1.0, 0.5, CreaseSpec::None).unwrap();
        let spec = ProblemSpec::new(&mesh, 1.0, 1.0);
        assert!(spec.validate(&mesh).is_ok());
        let mut bad = spec.clone();
        bad.theta = -1.0;
        assert!(bad.validate(&mesh).is_err());
        let mut bad = spec.clone();
        let center = mesh.nearest_node([0.0, 0.0]);
        bad.boundary = BoundaryCondition::SimpleSupport {
            nodes: vec![center],
            values: vec![0.0],
        };
        assert!(bad.validate(&mesh).is_err());
        let mut bad = spec;
        bad.metric.pinned_node = Some(10_000);
        assert!(bad.validate(&mesh).is_err());
    }

    #[test]
    fn ball_force_marks_center_nodes() {
        let mesh = make_square_mesh(1.0, 0.05, CreaseSpec::None).unwrap();
        let spec = ProblemSpec::new(&mesh, 1.0, 0.0).with_ball_force(&mesh, [0.0, 0.0], 0.1, -2.0);
        let loaded = spec.force.iter().filter(|&&f| f != 0.0).count();
        // grid points with |z| ≤ 0.1 at spacing 0.05: 1 + 4 + 4 + 4 = 13 (radius 2 lattice)
        assert_eq!(loaded, 13);
    }
}
