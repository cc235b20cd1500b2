//! The decoupled discrete gradient flow.
//!
//! Each step solves the implicit deflection update by Newton's method,
//! halving the step size on failure, then the linear in-plane update, and
//! doubles the step size (up to `τ_max`) for the next step.

mod constraints;

pub use constraints::{ConstraintSet, SaddleSystem};

use alloc::vec;
use alloc::vec::Vec;

use crate::dkt::{DktField, Discretization};
use crate::energy::{
    assemble_energy_with_load, crease_jump, diagnostics, element_split_dofs, from_split, horizontal_norm_sq,
    split_to_field_covector, to_split, u_step_element, vertical_norm_sq, Diagnostics, EnergyBreakdown,
    StepFunctional,
};
use crate::linalg::Vec2;
use crate::p1::P1VectorField;
use crate::problem::ProblemSpec;
use crate::{Error, Result};

/// How the Newton increment is measured against `ε_Newton`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NewtonMeasure {
    /// `‖D_h² δ‖ / τ`, the increment of the discrete time derivative.
    #[default]
    TimeDerivative,
    /// `‖D_h² δ‖`.
    Increment,
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tau_initial: f64,
    pub tau_max: f64,
    pub tau_min: f64,
    pub max_newton: usize,
    pub newton_tol: f64,
    pub newton_measure: NewtonMeasure,
    /// Newton also stops once the residual drops by this factor.
    pub residual_reduction: f64,
    pub stop_tol: f64,
    pub max_iterations: usize,
    pub shrink: f64,
    pub growth: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau_initial: 1.0,
            tau_max: 1e5,
            tau_min: 1e-14,
            max_newton: 5,
            newton_tol: 1e-5,
            newton_measure: NewtonMeasure::TimeDerivative,
            residual_reduction: 1e-10,
            stop_tol: 1e-12,
            max_iterations: 500,
            shrink: 0.5,
            growth: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.tau_initial,
            self.tau_max,
            self.tau_min,
            self.newton_tol,
            self.stop_tol,
            self.growth,
        ];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite())
            || self.max_newton == 0
            || !(self.shrink > 0.0 && self.shrink < 1.0)
            || !(self.residual_reduction >= 0.0)
        {
            return Err(Error::InvalidInput(
                "solver settings must be positive, N ≥ 1 and the shrink factor in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// A successful Newton solve of the deflection step.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub w: DktField,
    /// Solution in the split layout (both crease copies).
    pub split: Vec<f64>,
    pub iterations: usize,
    /// Residual norms `‖F(w_i)‖`, starting with the initial guess.
    pub residuals: Vec<f64>,
    /// Convergence measures of the increments.
    pub increments: Vec<f64>,
}

/// Why a Newton solve was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum NewtonFailure {
    NotConverged { residuals: Vec<f64> },
    NonFinite,
    Singular(Error),
}

/// Record of one accepted flow step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    pub tau: f64,
    pub rejections: usize,
    pub newton_iterations: usize,
    pub newton_residuals: Vec<f64>,
    pub force_factor: f64,
    pub energy: EnergyBreakdown,
    pub diagnostics: Diagnostics,
    /// `‖d_t w‖_ver` and `‖d_t u‖_hor` in the flow metrics.
    pub dw_norm: f64,
    pub du_norm: f64,
    /// `τ (‖d_t w‖²_ver + ‖d_t u‖²_hor)`.
    pub dissipation: f64,
    pub crease_jump: f64,
}

/// Iterate and histories of a flow run.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub u: P1VectorField,
    pub w: DktField,
    /// Step size tried next.
    pub tau: f64,
    /// Number of accepted steps.
    pub k: usize,
    /// Energies; entry 0 belongs to the initial state.
    pub energy_history: Vec<EnergyBreakdown>,
    pub records: Vec<StepRecord>,
    pub converged: bool,
}

impl FlowState {
    pub fn step_history(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.tau).collect()
    }

    pub fn last_diagnostics(&self) -> Option<Diagnostics> {
        self.records.last().map(|r| r.diagnostics)
    }
}

/// A flow for one problem on one discretization, with cached sparsity
/// patterns and orderings.
#[derive(Debug)]
pub struct Flow<'a> {
    disc: &'a Discretization,
    spec: &'a ProblemSpec,
    cfg: SolverConfig,
    constraints: ConstraintSet,
    w_system: SaddleSystem,
    u_system: SaddleSystem,
    u_fixed: Vec<(usize, f64)>,
}

impl<'a> Flow<'a> {
    pub fn new(disc: &'a Discretization, spec: &'a ProblemSpec, cfg: SolverConfig) -> Result<Self> {
        let mesh = disc.mesh();
        spec.validate(mesh)?;
        cfg.validate()?;
        let constraints = ConstraintSet::for_deflection(mesh, spec)?;
        let nw = 3 * mesh.num_grad_slots();
        let mut w_elems = Vec::with_capacity(9 * mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            w_elems.extend_from_slice(&element_split_dofs(mesh, t));
        }
        let w_coords: Vec<Vec2> = (0..nw).map(|d| mesh.nodes()[mesh.slot_node(d / 3)]).collect();
        let w_system = SaddleSystem::new(
            nw,
            9,
            &w_elems,
            &constraints.fixed_mask(nw),
            &constraints.crease_pairs,
            &w_coords,
        )?;

        let nu = 2 * mesh.num_nodes();
        let mut u_elems = Vec::with_capacity(6 * mesh.num_triangles());
        for tri in mesh.triangles() {
            for &v in tri {
                u_elems.push(2 * v);
                u_elems.push(2 * v + 1);
            }
        }
        let mut u_fixed = Vec::new();
        let mut u_mask = vec![false; nu];
        for &(v, val) in &spec.displacement_bc {
            for a in 0..2 {
                u_mask[2 * v + a] = true;
                u_fixed.push((2 * v + a, val[a]));
            }
        }
        let u_coords: Vec<Vec2> = (0..nu).map(|d| mesh.nodes()[d / 2]).collect();
        let u_system = SaddleSystem::new(nu, 6, &u_elems, &u_mask, &[], &u_coords)?;
        Ok(Flow {
            disc,
            spec,
            cfg,
            constraints,
            w_system,
            u_system,
            u_fixed,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn discretization(&self) -> &Discretization {
        self.disc
    }

    /// Load used in accepted step `k` (1-based).
    pub fn force_at(&self, k: usize) -> Vec<f64> {
        let s = self.spec.ramp.factor(k);
        self.spec.force.iter().map(|f| s * f).collect()
    }

    /// Copy of `w` with the prescribed values written in.
    pub fn constrain(&self, w: &DktField) -> DktField {
        let mesh = self.disc.mesh();
        let mut x = to_split(mesh, w);
        self.constraints.apply(&mut x);
        from_split(mesh, &x)
    }

    /// Initial state; prescribed deflection values are imposed.
    pub fn initial_state(&self, u0: P1VectorField, w0: DktField) -> FlowState {
        let mut u = u0;
        for &(d, val) in &self.u_fixed {
            u.values[d / 2][d % 2] = val;
        }
        let w = self.constrain(&w0);
        let e = assemble_energy_with_load(self.disc, self.spec, &self.force_at(0), &u, &w);
        FlowState {
            u,
            w,
            tau: self.cfg.tau_initial,
            k: 0,
            energy_history: vec![e],
            records: Vec::new(),
            converged: false,
        }
    }

    /// Step functional of the deflection update.
    pub fn step_functional(&self, u_prev: &P1VectorField, w_prev: &DktField, tau: f64, force: &[f64]) -> StepFunctional<'a> {
        StepFunctional::new(self.disc, self.spec, force, u_prev, w_prev, tau)
    }

    /// One Newton direction `(δ, λ)` of the (coupled) deflection system at
    /// the split state `x`.
    pub fn newton_direction(&self, step: &StepFunctional<'_>, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mesh = self.disc.mesh();
        let mut m = self.w_system.new_matrix();
        for t in 0..mesh.num_triangles() {
            self.w_system.add_element(&mut m, t, &step.element_jacobian(x, t));
        }
        let rhs: Vec<f64> = step.residual(x).iter().map(|r| -r).collect();
        self.w_system.solve(&mut m, &rhs, "deflection Newton system")
    }

    fn reduced_residual(&self, r: &[f64]) -> f64 {
        let mut r = r.to_vec();
        for (d, v) in r.iter_mut().enumerate() {
            if !self.w_system.is_free(d) {
                *v = 0.0;
            }
        }
        let f = split_to_field_covector(self.disc.mesh(), &r);
        libm::sqrt(f.iter().map(|v| v * v).sum())
    }

    /// Newton's method for the deflection step with step size `tau`.
    pub fn newton_solve_w(
        &self,
        u_prev: &P1VectorField,
        w_prev: &DktField,
        tau: f64,
        force: &[f64],
    ) -> core::result::Result<NewtonOutcome, NewtonFailure> {
        let mesh = self.disc.mesh();
        let step = self.step_functional(u_prev, w_prev, tau, force);
        let mut x = step.x_prev().to_vec();
        let r0 = self.reduced_residual(&step.residual(&x));
        let mut residuals = vec![r0];
        let mut increments = Vec::new();
        for it in 1..=self.cfg.max_newton {
            let (delta, _) = self.newton_direction(&step, &x).map_err(NewtonFailure::Singular)?;
            for (xi, di) in x.iter_mut().zip(&delta) {
                *xi += di;
            }
            let inc = libm::sqrt(vertical_norm_sq(self.disc, &delta, false));
            let measure = match self.cfg.newton_measure {
                NewtonMeasure::TimeDerivative => inc / tau,
                NewtonMeasure::Increment => inc,
            };
            let r = self.reduced_residual(&step.residual(&x));
            increments.push(measure);
            residuals.push(r);
            if !measure.is_finite() || !r.is_finite() {
                return Err(NewtonFailure::NonFinite);
            }
            if measure <= self.cfg.newton_tol || r <= self.cfg.residual_reduction * r0 {
                return Ok(NewtonOutcome {
                    w: from_split(mesh, &x),
                    split: x,
                    iterations: it,
                    residuals,
                    increments,
                });
            }
        }
        Err(NewtonFailure::NotConverged { residuals })
    }

    /// Solves the linear in-plane step for the new deflection `w`.
    pub fn solve_u(&self, w: &DktField, u_prev: &P1VectorField, tau: f64) -> Result<P1VectorField> {
        if self.spec.theta == 0.0 {
            return Ok(u_prev.clone());
        }
        let mesh = self.disc.mesh();
        let l2 = self.spec.metric.l2_horizontal;
        let nu = 2 * mesh.num_nodes();
        let mut up: Vec<f64> = u_prev.values.iter().flat_map(|v| v.iter().copied()).collect();
        for &(d, val) in &self.u_fixed {
            up[d] = val;
        }
        let mut m = self.u_system.new_matrix();
        let mut rhs = vec![0.0; nu];
        for t in 0..mesh.num_triangles() {
            let (mat, b) = u_step_element(self.disc, self.spec.theta, l2, w, u_prev, tau, t);
            self.u_system.add_element(&mut m, t, &mat);
            let tri = mesh.triangles()[t];
            for p in 0..6 {
                let dp = 2 * tri[p / 2] + p % 2;
                rhs[dp] += b[p];
                // move known (prescribed) values to the right-hand side
                for q in 0..6 {
                    let dq = 2 * tri[q / 2] + q % 2;
                    if !self.u_system.is_free(dq) {
                        rhs[dp] -= mat[6 * p + q] * up[dq];
                    }
                }
            }
        }
        let (sol, _) = self.u_system.solve(&mut m, &rhs, "in-plane step (rigid-body modes need displacement conditions or L² augmentation)")?;
        let mut out = P1VectorField::zeros(mesh.num_nodes());
        for d in 0..nu {
            out.values[d / 2][d % 2] = if self.u_system.is_free(d) { sol[d] } else { up[d] };
        }
        Ok(out)
    }

    /// One accepted flow step: shrink `τ` until Newton succeeds, solve the
    /// in-plane update, record and grow `τ`.
    pub fn flow_step(&self, state: &mut FlowState) -> Result<()> {
        let mesh = self.disc.mesh();
        let k = state.k + 1;
        let force = self.force_at(k);
        let mut tau = state.tau;
        let mut rejections = 0;
        let outcome = loop {
            match self.newton_solve_w(&state.u, &state.w, tau, &force) {
                Ok(o) => break o,
                Err(_) => {
                    tau *= self.cfg.shrink;
                    rejections += 1;
                    if tau < self.cfg.tau_min {
                        return Err(Error::StepSizeUnderflow { iteration: k, tau });
                    }
                }
            }
        };
        let u = self.solve_u(&outcome.w, &state.u, tau)?;

        let x_prev = to_split(mesh, &state.w);
        let dw: Vec<f64> = outcome.split.iter().zip(&x_prev).map(|(a, b)| a - b).collect();
        let du = P1VectorField {
            values: u
                .values
                .iter()
                .zip(&state.u.values)
                .map(|(a, b)| [a[0] - b[0], a[1] - b[1]])
                .collect(),
        };
        let dw_sq = vertical_norm_sq(self.disc, &dw, self.spec.metric.l2_vertical);
        let du_sq = horizontal_norm_sq(mesh, &du, self.spec.metric.l2_horizontal);
        let energy = assemble_energy_with_load(self.disc, self.spec, &force, &u, &outcome.w);
        let record = StepRecord {
            k,
            tau,
            rejections,
            newton_iterations: outcome.iterations,
            newton_residuals: outcome.residuals.clone(),
            force_factor: self.spec.ramp.factor(k),
            energy,
            diagnostics: diagnostics(self.disc, &outcome.w, &u),
            dw_norm: libm::sqrt(dw_sq) / tau,
            du_norm: libm::sqrt(du_sq) / tau,
            dissipation: (dw_sq + du_sq) / tau,
            crease_jump: crease_jump(mesh, &outcome.split),
        };
        state.converged = record.dw_norm + record.du_norm <= self.cfg.stop_tol * tau.min(1.0);
        state.w = outcome.w;
        state.u = u;
        state.k = k;
        state.tau = (self.cfg.growth * tau).min(self.cfg.tau_max);
        state.energy_history.push(energy);
        state.records.push(record);
        Ok(())
    }

    /// Steps until the stopping criterion holds or `max_iterations` steps
    /// have been taken in total.
    pub fn advance(&self, state: &mut FlowState) -> Result<()> {
        while !state.converged && state.k < self.cfg.max_iterations {
            self.flow_step(state)?;
        }
        Ok(())
    }

    /// Runs the flow from `(u0, w0)`.
    pub fn run(&self, u0: P1VectorField, w0: DktField) -> Result<FlowState> {
        let mut state = self.initial_state(u0, w0);
        self.advance(&mut state)?;
        Ok(state)
    }
}

/// Runs the flow for each entry of `schedule`, warm-starting every run from
/// the final state of the previous one. `make_spec` builds the problem for a
/// parameter value; each run starts with step size `cfg.tau_initial`.
pub fn continuation_sweep<F>(
    disc: &Discretization,
    schedule: &[f64],
    make_spec: F,
    cfg: SolverConfig,
    u0: P1VectorField,
    w0: DktField,
) -> Result<Vec<FlowState>>
where
    F: Fn(f64) -> ProblemSpec,
{
    if schedule.is_empty() {
        return Err(Error::InvalidInput("continuation schedule is empty".into()));
    }
    let mut out: Vec<FlowState> = Vec::with_capacity(schedule.len());
    let (mut u, mut w) = (u0, w0);
    for &p in schedule {
        let spec = make_spec(p);
        let flow = Flow::new(disc, &spec, cfg)?;
        let state = flow.run(u, w)?;
        u = state.u.clone();
        w = state.w.clone();
        out.push(state);
    }
    Ok(out)
}

/// `n + 1` evenly spaced values from `start` to `end`, computed as
/// `start + (end − start)·i/n` so that the end points and midpoints are hit
/// exactly.
pub fn linear_schedule(start: f64, end: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if n == 0 {
                start
            } else {
                (start * (n - i) as f64 + end * i as f64) / n as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_square_mesh, CreaseSpec};
    use crate::problem::{BoundaryCondition, MetricOptions};

    fn clamped_square(h: f64) -> (Discretization, ProblemSpec) {
        let disc = Discretization::new(make_square_mesh(1.0, h, CreaseSpec::None).unwrap()).unwrap();
        let mesh = disc.mesh();
        let nodes: Vec<usize> = mesh.boundary_nodes().collect();
        let mut spec = ProblemSpec::new(mesh, 0.0, 0.0);
        spec.boundary = BoundaryCondition::clamped(mesh, nodes, |_| 0.0, |_| [0.0; 2]);
        (disc, spec)
    }

    #[test]
    fn zero_state_is_stationary() {
        let (disc, mut spec) = clamped_square(0.5);
        spec.metric = MetricOptions::l2_both();
        spec.theta = 5.0;
        let flow = Flow::new(&disc, &spec, SolverConfig::default()).unwrap();
        let mesh = disc.mesh();
        let state = flow.run(P1VectorField::zeros(mesh.num_nodes()), DktField::zeros(mesh)).unwrap();
        assert_eq!(state.k, 1);
        assert!(state.converged);
        assert_eq!(state.records[0].newton_iterations, 1);
        assert_eq!(state.records[0].rejections, 0);
        assert!(state.w.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn affine_step_converges_in_one_newton_iteration() {
        let (disc, mut spec) = clamped_square(0.25);
        spec.alpha = [1.0; 2];
        let flow = Flow::new(&disc, &spec, SolverConfig::default()).unwrap();
        let mesh = disc.mesh();
        let out = flow
            .newton_solve_w(&P1VectorField::zeros(mesh.num_nodes()), &DktField::zeros(mesh), 1.0, &spec.force)
            .unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.w.max_abs_value() > 0.0);
    }

    #[test]
    fn schedules_hit_zero_exactly() {
        let s = linear_schedule(1.0, -1.0, 40);
        assert_eq!(s.len(), 41);
        assert_eq!(s[20], 0.0);
        assert_eq!(s[0], 1.0);
        assert_eq!(s[40], -1.0);
        assert!((s[1] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn rigid_modes_in_plane_are_reported() {
        let (disc, mut spec) = clamped_square(0.5);
        spec.theta = 1.0;
        let flow = Flow::new(&disc, &spec, SolverConfig::default()).unwrap();
        let mesh = disc.mesh();
        let err = flow
            .solve_u(&DktField::zeros(mesh), &P1VectorField::zeros(mesh.num_nodes()), 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { .. }));
    }
}
