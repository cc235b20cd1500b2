//! Executes the experiment kinds and collects their results in memory.

use std::sync::Mutex;

use serde::Serialize;
use serde_json::{json, Value};

use fvk_core::dkt::hessian_l2_norm;
use fvk_core::{Discretization, DktField, Flow, FlowState, P1VectorField, ProblemSpec, SolverConfig};

use crate::config::{CreaseKind, ExperimentConfig, ExperimentKind, OutputConfig, SweepParameter};
use crate::setup::{build_discretization, build_problem, initial_state};
use crate::surface::Surface;

/// How work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for independent runs (comparison variants, cold-start
    /// sweep points). Warm-started sweeps always run sequentially.
    pub threads: usize,
    /// Recorded in the manifest. Assembly always reduces in element order,
    /// so results are bitwise reproducible either way.
    pub deterministic: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            threads: 1,
            deterministic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Abort {
    pub run: String,
    pub iteration: usize,
    pub message: String,
}

/// One flow run and the surfaces exported along the way.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub label: String,
    pub state: FlowState,
    pub abort: Option<Abort>,
    /// `(name, surface)` pairs, e.g. `k00020` or `final`.
    pub surfaces: Vec<(String, Surface)>,
    pub point: PointRow,
}

/// Per-run diagnostics, one row of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRow {
    pub run: String,
    pub parameter: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub aborted: bool,
    pub tau_final: f64,
    pub e_total: f64,
    pub e_bending: f64,
    pub e_membrane: f64,
    pub e_force: f64,
    pub mean_curv_1: f64,
    pub mean_curv_2: f64,
    pub curv_split: f64,
    pub q_sym: Option<f64>,
    pub hessian_l2: f64,
    pub max_abs_w: f64,
    /// Largest `|w|` over non-crease nodes of subdomain-2 triangles.
    pub max_abs_w_sub2: Option<f64>,
    pub max_crease_jump: f64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub kind: ExperimentKind,
    pub runs: Vec<RunResult>,
    pub summary: Value,
}

impl Report {
    pub fn aborts(&self) -> Vec<&Abort> {
        self.runs.iter().filter_map(|r| r.abort.as_ref()).collect()
    }
}

fn point_row(label: &str, parameter: Option<f64>, disc: &Discretization, state: &FlowState, aborted: bool) -> PointRow {
    let mesh = disc.mesh();
    let e = *state.energy_history.last().expect("energy history starts with the initial state");
    let d = fvk_core::energy::diagnostics(disc, &state.w, &state.u);
    let mut sub2: Option<f64> = None;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if mesh.subdomain(t) == 2 {
            for &v in tri.iter().filter(|&&v| !mesh.is_crease_node(v)) {
                sub2 = Some(sub2.unwrap_or(0.0).max(state.w.values[v].abs()));
            }
        }
    }
    PointRow {
        run: label.to_owned(),
        parameter,
        iterations: state.k,
        converged: state.converged,
        aborted,
        tau_final: state.tau,
        e_total: e.total,
        e_bending: e.bending,
        e_membrane: e.membrane,
        e_force: e.force,
        mean_curv_1: d.mean_curv[0],
        mean_curv_2: d.mean_curv[1],
        curv_split: (d.mean_curv[0] - d.mean_curv[1]).abs(),
        q_sym: d.q_sym,
        hessian_l2: hessian_l2_norm(disc, &state.w),
        max_abs_w: state.w.max_abs_value(),
        max_abs_w_sub2: sub2,
        max_crease_jump: state.records.iter().map(|r| r.crease_jump).fold(0.0, f64::max),
    }
}

/// Runs one flow, exporting snapshot surfaces. Solver failures end the run
/// and are returned as an [`Abort`]; setup failures are errors.
#[allow(clippy::too_many_arguments)]
pub fn run_flow(
    label: &str,
    parameter: Option<f64>,
    disc: &Discretization,
    spec: &ProblemSpec,
    solver: SolverConfig,
    u0: P1VectorField,
    w0: DktField,
    output: &OutputConfig,
) -> fvk_core::Result<RunResult> {
    let flow = Flow::new(disc, spec, solver)?;
    let mut state = flow.initial_state(u0, w0);
    let mut surfaces = Vec::new();
    let snap = |state: &FlowState, name: String, surfaces: &mut Vec<(String, Surface)>| {
        if output.surfaces {
            let title = format!("{label} {name}");
            surfaces.push((name, Surface::from_state(&title, disc, spec, &state.u, &state.w, output.u_scale)));
        }
    };
    if output.snapshots.contains(&0) {
        snap(&state, "k00000".into(), &mut surfaces);
    }
    let mut abort = None;
    while !state.converged && state.k < solver.max_iterations {
        if let Err(e) = flow.flow_step(&mut state) {
            abort = Some(Abort {
                run: label.to_owned(),
                iteration: state.k + 1,
                message: e.to_string(),
            });
            break;
        }
        if output.snapshots.contains(&state.k) {
            snap(&state, format!("k{:05}", state.k), &mut surfaces);
        }
    }
    if output.final_surface {
        snap(&state, "final".into(), &mut surfaces);
    }
    let point = point_row(label, parameter, disc, &state, abort.is_some());
    Ok(RunResult {
        label: label.to_owned(),
        state,
        abort,
        surfaces,
        point,
    })
}

/// Maps `f` over `items` on up to `threads` scoped workers, keeping order.
pub fn parallel_map<T, R, F>(items: Vec<T>, threads: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    let n = items.len();
    let workers = threads.clamp(1, n.max(1));
    if workers == 1 {
        return items.into_iter().map(f).collect();
    }
    let queue = Mutex::new(items.into_iter().enumerate());
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let Some((i, item)) = queue.lock().unwrap().next() else {
                    break;
                };
                let r = f(item);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every item is processed"))
        .collect()
}

fn parameter_label(p: SweepParameter, i: usize, value: f64) -> String {
    match p {
        SweepParameter::Theta => format!("point{i:03}_theta_{value}"),
        SweepParameter::Alpha => format!("point{i:03}_alpha_{value}"),
    }
}

pub fn execute(cfg: &ExperimentConfig, opts: &RunOptions) -> fvk_core::Result<Report> {
    let runs = match cfg.kind {
        ExperimentKind::FlatDiscSweep | ExperimentKind::CurvatureInversion => sweep(cfg, opts)?,
        ExperimentKind::Cardboard | ExperimentKind::BilayerFold => comparison(cfg, opts)?,
        ExperimentKind::SingleRun => {
            let disc = build_discretization(cfg, cfg.mesh.crease_spec(cfg.mesh.crease))?;
            let spec = build_problem(cfg, disc.mesh(), cfg.theta, cfg.alpha);
            let (u0, w0) = initial_state(cfg, disc.mesh());
            vec![run_flow("run", None, &disc, &spec, cfg.solver, u0, w0, &cfg.output)?]
        }
    };
    let summary = summarize(cfg, &runs);
    Ok(Report {
        kind: cfg.kind,
        runs,
        summary,
    })
}

fn sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> fvk_core::Result<Vec<RunResult>> {
    let disc = build_discretization(cfg, cfg.mesh.crease_spec(cfg.mesh.crease))?;
    let mesh = disc.mesh();
    let sw = &cfg.sweep;
    let spec_for = |p: f64| match sw.parameter {
        SweepParameter::Theta => build_problem(cfg, mesh, p, cfg.alpha),
        SweepParameter::Alpha => build_problem(cfg, mesh, cfg.theta, [p; 2]),
    };
    if sw.warm_start {
        let (mut u, mut w) = initial_state(cfg, mesh);
        let mut out = Vec::with_capacity(sw.values.len());
        for (i, &p) in sw.values.iter().enumerate() {
            let spec = spec_for(p);
            let run = run_flow(&parameter_label(sw.parameter, i, p), Some(p), &disc, &spec, cfg.solver, u, w, &cfg.output)?;
            u = run.state.u.clone();
            w = run.state.w.clone();
            let stop = run.abort.is_some();
            out.push(run);
            if stop {
                break;
            }
        }
        Ok(out)
    } else {
        let items: Vec<(usize, f64)> = sw.values.iter().copied().enumerate().collect();
        parallel_map(items, opts.threads, |(i, p)| {
            let spec = spec_for(p);
            let (u0, w0) = initial_state(cfg, mesh);
            run_flow(&parameter_label(sw.parameter, i, p), Some(p), &disc, &spec, cfg.solver, u0, w0, &cfg.output)
        })
        .into_iter()
        .collect()
    }
}

fn crease_label(k: CreaseKind) -> &'static str {
    match k {
        CreaseKind::None => "no_crease",
        CreaseKind::Straight => "straight_crease",
        CreaseKind::Curved => "curved_crease",
        CreaseKind::Arc => "arc_crease",
    }
}

/// Primary crease geometry first, reference geometry second.
fn comparison(cfg: &ExperimentConfig, opts: &RunOptions) -> fvk_core::Result<Vec<RunResult>> {
    let variants = vec![cfg.mesh.crease, cfg.compare_crease];
    parallel_map(variants, opts.threads, |kind| {
        let disc = build_discretization(cfg, cfg.mesh.crease_spec(kind))?;
        let spec = build_problem(cfg, disc.mesh(), cfg.theta, cfg.alpha);
        let (u0, w0) = initial_state(cfg, disc.mesh());
        run_flow(crease_label(kind), None, &disc, &spec, cfg.solver, u0, w0, &cfg.output)
    })
    .into_iter()
    .collect()
}

/// Iteration of the largest total energy over the flow steps `k ≥ 1`, when
/// it lies strictly inside that range. The initial state is left out: it is
/// not an equilibrium of the loaded problem (e.g. an interpolated boundary
/// profile with `u = 0`) and its energy says nothing about a barrier.
pub fn barrier_iteration(totals: &[f64]) -> Option<usize> {
    interior_maximum(totals.get(1..)?).map(|i| i + 1)
}

/// Index of the largest value when it lies strictly inside the slice.
pub fn interior_maximum(history: &[f64]) -> Option<usize> {
    let (imax, _) = history
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    (imax > 0 && imax + 1 < history.len()).then_some(imax)
}

fn summarize(cfg: &ExperimentConfig, runs: &[RunResult]) -> Value {
    let totals = |r: &RunResult| r.state.energy_history.iter().map(|e| e.total).collect::<Vec<_>>();
    match cfg.kind {
        ExperimentKind::FlatDiscSweep => {
            let first_break = runs
                .iter()
                .find(|r| r.point.curv_split > cfg.sweep.break_threshold)
                .and_then(|r| r.point.parameter);
            json!({
                "points": runs.len(),
                "break_threshold": cfg.sweep.break_threshold,
                "first_break_theta": first_break,
                "max_curv_split": runs.iter().map(|r| r.point.curv_split).fold(0.0, f64::max),
            })
        }
        ExperimentKind::CurvatureInversion => {
            let zero = runs.iter().min_by(|a, b| {
                let pa = a.point.parameter.unwrap_or(f64::INFINITY).abs();
                let pb = b.point.parameter.unwrap_or(f64::INFINITY).abs();
                pa.total_cmp(&pb)
            });
            let reflection = match (runs.first(), runs.last()) {
                (Some(a), Some(b)) if runs.len() > 1 => {
                    let scale = a.state.w.max_abs_value();
                    let d = a
                        .state
                        .w
                        .values
                        .iter()
                        .zip(&b.state.w.values)
                        .map(|(x, y)| (x + y).abs())
                        .fold(0.0, f64::max);
                    (scale > 0.0).then(|| d / scale)
                }
                _ => None,
            };
            json!({
                "points": runs.len(),
                "alpha_nearest_zero": zero.and_then(|r| r.point.parameter),
                "hessian_l2_at_alpha_nearest_zero": zero.map(|r| r.point.hessian_l2),
                "reflection_error": reflection,
            })
        }
        ExperimentKind::Cardboard | ExperimentKind::BilayerFold => {
            let mut variants = serde_json::Map::new();
            for r in runs {
                variants.insert(
                    r.label.clone(),
                    json!({
                        "iterations": r.state.k,
                        "final_total_energy": r.point.e_total,
                        "final_elastic_energy": r.point.e_bending + r.point.e_membrane,
                        "energy_barrier_iteration": barrier_iteration(&totals(r)),
                        "max_abs_w": r.point.max_abs_w,
                        "max_abs_w_sub2": r.point.max_abs_w_sub2,
                        "max_crease_jump": r.point.max_crease_jump,
                    }),
                );
            }
            let ordering = if let [a, b] = runs {
                let (ea, eb) = (totals(a), totals(b));
                let shared = ea.len().min(eb.len());
                let below = (0..shared).all(|k| ea[k] <= eb[k] + 1e-10 * eb[k].abs());
                let sub2 = match (a.point.max_abs_w_sub2, b.point.max_abs_w_sub2) {
                    (Some(x), Some(y)) if y > 0.0 => Some(x / y),
                    _ => None,
                };
                json!({
                    "shared_iterations": shared,
                    "primary_total_energy_never_above_reference": below,
                    "max_abs_w_sub2_primary_over_reference": sub2,
                })
            } else {
                Value::Null
            };
            json!({ "primary": runs.first().map(|r| r.label.clone()), "variants": variants, "ordering": ordering })
        }
        ExperimentKind::SingleRun => {
            let r = &runs[0];
            json!({
                "iterations": r.state.k,
                "converged": r.state.converged,
                "final_total_energy": r.point.e_total,
                "mean_curv": [r.point.mean_curv_1, r.point.mean_curv_2],
                "curv_split": r.point.curv_split,
                "q_sym": r.point.q_sym,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let out = parallel_map((0..50).collect(), 4, |i: u64| i * i);
        assert_eq!(out, (0..50).map(|i| i * i).collect::<Vec<_>>());
        assert!(parallel_map(Vec::<u8>::new(), 3, |x| x).is_empty());
    }

    #[test]
    fn interior_maximum_needs_both_sides() {
        assert_eq!(interior_maximum(&[1.0, 3.0, 2.0]), Some(1));
        assert_eq!(interior_maximum(&[3.0, 2.0, 1.0]), None);
        assert_eq!(interior_maximum(&[1.0, 2.0, 3.0]), None);
        assert_eq!(interior_maximum(&[]), None);
        assert_eq!(barrier_iteration(&[9.0, 1.0, 3.0, 2.0]), Some(2));
        assert_eq!(barrier_iteration(&[9.0, 3.0, 2.0]), None);
    }

    #[test]
    fn snapshots_follow_the_configuration() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::SingleRun);
        cfg.mesh.h = 0.5;
        cfg.theta = 10.0;
        cfg.solver.max_iterations = 5;
        cfg.output.snapshots = vec![0, 2, 4, 99];
        let report = execute(&cfg, &RunOptions::default()).unwrap();
        let names: Vec<_> = report.runs[0].surfaces.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["k00000", "k00002", "k00004", "final"]);
        assert_eq!(report.runs[0].point.iterations, 5);
    }
}
