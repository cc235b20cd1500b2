//! Plain-text experiment configuration.
//!
//! A configuration file is a list of `key = value` lines; `#` starts a
//! comment. Every experiment kind starts from its own defaults and the file
//! overrides individual keys. The full grammar and key reference live in
//! `docs/config.md`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use fvk_core::flow::linear_schedule;
use fvk_core::{CreaseSpec, NewtonMeasure, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    FlatDiscSweep,
    CurvatureInversion,
    Cardboard,
    BilayerFold,
    SingleRun,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::FlatDiscSweep,
        ExperimentKind::CurvatureInversion,
        ExperimentKind::Cardboard,
        ExperimentKind::BilayerFold,
        ExperimentKind::SingleRun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FlatDiscSweep => "flat_disc_sweep",
            ExperimentKind::CurvatureInversion => "curvature_inversion",
            ExperimentKind::Cardboard => "cardboard",
            ExperimentKind::BilayerFold => "bilayer_fold",
            ExperimentKind::SingleRun => "single_run",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Kinds that run a parameter continuation.
    pub fn is_sweep(self) -> bool {
        matches!(self, ExperimentKind::FlatDiscSweep | ExperimentKind::CurvatureInversion)
    }

    /// Kinds that compare two crease geometries.
    pub fn is_comparison(self) -> bool {
        matches!(self, ExperimentKind::Cardboard | ExperimentKind::BilayerFold)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Disc,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CreaseKind {
    None,
    Straight,
    Curved,
    Arc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub domain: Domain,
    pub radius: f64,
    pub half_width: f64,
    pub h: f64,
    /// Angular warp of the disc mesh, `φ ↦ φ + warp · sin 2φ`.
    pub warp: f64,
    pub crease: CreaseKind,
    pub crease_x: f64,
    pub crease_offset: f64,
    pub crease_amplitude: f64,
}

impl MeshConfig {
    pub fn crease_spec(&self, kind: CreaseKind) -> CreaseSpec {
        match kind {
            CreaseKind::None => CreaseSpec::None,
            CreaseKind::Straight => CreaseSpec::Straight { x: self.crease_x },
            CreaseKind::Curved => CreaseSpec::curved(),
            CreaseKind::Arc => CreaseSpec::Arc {
                offset: self.crease_offset,
                amplitude: self.crease_amplitude,
            },
        }
    }

    /// Half extent of the domain in `x₂`.
    pub fn extent(&self) -> f64 {
        match self.domain {
            Domain::Disc => self.radius,
            Domain::Square => self.half_width,
        }
    }
}

/// Vertical load `value` on the closed ball `B_radius(center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceConfig {
    pub value: f64,
    pub center: [f64; 2],
    pub radius: f64,
    pub ramp: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    None,
    SimpleSupport,
    Clamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryNodes {
    All,
    /// Square nodes on `x₂ = ±a`.
    HorizontalEdges,
    /// Nodes on `x₂ = ±a` that touch a triangle of subdomain 1.
    HorizontalEdgesLeft,
}

/// Prescribed boundary profile `w_D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Zero,
    /// `w_D(x) = −½ (x₂² − a²)` with `a` the domain extent in `x₂`.
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialShape {
    Zero,
    /// Interpolation of the boundary profile and its gradient.
    Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Theta,
    Alpha,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub warm_start: bool,
    /// Curvature split `|mc₁ − mc₂|` above which a state counts as
    /// cylindrical.
    pub break_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub iterations_csv: bool,
    pub surfaces: bool,
    pub snapshots: Vec<usize>,
    pub final_surface: bool,
    pub u_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub mesh: MeshConfig,
    /// Crease geometry of the reference run of comparison experiments.
    pub compare_crease: CreaseKind,
    pub theta: f64,
    pub alpha: [f64; 2],
    pub force: ForceConfig,
    pub boundary: BoundaryKind,
    pub boundary_nodes: BoundaryNodes,
    pub boundary_profile: Profile,
    pub initial: InitialShape,
    pub l2_vertical: bool,
    pub l2_horizontal: bool,
    /// Pins `w` to zero at the node closest to the origin.
    pub pin_origin: bool,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

/// A configuration problem, located by line and key where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            key: key.map(str::to_owned),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}, key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// One `key = value` assignment; `line` is `None` for command-line overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: Option<usize>,
    pub key: String,
    pub value: String,
}

/// Splits a configuration text into entries, rejecting malformed lines and
/// duplicate keys.
pub fn tokenize(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::new(Some(line), None, format!("expected `key = value`, got `{content}`")));
        };
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.') {
            return Err(ConfigError::new(Some(line), None, format!("invalid key `{key}`")));
        }
        if let Some(first) = seen.insert(key.to_owned(), line) {
            return Err(ConfigError::new(Some(line), Some(key), format!("duplicate key, first set on line {first}")));
        }
        out.push(Entry {
            line: Some(line),
            key: key.to_owned(),
            value: value.trim().to_owned(),
        });
    }
    Ok(out)
}

/// Parses a command-line override `key=value`.
pub fn parse_override(s: &str) -> Result<Entry, ConfigError> {
    let Some((key, value)) = s.split_once('=') else {
        return Err(ConfigError::new(None, None, format!("override `{s}` is not of the form key=value")));
    };
    Ok(Entry {
        line: None,
        key: key.trim().to_owned(),
        value: value.trim().to_owned(),
    })
}

impl ExperimentConfig {
    /// Default settings of an experiment kind.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut cfg = ExperimentConfig {
            kind,
            mesh: MeshConfig {
                domain: Domain::Disc,
                radius: 1.0,
                half_width: 1.0,
                h: 0.1,
                warp: 0.0,
                crease: CreaseKind::None,
                crease_x: 0.0,
                crease_offset: 1.0 / 3.0,
                crease_amplitude: 1.0 / 6.0,
            },
            compare_crease: CreaseKind::None,
            theta: 1.0,
            alpha: [1.0; 2],
            force: ForceConfig {
                value: 0.0,
                center: [0.0; 2],
                radius: 0.1,
                ramp: 0,
            },
            boundary: BoundaryKind::None,
            boundary_nodes: BoundaryNodes::All,
            boundary_profile: Profile::Zero,
            initial: InitialShape::Zero,
            l2_vertical: true,
            l2_horizontal: true,
            pin_origin: false,
            solver: SolverConfig::default(),
            sweep: SweepConfig {
                parameter: SweepParameter::Theta,
                values: Vec::new(),
                warm_start: true,
                break_threshold: 0.1,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                iterations_csv: true,
                surfaces: true,
                snapshots: Vec::new(),
                final_surface: true,
                u_scale: 1.0,
            },
        };
        match kind {
            ExperimentKind::FlatDiscSweep => {
                cfg.mesh.warp = 0.03;
                cfg.sweep.values = core::iter::once(1.0).chain((1..=24).map(|i| 25.0 * i as f64)).collect();
                cfg.solver.max_iterations = 800;
            }
            ExperimentKind::CurvatureInversion => {
                cfg.theta = 0.0;
                cfg.pin_origin = true;
                cfg.sweep.parameter = SweepParameter::Alpha;
                cfg.sweep.values = linear_schedule(1.0, -1.0, 40);
            }
            ExperimentKind::Cardboard => {
                cfg.mesh.domain = Domain::Square;
                cfg.mesh.crease = CreaseKind::Straight;
                cfg.compare_crease = CreaseKind::None;
                cfg.theta = 1e6;
                cfg.alpha = [0.0; 2];
                cfg.force.value = -0.6e6;
                cfg.force.ramp = 20;
                cfg.boundary = BoundaryKind::SimpleSupport;
                cfg.boundary_nodes = BoundaryNodes::HorizontalEdges;
                cfg.boundary_profile = Profile::Parabolic;
                cfg.initial = InitialShape::Profile;
                cfg.l2_vertical = false;
                cfg.solver.max_iterations = 60;
                cfg.output.snapshots = vec![20, 30, 40, 50];
            }
            ExperimentKind::BilayerFold => {
                cfg.mesh.domain = Domain::Square;
                cfg.mesh.crease = CreaseKind::Curved;
                cfg.compare_crease = CreaseKind::Straight;
                cfg.alpha = [1.0, 0.0];
                cfg.boundary = BoundaryKind::SimpleSupport;
                cfg.boundary_nodes = BoundaryNodes::HorizontalEdgesLeft;
            }
            ExperimentKind::SingleRun => {}
        }
        cfg
    }

    /// Parses a configuration text. `kind` overrides (and must agree with)
    /// an `experiment` key in the text.
    pub fn parse(text: &str, kind: Option<ExperimentKind>) -> Result<Self, ConfigError> {
        Self::from_entries(&tokenize(text)?, kind)
    }

    pub fn from_entries(entries: &[Entry], kind: Option<ExperimentKind>) -> Result<Self, ConfigError> {
        let declared = entries.iter().rev().find(|e| e.key == "experiment");
        let kind = match (declared, kind) {
            (Some(e), k) => {
                let parsed = ExperimentKind::parse(&e.value).ok_or_else(|| {
                    ConfigError::new(e.line, Some("experiment"), format!("unknown experiment kind `{}`", e.value))
                })?;
                if let Some(k) = k {
                    if k != parsed {
                        return Err(ConfigError::new(
                            e.line,
                            Some("experiment"),
                            format!("file declares `{parsed}` but `{k}` was requested"),
                        ));
                    }
                }
                parsed
            }
            (None, Some(k)) => k,
            (None, None) => return Err(ConfigError::new(None, Some("experiment"), "missing experiment kind")),
        };
        let mut cfg = Self::defaults(kind);
        for e in entries.iter().filter(|e| e.key != "experiment") {
            cfg.apply(&e.key, &e.value)
                .map_err(|msg| ConfigError::new(e.line, Some(&e.key), msg))?;
        }
        cfg.validate().map_err(|(key, msg)| {
            let line = entries.iter().rev().find(|e| e.key == key).and_then(|e| e.line);
            ConfigError::new(line, Some(key), msg)
        })?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, v: &str) -> Result<(), String> {
        let sweep_only = key.starts_with("sweep.");
        if sweep_only && !self.kind.is_sweep() {
            return Err(format!("only sweep experiments accept `{key}`"));
        }
        if key.starts_with("compare.") && !self.kind.is_comparison() {
            return Err(format!("only comparison experiments accept `{key}`"));
        }
        match key {
            "mesh.domain" => {
                self.mesh.domain = choice(v, &[("disc", Domain::Disc), ("square", Domain::Square)])?
            }
            "mesh.radius" => self.mesh.radius = number(v)?,
            "mesh.half_width" => self.mesh.half_width = number(v)?,
            "mesh.h" => self.mesh.h = number(v)?,
            "mesh.warp" => self.mesh.warp = number(v)?,
            "mesh.crease" => self.mesh.crease = crease_kind(v)?,
            "mesh.crease_x" => self.mesh.crease_x = number(v)?,
            "mesh.crease_offset" => self.mesh.crease_offset = number(v)?,
            "mesh.crease_amplitude" => self.mesh.crease_amplitude = number(v)?,
            "compare.crease" => self.compare_crease = crease_kind(v)?,
            "theta" => self.theta = number(v)?,
            "alpha" => {
                let a = numbers(v)?;
                self.alpha = match a[..] {
                    [x] => [x, x],
                    [x, y] => [x, y],
                    _ => return Err("expected one value or two per-subdomain values".into()),
                }
            }
            "force.value" => self.force.value = number(v)?,
            "force.radius" => self.force.radius = number(v)?,
            "force.center" => {
                let c = numbers(v)?;
                self.force.center = match c[..] {
                    [x, y] => [x, y],
                    _ => return Err("expected two coordinates".into()),
                }
            }
            "force.ramp" => self.force.ramp = integer(v)?,
            "boundary.kind" => {
                self.boundary = choice(
                    v,
                    &[
                        ("none", BoundaryKind::None),
                        ("simple_support", BoundaryKind::SimpleSupport),
                        ("clamped", BoundaryKind::Clamped),
                    ],
                )?
            }
            "boundary.nodes" => {
                self.boundary_nodes = choice(
                    v,
                    &[
                        ("all", BoundaryNodes::All),
                        ("horizontal_edges", BoundaryNodes::HorizontalEdges),
                        ("horizontal_edges_left", BoundaryNodes::HorizontalEdgesLeft),
                    ],
                )?
            }
            "boundary.profile" => {
                self.boundary_profile = choice(v, &[("zero", Profile::Zero), ("parabolic", Profile::Parabolic)])?
            }
            "initial.w" => {
                self.initial = choice(v, &[("zero", InitialShape::Zero), ("profile", InitialShape::Profile)])?
            }
            "metric.l2_vertical" => self.l2_vertical = boolean(v)?,
            "metric.l2_horizontal" => self.l2_horizontal = boolean(v)?,
            "metric.pin_origin" => self.pin_origin = boolean(v)?,
            "solver.tau_initial" => self.solver.tau_initial = number(v)?,
            "solver.tau_max" => self.solver.tau_max = number(v)?,
            "solver.tau_min" => self.solver.tau_min = number(v)?,
            "solver.max_newton" => self.solver.max_newton = integer(v)?,
            "solver.newton_tol" => self.solver.newton_tol = number(v)?,
            "solver.newton_measure" => {
                self.solver.newton_measure = choice(
                    v,
                    &[
                        ("time_derivative", NewtonMeasure::TimeDerivative),
                        ("increment", NewtonMeasure::Increment),
                    ],
                )?
            }
            "solver.residual_reduction" => self.solver.residual_reduction = number(v)?,
            "solver.stop_tol" => self.solver.stop_tol = number(v)?,
            "solver.max_iterations" => self.solver.max_iterations = integer(v)?,
            "solver.shrink" => self.solver.shrink = number(v)?,
            "solver.growth" => self.solver.growth = number(v)?,
            "sweep.parameter" => {
                self.sweep.parameter =
                    choice(v, &[("theta", SweepParameter::Theta), ("alpha", SweepParameter::Alpha)])?
            }
            "sweep.values" => self.sweep.values = schedule(v)?,
            "sweep.warm_start" => self.sweep.warm_start = boolean(v)?,
            "sweep.break_threshold" => self.sweep.break_threshold = number(v)?,
            "output.dir" => {
                if v.is_empty() {
                    return Err("empty output directory".into());
                }
                self.output.dir = PathBuf::from(v)
            }
            "output.iterations_csv" => self.output.iterations_csv = boolean(v)?,
            "output.surfaces" => self.output.surfaces = boolean(v)?,
            "output.snapshots" => {
                self.output.snapshots = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',').map(|s| integer(s.trim())).collect::<Result<_, _>>()?
                }
            }
            "output.final_surface" => self.output.final_surface = boolean(v)?,
            "output.u_scale" => self.output.u_scale = number(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Checks cross-key consistency; errors name the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let m = &self.mesh;
        if !(m.h > 0.0) {
            return Err(("mesh.h", format!("mesh size must be positive, got {}", m.h)));
        }
        if !(m.radius > 0.0) {
            return Err(("mesh.radius", "radius must be positive".into()));
        }
        if !(m.half_width > 0.0) {
            return Err(("mesh.half_width", "half width must be positive".into()));
        }
        if !(m.warp.abs() < 0.5) {
            return Err(("mesh.warp", "warp must lie in (-0.5, 0.5)".into()));
        }
        if m.domain == Domain::Disc {
            if m.crease != CreaseKind::None || (self.kind.is_comparison() && self.compare_crease != CreaseKind::None) {
                return Err(("mesh.crease", "creases need a square domain".into()));
            }
            if matches!(self.boundary_nodes, BoundaryNodes::HorizontalEdges | BoundaryNodes::HorizontalEdgesLeft)
                && self.boundary != BoundaryKind::None
            {
                return Err(("boundary.nodes", "horizontal edges exist only on the square".into()));
            }
        } else if m.warp != 0.0 {
            return Err(("mesh.warp", "warping applies to the disc only".into()));
        }
        if !(self.theta >= 0.0) {
            return Err(("theta", "theta must be nonnegative".into()));
        }
        if !(self.force.radius >= 0.0) {
            return Err(("force.radius", "radius must be nonnegative".into()));
        }
        if self.kind.is_sweep() {
            if self.sweep.values.is_empty() {
                return Err(("sweep.values", "sweep needs at least one value".into()));
            }
            if self.sweep.parameter == SweepParameter::Theta && self.sweep.values.iter().any(|&t| t < 0.0) {
                return Err(("sweep.values", "theta values must be nonnegative".into()));
            }
        }
        if self.kind.is_comparison() && self.compare_crease == m.crease {
            return Err(("compare.crease", "the reference crease equals the primary crease".into()));
        }
        if !(self.output.u_scale.is_finite()) {
            return Err(("output.u_scale", "scale must be finite".into()));
        }
        self.solver
            .validate()
            .map_err(|e| ("solver", e.to_string()))?;
        Ok(())
    }

    /// The configuration as a complete, canonical key-value text. Parsing the
    /// result gives back an identical configuration; the output directory is
    /// left out so that it does not affect content hashes.
    pub fn canonical(&self) -> String {
        let mut lines: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| lines.push((k.to_owned(), v));
        let m = &self.mesh;
        put("experiment", self.kind.name().into());
        put("mesh.domain", if m.domain == Domain::Disc { "disc" } else { "square" }.into());
        put("mesh.radius", fnum(m.radius));
        put("mesh.half_width", fnum(m.half_width));
        put("mesh.h", fnum(m.h));
        put("mesh.warp", fnum(m.warp));
        put("mesh.crease", crease_name(m.crease).into());
        put("mesh.crease_x", fnum(m.crease_x));
        put("mesh.crease_offset", fnum(m.crease_offset));
        put("mesh.crease_amplitude", fnum(m.crease_amplitude));
        if self.kind.is_comparison() {
            put("compare.crease", crease_name(self.compare_crease).into());
        }
        put("theta", fnum(self.theta));
        put("alpha", format!("{}, {}", fnum(self.alpha[0]), fnum(self.alpha[1])));
        put("force.value", fnum(self.force.value));
        put("force.center", format!("{}, {}", fnum(self.force.center[0]), fnum(self.force.center[1])));
        put("force.radius", fnum(self.force.radius));
        put("force.ramp", self.force.ramp.to_string());
        put(
            "boundary.kind",
            match self.boundary {
                BoundaryKind::None => "none",
                BoundaryKind::SimpleSupport => "simple_support",
                BoundaryKind::Clamped => "clamped",
            }
            .into(),
        );
        put(
            "boundary.nodes",
            match self.boundary_nodes {
                BoundaryNodes::All => "all",
                BoundaryNodes::HorizontalEdges => "horizontal_edges",
                BoundaryNodes::HorizontalEdgesLeft => "horizontal_edges_left",
            }
            .into(),
        );
        put(
            "boundary.profile",
            if self.boundary_profile == Profile::Zero { "zero" } else { "parabolic" }.into(),
        );
        put("initial.w", if self.initial == InitialShape::Zero { "zero" } else { "profile" }.into());
        put("metric.l2_vertical", self.l2_vertical.to_string());
        put("metric.l2_horizontal", self.l2_horizontal.to_string());
        put("metric.pin_origin", self.pin_origin.to_string());
        let s = &self.solver;
        put("solver.tau_initial", fnum(s.tau_initial));
        put("solver.tau_max", fnum(s.tau_max));
        put("solver.tau_min", fnum(s.tau_min));
        put("solver.max_newton", s.max_newton.to_string());
        put("solver.newton_tol", fnum(s.newton_tol));
        put(
            "solver.newton_measure",
            match s.newton_measure {
                NewtonMeasure::TimeDerivative => "time_derivative",
                NewtonMeasure::Increment => "increment",
            }
            .into(),
        );
        put("solver.residual_reduction", fnum(s.residual_reduction));
        put("solver.stop_tol", fnum(s.stop_tol));
        put("solver.max_iterations", s.max_iterations.to_string());
        put("solver.shrink", fnum(s.shrink));
        put("solver.growth", fnum(s.growth));
        if self.kind.is_sweep() {
            let sw = &self.sweep;
            put(
                "sweep.parameter",
                if sw.parameter == SweepParameter::Theta { "theta" } else { "alpha" }.into(),
            );
            put("sweep.values", sw.values.iter().map(|&v| fnum(v)).collect::<Vec<_>>().join(", "));
            put("sweep.warm_start", sw.warm_start.to_string());
            put("sweep.break_threshold", fnum(sw.break_threshold));
        }
        let o = &self.output;
        put("output.iterations_csv", o.iterations_csv.to_string());
        put("output.surfaces", o.surfaces.to_string());
        put(
            "output.snapshots",
            o.snapshots.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "),
        );
        put("output.final_surface", o.final_surface.to_string());
        put("output.u_scale", fnum(o.u_scale));
        lines.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Shortest decimal representation that parses back to the same `f64`.
fn fnum(x: f64) -> String {
    format!("{x:?}")
}

fn crease_name(k: CreaseKind) -> &'static str {
    match k {
        CreaseKind::None => "none",
        CreaseKind::Straight => "straight",
        CreaseKind::Curved => "curved",
        CreaseKind::Arc => "arc",
    }
}

fn crease_kind(v: &str) -> Result<CreaseKind, String> {
    choice(
        v,
        &[
            ("none", CreaseKind::None),
            ("straight", CreaseKind::Straight),
            ("curved", CreaseKind::Curved),
            ("arc", CreaseKind::Arc),
        ],
    )
}

fn choice<T: Copy>(v: &str, options: &[(&str, T)]) -> Result<T, String> {
    options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<_> = options.iter().map(|(n, _)| *n).collect();
        format!("expected one of {}, got `{v}`", names.join(" | "))
    })
}

fn number(v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, got `{v}`")),
    }
}

fn integer(v: &str) -> Result<usize, String> {
    v.parse::<usize>()
        .map_err(|_| format!("expected a nonnegative integer, got `{v}`"))
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

fn numbers(v: &str) -> Result<Vec<f64>, String> {
    if v.is_empty() {
        return Err("expected a comma-separated list of numbers".into());
    }
    v.split(',').map(|s| number(s.trim())).collect()
}

/// A list of numbers and ranges `start:stop:step`; a range contains both
/// end points and is generated as `start + (stop − start)·i/n`.
pub fn schedule(v: &str) -> Result<Vec<f64>, String> {
    if v.is_empty() {
        return Err("expected a list of values or ranges".into());
    }
    let mut out = Vec::new();
    for item in v.split(',') {
        let item = item.trim();
        let parts: Vec<&str> = item.split(':').collect();
        match parts[..] {
            [x] => out.push(number(x.trim())?),
            [a, b, s] => {
                let (a, b, s) = (number(a.trim())?, number(b.trim())?, number(s.trim())?);
                let span = b - a;
                if s == 0.0 || (span != 0.0 && span.signum() != s.signum()) {
                    return Err(format!("step of range `{item}` does not lead from start to stop"));
                }
                let n = (span / s).round();
                if (n * s - span).abs() > 1e-9 * span.abs().max(1.0) || n > 1e6 {
                    return Err(format!("range `{item}` is not a whole number of steps"));
                }
                out.extend(linear_schedule(a, b, n as usize));
            }
            _ => return Err(format!("malformed range `{item}`, expected start:stop:step")),
        }
    }
    Ok(out)
}
