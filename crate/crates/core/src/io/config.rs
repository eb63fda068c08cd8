use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::driver::RunParams;
use crate::error::{config, Error, Result};
use crate::fem::{FunctionSpace, Lame};
use crate::levelset::{initial_level, InitialLevelSpec, LevelSetField};
use crate::mesh::{BoundaryTag, RectMesh, Region};
use crate::models::{
    default_initial_guess, generate_measurements, radial_bump, Compliance, Heat, HeatCase, InverseElasticity, InverseParams, Load, Logistic,
    ModelProblem, ScalarSource,
};
use crate::scalar::Real;
use crate::velocity::BilinearSpec;

/// Boundary facets whose midpoints fall in `region` get `tag`; the first
/// matching entry wins and unmatched facets keep tag 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagConfig {
    pub tag: u32,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// `[x0, y0, x1, y1]`.
    pub bounds: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<TagConfig>,
}

impl MeshConfig {
    pub fn build<T: Real>(&self) -> Result<RectMesh<T>> {
        self.build_refined(1)
    }

    /// The mesh with `factor` times the cell counts and the same tags.
    pub fn build_refined<T: Real>(&self, factor: usize) -> Result<RectMesh<T>> {
        if factor == 0 {
            return Err(config("mesh refinement factor must be ≥ 1"));
        }
        let b = self.bounds.map(T::lit);
        let tags: Vec<BoundaryTag<T>> = self.tags.iter().map(|t| BoundaryTag::from_region(t.tag, t.region.clone())).collect();
        Ok(RectMesh::build(b, factor * self.nx, factor * self.ny)?.tag_boundary(&tags))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LameConfig {
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    #[serde(default = "d_mu")]
    pub mu: f64,
}

fn d_lambda() -> f64 {
    1.25
}
fn d_mu() -> f64 {
    1.0
}
fn d_one() -> f64 {
    1.0
}
fn d_kappa() -> f64 {
    10.0
}
fn d_refine() -> usize {
    2
}

impl Default for LameConfig {
    fn default() -> Self {
        Self { lambda: d_lambda(), mu: d_mu() }
    }
}

impl From<LameConfig> for Lame<f64> {
    fn from(l: LameConfig) -> Self {
        Lame { lambda: l.lambda, mu: l.mu }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    /// `25 (1 + cos(10π|x − c|))` inside radius 0.1 of `center`.
    Bump { center: [f64; 2] },
    Constant { value: f64 },
}

impl SourceConfig {
    fn build<T: Real>(&self) -> ScalarSource<T> {
        match *self {
            SourceConfig::Bump { center } => radial_bump(center),
            SourceConfig::Constant { value } => Arc::new(move |_| (T::lit(value), [T::zero(); 2])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatCaseConfig {
    pub source: SourceConfig,
    pub sink_tags: Vec<u32>,
    #[serde(default = "d_one")]
    pub weight: f64,
}

/// A disk `{|x − center| < radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disk {
    /// Signed distance to the union of `disks`, negative inside.
    pub fn union_distance<T: Real>(disks: &[Disk], x: [T; 2]) -> T {
        disks.iter().fold(T::infinity(), |m, d| {
            let dx = x[0] - T::lit(d.center[0]);
            let dy = x[1] - T::lit(d.center[1]);
            m.min((dx * dx + dy * dy).sqrt() - T::lit(d.radius))
        })
    }
}

/// Model selector and physical parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    #[serde(alias = "compliance_plus")]
    Compliance {
        clamped: Vec<u32>,
        loads: Vec<Load>,
        volume: f64,
        #[serde(default)]
        lame: LameConfig,
    },
    #[serde(alias = "heat_plus")]
    Heat { cases: Vec<HeatCaseConfig>, volume: f64 },
    Logistic {
        rate: f64,
        volume: f64,
        /// Constant Newton initial guess; the oscillating default when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_population: Option<f64>,
    },
    /// Twin experiment: measurements are generated on a mesh refined by
    /// `refine` with the inclusion `truth`.
    Inverse {
        clamped: Vec<u32>,
        measured: Vec<u32>,
        forces: Vec<Load>,
        truth: Vec<Disk>,
        #[serde(default = "d_kappa")]
        kappa: f64,
        #[serde(default = "d_one")]
        alpha: f64,
        #[serde(default = "d_one")]
        beta: f64,
        #[serde(default)]
        lame: LameConfig,
        #[serde(default = "d_refine")]
        refine: usize,
    },
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Compliance { .. } => "compliance",
            ModelConfig::Heat { .. } => "heat",
            ModelConfig::Logistic { .. } => "logistic",
            ModelConfig::Inverse { .. } => "inverse",
        }
    }

    pub fn build<T: Real>(&self, mesh_cfg: &MeshConfig, mesh: Arc<RectMesh<T>>, bilinear: &BilinearSpec) -> Result<Box<dyn ModelProblem<T>>> {
        let b = bilinear.clone();
        Ok(match self {
            ModelConfig::Compliance { clamped, loads, volume, lame } => Box::new(Compliance::new(mesh, clamped, loads, *volume, (*lame).into(), b)?),
            ModelConfig::Heat { cases, volume } => {
                let cases = cases.iter().map(|c| HeatCase { source: c.source.build(), sink_tags: c.sink_tags.clone(), weight: c.weight }).collect();
                Box::new(Heat::new(mesh, cases, *volume, b)?)
            }
            ModelConfig::Logistic { rate, volume, initial_population } => {
                let init = match initial_population {
                    Some(v) => {
                        let v = T::lit(*v);
                        Arc::new(move |_| v)
                    }
                    None => default_initial_guess(),
                };
                Box::new(Logistic::new(mesh, *rate, *volume, init, b)?)
            }
            ModelConfig::Inverse { clamped, measured, forces, truth, kappa, alpha, beta, lame, refine } => {
                let fine = Arc::new(mesh_cfg.build_refined::<T>(*refine)?);
                let forces: Vec<([f64; 2], u32)> = forces.iter().map(|l| (l.traction, l.tag)).collect();
                let pairs = generate_measurements(fine, mesh.clone(), |x| Disk::union_distance(truth, x), &forces, clamped, *kappa, (*lame).into())?;
                let params = InverseParams { alpha: *alpha, beta: *beta, kappa: *kappa, lame: (*lame).into() };
                Box::new(InverseElasticity::new(mesh, clamped, measured, pairs, params, b)?)
            }
        })
    }

    fn check(&self, bad: &mut Vec<String>) {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match self {
            ModelConfig::Compliance { loads, volume, lame, .. } => {
                if !positive(*volume) {
                    bad.push(format!("model.volume = {volume} must be > 0"));
                }
                if loads.is_empty() {
                    bad.push("model.loads must not be empty".into());
                }
                check_lame(lame, bad);
            }
            ModelConfig::Heat { cases, volume } => {
                if !positive(*volume) {
                    bad.push(format!("model.volume = {volume} must be > 0"));
                }
                if cases.is_empty() {
                    bad.push("model.cases must not be empty".into());
                }
                for (k, c) in cases.iter().enumerate() {
                    if !positive(c.weight) {
                        bad.push(format!("model.cases[{k}].weight = {} must be > 0", c.weight));
                    }
                }
            }
            ModelConfig::Logistic { rate, volume, .. } => {
                if !positive(*rate) {
                    bad.push(format!("model.rate = {rate} must be > 0"));
                }
                if !positive(*volume) {
                    bad.push(format!("model.volume = {volume} must be > 0"));
                }
            }
            ModelConfig::Inverse { forces, truth, kappa, alpha, beta, lame, refine, .. } => {
                if forces.is_empty() {
                    bad.push("model.forces must not be empty".into());
                }
                if truth.is_empty() || truth.iter().any(|d| !positive(d.radius)) {
                    bad.push("model.truth needs at least one disk with positive radius".into());
                }
                if !positive(*kappa) {
                    bad.push(format!("model.kappa = {kappa} must be > 0"));
                }
                if !(*alpha >= 0.0 && *beta >= 0.0 && alpha + beta > 0.0) {
                    bad.push(format!("model.alpha = {alpha}, model.beta = {beta} must be ≥ 0 and not both zero"));
                }
                if *refine < 1 {
                    bad.push("model.refine must be ≥ 1".into());
                }
                check_lame(lame, bad);
            }
        }
    }
}

fn check_lame(l: &LameConfig, bad: &mut Vec<String>) {
    if !(l.lambda > 0.0 && l.mu > 0.0) {
        bad.push(format!("model.lame = ({}, {}) must be positive", l.lambda, l.mu));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write a VTK snapshot every `k` iterations; 0 disables periodic
    /// snapshots.
    pub snapshot_every: usize,
    pub final_snapshot: bool,
    pub include_timing: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("output"), snapshot_every: 0, final_snapshot: true, include_timing: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Run the finite-difference derivative check before optimizing.
    pub fd_check: bool,
    pub fd_step: f64,
    pub fd_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { fd_check: false, fd_step: 1e-4, fd_tol: 0.05 }
    }
}

/// Complete description of one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub mesh: MeshConfig,
    pub initial: InitialLevelSpec,
    #[serde(default)]
    pub velocity: BilinearSpec,
    #[serde(default)]
    pub params: RunParams,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config(e.to_string()))
    }

    /// Checks all invariants before anything is allocated and reports every
    /// violation.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let [x0, y0, x1, y1] = self.mesh.bounds;
        if !(x0 < x1 && y0 < y1) || self.mesh.bounds.iter().any(|v| !v.is_finite()) {
            bad.push(format!("mesh.bounds = {:?} must satisfy x0 < x1, y0 < y1", self.mesh.bounds));
        }
        if self.mesh.nx == 0 || self.mesh.ny == 0 {
            bad.push(format!("mesh.nx = {}, mesh.ny = {} must be ≥ 1", self.mesh.nx, self.mesh.ny));
        }
        self.model.check(&mut bad);
        for (key, r) in [("initial", self.initial.validate()), ("velocity", self.velocity.validate()), ("params", self.params.validate())] {
            if let Err(Error::Config(msg)) = r {
                bad.push(format!("{key}: {msg}"));
            }
        }
        if !(self.verify.fd_step > 0.0 && self.verify.fd_tol > 0.0) {
            bad.push("verify.fd_step and verify.fd_tol must be > 0".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(config(bad.join("; ")))
        }
    }

    /// Mesh, model and initial level set.
    pub fn build<T: Real>(&self) -> Result<Problem<T>> {
        let mesh = Arc::new(self.mesh.build::<T>()?);
        let model = self.model.build(&self.mesh, mesh.clone(), &self.velocity)?;
        let phi0 = initial_level(&self.initial, &FunctionSpace::scalar(mesh)?)?;
        Ok(Problem { model, phi0 })
    }
}

pub struct Problem<T> {
    pub model: Box<dyn ModelProblem<T>>,
    pub phi0: LevelSetField<T>,
}

/// Reads and validates a TOML configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    RunConfig::from_toml(&text).map_err(|e| match e {
        Error::Config(msg) => config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
