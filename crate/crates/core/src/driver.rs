//! The level-set optimization loop.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{config, contract, Error, Result};
use crate::fem::FemField;
use crate::levelset::{reinitialize, transport, LevelSetField};
use crate::models::{evaluate, ModelProblem};
use crate::ppl::{combine_derivatives, constraint_error, PplParams, PplState};
use crate::scalar::Real;
use crate::velocity::VelocitySolver;

/// Parameters of the optimization loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunParams {
    pub niter: usize,
    pub dfactor: f64,
    /// `(t_min, t_max)` bounds of the transport horizon.
    pub lv_time: [f64; 2],
    /// `(s_min, s_max)` bounds of the transport step count.
    pub lv_iter: [usize; 2],
    pub smooth: bool,
    /// Reinitialize every `k` iterations; `None` (or `false` in a config)
    /// disables it.
    #[serde(deserialize_with = "reinit_step", skip_serializing_if = "Option::is_none")]
    pub reinit_step: Option<usize>,
    /// `(iterations, final pseudo-time)` of each reinitialization.
    pub reinit_pars: (usize, f64),
    pub start_to_check: usize,
    pub ctrn_tol: f64,
    pub lgrn_tol: f64,
    pub cost_tol: f64,
    pub prev: usize,
    /// `(seed, ϑ)`: RNG seed and relative spread of the random step choice.
    pub random_pars: (u64, f64),
    pub task_parallel: bool,
    /// Solve adjoint systems even when the model has an analytic adjoint.
    pub explicit_adjoint: bool,
    pub ppl: PplParams,
}

fn reinit_step<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Flag(bool),
        Every(usize),
    }
    match Raw::deserialize(d)? {
        Raw::Flag(false) => Ok(None),
        Raw::Flag(true) => Err(serde::de::Error::custom("reinit_step = true needs an interval; use an integer k or false")),
        Raw::Every(k) => Ok(Some(k)),
    }
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            niter: 100,
            dfactor: 1e-2,
            lv_time: [1e-3, 1e-1],
            lv_iter: [8, 16],
            smooth: false,
            reinit_step: None,
            reinit_pars: (8, 1e-1),
            start_to_check: 30,
            ctrn_tol: 1e-2,
            lgrn_tol: 1e-2,
            cost_tol: 1e-2,
            prev: 10,
            random_pars: (1, 0.05),
            task_parallel: false,
            explicit_adjoint: false,
            ppl: PplParams::default(),
        }
    }
}

impl RunParams {
    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.dfactor) {
            bad.push(format!("dfactor = {} must be > 0", self.dfactor));
        }
        let [t0, t1] = self.lv_time;
        if !(positive(t0) && t0 < t1 && t1.is_finite()) {
            bad.push(format!("lv_time = [{t0}, {t1}] needs 0 < t_min < t_max"));
        }
        let [s0, s1] = self.lv_iter;
        if !(s0 >= 1 && s0 < s1) {
            bad.push(format!("lv_iter = [{s0}, {s1}] needs 1 ≤ s_min < s_max"));
        }
        if self.reinit_step == Some(0) {
            bad.push("reinit_step = 0 must be ≥ 1 or false".into());
        }
        if self.reinit_pars.0 < 2 || !positive(self.reinit_pars.1) {
            bad.push(format!("reinit_pars = ({}, {}) needs iterations ≥ 2 and final time > 0", self.reinit_pars.0, self.reinit_pars.1));
        }
        for (name, v) in [("ctrn_tol", self.ctrn_tol), ("lgrn_tol", self.lgrn_tol), ("cost_tol", self.cost_tol)] {
            if !positive(v) {
                bad.push(format!("{name} = {v} must be > 0"));
            }
        }
        if self.prev < 1 {
            bad.push("prev = 0 must be ≥ 1".into());
        }
        let theta = self.random_pars.1;
        if !(0.0..1.0).contains(&theta) {
            bad.push(format!("random_pars spread = {theta} must lie in [0, 1)"));
        }
        if let Err(Error::Config(msg)) = self.ppl.validate() {
            bad.push(msg);
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(config(bad.join("; ")))
        }
    }
}

/// One row of the optimization history.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub cost: f64,
    pub constraints: Vec<f64>,
    pub lagrangian: f64,
    pub ctrn_err: f64,
    /// Transport horizon and step count; zero on the stopping iteration.
    pub t_end: f64,
    pub steps: usize,
    pub btt: f64,
    /// Combined derivative `dJ(Ω; θ)`.
    pub dj: f64,
    pub rhs_dot_theta: f64,
    pub wall_ms: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub z: Vec<f64>,
    pub delta: f64,
    pub newton_iterations: Option<usize>,
    pub reinitialized: bool,
    pub stopped: bool,
}

/// Transport horizon `t_end = dfactor / B(θ,θ)` and step count from the
/// 1/6-power interpolation, both optionally randomized (uniform scale
/// drawn first, then a normal step count).
pub fn adaptive_time(btt: f64, params: &RunParams, rng: &mut impl Rng) -> (f64, usize) {
    let [t_min, t_max] = params.lv_time;
    let [s_min, s_max] = params.lv_iter;
    let spread = params.random_pars.1;
    let b = if btt.is_finite() { btt.max(1e-12) } else { 1e-12 };
    let mut t_end = params.dfactor / b;
    if spread > 0.0 {
        t_end *= rng.random_range(1.0 - spread..1.0 + spread);
    }
    t_end = t_end.clamp(t_min, t_max);
    let mut s = (s_max - s_min) as f64 * ((t_end - t_min) / (t_max - t_min)).powf(1.0 / 6.0) + s_min as f64;
    if spread > 0.0 {
        s = Normal::new(s, spread * s).expect("positive spread").sample(rng);
    }
    (t_end, s.clamp(s_min as f64, s_max as f64).round() as usize)
}

/// Whether the last record of `history` satisfies the stopping criterion.
pub fn stopping_check(history: &[IterationRecord], params: &RunParams, has_constraints: bool) -> bool {
    let Some(cur) = history.last() else { return false };
    let i = history.len() - 1;
    if i <= params.start_to_check || i < params.prev {
        return false;
    }
    let window = &history[i - params.prev..i];
    if has_constraints {
        let swing = window.iter().fold(0.0f64, |m, r| m.max((cur.lagrangian - r.lagrangian).abs()));
        swing < params.lgrn_tol * cur.lagrangian.abs() && cur.ctrn_err < params.ctrn_tol
    } else {
        let swing = window.iter().fold(0.0f64, |m, r| m.max((cur.cost - r.cost).abs()));
        swing < params.cost_tol * cur.cost.abs()
    }
}

/// Receives each record with the level set it was evaluated at and the
/// velocity computed from it.
pub trait RunObserver<T> {
    fn on_iteration(&mut self, record: &IterationRecord, phi: &FemField<T>, theta: Option<&FemField<T>>) -> Result<()>;
}

impl<T> RunObserver<T> for () {
    fn on_iteration(&mut self, _: &IterationRecord, _: &FemField<T>, _: Option<&FemField<T>>) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome<T> {
    pub phi: FemField<T>,
    pub history: Vec<IterationRecord>,
    /// Whether the stopping criterion ended the run before `niter`.
    pub stopped: bool,
}

fn as_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

/// Runs the optimization from `phi0`. Each record is handed to `observer`
/// as soon as it is complete, so a failing iteration leaves the earlier
/// history with the observer.
pub fn run<T: Real>(
    model: &dyn ModelProblem<T>,
    phi0: &LevelSetField<T>,
    params: &RunParams,
    observer: &mut dyn RunObserver<T>,
) -> Result<RunOutcome<T>> {
    params.validate()?;
    let space = model.space();
    space.check(&phi0.phi)?;
    let nc = model.constraint_count();
    let mut ppl = PplState::new(nc, params.ppl)?;
    let velocity = VelocitySolver::new(&model.bilinear_form(), space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.random_pars.0);
    let h = phi0.h;
    let mut phi = phi0.phi.clone();
    let mut history: Vec<IterationRecord> = Vec::new();

    for iter in 0..params.niter {
        let start = Instant::now();
        let ev = evaluate(model, &phi, params.explicit_adjoint, params.task_parallel)?;
        let cost = ev.cost.to_f64_lossy();
        let constraints = as_f64(&ev.constraints);
        if !cost.is_finite() || constraints.iter().any(|c| !c.is_finite()) {
            return Err(Error::SolverDivergence { method: "state evaluation", iterations: iter, residual: f64::NAN });
        }
        ppl = ppl.update(&constraints)?;
        let mut record = IterationRecord {
            iter,
            cost,
            lagrangian: ppl.lagrangian(cost, &constraints),
            ctrn_err: constraint_error(&constraints),
            constraints,
            t_end: 0.0,
            steps: 0,
            btt: 0.0,
            dj: 0.0,
            rhs_dot_theta: 0.0,
            wall_ms: 0.0,
            lambda: ppl.lambda.clone(),
            mu: ppl.mu.clone(),
            z: ppl.z.clone(),
            delta: ppl.delta,
            newton_iterations: ev.newton_iterations,
            reinitialized: false,
            stopped: false,
        };
        history.push(record.clone());
        if stopping_check(&history, params, nc > 0) {
            record.stopped = true;
            record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            *history.last_mut().expect("pushed above") = record.clone();
            observer.on_iteration(&record, &phi, None)?;
            return Ok(RunOutcome { phi, history, stopped: true });
        }
        history.pop();

        let theta = {
            let d = model.derivative(&phi, &ev.states, &ev.adjoints);
            let s = combine_derivatives(d.cost, d.constraints, &ppl.lambda)?;
            velocity.solve(&s)?
        };
        let (btt, dj) = (theta.btt.to_f64_lossy(), theta.dj.to_f64_lossy());
        if !(btt >= 0.0) || dj > 1e-12 * (1.0 + btt) {
            return Err(contract(format!("iteration {iter}: velocity is not a descent direction (dJ = {dj:e}, B(θ,θ) = {btt:e})")));
        }
        let (t_end, steps) = adaptive_time(btt, params, &mut rng);
        let mut next = transport(space, &phi, &theta.theta, h, T::lit(t_end), steps, params.smooth)?;
        log::debug!("iter {iter}: max|φ| = {:e} after transport, max|θ| = {:e}", next.max_abs(), theta.theta.max_abs());
        let reinit = params.reinit_step.is_some_and(|k| (iter + 1) % k == 0);
        if reinit {
            next = reinitialize(space, &next, h, params.reinit_pars.0, T::lit(params.reinit_pars.1))?;
            log::debug!("iter {iter}: max|φ| = {:e} after reinitialization", next.max_abs());
        }
        if !next.is_finite() {
            return Err(Error::SolverDivergence { method: "level-set update", iterations: iter, residual: f64::NAN });
        }
        record.t_end = t_end;
        record.steps = steps;
        record.btt = btt;
        record.dj = dj;
        record.rhs_dot_theta = theta.rhs_dot_theta.to_f64_lossy();
        record.reinitialized = reinit;
        record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        log::info!(
            "iter {iter}: J = {:.6e}, L = {:.6e}, |C-1| = {:.3e}, B = {btt:.3e}, t_end = {t_end:.3e}, steps = {steps}",
            record.cost,
            record.lagrangian,
            record.ctrn_err
        );
        observer.on_iteration(&record, &phi, Some(&theta.theta))?;
        history.push(record);
        phi = next;
    }
    Ok(RunOutcome { phi, history, stopped: false })
}
