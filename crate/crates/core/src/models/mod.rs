//! PDE-constrained shape functionals: the model contract and its built-in
//! instances.

mod compliance;
mod heat;
mod inverse;
mod logistic;

pub use compliance::{Compliance, Load};
pub use heat::{radial_bump, Heat, HeatCase, ScalarSource};
pub use inverse::{dirichlet_extension, generate_measurements, InverseElasticity, InverseParams, MeasurementPair, VectorData, VectorSample};
pub use logistic::{default_initial_guess, InitialGuess, Logistic};

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{contract, Result};
use crate::fem::{bicgstab, solve_linear, SolverTolerance, solve_newton, CsrMatrix, DirichletSet, FemField, FunctionSpace, NewtonOptions, SparseSystem};
use crate::mesh::RectMesh;
use crate::scalar::Real;
use crate::velocity::{BilinearSpec, DerivativePair};

pub type ResidualFn<'a, T> = Box<dyn Fn(&[T]) -> Vec<T> + Send + Sync + 'a>;
pub type JacobianFn<'a, T> = Box<dyn Fn(&[T]) -> CsrMatrix<T> + Send + Sync + 'a>;

/// How one state or adjoint system is solved.
pub enum SystemKind<'a, T> {
    Linear { matrix: CsrMatrix<T>, rhs: Vec<T> },
    Newton { residual: ResidualFn<'a, T>, jacobian: JacobianFn<'a, T>, init: Vec<T>, options: NewtonOptions },
}

/// A state or adjoint problem with its Dirichlet data and value rank.
pub struct StateSystem<'a, T> {
    pub kind: SystemKind<'a, T>,
    pub bc: DirichletSet<T>,
    pub rank: usize,
}

/// Solution of a [`StateSystem`] with its Newton iteration count.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved<T> {
    pub field: FemField<T>,
    pub newton_iterations: Option<usize>,
}

impl<'a, T: Real> StateSystem<'a, T> {
    pub fn linear(matrix: CsrMatrix<T>, rhs: Vec<T>, bc: DirichletSet<T>, rank: usize) -> Self {
        Self { kind: SystemKind::Linear { matrix, rhs }, bc, rank }
    }

    pub fn solve(self) -> Result<Solved<T>> {
        let wrap = |values: Vec<T>| if self.rank == 1 { FemField::scalar(values) } else { FemField::vector(values) };
        match self.kind {
            SystemKind::Linear { matrix, rhs } => {
                let system = SparseSystem::new(matrix, rhs)?.apply_dirichlet(&self.bc)?;
                // symmetric but possibly indefinite (linearized reaction terms)
                let values = match solve_linear(&system) {
                    Ok(v) => v,
                    Err(_) => {
                        let mut x = vec![T::zero(); system.rhs.len()];
                        bicgstab(&system.matrix, &system.rhs, &mut x, &SolverTolerance::default())?;
                        x
                    }
                };
                Ok(Solved { field: wrap(values), newton_iterations: None })
            }
            SystemKind::Newton { residual, jacobian, init, options } => {
                let out = solve_newton(residual, jacobian, &init, &self.bc, &options)?;
                let iterations = out.iterations();
                Ok(Solved { field: wrap(out.solution), newton_iterations: Some(iterations) })
            }
        }
    }
}

/// Solves independent systems, concurrently when `parallel` is set. The
/// output order is the input order and the first error by input order is
/// returned.
pub fn solve_concurrent<T: Real>(systems: Vec<StateSystem<'_, T>>, parallel: bool) -> Result<Vec<Solved<T>>> {
    if parallel && systems.len() > 1 {
        systems.into_par_iter().map(StateSystem::solve).collect()
    } else {
        systems.into_iter().map(StateSystem::solve).collect()
    }
}

/// Derivative tensors of the cost and of every constraint.
pub struct ShapeDerivative<'a, T> {
    pub cost: DerivativePair<'a, T>,
    pub constraints: Vec<DerivativePair<'a, T>>,
}

/// A shape functional `J(Ω)` under PDE constraints with normalized
/// constraints `C(Ω) = 1`, in terms of the level set `φ`.
pub trait ModelProblem<T: Real>: Send + Sync {
    fn name(&self) -> &'static str;

    /// Scalar P1 space carrying the level set.
    fn space(&self) -> &FunctionSpace<T>;

    fn constraint_count(&self) -> usize;

    fn state_systems(&self, phi: &FemField<T>) -> Result<Vec<StateSystem<'_, T>>>;

    /// Explicit adjoint systems. Models with a closed-form adjoint still
    /// provide them for verification.
    fn adjoint_systems(&self, phi: &FemField<T>, states: &[FemField<T>]) -> Result<Vec<StateSystem<'_, T>>>;

    /// Closed-form adjoints, when the model has them.
    fn analytic_adjoints(&self, _states: &[FemField<T>]) -> Option<Vec<FemField<T>>> {
        None
    }

    fn cost(&self, phi: &FemField<T>, states: &[FemField<T>]) -> T;

    fn constraints(&self, phi: &FemField<T>, states: &[FemField<T>]) -> Vec<T>;

    fn derivative<'a>(&'a self, phi: &'a FemField<T>, states: &'a [FemField<T>], adjoints: &'a [FemField<T>]) -> ShapeDerivative<'a, T>;

    fn bilinear_form(&self) -> BilinearSpec;

    /// The same model on a mesh with identical connectivity and boundary,
    /// e.g. a deformed copy. Analytic data is re-evaluated at the new points;
    /// nodal data is carried along.
    fn on_mesh(&self, mesh: Arc<RectMesh<T>>) -> Result<Box<dyn ModelProblem<T>>>;
}

/// States, adjoints and functional values of one model evaluation.
#[derive(Debug, Clone)]
pub struct Evaluation<T> {
    pub states: Vec<FemField<T>>,
    pub adjoints: Vec<FemField<T>>,
    pub cost: T,
    pub constraints: Vec<T>,
    /// Largest Newton iteration count among the state solves.
    pub newton_iterations: Option<usize>,
}

/// Solves the state equations of `model` at `phi`.
pub fn solve_states<T: Real>(model: &dyn ModelProblem<T>, phi: &FemField<T>, parallel: bool) -> Result<(Vec<FemField<T>>, Option<usize>)> {
    let solved = solve_concurrent(model.state_systems(phi)?, parallel)?;
    let newton = solved.iter().filter_map(|s| s.newton_iterations).max();
    Ok((solved.into_iter().map(|s| s.field).collect(), newton))
}

/// Solves the adjoint equations, using the closed form unless `explicit`.
pub fn solve_adjoints<T: Real>(
    model: &dyn ModelProblem<T>,
    phi: &FemField<T>,
    states: &[FemField<T>],
    explicit: bool,
    parallel: bool,
) -> Result<Vec<FemField<T>>> {
    if !explicit {
        if let Some(a) = model.analytic_adjoints(states) {
            return Ok(a);
        }
    }
    let solved = solve_concurrent(model.adjoint_systems(phi, states)?, parallel)?;
    Ok(solved.into_iter().map(|s| s.field).collect())
}

pub fn evaluate<T: Real>(model: &dyn ModelProblem<T>, phi: &FemField<T>, explicit_adjoint: bool, parallel: bool) -> Result<Evaluation<T>> {
    model.space().check(phi)?;
    let (states, newton_iterations) = solve_states(model, phi, parallel)?;
    let adjoints = solve_adjoints(model, phi, &states, explicit_adjoint, parallel)?;
    let cost = model.cost(phi, &states);
    let constraints = model.constraints(phi, &states);
    if constraints.len() != model.constraint_count() {
        return Err(contract(format!("{} returned {} constraints, declared {}", model.name(), constraints.len(), model.constraint_count())));
    }
    Ok(Evaluation { states, adjoints, cost, constraints, newton_iterations })
}

/// Cost only, without adjoints.
pub fn cost_at<T: Real>(model: &dyn ModelProblem<T>, phi: &FemField<T>) -> Result<T> {
    let (states, _) = solve_states(model, phi, false)?;
    Ok(model.cost(phi, &states))
}

/// `(1/V) ∫ χ_Ω` and its tensor `S₁ = χ_Ω/V I`.
pub(crate) fn volume_fraction<T: Real>(space: &FunctionSpace<T>, phi: &FemField<T>, volume: T) -> T {
    space.integrate_qp(|c, q| crate::fem::chi(phi, c, q)) / volume
}

pub(crate) fn volume_tensor<'a, T: Real>(phi: &'a FemField<T>, volume: T) -> DerivativePair<'a, T> {
    DerivativePair::from_s1(move |c, q| crate::scalar::mat_identity(crate::fem::chi(phi, c, q) / volume))
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(crate::error::config(format!("{name} = {v} must be a positive number")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_and_parallel_agree() {
        let mesh = Arc::new(RectMesh::build([0.0, 0.0, 1.0, 1.0], 6, 6).unwrap());
        let s = FunctionSpace::<f64>::scalar(mesh).unwrap();
        let make = |k: usize| {
            let m = s.stiffness_matrix();
            let rhs = s.assemble_vector(|c, l| {
                for (i, v) in l.iter_mut().enumerate() {
                    *v += c.area * (1.0 + k as f64 + i as f64) / 3.0;
                }
            });
            StateSystem::linear(m, rhs, DirichletSet::homogeneous(s.all_boundary_dofs()), 1)
        };
        let a = solve_concurrent((0..4).map(make).collect(), false).unwrap();
        let b = solve_concurrent((0..4).map(make).collect(), true).unwrap();
        assert_eq!(a, b);
    }
}
