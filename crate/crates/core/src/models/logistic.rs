use std::sync::Arc;

use crate::error::Result;
use crate::fem::{add_mass, add_stiffness, FemField, FunctionSpace, MaterialIndicator, NewtonOptions, CsrMatrix, DirichletSet};
use crate::mesh::RectMesh;
use crate::models::{check_positive, volume_fraction, volume_tensor, ModelProblem, ShapeDerivative, StateSystem, SystemKind};
use crate::scalar::{dot2, mat_add, mat_identity, outer, Real, Vec2};
use crate::velocity::{BilinearSpec, DerivativePair};

pub type InitialGuess<T> = Arc<dyn Fn(Vec2<T>) -> T + Send + Sync>;

/// Maximizes the equilibrium population `∫ u` of
/// `−Δu = r u (1 − u/K_Ω)`, `∂_n u = 0`, with carrying capacity
/// `K_Ω = χ_Ω + 10⁻² χ_{D∖Ω}` under `(1/V) ∫ χ_Ω = 1`.
#[derive(Clone)]
pub struct Logistic<T> {
    space: FunctionSpace<T>,
    capacity: MaterialIndicator<T>,
    rate: T,
    volume: T,
    init: InitialGuess<T>,
    newton: NewtonOptions,
    bilinear: BilinearSpec,
}

impl<T> std::fmt::Debug for Logistic<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Logistic").finish_non_exhaustive()
    }
}

pub const LOGISTIC_ERSATZ: f64 = 1e-2;

/// `u₀(x, y) = 1 + 0.2 sin(6πx) sin(6πy)`.
pub fn default_initial_guess<T: Real>() -> InitialGuess<T> {
    Arc::new(|x: Vec2<T>| {
        let k = T::lit(6.0 * std::f64::consts::PI);
        T::one() + T::lit(0.2) * (k * x[0]).sin() * (k * x[1]).sin()
    })
}

impl<T: Real> Logistic<T> {
    pub fn new(mesh: Arc<RectMesh<T>>, rate: f64, volume: f64, init: InitialGuess<T>, bilinear: BilinearSpec) -> Result<Self> {
        check_positive("growth rate r", rate)?;
        check_positive("volume", volume)?;
        bilinear.validate()?;
        Ok(Self {
            space: FunctionSpace::scalar(mesh)?,
            capacity: MaterialIndicator::new(T::one(), T::lit(LOGISTIC_ERSATZ))?,
            rate: T::lit(rate),
            volume: T::lit(volume),
            init,
            newton: NewtonOptions::default(),
            bilinear,
        })
    }

    pub fn with_newton(mut self, options: NewtonOptions) -> Self {
        self.newton = options;
        self
    }

    /// `F(u)_i = ∫ ∇u·∇λ_i − ∫ r u (1 − u/K_Ω) λ_i`.
    pub fn residual(&self, phi: &FemField<T>, u: &[T]) -> Vec<T> {
        let r = self.rate;
        self.space.assemble_vector(|c, local| {
            let nodal = [u[c.vertices[0]], u[c.vertices[1]], u[c.vertices[2]]];
            let g = c.grad(nodal);
            for k in 0..3 {
                local[k] += c.area * dot2(g, c.grads[k]);
            }
            for q in 0..3 {
                let uq = c.interp(nodal, q);
                let kq = self.capacity.at(phi, c, q);
                let s = r * uq * (T::one() - uq / kq) * c.weight();
                let b = c.basis(q);
                for k in 0..3 {
                    local[k] -= s * b[k];
                }
            }
        })
    }

    /// `∫ ∇δu·∇v − ∫ r (1 − 2u/K_Ω) δu v`.
    pub fn jacobian(&self, phi: &FemField<T>, u: &[T]) -> CsrMatrix<T> {
        let r = self.rate;
        let two = T::lit(2.0);
        self.space.assemble_matrix(|c, local| {
            add_stiffness(c, 1, |_| T::one(), local);
            let nodal = [u[c.vertices[0]], u[c.vertices[1]], u[c.vertices[2]]];
            add_mass(c, 1, |q| -r * (T::one() - two * c.interp(nodal, q) / self.capacity.at(phi, c, q)), local);
        })
    }
}

impl<T: Real> ModelProblem<T> for Logistic<T> {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn space(&self) -> &FunctionSpace<T> {
        &self.space
    }

    fn constraint_count(&self) -> usize {
        1
    }

    fn state_systems(&self, phi: &FemField<T>) -> Result<Vec<StateSystem<'_, T>>> {
        self.space.check(phi)?;
        let phi_r = phi.clone();
        let phi_j = phi.clone();
        let init = self.space.interpolate_scalar(|x| (self.init)(x)).values;
        Ok(vec![StateSystem {
            kind: SystemKind::Newton {
                residual: Box::new(move |u| self.residual(&phi_r, u)),
                jacobian: Box::new(move |u| self.jacobian(&phi_j, u)),
                init,
                options: self.newton,
            },
            bc: DirichletSet::empty(),
            rank: 1,
        }])
    }

    /// `∫ ∇p·∇q + ∫ r (2u/K_Ω − 1) p q = ∫ q`.
    fn adjoint_systems(&self, phi: &FemField<T>, states: &[FemField<T>]) -> Result<Vec<StateSystem<'_, T>>> {
        let u = &states[0];
        let matrix = self.jacobian(phi, &u.values);
        let rhs = self.space.assemble_vector(|c, local| {
            for l in local.iter_mut() {
                *l += c.area / T::lit(3.0);
            }
        });
        Ok(vec![StateSystem::linear(matrix, rhs, DirichletSet::empty(), 1)])
    }

    fn cost(&self, _phi: &FemField<T>, states: &[FemField<T>]) -> T {
        let u = &states[0];
        -self.space.integrate_qp(|c, q| u.at(c, q))
    }

    fn constraints(&self, phi: &FemField<T>, _states: &[FemField<T>]) -> Vec<T> {
        vec![volume_fraction(&self.space, phi, self.volume)]
    }

    fn derivative<'a>(&'a self, phi: &'a FemField<T>, states: &'a [FemField<T>], adjoints: &'a [FemField<T>]) -> ShapeDerivative<'a, T> {
        let (u, p) = (&states[0], &adjoints[0]);
        let cost = DerivativePair::from_s1(move |c, q| {
            let (gu, gp) = (u.grad(c), p.grad(c));
            let (uq, pq) = (u.at(c, q), p.at(c, q));
            let k = self.capacity.at(phi, c, q);
            let iso = dot2(gu, gp) - uq - self.rate * uq * (T::one() - uq / k) * pq;
            let sym = mat_add(&outer(gu, gp), &outer(gp, gu));
            mat_add(&mat_identity(iso), &crate::scalar::mat_scale(&sym, -T::one()))
        });
        ShapeDerivative { cost, constraints: vec![volume_tensor(phi, self.volume)] }
    }

    fn bilinear_form(&self) -> BilinearSpec {
        self.bilinear.clone()
    }

    fn on_mesh(&self, mesh: Arc<RectMesh<T>>) -> Result<Box<dyn ModelProblem<T>>> {
        let m = Logistic::new(mesh, self.rate.to_f64_lossy(), self.volume.to_f64_lossy(), self.init.clone(), self.bilinear.clone())?;
        Ok(Box::new(m.with_newton(self.newton)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::evaluate;

    fn model(n: usize) -> Logistic<f64> {
        let mesh = Arc::new(RectMesh::build([0.0, 0.0, 1.0, 1.0], n, n).unwrap());
        let b = BilinearSpec { boundary_normal_penalty: 1e4, zero_dirichlet: false, ..Default::default() };
        Logistic::new(mesh, 10.0, 0.5, default_initial_guess(), b).unwrap()
    }

    #[test]
    fn uniform_capacity_gives_unit_population() {
        let m = model(16);
        let phi = m.space().interpolate_scalar(|_| -1.0);
        let ev = evaluate(&m, &phi, false, false).unwrap();
        assert!(ev.states[0].values.iter().all(|v| (v - 1.0).abs() < 1e-6));
        assert!((ev.cost + 1.0).abs() < 1e-6);
        assert!(ev.newton_iterations.unwrap() <= 10);
    }

    #[test]
    fn jacobian_matches_residual_difference() {
        let m = model(8);
        let phi = m.space().interpolate_scalar(|p| p[0] - 0.4);
        let u: Vec<f64> = m.space().interpolate_scalar(|p| 0.5 + 0.3 * p[1]).values;
        let w: Vec<f64> = m.space().interpolate_scalar(|p| (3.0 * p[0]).sin() + p[1]).values;
        let eps = 1e-6;
        let up: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + eps * b).collect();
        let um: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - eps * b).collect();
        let (fp, fm) = (m.residual(&phi, &up), m.residual(&phi, &um));
        let jw = m.jacobian(&phi, &u).mul_vec(&w);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..jw.len() {
            let fd = (fp[i] - fm[i]) / (2.0 * eps);
            num += (fd - jw[i]).powi(2);
            den += jw[i].powi(2);
        }
        assert!((num / den).sqrt() < 1e-6);
    }

    #[test]
    fn negative_start_reaches_trivial_or_errors() {
        let mesh = Arc::new(RectMesh::build([0.0, 0.0, 1.0, 1.0], 8, 8).unwrap());
        let b = BilinearSpec { boundary_normal_penalty: 1e4, zero_dirichlet: false, ..Default::default() };
        let m = Logistic::new(mesh, 10.0, 0.5, Arc::new(|_| -1.0), b).unwrap();
        let phi = m.space().interpolate_scalar(|_| -1.0);
        match evaluate(&m, &phi, false, false) {
            Ok(ev) => assert!(ev.states[0].values.iter().all(|v| *v <= 1e-8)),
            Err(e) => assert!(matches!(e, crate::error::Error::NewtonDivergence { .. })),
        }
    }
}
