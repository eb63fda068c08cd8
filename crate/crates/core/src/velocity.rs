//! Descent directions from the velocity equation `B(θ, ξ) = −dJ(Ω; ξ)`.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::fem::{add_mass, add_stiffness, cg, eliminate_homogeneous, Cell, CsrMatrix, DirichletSet, FemField, FunctionSpace, SolverTolerance};
use crate::mesh::Region;
use crate::scalar::{ddot, dot2, mat_add, mat_scale, Mat2, Real, Vec2};

/// Penalized region where the velocity is driven to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrozenSubdomain {
    pub region: Region,
    #[serde(default = "default_penalty")]
    pub penalty: f64,
}

fn default_penalty() -> f64 {
    1e4
}

/// `B(θ,ξ) = m∫θ·ξ + s∫Dθ:Dξ + b∫_{∂D}(θ·n)(ξ·n) + p∫χ_{Ω₀}θ·ξ` on
/// `H¹` or `H¹₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilinearSpec {
    #[serde(default)]
    pub mass_weight: f64,
    #[serde(default = "unit")]
    pub stiffness_weight: f64,
    #[serde(default)]
    pub boundary_normal_penalty: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frozen_subdomain: Option<FrozenSubdomain>,
    #[serde(default = "yes")]
    pub zero_dirichlet: bool,
}

fn yes() -> bool {
    true
}

fn unit() -> f64 {
    1.0
}

impl Default for BilinearSpec {
    fn default() -> Self {
        Self { mass_weight: 0.0, stiffness_weight: 1.0, boundary_normal_penalty: 0.0, frozen_subdomain: None, zero_dirichlet: true }
    }
}

impl BilinearSpec {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [("mass_weight", self.mass_weight), ("boundary_normal_penalty", self.boundary_normal_penalty)];
        for (k, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(config(format!("bilinear form: {k} = {v} must be a finite value ≥ 0")));
            }
        }
        if !(self.stiffness_weight > 0.0) || !self.stiffness_weight.is_finite() {
            return Err(config(format!("bilinear form: stiffness_weight = {} must be > 0", self.stiffness_weight)));
        }
        if let Some(f) = &self.frozen_subdomain {
            if !(f.penalty >= 0.0) {
                return Err(config(format!("bilinear form: frozen penalty {} must be ≥ 0", f.penalty)));
            }
        }
        if !(self.zero_dirichlet || self.mass_weight > 0.0 || self.boundary_normal_penalty > 0.0) {
            return Err(config(
                "bilinear form is only semidefinite: need zero_dirichlet, mass_weight > 0 or boundary_normal_penalty > 0",
            ));
        }
        Ok(())
    }
}

pub type VectorTensorFn<'a, T> = Box<dyn Fn(&Cell<T>, usize) -> Vec2<T> + Send + Sync + 'a>;
pub type MatrixTensorFn<'a, T> = Box<dyn Fn(&Cell<T>, usize) -> Mat2<T> + Send + Sync + 'a>;

/// Tensor representation `(S₀, S₁)` of a distributed shape derivative
/// `dJ(Ω;θ) = ∫ S₀·θ + S₁:Dθ`, evaluated at quadrature nodes. `None`
/// stands for an identically zero component.
pub struct DerivativePair<'a, T> {
    pub s0: Option<VectorTensorFn<'a, T>>,
    pub s1: Option<MatrixTensorFn<'a, T>>,
}

impl<'a, T: Real> DerivativePair<'a, T> {
    pub fn zero() -> Self {
        Self { s0: None, s1: None }
    }

    pub fn new(
        s0: Option<impl Fn(&Cell<T>, usize) -> Vec2<T> + Send + Sync + 'a>,
        s1: Option<impl Fn(&Cell<T>, usize) -> Mat2<T> + Send + Sync + 'a>,
    ) -> Self {
        Self {
            s0: s0.map(|f| Box::new(f) as VectorTensorFn<'a, T>),
            s1: s1.map(|f| Box::new(f) as MatrixTensorFn<'a, T>),
        }
    }

    pub fn from_s1(s1: impl Fn(&Cell<T>, usize) -> Mat2<T> + Send + Sync + 'a) -> Self {
        Self { s0: None, s1: Some(Box::new(s1)) }
    }

    #[inline]
    pub fn s0_at(&self, c: &Cell<T>, q: usize) -> Vec2<T> {
        self.s0.as_ref().map_or([T::zero(); 2], |f| f(c, q))
    }

    #[inline]
    pub fn s1_at(&self, c: &Cell<T>, q: usize) -> Mat2<T> {
        self.s1.as_ref().map_or([[T::zero(); 2]; 2], |f| f(c, q))
    }

    /// `∫ S₀·θ + S₁:Dθ` for a vector field θ.
    pub fn apply(&self, space: &FunctionSpace<T>, theta: &FemField<T>) -> T {
        space.integrate(|c| {
            let d_theta = theta.jacobian(c);
            c.quad(|q| dot2(self.s0_at(c, q), theta.vec_at(c, q)) + ddot(&self.s1_at(c, q), &d_theta))
        })
    }

    /// Pointwise sum of `self` and `weight · other`.
    pub fn plus_scaled(self, weight: T, other: DerivativePair<'a, T>) -> DerivativePair<'a, T> {
        let s0 = match (self.s0, other.s0) {
            (None, None) => None,
            (a, b) => Some(Box::new(move |c: &Cell<T>, q: usize| {
                let va = a.as_ref().map_or([T::zero(); 2], |f| f(c, q));
                let vb = b.as_ref().map_or([T::zero(); 2], |f| f(c, q));
                [va[0] + weight * vb[0], va[1] + weight * vb[1]]
            }) as VectorTensorFn<'a, T>),
        };
        let s1 = match (self.s1, other.s1) {
            (None, None) => None,
            (a, b) => Some(Box::new(move |c: &Cell<T>, q: usize| {
                let ma = a.as_ref().map_or([[T::zero(); 2]; 2], |f| f(c, q));
                let mb = b.as_ref().map_or([[T::zero(); 2]; 2], |f| f(c, q));
                mat_add(&ma, &mat_scale(&mb, weight))
            }) as MatrixTensorFn<'a, T>),
        };
        DerivativePair { s0, s1 }
    }
}

/// Result of a velocity solve.
#[derive(Debug, Clone)]
pub struct Velocity<T> {
    pub theta: FemField<T>,
    /// `B(θ, θ)`.
    pub btt: T,
    /// `dJ(Ω; θ)` by quadrature of the tensors.
    pub dj: T,
    /// `rhsᵀθ` of the assembled discrete system.
    pub rhs_dot_theta: T,
}

/// Velocity equation with its left-hand side assembled once.
#[derive(Debug, Clone)]
pub struct VelocitySolver<T> {
    space: FunctionSpace<T>,
    spec: BilinearSpec,
    /// `B` without boundary conditions, used to evaluate `B(θ, θ)`.
    form: CsrMatrix<T>,
    matrix: CsrMatrix<T>,
    bc: DirichletSet<T>,
}

impl<T: Real> VelocitySolver<T> {
    pub fn new(spec: &BilinearSpec, space: &FunctionSpace<T>) -> Result<Self> {
        spec.validate()?;
        let space = space.sibling(2)?;
        let (m, s) = (T::lit(spec.mass_weight), T::lit(spec.stiffness_weight));
        let frozen = spec.frozen_subdomain.clone();
        let mut form = space.assemble_matrix(|c, local| {
            add_stiffness(c, 2, |_| s, local);
            if spec.mass_weight > 0.0 {
                add_mass(c, 2, |_| m, local);
            }
            if let Some(f) = &frozen {
                let p = T::lit(f.penalty);
                add_mass(c, 2, |q| if f.region.contains(c.qpoint(q)) { p } else { T::zero() }, local);
            }
        });
        if spec.boundary_normal_penalty > 0.0 {
            let b = T::lit(spec.boundary_normal_penalty);
            space.add_boundary_matrix(&mut form, None, |f, local| {
                let n = f.normal;
                for q in 0..2 {
                    let phi = f.basis(q);
                    let w = f.weight() * b;
                    for a in 0..4 {
                        for bb in 0..4 {
                            let va = phi[a / 2] * n[a % 2];
                            let vb = phi[bb / 2] * n[bb % 2];
                            local[a * 4 + bb] += w * va * vb;
                        }
                    }
                }
            });
        }
        let bc = if spec.zero_dirichlet {
            DirichletSet::homogeneous(space.all_boundary_dofs())
        } else {
            DirichletSet::empty()
        };
        let mut matrix = form.clone();
        eliminate_homogeneous(&mut matrix, &bc)?;
        Ok(Self { space, spec: spec.clone(), form, matrix, bc })
    }

    pub fn spec(&self) -> &BilinearSpec {
        &self.spec
    }

    pub fn space(&self) -> &FunctionSpace<T> {
        &self.space
    }

    pub fn form(&self) -> &CsrMatrix<T> {
        &self.form
    }

    /// `rhs_ξ = −∫ S₀·ξ + S₁:Dξ` for every basis function ξ.
    pub fn rhs(&self, s: &DerivativePair<'_, T>) -> Vec<T> {
        let mut rhs = self.space.assemble_vector(|c, local| {
            for q in 0..3 {
                let s0 = s.s0_at(c, q);
                let s1 = s.s1_at(c, q);
                let b = c.basis(q);
                let w = c.weight();
                for k in 0..3 {
                    let g = c.grads[k];
                    for comp in 0..2 {
                        // ξ = e_comp λ_k, Dξ has row `comp` equal to ∇λ_k
                        let val = s0[comp] * b[k] + s1[comp][0] * g[0] + s1[comp][1] * g[1];
                        local[2 * k + comp] -= w * val;
                    }
                }
            }
        });
        self.bc.zero_out(&mut rhs);
        rhs
    }

    pub fn solve(&self, s: &DerivativePair<'_, T>) -> Result<Velocity<T>> {
        let rhs = self.rhs(s);
        let mut x = vec![T::zero(); rhs.len()];
        cg(&self.matrix, &rhs, &mut x, &SolverTolerance::default())?;
        let theta = self.space.field(x)?;
        let btt = self.form.bilinear(&theta.values, &theta.values);
        let rhs_dot_theta = rhs.iter().zip(&theta.values).map(|(&a, &b)| a * b).sum();
        let dj = s.apply(&self.space, &theta);
        Ok(Velocity { theta, btt, dj, rhs_dot_theta })
    }

    /// `B(θ, θ)` of an arbitrary field.
    pub fn energy(&self, theta: &FemField<T>) -> T {
        self.form.bilinear(&theta.values, &theta.values)
    }

    /// `∫_{∂D} (θ·n)²`.
    pub fn boundary_normal_energy(&self, theta: &FemField<T>) -> T {
        self.space.integrate_boundary(None, |f, q| {
            let phi = f.basis(q);
            let a = theta.vertex_vec(f.vertices[0]);
            let b = theta.vertex_vec(f.vertices[1]);
            let t = [phi[0] * a[0] + phi[1] * b[0], phi[0] * a[1] + phi[1] * b[1]];
            let tn = dot2(t, f.normal);
            tn * tn
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoxRegion, RectMesh};
    use crate::scalar::mat_identity;
    use std::sync::Arc;

    fn vspace(n: usize) -> FunctionSpace<f64> {
        FunctionSpace::vector(Arc::new(RectMesh::build([0.0, 0.0, 1.0, 1.0], n, n).unwrap())).unwrap()
    }

    #[test]
    fn definiteness_guard() {
        let bad = BilinearSpec { zero_dirichlet: false, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = BilinearSpec { stiffness_weight: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(BilinearSpec::default().validate().is_ok());
        let ok = BilinearSpec { mass_weight: 0.1, boundary_normal_penalty: 1e4, zero_dirichlet: false, ..Default::default() };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn zero_tensors_zero_velocity() {
        let v = VelocitySolver::new(&BilinearSpec::default(), &vspace(6)).unwrap();
        let out = v.solve(&DerivativePair::zero()).unwrap();
        assert!(out.theta.max_abs() == 0.0);
        assert_eq!(out.btt, 0.0);
    }

    #[test]
    fn volume_derivative_descent_identity() {
        let v = VelocitySolver::new(&BilinearSpec::default(), &vspace(8)).unwrap();
        let s = DerivativePair::from_s1(|_, _| mat_identity(1.0));
        let out = v.solve(&s).unwrap();
        let div: f64 = v.space().integrate(|c| {
            let d = out.theta.jacobian(c);
            c.area * (d[0][0] + d[1][1])
        });
        assert!((div - out.dj).abs() < 1e-12);
        assert!((out.dj + out.btt).abs() <= 1e-8 * out.btt.abs().max(1e-300));
        assert!((out.rhs_dot_theta - out.btt).abs() <= 1e-8 * (1.0 + out.btt));
    }

    #[test]
    fn h1_form_with_normal_penalty() {
        let spec = BilinearSpec { mass_weight: 0.1, boundary_normal_penalty: 1e4, zero_dirichlet: false, ..Default::default() };
        let v = VelocitySolver::new(&spec, &vspace(8)).unwrap();
        assert!(v.form().asymmetry() < 1e-9);
        let s = DerivativePair::new(Some(|c: &Cell<f64>, q| {
            let p = c.qpoint(q);
            [p[1] - 0.5, 0.5 - p[0]]
        }), None::<fn(&Cell<f64>, usize) -> Mat2<f64>>);
        let out = v.solve(&s).unwrap();
        assert!(out.btt > 0.0);
        assert!((out.dj + out.btt).abs() <= 1e-8 * (1.0 + out.btt));
        assert!(v.boundary_normal_energy(&out.theta) <= 1e-3 * out.btt);
    }

    #[test]
    fn frozen_region_penalized() {
        let spec = BilinearSpec {
            frozen_subdomain: Some(FrozenSubdomain { region: Region::single(BoxRegion::new([0.0, 0.5], [0.0, 1.0])), penalty: 1e4 }),
            ..Default::default()
        };
        let v = VelocitySolver::new(&spec, &vspace(16)).unwrap();
        let out = v.solve(&DerivativePair::from_s1(|_, _| mat_identity(1.0))).unwrap();
        let mut inside = 0.0f64;
        for (k, p) in v.space().mesh().vertices().iter().enumerate() {
            if p[0] < 0.4 {
                let t = out.theta.vertex_vec(k);
                inside = inside.max(t[0].abs().max(t[1].abs()));
            }
        }
        assert!(inside <= 1e-3 * out.theta.max_abs());
    }

    #[test]
    fn combination_is_linear() {
        let s = DerivativePair::<f64>::zero().plus_scaled(2.0, DerivativePair::from_s1(|_, _| mat_identity(1.5)));
        let c = Cell::new(0, [0, 1, 2], [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(s.s1_at(&c, 0), mat_identity(3.0));
        assert_eq!(s.s0_at(&c, 0), [0.0, 0.0]);
    }
}
