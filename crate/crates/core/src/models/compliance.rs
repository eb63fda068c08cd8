use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::fem::{add_elasticity, CsrMatrix, DirichletSet, FemField, FunctionSpace, Lame, MaterialIndicator};
use crate::mesh::RectMesh;
use crate::models::{check_positive, volume_fraction, volume_tensor, ModelProblem, ShapeDerivative, StateSystem};
use crate::scalar::{ddot, mat_add, mat_identity, mat_mul, mat_scale, mat_transpose, Real};
use crate::velocity::{BilinearSpec, DerivativePair};

/// Surface traction `g` applied on the facets carrying `tag`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Load {
    pub traction: [f64; 2],
    pub tag: u32,
}

/// `A_Ω σ(u):ε(v)` with `A_Ω = material(φ)` at every quadrature node.
pub(crate) fn elasticity_matrix<T: Real>(space: &FunctionSpace<T>, lame: &Lame<T>, material: &MaterialIndicator<T>, phi: &FemField<T>) -> CsrMatrix<T> {
    space.assemble_matrix(|c, local| add_elasticity(c, lame, |q| material.at(phi, c, q), local))
}

/// `∫_{Γ} g·v` over the facets carrying `tag`.
pub(crate) fn traction_vector<T: Real>(space: &FunctionSpace<T>, tag: u32, g: [f64; 2]) -> Vec<T> {
    let g = [T::lit(g[0]), T::lit(g[1])];
    space.assemble_boundary_vector(Some(&[tag]), |f, local| {
        for q in 0..2 {
            let b = f.basis(q);
            let w = f.weight();
            for k in 0..2 {
                for comp in 0..2 {
                    local[2 * k + comp] += w * b[k] * g[comp];
                }
            }
        }
    })
}

/// Sum of compliances `Σ_k ∫ A_Ω σ(u_k):ε(u_k)` under the volume constraint
/// `(1/V) ∫ χ_Ω = 1`, with `A_Ω = χ_Ω + 10⁻⁴ χ_{D∖Ω}` and `u_k = 0` on the
/// clamped facets.
#[derive(Debug, Clone)]
pub struct Compliance<T> {
    space: FunctionSpace<T>,
    vspace: FunctionSpace<T>,
    lame: Lame<T>,
    material: MaterialIndicator<T>,
    clamped: Vec<u32>,
    loads: Vec<Load>,
    load_vectors: Vec<Vec<T>>,
    bc: DirichletSet<T>,
    volume: T,
    bilinear: BilinearSpec,
}

pub const COMPLIANCE_ERSATZ: f64 = 1e-4;

impl<T: Real> Compliance<T> {
    pub fn new(mesh: Arc<RectMesh<T>>, clamped: &[u32], loads: &[Load], volume: f64, lame: Lame<f64>, bilinear: BilinearSpec) -> Result<Self> {
        check_positive("volume", volume)?;
        check_positive("lame.lambda", lame.lambda)?;
        check_positive("lame.mu", lame.mu)?;
        bilinear.validate()?;
        if loads.is_empty() {
            return Err(config("compliance: at least one load is required"));
        }
        if mesh.boundary_vertices(clamped).is_empty() {
            return Err(config(format!("compliance: no boundary facets carry the clamped tags {clamped:?}")));
        }
        for l in loads {
            if mesh.facets_with_tag(l.tag).next().is_none() {
                return Err(config(format!("compliance: no boundary facets carry load tag {}", l.tag)));
            }
        }
        let space = FunctionSpace::scalar(mesh)?;
        let vspace = space.sibling(2)?;
        let load_vectors = loads.iter().map(|l| traction_vector(&vspace, l.tag, l.traction)).collect();
        let bc = DirichletSet::homogeneous(vspace.boundary_dofs(clamped));
        Ok(Self {
            space,
            vspace,
            lame: Lame { lambda: T::lit(lame.lambda), mu: T::lit(lame.mu) },
            material: MaterialIndicator::new(T::one(), T::lit(COMPLIANCE_ERSATZ))?,
            clamped: clamped.to_vec(),
            loads: loads.to_vec(),
            load_vectors,
            bc,
            volume: T::lit(volume),
            bilinear,
        })
    }

    pub fn vector_space(&self) -> &FunctionSpace<T> {
        &self.vspace
    }

    pub fn loads(&self) -> &[Load] {
        &self.loads
    }

    fn energy(&self, phi: &FemField<T>, u: &FemField<T>) -> T {
        self.space.integrate_qp(|c, q| {
            let du = u.jacobian(c);
            self.material.at(phi, c, q) * ddot(&self.lame.stress(&du), &self.lame.strain(&du))
        })
    }
}

impl<T: Real> ModelProblem<T> for Compliance<T> {
    fn name(&self) -> &'static str {
        if self.loads.len() > 1 {
            "compliance_plus"
        } else {
            "compliance"
        }
    }

    fn space(&self) -> &FunctionSpace<T> {
        &self.space
    }

    fn constraint_count(&self) -> usize {
        1
    }

    fn state_systems(&self, phi: &FemField<T>) -> Result<Vec<StateSystem<'_, T>>> {
        self.space.check(phi)?;
        let k = elasticity_matrix(&self.vspace, &self.lame, &self.material, phi);
        Ok(self.load_vectors.iter().map(|b| StateSystem::linear(k.clone(), b.clone(), self.bc.clone(), 2)).collect())
    }

    fn adjoint_systems(&self, phi: &FemField<T>, _states: &[FemField<T>]) -> Result<Vec<StateSystem<'_, T>>> {
        let k = elasticity_matrix(&self.vspace, &self.lame, &self.material, phi);
        let m2 = T::lit(-2.0);
        Ok(self
            .load_vectors
            .iter()
            .map(|b| StateSystem::linear(k.clone(), b.iter().map(|&v| m2 * v).collect(), self.bc.clone(), 2))
            .collect())
    }

    fn analytic_adjoints(&self, states: &[FemField<T>]) -> Option<Vec<FemField<T>>> {
        Some(states.iter().map(|u| u.scaled(T::lit(-2.0))).collect())
    }

    /// `Σ 2⟨b_k, u_k⟩ − a(u_k, u_k)`, the compliance at the discrete state
    /// with an error quadratic in the solver residual.
    fn cost(&self, phi: &FemField<T>, states: &[FemField<T>]) -> T {
        let two = T::lit(2.0);
        states
            .iter()
            .zip(&self.load_vectors)
            .map(|(u, b)| two * u.values.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>() - self.energy(phi, u))
            .sum()
    }

    fn constraints(&self, phi: &FemField<T>, _states: &[FemField<T>]) -> Vec<T> {
        vec![volume_fraction(&self.space, phi, self.volume)]
    }

    fn derivative<'a>(&'a self, phi: &'a FemField<T>, states: &'a [FemField<T>], _adjoints: &'a [FemField<T>]) -> ShapeDerivative<'a, T> {
        let two = T::lit(2.0);
        let cost = DerivativePair::from_s1(move |c, q| {
            let a = self.material.at(phi, c, q);
            let mut s = crate::scalar::mat_zero();
            for u in states {
                let du = u.jacobian(c);
                let sigma = self.lame.stress(&du);
                let e = ddot(&sigma, &self.lame.strain(&du));
                let t = mat_add(&mat_scale(&mat_mul(&mat_transpose(&du), &sigma), two), &mat_identity(-e));
                s = mat_add(&s, &mat_scale(&t, a));
            }
            s
        });
        ShapeDerivative { cost, constraints: vec![volume_tensor(phi, self.volume)] }
    }

    fn bilinear_form(&self) -> BilinearSpec {
        self.bilinear.clone()
    }

    fn on_mesh(&self, mesh: Arc<RectMesh<T>>) -> Result<Box<dyn ModelProblem<T>>> {
        let lame = Lame { lambda: self.lame.lambda.to_f64_lossy(), mu: self.lame.mu.to_f64_lossy() };
        Ok(Box::new(Compliance::new(mesh, &self.clamped, &self.loads, self.volume.to_f64_lossy(), lame, self.bilinear.clone())?))
    }
}
