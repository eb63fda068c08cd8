use std::sync::Arc;

use crate::error::{config, Result};
use crate::fem::{add_stiffness, CsrMatrix, DirichletSet, FemField, FunctionSpace, MaterialIndicator};
use crate::mesh::RectMesh;
use crate::models::{check_positive, volume_fraction, volume_tensor, ModelProblem, ShapeDerivative, StateSystem};
use crate::scalar::{dot2, mat_add, mat_identity, mat_scale, outer, Real, Vec2};
use crate::velocity::{BilinearSpec, DerivativePair};

/// Heat source `x ↦ (f(x), ∇f(x))`.
pub type ScalarSource<T> = Arc<dyn Fn(Vec2<T>) -> (T, Vec2<T>) + Send + Sync>;

/// `ω(|x − c|)` with `ω(r) = 25(1 + cos(10πr))` for `r < 0.1` and `0` beyond.
pub fn radial_bump<T: Real>(center: [f64; 2]) -> ScalarSource<T> {
    Arc::new(move |x: Vec2<T>| {
        let d = [x[0] - T::lit(center[0]), x[1] - T::lit(center[1])];
        let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if r >= T::lit(0.1) {
            return (T::zero(), [T::zero(); 2]);
        }
        let k = T::lit(10.0 * std::f64::consts::PI);
        let value = T::lit(25.0) * (T::one() + (k * r).cos());
        if r == T::zero() {
            return (value, [T::zero(); 2]);
        }
        let slope = -T::lit(25.0) * k * (k * r).sin() / r;
        (value, [slope * d[0], slope * d[1]])
    })
}

/// One thermal compliance term: source, sink facets and weight.
#[derive(Clone)]
pub struct HeatCase<T> {
    pub source: ScalarSource<T>,
    pub sink_tags: Vec<u32>,
    pub weight: f64,
}

impl<T> std::fmt::Debug for HeatCase<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeatCase").field("sink_tags", &self.sink_tags).field("weight", &self.weight).finish_non_exhaustive()
    }
}

/// Weighted thermal compliances `Σ_k w_k ∫ A_Ω |∇u_k|²` with
/// `A_Ω = χ_Ω + 10⁻³ χ_{D∖Ω}` under `(1/V) ∫ χ_Ω = 1`.
#[derive(Debug, Clone)]
pub struct Heat<T> {
    space: FunctionSpace<T>,
    material: MaterialIndicator<T>,
    cases: Vec<HeatCase<T>>,
    rhs: Vec<Vec<T>>,
    bcs: Vec<DirichletSet<T>>,
    volume: T,
    bilinear: BilinearSpec,
}

pub const HEAT_ERSATZ: f64 = 1e-3;

impl<T: Real> Heat<T> {
    pub fn new(mesh: Arc<RectMesh<T>>, cases: Vec<HeatCase<T>>, volume: f64, bilinear: BilinearSpec) -> Result<Self> {
        check_positive("volume", volume)?;
        bilinear.validate()?;
        if cases.is_empty() {
            return Err(config("heat: at least one source/sink case is required"));
        }
        let space = FunctionSpace::scalar(mesh)?;
        let mut rhs = Vec::with_capacity(cases.len());
        let mut bcs = Vec::with_capacity(cases.len());
        for case in &cases {
            check_positive("heat case weight", case.weight)?;
            let dofs = space.boundary_dofs(&case.sink_tags);
            if dofs.is_empty() {
                return Err(config(format!("heat: no boundary facets carry the sink tags {:?}", case.sink_tags)));
            }
            bcs.push(DirichletSet::homogeneous(dofs));
            let src = case.source.clone();
            rhs.push(space.assemble_vector(|c, local| {
                for q in 0..3 {
                    let f = src(c.qpoint(q)).0 * c.weight();
                    let b = c.basis(q);
                    for k in 0..3 {
                        local[k] += f * b[k];
                    }
                }
            }));
        }
        Ok(Self { space, material: MaterialIndicator::new(T::one(), T::lit(HEAT_ERSATZ))?, cases, rhs, bcs, volume: T::lit(volume), bilinear })
    }

    fn matrix(&self, phi: &FemField<T>) -> CsrMatrix<T> {
        self.space.assemble_matrix(|c, local| add_stiffness(c, 1, |q| self.material.at(phi, c, q), local))
    }

    pub fn material(&self) -> &MaterialIndicator<T> {
        &self.material
    }
}

impl<T: Real> ModelProblem<T> for Heat<T> {
    fn name(&self) -> &'static str {
        if self.cases.len() > 1 {
            "heat_plus"
        } else {
            "heat"
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
        let k = self.matrix(phi);
        Ok(self.rhs.iter().zip(&self.bcs).map(|(b, bc)| StateSystem::linear(k.clone(), b.clone(), bc.clone(), 1)).collect())
    }

    fn adjoint_systems(&self, phi: &FemField<T>, _states: &[FemField<T>]) -> Result<Vec<StateSystem<'_, T>>> {
        let k = self.matrix(phi);
        Ok(self
            .rhs
            .iter()
            .zip(&self.bcs)
            .map(|(b, bc)| StateSystem::linear(k.clone(), b.iter().map(|&v| -v).collect(), bc.clone(), 1))
            .collect())
    }

    fn analytic_adjoints(&self, states: &[FemField<T>]) -> Option<Vec<FemField<T>>> {
        Some(states.iter().map(|u| u.scaled(-T::one())).collect())
    }

    /// `Σ w_k (2 ∫ f_k u_k − ∫ A_Ω|∇u_k|²)`, equal to `Σ w_k ∫ A_Ω|∇u_k|²`
    /// at the discrete state with an error quadratic in the solver residual.
    fn cost(&self, phi: &FemField<T>, states: &[FemField<T>]) -> T {
        let two = T::lit(2.0);
        states
            .iter()
            .zip(&self.rhs)
            .zip(&self.cases)
            .map(|((u, b), case)| {
                let work = u.values.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();
                let energy = self.space.integrate_qp(|c, q| {
                    let g = u.grad(c);
                    self.material.at(phi, c, q) * dot2(g, g)
                });
                T::lit(case.weight) * (two * work - energy)
            })
            .sum()
    }

    fn constraints(&self, phi: &FemField<T>, _states: &[FemField<T>]) -> Vec<T> {
        vec![volume_fraction(&self.space, phi, self.volume)]
    }

    fn derivative<'a>(&'a self, phi: &'a FemField<T>, states: &'a [FemField<T>], _adjoints: &'a [FemField<T>]) -> ShapeDerivative<'a, T> {
        let two = T::lit(2.0);
        let s0 = move |c: &crate::fem::Cell<T>, q: usize| {
            let x = c.qpoint(q);
            let mut s = [T::zero(); 2];
            for (u, case) in states.iter().zip(&self.cases) {
                let g = (case.source)(x).1;
                let k = T::lit(case.weight) * two * u.at(c, q);
                s = [s[0] + k * g[0], s[1] + k * g[1]];
            }
            s
        };
        let s1 = move |c: &crate::fem::Cell<T>, q: usize| {
            let a = self.material.at(phi, c, q);
            let x = c.qpoint(q);
            let mut s = crate::scalar::mat_zero();
            for (u, case) in states.iter().zip(&self.cases) {
                let f = (case.source)(x).0;
                let g = u.grad(c);
                let iso = two * u.at(c, q) * f - a * dot2(g, g);
                let t = mat_add(&mat_identity(iso), &mat_scale(&outer(g, g), two * a));
                s = mat_add(&s, &mat_scale(&t, T::lit(case.weight)));
            }
            s
        };
        ShapeDerivative { cost: DerivativePair::new(Some(s0), Some(s1)), constraints: vec![volume_tensor(phi, self.volume)] }
    }

    fn bilinear_form(&self) -> BilinearSpec {
        self.bilinear.clone()
    }

    fn on_mesh(&self, mesh: Arc<RectMesh<T>>) -> Result<Box<dyn ModelProblem<T>>> {
        Ok(Box::new(Heat::new(mesh, self.cases.clone(), self.volume.to_f64_lossy(), self.bilinear.clone())?))
    }
}
