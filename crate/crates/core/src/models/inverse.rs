use std::sync::Arc;

use crate::error::{config, contract, Result};
use crate::fem::{add_stiffness, solve_linear, vector_basis_grad, Cell, DirichletSet, Facet, FemField, FunctionSpace, Lame, MaterialIndicator, SparseSystem};
use crate::mesh::RectMesh;
use crate::models::compliance::{elasticity_matrix, traction_vector};
use crate::models::{check_positive, ModelProblem, ShapeDerivative, StateSystem};
use crate::scalar::{ddot, dot2, mat_add, mat_identity, mat_mul, mat_scale, mat_transpose, mat_zero, Mat2, Real, Vec2};
use crate::velocity::{BilinearSpec, DerivativePair};

/// Value, Jacobian and strain gradients `∇ε(g)_{ij}` of a vector field at a
/// point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorSample<T> {
    pub value: Vec2<T>,
    pub jacobian: Mat2<T>,
    pub strain_grad: [[Vec2<T>; 2]; 2],
}

pub type AnalyticVector<T> = Arc<dyn Fn(Vec2<T>) -> VectorSample<T> + Send + Sync>;

/// Boundary displacement data `g` extended into the domain.
#[derive(Clone)]
pub enum VectorData<T> {
    Analytic(AnalyticVector<T>),
    /// P1 field with the `L²` projections of `ε_xx`, `ε_xy`, `ε_yy`, whose
    /// elementwise gradients stand in for `∇ε(g)`.
    Nodal { field: FemField<T>, strain: Arc<[FemField<T>; 3]> },
}

impl<T> std::fmt::Debug for VectorData<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VectorData::Analytic(_) => f.write_str("VectorData::Analytic"),
            VectorData::Nodal { .. } => f.write_str("VectorData::Nodal"),
        }
    }
}

impl<T: Real> VectorData<T> {
    /// `scalar` is the scalar P1 space of the mesh `field` lives on.
    pub fn nodal(scalar: &FunctionSpace<T>, field: FemField<T>) -> Result<Self> {
        if field.rank != 2 || field.len() != 2 * scalar.dof_count() {
            return Err(contract("nodal displacement data must be a vector field on the model mesh"));
        }
        let strain = |i: usize, j: usize| {
            let f = &field;
            scalar.project(move |c, _| {
                let e = Lame { lambda: T::zero(), mu: T::zero() }.strain(&f.jacobian(c));
                vec![e[i][j]]
            })
        };
        let strain = [strain(0, 0)?, strain(0, 1)?, strain(1, 1)?];
        Ok(VectorData::Nodal { field, strain: Arc::new(strain) })
    }

    pub fn sample(&self, c: &Cell<T>, q: usize) -> VectorSample<T> {
        match self {
            VectorData::Analytic(f) => f(c.qpoint(q)),
            VectorData::Nodal { field, strain } => {
                let (gxx, gxy, gyy) = (strain[0].grad(c), strain[1].grad(c), strain[2].grad(c));
                VectorSample { value: field.vec_at(c, q), jacobian: field.jacobian(c), strain_grad: [[gxx, gxy], [gxy, gyy]] }
            }
        }
    }

    pub fn facet_value(&self, f: &Facet<T>, q: usize) -> Vec2<T> {
        match self {
            VectorData::Analytic(g) => g(f.qpoint(q)).value,
            VectorData::Nodal { field, .. } => {
                let b = f.basis(q);
                let (a, c) = (field.vertex_vec(f.vertices[0]), field.vertex_vec(f.vertices[1]));
                [b[0] * a[0] + b[1] * c[0], b[0] * a[1] + b[1] * c[1]]
            }
        }
    }

    fn on_space(&self, scalar: &FunctionSpace<T>) -> Result<Self> {
        match self {
            VectorData::Analytic(_) => Ok(self.clone()),
            VectorData::Nodal { field, .. } => VectorData::nodal(scalar, field.clone()),
        }
    }
}

/// One experiment: traction `f` on the facets carrying `tag` and the
/// measured displacement `g`.
#[derive(Debug, Clone)]
pub struct MeasurementPair<T> {
    pub traction: [f64; 2],
    pub tag: u32,
    pub g: VectorData<T>,
}

/// Kohn–Vogelius-type misfit
/// `Σ_k α/2 ∫|u_k − v_k − g_k|² + β/2 ∫_{Γ₁}|u_k − g_k|²` between the
/// Neumann state `u_k` (clamped on `Γ₀`) and the lifted Dirichlet state
/// `v_k + g_k`, with `A_Ω = κ χ_Ω + χ_{D∖Ω}`. No geometric constraint.
#[derive(Debug, Clone)]
pub struct InverseElasticity<T> {
    space: FunctionSpace<T>,
    vspace: FunctionSpace<T>,
    lame: Lame<T>,
    material: MaterialIndicator<T>,
    clamped: Vec<u32>,
    measured: Vec<u32>,
    pairs: Vec<MeasurementPair<T>>,
    loads: Vec<Vec<T>>,
    bc_clamped: DirichletSet<T>,
    bc_all: DirichletSet<T>,
    alpha: T,
    beta: T,
    bilinear: BilinearSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub lame: Lame<f64>,
}

impl<T: Real> InverseElasticity<T> {
    pub fn new(
        mesh: Arc<RectMesh<T>>,
        clamped: &[u32],
        measured: &[u32],
        pairs: Vec<MeasurementPair<T>>,
        params: InverseParams,
        bilinear: BilinearSpec,
    ) -> Result<Self> {
        check_positive("kappa", params.kappa)?;
        check_positive("lame.lambda", params.lame.lambda)?;
        check_positive("lame.mu", params.lame.mu)?;
        if !(params.alpha >= 0.0 && params.beta >= 0.0 && params.alpha + params.beta > 0.0) {
            return Err(config(format!("inverse: weights alpha = {}, beta = {} must be ≥ 0 and not both zero", params.alpha, params.beta)));
        }
        bilinear.validate()?;
        if pairs.is_empty() {
            return Err(config("inverse: at least one measurement pair is required"));
        }
        if mesh.boundary_vertices(clamped).is_empty() {
            return Err(config(format!("inverse: no boundary facets carry the clamped tags {clamped:?}")));
        }
        if mesh.boundary_vertices(measured).is_empty() {
            return Err(config(format!("inverse: no boundary facets carry the measurement tags {measured:?}")));
        }
        let space = FunctionSpace::scalar(mesh)?;
        let vspace = space.sibling(2)?;
        let mut loads = Vec::with_capacity(pairs.len());
        for p in &pairs {
            if space.mesh().facets_with_tag(p.tag).next().is_none() {
                return Err(config(format!("inverse: no boundary facets carry force tag {}", p.tag)));
            }
            if let VectorData::Nodal { field, .. } = &p.g {
                vspace.check(field)?;
            }
            loads.push(traction_vector(&vspace, p.tag, p.traction));
        }
        let bc_clamped = DirichletSet::homogeneous(vspace.boundary_dofs(clamped));
        let bc_all = DirichletSet::homogeneous(vspace.all_boundary_dofs());
        Ok(Self {
            space,
            vspace,
            lame: Lame { lambda: T::lit(params.lame.lambda), mu: T::lit(params.lame.mu) },
            material: MaterialIndicator::new(T::lit(params.kappa), T::one())?,
            clamped: clamped.to_vec(),
            measured: measured.to_vec(),
            pairs,
            loads,
            bc_clamped,
            bc_all,
            alpha: T::lit(params.alpha),
            beta: T::lit(params.beta),
            bilinear,
        })
    }

    pub fn pairs(&self) -> &[MeasurementPair<T>] {
        &self.pairs
    }

    pub fn vector_space(&self) -> &FunctionSpace<T> {
        &self.vspace
    }

    fn params(&self) -> InverseParams {
        InverseParams {
            alpha: self.alpha.to_f64_lossy(),
            beta: self.beta.to_f64_lossy(),
            kappa: self.material.inside.to_f64_lossy(),
            lame: Lame { lambda: self.lame.lambda.to_f64_lossy(), mu: self.lame.mu.to_f64_lossy() },
        }
    }

    /// `−∫ A_Ω σ(g):ε(w)` for every basis function `w`.
    fn lift_rhs(&self, phi: &FemField<T>, g: &VectorData<T>) -> Vec<T> {
        self.vspace.assemble_vector(|c, local| {
            for q in 0..3 {
                let sigma = self.lame.stress(&g.sample(c, q).jacobian);
                let w = c.weight() * self.material.at(phi, c, q);
                for (a, l) in local.iter_mut().enumerate() {
                    *l -= w * ddot(&sigma, &self.lame.strain(&vector_basis_grad(c, a / 2, a % 2)));
                }
            }
        })
    }

    /// `∫ d·w` with `d = u − v − g` at every node.
    fn misfit_load(&self, u: &FemField<T>, v: &FemField<T>, g: &VectorData<T>) -> Vec<T> {
        self.vspace.assemble_vector(|c, local| {
            for q in 0..3 {
                let d = misfit(u, v, g, c, q);
                let b = c.basis(q);
                let w = c.weight();
                for k in 0..3 {
                    local[2 * k] += w * b[k] * d[0];
                    local[2 * k + 1] += w * b[k] * d[1];
                }
            }
        })
    }

    /// `∫_{Γ₁} (u − g)·w`.
    fn trace_load(&self, u: &FemField<T>, g: &VectorData<T>) -> Vec<T> {
        self.vspace.assemble_boundary_vector(Some(&self.measured), |f, local| {
            for q in 0..2 {
                let d = facet_diff(u, g, f, q);
                let b = f.basis(q);
                let w = f.weight();
                for k in 0..2 {
                    local[2 * k] += w * b[k] * d[0];
                    local[2 * k + 1] += w * b[k] * d[1];
                }
            }
        })
    }
}

fn misfit<T: Real>(u: &FemField<T>, v: &FemField<T>, g: &VectorData<T>, c: &Cell<T>, q: usize) -> Vec2<T> {
    let (uq, vq, gq) = (u.vec_at(c, q), v.vec_at(c, q), g.sample(c, q).value);
    [uq[0] - vq[0] - gq[0], uq[1] - vq[1] - gq[1]]
}

fn facet_diff<T: Real>(u: &FemField<T>, g: &VectorData<T>, f: &Facet<T>, q: usize) -> Vec2<T> {
    let b = f.basis(q);
    let (a, c) = (u.vertex_vec(f.vertices[0]), u.vertex_vec(f.vertices[1]));
    let gq = g.facet_value(f, q);
    [b[0] * a[0] + b[1] * c[0] - gq[0], b[0] * a[1] + b[1] * c[1] - gq[1]]
}

impl<T: Real> ModelProblem<T> for InverseElasticity<T> {
    fn name(&self) -> &'static str {
        "inverse_elasticity"
    }

    fn space(&self) -> &FunctionSpace<T> {
        &self.space
    }

    fn constraint_count(&self) -> usize {
        0
    }

    /// `[u₁, v₁, u₂, v₂, …]`.
    fn state_systems(&self, phi: &FemField<T>) -> Result<Vec<StateSystem<'_, T>>> {
        self.space.check(phi)?;
        let k = elasticity_matrix(&self.vspace, &self.lame, &self.material, phi);
        let mut out = Vec::with_capacity(2 * self.pairs.len());
        for (pair, load) in self.pairs.iter().zip(&self.loads) {
            out.push(StateSystem::linear(k.clone(), load.clone(), self.bc_clamped.clone(), 2));
            out.push(StateSystem::linear(k.clone(), self.lift_rhs(phi, &pair.g), self.bc_all.clone(), 2));
        }
        Ok(out)
    }

    /// `[p₁, q₁, p₂, q₂, …]`.
    fn adjoint_systems(&self, phi: &FemField<T>, states: &[FemField<T>]) -> Result<Vec<StateSystem<'_, T>>> {
        if states.len() != 2 * self.pairs.len() {
            return Err(contract("inverse: expected two states per measurement pair"));
        }
        let k = elasticity_matrix(&self.vspace, &self.lame, &self.material, phi);
        let mut out = Vec::with_capacity(states.len());
        for (pair, uv) in self.pairs.iter().zip(states.chunks(2)) {
            let m = self.misfit_load(&uv[0], &uv[1], &pair.g);
            let t = self.trace_load(&uv[0], &pair.g);
            let rhs_p = m.iter().zip(&t).map(|(&a, &b)| -self.alpha * a - self.beta * b).collect();
            let rhs_q = m.iter().map(|&a| self.alpha * a).collect();
            out.push(StateSystem::linear(k.clone(), rhs_p, self.bc_clamped.clone(), 2));
            out.push(StateSystem::linear(k.clone(), rhs_q, self.bc_all.clone(), 2));
        }
        Ok(out)
    }

    fn cost(&self, _phi: &FemField<T>, states: &[FemField<T>]) -> T {
        let half = T::lit(0.5);
        let mut j = T::zero();
        for (pair, uv) in self.pairs.iter().zip(states.chunks(2)) {
            let (u, v) = (&uv[0], &uv[1]);
            let bulk = self.space.integrate_qp(|c, q| {
                let d = misfit(u, v, &pair.g, c, q);
                dot2(d, d)
            });
            let trace = self.space.integrate_boundary(Some(&self.measured), |f, q| {
                let d = facet_diff(u, &pair.g, f, q);
                dot2(d, d)
            });
            j += half * (self.alpha * bulk + self.beta * trace);
        }
        j
    }

    fn constraints(&self, _phi: &FemField<T>, _states: &[FemField<T>]) -> Vec<T> {
        Vec::new()
    }

    fn derivative<'a>(&'a self, phi: &'a FemField<T>, states: &'a [FemField<T>], adjoints: &'a [FemField<T>]) -> ShapeDerivative<'a, T> {
        let lame = self.lame;
        let alpha = self.alpha;
        let s0 = move |c: &Cell<T>, q: usize| {
            let a = self.material.at(phi, c, q);
            let mut s = [T::zero(); 2];
            for (k, pair) in self.pairs.iter().enumerate() {
                let (u, v, qa) = (&states[2 * k], &states[2 * k + 1], &adjoints[2 * k + 1]);
                let g = pair.g.sample(c, q);
                let d = misfit(u, v, &pair.g, c, q);
                let sq = lame.stress(&qa.jacobian(c));
                let dg_t = mat_transpose(&g.jacobian);
                for i in 0..2 {
                    let mut v = -alpha * (dg_t[i][0] * d[0] + dg_t[i][1] * d[1]);
                    for r in 0..2 {
                        for cc in 0..2 {
                            v += a * sq[r][cc] * g.strain_grad[r][cc][i];
                        }
                    }
                    s[i] += v;
                }
            }
            s
        };
        let s1 = move |c: &Cell<T>, q: usize| {
            let a = self.material.at(phi, c, q);
            let mut s = mat_zero();
            for (k, pair) in self.pairs.iter().enumerate() {
                let (u, v) = (&states[2 * k], &states[2 * k + 1]);
                let (p, qa) = (&adjoints[2 * k], &adjoints[2 * k + 1]);
                let g = pair.g.sample(c, q);
                let d = misfit(u, v, &pair.g, c, q);
                let (du, dv, dp, dq) = (u.jacobian(c), v.jacobian(c), p.jacobian(c), qa.jacobian(c));
                let dvg = mat_add(&dv, &g.jacobian);
                let (su, sp, sq, svg) = (lame.stress(&du), lame.stress(&dp), lame.stress(&dq), lame.stress(&dvg));
                let iso = T::lit(0.5) * alpha * dot2(d, d) + a * (ddot(&su, &lame.strain(&dp)) + ddot(&svg, &lame.strain(&dq)));
                let first = mat_add(&mat_mul(&mat_transpose(&du), &sp), &mat_mul(&mat_transpose(&dp), &su));
                let second = mat_add(&mat_mul(&mat_transpose(&dv), &sq), &mat_mul(&mat_transpose(&dq), &svg));
                let t = mat_add(&mat_identity(iso), &mat_scale(&mat_add(&first, &second), -a));
                s = mat_add(&s, &t);
            }
            s
        };
        ShapeDerivative { cost: DerivativePair::new(Some(s0), Some(s1)), constraints: Vec::new() }
    }

    fn bilinear_form(&self) -> BilinearSpec {
        self.bilinear.clone()
    }

    fn on_mesh(&self, mesh: Arc<RectMesh<T>>) -> Result<Box<dyn ModelProblem<T>>> {
        let scalar = FunctionSpace::scalar(mesh.clone())?;
        let pairs = self
            .pairs
            .iter()
            .map(|p| Ok(MeasurementPair { traction: p.traction, tag: p.tag, g: p.g.on_space(&scalar)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Box::new(InverseElasticity::new(mesh, &self.clamped, &self.measured, pairs, self.params(), self.bilinear.clone())?))
    }
}

/// Componentwise harmonic extension: `∫ Dη:Dζ = 0` for `ζ` vanishing on the
/// facets carrying `tags`, with `η` equal to each trace there.
pub fn dirichlet_extension<T: Real>(vspace: &FunctionSpace<T>, tags: &[u32], traces: &[FemField<T>]) -> Result<Vec<FemField<T>>> {
    let dofs = vspace.boundary_dofs(tags);
    if dofs.is_empty() {
        return Err(config(format!("Dirichlet extension: no boundary facets carry the tags {tags:?}")));
    }
    let k = vspace.assemble_matrix(|c, local| add_stiffness(c, vspace.rank(), |_| T::one(), local));
    traces
        .iter()
        .map(|trace| {
            vspace.check(trace)?;
            let bc = DirichletSet::new(dofs.iter().map(|&d| (d, trace.values[d])).collect())?;
            let system = SparseSystem::new(k.clone(), vec![T::zero(); vspace.dof_count()])?.apply_dirichlet(&bc)?;
            vspace.field(solve_linear(&system)?)
        })
        .collect()
}

/// Synthetic data: solves the Neumann problem on `fine` with the inclusion
/// `{φ_true < 0}`, injects the boundary trace onto the nested `coarse` mesh
/// and extends it harmonically. Both meshes carry the same boundary tags.
#[allow(clippy::too_many_arguments)]
pub fn generate_measurements<T: Real>(
    fine: Arc<RectMesh<T>>,
    coarse: Arc<RectMesh<T>>,
    phi_true: impl Fn(Vec2<T>) -> T,
    forces: &[([f64; 2], u32)],
    clamped: &[u32],
    kappa: f64,
    lame: Lame<f64>,
) -> Result<Vec<MeasurementPair<T>>> {
    check_positive("kappa", kappa)?;
    let (nf, nc) = ((fine.nx(), fine.ny()), (coarse.nx(), coarse.ny()));
    let ratio = nf.0 / nc.0;
    let same_bounds = fine.bounds().iter().zip(coarse.bounds().iter()).all(|(a, b)| (*a - *b).abs() <= T::lit(crate::mesh::COORD_TOL));
    if ratio == 0 || nf.0 != ratio * nc.0 || nf.1 != ratio * nc.1 || !same_bounds {
        return Err(config(format!("measurement meshes are not nested: fine {}×{}, coarse {}×{}", nf.0, nf.1, nc.0, nc.1)));
    }
    let fine_s = FunctionSpace::scalar(fine.clone())?;
    let fine_v = fine_s.sibling(2)?;
    let coarse_s = FunctionSpace::scalar(coarse.clone())?;
    let coarse_v = coarse_s.sibling(2)?;
    let phi = fine_s.interpolate_scalar(&phi_true);
    let lame_t = Lame { lambda: T::lit(lame.lambda), mu: T::lit(lame.mu) };
    let material = MaterialIndicator::new(T::lit(kappa), T::one())?;
    let k = elasticity_matrix(&fine_v, &lame_t, &material, &phi);
    let bc = DirichletSet::homogeneous(fine_v.boundary_dofs(clamped));
    if bc.is_empty() {
        return Err(config(format!("measurements: no fine boundary facets carry the clamped tags {clamped:?}")));
    }
    let mut traces = Vec::with_capacity(forces.len());
    for &(traction, tag) in forces {
        if fine.facets_with_tag(tag).next().is_none() {
            return Err(config(format!("measurements: no fine boundary facets carry force tag {tag}")));
        }
        let load = traction_vector(&fine_v, tag, traction);
        let u = solve_linear(&SparseSystem::new(k.clone(), load)?.apply_dirichlet(&bc)?)?;
        let mut trace = vec![T::zero(); coarse_v.dof_count()];
        for v in coarse.all_boundary_vertices() {
            let (i, j) = coarse.grid_index(v);
            let w = fine.vertex_at(ratio * i, ratio * j);
            trace[2 * v] = u[2 * w];
            trace[2 * v + 1] = u[2 * w + 1];
        }
        traces.push(coarse_v.field(trace)?);
    }
    let all_tags: Vec<u32> = {
        let mut t: Vec<u32> = coarse.boundary_facets().iter().map(|f| f.tag).collect();
        t.sort_unstable();
        t.dedup();
        t
    };
    let extended = dirichlet_extension(&coarse_v, &all_tags, &traces)?;
    forces
        .iter()
        .zip(extended)
        .map(|(&(traction, tag), g)| Ok(MeasurementPair { traction, tag, g: VectorData::nodal(&coarse_s, g)? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryTag, BoxRegion, Region};
    use crate::models::evaluate;

    fn tagged(nx: usize, ny: usize) -> Arc<RectMesh<f64>> {
        Arc::new(RectMesh::build([0.0, 0.0, 2.0, 1.0], nx, ny).unwrap().tag_boundary(&[
            BoundaryTag::from_region(1, Region::single(BoxRegion { x: None, y: Some([0.0, 0.0]) })),
            BoundaryTag::from_region(2, Region::single(BoxRegion::new([2.0, 2.0], [0.25, 0.75]))),
        ]))
    }

    fn params(kappa: f64) -> InverseParams {
        InverseParams { alpha: 1.0, beta: 1.0, kappa, lame: Lame { lambda: 1.25, mu: 1.0 } }
    }

    #[test]
    fn extension_of_constant_and_linear() {
        let mesh = tagged(8, 4);
        let v = FunctionSpace::<f64>::vector(mesh).unwrap();
        let c = v.interpolate_vector(|_| [0.3, -0.7]);
        let lin = v.interpolate_vector(|p| [p[0], p[1]]);
        let out = dirichlet_extension(&v, &[0, 1, 2], &[c.clone(), lin.clone()]).unwrap();
        assert!(out[0].max_diff(&c) < 1e-12);
        assert!(out[1].max_diff(&lin) < 1e-12);
        assert!(dirichlet_extension(&v, &[7], &[c]).is_err());
    }

    #[test]
    fn extension_maximum_principle() {
        let mesh = tagged(8, 4);
        let v = FunctionSpace::<f64>::vector(mesh.clone()).unwrap();
        let mut trace = v.zeros();
        for k in mesh.boundary_vertices(&[1]) {
            let p = mesh.vertices()[k];
            trace.values[2 * k] = (3.0 * p[0]).sin();
        }
        let out = dirichlet_extension(&v, &[1], &[trace.clone()]).unwrap();
        assert!(out[0].max_abs() <= trace.max_abs() + 1e-10);
    }

    #[test]
    fn no_contrast_is_invisible() {
        let coarse = tagged(8, 4);
        let fine = tagged(8, 4);
        let pairs = generate_measurements(fine, coarse.clone(), |p| p[0] - 10.0, &[([-1.0, 0.0], 2)], &[1], 1.0, params(1.0).lame).unwrap();
        let m = InverseElasticity::new(coarse, &[1], &[0, 2], pairs, params(1.0), BilinearSpec::default()).unwrap();
        let phi = m.space().interpolate_scalar(|p| ((p[0] - 1.0).powi(2) + (p[1] - 0.5).powi(2)).sqrt() - 0.2);
        let ev = evaluate(&m, &phi, false, false).unwrap();
        assert!(ev.cost < 1e-18, "{}", ev.cost);
        assert!(ev.adjoints.iter().all(|a| a.max_abs() < 1e-9));
    }

    #[test]
    fn zero_force_zero_measurement() {
        let coarse = tagged(4, 2);
        let fine = tagged(8, 4);
        let pairs = generate_measurements(fine, coarse, |p| p[0] - 1.0, &[([0.0, 0.0], 2)], &[1], 10.0, params(10.0).lame).unwrap();
        match &pairs[0].g {
            VectorData::Nodal { field, .. } => assert_eq!(field.max_abs(), 0.0),
            VectorData::Analytic(_) => unreachable!(),
        }
    }

    #[test]
    fn non_nested_rejected() {
        let coarse = tagged(4, 2);
        let fine = tagged(6, 3);
        assert!(generate_measurements(fine, coarse, |p| p[0], &[([0.0, 1.0], 2)], &[1], 10.0, params(10.0).lame).is_err());
    }

    #[test]
    fn three_forces_three_pairs() {
        let coarse = tagged(8, 4);
        let fine = tagged(16, 8);
        let forces = [([-1.0, 0.0], 2), ([0.0, -1.0], 0), ([0.5, 0.5], 2)];
        let pairs = generate_measurements(fine, coarse, |p| ((p[0] - 1.0).powi(2) + (p[1] - 0.5).powi(2)).sqrt() - 0.2, &forces, &[1], 10.0, params(10.0).lame).unwrap();
        assert_eq!(pairs.len(), 3);
    }
}
