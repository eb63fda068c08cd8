//! P1 Lagrange spaces, quadrature and element-by-element assembly.

pub mod solver;
pub mod sparse;

use std::sync::Arc;

use crate::error::{contract, Result};
use crate::mesh::{BoundaryFacet, RectMesh, Side};
use crate::scalar::{mat_zero, Mat2, Real, Vec2};

pub use solver::{bicgstab, cg, solve_linear, solve_linear_from, solve_newton, NewtonOptions, NewtonResult, SolveStats, SolverTolerance};
pub use sparse::{eliminate_homogeneous, CsrMatrix, CsrPattern, DirichletSet, SparseSystem};

/// Barycentric coordinates of the edge-midpoint quadrature nodes.
pub const QUAD_BARY: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];

/// Parameters of the two-point Gauss rule on `[0, 1]`.
fn gauss2<T: Real>() -> [T; 2] {
    let d = T::lit(0.5) / T::lit(3.0).sqrt();
    [T::lit(0.5) - d, T::lit(0.5) + d]
}

/// Geometry of one triangle as seen by an element kernel.
#[derive(Debug, Clone, Copy)]
pub struct Cell<T> {
    pub index: usize,
    pub vertices: [usize; 3],
    pub coords: [Vec2<T>; 3],
    pub area: T,
    /// Gradients of the three barycentric basis functions.
    pub grads: [Vec2<T>; 3],
}

impl<T: Real> Cell<T> {
    pub fn new(index: usize, vertices: [usize; 3], coords: [Vec2<T>; 3]) -> Self {
        let [p0, p1, p2] = coords;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let inv = T::one() / det;
        let grads = [
            [(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv],
            [(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv],
            [(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv],
        ];
        Self { index, vertices, coords, area: det * T::lit(0.5), grads }
    }

    /// Quadrature weight (equal for the three nodes).
    #[inline]
    pub fn weight(&self) -> T {
        self.area / T::lit(3.0)
    }

    /// Basis values at quadrature node `q`.
    #[inline]
    pub fn basis(&self, q: usize) -> [T; 3] {
        QUAD_BARY[q].map(T::lit)
    }

    #[inline]
    pub fn qpoint(&self, q: usize) -> Vec2<T> {
        let b = self.basis(q);
        let c = &self.coords;
        [
            b[0] * c[0][0] + b[1] * c[1][0] + b[2] * c[2][0],
            b[0] * c[0][1] + b[1] * c[1][1] + b[2] * c[2][1],
        ]
    }

    #[inline]
    pub fn interp(&self, nodal: [T; 3], q: usize) -> T {
        let b = self.basis(q);
        b[0] * nodal[0] + b[1] * nodal[1] + b[2] * nodal[2]
    }

    #[inline]
    pub fn interp_vec(&self, nodal: [Vec2<T>; 3], q: usize) -> Vec2<T> {
        [self.interp(nodal.map(|v| v[0]), q), self.interp(nodal.map(|v| v[1]), q)]
    }

    #[inline]
    pub fn grad(&self, nodal: [T; 3]) -> Vec2<T> {
        let g = &self.grads;
        [
            nodal[0] * g[0][0] + nodal[1] * g[1][0] + nodal[2] * g[2][0],
            nodal[0] * g[0][1] + nodal[1] * g[1][1] + nodal[2] * g[2][1],
        ]
    }

    /// `Dw` with `(Dw)_ij = ∂w_i/∂x_j`.
    #[inline]
    pub fn jacobian(&self, nodal: [Vec2<T>; 3]) -> Mat2<T> {
        [self.grad(nodal.map(|v| v[0])), self.grad(nodal.map(|v| v[1]))]
    }

    /// Sum of `f(q)` times the quadrature weight.
    #[inline]
    pub fn quad(&self, f: impl Fn(usize) -> T) -> T {
        (f(0) + f(1) + f(2)) * self.weight()
    }
}

/// One boundary facet as seen by a boundary kernel.
#[derive(Debug, Clone, Copy)]
pub struct Facet<T> {
    pub vertices: [usize; 2],
    pub coords: [Vec2<T>; 2],
    pub length: T,
    pub side: Side,
    pub normal: Vec2<T>,
    pub tag: u32,
}

impl<T: Real> Facet<T> {
    fn new(f: &BoundaryFacet, mesh: &RectMesh<T>) -> Self {
        let a = mesh.vertices()[f.vertices[0]];
        let b = mesh.vertices()[f.vertices[1]];
        let length = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        Self { vertices: f.vertices, coords: [a, b], length, side: f.side, normal: f.side.normal(), tag: f.tag }
    }

    /// Basis values of the two facet vertices at Gauss node `q`.
    #[inline]
    pub fn basis(&self, q: usize) -> [T; 2] {
        let s = gauss2::<T>()[q];
        [T::one() - s, s]
    }

    #[inline]
    pub fn qpoint(&self, q: usize) -> Vec2<T> {
        let [ba, bb] = self.basis(q);
        let [a, b] = self.coords;
        [ba * a[0] + bb * b[0], ba * a[1] + bb * b[1]]
    }

    #[inline]
    pub fn weight(&self) -> T {
        self.length * T::lit(0.5)
    }

    #[inline]
    pub fn interp(&self, nodal: [T; 2], q: usize) -> T {
        let b = self.basis(q);
        b[0] * nodal[0] + b[1] * nodal[1]
    }

    #[inline]
    pub fn quad(&self, f: impl Fn(usize) -> T) -> T {
        (f(0) + f(1)) * self.weight()
    }
}

/// Continuous P1 space of scalar (`rank = 1`) or 2-vector (`rank = 2`)
/// fields. Vector dofs are node-major: `(u_x0, u_y0, u_x1, …)`.
#[derive(Debug, Clone)]
pub struct FunctionSpace<T> {
    mesh: Arc<RectMesh<T>>,
    rank: usize,
    pattern: Arc<CsrPattern>,
    /// Per cell, the value-array position of every local `(row, col)` pair.
    scatter: Arc<Vec<usize>>,
}

impl<T: Real> FunctionSpace<T> {
    pub fn new(mesh: Arc<RectMesh<T>>, rank: usize) -> Result<Self> {
        if rank != 1 && rank != 2 {
            return Err(contract(format!("value rank must be 1 or 2, got {rank}")));
        }
        let nv = mesh.vertex_count();
        let mut vertex_rows: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for tri in mesh.triangles() {
            for &a in tri {
                vertex_rows[a].extend_from_slice(tri);
            }
        }
        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(nv * rank);
        for nbrs in &vertex_rows {
            let cols: Vec<usize> = nbrs.iter().flat_map(|&b| (0..rank).map(move |c| rank * b + c)).collect();
            for _ in 0..rank {
                rows.push(cols.clone());
            }
        }
        let pattern = Arc::new(CsrPattern::from_rows(rows));
        let ld = 3 * rank;
        let mut scatter = Vec::with_capacity(mesh.triangle_count() * ld * ld);
        for tri in mesh.triangles() {
            let dofs = local_dofs(tri, rank);
            for &r in &dofs[..ld] {
                for &c in &dofs[..ld] {
                    scatter.push(pattern.find(r, c).expect("local pair present in pattern"));
                }
            }
        }
        Ok(Self { mesh, rank, pattern, scatter: Arc::new(scatter) })
    }

    pub fn scalar(mesh: Arc<RectMesh<T>>) -> Result<Self> {
        Self::new(mesh, 1)
    }

    pub fn vector(mesh: Arc<RectMesh<T>>) -> Result<Self> {
        Self::new(mesh, 2)
    }

    /// The same space over a mesh with identical connectivity (moved vertices).
    pub fn with_mesh(&self, mesh: Arc<RectMesh<T>>) -> Result<Self> {
        if mesh.triangles() != self.mesh.triangles() {
            return Err(contract("replacement mesh has different connectivity"));
        }
        Ok(Self { mesh, ..self.clone() })
    }

    /// Space with the other value rank over the same mesh.
    pub fn sibling(&self, rank: usize) -> Result<Self> {
        if rank == self.rank {
            Ok(self.clone())
        } else {
            Self::new(self.mesh.clone(), rank)
        }
    }

    pub fn mesh(&self) -> &RectMesh<T> {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<RectMesh<T>> {
        &self.mesh
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dof_count(&self) -> usize {
        self.rank * self.mesh.vertex_count()
    }

    pub fn dof(&self, vertex: usize, component: usize) -> usize {
        self.rank * vertex + component
    }

    /// Inverse of [`dof`](Self::dof).
    pub fn dof_location(&self, dof: usize) -> (usize, usize) {
        (dof / self.rank, dof % self.rank)
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    pub fn same_mesh(&self, other: &FunctionSpace<T>) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || self.mesh.vertices() == other.mesh.vertices()
    }

    pub fn cell(&self, t: usize) -> Cell<T> {
        let tri = self.mesh.triangles()[t];
        let v = self.mesh.vertices();
        Cell::new(t, tri, [v[tri[0]], v[tri[1]], v[tri[2]]])
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell<T>> + '_ {
        (0..self.mesh.triangle_count()).map(move |t| self.cell(t))
    }

    pub fn facets<'a>(&'a self, tags: Option<&'a [u32]>) -> impl Iterator<Item = Facet<T>> + 'a {
        self.mesh
            .boundary_facets()
            .iter()
            .filter(move |f| tags.is_none_or(|ts| ts.contains(&f.tag)))
            .map(move |f| Facet::new(f, &self.mesh))
    }

    /// Scatter-adds `kernel(cell, local)` over all cells; `local` is the
    /// row-major `(3·rank)²` element matrix, zeroed before each call.
    pub fn assemble_matrix(&self, mut kernel: impl FnMut(&Cell<T>, &mut [T])) -> CsrMatrix<T> {
        let mut m = CsrMatrix::zeros(self.pattern.clone());
        let ld = 3 * self.rank;
        let mut local = vec![T::zero(); ld * ld];
        for cell in self.cells() {
            local.iter_mut().for_each(|v| *v = T::zero());
            kernel(&cell, &mut local);
            let pos = &self.scatter[cell.index * ld * ld..(cell.index + 1) * ld * ld];
            for (k, &p) in pos.iter().enumerate() {
                m.vals[p] += local[k];
            }
        }
        m
    }

    /// Scatter-adds `kernel(cell, local)` into a global vector.
    pub fn assemble_vector(&self, mut kernel: impl FnMut(&Cell<T>, &mut [T])) -> Vec<T> {
        let mut out = vec![T::zero(); self.dof_count()];
        let ld = 3 * self.rank;
        let mut local = vec![T::zero(); ld];
        for cell in self.cells() {
            local.iter_mut().for_each(|v| *v = T::zero());
            kernel(&cell, &mut local);
            for (k, &d) in local_dofs(&cell.vertices, self.rank)[..ld].iter().enumerate() {
                out[d] += local[k];
            }
        }
        out
    }

    /// Boundary analogue of [`assemble_vector`](Self::assemble_vector) with
    /// `2·rank` local entries; `tags = None` means the whole boundary.
    pub fn assemble_boundary_vector(&self, tags: Option<&[u32]>, mut kernel: impl FnMut(&Facet<T>, &mut [T])) -> Vec<T> {
        let mut out = vec![T::zero(); self.dof_count()];
        let r = self.rank;
        let mut local = vec![T::zero(); 2 * r];
        for f in self.facets(tags) {
            local.iter_mut().for_each(|v| *v = T::zero());
            kernel(&f, &mut local);
            for k in 0..2 {
                for c in 0..r {
                    out[self.dof(f.vertices[k], c)] += local[r * k + c];
                }
            }
        }
        out
    }

    /// Boundary analogue of [`assemble_matrix`](Self::assemble_matrix) added
    /// onto `m`; local matrices are `(2·rank)²`.
    pub fn add_boundary_matrix(&self, m: &mut CsrMatrix<T>, tags: Option<&[u32]>, mut kernel: impl FnMut(&Facet<T>, &mut [T])) {
        let r = self.rank;
        let ld = 2 * r;
        let mut local = vec![T::zero(); ld * ld];
        for f in self.facets(tags) {
            local.iter_mut().for_each(|v| *v = T::zero());
            kernel(&f, &mut local);
            let dofs: Vec<usize> = (0..ld).map(|a| self.dof(f.vertices[a / r], a % r)).collect();
            for a in 0..ld {
                for b in 0..ld {
                    let p = self.pattern.find(dofs[a], dofs[b]).expect("facet pair present in pattern");
                    m.vals[p] += local[a * ld + b];
                }
            }
        }
    }

    /// Dofs of every vertex on facets carrying `tags`, all components.
    pub fn boundary_dofs(&self, tags: &[u32]) -> Vec<usize> {
        self.mesh
            .boundary_vertices(tags)
            .into_iter()
            .flat_map(|v| (0..self.rank).map(move |c| self.rank * v + c))
            .collect()
    }

    pub fn all_boundary_dofs(&self) -> Vec<usize> {
        self.mesh
            .all_boundary_vertices()
            .into_iter()
            .flat_map(|v| (0..self.rank).map(move |c| self.rank * v + c))
            .collect()
    }

    pub fn zeros(&self) -> FemField<T> {
        FemField { rank: self.rank, values: vec![T::zero(); self.dof_count()] }
    }

    pub fn field(&self, values: Vec<T>) -> Result<FemField<T>> {
        if values.len() != self.dof_count() {
            return Err(contract(format!("{} values for a space with {} dofs", values.len(), self.dof_count())));
        }
        Ok(FemField { rank: self.rank, values })
    }

    pub fn check(&self, f: &FemField<T>) -> Result<()> {
        if f.rank != self.rank || f.values.len() != self.dof_count() {
            return Err(contract(format!(
                "field (rank {}, {} values) does not live on this space (rank {}, {} dofs)",
                f.rank,
                f.values.len(),
                self.rank,
                self.dof_count()
            )));
        }
        Ok(())
    }

    /// Nodal interpolant of a function returning `rank` components.
    pub fn interpolate(&self, f: impl Fn(Vec2<T>) -> Vec<T>) -> FemField<T> {
        let mut values = Vec::with_capacity(self.dof_count());
        for &p in self.mesh.vertices() {
            let v = f(p);
            values.extend_from_slice(&v[..self.rank]);
        }
        FemField { rank: self.rank, values }
    }

    pub fn interpolate_scalar(&self, f: impl Fn(Vec2<T>) -> T) -> FemField<T> {
        self.interpolate(|p| vec![f(p)])
    }

    pub fn interpolate_vector(&self, f: impl Fn(Vec2<T>) -> Vec2<T>) -> FemField<T> {
        self.interpolate(|p| f(p).to_vec())
    }

    /// Sum over cells of `f(cell)`.
    pub fn integrate(&self, f: impl Fn(&Cell<T>) -> T) -> T {
        self.cells().map(|c| f(&c)).sum()
    }

    /// Quadrature of a pointwise integrand `f(cell, q)` over the domain.
    pub fn integrate_qp(&self, f: impl Fn(&Cell<T>, usize) -> T) -> T {
        self.cells().map(|c| c.quad(|q| f(&c, q))).sum()
    }

    /// Two-point Gauss quadrature of `f(facet, q)` over tagged facets.
    pub fn integrate_boundary(&self, tags: Option<&[u32]>, f: impl Fn(&Facet<T>, usize) -> T) -> T {
        self.facets(tags).map(|fc| fc.quad(|q| f(&fc, q))).sum()
    }

    pub fn mass_matrix(&self) -> CsrMatrix<T> {
        self.assemble_matrix(|c, local| add_mass(c, self.rank, |_| T::one(), local))
    }

    pub fn stiffness_matrix(&self) -> CsrMatrix<T> {
        self.assemble_matrix(|c, local| add_stiffness(c, self.rank, |_| T::one(), local))
    }

    /// `L²` projection of a quadrature-point integrand onto this space.
    pub fn project(&self, f: impl Fn(&Cell<T>, usize) -> Vec<T>) -> Result<FemField<T>> {
        let r = self.rank;
        let rhs = self.assemble_vector(|c, local| {
            for q in 0..3 {
                let v = f(c, q);
                let b = c.basis(q);
                let w = c.weight();
                for k in 0..3 {
                    for comp in 0..r {
                        local[r * k + comp] += w * b[k] * v[comp];
                    }
                }
            }
        });
        let mut x = vec![T::zero(); self.dof_count()];
        cg(&self.mass_matrix(), &rhs, &mut x, &SolverTolerance { relative: 1e-13, ..Default::default() })?;
        self.field(x)
    }
}

/// Global dofs of a triangle in local order `(vertex, component)`.
#[inline]
pub fn local_dofs(tri: &[usize; 3], rank: usize) -> [usize; 6] {
    let mut out = [0; 6];
    for k in 0..3 {
        for c in 0..rank {
            out[rank * k + c] = rank * tri[k] + c;
        }
    }
    out
}

/// Adds `∫ coef(q) u·v` into a `(3·rank)²` local matrix.
pub fn add_mass<T: Real>(cell: &Cell<T>, rank: usize, coef: impl Fn(usize) -> T, local: &mut [T]) {
    let ld = 3 * rank;
    for q in 0..3 {
        let w = cell.weight() * coef(q);
        let b = cell.basis(q);
        for i in 0..3 {
            for j in 0..3 {
                let v = w * b[i] * b[j];
                for c in 0..rank {
                    local[(rank * i + c) * ld + rank * j + c] += v;
                }
            }
        }
    }
}

/// Adds `∫ coef(q) Du:Dv` into a `(3·rank)²` local matrix.
pub fn add_stiffness<T: Real>(cell: &Cell<T>, rank: usize, coef: impl Fn(usize) -> T, local: &mut [T]) {
    let ld = 3 * rank;
    let c_int = cell.quad(coef);
    for i in 0..3 {
        for j in 0..3 {
            let g = &cell.grads;
            let v = c_int * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            for c in 0..rank {
                local[(rank * i + c) * ld + rank * j + c] += v;
            }
        }
    }
}

/// Lamé coefficients of an isotropic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lame<T> {
    pub lambda: T,
    pub mu: T,
}

impl<T: Real> Lame<T> {
    pub fn strain(&self, du: &Mat2<T>) -> Mat2<T> {
        let off = (du[0][1] + du[1][0]) * T::lit(0.5);
        [[du[0][0], off], [off, du[1][1]]]
    }

    /// `σ(w)` from `Dw`.
    pub fn stress(&self, du: &Mat2<T>) -> Mat2<T> {
        let e = self.strain(du);
        let tr = e[0][0] + e[1][1];
        let two_mu = self.mu + self.mu;
        [
            [self.lambda * tr + two_mu * e[0][0], two_mu * e[0][1]],
            [two_mu * e[1][0], self.lambda * tr + two_mu * e[1][1]],
        ]
    }
}

/// Gradient of the vector basis function `e_c λ_k`.
#[inline]
pub fn vector_basis_grad<T: Real>(cell: &Cell<T>, k: usize, c: usize) -> Mat2<T> {
    let mut m = mat_zero();
    m[c] = cell.grads[k];
    m
}

/// Adds `∫ coef(q) σ(u):ε(v)` into a 6×6 local matrix.
pub fn add_elasticity<T: Real>(cell: &Cell<T>, lame: &Lame<T>, coef: impl Fn(usize) -> T, local: &mut [T]) {
    let c_int = cell.quad(coef);
    let mut strains = [mat_zero(); 6];
    let mut stresses = [mat_zero(); 6];
    for a in 0..6 {
        let d = vector_basis_grad(cell, a / 2, a % 2);
        strains[a] = lame.strain(&d);
        stresses[a] = lame.stress(&d);
    }
    for a in 0..6 {
        for b in 0..6 {
            local[a * 6 + b] += c_int * crate::scalar::ddot(&stresses[b], &strains[a]);
        }
    }
}

/// Nodal P1 field of rank 1 or 2.
#[derive(Debug, Clone, PartialEq)]
pub struct FemField<T> {
    pub rank: usize,
    pub values: Vec<T>,
}

impl<T: Real> FemField<T> {
    pub fn scalar(values: Vec<T>) -> Self {
        Self { rank: 1, values }
    }

    pub fn vector(values: Vec<T>) -> Self {
        Self { rank: 2, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn local(&self, tri: &[usize; 3]) -> [T; 3] {
        debug_assert_eq!(self.rank, 1);
        tri.map(|v| self.values[v])
    }

    #[inline]
    pub fn local_vec(&self, tri: &[usize; 3]) -> [Vec2<T>; 3] {
        debug_assert_eq!(self.rank, 2);
        tri.map(|v| [self.values[2 * v], self.values[2 * v + 1]])
    }

    #[inline]
    pub fn at(&self, cell: &Cell<T>, q: usize) -> T {
        cell.interp(self.local(&cell.vertices), q)
    }

    #[inline]
    pub fn vec_at(&self, cell: &Cell<T>, q: usize) -> Vec2<T> {
        cell.interp_vec(self.local_vec(&cell.vertices), q)
    }

    #[inline]
    pub fn grad(&self, cell: &Cell<T>) -> Vec2<T> {
        cell.grad(self.local(&cell.vertices))
    }

    #[inline]
    pub fn jacobian(&self, cell: &Cell<T>) -> Mat2<T> {
        cell.jacobian(self.local_vec(&cell.vertices))
    }

    pub fn vertex_vec(&self, v: usize) -> Vec2<T> {
        [self.values[2 * v], self.values[2 * v + 1]]
    }

    pub fn component(&self, c: usize) -> FemField<T> {
        FemField::scalar(self.values.iter().skip(c).step_by(self.rank).copied().collect())
    }

    pub fn from_components(x: &FemField<T>, y: &FemField<T>) -> FemField<T> {
        let values = x.values.iter().zip(&y.values).flat_map(|(&a, &b)| [a, b]).collect();
        FemField::vector(values)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: T) -> FemField<T> {
        FemField { rank: self.rank, values: self.values.iter().map(|&v| v * s).collect() }
    }

    pub fn axpy(&mut self, a: T, x: &FemField<T>) {
        for (y, &xv) in self.values.iter_mut().zip(&x.values) {
            *y += a * xv;
        }
    }

    pub fn sub(&self, other: &FemField<T>) -> FemField<T> {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        FemField { rank: self.rank, values }
    }

    pub fn max_diff(&self, other: &FemField<T>) -> T {
        self.values.iter().zip(&other.values).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

/// Ersatz-material coefficient `φ<0 ? inside : outside`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialIndicator<T> {
    pub inside: T,
    pub outside: T,
}

impl<T: Real> MaterialIndicator<T> {
    pub fn new(inside: T, outside: T) -> Result<Self> {
        if !(inside > T::zero() && outside > T::zero()) {
            return Err(crate::error::config(format!("material values must be positive, got {inside} and {outside}")));
        }
        Ok(Self { inside, outside })
    }

    #[inline]
    pub fn eval(&self, phi: T) -> T {
        if phi < T::zero() {
            self.inside
        } else {
            self.outside
        }
    }

    /// Value at quadrature node `q` of `cell` given the level set.
    #[inline]
    pub fn at(&self, phi: &FemField<T>, cell: &Cell<T>, q: usize) -> T {
        self.eval(phi.at(cell, q))
    }
}

/// `χ_Ω` at a quadrature node.
#[inline]
pub fn chi<T: Real>(phi: &FemField<T>, cell: &Cell<T>, q: usize) -> T {
    if phi.at(cell, q) < T::zero() {
        T::one()
    } else {
        T::zero()
    }
}
