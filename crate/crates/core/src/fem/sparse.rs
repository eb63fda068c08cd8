//! Compressed sparse row matrices with a fixed sparsity pattern.

use std::sync::Arc;

use crate::error::{config, contract, Result};
use crate::scalar::Real;

/// Row offsets and sorted column indices, shared by every matrix assembled
/// on the same function space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrPattern {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
}

impl CsrPattern {
    /// Builds a pattern from per-row column lists (duplicates allowed).
    pub fn from_rows(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Position of entry `(i, j)` in the value array.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[s..e].binary_search(&j).ok().map(|k| s + k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    pub pattern: Arc<CsrPattern>,
    pub vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn zeros(pattern: Arc<CsrPattern>) -> Self {
        let nnz = pattern.nnz();
        Self { pattern, vals: vec![T::zero(); nnz] }
    }

    /// Dense row-major input, keeping exact zeros out of the pattern except
    /// on the diagonal.
    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let lists = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (0..n).filter(|&j| i == j || r[j] != T::zero()).collect())
            .collect();
        let pattern = Arc::new(CsrPattern::from_rows(lists));
        let mut m = Self::zeros(pattern);
        for i in 0..n {
            for k in m.pattern.row_ptr[i]..m.pattern.row_ptr[i + 1] {
                m.vals[k] = rows[i][m.pattern.cols[k]];
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let pattern = Arc::new(CsrPattern::from_rows((0..n).map(|i| vec![i]).collect()));
        Self { pattern, vals: vec![T::one(); n] }
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.pattern.find(i, j).map(|k| self.vals[k]).unwrap_or_else(T::zero)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let (s, e) = (self.pattern.row_ptr[i], self.pattern.row_ptr[i + 1]);
        self.pattern.cols[s..e].iter().copied().zip(self.vals[s..e].iter().copied())
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        let p = &*self.pattern;
        for i in 0..p.n {
            let mut acc = T::zero();
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                acc += self.vals[k] * x[p.cols[k]];
            }
            y[i] = acc;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n()];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    /// `self + s·other`; both must share the pattern.
    pub fn add_scaled(&self, s: T, other: &CsrMatrix<T>) -> Result<CsrMatrix<T>> {
        if !Arc::ptr_eq(&self.pattern, &other.pattern) && *self.pattern != *other.pattern {
            return Err(contract("matrices with different sparsity patterns"));
        }
        let vals = self.vals.iter().zip(&other.vals).map(|(&a, &b)| a + s * b).collect();
        Ok(CsrMatrix { pattern: self.pattern.clone(), vals })
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.vals {
            *v *= s;
        }
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n() {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(&a, &b)| a * b).sum()
    }
}

/// Prescribed values for individual degrees of freedom.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirichletSet<T> {
    entries: Vec<(usize, T)>,
}

impl<T: Real> DirichletSet<T> {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Builds a set, sorting by dof. Repeated dofs must carry equal values.
    pub fn new(mut entries: Vec<(usize, T)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(usize, T)> = Vec::with_capacity(entries.len());
        for (d, v) in entries {
            match out.last() {
                Some(&(pd, pv)) if pd == d => {
                    if pv != v {
                        return Err(config(format!("dof {d} constrained to both {pv} and {v}")));
                    }
                }
                _ => out.push((d, v)),
            }
        }
        Ok(Self { entries: out })
    }

    pub fn homogeneous(dofs: impl IntoIterator<Item = usize>) -> Self {
        let mut entries: Vec<(usize, T)> = dofs.into_iter().map(|d| (d, T::zero())).collect();
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        Self { entries }
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.entries.last() {
            Some(&(d, _)) if d >= n => Err(contract(format!("Dirichlet dof {d} out of range {n}"))),
            _ => Ok(()),
        }
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &(d, _) in &self.entries {
            m[d] = true;
        }
        m
    }

    /// Overwrites constrained entries of `x` with their prescribed values.
    pub fn impose(&self, x: &mut [T]) {
        for &(d, v) in &self.entries {
            x[d] = v;
        }
    }

    /// Zeros constrained entries of `x`.
    pub fn zero_out(&self, x: &mut [T]) {
        for &(d, _) in &self.entries {
            x[d] = T::zero();
        }
    }
}

/// A square matrix with its right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
}

impl<T: Real> SparseSystem<T> {
    pub fn new(matrix: CsrMatrix<T>, rhs: Vec<T>) -> Result<Self> {
        if rhs.len() != matrix.n() {
            return Err(contract(format!("rhs length {} for a {}-row matrix", rhs.len(), matrix.n())));
        }
        Ok(Self { matrix, rhs })
    }

    /// Symmetric elimination of the constrained dofs: the known column is
    /// moved to the right-hand side, row and column are zeroed and the
    /// diagonal set to one.
    pub fn apply_dirichlet(mut self, bc: &DirichletSet<T>) -> Result<Self> {
        let n = self.matrix.n();
        bc.check_bounds(n)?;
        if bc.is_empty() {
            return Ok(self);
        }
        let mut value = vec![T::zero(); n];
        let mask = bc.mask(n);
        bc.impose(&mut value);
        let p = self.matrix.pattern.clone();
        for i in 0..n {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                let j = p.cols[k];
                if mask[i] {
                    self.matrix.vals[k] = if i == j { T::one() } else { T::zero() };
                } else if mask[j] {
                    self.rhs[i] -= self.matrix.vals[k] * value[j];
                    self.matrix.vals[k] = T::zero();
                }
            }
        }
        bc.impose(&mut self.rhs);
        Ok(self)
    }
}

/// Matrix-only elimination for homogeneous constraints, used for matrices
/// that are cached and paired with many right-hand sides.
pub fn eliminate_homogeneous<T: Real>(matrix: &mut CsrMatrix<T>, bc: &DirichletSet<T>) -> Result<()> {
    let n = matrix.n();
    bc.check_bounds(n)?;
    let mask = bc.mask(n);
    let p = matrix.pattern.clone();
    for i in 0..n {
        for k in p.row_ptr[i]..p.row_ptr[i + 1] {
            let j = p.cols[k];
            if mask[i] || mask[j] {
                matrix.vals[k] = if i == j { T::one() } else { T::zero() };
            }
        }
    }
    Ok(())
}
