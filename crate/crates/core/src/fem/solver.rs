//! Krylov and Newton solvers.

use crate::error::{contract, Error, Result};
use crate::fem::sparse::{CsrMatrix, DirichletSet, SparseSystem};
use crate::scalar::Real;

/// Stopping rule for the iterative linear solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTolerance {
    pub relative: f64,
    pub absolute: f64,
    /// Iteration cap as a multiple of the system size.
    pub cap_factor: usize,
}

impl Default for SolverTolerance {
    fn default() -> Self {
        Self { relative: 1e-10, absolute: 1e-14, cap_factor: 10 }
    }
}

impl SolverTolerance {
    fn threshold<T: Real>(&self, b_norm: T) -> T {
        let rel = T::lit(self.relative).max(T::solver_floor());
        (rel * b_norm).max(T::lit(self.absolute))
    }

    fn cap(&self, n: usize) -> usize {
        (self.cap_factor * n).max(10)
    }
}

/// Iteration count and final residual of a converged solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn jacobi<T: Real>(a: &CsrMatrix<T>) -> Result<Vec<T>> {
    a.diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d == T::zero() || !d.is_finite() {
                Err(contract(format!("zero or non-finite diagonal at row {i}")))
            } else {
                Ok(T::one() / d)
            }
        })
        .collect()
}

/// Jacobi-preconditioned conjugate gradients; `x` holds the initial guess
/// and receives the solution.
pub fn cg<T: Real>(a: &CsrMatrix<T>, b: &[T], x: &mut [T], tol: &SolverTolerance) -> Result<SolveStats> {
    let n = a.n();
    if b.len() != n || x.len() != n {
        return Err(contract("vector length does not match matrix"));
    }
    let inv_d = jacobi(a)?;
    let threshold = tol.threshold(norm(b));
    let mut r = a.mul_vec(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut res = norm(&r);
    if res <= threshold {
        return Ok(SolveStats { iterations: 0, residual: res.to_f64_lossy() });
    }
    let mut z: Vec<T> = r.iter().zip(&inv_d).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let cap = tol.cap(n);
    for it in 1..=cap {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::SolverDivergence { method: "cg", iterations: it, residual: res.to_f64_lossy() });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm(&r);
        if res <= threshold {
            return Ok(SolveStats { iterations: it, residual: res.to_f64_lossy() });
        }
        if !res.is_finite() {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv_d[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDivergence { method: "cg", iterations: cap, residual: res.to_f64_lossy() })
}

/// Jacobi-preconditioned BiCGSTAB for the nonsymmetric level-set systems.
pub fn bicgstab<T: Real>(a: &CsrMatrix<T>, b: &[T], x: &mut [T], tol: &SolverTolerance) -> Result<SolveStats> {
    let n = a.n();
    if b.len() != n || x.len() != n {
        return Err(contract("vector length does not match matrix"));
    }
    let inv_d = jacobi(a)?;
    let threshold = tol.threshold(norm(b));
    let mut r = a.mul_vec(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut res = norm(&r);
    if res <= threshold {
        return Ok(SolveStats { iterations: 0, residual: res.to_f64_lossy() });
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let cap = tol.cap(n);
    let diverged = |it, res: T| Error::SolverDivergence { method: "bicgstab", iterations: it, residual: res.to_f64_lossy() };
    for it in 1..=cap {
        let rho_new = dot(&r_hat, &r);
        if rho_new == T::zero() || !rho_new.is_finite() {
            return Err(diverged(it, res));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = p[i] * inv_d[i];
        }
        a.mul_vec_into(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == T::zero() {
            return Err(diverged(it, res));
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let s_norm = norm(&s);
        if s_norm <= threshold {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            return Ok(SolveStats { iterations: it, residual: s_norm.to_f64_lossy() });
        }
        for i in 0..n {
            z[i] = s[i] * inv_d[i];
        }
        a.mul_vec_into(&z, &mut t);
        let tt = dot(&t, &t);
        if tt == T::zero() {
            return Err(diverged(it, res));
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm(&r);
        if res <= threshold {
            return Ok(SolveStats { iterations: it, residual: res.to_f64_lossy() });
        }
        if !res.is_finite() || omega == T::zero() {
            return Err(diverged(it, res));
        }
    }
    Err(diverged(cap, res))
}

/// Solves an SPD system by CG from a zero initial guess.
pub fn solve_linear<T: Real>(system: &SparseSystem<T>) -> Result<Vec<T>> {
    let mut x = vec![T::zero(); system.matrix.n()];
    cg(&system.matrix, &system.rhs, &mut x, &SolverTolerance::default())?;
    Ok(x)
}

/// Like [`solve_linear`] but starting from `guess`.
pub fn solve_linear_from<T: Real>(system: &SparseSystem<T>, guess: &[T]) -> Result<Vec<T>> {
    let mut x = guess.to_vec();
    cg(&system.matrix, &system.rhs, &mut x, &SolverTolerance::default())?;
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 25 }
    }
}

/// Converged Newton iterate with the residual norm after each update
/// (the first entry is the initial residual).
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult<T> {
    pub solution: Vec<T>,
    pub residuals: Vec<f64>,
}

impl<T> NewtonResult<T> {
    pub fn iterations(&self) -> usize {
        self.residuals.len() - 1
    }
}

/// Newton's method `u ← u + δu`, `J(u)δu = −F(u)`, on the unconstrained dofs.
/// `residual(u)` returns `F(u)` and `jacobian(u)` returns `∂F/∂u`, both
/// without boundary conditions; `bc` values are imposed on `init`.
pub fn solve_newton<T: Real>(
    residual: impl Fn(&[T]) -> Vec<T>,
    jacobian: impl Fn(&[T]) -> CsrMatrix<T>,
    init: &[T],
    bc: &DirichletSet<T>,
    options: &NewtonOptions,
) -> Result<NewtonResult<T>> {
    let mut u = init.to_vec();
    bc.check_bounds(u.len())?;
    bc.impose(&mut u);
    let homogeneous = DirichletSet::homogeneous(bc.entries().iter().map(|e| e.0));
    let tol = T::lit(options.tol);
    let mut history = Vec::with_capacity(options.max_iter + 1);
    let mut f = residual(&u);
    homogeneous.zero_out(&mut f);
    let mut f_norm = norm(&f);
    history.push(f_norm.to_f64_lossy());
    for _ in 0..options.max_iter {
        if f_norm <= tol {
            return Ok(NewtonResult { solution: u, residuals: history });
        }
        if !f_norm.is_finite() {
            break;
        }
        let rhs: Vec<T> = f.iter().map(|&v| -v).collect();
        let system = SparseSystem::new(jacobian(&u), rhs)?.apply_dirichlet(&homogeneous)?;
        let mut du = vec![T::zero(); u.len()];
        let tol_lin = SolverTolerance { relative: 1e-12, ..SolverTolerance::default() };
        if cg(&system.matrix, &system.rhs, &mut du, &tol_lin).is_err() {
            du.iter_mut().for_each(|v| *v = T::zero());
            bicgstab(&system.matrix, &system.rhs, &mut du, &tol_lin)
                .map_err(|_| Error::NewtonDivergence { history: history.clone() })?;
        }
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui += *di;
        }
        f = residual(&u);
        homogeneous.zero_out(&mut f);
        f_norm = norm(&f);
        history.push(f_norm.to_f64_lossy());
    }
    if f_norm <= tol {
        return Ok(NewtonResult { solution: u, residuals: history });
    }
    Err(Error::NewtonDivergence { history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let s = SparseSystem::new(CsrMatrix::identity(4), vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        assert_eq!(solve_linear(&s).unwrap(), vec![1.0, -2.0, 3.0, 0.5]);
    }

    #[test]
    fn two_by_two() {
        let m = CsrMatrix::<f64>::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let x = solve_linear(&SparseSystem::new(m, vec![3.0, 3.0]).unwrap()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_with_fixed_middle() {
        let m = CsrMatrix::<f64>::from_dense(&[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]);
        let s = SparseSystem::new(m, vec![0.0; 3])
            .unwrap()
            .apply_dirichlet(&DirichletSet::new(vec![(1, 1.0)]).unwrap())
            .unwrap();
        let x = solve_linear(&s).unwrap();
        assert!((x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bicgstab_nonsymmetric() {
        let m = CsrMatrix::<f64>::from_dense(&[vec![4.0, 1.0, 0.0], vec![-1.0, 4.0, 1.0], vec![0.0, -1.0, 4.0]]);
        let exact = [1.0, 2.0, 3.0];
        let b = m.mul_vec(&exact);
        let mut x = vec![0.0; 3];
        bicgstab(&m, &b, &mut x, &SolverTolerance::default()).unwrap();
        for i in 0..3 {
            assert!((x[i] - exact[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn cg_reports_divergence_on_indefinite() {
        let m = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let mut x = vec![0.0; 2];
        assert!(matches!(
            cg(&m, &[1.0, 1.0], &mut x, &SolverTolerance::default()),
            Err(Error::SolverDivergence { .. })
        ));
    }

    #[test]
    fn newton_linear_one_step() {
        let k = CsrMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]);
        let b = [1.0, 0.0];
        let res = solve_newton(
            |u: &[f64]| {
                let ku = k.mul_vec(u);
                vec![ku[0] - b[0], ku[1] - b[1]]
            },
            |_| k.clone(),
            &[0.0, 0.0],
            &DirichletSet::empty(),
            &NewtonOptions::default(),
        )
        .unwrap();
        assert_eq!(res.iterations(), 1);
        assert!((res.solution[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn f32_solves() {
        let m = CsrMatrix::<f32>::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let x = solve_linear(&SparseSystem::new(m, vec![3.0, 3.0]).unwrap()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-5);
    }
}
