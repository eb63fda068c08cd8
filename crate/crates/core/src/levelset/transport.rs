use crate::error::{config, contract, Result};
use crate::fem::{add_stiffness, bicgstab, FemField, FunctionSpace, SolverTolerance};
use crate::scalar::{dot2, Real};

/// Stabilization parameter `½ (1/δt² + |θ|²/h²)^{-1/2}`.
#[inline]
pub fn tau<T: Real>(dt: T, speed2: T, h: T) -> T {
    T::lit(0.5) / (T::one() / (dt * dt) + speed2 / (h * h)).sqrt()
}

/// Advances `φ` by `∂_t φ + θ·∇φ = h²Δφ` (diffusion only when `smooth`)
/// up to `t_end` with `steps` Crank–Nicolson steps, using streamline-
/// enriched test functions `ψ + τ θ·∇ψ`.
pub fn transport<T: Real>(
    space: &FunctionSpace<T>,
    phi: &FemField<T>,
    theta: &FemField<T>,
    h: T,
    t_end: T,
    steps: usize,
    smooth: bool,
) -> Result<FemField<T>> {
    if !(t_end > T::zero()) || steps < 1 {
        return Err(config(format!("transport needs t_end > 0 and steps ≥ 1, got {t_end} and {steps}")));
    }
    space.check(phi)?;
    if theta.rank != 2 || theta.len() != 2 * phi.len() {
        return Err(contract("transport velocity must be a vector field on the level-set mesh"));
    }
    let dt = t_end / T::count(steps);
    let half = dt * T::lit(0.5);
    let diffusion = if smooth { h * h } else { T::zero() };

    // mass part M and flux part F of the Petrov–Galerkin form
    let mass = space.assemble_matrix(|c, local| {
        let th = theta.local_vec(&c.vertices);
        for q in 0..3 {
            let tq = c.interp_vec(th, q);
            let tau_q = tau(dt, dot2(tq, tq), h);
            let b = c.basis(q);
            let w = c.weight();
            for i in 0..3 {
                let test = b[i] + tau_q * dot2(tq, c.grads[i]);
                for j in 0..3 {
                    local[i * 3 + j] += w * test * b[j];
                }
            }
        }
    });
    let flux = space.assemble_matrix(|c, local| {
        let th = theta.local_vec(&c.vertices);
        for q in 0..3 {
            let tq = c.interp_vec(th, q);
            let tau_q = tau(dt, dot2(tq, tq), h);
            let b = c.basis(q);
            let w = c.weight();
            for i in 0..3 {
                let test = b[i] + tau_q * dot2(tq, c.grads[i]);
                for j in 0..3 {
                    local[i * 3 + j] += w * test * dot2(tq, c.grads[j]);
                }
            }
        }
        if smooth {
            add_stiffness(c, 1, |_| diffusion, local);
        }
    });
    let lhs = mass.add_scaled(half, &flux)?;
    let rhs_op = mass.add_scaled(-half, &flux)?;
    let tol = SolverTolerance::default();
    let mut current = phi.values.clone();
    let mut b = vec![T::zero(); current.len()];
    for _ in 0..steps {
        rhs_op.mul_vec_into(&current, &mut b);
        let mut next = current.clone();
        bicgstab(&lhs, &b, &mut next, &tol)?;
        current = next;
    }
    Ok(FemField::scalar(current))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::RectMesh;
    use std::sync::Arc;

    fn spaces(n: usize) -> (FunctionSpace<f64>, FunctionSpace<f64>) {
        let mesh = Arc::new(RectMesh::build([0.0, 0.0, 1.0, 1.0], n, n).unwrap());
        (FunctionSpace::scalar(mesh.clone()).unwrap(), FunctionSpace::vector(mesh).unwrap())
    }

    #[test]
    fn zero_velocity_is_identity() {
        let (s, v) = spaces(16);
        let phi = s.interpolate_scalar(|p| (p[0] * 7.0).sin() + p[1] * p[1]);
        let out = transport(&s, &phi, &v.zeros(), s.mesh().element_size(), 0.1, 5, false).unwrap();
        assert!(out.max_diff(&phi) <= 1e-10);
    }

    #[test]
    fn rejects_bad_parameters() {
        let (s, v) = spaces(2);
        let phi = s.zeros();
        assert!(transport(&s, &phi, &v.zeros(), 0.1, 0.0, 3, false).is_err());
        assert!(transport(&s, &phi, &v.zeros(), 0.1, 0.1, 0, false).is_err());
    }

    #[test]
    fn tau_bounds() {
        let dt = 0.01f64;
        assert!((tau(dt, 0.0, 0.001) - dt / 2.0).abs() < 1e-18);
        for s in [1e-6, 0.1, 1.0, 10.0] {
            let t = tau(dt, s, 0.001);
            assert!(t > 0.0 && t < dt / 2.0);
        }
    }
}
