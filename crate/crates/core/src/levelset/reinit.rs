use crate::error::{config, Result};
use crate::fem::{bicgstab, Cell, FemField, FunctionSpace, SolverTolerance};
use crate::levelset::gradient_norm_guard;
use crate::levelset::transport::tau;
use crate::scalar::{dot2, norm2, Real, Vec2};

/// Pseudo-time evolution of `∂_t φ + S(φ₀)|∇φ| = S(φ₀) + h²Δφ` over
/// `[0, t_final]` in `iters` steps: explicit Euler for the first step and
/// two-step Adams–Bashforth afterwards. `S(φ₀) = φ₀/√(φ₀² + h²)` is frozen
/// from the input.
pub fn reinitialize<T: Real>(space: &FunctionSpace<T>, phi: &FemField<T>, h: T, iters: usize, t_final: T) -> Result<FemField<T>> {
    if iters < 2 {
        return Err(config(format!("reinitialization needs at least 2 iterations, got {iters}")));
    }
    if !(t_final > T::zero()) {
        return Err(config(format!("reinitialization final time must be positive, got {t_final}")));
    }
    space.check(phi)?;
    let dt = t_final / T::count(iters);
    let h2 = h * h;
    let sign = |c: &Cell<T>, q: usize| {
        let p = phi.at(c, q);
        p / (p * p + h2).sqrt()
    };
    let tol = SolverTolerance::default();
    let half = T::lit(0.5);
    let three = T::lit(3.0);

    let mut prev: Option<FemField<T>> = None;
    let mut current = phi.clone();
    for _ in 0..iters {
        let cur = &current;
        let old = prev.as_ref();
        // enriched test function ψ_i + τ S ∇φⁿ/|∇φⁿ| · ∇ψ_i at node q
        let test = |c: &Cell<T>, q: usize, dir: Vec2<T>, i: usize| {
            let s = sign(c, q);
            let t = tau(dt, s * s, h);
            c.basis(q)[i] + t * s * dot2(dir, c.grads[i])
        };
        let lhs = space.assemble_matrix(|c, local| {
            let dir = gradient_norm_guard(cur.grad(c));
            for q in 0..3 {
                let b = c.basis(q);
                let w = c.weight();
                for i in 0..3 {
                    let ti = test(c, q, dir, i);
                    for j in 0..3 {
                        local[i * 3 + j] += w * ti * b[j];
                    }
                }
            }
        });
        let rhs = space.assemble_vector(|c, local| {
            let g_cur = cur.grad(c);
            let dir = gradient_norm_guard(g_cur);
            let (hamilton_grad, diff_grad) = match old {
                // (H(∇φⁿ⁻¹) − 3H(∇φⁿ))/2 and (∇φⁿ⁻¹ − 3∇φⁿ)/2
                Some(o) => {
                    let g_old = o.grad(c);
                    (
                        (norm2(g_old) - three * norm2(g_cur)) * half,
                        [(g_old[0] - three * g_cur[0]) * half, (g_old[1] - three * g_cur[1]) * half],
                    )
                }
                None => (-norm2(g_cur), [-g_cur[0], -g_cur[1]]),
            };
            for q in 0..3 {
                let s = sign(c, q);
                let w = c.weight();
                let value = cur.at(c, q) + dt * s + dt * s * hamilton_grad;
                for (i, l) in local.iter_mut().enumerate() {
                    *l += w * value * test(c, q, dir, i);
                }
            }
            for (i, l) in local.iter_mut().enumerate() {
                *l += dt * h2 * c.area * dot2(diff_grad, c.grads[i]);
            }
        });
        let mut next = current.values.clone();
        bicgstab(&lhs, &rhs, &mut next, &tol)?;
        prev = Some(std::mem::replace(&mut current, FemField::scalar(next)));
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::RectMesh;
    use std::sync::Arc;

    #[test]
    fn rejects_single_iteration() {
        let s = FunctionSpace::scalar(Arc::new(RectMesh::build([0.0, 0.0, 1.0, 1.0], 2, 2).unwrap())).unwrap();
        assert!(reinitialize(&s, &s.zeros(), 0.1, 1, 0.1).is_err());
    }

    #[test]
    fn no_interface_grows_linearly() {
        let s = FunctionSpace::<f64>::scalar(Arc::new(RectMesh::build([0.0, 0.0, 1.0, 1.0], 8, 8).unwrap())).unwrap();
        let phi = s.interpolate_scalar(|_| 1.0);
        let h = s.mesh().element_size();
        let out = reinitialize(&s, &phi, h, 10, 0.1).unwrap();
        let expected = 1.0 + 0.1 / (1.0 + h * h).sqrt();
        let worst = out.values.iter().fold(0.0f64, |m, v| m.max((v - expected).abs()));
        assert!(worst < 1e-8, "{worst}");
    }
}
