//! Verification tools: finite-difference derivative checks and geometric
//! measures of level-set domains.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{contract, Result};
use crate::fem::{chi, FemField, FunctionSpace};
use crate::levelset::zero_set;
use crate::models::{cost_at, evaluate, ModelProblem};
use crate::scalar::{Real, Vec2};

/// Finite-difference quotient against the distributed derivative at two
/// step sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    pub t: f64,
    pub dj: f64,
    pub fd: f64,
    pub rel_error: f64,
    pub fd_half: f64,
    pub rel_error_half: f64,
}

impl FdReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.rel_error <= tol && self.rel_error_half < self.rel_error
    }
}

/// Compares `(J(Ω_t) − J(Ω))/t` with `dJ(Ω;θ) = ∫ S₀·θ + S₁:Dθ`, where `Ω_t`
/// is the image of `Ω` under `x ↦ x + tθ(x)`: vertices move with `θ` and the
/// level-set values are carried along. `θ` must vanish on the boundary.
pub fn fd_derivative_check<T: Real>(model: &dyn ModelProblem<T>, phi: &FemField<T>, theta: &FemField<T>, t: f64) -> Result<FdReport> {
    let space = model.space();
    let vspace = space.sibling(2)?;
    vspace.check(theta)?;
    let boundary = space.mesh().all_boundary_vertices();
    if boundary.iter().any(|&v| theta.vertex_vec(v) != [T::zero(); 2]) {
        return Err(contract("finite-difference velocity must vanish on the boundary"));
    }
    let ev = evaluate(model, phi, false, false)?;
    let dj = model.derivative(phi, &ev.states, &ev.adjoints).cost.apply(&vspace, theta).to_f64_lossy();
    let j0 = ev.cost.to_f64_lossy();
    let quotient = |step: f64| -> Result<f64> {
        let s = T::lit(step);
        let mesh = space.mesh().displaced(|k, x| {
            let v = theta.vertex_vec(k);
            [x[0] + s * v[0], x[1] + s * v[1]]
        });
        let moved = model.on_mesh(Arc::new(mesh))?;
        Ok((cost_at(moved.as_ref(), phi)?.to_f64_lossy() - j0) / step)
    };
    let fd = quotient(t)?;
    let fd_half = quotient(0.5 * t)?;
    let rel = |v: f64| (v - dj).abs() / dj.abs().max(f64::MIN_POSITIVE);
    Ok(FdReport { t, dj, fd, rel_error: rel(fd), fd_half, rel_error_half: rel(fd_half) })
}

/// Smooth test velocity vanishing on the rectangle boundary.
pub fn bump_velocity<T: Real>(vspace: &FunctionSpace<T>) -> FemField<T> {
    let [x0, y0, x1, y1] = vspace.mesh().bounds();
    let pi = T::lit(std::f64::consts::PI);
    let scale = T::lit(0.1) * (x1 - x0).min(y1 - y0);
    let mut theta = vspace.interpolate_vector(|p| {
        let s = (p[0] - x0) / (x1 - x0);
        let r = (p[1] - y0) / (y1 - y0);
        let b = ((pi * s).sin() * (pi * r).sin()).powi(2) * scale;
        [b * (T::one() + T::lit(0.5) * (T::lit(2.0) * pi * r).sin()), b * (T::lit(0.5) + (T::lit(2.0) * pi * s).cos())]
    });
    for v in vspace.mesh().all_boundary_vertices() {
        theta.values[2 * v] = T::zero();
        theta.values[2 * v + 1] = T::zero();
    }
    theta
}

/// Triangles whose centroid value is negative.
pub fn inside_triangles<T: Real>(space: &FunctionSpace<T>, phi: &FemField<T>) -> Vec<bool> {
    space.mesh().triangles().iter().map(|t| phi.local(t).iter().fold(T::zero(), |a, &b| a + b) < T::zero()).collect()
}

/// Connected components of the inside triangles under edge adjacency, as
/// component ids per triangle (`None` outside).
pub fn components<T: Real>(space: &FunctionSpace<T>, phi: &FemField<T>) -> (usize, Vec<Option<usize>>) {
    let inside = inside_triangles(space, phi);
    let nbrs = space.mesh().triangle_neighbors();
    let mut label = vec![None; inside.len()];
    let mut count = 0;
    for start in 0..inside.len() {
        if !inside[start] || label[start].is_some() {
            continue;
        }
        label[start] = Some(count);
        let mut queue = VecDeque::from([start]);
        while let Some(t) = queue.pop_front() {
            for &n in &nbrs[t] {
                if inside[n] && label[n].is_none() {
                    label[n] = Some(count);
                    queue.push_back(n);
                }
            }
        }
        count += 1;
    }
    (count, label)
}

fn touching_components<T: Real>(space: &FunctionSpace<T>, labels: &[Option<usize>], tags: &[u32]) -> Vec<usize> {
    let mesh = space.mesh();
    let mut out = Vec::new();
    for f in mesh.boundary_facets().iter().filter(|f| tags.contains(&f.tag)) {
        for (t, tri) in mesh.triangles().iter().enumerate() {
            if tri.contains(&f.vertices[0]) && tri.contains(&f.vertices[1]) {
                if let Some(c) = labels[t] {
                    out.push(c);
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Whether one connected piece of `{φ < 0}` touches facets with tags in
/// `a` and facets with tags in `b`.
pub fn connects<T: Real>(space: &FunctionSpace<T>, phi: &FemField<T>, a: &[u32], b: &[u32]) -> bool {
    let (_, labels) = components(space, phi);
    let ca = touching_components(space, &labels, a);
    let cb = touching_components(space, &labels, b);
    ca.iter().any(|c| cb.contains(c))
}

/// Whether some piece of `{φ < 0}` touches facets carrying `tags`.
pub fn touches<T: Real>(space: &FunctionSpace<T>, phi: &FemField<T>, tags: &[u32]) -> bool {
    let (_, labels) = components(space, phi);
    !touching_components(space, &labels, tags).is_empty()
}

/// Number of connected pieces of `{φ < 0}` that touch no facet carrying
/// `tags`.
pub fn detached_components<T: Real>(space: &FunctionSpace<T>, phi: &FemField<T>, tags: &[u32]) -> usize {
    let (count, labels) = components(space, phi);
    count - touching_components(space, &labels, tags).len()
}

/// `∫ |χ_a − χ_b|` by quadrature.
pub fn symmetric_difference_area<T: Real>(space: &FunctionSpace<T>, a: &FemField<T>, b: &FemField<T>) -> T {
    space.integrate_qp(|c, q| (chi(a, c, q) - chi(b, c, q)).abs())
}

fn point_segment_distance<T: Real>(p: Vec2<T>, s: &[Vec2<T>; 2]) -> T {
    let d = [s[1][0] - s[0][0], s[1][1] - s[0][1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let w = [p[0] - s[0][0], p[1] - s[0][1]];
    let t = if l2 > T::zero() { ((w[0] * d[0] + w[1] * d[1]) / l2).max(T::zero()).min(T::one()) } else { T::zero() };
    let e = [w[0] - t * d[0], w[1] - t * d[1]];
    (e[0] * e[0] + e[1] * e[1]).sqrt()
}

fn distance_to_set<T: Real>(p: Vec2<T>, segs: &[[Vec2<T>; 2]]) -> T {
    segs.iter().fold(T::infinity(), |m, s| m.min(point_segment_distance(p, s)))
}

fn one_sided<T: Real>(from: &[[Vec2<T>; 2]], to: &[[Vec2<T>; 2]]) -> T {
    let mut worst = T::zero();
    for s in from {
        let mid = [(s[0][0] + s[1][0]) * T::lit(0.5), (s[0][1] + s[1][1]) * T::lit(0.5)];
        for p in [s[0], s[1], mid] {
            worst = worst.max(distance_to_set(p, to));
        }
    }
    worst
}

/// Hausdorff-type distance between the piecewise-linear zero sets of `a` and
/// `b`, sampled at segment endpoints and midpoints. Infinite when exactly
/// one of them is empty.
pub fn zero_set_distance<T: Real>(space: &FunctionSpace<T>, a: &FemField<T>, b: &FemField<T>) -> T {
    let (sa, sb) = (zero_set(space, a), zero_set(space, b));
    match (sa.is_empty(), sb.is_empty()) {
        (true, true) => T::zero(),
        (true, false) | (false, true) => T::infinity(),
        _ => one_sided(&sa, &sb).max(one_sided(&sb, &sa)),
    }
}

/// `max | |∇φ| − 1 |` over triangles within `band` of the zero set of
/// `reference`.
pub fn eikonal_band_error<T: Real>(space: &FunctionSpace<T>, phi: &FemField<T>, reference: &FemField<T>, band: T) -> T {
    let segs = zero_set(space, reference);
    let mut worst = T::zero();
    for c in space.cells() {
        let r = reference.local(&c.vertices);
        let crossed = r.iter().any(|&v| v < T::zero()) && r.iter().any(|&v| v >= T::zero());
        let near = crossed || {
            let mid = |a: usize, b: usize| [(c.coords[a][0] + c.coords[b][0]) * T::lit(0.5), (c.coords[a][1] + c.coords[b][1]) * T::lit(0.5)];
            let pts = [c.coords[0], c.coords[1], c.coords[2], mid(0, 1), mid(1, 2), mid(2, 0)];
            pts.iter().any(|&p| distance_to_set(p, &segs) <= band)
        };
        if near {
            let g = phi.grad(&c);
            worst = worst.max(((g[0] * g[0] + g[1] * g[1]).sqrt() - T::one()).abs());
        }
    }
    worst
}

/// Mean distance of the zero set of `phi` from a circle.
pub fn mean_radius<T: Real>(space: &FunctionSpace<T>, phi: &FemField<T>, center: Vec2<T>) -> T {
    let segs = zero_set(space, phi);
    let mut len = T::zero();
    let mut acc = T::zero();
    for s in &segs {
        let l = ((s[1][0] - s[0][0]).powi(2) + (s[1][1] - s[0][1]).powi(2)).sqrt();
        let m = [(s[0][0] + s[1][0]) * T::lit(0.5) - center[0], (s[0][1] + s[1][1]) * T::lit(0.5) - center[1]];
        acc += l * (m[0] * m[0] + m[1] * m[1]).sqrt();
        len += l;
    }
    acc / len
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryTag, BoxRegion, RectMesh, Region};

    fn space(n: usize) -> FunctionSpace<f64> {
        let mesh = RectMesh::build([0.0, 0.0, 1.0, 1.0], n, n).unwrap().tag_boundary(&[
            BoundaryTag::from_region(1, Region::single(BoxRegion { x: Some([0.0, 0.0]), y: None })),
            BoundaryTag::from_region(2, Region::single(BoxRegion { x: Some([1.0, 1.0]), y: None })),
        ]);
        FunctionSpace::scalar(Arc::new(mesh)).unwrap()
    }

    #[test]
    fn two_disks_two_components() {
        let s = space(32);
        let phi = s.interpolate_scalar(|p| {
            let a = ((p[0] - 0.25).powi(2) + (p[1] - 0.5).powi(2)).sqrt() - 0.15;
            let b = ((p[0] - 0.75).powi(2) + (p[1] - 0.5).powi(2)).sqrt() - 0.15;
            a.min(b)
        });
        assert_eq!(components(&s, &phi).0, 2);
        assert!(!connects(&s, &phi, &[1], &[2]));
    }

    #[test]
    fn bar_connects_sides() {
        let s = space(16);
        let phi = s.interpolate_scalar(|p| (p[1] - 0.5).abs() - 0.2);
        assert_eq!(components(&s, &phi).0, 1);
        assert!(connects(&s, &phi, &[1], &[2]));
        assert!(touches(&s, &phi, &[1]));
    }

    #[test]
    fn symmetric_difference_of_shifted_halves() {
        let s = space(20);
        let a = s.interpolate_scalar(|p| p[0] - 0.5);
        let b = s.interpolate_scalar(|p| p[0] - 0.6);
        let d = symmetric_difference_area(&s, &a, &b);
        assert!((d - 0.1).abs() < 0.051, "{d}");
        assert_eq!(symmetric_difference_area(&s, &a, &a), 0.0);
    }

    #[test]
    fn zero_set_distance_of_shift() {
        let s = space(16);
        let a = s.interpolate_scalar(|p| p[0] - 0.5);
        let b = s.interpolate_scalar(|p| p[0] - 0.53);
        assert!((zero_set_distance(&s, &a, &b) - 0.03).abs() < 1e-12);
        assert_eq!(zero_set_distance(&s, &a, &a), 0.0);
    }

    #[test]
    fn distance_function_band_error() {
        let s = space(16);
        let a = s.interpolate_scalar(|p| p[0] - 0.5);
        assert!(eikonal_band_error(&s, &a, &a, 0.1) < 1e-12);
        let b = a.scaled(2.0);
        assert!((eikonal_band_error(&s, &b, &a, 0.1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bump_vanishes_on_boundary() {
        let s = space(8);
        let v = s.sibling(2).unwrap();
        let th = bump_velocity(&v);
        for k in s.mesh().all_boundary_vertices() {
            let t = th.vertex_vec(k);
            assert_eq!(t, [0.0, 0.0]);
        }
        assert!(th.max_abs() > 0.01);
    }
}
