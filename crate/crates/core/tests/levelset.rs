mod common;

use proptest::prelude::*;
use shapeopt::diagnostics::{eikonal_band_error, mean_radius, zero_set_distance};
use shapeopt::fem::FunctionSpace;
use shapeopt::levelset::{gradient_norm_guard, initial_level, reinitialize, tau, transport, InitialLevelSpec, NormOrder};

fn space(n: usize) -> FunctionSpace<f64> {
    FunctionSpace::scalar(common::unit_square(n)).unwrap()
}

fn noise(p: [f64; 2]) -> f64 {
    (13.0 * p[0]).sin() * (7.0 * p[1]).cos() + 0.3 * (29.0 * p[0] * p[1]).sin()
}

#[test]
fn transport_without_velocity_is_identity() {
    let s = space(24);
    let v = s.sibling(2).unwrap();
    let phi = s.interpolate_scalar(noise);
    let h = s.mesh().element_size();
    let out = transport(&s, &phi, &v.zeros(), h, 0.05, 7, false).unwrap();
    let gap = phi.values.iter().zip(&out.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(gap <= 1e-10, "{gap:e}");
}

#[test]
fn smoothing_dissipates_gradient() {
    let s = space(24);
    let v = s.sibling(2).unwrap();
    let h = s.mesh().element_size();
    let grad_norm = |f: &shapeopt::fem::FemField<f64>| s.integrate(|c| {
        let g = f.grad(c);
        g[0] * g[0] + g[1] * g[1]
    });
    let mut phi = s.interpolate_scalar(noise);
    let mut last = grad_norm(&phi);
    for _ in 0..5 {
        phi = transport(&s, &phi, &v.zeros(), h, 0.02, 2, true).unwrap();
        let now = grad_norm(&phi);
        assert!(now <= last * (1.0 + 1e-12), "{now} > {last}");
        last = now;
    }
}

#[test]
fn disk_advected_by_radial_velocity_grows() {
    let s = space(128);
    let v = s.sibling(2).unwrap();
    let c = [0.5, 0.5];
    let phi = s.interpolate_scalar(common::disk(c, 0.3));
    let theta = v.interpolate_vector(|p| {
        let d = [p[0] - c[0], p[1] - c[1]];
        let r = (d[0] * d[0] + d[1] * d[1] + 1e-4).sqrt();
        [d[0] / r, d[1] / r]
    });
    let h = s.mesh().element_size();
    let r0 = mean_radius(&s, &phi, c);
    let out = transport(&s, &phi, &theta, h, 0.02, 10, false).unwrap();
    let growth = mean_radius(&s, &out, c) - r0;
    assert!((growth - 0.02).abs() <= 0.2 * 0.02, "growth {growth}");
}

#[test]
fn transport_rejects_bad_horizon() {
    let s = space(4);
    let v = s.sibling(2).unwrap();
    assert!(transport(&s, &s.zeros(), &v.zeros(), 0.1, 0.0, 3, false).is_err());
    assert!(transport(&s, &s.zeros(), &v.zeros(), 0.1, 0.1, 0, false).is_err());
}

fn reinit_check(phi_fn: impl Fn([f64; 2]) -> f64) -> (f64, f64, f64) {
    let s = space(32);
    let h = s.mesh().element_size();
    let phi = s.interpolate_scalar(phi_fn);
    let out = reinitialize(&s, &phi, h, 8, 0.1).unwrap();
    (eikonal_band_error(&s, &out, &phi, 3.0 * h), zero_set_distance(&s, &phi, &out), h)
}

#[test]
fn reinit_keeps_line_distance() {
    let (eik, shift, h) = reinit_check(|p| p[0] - 0.5);
    assert!(eik <= 0.1, "{eik}");
    assert!(shift <= 2.0 * h, "{shift}");
}

#[test]
fn reinit_keeps_disk_distance() {
    let (eik, shift, h) = reinit_check(common::disk([0.5, 0.5], 0.3));
    assert!(eik <= 0.1, "{eik}");
    assert!(shift <= 2.0 * h, "{shift}");
}

#[test]
fn reinit_of_steep_line_keeps_zero_set() {
    let (_, shift, h) = reinit_check(|p| 5.0 * (p[0] - 0.5));
    assert!(shift <= h, "{shift}");
}

#[test]
fn reinit_without_interface_grows() {
    let s = space(8);
    let out = reinitialize(&s, &s.interpolate_scalar(|_| 1.0), s.mesh().element_size(), 4, 0.1).unwrap();
    assert!(out.values.iter().all(|&v| v > 1.09 && v <= 1.1));
}

#[test]
fn initial_level_examples() {
    let s = space(10);
    let spec = InitialLevelSpec::new(vec![[0.5, 0.5]], vec![0.3], -1.0);
    assert!((spec.eval([0.5, 0.5]) - -0.3f64).abs() < 1e-15);
    assert!(spec.eval([0.5, 0.8f64]).abs() < 1e-15);
    let mut flipped = spec.clone();
    flipped.factor = 1.0;
    assert!((flipped.eval([0.5f64, 0.5]) - 0.3).abs() < 1e-15);
    assert!(initial_level(&InitialLevelSpec::new(vec![[0.5, 0.5]], vec![0.3], 0.0), &s).is_err());
    assert!(initial_level(&InitialLevelSpec::new(vec![[0.5, 0.5]], vec![], -1.0), &s).is_err());
    let two = InitialLevelSpec::new(vec![[-0.3, 0.4], [0.3, 0.4]], vec![0.15, 0.15], -1.0);
    assert!(two.eval([-0.3f64, 0.4]) < 0.0 && two.eval([0.3f64, 0.5]) < 0.0 && two.eval([0.0f64, 0.4]) > 0.0);
    let mut square = spec.clone();
    square.ord = NormOrder::Max;
    assert!(square.eval([0.75f64, 0.75]) < 0.0 && spec.eval([0.75f64, 0.75]) > 0.0);
}

#[test]
fn gradient_guard_examples() {
    assert_eq!(gradient_norm_guard([0.0f64, 0.0]), [0.0, 0.0]);
    let u = gradient_norm_guard([3.0f64, 4.0]);
    assert!((u[0] - 0.6).abs() < 1e-9 && (u[1] - 0.8).abs() < 1e-9);
    let t = gradient_norm_guard([1e-13f64, 0.0]);
    assert!(t[0].hypot(t[1]) < 1.0);
}

proptest! {
    #[test]
    fn tau_bounds(dt in 1e-4f64..1.0, speed in 0.0f64..10.0, h in 1e-4f64..0.5) {
        let t = tau(dt, speed * speed, h);
        prop_assert!(t > 0.0 && t <= dt / 2.0);
        if speed == 0.0 {
            prop_assert!((t - dt / 2.0).abs() <= 1e-15 * dt);
        } else {
            prop_assert!(t < dt / 2.0);
        }
    }

    #[test]
    fn ball_union_sign(x in 0.0f64..1.0, y in 0.0f64..1.0, r in 0.05f64..0.4, factor in prop::sample::select(vec![-2.0, -1.0, 1.0, 3.0])) {
        let spec = InitialLevelSpec::new(vec![[0.5, 0.5], [0.2, 0.8]], vec![r, 0.1], factor);
        let inside = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt() < r || ((x - 0.2).powi(2) + (y - 0.8).powi(2)).sqrt() < 0.1;
        let v: f64 = spec.eval([x, y]);
        if v != 0.0 {
            prop_assert_eq!(v * factor > 0.0, inside);
        }
    }

    #[test]
    fn zero_velocity_transport_is_identity(a in -2.0f64..2.0, b in -2.0f64..2.0, t in 1e-3f64..0.2, steps in 1usize..6) {
        let s = space(6);
        let v = s.sibling(2).unwrap();
        let phi = s.interpolate_scalar(|p| a * p[0] + b * p[1] * p[1] - 0.3);
        let out = transport(&s, &phi, &v.zeros(), s.mesh().element_size(), t, steps, false).unwrap();
        for (x, y) in phi.values.iter().zip(&out.values) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }
}
