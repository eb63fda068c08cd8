use proptest::prelude::*;
use shapeopt::ppl::{constraint_error, PplParams, PplState};

/// Independent evaluation of the update formulas for one constraint.
fn step(lambda: f64, mu: f64, delta: f64, c: f64) -> (f64, f64, f64, f64) {
    let (alpha, beta, r) = (2000.0, 0.5, 0.999);
    let d = lambda - mu;
    let mu1 = mu + delta * d / (d * d + 1.0);
    let lambda1 = mu1 + alpha / (1.0 + alpha * beta) * (c - 1.0);
    (lambda1, mu1, (lambda1 - mu1) / alpha, r * delta)
}

#[test]
fn defaults() {
    let s = PplState::init(1);
    assert_eq!((s.lambda[0], s.mu[0], s.z[0], s.delta), (0.0, 0.0, 0.0, 0.5));
    let p = PplParams::default();
    assert_eq!((p.r, p.delta0, p.alpha, p.beta), (0.999, 0.5, 2000.0, 0.5));
    assert!(PplState::init(0).is_disabled());
    assert_eq!(PplState::init(2).lambda, vec![0.0, 0.0]);
}

#[test]
fn satisfied_constraint_keeps_zero_multipliers() {
    let s = PplState::init(1).update(&[1.0]).unwrap();
    assert_eq!((s.lambda[0], s.mu[0], s.z[0]), (0.0, 0.0, 0.0));
    assert!((s.delta - 0.4995).abs() < 1e-15);
}

#[test]
fn two_step_hand_table() {
    let s1 = PplState::init(1).update(&[1.1]).unwrap();
    assert!((s1.lambda[0] - 2000.0 / 1001.0 * 0.1).abs() < 1e-12);
    assert_eq!(s1.mu[0], 0.0);
    assert!((s1.z[0] - 9.99000999000999e-5).abs() < 1e-12);
    assert!((s1.delta - 0.4995).abs() < 1e-15);

    let s2 = s1.update(&[1.05]).unwrap();
    let (l1, m1, _, d1) = step(0.0, 0.0, 0.5, 1.1);
    let (l2, m2, z2, d2) = step(l1, m1, d1, 1.05);
    assert!((s2.mu[0] - m2).abs() < 1e-9);
    assert!((s2.lambda[0] - l2).abs() < 1e-9);
    assert!((s2.z[0] - z2).abs() < 1e-9);
    assert!((s2.delta - d2).abs() < 1e-15);
    assert!((m2 - 0.0959691).abs() < 1e-6);
    assert!((l2 - 0.1958693).abs() < 1e-6);
}

#[test]
fn lagrangian_value() {
    let s = PplState { z: vec![0.0005], lambda: vec![1.0], mu: vec![0.0], delta: 0.5, params: PplParams::default() };
    let expected = 0.1 + 1.0 * 0.25 + 0.0 + 1000.0 * 0.0005f64.powi(2) + 0.25 * 1.0;
    assert!((s.lagrangian(0.1, &[1.25]) - expected).abs() < 1e-12);
    assert_eq!(PplState::init(0).lagrangian(0.7, &[]), 0.7);
}

#[test]
fn wrong_length_is_rejected() {
    assert!(PplState::init(1).update(&[1.0, 1.0]).is_err());
}

#[test]
fn invalid_params_are_rejected() {
    for p in [
        PplParams { r: 1.0, ..Default::default() },
        PplParams { alpha: 1.0, ..Default::default() },
        PplParams { beta: 0.0, ..Default::default() },
        PplParams { delta0: 0.0, ..Default::default() },
    ] {
        assert!(PplState::new(1, p).is_err(), "{p:?}");
    }
}

proptest! {
    #[test]
    fn update_invariants(cs in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 2), 1..20)) {
        let mut s = PplState::init(2);
        for c in &cs {
            let next = s.update(c).unwrap();
            prop_assert!(next.delta < s.delta);
            prop_assert!((next.delta - 0.999 * s.delta).abs() <= 1e-15);
            for k in 0..2 {
                prop_assert!((next.z[k] - (next.lambda[k] - next.mu[k]) / 2000.0).abs() <= 1e-15 * (1.0 + next.lambda[k].abs()));
            }
            s = next;
        }
    }

    #[test]
    fn matches_scalar_oracle(cs in prop::collection::vec(0.5f64..1.5, 1..12)) {
        let mut s = PplState::init(1);
        let (mut l, mut m, mut d) = (0.0, 0.0, 0.5);
        for &c in &cs {
            s = s.update(&[c]).unwrap();
            let (l1, m1, z1, d1) = step(l, m, d, c);
            prop_assert!((s.lambda[0] - l1).abs() < 1e-9 && (s.mu[0] - m1).abs() < 1e-9 && (s.z[0] - z1).abs() < 1e-12);
            (l, m, d) = (l1, m1, d1);
        }
    }

    #[test]
    fn constraint_error_is_max_violation(c in prop::collection::vec(-2.0f64..4.0, 0..5)) {
        let expected = c.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        prop_assert_eq!(constraint_error(&c), expected);
    }
}
