//! Proximal-perturbed Lagrangian handling of normalized equality
//! constraints `C(Ω) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{config, contract, Result};
use crate::scalar::Real;
use crate::velocity::DerivativePair;

/// Update parameters `r ∈ (0,1)`, `α > 1`, `β ∈ (0,1)` and initial
/// decrement `δ⁰ ∈ (0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PplParams {
    #[serde(default = "d_r")]
    pub r: f64,
    #[serde(default = "d_delta")]
    pub delta0: f64,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_beta")]
    pub beta: f64,
}

fn d_r() -> f64 {
    0.999
}
fn d_delta() -> f64 {
    0.5
}
fn d_alpha() -> f64 {
    2000.0
}
fn d_beta() -> f64 {
    0.5
}

impl Default for PplParams {
    fn default() -> Self {
        Self { r: d_r(), delta0: d_delta(), alpha: d_alpha(), beta: d_beta() }
    }
}

impl PplParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(config(format!("ppl.r = {} must lie in (0, 1)", self.r)));
        }
        if !(self.delta0 > 0.0 && self.delta0 <= 1.0) {
            return Err(config(format!("ppl.delta0 = {} must lie in (0, 1]", self.delta0)));
        }
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return Err(config(format!("ppl.alpha = {} must be > 1", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(config(format!("ppl.beta = {} must lie in (0, 1)", self.beta)));
        }
        Ok(())
    }
}

/// Perturbation `z`, multipliers `λ`, `μ` and decrement `δ`. With no
/// constraints the vectors are empty and the state is inert.
#[derive(Debug, Clone, PartialEq)]
pub struct PplState {
    pub z: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub delta: f64,
    pub params: PplParams,
}

impl PplState {
    pub fn new(nc: usize, params: PplParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { z: vec![0.0; nc], lambda: vec![0.0; nc], mu: vec![0.0; nc], delta: params.delta0, params })
    }

    pub fn init(nc: usize) -> Self {
        Self::new(nc, PplParams::default()).expect("default parameters are valid")
    }

    pub fn constraint_count(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_disabled(&self) -> bool {
        self.lambda.is_empty()
    }

    /// One multiplier update from the constraint values `c`.
    pub fn update(&self, c: &[f64]) -> Result<PplState> {
        if c.len() != self.constraint_count() {
            return Err(contract(format!("ppl update: {} constraint values for {} constraints", c.len(), self.constraint_count())));
        }
        if self.is_disabled() {
            return Ok(self.clone());
        }
        let PplParams { r, alpha, beta, .. } = self.params;
        let diff: Vec<f64> = self.lambda.iter().zip(&self.mu).map(|(l, m)| l - m).collect();
        let norm2: f64 = diff.iter().map(|d| d * d).sum();
        let step = self.delta / (norm2 + 1.0);
        let mu: Vec<f64> = self.mu.iter().zip(&diff).map(|(m, d)| m + step * d).collect();
        let gain = alpha / (1.0 + alpha * beta);
        let lambda: Vec<f64> = mu.iter().zip(c).map(|(m, ci)| m + gain * (ci - 1.0)).collect();
        let z = lambda.iter().zip(&mu).map(|(l, m)| (l - m) / alpha).collect();
        Ok(PplState { z, lambda, mu, delta: r * self.delta, params: self.params })
    }

    /// `L = J + ⟨λ, C−1⟩ + ⟨μ, z⟩ + α/2 |z|² + β/2 |λ−μ|²`.
    pub fn lagrangian(&self, j: f64, c: &[f64]) -> f64 {
        if self.is_disabled() {
            return j;
        }
        let PplParams { alpha, beta, .. } = self.params;
        let mut l = j;
        for k in 0..self.constraint_count() {
            let (lk, mk, zk) = (self.lambda[k], self.mu[k], self.z[k]);
            l += lk * (c[k] - 1.0) + mk * zk + 0.5 * alpha * zk * zk + 0.5 * beta * (lk - mk) * (lk - mk);
        }
        l
    }
}

/// `S = Sᴶ + Σ λ_k Sᶜ_k`.
pub fn combine_derivatives<'a, T: Real>(
    sj: DerivativePair<'a, T>,
    sc: Vec<DerivativePair<'a, T>>,
    lambda: &[f64],
) -> Result<DerivativePair<'a, T>> {
    if sc.len() != lambda.len() {
        return Err(contract(format!("{} constraint tensors for {} multipliers", sc.len(), lambda.len())));
    }
    Ok(sc.into_iter().zip(lambda).fold(sj, |acc, (s, &l)| acc.plus_scaled(T::lit(l), s)))
}

/// Largest constraint violation `|C − 1|_∞`, zero without constraints.
pub fn constraint_error(c: &[f64]) -> f64 {
    c.iter().fold(0.0, |m, ci| m.max((ci - 1.0).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Cell;
    use crate::scalar::{mat_identity, Mat2};

    #[test]
    fn init_defaults() {
        let s = PplState::init(2);
        assert_eq!(s.lambda, vec![0.0; 2]);
        assert_eq!(s.mu, vec![0.0; 2]);
        assert_eq!(s.z, vec![0.0; 2]);
        assert_eq!(s.delta, 0.5);
        assert!(PplState::init(0).is_disabled());
    }

    #[test]
    fn satisfied_constraint_keeps_zero() {
        let s = PplState::init(1).update(&[1.0]).unwrap();
        assert_eq!(s.lambda, vec![0.0]);
        assert_eq!(s.mu, vec![0.0]);
        assert_eq!(s.z, vec![0.0]);
        assert!((s.delta - 0.4995).abs() < 1e-15);
    }

    #[test]
    fn disabled_lagrangian_is_cost() {
        let s = PplState::init(0);
        assert_eq!(s.lagrangian(1.25, &[]), 1.25);
        assert_eq!(s.update(&[]).unwrap(), s);
    }

    #[test]
    fn invalid_params() {
        assert!(PplState::new(1, PplParams { r: 1.0, ..Default::default() }).is_err());
        assert!(PplState::new(1, PplParams { alpha: 0.5, ..Default::default() }).is_err());
        assert!(PplState::new(1, PplParams { beta: 1.0, ..Default::default() }).is_err());
        assert!(PplState::new(1, PplParams { delta0: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn combine_linear() {
        let s = combine_derivatives::<f64>(DerivativePair::zero(), vec![DerivativePair::from_s1(|_, _| mat_identity(1.0))], &[2.0])
            .unwrap();
        let c = Cell::new(0, [0, 1, 2], [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let m: Mat2<f64> = s.s1_at(&c, 1);
        assert_eq!(m, mat_identity(2.0));
        assert!(combine_derivatives::<f64>(DerivativePair::zero(), vec![], &[1.0]).is_err());
    }
}
