//! Level-set representation `Ω = {φ < 0}`: initialization, transport and
//! reinitialization.

mod reinit;
mod transport;

pub use reinit::reinitialize;
pub use transport::{transport, tau};

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::fem::{FemField, FunctionSpace};
use crate::scalar::{Real, Vec2};

/// Scalar P1 level set together with the length scale `h` of its
/// stabilized evolution schemes (`RectMesh::element_size`).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetField<T> {
    pub phi: FemField<T>,
    pub h: T,
}

impl<T: Real> LevelSetField<T> {
    pub fn new(space: &FunctionSpace<T>, phi: FemField<T>) -> Result<Self> {
        space.check(&phi)?;
        if !phi.is_finite() {
            return Err(crate::error::contract("level set has non-finite values"));
        }
        Ok(Self { phi, h: space.mesh().element_size() })
    }
}

/// Norm used for the ball distances of the initial guess.
/// Written `ord = 2` or `ord = "inf"` in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormOrder {
    #[default]
    Euclidean,
    Max,
}

impl Serialize for NormOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormOrder::Euclidean => s.serialize_i64(2),
            NormOrder::Max => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NormOrder {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(2) => Ok(NormOrder::Euclidean),
            Raw::Str(s) if s == "2" => Ok(NormOrder::Euclidean),
            Raw::Str(s) if s == "inf" => Ok(NormOrder::Max),
            _ => Err(serde::de::Error::custom("ord must be 2 or \"inf\"")),
        }
    }
}

/// Union of balls, `φ⁰(x) = factor · max_k (r_k − |x − c_k|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialLevelSpec {
    pub centers: Vec<[f64; 2]>,
    pub radii: Vec<f64>,
    #[serde(default = "one")]
    pub factor: f64,
    #[serde(default)]
    pub ord: NormOrder,
}

fn one() -> f64 {
    1.0
}

impl InitialLevelSpec {
    pub fn new(centers: Vec<[f64; 2]>, radii: Vec<f64>, factor: f64) -> Self {
        Self { centers, radii, factor, ord: NormOrder::Euclidean }
    }

    pub fn validate(&self) -> Result<()> {
        if self.centers.is_empty() || self.centers.len() != self.radii.len() {
            return Err(config(format!(
                "initial level: {} centers and {} radii (need equal, at least one)",
                self.centers.len(),
                self.radii.len()
            )));
        }
        if let Some(r) = self.radii.iter().find(|r| !(**r > 0.0)) {
            return Err(config(format!("initial level: radius {r} is not positive")));
        }
        if self.factor == 0.0 || !self.factor.is_finite() {
            return Err(config("initial level: factor must be nonzero"));
        }
        Ok(())
    }

    pub fn eval<T: Real>(&self, x: Vec2<T>) -> T {
        let mut best = T::neg_infinity();
        for (c, &r) in self.centers.iter().zip(&self.radii) {
            let dx = (x[0] - T::lit(c[0])).abs();
            let dy = (x[1] - T::lit(c[1])).abs();
            let d = match self.ord {
                NormOrder::Euclidean => (dx * dx + dy * dy).sqrt(),
                NormOrder::Max => dx.max(dy),
            };
            best = best.max(T::lit(r) - d);
        }
        T::lit(self.factor) * best
    }
}

pub fn initial_level<T: Real>(spec: &InitialLevelSpec, space: &FunctionSpace<T>) -> Result<LevelSetField<T>> {
    spec.validate()?;
    LevelSetField::new(space, space.interpolate_scalar(|x| spec.eval(x)))
}

/// `p / √(|p|² + ε²)` with `ε = 1e-12 (1 + |p|)`.
#[inline]
pub fn gradient_norm_guard<T: Real>(p: Vec2<T>) -> Vec2<T> {
    let n2 = p[0] * p[0] + p[1] * p[1];
    let eps = T::lit(1e-12) * (T::one() + n2.sqrt());
    let d = (n2 + eps * eps).sqrt();
    [p[0] / d, p[1] / d]
}

/// Piecewise-linear zero set: one segment per triangle crossed by `φ = 0`.
pub fn zero_set<T: Real>(space: &FunctionSpace<T>, phi: &FemField<T>) -> Vec<[Vec2<T>; 2]> {
    let mut out = Vec::new();
    for cell in space.cells() {
        let v = phi.local(&cell.vertices);
        let mut pts: Vec<Vec2<T>> = Vec::with_capacity(3);
        for e in 0..3 {
            let (a, b) = (e, (e + 1) % 3);
            let (fa, fb) = (v[a], v[b]);
            let crosses = (fa < T::zero()) != (fb < T::zero());
            if crosses {
                let s = fa / (fa - fb);
                let (pa, pb) = (cell.coords[a], cell.coords[b]);
                pts.push([pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]);
            }
        }
        if pts.len() == 2 {
            out.push([pts[0], pts[1]]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::RectMesh;
    use std::sync::Arc;

    fn space(n: usize) -> FunctionSpace<f64> {
        FunctionSpace::scalar(Arc::new(RectMesh::build([0.0, 0.0, 1.0, 1.0], n, n).unwrap())).unwrap()
    }

    #[test]
    fn ball_values() {
        let s = InitialLevelSpec::new(vec![[0.5, 0.5]], vec![0.3], -1.0);
        assert!((s.eval([0.5, 0.5]) + 0.3f64).abs() < 1e-15);
        assert!(s.eval::<f64>([0.5, 0.8]).abs() < 1e-15);
        let s = InitialLevelSpec::new(vec![[0.5, 0.5]], vec![0.3], 1.0);
        assert!((s.eval([0.5, 0.5]) - 0.3f64).abs() < 1e-15);
    }

    #[test]
    fn two_balls_union() {
        let s = InitialLevelSpec::new(vec![[-0.3, 0.4], [0.3, 0.4]], vec![0.15, 0.15], -1.0);
        for &(x, y) in &[(-0.3, 0.4), (0.3, 0.4), (0.4, 0.45), (-0.2, 0.35)] {
            assert!(s.eval::<f64>([x, y]) < 0.0);
        }
        for &(x, y) in &[(0.0, 0.4), (0.3, 0.6), (-0.3, 0.2)] {
            assert!(s.eval::<f64>([x, y]) > 0.0);
        }
    }

    #[test]
    fn max_norm_ball() {
        let s = InitialLevelSpec { centers: vec![[0.0, 0.0]], radii: vec![1.0], factor: 1.0, ord: NormOrder::Max };
        assert!((s.eval::<f64>([0.5, 0.9]) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs() {
        assert!(InitialLevelSpec::new(vec![[0.0, 0.0]], vec![0.3], 0.0).validate().is_err());
        assert!(InitialLevelSpec::new(vec![], vec![], 1.0).validate().is_err());
        assert!(InitialLevelSpec::new(vec![[0.0, 0.0]], vec![-0.3], 1.0).validate().is_err());
        assert!(InitialLevelSpec::new(vec![[0.0, 0.0]], vec![0.3, 0.1], 1.0).validate().is_err());
    }

    #[test]
    fn guard_values() {
        assert_eq!(gradient_norm_guard([0.0f64, 0.0]), [0.0, 0.0]);
        let g = gradient_norm_guard([3.0f64, 4.0]);
        assert!((g[0] - 0.6).abs() < 1e-9 && (g[1] - 0.8).abs() < 1e-9);
        let g = gradient_norm_guard([1e-13f64, 0.0]);
        assert!((g[0] * g[0] + g[1] * g[1]).sqrt() < 1.0);
    }

    #[test]
    fn zero_set_of_line() {
        let s = space(8);
        let phi = s.interpolate_scalar(|p| p[0] - 0.53);
        let segs = zero_set(&s, &phi);
        assert!(!segs.is_empty());
        for seg in &segs {
            for p in seg {
                assert!((p[0] - 0.53).abs() < 1e-12);
            }
        }
        let len: f64 = segs.iter().map(|[a, b]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()).sum();
        assert!((len - 1.0).abs() < 1e-12);
    }

    #[test]
    fn initial_level_on_space() {
        let s = space(4);
        let ls = initial_level(&InitialLevelSpec::new(vec![[0.5, 0.5]], vec![0.3], -1.0), &s).unwrap();
        assert_eq!(ls.phi.len(), 25);
        assert!((ls.h - s.mesh().element_size()).abs() == 0.0);
        assert!(ls.phi.values[12] < 0.0);
    }
}
