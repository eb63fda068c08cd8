use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the solvers are generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest relative tolerance the iterative solvers can meaningfully reach.
    #[inline]
    fn solver_floor() -> Self {
        Self::epsilon() * Self::lit(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Vec2<T> = [T; 2];
pub type Mat2<T> = [[T; 2]; 2];

#[inline]
pub fn dot2<T: Real>(a: Vec2<T>, b: Vec2<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm2<T: Real>(a: Vec2<T>) -> T {
    dot2(a, a).sqrt()
}

#[inline]
pub fn ddot<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> T {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

#[inline]
pub fn mat_zero<T: Real>() -> Mat2<T> {
    [[T::zero(); 2]; 2]
}

#[inline]
pub fn mat_identity<T: Real>(scale: T) -> Mat2<T> {
    [[scale, T::zero()], [T::zero(), scale]]
}

#[inline]
pub fn mat_add<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

#[inline]
pub fn mat_scale<T: Real>(a: &Mat2<T>, s: T) -> Mat2<T> {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

#[inline]
pub fn mat_transpose<T: Real>(a: &Mat2<T>) -> Mat2<T> {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

#[inline]
pub fn mat_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut out = mat_zero();
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[inline]
pub fn mat_vec<T: Real>(a: &Mat2<T>, v: Vec2<T>) -> Vec2<T> {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// `a ⊗ b`, i.e. the matrix `a bᵀ`.
#[inline]
pub fn outer<T: Real>(a: Vec2<T>, b: Vec2<T>) -> Mat2<T> {
    [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]]
}

#[inline]
pub fn trace<T: Real>(a: &Mat2<T>) -> T {
    a[0][0] + a[1][1]
}
