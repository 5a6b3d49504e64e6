//! The floating-point abstraction shared by every numerical routine.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar type accepted by the library (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` constant into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant")
    }

    /// Converts a count into `Self`.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }

    /// A tolerance of `base`, floored at 64 machine epsilons so that
    /// thresholds written for `f64` remain meaningful in `f32`.
    fn tol(base: f64) -> Self {
        Self::lit(base).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Lossy conversion used for error reporting and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`].
pub type Cx<T> = Complex<T>;

/// Hermitian product `⟨a, b⟩ = Σ a_j conj(b_j)`.
pub fn herm<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> Cx<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Cx::new(T::zero(), T::zero()), |acc, (x, y)| acc + x * y.conj())
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr<T: Real>(a: &[Cx<T>]) -> T {
    a.iter().map(|c| c.norm_sqr()).sum()
}

/// Euclidean norm of a complex vector.
pub fn norm<T: Real>(a: &[Cx<T>]) -> T {
    norm_sqr(a).sqrt()
}

/// `a + s·b` for complex vectors.
pub fn axpy<T: Real>(a: &[Cx<T>], s: Cx<T>, b: &[Cx<T>]) -> Vec<Cx<T>> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Multiplies a complex vector by a complex scalar.
pub fn scale<T: Real>(s: Cx<T>, a: &[Cx<T>]) -> Vec<Cx<T>> {
    a.iter().map(|x| s * x).collect()
}

/// The imaginary unit.
pub fn i_unit<T: Real>() -> Cx<T> {
    Cx::new(T::zero(), T::one())
}

/// Builds a complex number from a real part.
pub fn re<T: Real>(x: T) -> Cx<T> {
    Cx::new(x, T::zero())
}
