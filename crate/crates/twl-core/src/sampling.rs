//! Deterministic random sampling of points and tangent vectors on `X`.

use crate::geometry::AmbientPoint;
use crate::scalar::{Cx, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// The generator used throughout the crate; identical across platforms.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = rng.sample(StandardNormal);
    T::lit(x)
}

pub fn gaussian_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Cx<T>> {
    (0..n)
        .map(|_| Cx::new(gaussian(rng), gaussian(rng)))
        .collect()
}

/// A point distributed uniformly on `S^{2d+1}`.
pub fn random_point<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> AmbientPoint<T> {
    loop {
        let z = gaussian_vector::<T, R>(d + 1, rng);
        if let Ok(p) = AmbientPoint::normalized(z) {
            return p;
        }
    }
}

/// A Gaussian vector tangent to the sphere at `x`.
pub fn random_tangent<T: Real, R: Rng + ?Sized>(x: &AmbientPoint<T>, rng: &mut R) -> Vec<Cx<T>> {
    let v = gaussian_vector::<T, R>(x.dim() + 1, rng);
    crate::geometry::tangent_projection(x, &v)
}

/// A Gaussian vector complex-orthogonal to `x` (horizontal at `x`).
pub fn random_horizontal<T: Real, R: Rng + ?Sized>(
    x: &AmbientPoint<T>,
    rng: &mut R,
) -> Vec<Cx<T>> {
    let v = gaussian_vector::<T, R>(x.dim() + 1, rng);
    crate::geometry::horizontal_part(x, &v)
}
