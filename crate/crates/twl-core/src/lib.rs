//! Numerics for first-order Berezin–Toeplitz operators on the circle bundle
//! `X = S^{2d+1} → M = CP^d`: Hardy-space blocks, Toeplitz assembly,
//! circle-action isotypes, equivariant spectra, their predicted scaling
//! asymptotics and the contact dynamics of the symbol.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix `f64`.

pub mod asymptotics;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod hardy;
pub mod linalg;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod spectral;
pub mod symmetry;
pub mod toeplitz;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type AmbientPoint64 = geometry::AmbientPoint<f64>;
pub type TangentVectorX64 = geometry::TangentVectorX<f64>;
pub type HeisenbergChart64 = geometry::HeisenbergChart<f64>;
pub type TangentSplit64 = geometry::TangentSplit<f64>;
pub type HardyBlock64 = hardy::HardyBlock<f64>;
pub type ToeplitzBlock64 = toeplitz::ToeplitzBlock<f64>;
pub type EffectiveVolumes64 = symmetry::EffectiveVolumes<f64>;
pub type SpectrumRecord64 = spectral::SpectrumRecord<f64>;
pub type FlowState64 = dynamics::FlowState<f64>;
