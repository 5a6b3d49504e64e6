//! Equivariant spectra of Toeplitz blocks and their counting functions,
//! good cutoffs and smoothed spectral sums.

mod cutoff;
mod record;
mod sums;

pub use cutoff::{GoodCutoff, GRID_DIVISOR, TAIL_FRACTION};
pub use record::{
    compute_spectrum, entry_residual, entry_residuals, SpectrumEntry, SpectrumMetadata, SpectrumOptions,
    SpectrumRecord, RESIDUAL_FACTOR,
};
pub use sums::{
    counting, smoothed_kernel, smoothed_trace, tauberian_integral, weyl_fit, SpectralSum,
    COUNTING_SLACK,
};

/// Builds the cutoff `χ = γ∗γ` for `ε`.
pub fn good_cutoff(epsilon: f64) -> crate::Result<GoodCutoff> {
    GoodCutoff::new(epsilon)
}
