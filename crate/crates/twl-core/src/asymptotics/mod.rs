//! Leading-order predictions of the spectral asymptotics and numerical
//! checks of the Hessian lemmas used to derive them.

mod gamma;
pub mod hessian;
mod predictions;

pub use gamma::{gamma_integral, generic_a_phi, SIMPLEX_NODES, SLICE_NODES};
pub use hessian::{
    hessian_k_check, hessian_suite, hessian_upsilon_check, random_unitary, realify,
    signature_lemma_check, HessianReport, HessianSuite,
};
pub use predictions::*;
