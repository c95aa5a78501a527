//! Geometric phases of Gaussian states carried along curves in the real
//! symplectic group Sp(2n, ℝ).
//!
//! The crate is organised around a few layers:
//!
//! * [`symplectic`]: group and Lie-algebra types, block/interleaved orderings
//!   and the matrix exponential.
//! * [`sp4`]: closed-form exponential of `sp(4, ℝ)` generators.
//! * [`gaussian`]: covariance matrices, Weyl amplitudes and a numerical
//!   overlap built from the metaplectic integral kernel.
//! * [`phase`]: paths, the Berry connection and its line integral.
//! * [`squeeze`]: squeeze-operator circles with known phases.
//! * [`quadrature`] and [`sampling`]: numerical integration and seeded
//!   random inputs.

pub mod error;
pub mod gaussian;
pub mod phase;
pub mod quadrature;
pub mod sampling;
pub mod sp4;
pub mod squeeze;
pub mod symplectic;

pub use nalgebra;

pub use error::{Error, Result};
pub use gaussian::{
    covariance, covariance_quadrature, lambda_matrix, numeric_overlap_n1, weyl_amplitude,
    Convention, CovarianceMatrix, OscParams, OverlapGrid,
};
pub use phase::{
    check_canonical_invariance, connection_integrand, integrate_phase,
    integrate_phase_boundary_form, phase_b_zero, BoundaryPhaseResult, InvarianceCheck, PhaseResult,
    SympPath,
};
pub use quadrature::{QuadResult, QuadSpec};
pub use sp4::{
    closed_form_exp, coeff_closed, coeff_recurrence, generic_exp, squeeze_block_exp, ExpBranch,
    PowerCoefficients, Sp4Element, Sp4Generator,
};
pub use squeeze::{
    reference_phase, squeeze_b_block_n2, squeeze_circle_path, squeeze_lie_n1, squeeze_matrix_n1,
    squeeze_matrix_n2, SqueezeSpec,
};
pub use symplectic::{
    block_decompose, convert_ordering, exp_map, is_symplectic, BlockDecomposition, LieAlgElement,
    SympMatrix,
};
