//! Sparse, rotation-invariant regularization of band-limited fields on the
//! unit sphere.
//!
//! The observed field is given by its complex spherical-harmonic
//! coefficients. Regularization minimizes
//!
//! ```text
//! 0.5 * |a - a_o|_2^2 + lambda * sum_ell beta(ell) * A(ell)
//! ```
//!
//! where `A(ell)` is the Euclidean norm of the degree-`ell` block. The penalty
//! only sees degree norms, which rotations leave unchanged, so the solution
//! (a blockwise soft-threshold) commutes with rotations and keeps isotropic
//! random fields isotropic.
//!
//! Modules:
//!
//! * [`coeffs`]: coefficient storage, degree norms, and the per-coefficient
//!   l1 baseline;
//! * [`regularize`]: the closed-form solution and an error-driven lambda bound;
//! * [`frontier`]: the whole regularization path, and lambda from a
//!   discrepancy or norm budget;
//! * [`scaling`]: restoring the L2 norm after shrinkage;
//! * [`sht`]: exact transforms between coefficients and grid samples, and
//!   rotations;
//! * [`simulate`]: isotropic Gaussian fields and the isotropy harness;
//! * [`io`]: text file formats.

pub mod coeffs;
pub mod error;
pub mod frontier;
pub mod io;
pub mod regularize;
pub mod scaling;
pub mod sht;
pub mod simulate;

pub use coeffs::{
    coefficient_count, degree_norms, discrepancy, flat_index, hybrid_norm, l1_norm, l1_soft_threshold, unflatten,
    CoefficientSet, DegreeNorms, DegreeWeights,
};
pub use error::{Category, Error, Result};
pub use frontier::{build_frontier, Frontier, FrontierPoint, L0Frontier, L0Step, LambdaChoice, Segment};
pub use regularize::{lambda_bound_for_error, objective, regularize, ErrorBound, RegularizationResult};
pub use scaling::{optimal_scaling, scaled_field, scaling_factor, ScalingReport};
pub use sht::{
    analyze, field_errors, rotate_field, synthesize, FieldErrors, GridField, QuadratureGrid, Rotation, SpherePoint,
};
pub use simulate::{estimate_spectrum, sample_isotropic, scaled_spectrum, EnsembleSpec, PowerSpectrum};

pub use num_complex::Complex64;
