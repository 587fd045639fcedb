//! Exact band-limited spherical-harmonic transforms on a Gauss-Legendre grid.

mod grid;
pub mod legendre;
mod rotation;
mod transform;

pub use grid::{field_errors, FieldErrors, GridField, QuadratureGrid};
pub use rotation::{mat_mul, rotate_field, rotate_with, Matrix3, Rotation, SpherePoint};
pub use transform::{
    analyze, evaluate, spherical_harmonic, spherical_harmonics, synthesize, LongitudeMethod, Transform,
};
