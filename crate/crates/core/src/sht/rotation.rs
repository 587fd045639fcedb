//! Rotations of the sphere and rotation of band-limited fields by resampling.
//!
//! A rotated field `g(x) = f(R^{-1} x)` is evaluated from the coefficients of
//! `f` at the pre-image of every grid node and analyzed back. Rotation keeps
//! the degree, so the result is exact for band-limited input. Point evaluation
//! makes this O(L^4).

use num_complex::Complex64;

use super::grid::{GridField, QuadratureGrid};
use super::transform::Transform;
use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};

pub type Matrix3 = [[f64; 3]; 3];

/// A point on the unit sphere in colatitude/longitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub theta: f64,
    pub phi: f64,
}

impl SpherePoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn to_cartesian(self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn from_cartesian(v: [f64; 3]) -> Self {
        let rho = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let theta = rho.atan2(v[2]);
        let mut phi = v[1].atan2(v[0]);
        if phi < 0.0 {
            phi += 2.0 * std::f64::consts::PI;
        }
        Self { theta, phi }
    }
}

/// Rotation `R = Rz(alpha) Ry(beta) Rz(gamma)` (active, right-handed).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rotation {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn rz(a: f64) -> Matrix3 {
    let (s, c) = a.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn ry(b: f64) -> Matrix3 {
    let (s, c) = b.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub fn mat_mul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn apply(m: &Matrix3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

impl Rotation {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    /// Rotation by `angle` about the z axis.
    pub fn about_z(angle: f64) -> Self {
        Self::new(angle, 0.0, 0.0)
    }

    /// Rotation by `angle` about the y axis.
    pub fn about_y(angle: f64) -> Self {
        Self::new(0.0, angle, 0.0)
    }

    pub fn inverse(&self) -> Self {
        Self::new(-self.gamma, -self.beta, -self.alpha)
    }

    pub fn matrix(&self) -> Matrix3 {
        mat_mul(&mat_mul(&rz(self.alpha), &ry(self.beta)), &rz(self.gamma))
    }

    /// ZYZ angles of a rotation matrix, with `beta` in `[0, pi]`.
    pub fn from_matrix(m: &Matrix3) -> Self {
        let sb = (m[0][2] * m[0][2] + m[1][2] * m[1][2]).sqrt();
        let beta = sb.atan2(m[2][2]);
        if sb > 1e-12 {
            Self::new(m[1][2].atan2(m[0][2]), beta, m[2][1].atan2(-m[2][0]))
        } else if m[2][2] > 0.0 {
            Self::new(m[1][0].atan2(m[0][0]), 0.0, 0.0)
        } else {
            Self::new((-m[1][0]).atan2(m[1][1]), std::f64::consts::PI, 0.0)
        }
    }

    /// `self` applied after `other`.
    pub fn compose(&self, other: &Rotation) -> Self {
        Self::from_matrix(&mat_mul(&self.matrix(), &other.matrix()))
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        apply(&self.matrix(), v)
    }

    pub fn rotate_point(&self, p: SpherePoint) -> SpherePoint {
        SpherePoint::from_cartesian(self.apply(p.to_cartesian()))
    }
}

/// Coefficients of `x -> f(R^{-1} x)` where `f` has coefficients `a`.
pub fn rotate_field(a: &CoefficientSet, rotation: &Rotation, grid: &QuadratureGrid) -> Result<CoefficientSet> {
    rotate_with(&Transform::new(grid.clone()), a, rotation)
}

/// [`rotate_field`] with a prebuilt transform.
pub fn rotate_with(transform: &Transform, a: &CoefficientSet, rotation: &Rotation) -> Result<CoefficientSet> {
    let grid = transform.grid();
    if a.band_limit() > grid.band_limit() {
        return Err(Error::BandLimitOverflow {
            got: a.band_limit(),
            max: grid.band_limit(),
        });
    }
    let inv = rotation.inverse().matrix();
    let pre_images: Vec<(f64, f64)> = grid
        .nodes()
        .map(|(t, p)| {
            let q = SpherePoint::from_cartesian(apply(&inv, SpherePoint::new(t, p).to_cartesian()));
            (q.theta, q.phi)
        })
        .collect();
    let values: Vec<Complex64> = transform.evaluate_points(a, &pre_images);
    let field = GridField::new(grid.clone(), values)?;
    let out = transform.analyze(&field)?.resized(a.band_limit());
    Ok(if a.is_real_field() {
        out.with_real_field(true)
    } else {
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::degree_norms;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_rotation(rng: &mut impl Rng) -> Rotation {
        Rotation::new(
            rng.random_range(0.0..2.0 * PI),
            rng.random_range(0.0..PI),
            rng.random_range(0.0..2.0 * PI),
        )
    }

    fn close(a: &Matrix3, b: &Matrix3, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| (a[i][j] - b[i][j]).abs() <= tol))
    }

    #[test]
    fn inverse_and_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let id = Rotation::identity().matrix();
        for _ in 0..50 {
            let (r1, r2, r3) = (
                random_rotation(&mut rng),
                random_rotation(&mut rng),
                random_rotation(&mut rng),
            );
            assert!(close(&r1.compose(&r1.inverse()).matrix(), &id, 1e-13));
            let left = r1.compose(&r2).compose(&r3).matrix();
            let right = r1.compose(&r2.compose(&r3)).matrix();
            assert!(close(&left, &right, 1e-12));
            assert!(close(
                &Rotation::from_matrix(&r1.matrix()).matrix(),
                &r1.matrix(),
                1e-13
            ));
        }
        // degenerate beta
        let flip = Rotation::new(0.4, PI, 0.3);
        assert!(close(
            &Rotation::from_matrix(&flip.matrix()).matrix(),
            &flip.matrix(),
            1e-13
        ));
    }

    #[test]
    fn y_rotation_sends_pole_to_x_axis() {
        let p = Rotation::about_y(PI / 2.0).rotate_point(SpherePoint::new(0.0, 0.0));
        let v = p.to_cartesian();
        assert!((v[0] - 1.0).abs() < 1e-15 && v[1].abs() < 1e-15 && v[2].abs() < 1e-15);
    }

    #[test]
    fn identity_rotation_is_a_no_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = CoefficientSet::from_fn(6, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let out = rotate_field(&a, &Rotation::identity(), &QuadratureGrid::new(6)).unwrap();
        for (x, y) in a.as_slice().iter().zip(out.as_slice()) {
            assert!((x - y).norm() <= 1e-10);
        }
    }

    #[test]
    fn azimuthal_phase_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let a = CoefficientSet::from_fn(5, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let phi0 = 0.7;
        let out = rotate_field(&a, &Rotation::about_z(phi0), &QuadratureGrid::new(5)).unwrap();
        for ell in 0..=5usize {
            for m in -(ell as i64)..=ell as i64 {
                let expected = a[(ell, m)] * Complex64::from_polar(1.0, -(m as f64) * phi0);
                assert!((out[(ell, m)] - expected).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn dipole_rotated_onto_x_axis() {
        let alpha = (4.0 * PI / 3.0).sqrt();
        let mut a = CoefficientSet::zeros(1);
        a[(1, 0)] = Complex64::new(alpha, 0.0);
        let out = rotate_field(&a, &Rotation::about_y(PI / 2.0), &QuadratureGrid::new(1)).unwrap();
        let s = alpha / 2f64.sqrt();
        assert!((out[(1, 1)] - Complex64::new(-s, 0.0)).norm() < 1e-9);
        assert!((out[(1, -1)] - Complex64::new(s, 0.0)).norm() < 1e-9);
        assert!(out[(1, 0)].norm() < 1e-9);
        assert!(out[(0, 0)].norm() < 1e-9);
    }

    #[test]
    fn degree_norms_are_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let a = CoefficientSet::from_fn(10, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let grid = QuadratureGrid::new(10);
        for _ in 0..3 {
            let rot = random_rotation(&mut rng);
            let out = rotate_field(&a, &rot, &grid).unwrap();
            for (x, y) in degree_norms(&a).as_slice().iter().zip(degree_norms(&out).as_slice()) {
                assert_relative_eq!(*x, *y, max_relative = 1e-9);
            }
        }
    }
}
