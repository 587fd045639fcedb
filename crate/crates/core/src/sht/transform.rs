//! Synthesis and analysis between coefficients and grid samples.
//!
//! Both directions separate into an associated-Legendre sum per ring and a
//! Fourier sum over longitudes. The Fourier sum runs through an FFT by default;
//! [`LongitudeMethod::Direct`] evaluates it term by term.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{GridField, QuadratureGrid};
use super::legendre::{tri_len, LegendreRecurrence};
use crate::coeffs::{flat_index, CoefficientSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LongitudeMethod {
    #[default]
    Fft,
    Direct,
}

/// Orthonormal complex spherical harmonic with Condon-Shortley phase.
pub fn spherical_harmonic(ell: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() as usize > ell {
        return Err(Error::InvalidIndex { ell: ell as i64, m });
    }
    let rec = LegendreRecurrence::new(ell);
    let table = rec.table(theta);
    let mu = m.unsigned_abs() as usize;
    let p = table[LegendreRecurrence::index(ell, ell, mu)];
    let y = Complex64::from_polar(p, mu as f64 * phi);
    Ok(if m >= 0 {
        y
    } else if mu.is_multiple_of(2) {
        y.conj()
    } else {
        -y.conj()
    })
}

/// All `Y(ell, m, theta, phi)` for `ell <= band_limit`, in flat coefficient order.
pub fn spherical_harmonics(band_limit: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let rec = LegendreRecurrence::new(band_limit);
    let table = rec.table(theta);
    let mut out = vec![Complex64::new(0.0, 0.0); (band_limit + 1) * (band_limit + 1)];
    for mu in 0..=band_limit {
        let phase = Complex64::from_polar(1.0, mu as f64 * phi);
        let sign = if mu % 2 == 0 { 1.0 } else { -1.0 };
        for ell in mu..=band_limit {
            let y = phase * table[LegendreRecurrence::index(band_limit, ell, mu)];
            out[flat_index(ell, mu as i64)] = y;
            if mu > 0 {
                out[flat_index(ell, -(mu as i64))] = y.conj() * sign;
            }
        }
    }
    out
}

/// Evaluates the truncated expansion at one point.
pub fn evaluate(a: &CoefficientSet, theta: f64, phi: f64) -> Complex64 {
    let big_l = a.band_limit();
    let rec = LegendreRecurrence::new(big_l);
    evaluate_with(
        &rec,
        a,
        theta.cos(),
        theta.sin().abs(),
        phi,
        &mut vec![0.0; tri_len(big_l)],
    )
}

fn evaluate_with(
    rec: &LegendreRecurrence,
    a: &CoefficientSet,
    cos_theta: f64,
    sin_theta: f64,
    phi: f64,
    table: &mut [f64],
) -> Complex64 {
    let big_l = rec.band_limit();
    rec.fill(cos_theta, sin_theta, table);
    let mut total = Complex64::new(0.0, 0.0);
    for mu in 0..=big_l.min(a.band_limit()) {
        let (mut pos, mut neg) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for ell in mu..=a.band_limit() {
            let p = table[LegendreRecurrence::index(big_l, ell, mu)];
            pos += a[(ell, mu as i64)] * p;
            if mu > 0 {
                neg += a[(ell, -(mu as i64))] * p;
            }
        }
        let phase = Complex64::from_polar(1.0, mu as f64 * phi);
        total += pos * phase;
        if mu > 0 {
            let sign = if mu % 2 == 0 { 1.0 } else { -1.0 };
            total += neg * phase.conj() * sign;
        }
    }
    total
}

/// Reusable transform for one grid.
#[derive(Clone)]
pub struct Transform {
    grid: QuadratureGrid,
    recurrence: LegendreRecurrence,
    method: LongitudeMethod,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform")
            .field("band_limit", &self.grid.band_limit())
            .field("method", &self.method)
            .finish()
    }
}

impl Transform {
    pub fn new(grid: QuadratureGrid) -> Self {
        Self::with_method(grid, LongitudeMethod::Fft)
    }

    pub fn with_method(grid: QuadratureGrid, method: LongitudeMethod) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n_phi());
        let inverse = planner.plan_fft_inverse(grid.n_phi());
        Self {
            recurrence: LegendreRecurrence::new(grid.band_limit()),
            grid,
            method,
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// `sum_k coeffs[idx] exp(+2 pi i idx k / N)` in place.
    fn longitude_synthesis(&self, buf: &mut [Complex64]) {
        match self.method {
            LongitudeMethod::Fft => self.inverse.process(buf),
            LongitudeMethod::Direct => direct_dft(buf, 1.0),
        }
    }

    /// `sum_k values[k] exp(-2 pi i idx k / N)` in place.
    fn longitude_analysis(&self, buf: &mut [Complex64]) {
        match self.method {
            LongitudeMethod::Fft => self.forward.process(buf),
            LongitudeMethod::Direct => direct_dft(buf, -1.0),
        }
    }

    pub fn synthesize(&self, a: &CoefficientSet) -> Result<GridField> {
        let big_l = self.grid.band_limit();
        if a.band_limit() > big_l {
            return Err(Error::BandLimitOverflow {
                got: a.band_limit(),
                max: big_l,
            });
        }
        let n_phi = self.grid.n_phi();
        let mut values = Vec::with_capacity(self.grid.len());
        let mut table = vec![0.0; tri_len(big_l)];
        let mut buf = vec![Complex64::new(0.0, 0.0); n_phi];
        for j in 0..self.grid.n_theta() {
            self.recurrence
                .fill(self.grid.cos_theta()[j], self.grid.sin_theta()[j], &mut table);
            buf.fill(Complex64::new(0.0, 0.0));
            for mu in 0..=a.band_limit() {
                let sign = if mu % 2 == 0 { 1.0 } else { -1.0 };
                for ell in mu..=a.band_limit() {
                    let p = table[LegendreRecurrence::index(big_l, ell, mu)];
                    buf[mu] += a[(ell, mu as i64)] * p;
                    if mu > 0 {
                        buf[n_phi - mu] += a[(ell, -(mu as i64))] * (sign * p);
                    }
                }
            }
            self.longitude_synthesis(&mut buf);
            values.extend_from_slice(&buf);
        }
        GridField::new(self.grid.clone(), values)
    }

    /// Quadrature of `f conj(Y(ell, m))` over the sphere for `ell <= L`.
    pub fn analyze(&self, f: &GridField) -> Result<CoefficientSet> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch(format!(
                "field on band limit {} grid, transform on {}",
                f.grid().band_limit(),
                self.grid.band_limit()
            )));
        }
        let big_l = self.grid.band_limit();
        let n_phi = self.grid.n_phi();
        let mut a = CoefficientSet::zeros(big_l);
        let mut table = vec![0.0; tri_len(big_l)];
        let mut buf = vec![Complex64::new(0.0, 0.0); n_phi];
        for j in 0..self.grid.n_theta() {
            self.recurrence
                .fill(self.grid.cos_theta()[j], self.grid.sin_theta()[j], &mut table);
            buf.copy_from_slice(f.ring(j));
            self.longitude_analysis(&mut buf);
            let w = self.grid.area_weight(j);
            for mu in 0..=big_l {
                let sign = if mu % 2 == 0 { 1.0 } else { -1.0 };
                let pos = buf[mu] * w;
                let neg = if mu > 0 { buf[n_phi - mu] * (w * sign) } else { pos };
                for ell in mu..=big_l {
                    let p = table[LegendreRecurrence::index(big_l, ell, mu)];
                    a[(ell, mu as i64)] += pos * p;
                    if mu > 0 {
                        a[(ell, -(mu as i64))] += neg * p;
                    }
                }
            }
        }
        Ok(a)
    }

    /// Samples the expansion at arbitrary points.
    pub fn evaluate_points(&self, a: &CoefficientSet, points: &[(f64, f64)]) -> Vec<Complex64> {
        let rec = if a.band_limit() == self.grid.band_limit() {
            self.recurrence.clone()
        } else {
            LegendreRecurrence::new(a.band_limit())
        };
        let mut table = vec![0.0; tri_len(rec.band_limit())];
        points
            .iter()
            .map(|&(theta, phi)| evaluate_with(&rec, a, theta.cos(), theta.sin().abs(), phi, &mut table))
            .collect()
    }
}

fn direct_dft(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    let input = buf.to_vec();
    for (k, out) in buf.iter_mut().enumerate() {
        *out = input
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                // reduce the phase index first so the angle stays in [0, 2 pi)
                let r = (idx * k) % n;
                c * Complex64::from_polar(1.0, sign * 2.0 * std::f64::consts::PI * r as f64 / n as f64)
            })
            .sum();
    }
}

/// Samples the expansion of `a` on `grid`.
pub fn synthesize(a: &CoefficientSet, grid: &QuadratureGrid) -> Result<GridField> {
    Transform::new(grid.clone()).synthesize(a)
}

/// Coefficients of a band-limited grid field; inverse of [`synthesize`].
pub fn analyze(f: &GridField) -> Result<CoefficientSet> {
    Transform::new(f.grid().clone()).analyze(f)
}
