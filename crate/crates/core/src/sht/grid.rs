use std::f64::consts::PI;

use num_complex::Complex64;

use super::legendre::gauss_legendre;
use crate::error::{Error, Result};

/// Gauss-Legendre rings in `cos theta` times equispaced longitudes.
///
/// `L + 1` rings and `2L + 1` longitudes integrate `Y(l,m) conj(Y(l',m'))`
/// exactly for `l, l' <= L`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    band_limit: usize,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    theta: Vec<f64>,
    weights: Vec<f64>,
    n_phi: usize,
}

impl QuadratureGrid {
    pub fn new(band_limit: usize) -> Self {
        let (cos_theta, weights) = gauss_legendre(band_limit + 1);
        let sin_theta = cos_theta.iter().map(|&x| ((1.0 - x) * (1.0 + x)).sqrt()).collect();
        let theta = cos_theta.iter().map(|x| x.acos()).collect();
        Self {
            band_limit,
            cos_theta,
            sin_theta,
            theta,
            weights,
            n_phi: 2 * band_limit + 1,
        }
    }

    #[inline]
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    #[inline]
    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    #[inline]
    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_theta
    }

    /// Gauss-Legendre weights in `cos theta`; they sum to 2.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_phi as f64
    }

    /// Surface weight of node `(j, k)`; all weights sum to `4 pi`.
    #[inline]
    pub fn area_weight(&self, j: usize) -> f64 {
        self.weights[j] * 2.0 * PI / self.n_phi as f64
    }

    /// Nodes `(theta, phi)` in row-major (ring-major) order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.n_theta()).flat_map(move |j| (0..self.n_phi).map(move |k| (self.theta[j], self.phi(k))))
    }
}

/// Field samples on a [`QuadratureGrid`], ring-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: QuadratureGrid,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn new(grid: QuadratureGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: QuadratureGrid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: QuadratureGrid, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let values = grid.nodes().map(|(t, p)| f(t, p)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.grid.n_phi() + k]
    }

    pub fn ring(&self, j: usize) -> &[Complex64] {
        let n = self.grid.n_phi();
        &self.values[j * n..(j + 1) * n]
    }

    /// Largest imaginary part relative to the largest modulus.
    pub fn relative_imaginary(&self) -> f64 {
        let max = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / max
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldErrors {
    pub l2: f64,
    pub linf: f64,
}

/// L2 error by the grid quadrature and L-infinity error over the grid nodes.
pub fn field_errors(f: &GridField, g: &GridField) -> Result<FieldErrors> {
    if f.grid.band_limit != g.grid.band_limit {
        return Err(Error::GridMismatch(format!(
            "band limits {} and {}",
            f.grid.band_limit, g.grid.band_limit
        )));
    }
    let grid = &f.grid;
    let mut sq = 0.0;
    let mut linf: f64 = 0.0;
    for j in 0..grid.n_theta() {
        let w = grid.area_weight(j);
        let ring: f64 = f
            .ring(j)
            .iter()
            .zip(g.ring(j))
            .map(|(a, b)| {
                let d = (a - b).norm();
                linf = linf.max(d);
                d * d
            })
            .sum();
        sq += w * ring;
    }
    Ok(FieldErrors { l2: sq.sqrt(), linf })
}
