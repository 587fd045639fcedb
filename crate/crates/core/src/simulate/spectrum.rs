use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coeffs::{degree_norms, CoefficientSet};
use crate::error::{Error, Result};

/// Angular power spectrum `C(ell) = E|a(ell,m)|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    values: Vec<f64>,
}

impl PowerSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("power spectrum must not be empty".into()));
        }
        if let Some((ell, &c)) = values.iter().enumerate().find(|(_, c)| !(**c >= 0.0 && c.is_finite())) {
            return Err(Error::Domain(format!(
                "power spectrum C({ell}) must be finite and non-negative, got {c}"
            )));
        }
        Ok(Self { values })
    }

    /// `C(ell) = level` for every degree.
    pub fn flat(band_limit: usize, level: f64) -> Result<Self> {
        Self::new(vec![level; band_limit + 1])
    }

    /// `C(ell) = (ell + 1)^(-exponent)`.
    pub fn power_law(band_limit: usize, exponent: f64) -> Result<Self> {
        Self::new((0..=band_limit).map(|ell| ((ell + 1) as f64).powf(-exponent)).collect())
    }

    /// Synthetic stand-in for a CMB temperature spectrum: monopole and dipole
    /// removed, a decaying low-degree excess, and a flat tail in the expected
    /// degree norm, `E[A(ell)^2] = 1 + 4 exp(-ell/10)` for `ell >= 2`.
    pub fn cmb_like(band_limit: usize) -> Self {
        let values = (0..=band_limit)
            .map(|ell| {
                if ell < 2 {
                    0.0
                } else {
                    (1.0 + 4.0 * (-(ell as f64) / 10.0).exp()) / (2 * ell + 1) as f64
                }
            })
            .collect();
        Self { values }
    }

    #[inline]
    pub fn band_limit(&self) -> usize {
        self.values.len() - 1
    }

    #[inline]
    pub fn get(&self, ell: usize) -> f64 {
        self.values[ell]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// `sum_ell (2 ell + 1) C(ell)`, the expected squared L2 norm.
    pub fn total_power(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(ell, c)| (2 * ell + 1) as f64 * c)
            .sum()
    }

    /// `sqrt((2 ell + 1) C(ell))`, the root-mean-square degree norm.
    pub fn rms_degree_norms(&self) -> Vec<f64> {
        self.values
            .iter()
            .enumerate()
            .map(|(ell, c)| ((2 * ell + 1) as f64 * c).sqrt())
            .collect()
    }
}

/// Generator for realization `stream` of an ensemble seeded with `seed`.
///
/// ChaCha20 with a 64-bit stream selector; outputs are identical on every
/// platform for the same `(seed, stream)`.
pub fn realization_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn sample_isotropic(spectrum: &PowerSpectrum, seed: u64) -> CoefficientSet {
    sample_isotropic_with(spectrum, &mut realization_rng(seed, 0))
}

/// Draws a real Gaussian isotropic field: `a(ell,0) ~ N(0, C)`, and for
/// `m > 0` independent real and imaginary parts with variance `C/2`, with
/// `a(ell,-m) = (-1)^m conj(a(ell,m))`.
///
/// Normals are drawn in flat order for `m >= 0` even where `C(ell) = 0`, so
/// the stream layout does not depend on the spectrum.
pub fn sample_isotropic_with(spectrum: &PowerSpectrum, rng: &mut ChaCha20Rng) -> CoefficientSet {
    let band_limit = spectrum.band_limit();
    let mut a = CoefficientSet::zeros(band_limit);
    let mut normal = || -> f64 { StandardNormal.sample(rng) };
    for ell in 0..=band_limit {
        let c = spectrum.get(ell);
        let sd0 = c.sqrt();
        let sd = (c / 2.0).sqrt();
        let z = normal();
        if c > 0.0 {
            a[(ell, 0)] = Complex64::new(sd0 * z, 0.0);
        }
        for m in 1..=ell as i64 {
            let (x, y) = (normal(), normal());
            if c > 0.0 {
                let v = Complex64::new(sd * x, sd * y);
                a[(ell, m)] = v;
                a[(ell, -m)] = if m % 2 == 0 { v.conj() } else { -v.conj() };
            }
        }
    }
    a.with_real_field(true)
}

/// Realized estimate `A(ell)^2 / (2 ell + 1)`.
pub fn estimate_spectrum(a: &CoefficientSet) -> PowerSpectrum {
    PowerSpectrum {
        values: degree_norms(a)
            .as_slice()
            .iter()
            .enumerate()
            .map(|(ell, x)| x * x / (2 * ell + 1) as f64)
            .collect(),
    }
}

/// `D(ell) = ell (ell + 1) C(ell) / (2 pi)`.
pub fn scaled_spectrum(spectrum: &PowerSpectrum) -> Vec<f64> {
    spectrum
        .as_slice()
        .iter()
        .enumerate()
        .map(|(ell, c)| (ell * (ell + 1)) as f64 * c / (2.0 * PI))
        .collect()
}
