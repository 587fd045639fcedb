//! Fixtures shared by the benchmarks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphreg::{sample_isotropic, CoefficientSet, DegreeWeights, PowerSpectrum};

/// Band limits swept by the benchmarks.
pub const BAND_LIMITS: [usize; 4] = [16, 32, 64, 128];

/// Real field drawn from the CMB-like spectrum.
pub fn cmb_field(band_limit: usize, seed: u64) -> CoefficientSet {
    sample_isotropic(&PowerSpectrum::cmb_like(band_limit), seed)
}

/// Complex coefficients with independent uniform parts, decaying as 1/(ell+1).
pub fn random_coefficients(band_limit: usize, seed: u64) -> CoefficientSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CoefficientSet::from_fn(band_limit, |ell, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) / (ell + 1) as f64
    })
}

/// Lambda at the median knot, which zeroes about half the degrees.
pub fn median_lambda(a: &CoefficientSet, beta: &DegreeWeights) -> f64 {
    let mut knots: Vec<f64> = sphreg::degree_norms(a)
        .as_slice()
        .iter()
        .enumerate()
        .map(|(ell, x)| x / beta.get(ell))
        .collect();
    knots.sort_by(f64::total_cmp);
    knots[knots.len() / 2]
}
