//! Rescaling of a regularized field after shrinkage.
//!
//! Shrinkage lowers the L2 norm. Multiplying the regularized coefficients by
//! `gamma = |a_o|_2 / |a_r|_2` restores it. The discrepancy of the rescaled
//! field is the quadratic `q(gamma) = |a_o|^2 - 2 gamma c + gamma^2 |a_r|^2`
//! with `c = <a_o, a_r>`, minimized at `gamma_opt = c / |a_r|^2`.

use crate::coeffs::{block_norm, CoefficientSet};
use crate::error::{ensure_positive, ensure_same_band_limit, Error, Result};

/// Relative tolerance for the blockwise-collinearity check.
const COLLINEAR_TOL: f64 = 1e-9;

/// Norm-restoring factor `|a_o|_2 / |a_r|_2`.
pub fn scaling_factor(observed: &CoefficientSet, regularized: &CoefficientSet) -> Result<f64> {
    ensure_same_band_limit(observed.band_limit(), regularized.band_limit())?;
    let denom = regularized.l2_norm();
    if denom == 0.0 {
        return Err(Error::UndefinedScaling);
    }
    Ok(observed.l2_norm() / denom)
}

/// Real inner product `sum_ell alpha(ell) A_o(ell)^2`, checking that each
/// regularized block is a non-negative real multiple of the observed block.
fn collinear_inner_product(observed: &CoefficientSet, regularized: &CoefficientSet) -> Result<f64> {
    let mut c = 0.0;
    for ell in 0..=observed.band_limit() {
        let o = observed.block(ell);
        let r = regularized.block(ell);
        let a_o = block_norm(o);
        let a_r = block_norm(r);
        if a_r == 0.0 {
            continue;
        }
        if a_o == 0.0 {
            return Err(Error::NotCollinear { ell });
        }
        let alpha = a_r / a_o;
        let residual: f64 = o
            .iter()
            .zip(r)
            .map(|(x, y)| (y - x * alpha).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > COLLINEAR_TOL * a_r {
            return Err(Error::NotCollinear { ell });
        }
        c += alpha * a_o * a_o;
    }
    Ok(c)
}

/// Discrepancy-minimizing factor `argmin_gamma |a_o - gamma a_r|_2^2`.
pub fn optimal_scaling(observed: &CoefficientSet, regularized: &CoefficientSet) -> Result<f64> {
    Ok(ScalingReport::new(observed, regularized)?.gamma_opt)
}

/// Multiplies every coefficient by `gamma > 0`.
pub fn scaled_field(regularized: &CoefficientSet, gamma: f64) -> Result<CoefficientSet> {
    ensure_positive("gamma", gamma)?;
    Ok(regularized.scaled(gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingReport {
    pub gamma_norm: f64,
    pub gamma_opt: f64,
    /// `|a_o|_2^2`
    pub observed_energy: f64,
    /// `|a_r|_2^2`
    pub regularized_energy: f64,
    /// `<a_o, a_r>`
    pub inner_product: f64,
}

impl ScalingReport {
    pub fn new(observed: &CoefficientSet, regularized: &CoefficientSet) -> Result<Self> {
        ensure_same_band_limit(observed.band_limit(), regularized.band_limit())?;
        let regularized_energy = regularized.squared_l2_norm();
        if regularized_energy == 0.0 {
            return Err(Error::UndefinedScaling);
        }
        let observed_energy = observed.squared_l2_norm();
        let inner_product = collinear_inner_product(observed, regularized)?;
        Ok(Self {
            gamma_norm: (observed_energy / regularized_energy).sqrt(),
            gamma_opt: inner_product / regularized_energy,
            observed_energy,
            regularized_energy,
            inner_product,
        })
    }

    /// `q(gamma)`, the discrepancy of `gamma * a_r` against `a_o`.
    pub fn discrepancy_at(&self, gamma: f64) -> f64 {
        // clamp the tiny negative values rounding can produce near gamma_opt
        (self.observed_energy - 2.0 * gamma * self.inner_product + gamma * gamma * self.regularized_energy).max(0.0)
    }

    /// `n` evenly spaced samples of `q` on `[0, upper]`.
    pub fn sweep(&self, upper: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let g = if n > 1 {
                    upper * i as f64 / (n - 1) as f64
                } else {
                    upper
                };
                (g, self.discrepancy_at(g))
            })
            .collect()
    }
}
