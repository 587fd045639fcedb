//! Closed-form minimizer of `0.5 |a - a_o|^2 + lambda * sum_ell beta(ell) A(ell)`.
//!
//! Each degree block is shrunk toward zero along its own direction:
//! `a_r(ell,.) = max(1 - lambda beta(ell) / A_o(ell), 0) * a_o(ell,.)`.
//! A degree survives iff `A_o(ell) / beta(ell) > lambda`; the tie is zeroed.

use num_complex::Complex64;

use crate::coeffs::{block_norm, degree_norms, discrepancy, hybrid_norm, CoefficientSet, DegreeNorms, DegreeWeights};
use crate::error::{ensure_non_negative, ensure_positive, ensure_same_band_limit, Result};

#[derive(Debug, Clone)]
pub struct RegularizationResult {
    lambda: f64,
    active: Vec<usize>,
    shrink: Vec<Option<f64>>,
    coefficients: CoefficientSet,
    norms: DegreeNorms,
    hybrid_norm: f64,
    discrepancy: f64,
    l2_norm_ratio: f64,
}

impl RegularizationResult {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Surviving degrees in increasing order.
    pub fn active_degrees(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, ell: usize) -> bool {
        self.shrink[ell].is_some()
    }

    /// Shrink factor `alpha(ell)` in `(0, 1]` for active degrees.
    pub fn shrink_factor(&self, ell: usize) -> Option<f64> {
        self.shrink[ell]
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> CoefficientSet {
        self.coefficients
    }

    pub fn degree_norms(&self) -> &DegreeNorms {
        &self.norms
    }

    /// `sum_{active} beta(ell) A_r(ell)`.
    pub fn hybrid_norm(&self) -> f64 {
        self.hybrid_norm
    }

    /// `lambda^2 sum_{active} beta^2 + sum_{inactive} A_o^2`.
    pub fn discrepancy(&self) -> f64 {
        self.discrepancy
    }

    /// Fraction of zero coefficients among all `(L+1)^2`.
    pub fn sparsity(&self) -> f64 {
        self.coefficients.zero_fraction()
    }

    /// `|a_r|_2 / |a_o|_2`, or 1 for an all-zero input.
    pub fn l2_norm_ratio(&self) -> f64 {
        self.l2_norm_ratio
    }
}

pub fn regularize(observed: &CoefficientSet, beta: &DegreeWeights, lambda: f64) -> Result<RegularizationResult> {
    ensure_same_band_limit(observed.band_limit(), beta.band_limit())?;
    ensure_non_negative("lambda", lambda)?;

    let band_limit = observed.band_limit();
    let mut coefficients = observed.clone();
    let mut active = Vec::new();
    let mut shrink = vec![None; band_limit + 1];
    let mut norms = Vec::with_capacity(band_limit + 1);
    let mut hybrid = 0.0;
    let mut active_weight_sq = 0.0;
    let mut dropped_energy = 0.0;

    for (ell, slot) in shrink.iter_mut().enumerate() {
        let a_o = block_norm(observed.block(ell));
        let b = beta.get(ell);
        let block = coefficients.block_mut(ell);
        if a_o > lambda * b {
            let a_r = a_o - lambda * b;
            let alpha = a_r / a_o;
            if alpha != 1.0 {
                block.iter_mut().for_each(|c| *c *= alpha);
            }
            active.push(ell);
            *slot = Some(alpha);
            norms.push(a_r);
            hybrid += b * a_r;
            active_weight_sq += b * b;
        } else {
            block.fill(Complex64::new(0.0, 0.0));
            norms.push(0.0);
            dropped_energy += a_o * a_o;
        }
    }

    let total = observed.squared_l2_norm();
    let kept: f64 = norms.iter().map(|a| a * a).sum();
    let l2_norm_ratio = if total > 0.0 { (kept / total).sqrt() } else { 1.0 };

    Ok(RegularizationResult {
        lambda,
        active,
        shrink,
        coefficients,
        norms: DegreeNorms::from_vec(norms),
        hybrid_norm: hybrid,
        discrepancy: lambda * lambda * active_weight_sq + dropped_energy,
        l2_norm_ratio,
    })
}

/// `0.5 * discrepancy(a, a_o) + lambda * hybrid_norm(a, beta)`.
pub fn objective(a: &CoefficientSet, observed: &CoefficientSet, beta: &DegreeWeights, lambda: f64) -> Result<f64> {
    Ok(0.5 * discrepancy(a, observed)? + lambda * hybrid_norm(a, beta)?)
}

/// Largest admissible lambda for a target coefficient error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    /// Open bound: any `lambda < lambda_max` keeps `|a_o - a_r|_2 < epsilon`.
    pub lambda_max: f64,
    /// Smallest degree such that the energy above it is at most `epsilon^2 / 4`.
    pub ell_star: usize,
}

impl ErrorBound {
    /// The value used when the bound is applied: `0.999 * lambda_max`.
    pub fn applied_lambda(&self) -> f64 {
        0.999 * self.lambda_max
    }
}

/// Bound on lambda guaranteeing `|a_o - a_r(lambda)|_2 < epsilon`, using the
/// realized tail energies of this coefficient set.
pub fn lambda_bound_for_error(observed: &CoefficientSet, beta: &DegreeWeights, epsilon: f64) -> Result<ErrorBound> {
    ensure_positive("epsilon", epsilon)?;
    ensure_same_band_limit(observed.band_limit(), beta.band_limit())?;

    let energies: Vec<f64> = degree_norms(observed).as_slice().iter().map(|a| a * a).collect();
    let budget = epsilon * epsilon / 4.0;

    // tail[k] = sum_{ell > k} energy(ell), accumulated from the top
    let mut ell_star = observed.band_limit();
    let mut tail = 0.0;
    for k in (0..observed.band_limit()).rev() {
        tail += energies[k + 1];
        if tail <= budget {
            ell_star = k;
        } else {
            break;
        }
    }

    let weight_sq: f64 = beta.as_slice()[..=ell_star].iter().map(|b| b * b).sum();
    Ok(ErrorBound {
        lambda_max: epsilon / (2.0 * weight_sq.sqrt()),
        ell_star,
    })
}
