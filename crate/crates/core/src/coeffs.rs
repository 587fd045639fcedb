//! Band-limited spherical-harmonic coefficient containers and the norms
//! defined on them.
//!
//! Coefficients are stored densely in degree-major order
//! `a(0,0), a(1,-1), a(1,0), a(1,1), a(2,-2), ...`, so the degree-`ell`
//! block is the contiguous slice `ell^2 .. (ell+1)^2`.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{ensure_non_negative, ensure_same_band_limit, Error, Result};

/// Number of coefficients for band limit `band_limit`.
#[inline]
pub const fn coefficient_count(band_limit: usize) -> usize {
    (band_limit + 1) * (band_limit + 1)
}

/// Flat position of `(ell, m)`. Requires `|m| <= ell`.
#[inline]
pub fn flat_index(ell: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= ell);
    ((ell * ell + ell) as i64 + m) as usize
}

/// Inverse of [`flat_index`].
#[inline]
pub fn unflatten(index: usize) -> (usize, i64) {
    let mut ell = (index as f64).sqrt() as usize;
    // guard against sqrt rounding for large indices
    while ell * ell > index {
        ell -= 1;
    }
    while (ell + 1) * (ell + 1) <= index {
        ell += 1;
    }
    (ell, index as i64 - (ell * ell + ell) as i64)
}

/// Complex coefficients `a(ell, m)` for `0 <= ell <= L`, `-ell <= m <= ell`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    band_limit: usize,
    entries: Vec<Complex64>,
    real_field: bool,
}

impl CoefficientSet {
    pub fn zeros(band_limit: usize) -> Self {
        Self {
            band_limit,
            entries: vec![Complex64::new(0.0, 0.0); coefficient_count(band_limit)],
            real_field: false,
        }
    }

    /// Wraps a flat vector. Its length must be a perfect square `(L+1)^2`.
    pub fn from_vec(entries: Vec<Complex64>) -> Result<Self> {
        let n = entries.len();
        let side = (n as f64).sqrt().round() as usize;
        if n == 0 || side * side != n {
            return Err(Error::Domain(format!(
                "coefficient count {n} is not of the form (L+1)^2"
            )));
        }
        Ok(Self {
            band_limit: side - 1,
            entries,
            real_field: false,
        })
    }

    /// Builds a set from a function of `(ell, m)`.
    pub fn from_fn(band_limit: usize, mut f: impl FnMut(usize, i64) -> Complex64) -> Self {
        let mut set = Self::zeros(band_limit);
        for ell in 0..=band_limit {
            for m in -(ell as i64)..=ell as i64 {
                set.entries[flat_index(ell, m)] = f(ell, m);
            }
        }
        set
    }

    #[inline]
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.entries
    }

    /// Coefficient `a(ell, m)`, or `None` outside the band limit.
    pub fn get(&self, ell: usize, m: i64) -> Option<Complex64> {
        if ell > self.band_limit || m.unsigned_abs() as usize > ell {
            return None;
        }
        Some(self.entries[flat_index(ell, m)])
    }

    /// The `2 ell + 1` coefficients of degree `ell`, ordered by `m`.
    #[inline]
    pub fn block(&self, ell: usize) -> &[Complex64] {
        &self.entries[ell * ell..(ell + 1) * (ell + 1)]
    }

    #[inline]
    pub fn block_mut(&mut self, ell: usize) -> &mut [Complex64] {
        &mut self.entries[ell * ell..(ell + 1) * (ell + 1)]
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &[Complex64])> {
        (0..=self.band_limit).map(move |ell| (ell, self.block(ell)))
    }

    /// Whether this set is flagged as the expansion of a real field.
    #[inline]
    pub fn is_real_field(&self) -> bool {
        self.real_field
    }

    /// Sets the real-field flag after checking conjugate symmetry
    /// `a(ell,-m) = (-1)^m conj(a(ell,m))` to within `tol` (absolute, scaled by
    /// the largest coefficient modulus).
    pub fn mark_real_field(&mut self, tol: f64) -> Result<()> {
        if let Some((ell, m)) = self.conjugate_symmetry_violation(tol) {
            return Err(Error::Domain(format!(
                "coefficients violate conjugate symmetry at (ell={ell}, m={m})"
            )));
        }
        self.real_field = true;
        Ok(())
    }

    /// Drops the real-field flag, e.g. after a complex-valued manipulation.
    pub fn clear_real_field(&mut self) {
        self.real_field = false;
    }

    pub(crate) fn with_real_field(mut self, flag: bool) -> Self {
        self.real_field = flag;
        self
    }

    /// First `(ell, m)` with `m >= 0` where conjugate symmetry fails.
    pub fn conjugate_symmetry_violation(&self, tol: f64) -> Option<(usize, i64)> {
        let scale = self.max_modulus().max(f64::MIN_POSITIVE);
        for ell in 0..=self.band_limit {
            for m in 0..=ell as i64 {
                let pos = self.entries[flat_index(ell, m)];
                let neg = self.entries[flat_index(ell, -m)];
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                if (neg - pos.conj() * sign).norm() > tol * scale {
                    return Some((ell, m));
                }
            }
        }
        None
    }

    pub fn max_modulus(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Squared Euclidean norm, summed term by term.
    pub fn squared_l2_norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.squared_l2_norm().sqrt()
    }

    /// Fraction of exactly-zero entries among all `(L+1)^2` coefficients.
    pub fn zero_fraction(&self) -> f64 {
        let zeros = self.entries.iter().filter(|c| c.re == 0.0 && c.im == 0.0).count();
        zeros as f64 / self.entries.len() as f64
    }

    /// Entrywise product with a real scalar. Keeps the real-field flag.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            band_limit: self.band_limit,
            entries: self.entries.iter().map(|c| c * factor).collect(),
            real_field: self.real_field,
        }
    }

    /// Embeds or truncates this set at another band limit.
    pub fn resized(&self, band_limit: usize) -> Self {
        let mut out = Self::zeros(band_limit);
        let n = out.len().min(self.len());
        out.entries[..n].copy_from_slice(&self.entries[..n]);
        out.real_field = self.real_field;
        out
    }
}

impl Index<(usize, i64)> for CoefficientSet {
    type Output = Complex64;

    fn index(&self, (ell, m): (usize, i64)) -> &Complex64 {
        assert!(ell <= self.band_limit && m.unsigned_abs() as usize <= ell);
        &self.entries[flat_index(ell, m)]
    }
}

impl IndexMut<(usize, i64)> for CoefficientSet {
    fn index_mut(&mut self, (ell, m): (usize, i64)) -> &mut Complex64 {
        assert!(ell <= self.band_limit && m.unsigned_abs() as usize <= ell);
        &mut self.entries[flat_index(ell, m)]
    }
}

/// Positive per-degree weights with the first weight normalized to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeWeights {
    weights: Vec<f64>,
}

impl DegreeWeights {
    /// All weights equal to one.
    pub fn constant(band_limit: usize) -> Self {
        Self {
            weights: vec![1.0; band_limit + 1],
        }
    }

    /// `beta(ell) = max(ell, 1)^(-p)`, so `beta(0) = beta(1) = 1`.
    pub fn power_law(band_limit: usize, exponent: f64) -> Result<Self> {
        if !exponent.is_finite() {
            return Err(Error::InvalidParameter {
                name: "power-law exponent",
                expected: "finite",
                value: exponent,
            });
        }
        Self::new(
            (0..=band_limit)
                .map(|ell| (ell.max(1) as f64).powf(-exponent))
                .collect(),
        )
    }

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("degree weights must not be empty".into()));
        }
        if let Some((ell, &w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Domain(format!(
                "degree weight for ell={ell} must be positive and finite, got {w}"
            )));
        }
        if weights[0] != 1.0 {
            return Err(Error::Domain(format!(
                "degree weight for ell=0 must equal 1, got {}",
                weights[0]
            )));
        }
        Ok(Self { weights })
    }

    #[inline]
    pub fn band_limit(&self) -> usize {
        self.weights.len() - 1
    }

    #[inline]
    pub fn get(&self, ell: usize) -> f64 {
        self.weights[ell]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

/// Euclidean norms `A(ell)` of the degree blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeNorms {
    norms: Vec<f64>,
}

impl DegreeNorms {
    pub(crate) fn from_vec(norms: Vec<f64>) -> Self {
        Self { norms }
    }

    #[inline]
    pub fn band_limit(&self) -> usize {
        self.norms.len() - 1
    }

    #[inline]
    pub fn get(&self, ell: usize) -> f64 {
        self.norms[ell]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.norms
    }

    /// `sum_ell A(ell)^2`.
    pub fn sum_of_squares(&self) -> f64 {
        self.norms.iter().map(|a| a * a).sum()
    }
}

#[inline]
pub(crate) fn block_norm(block: &[Complex64]) -> f64 {
    block.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn degree_norms(a: &CoefficientSet) -> DegreeNorms {
    DegreeNorms::from_vec(a.blocks().map(|(_, b)| block_norm(b)).collect())
}

/// Weighted sum of degree norms, `sum_ell beta(ell) A(ell)`.
pub fn hybrid_norm(a: &CoefficientSet, beta: &DegreeWeights) -> Result<f64> {
    ensure_same_band_limit(a.band_limit(), beta.band_limit())?;
    Ok(a.blocks().map(|(ell, b)| beta.get(ell) * block_norm(b)).sum())
}

/// Sum of coefficient moduli. Not invariant under rotations.
pub fn l1_norm(a: &CoefficientSet) -> f64 {
    a.as_slice().iter().map(|c| c.norm()).sum()
}

/// Squared Euclidean distance between two coefficient sets.
pub fn discrepancy(a: &CoefficientSet, b: &CoefficientSet) -> Result<f64> {
    ensure_same_band_limit(a.band_limit(), b.band_limit())?;
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum())
}

/// Per-coefficient complex soft-thresholding: the minimizer of
/// `0.5 |a - a_o|^2 + lambda sum |a(ell,m)|`.
///
/// This is the coordinate-dependent baseline that the block regularizer
/// replaces; its sparsity pattern changes under rotations.
pub fn l1_soft_threshold(a: &CoefficientSet, lambda: f64) -> Result<CoefficientSet> {
    ensure_non_negative("lambda", lambda)?;
    let entries = a
        .as_slice()
        .iter()
        .map(|&c| {
            let r = c.norm();
            if r > lambda {
                c * (1.0 - lambda / r)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    // the baseline treats m = 0 and m != 0 identically, which keeps the
    // conjugate symmetry (moduli of a(ell,m) and a(ell,-m) agree)
    Ok(CoefficientSet {
        band_limit: a.band_limit(),
        entries,
        real_field: a.is_real_field(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dipole_z() -> CoefficientSet {
        let mut a = CoefficientSet::zeros(1);
        a[(1, 0)] = c((4.0 * PI / 3.0).sqrt(), 0.0);
        a
    }

    fn dipole_x() -> CoefficientSet {
        let alpha = (4.0 * PI / 3.0).sqrt();
        let mut a = CoefficientSet::zeros(1);
        a[(1, 1)] = c(alpha / 2f64.sqrt(), 0.0);
        a[(1, -1)] = c(-alpha / 2f64.sqrt(), 0.0);
        a
    }

    #[test]
    fn flat_index_order() {
        assert_eq!(flat_index(0, 0), 0);
        assert_eq!(flat_index(1, -1), 1);
        assert_eq!(flat_index(1, 0), 2);
        assert_eq!(flat_index(1, 1), 3);
        assert_eq!(flat_index(2, -2), 4);
        for idx in 0..coefficient_count(40) {
            let (ell, m) = unflatten(idx);
            assert_eq!(flat_index(ell, m), idx);
        }
    }

    #[test]
    fn from_vec_rejects_non_square_lengths() {
        assert!(CoefficientSet::from_vec(vec![c(0.0, 0.0); 5]).is_err());
        assert!(CoefficientSet::from_vec(vec![]).is_err());
        assert_eq!(CoefficientSet::from_vec(vec![c(0.0, 0.0); 9]).unwrap().band_limit(), 2);
    }

    #[test]
    fn dipole_norms() {
        let alpha = (4.0 * PI / 3.0).sqrt();
        assert_relative_eq!(alpha, 2.04665, epsilon = 1e-5);
        let nz = degree_norms(&dipole_z());
        let nx = degree_norms(&dipole_x());
        assert_relative_eq!(nz.get(1), alpha, max_relative = 1e-15);
        assert_relative_eq!(nx.get(1), alpha, max_relative = 1e-15);
        assert_eq!(nz.get(0), 0.0);

        let beta = DegreeWeights::constant(1);
        assert_relative_eq!(hybrid_norm(&dipole_z(), &beta).unwrap(), alpha);
        assert_relative_eq!(l1_norm(&dipole_z()), alpha);
        assert_relative_eq!(l1_norm(&dipole_x()), alpha * 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn zero_set_has_zero_norms() {
        let a = CoefficientSet::zeros(3);
        assert!(degree_norms(&a).as_slice().iter().all(|&x| x == 0.0));
        assert_eq!(hybrid_norm(&a, &DegreeWeights::constant(3)).unwrap(), 0.0);
        assert_eq!(l1_norm(&a), 0.0);
    }

    #[test]
    fn hybrid_norm_hand_value() {
        let mut a = CoefficientSet::zeros(3);
        a[(0, 0)] = c(3.0, 0.0);
        a[(2, 1)] = c(0.0, 4.0);
        let beta = DegreeWeights::new(vec![1.0, 1.0, 0.5, 0.25]).unwrap();
        assert_relative_eq!(hybrid_norm(&a, &beta).unwrap(), 5.0);
    }

    #[test]
    fn hybrid_norm_rejects_mismatch() {
        let a = CoefficientSet::zeros(3);
        let err = hybrid_norm(&a, &DegreeWeights::constant(2)).unwrap_err();
        assert!(matches!(err, Error::BandLimitMismatch { left: 3, right: 2 }));
    }

    #[test]
    fn discrepancy_cases() {
        let mut a = CoefficientSet::zeros(2);
        let b = a.clone();
        assert_eq!(discrepancy(&a, &b).unwrap(), 0.0);
        a[(2, -1)] = c(3.0, 4.0);
        assert_relative_eq!(discrepancy(&CoefficientSet::zeros(2), &a).unwrap(), 25.0);
        assert!(discrepancy(&a, &CoefficientSet::zeros(1)).is_err());
    }

    #[test]
    fn discrepancy_matches_direct_summation() {
        let a = CoefficientSet::from_fn(2, |l, m| c(l as f64 * 0.3 - m as f64, 0.7 * m as f64));
        let b = CoefficientSet::from_fn(2, |l, m| c(m as f64 * 0.1, l as f64 - 0.4));
        let mut expected = 0.0;
        for l in 0..=2usize {
            for m in -(l as i64)..=l as i64 {
                let d = a[(l, m)] - b[(l, m)];
                expected += d.re * d.re + d.im * d.im;
            }
        }
        assert_relative_eq!(discrepancy(&a, &b).unwrap(), expected, max_relative = 1e-15);
    }

    #[test]
    fn soft_threshold_cases() {
        let a = dipole_z();
        assert_eq!(l1_soft_threshold(&a, 0.0).unwrap(), a);

        let z = l1_soft_threshold(&dipole_z(), 1.5).unwrap();
        assert!(z[(1, 0)].norm() > 0.0);
        let x = l1_soft_threshold(&dipole_x(), 1.5).unwrap();
        assert!(x.as_slice().iter().all(|v| v.norm() == 0.0));

        let mut single = CoefficientSet::zeros(0);
        single[(0, 0)] = c(3.0, 4.0);
        assert_eq!(l1_soft_threshold(&single, 5.0).unwrap()[(0, 0)], c(0.0, 0.0));

        assert!(l1_soft_threshold(&a, -1.0).is_err());
    }

    #[test]
    fn soft_threshold_beats_endpoints() {
        let a = CoefficientSet::from_fn(3, |l, m| c((l as f64 + 0.5).sin() * 2.0, (m as f64).cos()));
        let obj = |x: &CoefficientSet, lam: f64| 0.5 * discrepancy(x, &a).unwrap() + lam * l1_norm(x);
        for lam in [0.1, 0.5, 1.0, 3.0] {
            let r = l1_soft_threshold(&a, lam).unwrap();
            assert!(obj(&r, lam) <= obj(&a, lam) + 1e-12);
            assert!(obj(&r, lam) <= obj(&CoefficientSet::zeros(3), lam) + 1e-12);
        }
    }

    #[test]
    fn weights_validation() {
        assert!(DegreeWeights::new(vec![1.0, 0.0]).is_err());
        assert!(DegreeWeights::new(vec![2.0, 1.0]).is_err());
        assert!(DegreeWeights::new(vec![1.0, f64::NAN]).is_err());
        let p = DegreeWeights::power_law(4, 1.0).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 1.0, 0.5, 1.0 / 3.0, 0.25]);
    }

    #[test]
    fn conjugate_symmetry_check() {
        let mut a = dipole_x();
        a.mark_real_field(1e-14).unwrap();
        assert!(a.is_real_field());

        let mut bad = dipole_x();
        bad[(1, -1)] = c(1.0, 0.0);
        assert!(bad.mark_real_field(1e-14).is_err());

        let mut imag0 = CoefficientSet::zeros(1);
        imag0[(0, 0)] = c(0.0, 1.0);
        assert_eq!(imag0.conjugate_symmetry_violation(1e-14), Some((0, 0)));
    }
}
