//! The regularization path as a function of lambda.
//!
//! Between consecutive knots `A_o(ell) / beta(ell)` the active degree set is
//! constant, so the discrepancy is `lambda^2 S2 + R` and the hybrid norm is
//! `N1 - lambda S2` on each segment. Knots are computed once and sorted, after
//! which any lambda, sigma or kappa query is a binary search.

use crate::coeffs::{degree_norms, CoefficientSet, DegreeWeights};
use crate::error::{ensure_non_negative, ensure_same_band_limit, Result};

/// A lambda interval `(lower, upper]` with a fixed active degree set.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub lower: f64,
    pub upper: f64,
    /// Active degrees, increasing.
    pub active: Vec<usize>,
    /// `sum_{active} beta^2`
    pub active_weight_sq: f64,
    /// `sum_{active} beta A_o`
    pub active_norm: f64,
    /// `sum_{inactive} A_o^2`
    pub dropped_energy: f64,
}

impl Segment {
    #[inline]
    pub fn discrepancy_at(&self, lambda: f64) -> f64 {
        lambda * lambda * self.active_weight_sq + self.dropped_energy
    }

    #[inline]
    pub fn hybrid_norm_at(&self, lambda: f64) -> f64 {
        self.active_norm - lambda * self.active_weight_sq
    }
}

/// One point of the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    pub lambda: f64,
    pub discrepancy: f64,
    pub hybrid_norm: f64,
    pub active_count: usize,
}

#[derive(Debug, Clone)]
pub struct Frontier {
    band_limit: usize,
    /// Distinct knots, strictly decreasing.
    knots: Vec<f64>,
    /// `segments[i]` covers `(knots[i+1], knots[i]]` (lower bound 0 for the last).
    segments: Vec<Segment>,
    /// Number of degrees whose knot is `>= knots[i]`.
    cumulative_counts: Vec<usize>,
    total_energy: f64,
    total_norm: f64,
}

/// Outcome of mapping a constraint level to lambda.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    /// The constraint is active at this regularization parameter.
    Lambda(f64),
    /// `sigma^2 >= |a_o|^2`: the unique solution is zero.
    ZeroSolution,
    /// `kappa >= |a_o|_{1,2,beta}`: the observed coefficients are feasible,
    /// the multiplier is zero.
    ObservedSolution,
}

impl LambdaChoice {
    pub fn lambda(self) -> Option<f64> {
        match self {
            LambdaChoice::Lambda(l) => Some(l),
            _ => None,
        }
    }
}

pub fn build_frontier(observed: &CoefficientSet, beta: &DegreeWeights) -> Result<Frontier> {
    ensure_same_band_limit(observed.band_limit(), beta.band_limit())?;
    let norms = degree_norms(observed);

    struct Degree {
        ell: usize,
        knot: f64,
        weight: f64,
        norm: f64,
    }
    let mut degrees: Vec<Degree> = norms
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(ell, &a)| Degree {
            ell,
            knot: a / beta.get(ell),
            weight: beta.get(ell),
            norm: a,
        })
        .collect();
    degrees.sort_by(|x, y| y.knot.total_cmp(&x.knot).then(x.ell.cmp(&y.ell)));

    // group equal knots
    let mut groups: Vec<std::ops::Range<usize>> = Vec::new();
    for (i, d) in degrees.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if degrees[g.start].knot == d.knot => g.end = i + 1,
            _ => groups.push(i..i + 1),
        }
    }
    let knots: Vec<f64> = groups.iter().map(|g| degrees[g.start].knot).collect();

    // S2 and N1 accumulate from the largest knot down, R from the smallest up,
    // so neither side involves a subtraction.
    let n = groups.len();
    let mut weight_sq = vec![0.0; n];
    let mut active_norm = vec![0.0; n];
    let mut counts = vec![0; n];
    let (mut s2, mut n1) = (0.0, 0.0);
    for (i, g) in groups.iter().enumerate() {
        for d in &degrees[g.clone()] {
            s2 += d.weight * d.weight;
            n1 += d.weight * d.norm;
        }
        weight_sq[i] = s2;
        active_norm[i] = n1;
        counts[i] = g.end;
    }
    let mut dropped = vec![0.0; n];
    let mut r = 0.0;
    for i in (0..n).rev() {
        dropped[i] = r;
        for d in &degrees[groups[i].clone()] {
            r += d.norm * d.norm;
        }
    }

    let segments = (0..n)
        .map(|i| {
            let mut active: Vec<usize> = degrees[..groups[i].end].iter().map(|d| d.ell).collect();
            active.sort_unstable();
            Segment {
                lower: knots.get(i + 1).copied().unwrap_or(0.0),
                upper: knots[i],
                active,
                active_weight_sq: weight_sq[i],
                active_norm: active_norm[i],
                dropped_energy: dropped[i],
            }
        })
        .collect();

    Ok(Frontier {
        band_limit: observed.band_limit(),
        knots,
        segments,
        cumulative_counts: counts,
        total_energy: observed.squared_l2_norm(),
        total_norm: n1,
    })
}

impl Frontier {
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// Distinct knots `A_o(ell)/beta(ell)` (over `A_o(ell) > 0`), strictly decreasing.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Segments in decreasing-lambda order; `segments()[i]` ends at `knots()[i]`.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Smallest lambda at which the regularized coefficients vanish.
    pub fn lambda_zero(&self) -> f64 {
        self.knots.first().copied().unwrap_or(0.0)
    }

    /// `|a_o|_2^2`, the discrepancy for `lambda >= lambda_zero`.
    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    /// `|a_o|_{1,2,beta}`, the hybrid norm at `lambda = 0`.
    pub fn total_norm(&self) -> f64 {
        self.total_norm
    }

    /// Segment containing lambda, i.e. `lower < lambda <= upper`
    /// (`lambda = 0` maps to the last segment).
    pub fn segment_for(&self, lambda: f64) -> Option<&Segment> {
        let above = self.knots.partition_point(|&k| k >= lambda);
        if above == 0 {
            None
        } else {
            Some(&self.segments[above - 1])
        }
    }

    pub fn discrepancy_at(&self, lambda: f64) -> f64 {
        self.segment_for(lambda)
            .map_or(self.total_energy, |s| s.discrepancy_at(lambda))
    }

    pub fn hybrid_norm_at(&self, lambda: f64) -> f64 {
        self.segment_for(lambda).map_or(0.0, |s| s.hybrid_norm_at(lambda))
    }

    /// Number of active degrees `#{ell : A_o(ell)/beta(ell) > lambda}`.
    pub fn active_count(&self, lambda: f64) -> usize {
        let above = self.knots.partition_point(|&k| k > lambda);
        if above == 0 {
            0
        } else {
            self.cumulative_counts[above - 1]
        }
    }

    pub fn point(&self, lambda: f64) -> FrontierPoint {
        FrontierPoint {
            lambda,
            discrepancy: self.discrepancy_at(lambda),
            hybrid_norm: self.hybrid_norm_at(lambda),
            active_count: self.active_count(lambda),
        }
    }

    /// Samples ordered by increasing lambda: `lambda = 0`, then for each
    /// segment `interior` evenly spaced interior points followed by its upper
    /// knot.
    pub fn samples(&self, interior: usize) -> Vec<FrontierPoint> {
        let mut out = vec![self.point(0.0)];
        for seg in self.segments.iter().rev() {
            let width = seg.upper - seg.lower;
            for k in 1..=interior {
                let lambda = seg.lower + width * k as f64 / (interior + 1) as f64;
                out.push(self.point(lambda));
            }
            out.push(self.point(seg.upper));
        }
        out
    }

    /// Lambda giving discrepancy `sigma^2` for the constrained model
    /// `min |a|_{1,2,beta}` subject to `|a - a_o|_2 <= sigma`.
    pub fn lambda_from_sigma(&self, sigma: f64) -> Result<LambdaChoice> {
        ensure_non_negative("sigma", sigma)?;
        let target = sigma * sigma;
        if target >= self.total_energy {
            return Ok(LambdaChoice::ZeroSolution);
        }
        if sigma == 0.0 {
            return Ok(LambdaChoice::Lambda(0.0));
        }
        // discrepancy at knots[i] decreases with i
        let i = self
            .segments
            .partition_point(|s| s.discrepancy_at(s.upper) >= target)
            .max(1)
            - 1;
        let seg = &self.segments[i];
        let lambda = ((target - seg.dropped_energy).max(0.0) / seg.active_weight_sq).sqrt();
        Ok(LambdaChoice::Lambda(lambda.clamp(seg.lower, seg.upper)))
    }

    /// Lambda giving hybrid norm `kappa` for the constrained model
    /// `min |a - a_o|_2` subject to `|a|_{1,2,beta} <= kappa`.
    pub fn lambda_from_kappa(&self, kappa: f64) -> Result<LambdaChoice> {
        ensure_non_negative("kappa", kappa)?;
        if kappa >= self.total_norm {
            return Ok(LambdaChoice::ObservedSolution);
        }
        if kappa == 0.0 {
            return Ok(LambdaChoice::Lambda(self.lambda_zero()));
        }
        // hybrid norm at knots[i] increases with i
        let i = self
            .segments
            .partition_point(|s| s.hybrid_norm_at(s.upper) <= kappa)
            .max(1)
            - 1;
        let seg = &self.segments[i];
        let lambda = (seg.active_norm - kappa) / seg.active_weight_sq;
        Ok(LambdaChoice::Lambda(lambda.clamp(seg.lower, seg.upper)))
    }

    pub fn l0_frontier(&self) -> L0Frontier {
        let steps = self
            .segments
            .iter()
            .zip(&self.cumulative_counts)
            .rev()
            .map(|(seg, &count)| L0Step {
                lambda_lower: seg.lower,
                lambda_upper: seg.upper,
                count,
                discrepancy_lower: seg.discrepancy_at(seg.lower),
                discrepancy_upper: seg.discrepancy_at(seg.upper),
            })
            .collect();
        L0Frontier {
            steps,
            lambda_zero: self.lambda_zero(),
        }
    }
}

/// Active-degree count on `[lambda_lower, lambda_upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L0Step {
    pub lambda_lower: f64,
    pub lambda_upper: f64,
    pub count: usize,
    pub discrepancy_lower: f64,
    pub discrepancy_upper: f64,
}

/// Staircase of `#Gamma(lambda)`. Steps are ordered by increasing lambda;
/// the count is zero for `lambda >= lambda_zero`.
#[derive(Debug, Clone, PartialEq)]
pub struct L0Frontier {
    pub steps: Vec<L0Step>,
    pub lambda_zero: f64,
}

impl L0Frontier {
    pub fn count_at(&self, lambda: f64) -> usize {
        self.steps
            .iter()
            .find(|s| lambda >= s.lambda_lower && lambda < s.lambda_upper)
            .map_or(0, |s| s.count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularize::regularize;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn single_block() -> (CoefficientSet, f64) {
        let alpha = (4.0 * PI / 3.0).sqrt();
        let mut a = CoefficientSet::zeros(2);
        a[(1, 0)] = Complex64::new(alpha, 0.0);
        (a, alpha)
    }

    #[test]
    fn single_block_path() {
        let (a, alpha) = single_block();
        let f = build_frontier(&a, &DegreeWeights::constant(2)).unwrap();
        assert_eq!(f.knots(), &[alpha]);
        assert_eq!(f.lambda_zero(), alpha);
        for lam in [0.0, 0.3, 1.0, alpha * 0.99, alpha] {
            assert_relative_eq!(f.discrepancy_at(lam), lam * lam, max_relative = 1e-14);
            assert_relative_eq!(f.hybrid_norm_at(lam), alpha - lam, epsilon = 1e-14);
        }
        assert_relative_eq!(f.discrepancy_at(5.0), alpha * alpha);
        assert_eq!(f.hybrid_norm_at(5.0), 0.0);

        let sigma = f.lambda_from_sigma(alpha / 2.0).unwrap().lambda().unwrap();
        assert_relative_eq!(sigma, alpha / 2.0, max_relative = 1e-14);
        let kappa = f.lambda_from_kappa(alpha / 3.0).unwrap().lambda().unwrap();
        assert_relative_eq!(kappa, 2.0 * alpha / 3.0, max_relative = 1e-14);

        let l0 = f.l0_frontier();
        assert_eq!(l0.steps.len(), 1);
        assert_eq!(l0.steps[0].count, 1);
        assert_eq!(l0.count_at(alpha * 0.5), 1);
        assert_eq!(l0.count_at(alpha), 0);
    }

    #[test]
    fn zero_input_is_degenerate() {
        let f = build_frontier(&CoefficientSet::zeros(3), &DegreeWeights::constant(3)).unwrap();
        assert!(f.knots().is_empty());
        assert_eq!(f.lambda_zero(), 0.0);
        assert_eq!(f.discrepancy_at(0.0), 0.0);
        assert_eq!(f.hybrid_norm_at(0.0), 0.0);
        assert_eq!(f.lambda_from_sigma(0.0).unwrap(), LambdaChoice::ZeroSolution);
        assert_eq!(f.lambda_from_kappa(0.0).unwrap(), LambdaChoice::ObservedSolution);
        assert!(f.l0_frontier().steps.is_empty());
        assert_eq!(f.samples(1).len(), 1);
    }

    #[test]
    fn three_distinct_knots_staircase() {
        let mut a = CoefficientSet::zeros(3);
        a[(1, 0)] = Complex64::new(1.0, 0.0);
        a[(2, 1)] = Complex64::new(0.0, 2.0);
        a[(3, -3)] = Complex64::new(3.0, 0.0);
        let f = build_frontier(&a, &DegreeWeights::constant(3)).unwrap();
        assert_eq!(f.knots(), &[3.0, 2.0, 1.0]);
        let counts: Vec<usize> = f.l0_frontier().steps.iter().map(|s| s.count).collect();
        assert_eq!(counts, vec![3, 2, 1]);
    }

    #[test]
    fn tied_knots_merge() {
        let mut a = CoefficientSet::zeros(2);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        a[(2, 0)] = Complex64::new(0.5, 0.0);
        let beta = DegreeWeights::new(vec![1.0, 1.0, 0.5]).unwrap();
        let f = build_frontier(&a, &beta).unwrap();
        assert_eq!(f.knots(), &[1.0]);
        assert_eq!(f.segments()[0].active, vec![0, 2]);
        assert_eq!(f.active_count(0.5), 2);
        assert_eq!(f.active_count(1.0), 0);
    }

    #[test]
    fn markers_and_errors() {
        let (a, alpha) = single_block();
        let f = build_frontier(&a, &DegreeWeights::constant(2)).unwrap();
        assert_eq!(f.lambda_from_sigma(0.0).unwrap(), LambdaChoice::Lambda(0.0));
        assert_eq!(f.lambda_from_sigma(alpha).unwrap(), LambdaChoice::ZeroSolution);
        assert_eq!(f.lambda_from_kappa(alpha).unwrap(), LambdaChoice::ObservedSolution);
        assert_eq!(f.lambda_from_kappa(0.0).unwrap(), LambdaChoice::Lambda(alpha));
        assert!(f.lambda_from_sigma(-1.0).is_err());
        assert!(f.lambda_from_kappa(-1.0).is_err());
        assert!(build_frontier(&a, &DegreeWeights::constant(3)).is_err());
    }

    #[test]
    fn samples_agree_with_regularize() {
        let a = CoefficientSet::from_fn(3, |l, m| {
            Complex64::new((l as f64 * 1.7 + m as f64).sin(), (m as f64 * 0.9 - l as f64).cos())
        });
        let beta = DegreeWeights::power_law(3, 0.5).unwrap();
        let f = build_frontier(&a, &beta).unwrap();
        for p in f.samples(3) {
            let r = regularize(&a, &beta, p.lambda).unwrap();
            assert_relative_eq!(p.discrepancy, r.discrepancy(), max_relative = 1e-12);
            assert!((p.hybrid_norm - r.hybrid_norm()).abs() <= 1e-12 * f.total_norm());
            assert_eq!(p.active_count, r.active_degrees().len());
        }
    }
}
