//! Orthonormalized associated Legendre functions and Gauss-Legendre nodes.
//!
//! `lambda(ell, m, x) = sqrt((2 ell + 1)/(4 pi) (ell-m)!/(ell+m)!) P(ell, m, x)`
//! with the Condon-Shortley phase included in `P(ell, m, x)`, so that
//! `Y(ell, m, theta, phi) = lambda(ell, m, cos theta) exp(i m phi)` for `m >= 0`.
//! Values are generated by the three-term recurrence ascending in `ell` at
//! fixed `m`, seeded from the sectoral values `lambda(m, m, x)`.

use std::f64::consts::PI;

/// Precomputed recurrence coefficients for one band limit.
#[derive(Debug, Clone)]
pub struct LegendreRecurrence {
    band_limit: usize,
    /// `a(ell, m)` and `b(ell, m)` in the layout of [`Self::index`].
    a: Vec<f64>,
    b: Vec<f64>,
    /// `-sqrt((2m+1)/(2m))` for the sectoral step
    sectoral: Vec<f64>,
}

/// Length of a triangular table for band limit `L`.
#[inline]
pub fn tri_len(band_limit: usize) -> usize {
    (band_limit + 1) * (band_limit + 2) / 2
}

impl LegendreRecurrence {
    pub fn new(band_limit: usize) -> Self {
        let n = tri_len(band_limit);
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for m in 0..=band_limit {
            for ell in m + 2..=band_limit {
                let (l, mm) = (ell as f64, m as f64);
                let idx = Self::index(band_limit, ell, m);
                a[idx] = ((4.0 * l * l - 1.0) / (l * l - mm * mm)).sqrt();
                b[idx] = (((l - 1.0) * (l - 1.0) - mm * mm) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0)).sqrt();
            }
        }
        let sectoral = (0..=band_limit)
            .map(|m| {
                if m == 0 {
                    0.0
                } else {
                    -((2 * m + 1) as f64 / (2 * m) as f64).sqrt()
                }
            })
            .collect();
        Self {
            band_limit,
            a,
            b,
            sectoral,
        }
    }

    #[inline]
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// Index of `(ell, m)` in tables produced by [`Self::fill`].
    #[inline]
    pub fn index(band_limit: usize, ell: usize, m: usize) -> usize {
        debug_assert!(m <= ell && ell <= band_limit);
        // columns m' < m hold L + 1 - m' entries each
        m * (2 * band_limit + 3 - m) / 2 + (ell - m)
    }

    /// Fills `out` (length [`tri_len`]) with `lambda(ell, m, cos theta)` for all
    /// `0 <= m <= ell <= L`, given `cos theta` and `sin theta >= 0`.
    pub fn fill(&self, cos_theta: f64, sin_theta: f64, out: &mut [f64]) {
        let big_l = self.band_limit;
        assert_eq!(out.len(), tri_len(big_l));
        let x = cos_theta;
        let mut diag = 1.0 / (4.0 * PI).sqrt();
        for m in 0..=big_l {
            if m > 0 {
                diag *= self.sectoral[m] * sin_theta;
            }
            let base = Self::index(big_l, m, m);
            out[base] = diag;
            if m < big_l {
                out[base + 1] = ((2 * m + 3) as f64).sqrt() * x * diag;
            }
            for ell in m + 2..=big_l {
                let idx = base + (ell - m);
                out[idx] = self.a[idx] * (x * out[idx - 1] - self.b[idx] * out[idx - 2]);
            }
        }
    }

    /// Allocating variant of [`Self::fill`] taking the colatitude.
    pub fn table(&self, theta: f64) -> Vec<f64> {
        let mut out = vec![0.0; tri_len(self.band_limit)];
        self.fill(theta.cos(), theta.sin().abs(), &mut out);
        out
    }
}

/// Unnormalized Legendre polynomial `P(ell, x)` by Bonnet's recurrence.
pub fn legendre_polynomial(ell: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if ell == 0 {
        return p0;
    }
    for k in 1..ell {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Returns `(P(n, x), P'(n, x))`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes in decreasing order
/// (increasing colatitude when read as `cos theta`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
