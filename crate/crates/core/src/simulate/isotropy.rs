//! Monte-Carlo check that a shrinkage rule keeps an isotropic field isotropic.
//!
//! Two independent ensembles are drawn from the same spectrum and shrunk with
//! the same rule. The regularized field of the first ensemble is sampled at
//! the probe points `x_i`, the second at the rotated probes `R x_i`; equality
//! in law is checked with two-sample KS tests on
//!
//! * each marginal `T(x_i)` against `T(R x_i)`, and
//! * each probe pair projected on a fixed random direction,
//!   `u . (T(x_i), T(x_j))` against `u . (T(R x_i), T(R x_j))`.
//!
//! The projection test only covers one direction of the joint law. The
//! family-wise significance is split over all tests (Bonferroni).

use num_complex::Complex64;
use rand::Rng;

use super::ks::{ks_two_sample, KsResult};
use super::spectrum::{realization_rng, sample_isotropic_with, PowerSpectrum};
use crate::coeffs::{l1_soft_threshold, CoefficientSet, DegreeWeights};
use crate::error::{ensure_non_negative, ensure_same_band_limit, Error, Result};
use crate::regularize::regularize;
use crate::sht::{spherical_harmonics, Rotation, SpherePoint};

/// Stream offset separating the projection-direction draw from realizations.
const PROJECTION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub spectrum: PowerSpectrum,
    pub realizations: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(spectrum: PowerSpectrum, realizations: usize, seed: u64) -> Result<Self> {
        if realizations == 0 {
            return Err(Error::Domain("an ensemble needs at least one realization".into()));
        }
        Ok(Self {
            spectrum,
            realizations,
            seed,
        })
    }

    /// Realization `index` of ensemble `side` (0 or 1).
    pub fn realization(&self, side: u64, index: usize) -> CoefficientSet {
        let stream = 2 * index as u64 + side;
        sample_isotropic_with(&self.spectrum, &mut realization_rng(self.seed, stream))
    }
}

/// Shrinkage rule applied to every realization.
#[derive(Debug, Clone, PartialEq)]
pub enum Shrinkage {
    /// Degree-block soft-thresholding with weights `beta`.
    Block { beta: DegreeWeights, lambda: f64 },
    /// Per-coefficient soft-thresholding (coordinate dependent).
    Coefficientwise { lambda: f64 },
}

impl Shrinkage {
    pub fn apply(&self, a: &CoefficientSet) -> Result<CoefficientSet> {
        match self {
            Shrinkage::Block { beta, lambda } => Ok(regularize(a, beta, *lambda)?.into_coefficients()),
            Shrinkage::Coefficientwise { lambda } => l1_soft_threshold(a, *lambda),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyConfig {
    pub ensemble: EnsembleSpec,
    pub shrinkage: Shrinkage,
    pub rotation: Rotation,
    pub probes: Vec<SpherePoint>,
    /// Family-wise significance level.
    pub significance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeTuple {
    Single(usize),
    Pair(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTest {
    pub tuple: ProbeTuple,
    pub ks: KsResult,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyReport {
    pub realizations: usize,
    pub seed: u64,
    pub rotation: Rotation,
    pub probes: Vec<SpherePoint>,
    pub rotated_probes: Vec<SpherePoint>,
    pub significance: f64,
    /// Significance per individual test after the Bonferroni split.
    pub per_test_level: f64,
    /// Direction `(cos psi, sin psi)` used for pair projections.
    pub projection: [f64; 2],
    pub tests: Vec<ProbeTest>,
    /// Set when every regularized realization vanished; no test was run.
    pub skipped: bool,
}

impl IsotropyReport {
    /// True when no test rejected (a skipped run counts as passed).
    pub fn passed(&self) -> bool {
        self.tests.iter().all(|t| t.passed)
    }

    pub fn min_p_value(&self) -> f64 {
        self.tests.iter().map(|t| t.ks.p_value).fold(1.0, f64::min)
    }
}

/// Runs the harness with block shrinkage and significance 0.01.
pub fn isotropy_test(
    ensemble: &EnsembleSpec,
    beta: &DegreeWeights,
    lambda: f64,
    rotation: &Rotation,
    probes: &[SpherePoint],
) -> Result<IsotropyReport> {
    isotropy_test_with(&IsotropyConfig {
        ensemble: ensemble.clone(),
        shrinkage: Shrinkage::Block {
            beta: beta.clone(),
            lambda,
        },
        rotation: *rotation,
        probes: probes.to_vec(),
        significance: 0.01,
    })
}

pub fn isotropy_test_with(config: &IsotropyConfig) -> Result<IsotropyReport> {
    let probes = &config.probes;
    if probes.len() < 2 {
        return Err(Error::Domain("the isotropy harness needs at least two probes".into()));
    }
    if !(config.significance > 0.0 && config.significance < 1.0) {
        return Err(Error::InvalidParameter {
            name: "significance",
            expected: "in (0, 1)",
            value: config.significance,
        });
    }
    let band_limit = config.ensemble.spectrum.band_limit();
    match &config.shrinkage {
        Shrinkage::Block { beta, lambda } => {
            ensure_same_band_limit(band_limit, beta.band_limit())?;
            ensure_non_negative("lambda", *lambda)?;
        }
        Shrinkage::Coefficientwise { lambda } => ensure_non_negative("lambda", *lambda)?,
    }

    let rotated: Vec<SpherePoint> = probes.iter().map(|p| config.rotation.rotate_point(*p)).collect();
    let basis = |pts: &[SpherePoint]| -> Vec<Vec<Complex64>> {
        pts.iter()
            .map(|p| spherical_harmonics(band_limit, p.theta, p.phi))
            .collect()
    };
    let original_basis = basis(probes);
    let rotated_basis = basis(&rotated);

    let n = config.ensemble.realizations;
    let k = probes.len();
    // values[side][probe][realization]
    let mut values = vec![vec![Vec::with_capacity(n); k]; 2];
    let mut all_zero = true;
    for (side, samples) in values.iter_mut().enumerate() {
        let ys = if side == 0 { &original_basis } else { &rotated_basis };
        for i in 0..n {
            let a = config.shrinkage.apply(&config.ensemble.realization(side as u64, i))?;
            if a.as_slice().iter().any(|c| c.norm_sqr() > 0.0) {
                all_zero = false;
            }
            for (probe, y) in samples.iter_mut().zip(ys) {
                let v: Complex64 = a.as_slice().iter().zip(y).map(|(c, y)| c * y).sum();
                probe.push(v.re);
            }
        }
    }

    let psi = realization_rng(config.ensemble.seed, PROJECTION_STREAM).random_range(0.0..std::f64::consts::TAU);
    let projection = [psi.cos(), psi.sin()];

    let mut tuples: Vec<ProbeTuple> = (0..k).map(ProbeTuple::Single).collect();
    for i in 0..k {
        for j in i + 1..k {
            tuples.push(ProbeTuple::Pair(i, j));
        }
    }
    let per_test_level = config.significance / tuples.len() as f64;

    let mut report = IsotropyReport {
        realizations: n,
        seed: config.ensemble.seed,
        rotation: config.rotation,
        probes: probes.clone(),
        rotated_probes: rotated,
        significance: config.significance,
        per_test_level,
        projection,
        tests: Vec::new(),
        skipped: all_zero,
    };
    if all_zero {
        return Ok(report);
    }

    let project = |side: usize, i: usize, j: usize| -> Vec<f64> {
        values[side][i]
            .iter()
            .zip(&values[side][j])
            .map(|(x, y)| projection[0] * x + projection[1] * y)
            .collect()
    };
    report.tests = tuples
        .into_iter()
        .map(|tuple| {
            let ks = match tuple {
                ProbeTuple::Single(i) => ks_two_sample(&values[0][i], &values[1][i]),
                ProbeTuple::Pair(i, j) => ks_two_sample(&project(0, i, j), &project(1, i, j)),
            };
            ProbeTest {
                tuple,
                passed: ks.p_value > per_test_level,
                ks,
            }
        })
        .collect();
    Ok(report)
}

/// Probe set used by the CLI: the north pole, two equatorial points and two
/// generic points.
pub fn default_probes() -> Vec<SpherePoint> {
    vec![
        SpherePoint::new(0.0, 0.0),
        SpherePoint::new(std::f64::consts::FRAC_PI_2, 0.0),
        SpherePoint::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
        SpherePoint::new(0.9, 2.3),
        SpherePoint::new(2.2, 4.1),
    ]
}
