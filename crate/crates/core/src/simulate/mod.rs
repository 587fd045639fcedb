//! Gaussian isotropic random fields and the statistical isotropy harness.

mod isotropy;
mod ks;
mod spectrum;

pub use isotropy::{
    default_probes, isotropy_test, isotropy_test_with, EnsembleSpec, IsotropyConfig, IsotropyReport, ProbeTest,
    ProbeTuple, Shrinkage,
};
pub use ks::{kolmogorov_survival, ks_two_sample, KsResult};
pub use spectrum::{
    estimate_spectrum, realization_rng, sample_isotropic, sample_isotropic_with, scaled_spectrum, PowerSpectrum,
};
