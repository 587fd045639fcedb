use num_complex::Complex64;
use proptest::prelude::*;
use sphreg::{
    degree_norms, flat_index, hybrid_norm, l1_norm, l1_soft_threshold, regularize, unflatten, CoefficientSet,
    DegreeWeights,
};

const MAX_L: usize = 8;

fn coefficient_set() -> impl Strategy<Value = CoefficientSet> {
    (0..=MAX_L).prop_flat_map(|l| {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), (l + 1) * (l + 1))
            .prop_map(|v| CoefficientSet::from_vec(v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect()).unwrap())
    })
}

fn weights(band_limit: usize) -> impl Strategy<Value = DegreeWeights> {
    proptest::collection::vec(0.1f64..3.0, band_limit).prop_map(|mut v| {
        v.insert(0, 1.0);
        DegreeWeights::new(v).unwrap()
    })
}

fn instance() -> impl Strategy<Value = (CoefficientSet, DegreeWeights, f64)> {
    coefficient_set().prop_flat_map(|a| {
        let l = a.band_limit();
        (Just(a), weights(l), 0.0f64..3.0)
    })
}

/// Random unitary matrix of size n from Gram-Schmidt on a random complex matrix.
fn unitary(n: usize, seed: &[(f64, f64)]) -> Vec<Vec<Complex64>> {
    let mut rows: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (r, im) = seed[(i * n + j) % seed.len()];
                    Complex64::new(r + if i == j { 3.0 } else { 0.0 }, im)
                })
                .collect()
        })
        .collect();
    for i in 0..n {
        for k in 0..i {
            let proj: Complex64 = rows[k].iter().zip(&rows[i]).map(|(u, v)| u.conj() * v).sum();
            let prev = rows[k].clone();
            for (x, u) in rows[i].iter_mut().zip(&prev) {
                *x -= proj * u;
            }
        }
        let norm = rows[i].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in rows[i].iter_mut() {
            *x /= norm;
        }
    }
    rows
}

fn apply_block_unitary(a: &CoefficientSet, seed: &[(f64, f64)]) -> CoefficientSet {
    let mut out = CoefficientSet::zeros(a.band_limit());
    for (ell, block) in a.blocks() {
        let u = unitary(2 * ell + 1, seed);
        for (i, row) in u.iter().enumerate() {
            out.block_mut(ell)[i] = row.iter().zip(block).map(|(x, y)| x * y).sum();
        }
    }
    out
}

fn seed_values() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 7..40)
}

proptest! {
    #[test]
    fn flat_index_roundtrip(index in 0usize..100_000) {
        let (ell, m) = unflatten(index);
        prop_assert!(m.unsigned_abs() as usize <= ell);
        prop_assert_eq!(flat_index(ell, m), index);
    }

    #[test]
    fn block_unitary_invariance(a in coefficient_set(), seed in seed_values()) {
        let beta = DegreeWeights::power_law(a.band_limit(), 0.7).unwrap();
        let b = apply_block_unitary(&a, &seed);
        for (x, y) in degree_norms(&a).as_slice().iter().zip(degree_norms(&b).as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x));
        }
        let (ha, hb) = (hybrid_norm(&a, &beta).unwrap(), hybrid_norm(&b, &beta).unwrap());
        prop_assert!((ha - hb).abs() <= 1e-12 * (1.0 + ha));
    }

    #[test]
    fn regularize_commutes_with_block_unitaries((a, beta, lambda) in instance(), seed in seed_values()) {
        let lhs = regularize(&apply_block_unitary(&a, &seed), &beta, lambda).unwrap();
        let rhs = apply_block_unitary(regularize(&a, &beta, lambda).unwrap().coefficients(), &seed);
        let scale = 1.0 + a.max_modulus();
        for (x, y) in lhs.coefficients().as_slice().iter().zip(rhs.as_slice()) {
            prop_assert!((x - y).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn shrinkage_law((a, beta, lambda) in instance()) {
        let r = regularize(&a, &beta, lambda).unwrap();
        let before = degree_norms(&a);
        let after = degree_norms(r.coefficients());
        for ell in 0..=a.band_limit() {
            let expected = (before.get(ell) - lambda * beta.get(ell)).max(0.0);
            prop_assert!((after.get(ell) - expected).abs() <= 1e-12 * before.get(ell).max(1e-300));
        }
    }

    #[test]
    fn blocks_stay_collinear((a, beta, lambda) in instance()) {
        let r = regularize(&a, &beta, lambda).unwrap();
        for ell in 0..=a.band_limit() {
            let t = r.shrink_factor(ell).unwrap_or(0.0);
            prop_assert!((0.0..=1.0).contains(&t));
            for (x, y) in r.coefficients().block(ell).iter().zip(a.block(ell)) {
                prop_assert!((x - y * t).norm() <= 1e-14 * (1.0 + y.norm()));
            }
        }
    }

    #[test]
    fn monotone_in_lambda((a, beta, lambda) in instance(), step in 0.0f64..1.0) {
        let lo = regularize(&a, &beta, lambda).unwrap();
        let hi = regularize(&a, &beta, lambda + step).unwrap();
        prop_assert!(hi.discrepancy() >= lo.discrepancy() - 1e-12 * (1.0 + lo.discrepancy()));
        prop_assert!(hi.hybrid_norm() <= lo.hybrid_norm() + 1e-12 * (1.0 + lo.hybrid_norm()));
        prop_assert!(hi.sparsity() >= lo.sparsity());
        prop_assert!(hi.active_degrees().len() <= lo.active_degrees().len());
    }

    #[test]
    fn real_fields_stay_real(seed in any::<u64>(), lambda in 0.0f64..2.0) {
        let spectrum = sphreg::PowerSpectrum::power_law(6, 1.0).unwrap();
        let a = sphreg::sample_isotropic(&spectrum, seed);
        prop_assert!(a.is_real_field());
        let r = regularize(&a, &DegreeWeights::constant(6), lambda).unwrap();
        prop_assert!(r.coefficients().is_real_field());
        prop_assert!(r.coefficients().conjugate_symmetry_violation(1e-15).is_none());
    }
}

#[test]
fn l1_norm_is_not_rotation_invariant() {
    // a_{1,0} = 1 versus the same dipole tilted onto the equator
    let mut a = CoefficientSet::zeros(1);
    a[(1, 0)] = Complex64::new(1.0, 0.0);
    let mut b = CoefficientSet::zeros(1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    b[(1, -1)] = Complex64::new(s, 0.0);
    b[(1, 1)] = Complex64::new(-s, 0.0);
    let beta = DegreeWeights::constant(1);
    assert!((hybrid_norm(&a, &beta).unwrap() - hybrid_norm(&b, &beta).unwrap()).abs() < 1e-15);
    assert!((l1_norm(&b) - l1_norm(&a) * 2f64.sqrt()).abs() < 1e-15);
    // a threshold between 1/sqrt(2) and 1 keeps one and kills the other
    let ta = l1_soft_threshold(&a, 0.8).unwrap();
    let tb = l1_soft_threshold(&b, 0.8).unwrap();
    assert_eq!(ta.zero_fraction(), 0.75);
    assert_eq!(tb.zero_fraction(), 1.0);
}
