//! Property tests for the distance zoo on randomly generated states.

use certikit::linalg;
use certikit::rng::seeded_rng;
use certikit::states::{
    bures_chisq, bures_sq, depolarize, fidelity, hs_distance, random_state, trace_distance,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Trace distance is sandwiched between Hilbert-Schmidt multiples.
    #[test]
    fn metric_sandwich(d in 2usize..6, r1 in 1usize..6, r2 in 1usize..6, seed in 0u64..10_000) {
        let rho = random_state(d, r1.min(d), seed).unwrap();
        let sigma = random_state(d, r2.min(d), seed + 77).unwrap();
        let dtr = trace_distance(&rho, &sigma).unwrap();
        let dhs = hs_distance(&rho, &sigma).unwrap();
        prop_assert!(0.5 * dhs <= dtr + 1e-9);
        prop_assert!(dtr <= 0.5 * (d as f64).sqrt() * dhs + 1e-9);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&dtr));
    }

    /// Squared Bures distance lower-bounds twice the trace distance, and
    /// the trace distance is at most the Bures distance.
    #[test]
    fn fidelity_sandwich(d in 2usize..6, r1 in 1usize..6, seed in 0u64..10_000) {
        let rho = random_state(d, r1.min(d), seed).unwrap();
        let sigma = random_state(d, d, seed + 177).unwrap();
        let dtr = trace_distance(&rho, &sigma).unwrap();
        let bsq = bures_sq(&rho, &sigma).unwrap();
        prop_assert!(0.5 * bsq <= dtr + 1e-9);
        prop_assert!(dtr <= bsq.sqrt() + 1e-9);
        let f = fidelity(&rho, &sigma).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }

    /// Chi-squared divergence dominates the squared Bures distance.
    #[test]
    fn chisq_dominates_bures(d in 2usize..6, seed in 0u64..10_000) {
        let rho = random_state(d, d, seed).unwrap();
        let sigma = depolarize(&random_state(d, d, seed + 277).unwrap(), 0.1).unwrap();
        let chi = bures_chisq(&rho, &sigma).unwrap();
        let bsq = bures_sq(&rho, &sigma).unwrap();
        prop_assert!(bsq <= chi + 1e-9);
    }

    /// Depolarizing floors the spectrum at `eta/d`.
    #[test]
    fn depolarize_floors_spectrum(d in 2usize..7, seed in 0u64..10_000, eta in 0.0f64..1.0) {
        let rho = random_state(d, 1, seed).unwrap();
        let out = depolarize(&rho, eta).unwrap();
        let min = *out.spectrum().values().last().unwrap();
        prop_assert!(min >= eta / d as f64 - 1e-12);
    }

    /// Quantum distances are invariant under a joint unitary rotation.
    #[test]
    fn unitary_invariance(d in 2usize..5, seed in 0u64..10_000) {
        let rho = random_state(d, d, seed).unwrap();
        let sigma = random_state(d, d, seed + 377).unwrap();
        let mut rng = seeded_rng(seed + 777);
        let u = linalg::haar_unitary(d, &mut rng);
        let rho_u = rho.conjugated(&u).unwrap();
        let sigma_u = sigma.conjugated(&u).unwrap();
        prop_assert!((trace_distance(&rho, &sigma).unwrap()
            - trace_distance(&rho_u, &sigma_u).unwrap()).abs() < 1e-9);
        prop_assert!((hs_distance(&rho, &sigma).unwrap()
            - hs_distance(&rho_u, &sigma_u).unwrap()).abs() < 1e-9);
        prop_assert!((fidelity(&rho, &sigma).unwrap()
            - fidelity(&rho_u, &sigma_u).unwrap()).abs() < 1e-9);
    }
}
