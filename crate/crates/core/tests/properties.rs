//! Cross-module properties on random and structured unitaries.

use bellscope_core::detection::{
    bell_states, distinguishability_partition, outcome_supports, partition_supports, DetectorModel, SUPPORT_TOL,
};
use bellscope_core::fock::{evolve, NORM_TOL};
use bellscope_core::optics::haar_random_unitary;
use bellscope_core::search::random_elementary_circuit;
use bellscope_core::{Statistics, Unitary};
use proptest::prelude::*;

fn systems() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 2)), Just((2, 3)), Just((3, 2))]
}

fn unitary(n: usize, d: usize, seed: u64, structured: bool) -> Unitary {
    if structured {
        random_elementary_circuit(n, d, 1 + (seed % 7) as usize, seed)
    } else {
        haar_random_unitary(n * d, seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn output_permutation_keeps_class_structure(
        (n, d) in systems(),
        seed in any::<u64>(),
        structured in any::<bool>(),
        shift in 1usize..8,
    ) {
        let u = unitary(n, d, seed, structured);
        let m = n * d;
        let perm: Vec<usize> = (0..m).map(|i| (i + shift) % m).collect();
        let v = u.permute_rows(&perm).unwrap();
        let states = bell_states(n, d, Statistics::Boson).unwrap();
        let a = distinguishability_partition(&u, &states, DetectorModel::NumberResolving, SUPPORT_TOL).unwrap();
        let b = distinguishability_partition(&v, &states, DetectorModel::NumberResolving, SUPPORT_TOL).unwrap();
        prop_assert_eq!(a.classes, b.classes);
    }

    #[test]
    fn threshold_only_merges_classes(
        (n, d) in systems(),
        seed in any::<u64>(),
        structured in any::<bool>(),
    ) {
        let u = unitary(n, d, seed, structured);
        let states = bell_states(n, d, Statistics::Boson).unwrap();
        let nr = distinguishability_partition(&u, &states, DetectorModel::NumberResolving, SUPPORT_TOL).unwrap();
        let th = distinguishability_partition(&u, &states, DetectorModel::Threshold, SUPPORT_TOL).unwrap();
        prop_assert!(th.class_count <= nr.class_count);
        for class in &nr.classes {
            let owner = th.class_of(class[0]);
            prop_assert!(class.iter().all(|&i| th.class_of(i) == owner));
        }
    }

    #[test]
    fn distributions_are_normalized(
        (n, d) in systems(),
        seed in any::<u64>(),
        structured in any::<bool>(),
        fermion in any::<bool>(),
    ) {
        let stats = if fermion { Statistics::Fermion } else { Statistics::Boson };
        let u = unitary(n, d, seed, structured);
        for s in bell_states(n, d, stats).unwrap() {
            let total: f64 = evolve(&u, &s.state).unwrap().values().sum();
            prop_assert!((total - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn fermion_supports_never_repeat_a_detector(seed in any::<u64>(), structured in any::<bool>()) {
        let u = unitary(3, 2, seed, structured);
        let states = bell_states(3, 2, Statistics::Fermion).unwrap();
        let supports = outcome_supports(&u, &states, DetectorModel::NumberResolving, SUPPORT_TOL).unwrap();
        prop_assert!(supports.iter().all(|s| s.patterns().all(|p| !p.has_repeats())));
    }

    #[test]
    fn partition_covers_every_state_once((n, d) in systems(), seed in any::<u64>()) {
        let u = unitary(n, d, seed, true);
        let states = bell_states(n, d, Statistics::Boson).unwrap();
        let supports = outcome_supports(&u, &states, DetectorModel::NumberResolving, SUPPORT_TOL).unwrap();
        let report = partition_supports(&supports, DetectorModel::NumberResolving).unwrap();
        let mut seen: Vec<usize> = report.classes.concat();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..states.len()).collect::<Vec<_>>());
        prop_assert_eq!(report.singleton_count, report.fully_distinguished.len());
    }
}
