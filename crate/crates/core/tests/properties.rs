use proptest::prelude::*;

use slising_core::cancellation::{pairing_crossings, pairings, sampled_bijection_audit, verify_cancellation};
use slising_core::even::{cycle_basis, generating_function_bruteforce, is_even};
use slising_core::fixtures::{four_cycle, two_squares};
use slising_core::graph::{rectangle, EdgeSet, EdgeWeights};
use slising_core::ising::*;
use slising_core::kac_ward::build_transition_matrix;
use slising_core::limits::Limits;
use slising_core::loops::{canonicalize, enumerate_loops, Loop, LoopBound, LoopFilter};
use slising_core::onsager::dual_beta;
use slising_core::record::round_significant;

fn loops_3x3() -> Vec<Loop> {
    enumerate_loops(&rectangle(3, 3).unwrap(), LoopBound::Steps(10), &LoopFilter::All).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_ignores_start_and_direction(index in 0usize..10_000, shift in 0usize..20, reverse in any::<bool>()) {
        let g = rectangle(3, 3).unwrap();
        let loops = loops_3x3();
        let l = &loops[index % loops.len()];
        let mut path = l.vertices().to_vec();
        let n = path.len();
        path.rotate_left(shift % n);
        if reverse {
            path.reverse();
        }
        let again = canonicalize(&g, &path).unwrap();
        prop_assert_eq!(&again, l);
        prop_assert_eq!(l.steps() % l.multiplicity(), 0);
        let expected: i8 = if l.winding_turns() % 2 == 0 { -1 } else { 1 };
        prop_assert_eq!(l.sign(), expected);
    }

    #[test]
    fn loop_weight_is_homogeneous(index in 0usize..10_000, c in -2.0f64..2.0) {
        let g = rectangle(3, 3).unwrap();
        let loops = loops_3x3();
        let l = &loops[index % loops.len()];
        let x = EdgeWeights::from_vec(&g, (0..g.num_edges()).map(|e| 0.1 + 0.05 * e as f64).collect()).unwrap();
        let scaled = EdgeWeights::from_vec(&g, x.as_slice().iter().map(|w| c * w).collect()).unwrap();
        let want = c.powi(l.length() as i32) * l.weight(&g, &x);
        prop_assert!((l.weight(&g, &scaled) - want).abs() <= 1e-12 * want.abs().max(1e-12));
    }

    #[test]
    fn determinant_matches_subset_sum(w in 1usize..=3, h in 1usize..=3, seed in proptest::collection::vec(-0.4f64..=0.4, 12)) {
        let g = rectangle(w, h).unwrap();
        let x = EdgeWeights::from_vec(&g, seed[..g.num_edges()].to_vec()).unwrap();
        let det = build_transition_matrix(&g, &x).unwrap().determinant_evaluation().unwrap();
        let z = generating_function_bruteforce(&g, &x, &Limits::default()).unwrap();
        prop_assert!((det - z).abs() <= 1e-10 * z.abs());
    }

    #[test]
    fn even_subsets_form_a_group(mask_a in 0u32..16, mask_b in 0u32..16) {
        let g = rectangle(3, 3).unwrap();
        let basis = cycle_basis(&g);
        let combine = |mask: u32| {
            let mut f = EdgeSet::empty(g.num_edges());
            for (i, c) in basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    f.symmetric_difference_with(c);
                }
            }
            f
        };
        let (mut a, b) = (combine(mask_a), combine(mask_b));
        prop_assert!(is_even(&g, &a) && is_even(&g, &b));
        a.symmetric_difference_with(&b);
        prop_assert!(is_even(&g, &a));
    }

    #[test]
    fn rounding_is_idempotent(x in proptest::num::f64::NORMAL) {
        let r = round_significant(x);
        prop_assert_eq!(round_significant(r), r);
        prop_assert!((r - x).abs() <= 1e-14 * x.abs());
    }

    #[test]
    fn crossings_survive_rotation_and_reflection(k in 1usize..=4, index in 0usize..1000, shift in 0usize..8) {
        let n = 2 * k;
        let all = pairings(n);
        let p = &all[index % all.len()];
        let normalize = |f: &dyn Fn(usize) -> usize| -> Vec<(usize, usize)> {
            p.iter().map(|&(a, b)| (f(a).min(f(b)), f(a).max(f(b)))).collect()
        };
        let rotated = normalize(&|i| (i + shift) % n);
        let reflected = normalize(&|i| n - 1 - i);
        prop_assert_eq!(pairing_crossings(&rotated), pairing_crossings(p));
        prop_assert_eq!(pairing_crossings(&reflected), pairing_crossings(p));
    }

    #[test]
    fn cancellation_for_random_weights(values in proptest::collection::vec(-1.0f64..1.0, 7)) {
        for g in [four_cycle(), two_squares()] {
            let x = EdgeWeights::from_vec(&g, values[..g.num_edges()].to_vec()).unwrap();
            let report = verify_cancellation(&g, 8, &x).unwrap();
            prop_assert!(report.passed, "{:?}", report);
        }
    }

    #[test]
    fn bijection_on_random_labellings(pick in 0usize..100, seed in any::<u64>()) {
        let g = two_squares();
        let loops = enumerate_loops(&g, LoopBound::Steps(8), &LoopFilter::All).unwrap();
        let squares: Vec<Loop> = loops.iter().filter(|l| l.steps() == 4).cloned().collect();
        let mut candidates: Vec<Vec<Loop>> = loops.iter().filter(|l| !l.is_edge_disjoint(&g)).map(|l| vec![l.clone()]).collect();
        candidates.push(vec![squares[0].clone(), squares[1].clone()]);
        candidates.push(vec![squares[0].clone(), squares[0].clone()]);
        let chosen = &candidates[pick % candidates.len()];
        let audit = sampled_bijection_audit(&g, chosen, 20, seed).unwrap();
        prop_assert!(audit.passed(), "{:?}", audit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn high_temperature_expansion_matches_spins(w in 1usize..=3, h in 1usize..=3, beta in 0.05f64..1.5) {
        let spec = IsingSpec::rectangle(w, h, beta, Boundary::Free).unwrap();
        let gibbs = gibbs_bruteforce(&spec, Observable::Partition, &Limits::default()).unwrap();
        let ht = high_temp_partition(&spec, Backend::Enumeration, &Limits::default()).unwrap();
        prop_assert!((gibbs - ht).abs() <= 1e-10 * gibbs);
    }

    #[test]
    fn plus_correlations_are_symmetric_and_bounded(a in 0usize..16, b in 0usize..16, beta in 0.1f64..1.2) {
        prop_assume!(a != b);
        let spec = IsingSpec::rectangle(4, 4, beta, Boundary::Plus).unwrap();
        let l = Limits::default();
        let uv = two_point_plus(&spec, a, b, Backend::Enumeration, &l).unwrap();
        let vu = two_point_plus(&spec, b, a, Backend::Enumeration, &l).unwrap();
        prop_assert!((uv - vu).abs() < 1e-12);
        prop_assert!(uv > 0.0 && uv <= 1.0 + 1e-12);
    }

    #[test]
    fn free_correlations_are_symmetric_and_bounded(a in 0usize..12, b in 0usize..12, beta in 0.1f64..1.2) {
        prop_assume!(a != b);
        let spec = IsingSpec::rectangle(3, 4, beta, Boundary::Free).unwrap();
        let l = Limits::default();
        let uv = two_point_free(&spec, &DualPathConfig::new(&spec.graph, a, b).unwrap(), Backend::Enumeration, &l).unwrap();
        let vu = two_point_free(&spec, &DualPathConfig::new(&spec.graph, b, a).unwrap(), Backend::Enumeration, &l).unwrap();
        prop_assert!((uv - vu).abs() < 1e-12);
        prop_assert!(uv > 0.0 && uv <= 1.0 + 1e-12);
    }

    #[test]
    fn duality_is_an_involution(beta in 0.01f64..3.0) {
        let back = dual_beta(dual_beta(beta).unwrap()).unwrap();
        prop_assert!((back - beta).abs() < 1e-9 * beta.max(1.0));
    }
}
