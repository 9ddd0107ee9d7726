use slising_core::cancellation::*;
use slising_core::even::enumerate_even_subsets;
use slising_core::fixtures::*;
use slising_core::graph::{rectangle, EdgeSet, EdgeWeights};
use slising_core::limits::Limits;
use slising_core::loops::{canonicalize, enumerate_loops, LoopBound, LoopFilter};
use slising_core::even::generating_function_bruteforce;

#[test]
fn pairing_parity_table() {
    let expected = [(1, 0), (2, 1), (8, 7), (48, 57 - 10), (384, 561 - 177)];
    for k in 1..=5 {
        let c = pairing_parity_census(k).unwrap();
        assert_eq!(c.even as i64 - c.odd as i64, 1, "k = {k}");
        assert!(pairing_recursion_holds(k).unwrap(), "k = {k}");
        if k <= 3 {
            assert_eq!((c.even, c.odd), expected[k - 1]);
        }
    }
    assert!(pairing_parity_census(0).is_err());
    assert!(pairing_parity_census(7).is_err());
}

#[test]
fn decomposition_signs() {
    let g = four_cycle();
    let all = EdgeSet::from_edges(g.num_edges(), 0..g.num_edges());
    let r = verify_signed_decomposition(&g, &all).unwrap();
    assert_eq!((r.decompositions, r.sign_sum, r.expected), (1, 1, 1));

    let g = crossed_pentagon();
    let mut crossed = 0;
    for f in enumerate_even_subsets(&g, &Limits::default()).unwrap() {
        let r = verify_signed_decomposition(&g, &f).unwrap();
        assert!(r.passed, "{r:?}");
        if r.expected == -1 {
            crossed += 1;
            assert_eq!(r.sign_sum, -1);
        }
    }
    assert!(crossed > 0);

    let g = figure_eight();
    for f in enumerate_even_subsets(&g, &Limits::default()).unwrap() {
        let r = verify_signed_decomposition(&g, &f).unwrap();
        assert!(r.passed, "{r:?}");
    }

    let g = corner_squares();
    let all = EdgeSet::from_edges(g.num_edges(), 0..g.num_edges());
    // The shared corner has degree four.
    let r = verify_signed_decomposition(&g, &all).unwrap();
    assert_eq!((r.decompositions, r.sign_sum, r.expected), (3, 1, 1));

    let odd = EdgeSet::from_edges(g.num_edges(), [0]);
    assert!(decompose_even_subset(&g, &odd).is_err());
}

#[test]
fn decompositions_reproduce_generating_function() {
    let limits = Limits::default();
    for g in [four_cycle(), two_squares(), rectangle(3, 3).unwrap(), crossed_pentagon(), figure_eight(), corner_squares(), dumbbell()] {
        let x = EdgeWeights::from_vec(&g, (0..g.num_edges()).map(|e| 0.15 + 0.03 * e as f64).collect()).unwrap();
        let a = decomposition_generating_function(&g, &x, &limits).unwrap();
        let b = generating_function_bruteforce(&g, &x, &limits).unwrap();
        assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn configuration_census() {
    let g = four_cycle();
    assert_eq!(enumerate_configurations(&g, 4).unwrap().len(), 1);
    let r8 = enumerate_configurations(&g, 8).unwrap();
    assert_eq!(r8.len(), 2);
    let x = 0.3f64;
    let w = EdgeWeights::uniform(&g, x);
    let mut factors: Vec<f64> = r8.iter().map(|c| c.weight(&g, &w)).collect();
    factors.sort_by(f64::total_cmp);
    assert!((factors[0] + x.powi(8) / 2.0).abs() < 1e-15);
    assert!((factors[1] - x.powi(8) / 2.0).abs() < 1e-15);
    assert!(enumerate_configurations(&rectangle(4, 4).unwrap(), 4).unwrap_err().is_cap());
    assert!(enumerate_configurations(&g, 11).unwrap_err().is_cap());
}

#[test]
fn cancellation_on_small_graphs() {
    for g in [four_cycle(), two_squares()] {
        let x = EdgeWeights::from_vec(&g, (0..g.num_edges()).map(|e| 0.2 + 0.05 * e as f64).collect()).unwrap();
        for r in 1..=8 {
            let report = verify_cancellation(&g, r, &x).unwrap();
            assert!(report.passed, "r = {r}: {report:?}");
        }
    }
}

#[test]
fn shared_edge_configurations_cancel() {
    let g = two_squares();
    let mut usage = vec![1; g.num_edges()];
    let shared = g.edge_between(g.grid_vertex(0, 1).unwrap(), g.grid_vertex(1, 1).unwrap()).unwrap();
    usage[shared] = 2;
    let configs = configurations_with_usage(&g, 8, &usage).unwrap();
    assert_eq!(configs.len(), 3);
    let x = EdgeWeights::uniform(&g, 0.35);
    let report = verify_cancellation_on_usage(&g, 8, &x, &usage).unwrap();
    assert!(report.passed, "{report:?}");
    let mut factors: Vec<f64> = report.terms.iter().map(|t| t.factor / 0.35f64.powi(8)).collect();
    factors.sort_by(f64::total_cmp);
    assert!((factors[0] + 1.0).abs() < 1e-12 && (factors[1] - 0.5).abs() < 1e-12 && (factors[2] - 0.5).abs() < 1e-12);
}

#[test]
fn configuration_sum_matches_partition_function() {
    let g = two_squares();
    let x = EdgeWeights::uniform(&g, 0.2);
    let z = generating_function_bruteforce(&g, &x, &Limits::default()).unwrap();
    let disjoint = configuration_sum(&g, &x, 10, true).unwrap();
    assert!((disjoint - z).abs() < 1e-12);
    let all = configuration_sum(&g, &x, 10, false).unwrap();
    let tail = slising_core::loops::geometric_tail(2.0, (2f64.sqrt() + 1.0) * 0.2, 10);
    assert!((all - z).abs() <= tail, "{all} {z} {tail}");
}

#[test]
fn exhaustive_audit_on_four_cycle() {
    let g = four_cycle();
    let audit = bijection_audit(&g, 8).unwrap();
    assert!(audit.passed(), "{audit:?}");
    assert_eq!(audit.configurations, 2);
    assert_eq!(audit.labelled, 40320);
    assert_eq!(audit.case3, 0);
}

#[test]
fn exhaustive_audit_on_two_squares() {
    let g = two_squares();
    let audit = bijection_audit(&g, 8).unwrap();
    assert!(audit.passed(), "{audit:?}");
    assert!(audit.case1 > 0 && audit.case2 > 0);
}

#[test]
fn sampled_audit_reaches_reverse_case() {
    let g = dumbbell();
    let walk = canonicalize(&g, &dumbbell_walk(&g)).unwrap();
    let audit = sampled_bijection_audit(&g, &[walk], 500, 7).unwrap();
    assert!(audit.passed(), "{audit:?}");
    assert_eq!(audit.case3, 500);
    let loops = enumerate_loops(&g, LoopBound::Steps(10), &LoopFilter::All).unwrap();
    let doubled: Vec<_> = loops.iter().filter(|l| l.steps() == 10).cloned().collect();
    assert_eq!(doubled.len(), 2);
    for l in doubled {
        let audit = sampled_bijection_audit(&g, &[l], 200, 11).unwrap();
        assert!(audit.passed(), "{audit:?}");
    }
}
