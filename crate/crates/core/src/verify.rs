//! Property suites over the bundled fixtures. Each check returns a
//! serializable record of what was compared and whether it held.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cancellation::{
    bijection_audit, configurations_with_usage, decomposition_generating_function, enumerate_configurations,
    pairing_parity_census, pairing_recursion_holds, sampled_bijection_audit, verify_cancellation,
    verify_cancellation_on_usage, verify_signed_decomposition,
};
use crate::error::{Error, Result};
use crate::even::{enumerate_even_subsets, generating_function_bruteforce};
use crate::fixtures::{corner_squares, crossed_pentagon, dumbbell, dumbbell_walk, figure_eight, four_cycle, two_squares};
use crate::graph::{rectangle, EdgeWeights, EmbeddedGraph};
use crate::ising::{
    decay_bound_check, free_energy_series, gibbs_bruteforce, high_temp_partition, low_temp_partition, two_point_free,
    two_point_plus, two_point_plus_with_path, Backend, Boundary, DualPathConfig, IsingSpec, Observable, PathOrder,
};
use crate::kac_ward::{build_transition_matrix, trace_identity_check};
use crate::limits::Limits;
use crate::loops::{canonicalize, length_sums, LoopFilter, LATTICE_NORM};
use crate::onsager::{critical_beta, critical_beta_bisection, onsager_quadrature};
use crate::torus::{torus_fourier_determinant, torus_norm, Torus, TorusSpec};

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Cancellation,
    Bijection,
    Norms,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identities" => Ok(Suite::Identities),
            "cancellation" => Ok(Suite::Cancellation),
            "bijection" => Ok(Suite::Bijection),
            "norms" => Ok(Suite::Norms),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidInput(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
    pub runtime_ms: f64,
}

impl Check {
    fn timed(name: &str, start: Instant, passed: bool, detail: Value) -> Check {
        Check { name: name.into(), passed, detail, runtime_ms: start.elapsed().as_secs_f64() * 1e3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub first_failure: Option<String>,
    pub checks: Vec<Check>,
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_weights(g: &EmbeddedGraph, rng: &mut ChaCha8Rng, sup: f64) -> EdgeWeights {
    let values = (0..g.num_edges()).map(|_| rng.random_range(-sup..=sup)).collect();
    EdgeWeights::from_vec(g, values).expect("one weight per edge")
}

/// `sqrt det(I - L(x))` against the even-subgraph sum on every rectangle
/// up to 3x3 for `draws` random weight vectors with `|x_e| <= 0.4`.
pub fn determinant_identity_check(seed: u64, draws: usize, limits: &Limits) -> Result<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for w in 1..=3 {
        for h in 1..=3 {
            let g = rectangle(w, h)?;
            for _ in 0..draws {
                let x = random_weights(&g, &mut rng, 0.4);
                let det = build_transition_matrix(&g, &x)?.determinant_evaluation()?;
                let z = generating_function_bruteforce(&g, &x, limits)?;
                worst = worst.max(relative(det, z));
                cases += 1;
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let passed = worst < 1e-10 && seconds < 10.0;
    Ok(Check::timed("determinant identity", start, passed, json!({"cases": cases, "max_relative_error": worst})))
}

/// Spin sums against the high-temperature (free) and low-temperature
/// (plus) expansions.
pub fn partition_triangle_check(limits: &Limits) -> Result<Check> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for beta in [0.2, 0.44, 0.7, 1.0] {
        for w in 1..=4 {
            for h in 1..=5 {
                if h <= 4 {
                    let spec = IsingSpec::rectangle(w, h, beta, Boundary::Free)?;
                    let gibbs = gibbs_bruteforce(&spec, Observable::Partition, limits)?;
                    worst = worst.max(relative(high_temp_partition(&spec, Backend::Enumeration, limits)?, gibbs));
                    cases += 1;
                }
                let spec = IsingSpec::rectangle(w, h, beta, Boundary::Plus)?;
                let gibbs = gibbs_bruteforce(&spec, Observable::Partition, limits)?;
                worst = worst.max(relative(low_temp_partition(&spec, Backend::Enumeration, limits)?, gibbs));
                cases += 1;
            }
        }
    }
    Ok(Check::timed("partition triangle", start, worst < 1e-9, json!({"cases": cases, "max_relative_error": worst})))
}

/// `tr L^r = -2 r f_r` on the 3x3 rectangle for `r <= 10`.
pub fn trace_identity_check_3x3(seed: u64) -> Result<Check> {
    let start = Instant::now();
    let g = rectangle(3, 3)?;
    let x = random_weights(&g, &mut ChaCha8Rng::seed_from_u64(seed), 0.4);
    let m = build_transition_matrix(&g, &x)?;
    let census = length_sums(&g, &x, 10, &LoopFilter::All)?;
    let report = trace_identity_check(&m, &census, 10);
    let worst = report.rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(Check::timed("trace identity", start, report.ok && worst < 1e-9, json!({"max_residual": worst, "rows": report.rows})))
}

/// Largest singular value of the torus transition matrix, and the norm
/// bound on rectangles for random weights.
pub fn torus_norm_check(seed: u64, draws: usize) -> Result<Check> {
    let start = Instant::now();
    let mut tori = Vec::new();
    let mut passed = true;
    for (w, h) in [(2, 2), (3, 3), (4, 4), (2, 4)] {
        let norm = Torus::new(TorusSpec { width: w, height: h })?.transition_matrix(1.0)?.operator_norm();
        let error = (norm - torus_norm()).abs();
        passed &= error < 1e-9;
        tori.push(json!({"width": w, "height": h, "norm": norm, "error": error}));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_slack = f64::INFINITY;
    for _ in 0..draws {
        let g = rectangle(rng.random_range(2..=5), rng.random_range(2..=5))?;
        let sup = rng.random_range(0.05..=1.0);
        let x = random_weights(&g, &mut rng, sup);
        let norm = build_transition_matrix(&g, &x)?.operator_norm();
        let slack = LATTICE_NORM * x.sup_norm() + 1e-9 - norm;
        worst_slack = worst_slack.min(slack);
    }
    passed &= worst_slack >= 0.0;
    Ok(Check::timed("torus norm", start, passed, json!({"tori": tori, "rectangle_draws": draws, "min_slack": worst_slack})))
}

/// `det(I - L(x))` on tori against the Fourier product.
pub fn fourier_product_check() -> Result<Check> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for w in 2..=4 {
        for h in 2..=4 {
            let spec = TorusSpec { width: w, height: h };
            let torus = Torus::new(spec)?;
            for x in [0.1, 0.2, 0.3, 0.4] {
                let det = torus.transition_matrix(x)?.determinant();
                let want = torus_fourier_determinant(spec, x);
                worst = worst.max(relative(det.re, want)).max(det.im.abs() / want.abs());
                cases += 1;
            }
        }
    }
    Ok(Check::timed("fourier product", start, worst < 1e-9, json!({"cases": cases, "max_relative_error": worst})))
}

/// The loop series for the free energy (r <= 12, 25x25 box) against the
/// quadrature on both sides of the critical point.
pub fn free_energy_check() -> Result<Check> {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut passed = true;
    for beta in [0.25, 0.3, 0.7, 0.9] {
        let t = Instant::now();
        let series = free_energy_series(beta, 12, 12)?;
        let exact = onsager_quadrature(beta)?;
        let seconds = t.elapsed().as_secs_f64();
        let gap = (series.value - exact.value).abs();
        let ok = gap < series.tail + 1e-8 && seconds < 60.0;
        passed &= ok;
        rows.push(json!({"beta": beta, "phase": series.phase, "series": series.value, "onsager": exact.value,
            "gap": gap, "tail": series.tail, "ok": ok}));
    }
    Ok(Check::timed("free energy", start, passed, json!({"rows": rows})))
}

/// Signed sums over loop configurations that reuse an edge, plus the two
/// worked examples.
pub fn cancellation_check(seed: u64) -> Result<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = true;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, g) in [("four-cycle", four_cycle()), ("two-squares", two_squares())] {
        let x = random_weights(&g, &mut rng, 0.9);
        for r in 1..=8 {
            let report = verify_cancellation(&g, r, &x)?;
            worst = worst.max(report.sum.abs());
            if !report.passed {
                passed = false;
                failures.push(json!({"graph": name, "report": report}));
            }
        }
    }
    let g = four_cycle();
    let x = 0.37f64;
    let configs = enumerate_configurations(&g, 8)?;
    let factors: Vec<f64> = configs.iter().map(|c| c.weight(&g, &EdgeWeights::uniform(&g, x))).collect();
    let doubled_ok = configs.len() == 2
        && factors.iter().any(|&f| (f + x.powi(8) / 2.0).abs() < 1e-15)
        && factors.iter().any(|&f| (f - x.powi(8) / 2.0).abs() < 1e-15);
    passed &= doubled_ok;

    let g = two_squares();
    let mut usage = vec![1; g.num_edges()];
    let shared = g.edge_between(g.grid_vertex(0, 1).expect("grid"), g.grid_vertex(1, 1).expect("grid")).expect("edge");
    usage[shared] = 2;
    let shared_count = configurations_with_usage(&g, 8, &usage)?.len();
    let shared_report = verify_cancellation_on_usage(&g, 8, &EdgeWeights::uniform(&g, 0.5), &usage)?;
    passed &= shared_report.passed && shared_count == 3;
    Ok(Check::timed(
        "cancellation",
        start,
        passed,
        json!({"max_abs_sum": worst, "four_cycle_r8_factors": factors, "shared_edge": shared_report, "failures": failures}),
    ))
}

/// Exhaustive labelled-loop audit on the 4-cycle for `n <= 8` steps.
pub fn bijection_check() -> Result<Check> {
    let start = Instant::now();
    let audit = bijection_audit(&four_cycle(), 8)?;
    Ok(Check::timed("bijection audit", start, audit.passed(), serde_json::to_value(&audit).expect("audit serializes")))
}

/// Further audits: exhaustive on two squares, sampled on the dumbbell
/// walk where the two traversals of the bridge run in opposite directions.
pub fn bijection_extended_check(seed: u64) -> Result<Check> {
    let start = Instant::now();
    let squares = bijection_audit(&two_squares(), 8)?;
    let g = dumbbell();
    let walk = canonicalize(&g, &dumbbell_walk(&g))?;
    let sampled = sampled_bijection_audit(&g, &[walk], 2000, seed)?;
    let passed = squares.passed() && sampled.passed() && sampled.case3 > 0;
    Ok(Check::timed("bijection audit, other fixtures", start, passed, json!({"two_squares": squares, "dumbbell": sampled})))
}

/// Pairings of `2k` points by crossing parity, and the recursion.
pub fn pairing_parity_check() -> Result<Check> {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut passed = true;
    for k in 1..=5 {
        let census = pairing_parity_census(k)?;
        let recursion = pairing_recursion_holds(k)?;
        passed &= census.even as i64 - census.odd as i64 == 1 && recursion;
        rows.push(json!({"k": k, "even": census.even, "odd": census.odd, "recursion": recursion}));
    }
    Ok(Check::timed("pairing parity", start, passed, json!({"rows": rows})))
}

/// Signed decompositions of every even subgraph of the small fixtures, and
/// the decomposition sum against the generating function.
pub fn decomposition_check(limits: &Limits) -> Result<Check> {
    let start = Instant::now();
    let mut passed = true;
    let mut rows = Vec::new();
    let fixtures = [
        ("four-cycle", four_cycle()),
        ("two-squares", two_squares()),
        ("crossed-pentagon", crossed_pentagon()),
        ("figure-eight", figure_eight()),
        ("corner-squares", corner_squares()),
        ("dumbbell", dumbbell()),
        ("rectangle 3x3", rectangle(3, 3)?),
    ];
    for (name, g) in fixtures {
        let mut subsets = 0;
        let mut crossed = 0;
        let mut ok = true;
        for f in enumerate_even_subsets(&g, limits)? {
            let report = verify_signed_decomposition(&g, &f)?;
            ok &= report.passed;
            crossed += usize::from(report.expected < 0);
            subsets += 1;
        }
        let x = EdgeWeights::from_vec(&g, (0..g.num_edges()).map(|e| 0.1 + 0.04 * (e % 9) as f64).collect())?;
        let z = generating_function_bruteforce(&g, &x, limits)?;
        let error = (decomposition_generating_function(&g, &x, limits)? - z).abs();
        ok &= error < 1e-12 * z.abs().max(1.0);
        passed &= ok;
        rows.push(json!({"graph": name, "even_subsets": subsets, "odd_crossing_subsets": crossed, "z_error": error, "ok": ok}));
    }
    Ok(Check::timed("signed decompositions", start, passed, json!({"rows": rows})))
}

/// Two-point functions from the loop representations against spin sums,
/// and their independence of the auxiliary path and face choices.
pub fn correlation_equivalence_check(limits: &Limits) -> Result<Check> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_choice: f64 = 0.0;
    let mut determinant_worst: f64 = 0.0;
    let mut determinant_skipped = 0;
    let mut cases = 0;
    for (w, h) in [(3, 3), (3, 4)] {
        for beta in [0.3, 0.7] {
            for boundary in [Boundary::Plus, Boundary::Free] {
                let spec = IsingSpec::rectangle(w, h, beta, boundary)?;
                let g = &spec.graph;
                for u in 0..g.num_vertices() {
                    for v in u + 1..g.num_vertices() {
                        let gibbs = gibbs_bruteforce(&spec, Observable::TwoPoint(u, v), limits)?;
                        let (value, alternatives, determinant) = match boundary {
                            Boundary::Plus => {
                                let value = two_point_plus(&spec, u, v, Backend::Enumeration, limits)?;
                                let other = two_point_plus_with_path(&spec, u, v, PathOrder::VerticalFirst, Backend::Enumeration, limits)?;
                                (value, vec![other], two_point_plus(&spec, u, v, Backend::Determinant, limits))
                            }
                            Boundary::Free => {
                                let cfg = DualPathConfig::new(g, u, v)?;
                                let value = two_point_free(&spec, &cfg, Backend::Enumeration, limits)?;
                                let mut others = Vec::new();
                                for us in DualPathConfig::star_candidates(g, u)? {
                                    for vs in DualPathConfig::star_candidates(g, v)? {
                                        for order in [PathOrder::HorizontalFirst, PathOrder::VerticalFirst] {
                                            let alt = DualPathConfig::with_stars(g, u, v, us, vs, order)?;
                                            others.push(two_point_free(&spec, &alt, Backend::Enumeration, limits)?);
                                        }
                                    }
                                }
                                (value, others, two_point_free(&spec, &cfg, Backend::Determinant, limits))
                            }
                        };
                        worst = worst.max((value - gibbs).abs());
                        for alt in alternatives {
                            worst_choice = worst_choice.max((alt - value).abs());
                        }
                        match determinant {
                            Ok(d) => determinant_worst = determinant_worst.max((d - gibbs).abs()),
                            Err(Error::Domain(_)) => determinant_skipped += 1,
                            Err(e) => return Err(e),
                        }
                        cases += 1;
                    }
                }
            }
        }
    }
    let passed = worst < 1e-9 && worst_choice < 1e-12 && determinant_worst < 1e-9;
    Ok(Check::timed(
        "correlation equivalence",
        start,
        passed,
        json!({"pairs": cases, "max_error": worst, "max_choice_spread": worst_choice,
            "determinant_max_error": determinant_worst, "determinant_uncertified": determinant_skipped}),
    ))
}

/// Free-boundary two-point functions on boxes up to 5x5 against the
/// exponential decay bound at `beta = 0.3`.
pub fn decay_check(limits: &Limits) -> Result<Check> {
    let start = Instant::now();
    let report = decay_bound_check(0.3, &[2, 3, 4, 5], 4, Backend::Enumeration, limits)?;
    Ok(Check::timed(
        "decay bound",
        start,
        report.violations == 0,
        json!({"beta": report.beta, "pairs": report.rows.len(), "violations": report.violations, "min_margin": report.min_margin}),
    ))
}

/// The bisection root of `exp(-2 beta) = tanh(beta)` against the closed form.
pub fn critical_point_check() -> Result<Check> {
    let start = Instant::now();
    let root = critical_beta_bisection();
    let error = (root - critical_beta()).abs();
    let tanh_error = (root.tanh() - (2f64.sqrt() - 1.0)).abs();
    Ok(Check::timed(
        "critical point",
        start,
        error < 1e-12 && tanh_error < 1e-12,
        json!({"root": root, "closed_form": critical_beta(), "error": error, "tanh_error": tanh_error}),
    ))
}

fn suite_checks(suite: Suite, seed: u64, limits: &Limits) -> Result<Vec<Check>> {
    Ok(match suite {
        Suite::Identities => vec![
            determinant_identity_check(seed, 20, limits)?,
            partition_triangle_check(limits)?,
            trace_identity_check_3x3(seed)?,
            free_energy_check()?,
            correlation_equivalence_check(limits)?,
            decay_check(limits)?,
            critical_point_check()?,
        ],
        Suite::Cancellation => vec![cancellation_check(seed)?, pairing_parity_check()?, decomposition_check(limits)?],
        Suite::Bijection => vec![bijection_check()?, bijection_extended_check(seed)?],
        Suite::Norms => vec![torus_norm_check(seed, 50)?, fourier_product_check()?],
        Suite::All => {
            let mut all = Vec::new();
            for s in [Suite::Identities, Suite::Cancellation, Suite::Bijection, Suite::Norms] {
                all.extend(suite_checks(s, seed, limits)?);
            }
            all
        }
    })
}

pub fn run_suite(suite: Suite, seed: u64, limits: &Limits) -> Result<SuiteReport> {
    let checks = suite_checks(suite, seed, limits)?;
    let first_failure = checks.iter().find(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail));
    Ok(SuiteReport { suite, seed, passed: first_failure.is_none(), first_failure, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("norms".parse::<Suite>().unwrap(), Suite::Norms);
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn fast_checks_pass() {
        assert!(critical_point_check().unwrap().passed);
        assert!(pairing_parity_check().unwrap().passed);
        assert!(fourier_product_check().unwrap().passed);
    }
}
