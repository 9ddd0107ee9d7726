use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use slising_core::error::Error;
use slising_core::graph::{rectangle, EdgeWeights, EmbeddedGraph};
use slising_core::ising::{
    decay_bound, free_energy_series, generating_function, gibbs_bruteforce, high_temp_partition, two_point_free,
    two_point_plus, Backend, Boundary, DualPathConfig, IsingSpec, Observable,
};
use slising_core::limits::Limits;
use slising_core::loops::{enumerate_loops, write_census_csv, LoopBound, LoopFilter};
use slising_core::onsager::{critical_beta, onsager_quadrature};
use slising_core::record::{round_significant, to_rounded_json, Record};
use slising_core::verify::{run_suite, Suite, DEFAULT_SEED};

const EXIT_PROPERTY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;

/// Largest number of points accepted in a beta grid.
const MAX_GRID_POINTS: usize = 10_000;
/// Smallest distance from the critical point for the series method.
const CRITICAL_MARGIN: f64 = 1e-3;
/// Agreement required between methods in `correlate`.
const AGREEMENT: f64 = 1e-9;
/// Largest step count for `census`.
const MAX_CENSUS_STEPS: usize = 16;

#[derive(Parser)]
#[command(name = "slising", version, about = "Signed-loop expansions and Ising observables on planar graphs")]
struct Cli {
    /// Zero all runtime fields so that repeated runs print identical bytes.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a property suite over the bundled fixtures.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate -beta f(beta) by quadrature and by the loop series.
    FreeEnergy {
        /// `start:step:stop` or a comma-separated list.
        #[arg(long)]
        beta: String,
        #[arg(long, value_enum, default_value = "both")]
        method: FreeEnergyMethod,
        #[arg(long, default_value_t = 12)]
        r_max: usize,
        /// Half side of the box holding the anchored loops; defaults to r_max.
        #[arg(long)]
        half_width: Option<usize>,
        /// Output file; `.json` selects JSON, anything else CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-point functions on square boxes, with method cross-checks.
    Correlate {
        #[arg(long, value_enum)]
        bc: BoundaryArg,
        /// Grid offset `i,j` of the first spin.
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        #[arg(long)]
        beta: f64,
        /// Box sides, comma-separated.
        #[arg(long, default_value = "3")]
        sizes: String,
        /// Output file; `.csv` selects CSV, anything else JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The even-subgraph generating function at x = tanh(beta).
    Partition {
        /// Graph JSON file.
        #[arg(long, conflicts_with = "rectangle")]
        graph: Option<PathBuf>,
        /// Built-in rectangle `WxH`.
        #[arg(long)]
        rectangle: Option<String>,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value = "det")]
        backend: BackendArg,
        /// Truncation length for the series backend.
        #[arg(long, default_value_t = 12)]
        r_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the loops of a graph up to a step count as CSV.
    Census {
        #[arg(long, conflicts_with = "rectangle")]
        graph: Option<PathBuf>,
        #[arg(long)]
        rectangle: Option<String>,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FreeEnergyMethod {
    Onsager,
    Series,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Free,
    Plus,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Det,
    Enum,
    Series,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded(_) => EXIT_CAP,
            Error::Numerical(_) => EXIT_PROPERTY,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_INPUT, message: e.to_string() }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure { code: EXIT_INPUT, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limits = Limits::from_env();
    let timing = !cli.no_timing;
    let result = match cli.command {
        Command::Verify { suite, seed, out } => cmd_verify(&suite, seed, out.as_deref(), &limits, timing),
        Command::FreeEnergy { beta, method, r_max, half_width, out } => {
            cmd_free_energy(&beta, method, r_max, half_width.unwrap_or(r_max), out.as_deref())
        }
        Command::Correlate { bc, u, v, beta, sizes, out } => cmd_correlate(bc, &u, &v, beta, &sizes, out.as_deref(), &limits),
        Command::Partition { graph, rectangle, beta, backend, r_max, out } => {
            cmd_partition(graph.as_deref(), rectangle.as_deref(), beta, backend, r_max, out.as_deref(), &limits, timing)
        }
        Command::Census { graph, rectangle, steps, out } => cmd_census(graph.as_deref(), rectangle.as_deref(), steps, out.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_PROPERTY),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn elapsed_ms(start: Instant, timing: bool) -> f64 {
    if timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    }
}

fn cmd_verify(suite: &str, seed: u64, out: Option<&Path>, limits: &Limits, timing: bool) -> Outcome {
    let suite: Suite = suite.parse()?;
    let mut report = run_suite(suite, seed, limits)?;
    if !timing {
        report.checks.iter_mut().for_each(|c| c.runtime_ms = 0.0);
    }
    for c in &report.checks {
        eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    if let Some(first) = &report.first_failure {
        eprintln!("first failure: {first}");
    }
    emit(out, &to_rounded_json(&report))?;
    Ok(report.passed)
}

fn parse_number(s: &str, what: &str) -> Result<f64, Failure> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| input_error(format!("{what}: {s:?} is not a finite number")))
}

/// `start:step:stop` (inclusive, with a little slack for rounding) or a
/// comma-separated list.
fn parse_beta_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (parse_number(start, "beta")?, parse_number(step, "beta")?, parse_number(stop, "beta")?);
            if !(step > 0.0) || stop < start {
                return Err(input_error("beta grid needs a positive step and start <= stop"));
            }
            let count = ((stop - start) / step + 1e-9).floor() + 1.0;
            if count > MAX_GRID_POINTS as f64 {
                return Err(input_error(format!("beta grid has more than {MAX_GRID_POINTS} points")));
            }
            (0..count as usize).map(|k| round_significant(start + k as f64 * step)).collect()
        }
        [_] => spec.split(',').map(|s| parse_number(s, "beta")).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(input_error(format!("cannot read beta grid {spec:?}"))),
    };
    if let Some(b) = grid.iter().find(|&&b| !(b > 0.0)) {
        return Err(input_error(format!("inverse temperature must be positive, got {b}")));
    }
    Ok(grid)
}

#[derive(Clone, Copy, Serialize)]
struct FreeEnergyRow {
    beta: f64,
    value: f64,
    method: &'static str,
    error_bound: f64,
}

fn cmd_free_energy(beta: &str, method: FreeEnergyMethod, r_max: usize, half_width: usize, out: Option<&Path>) -> Outcome {
    let grid = parse_beta_grid(beta)?;
    let (onsager, series) = match method {
        FreeEnergyMethod::Onsager => (true, false),
        FreeEnergyMethod::Series => (false, true),
        FreeEnergyMethod::Both => (true, true),
    };
    if series {
        if let Some(b) = grid.iter().find(|&&b| (b - critical_beta()).abs() < CRITICAL_MARGIN) {
            return Err(input_error(format!("the loop series diverges at beta = {b}, too close to the critical point")));
        }
    }
    let mut rows = Vec::new();
    let mut agree = true;
    for &b in &grid {
        let exact = if onsager { Some(onsager_quadrature(b)?) } else { None };
        let approx = if series { Some(free_energy_series(b, half_width, r_max)?) } else { None };
        if let Some(q) = exact {
            rows.push(FreeEnergyRow { beta: b, value: q.value, method: "onsager", error_bound: q.change });
        }
        if let Some(s) = &approx {
            rows.push(FreeEnergyRow { beta: b, value: s.value, method: "series", error_bound: s.tail });
        }
        if let (Some(q), Some(s)) = (exact, &approx) {
            let gap = (q.value - s.value).abs();
            if gap >= s.tail + q.change + 1e-8 {
                eprintln!("disagreement at beta = {b}: |{} - {}| = {gap} exceeds {}", q.value, s.value, s.tail + q.change + 1e-8);
                agree = false;
            }
        }
    }
    let json = out.is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    if json {
        emit(out, &to_rounded_json(&rows))?;
    } else {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &rows {
            w.serialize(FreeEnergyRow {
                value: round_significant(r.value),
                error_bound: round_significant(r.error_bound),
                ..*r
            })?;
        }
        let bytes = w.into_inner().map_err(|e| input_error(e.to_string()))?;
        emit(out, &String::from_utf8(bytes).expect("CSV is UTF-8"))?;
    }
    Ok(agree)
}

fn parse_site(s: &str) -> Result<(usize, usize), Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [i, j] => match (i.parse(), j.parse()) {
            (Ok(i), Ok(j)) => Ok((i, j)),
            _ => Err(input_error(format!("site {s:?} must be two nonnegative integers i,j"))),
        },
        _ => Err(input_error(format!("site {s:?} must have the form i,j"))),
    }
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| input_error(format!("box size {p:?} must be a positive integer"))))
        .collect()
}

#[derive(Serialize)]
struct CorrelationRow {
    size: usize,
    boundary: &'static str,
    u: String,
    v: String,
    distance: usize,
    method: &'static str,
    value: Option<f64>,
    note: Option<String>,
    decay_bound: Option<f64>,
}

#[derive(Serialize)]
struct CorrelationReport {
    beta: f64,
    rows: Vec<CorrelationRow>,
    max_spread: f64,
    agree: bool,
    decay_ok: Option<bool>,
}

fn cmd_correlate(bc: BoundaryArg, u: &str, v: &str, beta: f64, sizes: &str, out: Option<&Path>, limits: &Limits) -> Outcome {
    let (a, b) = (parse_site(u)?, parse_site(v)?);
    if a == b {
        return Err(input_error("u and v must be distinct sites"));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(input_error(format!("inverse temperature must be positive, got {beta}")));
    }
    let boundary = match bc {
        BoundaryArg::Free => Boundary::Free,
        BoundaryArg::Plus => Boundary::Plus,
    };
    let label = match bc {
        BoundaryArg::Free => "free",
        BoundaryArg::Plus => "plus",
    };
    let distance = a.0.abs_diff(b.0) + a.1.abs_diff(b.1);
    let bound = if matches!(bc, BoundaryArg::Free) && beta < critical_beta() { Some(decay_bound(beta, distance)?) } else { None };
    let mut rows = Vec::new();
    let mut max_spread: f64 = 0.0;
    let mut decay_ok = bound.map(|_| true);
    for n in parse_sizes(sizes)? {
        let spec = IsingSpec::rectangle(n, n, beta, boundary)?;
        let (su, sv) = (spec.site(a.0, a.1)?, spec.site(b.0, b.1)?);
        let mut values = Vec::new();
        let mut push = |method: &'static str, result: Result<f64, Error>, rows: &mut Vec<CorrelationRow>| -> Result<(), Failure> {
            let (value, note) = match result {
                Ok(x) => (Some(x), None),
                Err(e @ (Error::CapExceeded(_) | Error::Domain(_))) => (None, Some(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            if let Some(x) = value {
                values.push(x);
            }
            rows.push(CorrelationRow {
                size: n,
                boundary: label,
                u: format!("{},{}", a.0, a.1),
                v: format!("{},{}", b.0, b.1),
                distance,
                method,
                value,
                note,
                decay_bound: bound,
            });
            Ok(())
        };
        push("gibbs", gibbs_bruteforce(&spec, Observable::TwoPoint(su, sv), limits), &mut rows)?;
        match boundary {
            Boundary::Plus => {
                push("enumeration", two_point_plus(&spec, su, sv, Backend::Enumeration, limits), &mut rows)?;
                push("determinant", two_point_plus(&spec, su, sv, Backend::Determinant, limits), &mut rows)?;
            }
            Boundary::Free => {
                let cfg = DualPathConfig::new(&spec.graph, su, sv)?;
                push("enumeration", two_point_free(&spec, &cfg, Backend::Enumeration, limits), &mut rows)?;
                push("determinant", two_point_free(&spec, &cfg, Backend::Determinant, limits), &mut rows)?;
            }
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if values.len() > 1 {
            max_spread = max_spread.max(hi - lo);
        }
        if let (Some(bd), Some(ok)) = (bound, decay_ok.as_mut()) {
            *ok &= values.iter().all(|&x| x >= -1e-12 && x <= bd);
        }
        if values.is_empty() {
            return Err(Failure { code: EXIT_CAP, message: format!("no method could evaluate the {n}x{n} box") });
        }
    }
    let agree = max_spread < AGREEMENT;
    let report = CorrelationReport { beta, rows, max_spread, agree, decay_ok };
    if out.is_some_and(|p| p.extension().is_some_and(|e| e == "csv")) {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &report.rows {
            w.serialize((r.size, r.boundary, &r.u, &r.v, r.distance, r.method, r.value.map(round_significant), &r.note, r.decay_bound.map(round_significant)))?;
        }
        let bytes = w.into_inner().map_err(|e| input_error(e.to_string()))?;
        let header = "size,boundary,u,v,distance,method,value,note,decay_bound\n";
        emit(out, &format!("{header}{}", String::from_utf8(bytes).expect("CSV is UTF-8")))?;
    } else {
        emit(out, &to_rounded_json(&report))?;
    }
    Ok(agree && decay_ok.unwrap_or(true))
}

fn parse_dimensions(s: &str) -> Result<(usize, usize), Failure> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    match parts.as_slice() {
        [w, h] => match (w.trim().parse(), h.trim().parse()) {
            (Ok(w), Ok(h)) => Ok((w, h)),
            _ => Err(input_error(format!("rectangle {s:?} must be WxH with positive integers"))),
        },
        _ => Err(input_error(format!("rectangle {s:?} must have the form WxH"))),
    }
}

fn load_graph(graph: Option<&Path>, rect: Option<&str>) -> Result<(EmbeddedGraph, String), Failure> {
    match (graph, rect) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            Ok((EmbeddedGraph::from_json_str(&text)?, path.display().to_string()))
        }
        (None, Some(r)) => {
            let (w, h) = parse_dimensions(r)?;
            Ok((rectangle(w, h)?, format!("rectangle {w}x{h}")))
        }
        (None, None) => Err(input_error("pass --graph FILE or --rectangle WxH")),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_partition(
    graph: Option<&Path>,
    rect: Option<&str>,
    beta: f64,
    backend: BackendArg,
    r_max: usize,
    out: Option<&Path>,
    limits: &Limits,
    timing: bool,
) -> Outcome {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(input_error(format!("inverse temperature must be positive, got {beta}")));
    }
    let (g, name) = load_graph(graph, rect)?;
    let (backend, method) = match backend {
        BackendArg::Det => (Backend::Determinant, "determinant"),
        BackendArg::Enum => (Backend::Enumeration, "enumeration"),
        BackendArg::Series => (Backend::LoopSeries { r_max }, "loop-series"),
    };
    let x = EdgeWeights::uniform(&g, beta.tanh());
    let error_bound = match backend {
        Backend::LoopSeries { r_max } => {
            let q = slising_core::loops::LATTICE_NORM * beta.tanh();
            (g.lattice_box().is_some() && q < 1.0).then(|| slising_core::loops::geometric_tail(2.0, q, r_max))
        }
        _ => Some(0.0),
    };
    let start = Instant::now();
    let value = generating_function(&g, &x, backend, limits)?;
    let mut lines = vec![Record {
        observable: "generating function at tanh(beta)".into(),
        method: method.into(),
        graph: name.clone(),
        beta: Some(beta),
        value,
        error_bound,
        runtime_ms: elapsed_ms(start, timing),
    }
    .to_json()];
    if g.lattice_box().is_some() && !g.has_additional_edges() {
        let start = Instant::now();
        let spec = IsingSpec::new(g.clone(), beta, Boundary::Free)?;
        let z = high_temp_partition(&spec, backend, limits)?;
        lines.push(
            Record {
                observable: "ising partition function, free boundary".into(),
                method: method.into(),
                graph: name,
                beta: Some(beta),
                value: z,
                error_bound: None,
                runtime_ms: elapsed_ms(start, timing),
            }
            .to_json(),
        );
    }
    emit(out, &(lines.join("\n") + "\n"))?;
    Ok(true)
}

fn cmd_census(graph: Option<&Path>, rect: Option<&str>, steps: usize, out: Option<&Path>) -> Outcome {
    if steps > MAX_CENSUS_STEPS {
        return Err(Failure { code: EXIT_CAP, message: format!("census is limited to {MAX_CENSUS_STEPS} steps") });
    }
    let (g, _) = load_graph(graph, rect)?;
    let loops = enumerate_loops(&g, LoopBound::Steps(steps), &LoopFilter::All)?;
    let mut buffer = Vec::new();
    write_census_csv(&g, &loops, &mut buffer)?;
    emit(out, &String::from_utf8(buffer).expect("CSV is UTF-8"))?;
    Ok(true)
}
