//! `trichain`: simulate triangle-switch chains and analyze small state spaces.
//!
//! Every flag can also be set through an environment variable named
//! `TRICHAIN_<FLAG>` (for example `TRICHAIN_SEED=7`).
//!
//! Exit codes: 0 success, 1 a verification found a violation, 2 bad flags,
//! 3 I/O failure, 4 invalid start graph.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use trichain::bounds::DriftReport;
use trichain::chains::{run_logged, write_trace, ChainConfig, ChainKind, RunOutput, TraceSummary};
use trichain::graph::{CubicGraph, NamedGraph};
use trichain::io::{from_edge_list, from_graph6, to_graph6};
use trichain::sampler::sample_uniform_cubic;
use trichain::statespace::{
    verify_alpha_bounds, verify_alpha_bounds_sampled, verify_irreducibility,
    verify_irreducibility_streaming, verify_step_bounds, StateSpace, TransitionStructure,
};
use trichain::stationary::{
    check_detailed_balance, max_abs_diff, metropolis_law, stationary, transition_matrix,
    uniform_make_probability,
};
use trichain::VertexClass;

#[derive(Parser)]
#[command(name = "trichain", version, about = "Triangle-switch Markov chains on cubic graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a chain and write its trace as CSV.
    Simulate(SimulateArgs),
    /// Dump every labeled cubic graph on n vertices as graph6.
    Enumerate(EnumerateArgs),
    /// Check connectivity of the move graph, optionally the short-path and
    /// expected-increase bounds.
    Verify(VerifyArgs),
    /// Exact stationary distribution of a chain on a small state space.
    Stationary(StationaryArgs),
    /// Drift-bound roots and the chain I density bound.
    Bounds(BoundsArgs),
    /// Uniform samples of labeled cubic graphs as graph6.
    SampleUniform(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ChainArg {
    O,
    I,
    Ii,
    Metropolis,
}

impl From<ChainArg> for ChainKind {
    fn from(c: ChainArg) -> Self {
        match c {
            ChainArg::O => ChainKind::O,
            ChainArg::I => ChainKind::I,
            ChainArg::Ii => ChainKind::II,
            ChainArg::Metropolis => ChainKind::Metropolis,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, env = "TRICHAIN_CHAIN", value_enum, default_value = "ii")]
    chain: ChainArg,
    /// Vertex count; may be omitted when the start graph comes from a file.
    #[arg(long, env = "TRICHAIN_N")]
    n: Option<usize>,
    #[arg(long, env = "TRICHAIN_STEPS", default_value_t = 0)]
    steps: u64,
    #[arg(long, env = "TRICHAIN_P", default_value_t = 0.5)]
    p: f64,
    #[arg(long, env = "TRICHAIN_Q", default_value_t = 0.5)]
    q: f64,
    #[arg(long, env = "TRICHAIN_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "TRICHAIN_SAMPLE_EVERY", default_value_t = 1)]
    sample_every: u64,
    /// Burn-in in units of n steps, excluded from the summary.
    #[arg(long, env = "TRICHAIN_BURN_IN_FACTOR", default_value_t = 20)]
    burn_in_factor: u64,
    /// k4packing, prism-packing, ladder, uniform, graph6:<file> or edges:<file>.
    /// Defaults to k4packing, or prism-packing when n ≡ 2 (mod 4).
    #[arg(long, env = "TRICHAIN_START")]
    start: Option<String>,
    /// Trace CSV path; stdout when absent.
    #[arg(long, env = "TRICHAIN_OUT")]
    out: Option<PathBuf>,
    /// Write every applied move, one per line, for replay.
    #[arg(long, env = "TRICHAIN_MOVES_OUT")]
    moves_out: Option<PathBuf>,
    /// Independent replicas with seeds seed, seed+1, ...; each writes
    /// `<out stem>_<i>.<ext>`.
    #[arg(long, env = "TRICHAIN_REPLICAS", default_value_t = 1)]
    replicas: usize,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long, env = "TRICHAIN_N")]
    n: usize,
    #[arg(long, env = "TRICHAIN_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, env = "TRICHAIN_N")]
    n: usize,
    /// Also check the one-move and two-move bounds (n ≤ 8).
    #[arg(long, env = "TRICHAIN_STEP_BOUNDS")]
    step_bounds: bool,
    /// Also check expected increases over Q_v (exhaustive for n ≤ 8,
    /// sampled above).
    #[arg(long, env = "TRICHAIN_ALPHA")]
    alpha: bool,
    #[arg(long, env = "TRICHAIN_SAMPLES", default_value_t = 100_000)]
    samples: usize,
    #[arg(long, env = "TRICHAIN_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct StationaryArgs {
    #[arg(long, env = "TRICHAIN_CHAIN", value_enum)]
    chain: ChainArg,
    #[arg(long, env = "TRICHAIN_N")]
    n: usize,
    /// Defaults to 4/(3n+4).
    #[arg(long, env = "TRICHAIN_P")]
    p: Option<f64>,
    /// Defaults to 1 − p.
    #[arg(long, env = "TRICHAIN_Q")]
    q: Option<f64>,
    #[arg(long, env = "TRICHAIN_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, env = "TRICHAIN_P", value_delimiter = ',', default_value = "0.5")]
    p: Vec<f64>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, env = "TRICHAIN_N")]
    n: usize,
    #[arg(long, env = "TRICHAIN_COUNT", default_value_t = 1)]
    count: usize,
    #[arg(long, env = "TRICHAIN_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "TRICHAIN_OUT")]
    out: Option<PathBuf>,
}

enum Failure {
    Violation(String),
    Usage(String),
    Io(String),
    StartGraph(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::StartGraph(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violation(m) | Failure::Usage(m) | Failure::Io(m) | Failure::StartGraph(m) => m,
        }
    }
}

type CliResult = Result<(), Failure>;

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

/// Stdout or a buffered file.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?))),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn check_n(n: usize, max: Option<usize>) -> CliResult {
    if n < 4 || n % 2 == 1 {
        return Err(Failure::Usage(format!("--n must be even and at least 4, got {n}")));
    }
    if let Some(m) = max.filter(|&m| n > m) {
        return Err(Failure::Usage(format!("--n must be at most {m}, got {n}")));
    }
    Ok(())
}

fn start_graph(spec: Option<&str>, n: Option<usize>, seed: u64) -> Result<CubicGraph, Failure> {
    let bad = |e: trichain::GraphError| Failure::StartGraph(e.to_string());
    let need_n = || n.ok_or_else(|| Failure::Usage("--n is required for this start".into()));
    let read = |path: &str| {
        std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{path}: {e}")))
    };
    let g = match spec {
        None => {
            let n = need_n()?;
            let kind = if n % 4 == 0 { NamedGraph::K4Packing(n) } else { NamedGraph::PrismPacking(n) };
            CubicGraph::named(kind).map_err(bad)?
        }
        Some("k4packing") => CubicGraph::named(NamedGraph::K4Packing(need_n()?)).map_err(bad)?,
        Some("prism-packing") => CubicGraph::named(NamedGraph::PrismPacking(need_n()?)).map_err(bad)?,
        Some("ladder") => CubicGraph::named(NamedGraph::Ladder(need_n()?)).map_err(bad)?,
        Some("uniform") => {
            sample_uniform_cubic(need_n()?, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(bad)?
        }
        Some(s) if s.starts_with("graph6:") => {
            let text = read(&s["graph6:".len()..])?;
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
            from_graph6(line.trim()).map_err(bad)?
        }
        Some(s) if s.starts_with("edges:") => from_edge_list(&read(&s["edges:".len()..])?).map_err(bad)?,
        Some(other) => return Err(Failure::Usage(format!("unknown start {other:?}"))),
    };
    if let Some(n) = n.filter(|&n| n != g.n()) {
        return Err(Failure::StartGraph(format!("start graph has {} vertices, --n is {n}", g.n())));
    }
    Ok(g)
}

fn replica_path(path: &Path, i: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{i}"),
    };
    path.with_file_name(name)
}

fn summary_line(label: &str, out: &RunOutput, burn_in: u64) -> String {
    match TraceSummary::after(&out.trace, burn_in) {
        Some(s) => format!(
            "{label}samples after burn-in {burn_in}: {}, mean delta {:.4}, min {}, max {}",
            s.samples, s.mean_delta, s.min_delta, s.max_delta
        ),
        None => format!("{label}no samples after burn-in {burn_in}"),
    }
}

fn simulate(a: SimulateArgs) -> CliResult {
    if let Some(n) = a.n {
        check_n(n, None)?;
    }
    if a.replicas == 0 {
        return Err(Failure::Usage("--replicas must be positive".into()));
    }
    if a.replicas > 1 && a.out.is_none() {
        return Err(Failure::Usage("--replicas above 1 needs --out".into()));
    }
    let mut cfg = ChainConfig::new(a.chain.into())
        .with_p(a.p)
        .with_q(a.q)
        .with_seed(a.seed)
        .with_steps(a.steps)
        .with_sample_every(a.sample_every);
    cfg.burn_in_factor = a.burn_in_factor;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let g0 = start_graph(a.start.as_deref(), a.n, a.seed)?;
    let burn_in = cfg.burn_in_steps(g0.n());

    let run_one = |i: usize, out: Option<&Path>, moves: Option<&Path>| -> Result<RunOutput, Failure> {
        let c = cfg.clone().with_seed(cfg.seed.wrapping_add(i as u64));
        let mut log: Option<Box<dyn Write>> = moves.map(|p| sink(Some(p))).transpose()?;
        let mut log_err = None;
        let res = run_logged(g0.clone(), &c, |m| {
            if let Some(w) = log.as_mut() {
                if let Err(e) = writeln!(w, "{m}") {
                    log_err.get_or_insert(e);
                }
            }
        })
        .map_err(|e| Failure::Usage(e.to_string()))?;
        if let (Some(p), Some(e)) = (moves, log_err) {
            return Err(io_err(p)(e));
        }
        if let (Some(p), Some(mut w)) = (moves, log) {
            w.flush().map_err(io_err(p))?;
        }
        let mut w = sink(out)?;
        write_trace(&mut w, &res.trace).map_err(|e| Failure::Io(e.to_string()))?;
        w.flush().map_err(|e| Failure::Io(e.to_string()))?;
        Ok(res)
    };

    if a.replicas == 1 {
        let res = run_one(0, a.out.as_deref(), a.moves_out.as_deref())?;
        let line = summary_line("", &res, burn_in);
        if a.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
        return Ok(());
    }
    let out = a.out.as_deref().expect("checked above");
    let results: Vec<Result<RunOutput, Failure>> = (0..a.replicas)
        .into_par_iter()
        .map(|i| {
            let moves = a.moves_out.as_deref().map(|p| replica_path(p, i));
            run_one(i, Some(&replica_path(out, i)), moves.as_deref())
        })
        .collect();
    for (i, r) in results.into_iter().enumerate() {
        let res = r?;
        println!("{}", summary_line(&format!("replica {i} (seed {}): ", a.seed.wrapping_add(i as u64)), &res, burn_in));
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs) -> CliResult {
    check_n(a.n, Some(10))?;
    let space = StateSpace::enumerate(a.n).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut w = sink(a.out.as_deref())?;
    space.write_graph6(&mut w).map_err(|e| Failure::Io(e.to_string()))?;
    w.flush().map_err(|e| Failure::Io(e.to_string()))?;
    eprintln!("states: {}", space.len());
    Ok(())
}

fn verify(a: VerifyArgs) -> CliResult {
    check_n(a.n, Some(10))?;
    if a.step_bounds && a.n > 8 {
        return Err(Failure::Usage("--step-bounds needs --n at most 8".into()));
    }
    let space = StateSpace::enumerate(a.n).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut ok = true;
    let ts = (a.n <= 8).then(|| TransitionStructure::build(&space));
    let report = match &ts {
        Some(ts) => verify_irreducibility(&space, ts),
        None => verify_irreducibility_streaming(&space),
    };
    println!("connected: {}, states: {}", report.connected, report.states);
    println!("components: {}", report.components.len());
    if let Some(d) = report.diameter {
        println!("diameter: {d}");
    }
    ok &= report.connected;
    if let Some(ts) = ts.as_ref().filter(|_| a.step_bounds) {
        let r = verify_step_bounds(&space, ts);
        println!(
            "triangle insertion: {} vertices checked, {} violations",
            r.triangle_free_vertices, r.triangle_insertion_violations
        );
        println!(
            "diamond within two moves: {} triangles checked, {} need two moves, {} violations",
            r.triangles, r.diamond_needs_two, r.diamond_violations
        );
        println!(
            "K4 within two moves: {} diamonds checked, {} need two moves, {} violations",
            r.diamonds, r.k4_needs_two, r.k4_violations
        );
        ok &= r.holds();
    }
    if a.alpha {
        let r = if a.n <= 8 {
            verify_alpha_bounds(&space)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            verify_alpha_bounds_sampled(a.n, a.samples, &mut rng)
                .map_err(|e| Failure::Usage(e.to_string()))?
        };
        println!(
            "expected increase: {} graphs, {} vertices, {} violations",
            r.graphs, r.vertices, r.violations
        );
        for (name, class) in [
            ("free", VertexClass::Free),
            ("isolated triangle", VertexClass::IsolatedTriangle),
            ("diamond external", VertexClass::DiamondExternal),
            ("diamond internal", VertexClass::DiamondInternal),
        ] {
            if let Some(m) = r.max_mean_f64(class) {
                println!("  max mean {name}: {m:.6}");
            }
        }
        ok &= r.holds();
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Violation("verification failed".into()))
    }
}

fn stationary_cmd(a: StationaryArgs) -> CliResult {
    check_n(a.n, Some(8))?;
    let p = a.p.unwrap_or_else(|| uniform_make_probability(a.n));
    let q = a.q.unwrap_or(1.0 - p);
    let kind: ChainKind = a.chain.into();
    let cfg = ChainConfig::new(kind).with_p(p).with_q(q);
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let space = StateSpace::enumerate(a.n).map_err(|e| Failure::Usage(e.to_string()))?;
    let m = transition_matrix(&space, &cfg).map_err(|e| Failure::Violation(e.to_string()))?;
    let st = stationary(&m).map_err(|e| Failure::Violation(e.to_string()))?;

    let mut w = sink(a.out.as_deref())?;
    let write = |w: &mut Box<dyn Write>| -> io::Result<()> {
        writeln!(w, "state,graph6,delta,pi")?;
        for (id, pi) in st.pi.iter().enumerate() {
            let g = space.graph(id);
            writeln!(w, "{id},{},{},{pi:.17e}", to_graph6(&g), g.triangle_count())?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Failure::Io(e.to_string()))?;
    drop(w);

    let uniform = vec![1.0 / space.len() as f64; space.len()];
    let mut lines = vec![
        format!("residual: {:.3e}", st.residual),
        format!("max deviation from uniform: {:.3e}", max_abs_diff(&st.pi, &uniform)),
        format!("detailed balance violation: {:.3e}", check_detailed_balance(&m, &st.pi)),
    ];
    if kind == ChainKind::Metropolis {
        let dev = max_abs_diff(&st.pi, &metropolis_law(&space, q));
        lines.push(format!("max deviation from q^(-2 delta) law: {dev:.3e}"));
    }
    for l in lines {
        if a.out.is_some() {
            println!("{l}");
        } else {
            eprintln!("{l}");
        }
    }
    Ok(())
}

fn bounds(a: BoundsArgs) -> CliResult {
    println!("{}", DriftReport::CSV_HEADER);
    for p in a.p {
        let r = DriftReport::new(p).map_err(|e| Failure::Usage(e.to_string()))?;
        println!("{}", r.csv_row());
    }
    Ok(())
}

fn sample_uniform(a: SampleArgs) -> CliResult {
    check_n(a.n, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut w = sink(a.out.as_deref())?;
    for _ in 0..a.count {
        let g = sample_uniform_cubic(a.n, &mut rng).map_err(|e| Failure::Usage(e.to_string()))?;
        writeln!(w, "{}", to_graph6(&g)).map_err(|e| Failure::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Failure::Io(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Verify(a) => verify(a),
        Command::Stationary(a) => stationary_cmd(a),
        Command::Bounds(a) => bounds(a),
        Command::SampleUniform(a) => sample_uniform(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
