//! Seeded step functions for the four triangle-switch chains and the
//! trace-producing driver.
//!
//! Every step function consumes random numbers in a fixed documented order,
//! so a `(start graph, config, seed)` triple fully determines the run.
//! The generator is ChaCha8 seeded with `seed_from_u64`.

use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CubicGraph, GraphError, MotifCensus, Vertex};
use crate::moves::{
    break_valid, others, qv_into, BreakMove, LocalDelta, MakeMove, Move, MoveError, PathPair,
    Switch,
};
use crate::tracker::{TrackedGraph, TripleSets};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error("replay line {line}: {msg}")]
    Replay { line: usize, msg: String },
    #[error("trace i/o: {0}")]
    Trace(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChainKind {
    O,
    I,
    II,
    Metropolis,
}

impl FromStr for ChainKind {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "o" => Ok(ChainKind::O),
            "i" | "1" => Ok(ChainKind::I),
            "ii" | "2" => Ok(ChainKind::II),
            "metropolis" | "m" => Ok(ChainKind::Metropolis),
            other => Err(ChainError::InvalidConfig(format!("unknown chain {other:?}"))),
        }
    }
}

/// Default burn-in multiplier: statistics discard the first `20 n` steps.
pub const DEFAULT_BURN_IN_FACTOR: u64 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub kind: ChainKind,
    /// Make probability (chains O and I).
    pub p: f64,
    /// Break probability for chain I, base of the Metropolis acceptance.
    pub q: f64,
    pub seed: u64,
    pub steps: u64,
    pub sample_every: u64,
    /// Burn-in is `burn_in_factor * n` steps.
    pub burn_in_factor: u64,
}

impl ChainConfig {
    pub fn new(kind: ChainKind) -> Self {
        ChainConfig {
            kind,
            p: 0.5,
            q: 0.5,
            seed: 0,
            steps: 0,
            sample_every: 1,
            burn_in_factor: DEFAULT_BURN_IN_FACTOR,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_steps(mut self, steps: u64) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_sample_every(mut self, every: u64) -> Self {
        self.sample_every = every;
        self
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        let open = |name: &str, x: f64| {
            if x > 0.0 && x < 1.0 {
                Ok(())
            } else {
                Err(ChainError::InvalidConfig(format!("{name} = {x} is not in (0, 1)")))
            }
        };
        match self.kind {
            ChainKind::O => open("p", self.p)?,
            ChainKind::I => {
                open("p", self.p)?;
                open("q", self.q)?;
            }
            ChainKind::II => {}
            ChainKind::Metropolis => open("q", self.q)?,
        }
        if self.sample_every == 0 {
            return Err(ChainError::InvalidConfig("sample_every must be positive".into()));
        }
        Ok(())
    }

    pub fn burn_in_steps(&self, n: usize) -> u64 {
        self.burn_in_factor * n as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    MakeApplied,
    BreakApplied,
    /// Accepted Metropolis proposal.
    SwitchApplied,
    /// The proposed move was not a valid simple-graph switch.
    RejectedProposal,
    /// Nothing was attempted or the acceptance coin came up tails.
    NoOp,
}

/// A general 2-edge switch as applied by the Metropolis chain:
/// edges `ab`, `cd` replaced by `ac`, `bd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchRecord {
    pub a: Vertex,
    pub b: Vertex,
    pub c: Vertex,
    pub d: Vertex,
}

impl SwitchRecord {
    fn to_switch(self) -> Switch {
        Switch {
            remove: [(self.a, self.b), (self.c, self.d)],
            add: [(self.a, self.c), (self.b, self.d)],
        }
    }

    fn is_valid(&self, g: &CubicGraph) -> bool {
        let ids = [self.a, self.b, self.c, self.d];
        ids.iter().all(|&u| (u as usize) < g.n())
            && (0..4).all(|i| (i + 1..4).all(|j| ids[i] != ids[j]))
            && g.has_edge(self.a, self.b)
            && g.has_edge(self.c, self.d)
            && !g.has_edge(self.a, self.c)
            && !g.has_edge(self.b, self.d)
    }
}

/// A move applied by a chain step; the replay log holds one per line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppliedMove {
    Triangle(Move),
    Switch(SwitchRecord),
}

impl std::fmt::Display for AppliedMove {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppliedMove::Triangle(m) => write!(f, "{m}"),
            AppliedMove::Switch(s) => write!(f, "S {} {} {} {}", s.a, s.b, s.c, s.d),
        }
    }
}

impl FromStr for AppliedMove {
    type Err = MoveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(rest) = s.trim_start().strip_prefix("S ") {
            let ids: Vec<Vertex> = rest
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| MoveError::Parse(s.to_string())))
                .collect::<Result<_, _>>()?;
            let [a, b, c, d] =
                <[Vertex; 4]>::try_from(ids).map_err(|_| MoveError::Parse(s.to_string()))?;
            return Ok(AppliedMove::Switch(SwitchRecord { a, b, c, d }));
        }
        Ok(AppliedMove::Triangle(s.parse()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub kind: StepKind,
    pub applied: Option<AppliedMove>,
    pub delta: Option<LocalDelta>,
}

impl StepOutcome {
    const NOOP: StepOutcome = StepOutcome { kind: StepKind::NoOp, applied: None, delta: None };
    const REJECTED: StepOutcome =
        StepOutcome { kind: StepKind::RejectedProposal, applied: None, delta: None };

    fn applied(kind: StepKind, mv: AppliedMove, delta: LocalDelta) -> Self {
        StepOutcome { kind, applied: Some(mv), delta: Some(delta) }
    }
}

/// Ordered neighbour pairs `(x, w)` by index into the sorted neighbour list.
const ORDERED_PAIRS: [(usize, usize); 6] = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)];

fn apply_make(t: &mut TrackedGraph, m: MakeMove) -> StepOutcome {
    let d = t.apply_switch(&m.switch());
    StepOutcome::applied(StepKind::MakeApplied, AppliedMove::Triangle(Move::Make(m)), d)
}

fn apply_break(t: &mut TrackedGraph, b: BreakMove) -> StepOutcome {
    let d = t.apply_switch(&b.switch());
    StepOutcome::applied(StepKind::BreakApplied, AppliedMove::Triangle(Move::Break(b)), d)
}

/// One step of chain O.
///
/// Draws: `bool(p)`; make branch: site index in `M(G)`, then `0..4`
/// selecting `y` and `z`; break branch: site index in `B(G)`, role bit
/// `0..2` deciding which pair member is `x`, oriented edge `0..3n`.
/// An empty site set gives `NoOp` without further draws.
pub fn step_chain_o<R: Rng>(
    t: &mut TrackedGraph,
    sets: &mut TripleSets,
    p: f64,
    rng: &mut R,
) -> StepOutcome {
    let n = t.graph().n();
    let out = if rng.random_bool(p) {
        if sets.make_sites().is_empty() {
            return StepOutcome::NOOP;
        }
        let site = sets.make_sites()[rng.random_range(0..sets.make_sites().len())];
        let (v, x, w) = TripleSets::decode(t.graph(), site);
        let j = rng.random_range(0..4usize);
        let g = t.graph();
        let y = others(g, x, v)[j >> 1];
        let z = others(g, w, v)[j & 1];
        if y == z || g.has_edge(y, z) {
            return StepOutcome::REJECTED;
        }
        apply_make(t, MakeMove::new(y, x, v, w, z))
    } else {
        if sets.break_sites().is_empty() {
            return StepOutcome::NOOP;
        }
        let site = sets.break_sites()[rng.random_range(0..sets.break_sites().len())];
        let (v, a, c) = TripleSets::decode(t.graph(), site);
        let (x, w) = if rng.random_range(0..2u8) == 0 { (a, c) } else { (c, a) };
        let (y, z) = t.graph().oriented_edge(rng.random_range(0..3 * n));
        let b = BreakMove::new(v, x, w, y, z);
        if !break_valid(t.graph(), &b) {
            return StepOutcome::REJECTED;
        }
        apply_break(t, b)
    };
    if let Some(d) = &out.delta {
        sets.update(t.graph(), d);
    }
    out
}

/// One step of chain I.
///
/// Draws: vertex `0..n`; ordered neighbour pair `0..6`. If `xw ∈ E`:
/// oriented edge `0..3n`, then `bool(q)` only when the break is valid.
/// Otherwise: `0..4` selecting `y ∈ N(x)∖v` and `z ∈ N(w)∖v`, then
/// `bool(p)` only when the make is valid. Each distinct make is applied
/// with probability `p/(12n)` and each distinct break with `q/(9n²)`.
pub fn step_chain_i<R: Rng>(t: &mut TrackedGraph, p: f64, q: f64, rng: &mut R) -> StepOutcome {
    let g = t.graph();
    let n = g.n();
    let v = rng.random_range(0..n) as Vertex;
    let (i, k) = ORDERED_PAIRS[rng.random_range(0..6usize)];
    let nb = g.neighbors(v);
    let (x, w) = (nb[i], nb[k]);
    if g.has_edge(x, w) {
        let (y, z) = g.oriented_edge(rng.random_range(0..3 * n));
        let b = BreakMove::new(v, x, w, y, z);
        if !break_valid(g, &b) {
            return StepOutcome::REJECTED;
        }
        if !rng.random_bool(q) {
            return StepOutcome::NOOP;
        }
        apply_break(t, b)
    } else {
        let j = rng.random_range(0..4usize);
        let y = others(g, x, v)[j >> 1];
        let z = others(g, w, v)[j & 1];
        if y == z || g.has_edge(y, z) {
            return StepOutcome::REJECTED;
        }
        if !rng.random_bool(p) {
            return StepOutcome::NOOP;
        }
        apply_make(t, MakeMove::new(y, x, v, w, z))
    }
}

/// One step of chain II.
///
/// Draws: vertex `0..n`; `r ∈ 0..3` with the break branch taken iff
/// `r < Δ_v`. Break branch: oriented triangle `0..2Δ_v` at `v`, oriented
/// edge `0..3n`. Make branch: index into `Q_v`.
pub fn step_chain_ii<R: Rng>(t: &mut TrackedGraph, rng: &mut R) -> StepOutcome {
    let g = t.graph();
    let n = g.n();
    let v = rng.random_range(0..n) as Vertex;
    let dv = t.triangles_at(v) as usize;
    debug_assert_eq!(dv, g.triangles_at(v) as usize);
    if rng.random_range(0..3usize) < dv {
        let nb = g.neighbors(v);
        let pick = rng.random_range(0..2 * dv);
        let (i, k) = ORDERED_PAIRS
            .iter()
            .copied()
            .filter(|&(i, k)| g.has_edge(nb[i], nb[k]))
            .nth(pick)
            .expect("2Δ_v oriented triangles at v");
        let (y, z) = g.oriented_edge(rng.random_range(0..3 * n));
        let b = BreakMove::new(v, nb[i], nb[k], y, z);
        if !break_valid(g, &b) {
            return StepOutcome::REJECTED;
        }
        apply_break(t, b)
    } else {
        let mut buf = [PathPair::default(); 12];
        let len = qv_into(g, v, &mut buf);
        assert!(len > 0, "Q_v empty at vertex {v} with Δ_v = {dv}");
        let m = buf[rng.random_range(0..len)].to_make();
        debug_assert!(crate::moves::make_valid(g, &m));
        apply_make(t, m)
    }
}

/// One step of the Metropolis switch chain.
///
/// Draws: two oriented edges `0..3n` (redrawn together until they are
/// distinct as undirected edges), matching index `0..3` (0 keeps the
/// current pairing), and `bool(q^(Δ(G) − Δ(G') + 4))` for simple proposals.
pub fn step_metropolis_switch<R: Rng>(t: &mut TrackedGraph, q: f64, rng: &mut R) -> StepOutcome {
    let g = t.graph();
    let n = g.n();
    let ((a, b), (c, d)) = loop {
        let e1 = g.oriented_edge(rng.random_range(0..3 * n));
        let e2 = g.oriented_edge(rng.random_range(0..3 * n));
        if e1 != e2 && e1 != (e2.1, e2.0) {
            break (e1, e2);
        }
    };
    let rec = match rng.random_range(0..3u8) {
        0 => return StepOutcome::NOOP,
        1 => SwitchRecord { a, b, c, d },
        _ => SwitchRecord { a, b, c: d, d: c },
    };
    if !rec.is_valid(g) {
        return StepOutcome::REJECTED;
    }
    let sw = rec.to_switch();
    let change = sw.triangle_change(g);
    let exponent = 4 - change;
    debug_assert!((0..=8).contains(&exponent));
    if !rng.random_bool(q.powi(exponent)) {
        return StepOutcome::NOOP;
    }
    let delta = t.apply_switch(&sw);
    debug_assert_eq!(delta.delta, change as i64);
    StepOutcome::applied(StepKind::SwitchApplied, AppliedMove::Switch(rec), delta)
}

/// Running counters reported in every trace record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepCounters {
    pub makes_applied: u64,
    pub breaks_applied: u64,
    pub rejections: u64,
}

impl StepCounters {
    /// Metropolis switches count as makes when they add triangles and as
    /// breaks when they remove some; neutral switches are in neither column.
    pub fn record(&mut self, out: &StepOutcome) {
        match out.kind {
            StepKind::MakeApplied => self.makes_applied += 1,
            StepKind::BreakApplied => self.breaks_applied += 1,
            StepKind::SwitchApplied => match out.delta.map(|d| d.delta.signum()) {
                Some(1) => self.makes_applied += 1,
                Some(-1) => self.breaks_applied += 1,
                _ => {}
            },
            StepKind::RejectedProposal => self.rejections += 1,
            StepKind::NoOp => {}
        }
    }
}

/// A chain replica: tracked graph, site sets when needed, and its RNG.
pub struct Chain {
    cfg: ChainConfig,
    tracked: TrackedGraph,
    sets: Option<TripleSets>,
    rng: ChaCha8Rng,
    counters: StepCounters,
    steps_done: u64,
}

impl Chain {
    pub fn new(g0: CubicGraph, cfg: ChainConfig) -> Result<Self, ChainError> {
        cfg.validate()?;
        let sets = (cfg.kind == ChainKind::O).then(|| TripleSets::from_graph(&g0));
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Chain {
            cfg,
            tracked: TrackedGraph::new(g0),
            sets,
            rng,
            counters: StepCounters::default(),
            steps_done: 0,
        })
    }

    pub fn step(&mut self) -> StepOutcome {
        let out = match self.cfg.kind {
            ChainKind::O => step_chain_o(
                &mut self.tracked,
                self.sets.as_mut().expect("chain O keeps site sets"),
                self.cfg.p,
                &mut self.rng,
            ),
            ChainKind::I => step_chain_i(&mut self.tracked, self.cfg.p, self.cfg.q, &mut self.rng),
            ChainKind::II => step_chain_ii(&mut self.tracked, &mut self.rng),
            ChainKind::Metropolis => {
                step_metropolis_switch(&mut self.tracked, self.cfg.q, &mut self.rng)
            }
        };
        self.counters.record(&out);
        self.steps_done += 1;
        out
    }

    pub fn graph(&self) -> &CubicGraph {
        self.tracked.graph()
    }

    pub fn census(&self) -> MotifCensus {
        self.tracked.census()
    }

    pub fn counters(&self) -> StepCounters {
        self.counters
    }

    pub fn steps_done(&self) -> u64 {
        self.steps_done
    }

    pub fn sets(&self) -> Option<&TripleSets> {
        self.sets.as_ref()
    }

    pub fn record(&self) -> TraceRecord {
        let c = self.census();
        TraceRecord {
            step: self.steps_done,
            delta: c.delta,
            iso: c.iso,
            dia: c.dia,
            tet: c.tet,
            free: c.free,
            makes_applied: self.counters.makes_applied,
            breaks_applied: self.counters.breaks_applied,
            rejections: self.counters.rejections,
        }
    }

    pub fn into_graph(self) -> CubicGraph {
        self.tracked.into_graph()
    }
}

/// One row of the trace CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub delta: usize,
    pub iso: usize,
    pub dia: usize,
    pub tet: usize,
    pub free: usize,
    pub makes_applied: u64,
    pub breaks_applied: u64,
    pub rejections: u64,
}

impl TraceRecord {
    pub fn census(&self) -> MotifCensus {
        MotifCensus {
            delta: self.delta,
            iso: self.iso,
            dia: self.dia,
            tet: self.tet,
            free: self.free,
        }
    }
}

pub const TRACE_HEADER: &str = "step,delta,iso,dia,tet,free,makes_applied,breaks_applied,rejections";

pub fn write_trace<W: Write>(out: W, trace: &[TraceRecord]) -> Result<(), ChainError> {
    let mut w = csv::Writer::from_writer(out);
    for r in trace {
        w.serialize(r)?;
    }
    if trace.is_empty() {
        w.write_record(TRACE_HEADER.split(','))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>, ChainError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<TraceRecord>, _>>()?)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub final_graph: CubicGraph,
}

/// Runs `cfg.steps` steps from `g0`, recording the initial state and then
/// one record every `cfg.sample_every` steps.
pub fn run(g0: CubicGraph, cfg: &ChainConfig) -> Result<RunOutput, ChainError> {
    run_logged(g0, cfg, |_| {})
}

/// Like [`run`], calling `log` for every applied move.
pub fn run_logged(
    g0: CubicGraph,
    cfg: &ChainConfig,
    mut log: impl FnMut(&AppliedMove),
) -> Result<RunOutput, ChainError> {
    let mut chain = Chain::new(g0, cfg.clone())?;
    let mut trace = Vec::with_capacity((cfg.steps / cfg.sample_every) as usize + 1);
    trace.push(chain.record());
    for t in 1..=cfg.steps {
        let out = chain.step();
        if let Some(mv) = &out.applied {
            log(mv);
        }
        if t % cfg.sample_every == 0 {
            debug_assert_eq!(chain.census(), chain.graph().census());
            trace.push(chain.record());
        }
    }
    Ok(RunOutput { trace, final_graph: chain.into_graph() })
}

/// Independent replicas with seeds `cfg.seed`, `cfg.seed + 1`, ...
pub fn run_replicas(
    g0: &CubicGraph,
    cfg: &ChainConfig,
    replicas: usize,
) -> Result<Vec<RunOutput>, ChainError> {
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let c = cfg.clone().with_seed(cfg.seed.wrapping_add(i as u64));
            run(g0.clone(), &c)
        })
        .collect()
}

/// Re-applies a move log (one [`AppliedMove`] per line) to `g0`.
pub fn replay(g0: CubicGraph, log: &str) -> Result<CubicGraph, ChainError> {
    let mut t = TrackedGraph::new(g0);
    for (i, line) in log.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| ChainError::Replay { line: i + 1, msg };
        match line.parse::<AppliedMove>().map_err(|e| err(e.to_string()))? {
            AppliedMove::Triangle(m) => {
                t.apply(&m).map_err(|e| err(e.to_string()))?;
            }
            AppliedMove::Switch(s) => {
                if !s.is_valid(t.graph()) {
                    return Err(err(format!("invalid switch {line}")));
                }
                t.apply_switch(&s.to_switch());
            }
        }
    }
    Ok(t.into_graph())
}

/// Triangle statistics over the records at or after `burn_in` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSummary {
    pub samples: usize,
    pub mean_delta: f64,
    pub min_delta: usize,
    pub max_delta: usize,
}

impl TraceSummary {
    pub fn after(trace: &[TraceRecord], burn_in: u64) -> Option<Self> {
        let kept: Vec<usize> = trace.iter().filter(|r| r.step >= burn_in).map(|r| r.delta).collect();
        if kept.is_empty() {
            return None;
        }
        Some(TraceSummary {
            samples: kept.len(),
            mean_delta: kept.iter().sum::<usize>() as f64 / kept.len() as f64,
            min_delta: *kept.iter().min().unwrap(),
            max_delta: *kept.iter().max().unwrap(),
        })
    }
}
