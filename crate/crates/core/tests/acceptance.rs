//! Acceptance suite: one check per criterion, each printing a PASS or FAIL
//! line. Run with `cargo test -p trichain --test acceptance -- --nocapture`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use trichain::bounds::chain1_lower;
use trichain::chains::{run, step_chain_ii, ChainConfig, ChainKind, TraceSummary};
use trichain::graph::{CubicGraph, NamedGraph, VertexClass};
use trichain::moves::{apply_move, enumerate_all_moves, Move};
use trichain::sampler::sample_uniform_cubic;
use trichain::statespace::{
    key_of, verify_alpha_bounds, verify_irreducibility, verify_irreducibility_streaming,
    verify_step_bounds, StateSpace, TransitionStructure,
};
use trichain::stationary::{
    check_detailed_balance, max_abs_diff, metropolis_law, stationary, transition_matrix,
    uniform_make_probability,
};
use trichain::tracker::TrackedGraph;
use trichain::Chain;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let s = StateSpace::enumerate(6).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let tri: Vec<usize> = (0..s.len()).map(|i| s.graph(i).triangle_count()).collect();
    let free = tri.iter().filter(|&&d| d == 0).count();
    let two = tri.iter().filter(|&&d| d == 2).count();
    ensure(s.len() == 70, format!("{} states", s.len()))?;
    ensure(free == 10 && two == 60, format!("split {free} + {two}"))?;
    ensure(elapsed.as_secs_f64() < 1.0, format!("took {elapsed:?}"))?;
    Ok(format!("70 states = 10 triangle-free + 60 with two triangles, {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let mut parts = Vec::new();
    for n in [4, 6, 8] {
        let t = Instant::now();
        let s = StateSpace::enumerate(n).map_err(|e| e.to_string())?;
        let ts = TransitionStructure::build(&s);
        ensure(ts.is_symmetric(), format!("n={n}: move graph not symmetric"))?;
        let r = verify_irreducibility(&s, &ts);
        ensure(r.connected, format!("n={n}: components {:?}", r.components))?;
        parts.push(format!("n={n}: {} states, diameter {:?}, {:?}", r.states, r.diameter, t.elapsed()));
    }
    let t = Instant::now();
    let s = StateSpace::enumerate(10).map_err(|e| e.to_string())?;
    let r = verify_irreducibility_streaming(&s);
    ensure(r.states == 11_180_820, format!("n=10: {} states", r.states))?;
    ensure(r.connected, format!("n=10: {} components", r.components.len()))?;
    parts.push(format!("n=10: {} states, {:?}", r.states, t.elapsed()));
    Ok(parts.join("; "))
}

fn criterion_3() -> Outcome {
    let s = StateSpace::enumerate(8).map_err(|e| e.to_string())?;
    let ts = TransitionStructure::build(&s);
    let r = verify_step_bounds(&s, &ts);
    ensure(r.holds(), format!("{r:?}"))?;
    ensure(r.triangle_free_vertices > 0 && r.triangles > 0 && r.diamonds > 0, "vacuous check")?;
    Ok(format!(
        "{} triangle-free vertices, {} triangles ({} need two moves), {} diamonds; 0 violations",
        r.triangle_free_vertices, r.triangles, r.diamond_needs_two, r.diamonds
    ))
}

fn criterion_4() -> Outcome {
    let s = StateSpace::enumerate(6).map_err(|e| e.to_string())?;
    let p = uniform_make_probability(6);
    let cfg = ChainConfig::new(ChainKind::I).with_p(p).with_q(1.0 - p);
    let m = transition_matrix(&s, &cfg).map_err(|e| e.to_string())?;
    let st = stationary(&m).map_err(|e| e.to_string())?;
    let dev = max_abs_diff(&st.pi, &vec![1.0 / 70.0; 70]);
    let db = check_detailed_balance(&m, &st.pi);
    ensure(dev < 1e-9, format!("deviation from uniform {dev:e}"))?;
    ensure(db < 1e-9, format!("detailed balance violation {db:e}"))?;
    Ok(format!("p = {p:.6}: max deviation {dev:.2e}, balance violation {db:.2e}"))
}

fn criterion_5() -> Outcome {
    let s = StateSpace::enumerate(6).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for q in [0.3, 0.5, 0.7] {
        let m = transition_matrix(&s, &ChainConfig::new(ChainKind::Metropolis).with_q(q))
            .map_err(|e| e.to_string())?;
        let st = stationary(&m).map_err(|e| e.to_string())?;
        let dev = max_abs_diff(&st.pi, &metropolis_law(&s, q));
        ensure(dev < 1e-9, format!("q = {q}: deviation {dev:e}"))?;
        parts.push(format!("q={q}: {dev:.2e}"));
    }
    Ok(parts.join(", "))
}

fn criterion_6() -> Outcome {
    let s = StateSpace::enumerate(8).map_err(|e| e.to_string())?;
    let r = verify_alpha_bounds(&s);
    ensure(r.violations == 0, format!("{} violations", r.violations))?;
    ensure(r.created_mean_violations == 0, "created-triangle mean above 8/3")?;
    let free_max = r.max_mean[VertexClass::Free as usize].ok_or("no free vertex")?;
    ensure(3 * free_max.0 == 8 * free_max.1, format!("free max {free_max:?}"))?;
    let q3 = CubicGraph::named(NamedGraph::Q3).unwrap();
    let qv = trichain::enumerate_qv(&q3, 0);
    let tally = trichain::statespace::qv_created_tally(&q3, 0);
    ensure(qv.len() == 9 && tally == [3, 0, 6, 0], format!("cube: {} pairs, {tally:?}", qv.len()))?;
    let fmt = |c: VertexClass| r.max_mean_f64(c).map_or("-".into(), |x| format!("{x:.4}"));
    Ok(format!(
        "{} vertices, 0 violations; max means free {} iso {} dia-ext {} dia-int {}; cube 9 pairs (3,0,6,0)",
        r.vertices,
        fmt(VertexClass::Free),
        fmt(VertexClass::IsolatedTriangle),
        fmt(VertexClass::DiamondExternal),
        fmt(VertexClass::DiamondInternal)
    ))
}

fn criterion_7() -> Outcome {
    let n = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let starts = [
        ("k4-packing", CubicGraph::named(NamedGraph::K4Packing(n)).unwrap()),
        ("uniform", sample_uniform_cubic(n, &mut rng).unwrap()),
        ("ladder", CubicGraph::named(NamedGraph::Ladder(n)).unwrap()),
    ];
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for (i, (name, g0)) in starts.into_iter().enumerate() {
        let cfg = ChainConfig::new(ChainKind::II)
            .with_steps(2_000_000)
            .with_sample_every(200)
            .with_seed(100 + i as u64);
        let t = Instant::now();
        let out = run(g0, &cfg).map_err(|e| e.to_string())?;
        let s = TraceSummary::after(&out.trace, cfg.burn_in_steps(n)).ok_or("empty trace")?;
        let nf = n as f64;
        let line = format!(
            "{name}: mean {:.1} min {} max {} ({:?})",
            s.mean_delta,
            s.min_delta,
            s.max_delta,
            t.elapsed()
        );
        if (s.min_delta as f64) < 0.09 * nf
            || s.max_delta as f64 > 0.63 * nf
            || s.mean_delta < 0.18 * nf
            || s.mean_delta > 0.22 * nf
            || t.elapsed().as_secs_f64() > 60.0
        {
            failures.push(line.clone());
        }
        parts.push(line);
    }
    ensure(failures.is_empty(), failures.join("; "))?;
    Ok(parts.join("; "))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples = 100_000;
    let total: usize = (0..samples)
        .map(|_| sample_uniform_cubic(100, &mut rng).unwrap().triangle_count())
        .sum();
    let mean = total as f64 / samples as f64;
    ensure((mean - 4.0 / 3.0).abs() <= 0.05, format!("n=100 mean triangles {mean}"))?;

    let s = StateSpace::enumerate(6).map_err(|e| e.to_string())?;
    let draws = 1_000_000usize;
    let mut counts = vec![0usize; s.len()];
    for _ in 0..draws {
        let g = sample_uniform_cubic(6, &mut rng).unwrap();
        counts[s.index_of(key_of(&g)).ok_or("sample outside state space")?] += 1;
    }
    let p = 1.0 / 70.0;
    let sd = (draws as f64 * p * (1.0 - p)).sqrt();
    let worst = counts
        .iter()
        .map(|&c| (c as f64 - draws as f64 * p).abs() / sd)
        .fold(0.0, f64::max);
    ensure(worst < 4.0, format!("n=6 worst deviation {worst:.2} sigma"))?;
    Ok(format!("n=100 mean {mean:.4}; n=6 worst cell {worst:.2} sigma"))
}

fn criterion_9() -> Outcome {
    let n = 500;
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for (i, p) in [0.5, 0.9].into_iter().enumerate() {
        for (name, g0) in [
            ("k4-packing", CubicGraph::named(NamedGraph::K4Packing(n)).unwrap()),
            ("ladder", CubicGraph::named(NamedGraph::Ladder(n)).unwrap()),
        ] {
            let cfg = ChainConfig::new(ChainKind::I)
                .with_p(p)
                .with_q(1.0 - p)
                .with_steps(10_000_000)
                .with_sample_every(1000)
                .with_seed(900 + i as u64);
            let out = run(g0, &cfg).map_err(|e| e.to_string())?;
            let s = TraceSummary::after(&out.trace, cfg.burn_in_steps(n)).ok_or("empty trace")?;
            let target = 0.95 * n as f64 * chain1_lower(p).unwrap();
            let line = format!("p={p} {name}: mean {:.1} vs {:.1}", s.mean_delta, target);
            if s.mean_delta < target {
                failures.push(line.clone());
            }
            parts.push(line);
        }
    }
    ensure(failures.is_empty(), failures.join("; "))?;
    Ok(parts.join("; "))
}

fn criterion_10() -> Outcome {
    // incremental census against full recount, every chain, n = 1000
    let n = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g0 = sample_uniform_cubic(n, &mut rng).unwrap();
    for kind in [ChainKind::O, ChainKind::I, ChainKind::II, ChainKind::Metropolis] {
        let mut chain = Chain::new(g0.clone(), ChainConfig::new(kind).with_seed(11).with_q(0.6))
            .map_err(|e| e.to_string())?;
        let mut applied = 0;
        while applied < 100_000 {
            if chain.step().applied.is_some() {
                applied += 1;
            }
        }
        ensure(chain.census() == chain.graph().census(), format!("{kind:?}: census drift"))?;
        chain.graph().validate().map_err(|e| format!("{kind:?}: {e}"))?;
    }

    // move involution and normalization, exhaustively
    let mut checked = 0usize;
    for n in [6, 8] {
        let s = StateSpace::enumerate(n).map_err(|e| e.to_string())?;
        for id in 0..s.len() {
            let g = s.graph(id);
            for mv in enumerate_all_moves(&g) {
                ensure(mv == mv.normalized() && mv.mirror().normalized() == mv, format!("{mv} not normal"))?;
                let mut h = g.clone();
                apply_move(&mut h, &mv).map_err(|e| e.to_string())?;
                let back: Move = mv.reverse();
                ensure(back.is_valid(&h), format!("{mv}: reverse invalid"))?;
                apply_move(&mut h, &back).map_err(|e| e.to_string())?;
                ensure(h == g, format!("{mv}: reverse does not restore"))?;
                checked += 1;
            }
        }
    }

    // determinism
    let cfg = ChainConfig::new(ChainKind::II).with_steps(200_000).with_sample_every(1000).with_seed(5);
    let a = run(g0.clone(), &cfg).map_err(|e| e.to_string())?;
    let b = run(g0.clone(), &cfg).map_err(|e| e.to_string())?;
    ensure(a.trace == b.trace && a.final_graph == b.final_graph, "seeded runs differ")?;

    // throughput
    let mut t = TrackedGraph::new(g0);
    let mut r = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100_000 {
        step_chain_ii(&mut t, &mut r);
    }
    let steps = 3_000_000;
    let start = Instant::now();
    for _ in 0..steps {
        step_chain_ii(&mut t, &mut r);
    }
    let rate = steps as f64 / start.elapsed().as_secs_f64();
    ensure(rate >= 1e6, format!("chain II throughput {rate:.3e} steps/s"))?;
    Ok(format!("census exact on 4 chains; {checked} moves involutive; deterministic; {rate:.3e} steps/s"))
}

#[test]
fn acceptance() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (k, check) in criteria {
        let t = Instant::now();
        match check() {
            Ok(msg) => println!("criterion {k:>2}: PASS ({:.1?}) {msg}", t.elapsed()),
            Err(msg) => {
                println!("criterion {k:>2}: FAIL ({:.1?}) {msg}", t.elapsed());
                failed.push(k);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
