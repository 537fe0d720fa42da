use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use trichain::chains::{read_trace, replay, TraceRecord};
use trichain::graph::{CubicGraph, NamedGraph};
use trichain::io::{from_graph6, to_graph6};

fn trichain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trichain"))
        .args(args)
        .env_clear()
        .output()
        .expect("spawn trichain")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn trace_of(path: &Path) -> Vec<TraceRecord> {
    read_trace(fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn verify_n6() {
    let o = trichain(&["verify", "--n", "6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("connected: true, states: 70"));
}

#[test]
fn verify_n8_with_checks() {
    let o = trichain(&["verify", "--n", "8", "--step-bounds", "--alpha"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("connected: true, states: 19355"), "{s}");
    assert!(s.contains("diameter: 6"), "{s}");
    for line in s.lines().filter(|l| l.contains("violations")) {
        assert!(line.ends_with(" 0 violations"), "{line}");
    }
}

#[test]
fn bounds_row() {
    let o = trichain(&["bounds", "--p", "0.5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("p,s_plus,x_upper,alpha,chain1_lower"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 0.5);
    assert!((row[1] - 0.2748).abs() < 1e-4);
    assert!((row[2] - 0.6269).abs() < 1e-4);
    assert!((row[3] - row[1] / 3.0).abs() < 1e-11);
    assert!((row[4] - 0.5 / (72.0 - 31.5)).abs() < 1e-11);
}

#[test]
fn zero_steps_gives_initial_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = trichain(&["simulate", "--n", "12", "--steps", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = trace_of(&out);
    assert_eq!(t.len(), 1);
    assert_eq!((t[0].step, t[0].delta, t[0].tet), (0, 12, 3));
}

#[test]
fn trace_rows_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    for chain in ["o", "i", "ii", "metropolis"] {
        let o = trichain(&[
            "simulate", "--chain", chain, "--n", "40", "--steps", "20000", "--sample-every", "100",
            "--seed", "5", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{chain}: {}", stderr(&o));
        let t = trace_of(&out);
        assert_eq!(t.len(), 201);
        for (k, r) in t.iter().enumerate() {
            assert_eq!(r.step, 100 * k as u64);
            assert_eq!(r.free + 3 * r.iso + 4 * r.dia + 4 * r.tet, 40, "{chain} row {k}");
            assert_eq!(r.delta, r.iso + 2 * r.dia + 4 * r.tet, "{chain} row {k}");
            assert!(r.makes_applied + r.breaks_applied + r.rejections <= r.step);
        }
        assert!(stdout(&o).contains("mean delta"));
    }
}

#[test]
fn moves_log_replays_to_final_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let moves = dir.path().join("moves.txt");
    let o = trichain(&[
        "simulate", "--chain", "ii", "--n", "20", "--steps", "5000", "--start", "ladder",
        "--out", out.to_str().unwrap(), "--moves-out", moves.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let g0 = CubicGraph::named(NamedGraph::Ladder(20)).unwrap();
    let g = replay(g0, &fs::read_to_string(&moves).unwrap()).unwrap();
    let last = trace_of(&out).pop().unwrap();
    assert_eq!(last.step, 5000);
    assert_eq!(g.census(), last.census());
}

#[test]
fn start_from_graph6_file() {
    let dir = tempfile::tempdir().unwrap();
    let g6 = dir.path().join("g.g6");
    let g = CubicGraph::named(NamedGraph::Q3).unwrap();
    fs::write(&g6, format!("{}\n", to_graph6(&g))).unwrap();
    let start = format!("graph6:{}", g6.display());
    let o = trichain(&["simulate", "--start", &start, "--steps", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("step,delta"));
    // vertex count must agree with the file
    let o = trichain(&["simulate", "--start", &start, "--n", "10", "--steps", "0"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn exit_codes() {
    assert_eq!(trichain(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(trichain(&["simulate", "--n", "7"]).status.code(), Some(2));
    assert_eq!(trichain(&["simulate", "--n", "8", "--chain", "i", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(trichain(&["simulate", "--n", "8", "--sample-every", "0"]).status.code(), Some(2));
    assert_eq!(trichain(&["verify", "--n", "12"]).status.code(), Some(2));
    assert_eq!(trichain(&["simulate", "--n", "8", "--start", "nowhere"]).status.code(), Some(2));
    assert_eq!(
        trichain(&["simulate", "--n", "8", "--start", "graph6:/nonexistent/g.g6"]).status.code(),
        Some(3)
    );
    assert_eq!(
        trichain(&["simulate", "--n", "8", "--out", "/nonexistent/dir/t.csv"]).status.code(),
        Some(3)
    );
    assert_eq!(trichain(&["simulate", "--n", "6", "--start", "k4packing"]).status.code(), Some(4));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.g6");
    fs::write(&bad, "not a graph\n").unwrap();
    let start = format!("graph6:{}", bad.display());
    assert_eq!(trichain(&["simulate", "--start", &start]).status.code(), Some(4));
    // a valid graph6 string that is not cubic
    fs::write(&bad, "Bw\n").unwrap();
    assert_eq!(trichain(&["simulate", "--start", &start]).status.code(), Some(4));
}

#[test]
fn stationary_uniform_for_chain_i() {
    let o = trichain(&["stationary", "--chain", "i", "--n", "6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("state,graph6,delta,pi"));
    let pi: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(pi.len(), 70);
    assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let dev = pi.iter().map(|x| (x - 1.0 / 70.0).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-9, "{dev}");
    let report = stderr(&o);
    let line = report.lines().find(|l| l.starts_with("max deviation from uniform")).unwrap();
    let v: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(v < 1e-9);
}

#[test]
fn stationary_metropolis_law() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pi.csv");
    let o = trichain(&["stationary", "--chain", "metropolis", "--n", "6", "--q", "0.3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let line = s.lines().find(|l| l.starts_with("max deviation from q^(-2 delta) law")).unwrap();
    let v: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(v < 1e-9);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 71);
}

#[test]
fn env_overrides_flags() {
    let o = Command::new(env!("CARGO_BIN_EXE_trichain"))
        .args(["simulate", "--steps", "0"])
        .env_clear()
        .env("TRICHAIN_N", "16")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_trace(o.stdout.as_slice()).unwrap();
    assert_eq!(t[0].tet, 4);

    let o = Command::new(env!("CARGO_BIN_EXE_trichain"))
        .args(["bounds"])
        .env_clear()
        .env("TRICHAIN_P", "0.9")
        .output()
        .unwrap();
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("0.9,"));
}

#[test]
fn same_seed_same_trace() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = trichain(&[
            "simulate", "--chain", "o", "--n", "30", "--steps", "3000", "--sample-every", "10",
            "--seed", seed, "--start", "uniform", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv", "11"), run("b.csv", "11"));
    assert_ne!(run("a.csv", "11"), run("c.csv", "12"));
}

#[test]
fn replicas_match_single_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep.csv");
    let o = trichain(&[
        "simulate", "--n", "24", "--steps", "2000", "--sample-every", "50", "--seed", "3",
        "--replicas", "3", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("replica")).count(), 3);
    for i in 0..3 {
        let single = dir.path().join(format!("single{i}.csv"));
        let seed = (3 + i).to_string();
        let o = trichain(&[
            "simulate", "--n", "24", "--steps", "2000", "--sample-every", "50", "--seed", &seed,
            "--out", single.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let rep = fs::read(dir.path().join(format!("rep_{i}.csv"))).unwrap();
        assert_eq!(rep, fs::read(single).unwrap());
    }
    assert_eq!(trichain(&["simulate", "--n", "8", "--replicas", "2"]).status.code(), Some(2));
}

#[test]
fn enumerate_and_sample_uniform() {
    let o = trichain(&["enumerate", "--n", "6"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let graphs: Vec<CubicGraph> = s.lines().map(|l| from_graph6(l).unwrap()).collect();
    assert_eq!(graphs.len(), 70);

    let o = trichain(&["sample-uniform", "--n", "10", "--count", "5", "--seed", "1"]);
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 5);
    for l in &lines {
        assert_eq!(from_graph6(l).unwrap().n(), 10);
    }
    let again = trichain(&["sample-uniform", "--n", "10", "--count", "5", "--seed", "1"]);
    assert_eq!(stdout(&again).lines().collect::<Vec<_>>(), lines);
}

#[test]
fn stationary_rounded_p_is_near_uniform() {
    // 0.181818 is 4/22 rounded, so only closeness at the rounding scale holds
    let o = trichain(&["stationary", "--chain", "i", "--n", "6", "--p", "0.181818"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stderr(&o);
    let line = report.lines().find(|l| l.starts_with("max deviation from uniform")).unwrap();
    let v: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(v < 1e-7, "{v}");
}

#[test]
fn chain_i_density_above_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = trichain(&[
        "simulate", "--chain", "i", "--n", "100", "--p", "0.99", "--q", "0.01", "--steps", "200000",
        "--sample-every", "100", "--seed", "2", "--start", "ladder", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = trace_of(&out);
    let after: Vec<&TraceRecord> = t.iter().filter(|r| r.step >= 2000).collect();
    let mean = after.iter().map(|r| r.delta as f64).sum::<f64>() / after.len() as f64;
    let bound = trichain::bounds::chain1_lower(0.99).unwrap();
    assert!(mean / 100.0 >= bound, "{mean} vs {bound}");
}
