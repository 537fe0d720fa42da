//! Exact one-step matrices of the chains on a small state space and their
//! stationary distributions.

use thiserror::Error;

use crate::chains::{ChainConfig, ChainError, ChainKind};
use crate::graph::{CubicGraph, Vertex};
use crate::moves::{enumerate_all_moves, qv_into, Move, PathPair, Switch};
use crate::statespace::{apply_to_key, key_of, pair_bit, StateSpace};
use crate::tracker::TripleSets;

pub const ROW_TOLERANCE: f64 = 1e-12;
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StationaryError {
    #[error("row {row} sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },
    #[error("power iteration stopped with residual {residual:e}")]
    NotConverged { residual: f64 },
    #[error(transparent)]
    Config(#[from] ChainError),
}

/// Sparse row-stochastic matrix; off-diagonal entries merged by target.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    rows: Vec<Vec<(u32, f64)>>,
    diag: Vec<f64>,
}

impl TransitionMatrix {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Off-diagonal entries of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.rows[i]
            .binary_search_by_key(&(j as u32), |e| e.0)
            .map_or(0.0, |k| self.rows[i][k].1)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.diag[i] + self.rows[i].iter().map(|e| e.1).sum::<f64>()
    }

    /// `x P`.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = x.iter().zip(&self.diag).map(|(a, d)| a * d).collect();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                out[j as usize] += x[i] * p;
            }
        }
        out
    }

    fn from_entries(entries: Vec<Vec<(u32, f64)>>) -> Result<Self, StationaryError> {
        let mut rows = Vec::with_capacity(entries.len());
        let mut diag = Vec::with_capacity(entries.len());
        for (i, mut row) in entries.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            let mut self_mass = 0.0;
            for (j, p) in row {
                if j as usize == i {
                    self_mass += p;
                } else if let Some(last) = merged.last_mut().filter(|l| l.0 == j) {
                    last.1 += p;
                } else {
                    merged.push((j, p));
                }
            }
            let off: f64 = merged.iter().map(|e| e.1).sum();
            let d = 1.0 - off;
            if d < self_mass - ROW_TOLERANCE || merged.iter().any(|e| e.1 < 0.0) {
                return Err(StationaryError::NotStochastic { row: i, sum: off + self_mass });
            }
            rows.push(merged);
            diag.push(d);
        }
        let m = TransitionMatrix { rows, diag };
        for i in 0..m.len() {
            let s = m.row_sum(i);
            if (s - 1.0).abs() > ROW_TOLERANCE {
                return Err(StationaryError::NotStochastic { row: i, sum: s });
            }
        }
        Ok(m)
    }
}

fn triangle_move_probability(
    g: &CubicGraph,
    cfg: &ChainConfig,
    mv: &Move,
    sets: Option<&TripleSets>,
) -> f64 {
    let n = g.n() as f64;
    match (cfg.kind, mv) {
        (ChainKind::I, Move::Make(_)) => cfg.p / (12.0 * n),
        (ChainKind::I, Move::Break(_)) => cfg.q / (9.0 * n * n),
        (ChainKind::O, Move::Make(_)) => {
            cfg.p / (4.0 * sets.expect("site sets").make_sites().len() as f64)
        }
        (ChainKind::O, Move::Break(_)) => {
            (1.0 - cfg.p) / (3.0 * n * sets.expect("site sets").break_sites().len() as f64)
        }
        (ChainKind::II, Move::Make(m)) => {
            let mut buf = [PathPair::default(); 12];
            let q = qv_into(g, m.v, &mut buf) as f64;
            (1.0 - g.triangles_at(m.v) as f64 / 3.0) / (n * q)
        }
        (ChainKind::II, Move::Break(_)) => 1.0 / (9.0 * n * n),
        (ChainKind::Metropolis, _) => unreachable!("metropolis proposals are general switches"),
    }
}

/// Every simple switch of two disjoint edges, with its change in `Δ`.
fn metropolis_row(g: &CubicGraph, q: f64) -> Vec<(u64, f64)> {
    let edges: Vec<(Vertex, Vertex)> = g.edges().collect();
    let m = edges.len() as f64;
    let proposal = 1.0 / (3.0 * m * (m - 1.0) / 2.0);
    let mut out = Vec::new();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let ((a, b), (c, d)) = (edges[i], edges[j]);
            if a == c || a == d || b == c || b == d {
                continue;
            }
            for add in [[(a, c), (b, d)], [(a, d), (b, c)]] {
                if add.iter().any(|&(u, v)| g.has_edge(u, v)) {
                    continue;
                }
                let sw = Switch { remove: [(a, b), (c, d)], add };
                let change = sw.triangle_change(g);
                let bits = [(a, b), (c, d), add[0], add[1]]
                    .iter()
                    .fold(0, |k, &(u, v)| k ^ pair_bit(u, v));
                out.push((bits, proposal * q.powi(4 - change)));
            }
        }
    }
    out
}

/// The exact one-step matrix of `cfg.kind` on `space`. Entries sum the
/// probabilities of all moves realizing the same transition; the self-loop
/// takes the remaining mass.
pub fn transition_matrix(space: &StateSpace, cfg: &ChainConfig) -> Result<TransitionMatrix, StationaryError> {
    cfg.validate()?;
    let mut entries = Vec::with_capacity(space.len());
    for id in 0..space.len() {
        let g = space.graph(id);
        let key = key_of(&g);
        let mut row = Vec::new();
        if cfg.kind == ChainKind::Metropolis {
            for (bits, p) in metropolis_row(&g, cfg.q) {
                row.push((space.index_of(key ^ bits).expect("switch stays cubic") as u32, p));
            }
        } else {
            let sets = (cfg.kind == ChainKind::O).then(|| TripleSets::from_graph(&g));
            for mv in enumerate_all_moves(&g) {
                let t = space.index_of(apply_to_key(key, &mv)).expect("move stays cubic");
                row.push((t as u32, triangle_move_probability(&g, cfg, &mv, sets.as_ref())));
            }
        }
        entries.push(row);
    }
    TransitionMatrix::from_entries(entries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub pi: Vec<f64>,
    /// `max_j |(πP)_j − π_j|`.
    pub residual: f64,
    pub iterations: usize,
}

/// Stationary vector by power iteration.
///
/// Iterates the lazy jump chain `(I + J)/2`, where `J` is `P` with its
/// self-loops removed and rows renormalized, then reweights by the mean
/// holding time `1/(1 − P(i,i))`. This has the same stationary law as `P`
/// but avoids the slow convergence caused by heavy self-loops.
pub fn stationary(m: &TransitionMatrix) -> Result<Stationary, StationaryError> {
    const MAX_ITERATIONS: usize = 1_000_000;
    let len = m.len();
    let leave: Vec<f64> = (0..len).map(|i| 1.0 - m.diag(i)).collect();
    let mut x = vec![1.0 / len as f64; len];
    let mut next = vec![0.0; len];
    let mut iterations = 0;
    let to_pi = |x: &[f64]| -> Vec<f64> {
        let w: Vec<f64> = x
            .iter()
            .zip(&leave)
            .map(|(a, l)| if *l > 0.0 { a / l } else { *a })
            .collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|a| a / total).collect()
    };
    loop {
        for (nx, xi) in next.iter_mut().zip(&x) {
            *nx = 0.5 * xi;
        }
        for i in 0..len {
            if leave[i] > 0.0 {
                let scale = 0.5 * x[i] / leave[i];
                for &(j, p) in m.row(i) {
                    next[j as usize] += scale * p;
                }
            } else {
                next[i] += 0.5 * x[i];
            }
        }
        let change: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        iterations += 1;
        if change < 1e-12 {
            let pi = to_pi(&x);
            let residual = residual(m, &pi);
            if residual < RESIDUAL_TOLERANCE {
                return Ok(Stationary { pi, residual, iterations });
            }
        }
        if iterations >= MAX_ITERATIONS {
            return Err(StationaryError::NotConverged { residual: residual(m, &to_pi(&x)) });
        }
    }
}

pub fn residual(m: &TransitionMatrix, pi: &[f64]) -> f64 {
    m.left_mul(pi).iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// `max |π(i)P(i,j) − π(j)P(j,i)|` over all pairs.
pub fn check_detailed_balance(m: &TransitionMatrix, pi: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.len() {
        for &(j, p) in m.row(i) {
            let back = m.get(j as usize, i);
            worst = worst.max((pi[i] * p - pi[j as usize] * back).abs());
        }
    }
    worst
}

/// Uniform weights for chain I at `p = 4/(3n + 4)`, `q = 1 − p`.
pub fn uniform_make_probability(n: usize) -> f64 {
    4.0 / (3.0 * n as f64 + 4.0)
}

/// The law proportional to `q^(−2Δ(G))`.
pub fn metropolis_law(space: &StateSpace, q: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..space.len())
        .map(|id| q.powi(-2 * space.graph(id).triangle_count() as i32))
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
