//! Exactly uniform labeled simple cubic graphs by rejection from the
//! pairing model.

use rand::Rng;

use crate::graph::{check_n, CubicGraph, GraphError, Vertex};

/// Draws a uniform perfect matching of `3n` points (three per vertex),
/// restarting as soon as a loop or repeated edge appears. Every simple
/// cubic graph arises from exactly `6^n` matchings, so the accepted
/// output is uniform; aborting early does not bias it.
pub fn sample_uniform_cubic<R: Rng>(n: usize, rng: &mut R) -> Result<CubicGraph, GraphError> {
    check_n(n)?;
    let mut free: Vec<u32> = Vec::with_capacity(3 * n);
    let mut adj: Vec<[Vertex; 3]> = vec![[0; 3]; n];
    let mut deg = vec![0usize; n];
    'restart: loop {
        free.clear();
        free.extend(0..3 * n as u32);
        deg.iter_mut().for_each(|d| *d = 0);
        while let Some(a) = free.pop() {
            let j = rng.random_range(0..free.len());
            let b = free.swap_remove(j);
            let (u, w) = ((a / 3) as usize, (b / 3) as usize);
            if u == w || adj[u][..deg[u]].contains(&(w as Vertex)) {
                continue 'restart;
            }
            adj[u][deg[u]] = w as Vertex;
            adj[w][deg[w]] = u as Vertex;
            deg[u] += 1;
            deg[w] += 1;
        }
        return CubicGraph::from_adjacency(adj);
    }
}
