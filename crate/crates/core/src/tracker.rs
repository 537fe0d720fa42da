//! Incremental bookkeeping for running chains: per-vertex triangle counts
//! and classes, the running census, and the make/break site sets.

use crate::graph::{classify, ClassTally, CubicGraph, MotifCensus, Vertex, VertexClass};
use crate::moves::{Ball, LocalDelta, Move, MoveError, Switch};

/// A graph together with cached `Δ_v`, vertex classes and census.
#[derive(Debug, Clone)]
pub struct TrackedGraph {
    graph: CubicGraph,
    delta_v: Vec<u8>,
    class: Vec<VertexClass>,
    tally: ClassTally,
    /// `mark[v] == epoch` when `v` is already in the current region
    mark: Vec<u32>,
    epoch: u32,
}

impl TrackedGraph {
    pub fn new(graph: CubicGraph) -> Self {
        let delta_v: Vec<u8> = (0..graph.n() as Vertex).map(|v| graph.triangles_at(v)).collect();
        let class: Vec<VertexClass> = (0..graph.n() as Vertex)
            .map(|v| classify(&graph, v, |u| delta_v[u as usize]))
            .collect();
        let mut tally = ClassTally::default();
        for v in 0..graph.n() {
            tally.add(delta_v[v], class[v]);
        }
        let mark = vec![0; graph.n()];
        TrackedGraph { graph, delta_v, class, tally, mark, epoch: 0 }
    }

    pub fn graph(&self) -> &CubicGraph {
        &self.graph
    }

    pub fn into_graph(self) -> CubicGraph {
        self.graph
    }

    pub fn census(&self) -> MotifCensus {
        self.tally.census()
    }

    #[inline]
    pub fn triangles_at(&self, v: Vertex) -> u8 {
        self.delta_v[v as usize]
    }

    pub fn class(&self, v: Vertex) -> VertexClass {
        self.class[v as usize]
    }

    /// Applies a validated move.
    pub fn apply(&mut self, mv: &Move) -> Result<LocalDelta, MoveError> {
        if !mv.is_valid(&self.graph) {
            return Err(MoveError::InvalidMove(*mv));
        }
        Ok(self.apply_switch(&mv.switch()))
    }

    /// Applies a switch whose simplicity the caller has checked.
    ///
    /// Only vertices of destroyed or created triangles can change `Δ_v` or
    /// their triangle set; beyond those, a class can only change through a
    /// triangle partner whose `Δ_v` moved. Those two groups are recounted.
    pub(crate) fn apply_switch(&mut self, sw: &Switch) -> LocalDelta {
        let before = self.tally;
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.fill(0);
            self.epoch = 1;
        }
        let mut region = Region::default();
        for u in sw.endpoints() {
            self.visit(u, &mut region);
        }
        self.visit_apexes(&sw.remove, &mut region);
        sw.apply(&mut self.graph);
        debug_assert!(self.graph.validate_local(&sw.endpoints()).is_ok());
        self.visit_apexes(&sw.add, &mut region);

        let touched = region.len;
        for i in 0..touched {
            let u = region.ids[i];
            let d = self.graph.triangles_at(u);
            if d != self.delta_v[u as usize] {
                self.delta_v[u as usize] = d;
                // an untouched vertex keeps its Δ_v, and with Δ_v ≠ 1 its
                // class depends on nothing else
                for w in *self.graph.neighbors(u) {
                    if self.delta_v[w as usize] == 1 {
                        self.visit(w, &mut region);
                    }
                }
            }
        }
        for i in 0..region.len {
            let u = region.ids[i];
            let (old_d, old_c) = region.old[i];
            let d = self.delta_v[u as usize];
            let c = classify(&self.graph, u, |w| self.delta_v[w as usize]);
            if (d, c) != (old_d, old_c) {
                self.class[u as usize] = c;
                self.tally.remove(old_d, old_c);
                self.tally.add(d, c);
            }
        }
        LocalDelta::from_tally(self.tally - before, sw.endpoints())
    }

    /// Records `u` with its cached state unless already present.
    #[inline]
    fn visit(&mut self, u: Vertex, region: &mut Region) {
        if self.mark[u as usize] != self.epoch {
            self.mark[u as usize] = self.epoch;
            region.ids[region.len] = u;
            region.old[region.len] = (self.delta_v[u as usize], self.class[u as usize]);
            region.len += 1;
        }
    }

    /// Visits the third vertex of every triangle through the given edges.
    #[inline]
    fn visit_apexes(&mut self, edges: &[(Vertex, Vertex); 2], region: &mut Region) {
        for &(a, b) in edges {
            let nb = *self.graph.neighbors(b);
            for w in *self.graph.neighbors(a) {
                if nb.contains(&w) {
                    self.visit(w, region);
                }
            }
        }
    }
}

/// Vertices recounted by one switch, with their state beforehand. At most
/// 12 vertices lie in affected triangles, plus three neighbours of each.
struct Region {
    ids: [Vertex; 48],
    old: [(u8, VertexClass); 48],
    len: usize,
}

impl Default for Region {
    fn default() -> Self {
        Region { ids: [0; 48], old: [(0, VertexClass::Free); 48], len: 0 }
    }
}

/// Triples `(v; {w, x})` of a vertex and two of its neighbours, split into
/// make sites (`wx` absent) and break sites (`wx` present).
///
/// Triple `3v + k` is the pair of neighbours of `v` other than its `k`-th
/// (in sorted order). Membership lists support O(1) insert, remove and
/// uniform sampling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSets {
    make_sites: Vec<u32>,
    break_sites: Vec<u32>,
    /// position of each triple within its list
    pos: Vec<u32>,
    is_break: Vec<bool>,
}

impl TripleSets {
    pub fn from_graph(g: &CubicGraph) -> Self {
        let total = 3 * g.n();
        let mut sets = TripleSets {
            make_sites: Vec::with_capacity(total),
            break_sites: Vec::new(),
            pos: vec![0; total],
            is_break: vec![false; total],
        };
        for t in 0..total as u32 {
            let b = Self::is_break_site(g, t);
            sets.is_break[t as usize] = b;
            let list = if b { &mut sets.break_sites } else { &mut sets.make_sites };
            sets.pos[t as usize] = list.len() as u32;
            list.push(t);
        }
        sets
    }

    #[inline]
    fn is_break_site(g: &CubicGraph, t: u32) -> bool {
        let (_, w, x) = Self::decode(g, t);
        g.has_edge(w, x)
    }

    /// `(v, w, x)` for triple id `t` in the current graph.
    #[inline]
    pub fn decode(g: &CubicGraph, t: u32) -> (Vertex, Vertex, Vertex) {
        let v = t / 3;
        let nb = g.neighbors(v);
        match t % 3 {
            0 => (v, nb[1], nb[2]),
            1 => (v, nb[0], nb[2]),
            _ => (v, nb[0], nb[1]),
        }
    }

    pub fn total(&self) -> usize {
        self.pos.len()
    }

    pub fn make_sites(&self) -> &[u32] {
        &self.make_sites
    }

    pub fn break_sites(&self) -> &[u32] {
        &self.break_sites
    }

    fn set(&mut self, t: u32, to_break: bool) {
        if self.is_break[t as usize] == to_break {
            return;
        }
        let (from, to) = if to_break {
            (&mut self.make_sites, &mut self.break_sites)
        } else {
            (&mut self.break_sites, &mut self.make_sites)
        };
        let p = self.pos[t as usize] as usize;
        let last = *from.last().expect("non-empty");
        from.swap_remove(p);
        if last != t {
            self.pos[last as usize] = p as u32;
        }
        self.pos[t as usize] = to.len() as u32;
        to.push(t);
        self.is_break[t as usize] = to_break;
    }

    /// Refreshes the triples at the move endpoints and their neighbours in
    /// `g`, which must be the graph after the move.
    pub fn update(&mut self, g: &CubicGraph, delta: &LocalDelta) {
        let mut ball = Ball::new();
        for u in delta.endpoints {
            ball.insert(u);
        }
        ball.grow(g, 0, 4);
        for &v in ball.as_slice() {
            for k in 0..3 {
                let t = 3 * v + k;
                let b = Self::is_break_site(g, t);
                self.set(t, b);
            }
        }
    }

    /// Membership as a canonical sorted list of `(v, min(w,x), max(w,x), is_break)`.
    pub fn canonical(&self, g: &CubicGraph) -> Vec<(Vertex, Vertex, Vertex, bool)> {
        let mut out: Vec<_> = (0..self.total() as u32)
            .map(|t| {
                let (v, w, x) = Self::decode(g, t);
                (v, w.min(x), w.max(x), self.is_break[t as usize])
            })
            .collect();
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NamedGraph;
    use crate::moves::{BreakMove, MakeMove};

    #[test]
    fn triple_counts() {
        let prism = CubicGraph::named(NamedGraph::Prism).unwrap();
        let s = TripleSets::from_graph(&prism);
        assert_eq!(s.total(), 18);
        assert_eq!(s.break_sites().len(), 6);
        assert_eq!(s.make_sites().len(), 12);
        let k33 = CubicGraph::named(NamedGraph::K33).unwrap();
        assert!(TripleSets::from_graph(&k33).break_sites().is_empty());
    }

    #[test]
    fn tracked_break_then_make() {
        let prism = CubicGraph::named(NamedGraph::Prism).unwrap();
        let mut t = TrackedGraph::new(prism.clone());
        let mut sets = TripleSets::from_graph(t.graph());
        let b = BreakMove::new(2, 1, 0, 3, 4);
        let d = t.apply(&b.into()).unwrap();
        sets.update(t.graph(), &d);
        assert_eq!(t.census(), t.graph().census());
        assert_eq!(sets.canonical(t.graph()), TripleSets::from_graph(t.graph()).canonical(t.graph()));
        assert!(sets.break_sites().is_empty());
        let m: MakeMove = b.reverse();
        let d = t.apply(&m.into()).unwrap();
        sets.update(t.graph(), &d);
        assert_eq!(t.graph(), &prism);
        assert_eq!(sets.break_sites().len(), 6);
        assert!(t.apply(&m.into()).is_err());
    }
}
