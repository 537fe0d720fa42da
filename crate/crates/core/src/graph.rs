//! Labeled simple cubic graphs and their motif census.
//!
//! A [`CubicGraph`] stores, for every vertex, its three neighbours in a
//! sorted fixed-size array. Degree is constant so edge tests, switches and
//! local recounts are all O(1).

use std::fmt;

use thiserror::Error;

/// Vertex id, `0..n`.
pub type Vertex = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex count {0} is odd or smaller than 4")]
    OddN(usize),
    #[error("vertex {vertex} has degree {degree}, expected 3")]
    NotCubic { vertex: Vertex, degree: usize },
    #[error("edge {{{0}, {1}}} is a loop or repeated edge")]
    NotSimple(Vertex, Vertex),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("neighbour lists of {0} and {1} are not symmetric")]
    Asymmetric(Vertex, Vertex),
    #[error("neighbour list of {0} is not sorted")]
    Unsorted(Vertex),
    #[error("malformed graph6: {0}")]
    MalformedGraph6(String),
    #[error("malformed edge list: {0}")]
    MalformedEdgeList(String),
    #[error("bad vertex count {n} for {kind}")]
    BadN { kind: &'static str, n: usize },
}

/// A labeled simple 3-regular graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CubicGraph {
    adj: Vec<[Vertex; 3]>,
}

impl fmt::Debug for CubicGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CubicGraph")
            .field("n", &self.n())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

/// Families with fixed canonical labelings.
///
/// * `K4`: the complete graph on `0..4`.
/// * `K33`: parts `{0,1,2}` and `{3,4,5}`.
/// * `Prism`: triangles `{0,1,2}`, `{3,4,5}` and spokes `i -- i+3`.
/// * `Q3`: vertices are 3-bit words, adjacent at Hamming distance 1.
/// * `K4Packing(n)`: tetrahedra on `{4k, .., 4k+3}`.
/// * `PrismPacking(n)`: one prism on `0..6` followed by tetrahedra;
///   requires `n ≡ 2 (mod 4)`.
/// * `Ladder(n)`: two `n/2`-cycles `i` and `i + n/2` joined by rungs;
///   triangle-free for `n ≥ 8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedGraph {
    K4,
    K33,
    Prism,
    Q3,
    K4Packing(usize),
    PrismPacking(usize),
    Ladder(usize),
}

pub(crate) fn check_n(n: usize) -> Result<(), GraphError> {
    if n < 4 || n % 2 == 1 {
        Err(GraphError::OddN(n))
    } else {
        Ok(())
    }
}

impl CubicGraph {
    /// Builds and validates a graph from an unordered edge list.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        check_n(n)?;
        let mut lists: Vec<Vec<Vertex>> = vec![Vec::with_capacity(3); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w as usize >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v || lists[u as usize].contains(&v) {
                return Err(GraphError::NotSimple(u, v));
            }
            lists[u as usize].push(v);
            lists[v as usize].push(u);
        }
        let mut adj = Vec::with_capacity(n);
        for (vertex, list) in lists.iter_mut().enumerate() {
            if list.len() != 3 {
                return Err(GraphError::NotCubic {
                    vertex: vertex as Vertex,
                    degree: list.len(),
                });
            }
            list.sort_unstable();
            adj.push([list[0], list[1], list[2]]);
        }
        Ok(CubicGraph { adj })
    }

    /// Builds a graph from per-vertex neighbour lists, validating everything.
    pub fn from_adjacency(adj: Vec<[Vertex; 3]>) -> Result<Self, GraphError> {
        check_n(adj.len())?;
        let mut g = CubicGraph { adj };
        for list in &mut g.adj {
            list.sort_unstable();
        }
        g.validate()?;
        Ok(g)
    }

    pub(crate) fn from_adjacency_unchecked(adj: Vec<[Vertex; 3]>) -> Self {
        CubicGraph { adj }
    }

    pub fn named(kind: NamedGraph) -> Result<Self, GraphError> {
        let edges: Vec<(Vertex, Vertex)> = match kind {
            NamedGraph::K4 => return Self::named(NamedGraph::K4Packing(4)),
            NamedGraph::K33 => (0..3)
                .flat_map(|a| (3..6).map(move |b| (a, b)))
                .collect(),
            NamedGraph::Prism => prism_edges(0).to_vec(),
            NamedGraph::Q3 => (0..8u32)
                .flat_map(|a| (0..3).map(move |bit| (a, a ^ (1 << bit))))
                .filter(|&(a, b)| a < b)
                .collect(),
            NamedGraph::K4Packing(n) => {
                if n == 0 || n % 4 != 0 {
                    return Err(GraphError::BadN { kind: "K4 packing", n });
                }
                (0..n as Vertex / 4).flat_map(|c| k4_edges(4 * c)).collect()
            }
            NamedGraph::PrismPacking(n) => {
                if n < 6 || n % 4 != 2 {
                    return Err(GraphError::BadN { kind: "prism packing", n });
                }
                let mut e = prism_edges(0).to_vec();
                e.extend((0..(n as Vertex - 6) / 4).flat_map(|c| k4_edges(6 + 4 * c)));
                e
            }
            NamedGraph::Ladder(n) => {
                check_n(n)?;
                let h = n as Vertex / 2;
                (0..h)
                    .flat_map(|i| [(i, (i + 1) % h), (h + i, h + (i + 1) % h), (i, h + i)])
                    .collect()
            }
        };
        let n = edges.iter().map(|&(a, b)| a.max(b) as usize + 1).max().unwrap_or(0);
        Self::from_edges(n, &edges)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        3 * self.n() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex; 3] {
        &self.adj[v as usize]
    }

    pub fn adjacency(&self) -> &[[Vertex; 3]] {
        &self.adj
    }

    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        let a = &self.adj[u as usize];
        a[0] == v || a[1] == v || a[2] == v
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as Vertex;
            list.iter().filter(move |&&v| u < v).map(move |&v| (u, v))
        })
    }

    /// The `i`-th oriented edge, `i < 3n`: tail `i / 3`, head its `(i % 3)`-th neighbour.
    #[inline]
    pub fn oriented_edge(&self, i: usize) -> (Vertex, Vertex) {
        ((i / 3) as Vertex, self.adj[i / 3][i % 3])
    }

    /// Number of triangles through `v`.
    #[inline]
    pub fn triangles_at(&self, v: Vertex) -> u8 {
        let [a, b, c] = self.adj[v as usize];
        self.has_edge(a, b) as u8 + self.has_edge(a, c) as u8 + self.has_edge(b, c) as u8
    }

    pub fn triangle_count(&self) -> usize {
        (0..self.n() as Vertex)
            .map(|v| self.triangles_at(v) as usize)
            .sum::<usize>()
            / 3
    }

    /// Number of common neighbours of `u` and `v`.
    #[inline]
    pub fn common_neighbors(&self, u: Vertex, v: Vertex) -> usize {
        let b = &self.adj[v as usize];
        self.adj[u as usize].iter().filter(|w| b.contains(w)).count()
    }

    /// Class of `v` using the local rules: 3 triangles means a tetrahedron,
    /// 2 means a diamond diagonal, 1 means an isolated triangle unless the
    /// triangle shares its far edge with a second triangle.
    pub fn vertex_class(&self, v: Vertex) -> VertexClass {
        classify(self, v, |u| self.triangles_at(u))
    }

    pub fn vertex_classes(&self) -> Vec<VertexClass> {
        let deltas: Vec<u8> = (0..self.n() as Vertex).map(|v| self.triangles_at(v)).collect();
        (0..self.n() as Vertex)
            .map(|v| classify(self, v, |u| deltas[u as usize]))
            .collect()
    }

    /// Exact census by inspecting every vertex.
    pub fn census(&self) -> MotifCensus {
        let deltas: Vec<u8> = (0..self.n() as Vertex).map(|v| self.triangles_at(v)).collect();
        let mut tally = ClassTally::default();
        for v in 0..self.n() as Vertex {
            tally.add(deltas[v as usize], classify(self, v, |u| deltas[u as usize]));
        }
        tally.census()
    }

    /// Full structural check: sorted distinct lists, no loops, symmetry.
    pub fn validate(&self) -> Result<(), GraphError> {
        check_n(self.n())?;
        (0..self.n() as Vertex).try_for_each(|v| self.validate_vertex(v))
    }

    /// Checks the invariants at the given vertices only.
    pub fn validate_local(&self, vertices: &[Vertex]) -> Result<(), GraphError> {
        vertices.iter().try_for_each(|&v| self.validate_vertex(v))
    }

    fn validate_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        let n = self.n();
        let list = self.adj[v as usize];
        for &u in &list {
            if u as usize >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u, n });
            }
            if u == v {
                return Err(GraphError::NotSimple(v, v));
            }
            if !self.has_edge(u, v) {
                return Err(GraphError::Asymmetric(v, u));
            }
        }
        if list[0] == list[1] || list[1] == list[2] || list[0] == list[2] {
            return Err(GraphError::NotSimple(v, list[1]));
        }
        if list[0] > list[1] || list[1] > list[2] {
            return Err(GraphError::Unsorted(v));
        }
        Ok(())
    }

    /// Replaces neighbour `old` of `u` by `new`, keeping the list sorted.
    #[inline]
    pub(crate) fn replace_neighbor(&mut self, u: Vertex, old: Vertex, new: Vertex) {
        let list = &mut self.adj[u as usize];
        let i = list.iter().position(|&w| w == old).expect("old neighbour present");
        list[i] = new;
        list.sort_unstable();
    }
}

fn k4_edges(base: Vertex) -> impl Iterator<Item = (Vertex, Vertex)> {
    (0..4).flat_map(move |a| (a + 1..4).map(move |b| (base + a, base + b)))
}

fn prism_edges(base: Vertex) -> [(Vertex, Vertex); 9] {
    let b = base;
    [
        (b, b + 1),
        (b + 1, b + 2),
        (b, b + 2),
        (b + 3, b + 4),
        (b + 4, b + 5),
        (b + 3, b + 5),
        (b, b + 3),
        (b + 1, b + 4),
        (b + 2, b + 5),
    ]
}

/// Per-vertex motif class; every vertex gets exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum VertexClass {
    Free,
    IsolatedTriangle,
    DiamondExternal,
    DiamondInternal,
    Tetrahedron,
}

/// Classifies `v` given a lookup of per-vertex triangle counts.
#[inline]
pub(crate) fn classify(g: &CubicGraph, v: Vertex, delta: impl Fn(Vertex) -> u8) -> VertexClass {
    match delta(v) {
        0 => VertexClass::Free,
        1 => {
            let [a, b, c] = *g.neighbors(v);
            let (p, q) = if g.has_edge(a, b) {
                (a, b)
            } else if g.has_edge(a, c) {
                (a, c)
            } else {
                (b, c)
            };
            if delta(p) >= 2 || delta(q) >= 2 {
                VertexClass::DiamondExternal
            } else {
                VertexClass::IsolatedTriangle
            }
        }
        2 => VertexClass::DiamondInternal,
        _ => VertexClass::Tetrahedron,
    }
}

/// Triangle, isolated-triangle, diamond, tetrahedron and free-vertex counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct MotifCensus {
    pub delta: usize,
    pub iso: usize,
    pub dia: usize,
    pub tet: usize,
    pub free: usize,
}

impl MotifCensus {
    /// `Δ = I + 2D + 4T` and `n = F + 3I + 4D + 4T`.
    pub fn identities_hold(&self, n: usize) -> bool {
        self.delta == self.iso + 2 * self.dia + 4 * self.tet
            && n == self.free + 3 * self.iso + 4 * self.dia + 4 * self.tet
    }
}

/// Vertex-level sums from which the census is recovered by division.
/// Kept signed so that differences (see `LocalDelta`) live in the same type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ClassTally {
    /// Sum of per-vertex triangle counts, `3Δ`.
    pub triangle_incidences: i64,
    pub free: i64,
    pub isolated: i64,
    pub diamond_external: i64,
    pub diamond_internal: i64,
    pub tetrahedron: i64,
}

impl ClassTally {
    #[inline]
    pub fn add(&mut self, delta_v: u8, class: VertexClass) {
        self.bump(delta_v, class, 1);
    }

    #[inline]
    pub fn remove(&mut self, delta_v: u8, class: VertexClass) {
        self.bump(delta_v, class, -1);
    }

    #[inline]
    fn bump(&mut self, delta_v: u8, class: VertexClass, s: i64) {
        self.triangle_incidences += s * delta_v as i64;
        match class {
            VertexClass::Free => self.free += s,
            VertexClass::IsolatedTriangle => self.isolated += s,
            VertexClass::DiamondExternal => self.diamond_external += s,
            VertexClass::DiamondInternal => self.diamond_internal += s,
            VertexClass::Tetrahedron => self.tetrahedron += s,
        }
    }

    pub fn census(&self) -> MotifCensus {
        debug_assert!(self.triangle_incidences % 3 == 0);
        debug_assert!(self.isolated % 3 == 0 && self.diamond_internal % 2 == 0);
        debug_assert!(self.tetrahedron % 4 == 0);
        MotifCensus {
            delta: (self.triangle_incidences / 3) as usize,
            iso: (self.isolated / 3) as usize,
            dia: (self.diamond_internal / 2) as usize,
            tet: (self.tetrahedron / 4) as usize,
            free: self.free as usize,
        }
    }
}

impl std::ops::Add for ClassTally {
    type Output = ClassTally;
    fn add(self, o: ClassTally) -> ClassTally {
        ClassTally {
            triangle_incidences: self.triangle_incidences + o.triangle_incidences,
            free: self.free + o.free,
            isolated: self.isolated + o.isolated,
            diamond_external: self.diamond_external + o.diamond_external,
            diamond_internal: self.diamond_internal + o.diamond_internal,
            tetrahedron: self.tetrahedron + o.tetrahedron,
        }
    }
}

impl std::ops::Sub for ClassTally {
    type Output = ClassTally;
    fn sub(self, o: ClassTally) -> ClassTally {
        ClassTally {
            triangle_incidences: self.triangle_incidences - o.triangle_incidences,
            free: self.free - o.free,
            isolated: self.isolated - o.isolated,
            diamond_external: self.diamond_external - o.diamond_external,
            diamond_internal: self.diamond_internal - o.diamond_internal,
            tetrahedron: self.tetrahedron - o.tetrahedron,
        }
    }
}
