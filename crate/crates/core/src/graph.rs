//! Immutable simple undirected graphs and the combinatorial primitives built on them.
//!
//! Vertices are dense `0..n` ids. Neighbor lists are kept sorted, and every
//! deterministic traversal breaks ties by lowest id.

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) has an endpoint outside 0..{2}")]
    EndpointOutOfRange(Vertex, Vertex, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(Vertex, Vertex),
    #[error("vertex {0} is outside 0..{1}")]
    VertexOutOfRange(Vertex, usize),
    #[error("operation requires a nonempty vertex set")]
    EmptySet,
    #[error("sets overlap at vertex {0}")]
    Overlap(Vertex),
    #[error("no path between the two sets")]
    NoPath,
    #[error("edge list line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is not `Clone`/`PartialEq`; keep its rendering instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for GraphError {
    fn from(e: std::io::Error) -> Self {
        GraphError::Io(IoError(e.to_string()))
    }
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// A set of vertex ids drawn from `0..universe`, stored both as a sorted list
/// and as a bitmap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    universe: usize,
    members: Vec<Vertex>,
    bits: Vec<u64>,
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        VertexSet { universe, members: Vec::new(), bits: vec![0; universe.div_ceil(64)] }
    }

    pub fn full(universe: usize) -> Self {
        Self::from_sorted_unchecked(universe, (0..universe).collect())
    }

    /// Builds a set from arbitrary ids; duplicates collapse.
    pub fn new(universe: usize, ids: impl IntoIterator<Item = Vertex>) -> Result<Self> {
        let mut set = Self::empty(universe);
        for v in ids {
            if v >= universe {
                return Err(GraphError::VertexOutOfRange(v, universe));
            }
            set.bits[v / 64] |= 1 << (v % 64);
        }
        set.rebuild_members();
        Ok(set)
    }

    pub(crate) fn from_sorted_unchecked(universe: usize, members: Vec<Vertex>) -> Self {
        let mut bits = vec![0u64; universe.div_ceil(64)];
        for &v in &members {
            bits[v / 64] |= 1 << (v % 64);
        }
        VertexSet { universe, members, bits }
    }

    pub(crate) fn from_mask(mask: &[bool]) -> Self {
        let members = mask.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v).collect();
        Self::from_sorted_unchecked(mask.len(), members)
    }

    fn rebuild_members(&mut self) {
        self.members.clear();
        for (w, &word) in self.bits.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let b = word.trailing_zeros() as usize;
                self.members.push(w * 64 + b);
                word &= word - 1;
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        v < self.universe && self.bits[v / 64] & (1 << (v % 64)) != 0
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Vertex> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.members
    }

    pub fn first(&self) -> Option<Vertex> {
        self.members.first().copied()
    }

    pub fn insert(&mut self, v: Vertex) -> Result<bool> {
        if v >= self.universe {
            return Err(GraphError::VertexOutOfRange(v, self.universe));
        }
        if self.contains(v) {
            return Ok(false);
        }
        self.bits[v / 64] |= 1 << (v % 64);
        let pos = self.members.partition_point(|&x| x < v);
        self.members.insert(pos, v);
        Ok(true)
    }

    pub fn remove(&mut self, v: Vertex) -> bool {
        if !self.contains(v) {
            return false;
        }
        self.bits[v / 64] &= !(1 << (v % 64));
        let pos = self.members.partition_point(|&x| x < v);
        self.members.remove(pos);
        true
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let universe = self.universe.max(other.universe);
        let mut out = VertexSet::empty(universe);
        for (i, w) in out.bits.iter_mut().enumerate() {
            *w = self.bits.get(i).copied().unwrap_or(0) | other.bits.get(i).copied().unwrap_or(0);
        }
        out.rebuild_members();
        out
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut out = self.clone();
        for (i, w) in out.bits.iter_mut().enumerate() {
            *w &= !other.bits.get(i).copied().unwrap_or(0);
        }
        out.rebuild_members();
        out
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut out = self.clone();
        for (i, w) in out.bits.iter_mut().enumerate() {
            *w &= other.bits.get(i).copied().unwrap_or(0);
        }
        out.rebuild_members();
        out
    }

    /// Lowest common vertex, if any.
    pub fn first_common(&self, other: &VertexSet) -> Option<Vertex> {
        self.iter().find(|&v| other.contains(v))
    }

    /// Complement within `0..universe`.
    pub fn complement(&self) -> VertexSet {
        let mut out = self.clone();
        for w in out.bits.iter_mut() {
            *w = !*w;
        }
        let tail = self.universe % 64;
        if tail != 0 {
            if let Some(last) = out.bits.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        out.rebuild_members();
        out
    }

    fn max_id(&self) -> Option<Vertex> {
        self.members.last().copied()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members.iter()).finish()
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.members.serialize(s)
    }
}

/// A simple path, stored as its vertex sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub vertices: Vec<Vertex>,
}

impl Path {
    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Immutable simple undirected graph in compressed adjacency form.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<Vertex>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n(), self.m())
    }
}

/// Builds a graph, rejecting out-of-range endpoints, self-loops and duplicates.
pub fn build_graph(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Graph> {
    let mut lists: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(GraphError::EndpointOutOfRange(u, v, n));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        lists[u].push(v);
        lists[v].push(u);
    }
    for (u, list) in lists.iter_mut().enumerate() {
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
        }
    }
    Ok(Graph::from_sorted_lists(lists))
}

impl Graph {
    pub(crate) fn from_sorted_lists(lists: Vec<Vec<Vertex>>) -> Graph {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for list in lists {
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        Graph { offsets, neighbors }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn is_regular(&self) -> bool {
        self.n() == 0 || self.max_degree() == self.min_degree()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && v < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n()).flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    fn check_set(&self, s: &VertexSet) -> Result<()> {
        match s.max_id() {
            Some(v) if v >= self.n() => Err(GraphError::VertexOutOfRange(v, self.n())),
            _ => Ok(()),
        }
    }

    /// `N(S)`: vertices outside `S` with a neighbor in `S`.
    pub fn external_neighborhood(&self, s: &VertexSet) -> Result<VertexSet> {
        self.check_set(s)?;
        let mut mask = vec![false; self.n()];
        for v in s.iter() {
            for &w in self.neighbors(v) {
                if !s.contains(w) {
                    mask[w] = true;
                }
            }
        }
        Ok(VertexSet::from_mask(&mask))
    }

    /// Number of edges with exactly one endpoint in `S`.
    pub fn edge_cut(&self, s: &VertexSet) -> Result<usize> {
        self.check_set(s)?;
        Ok(s.iter().map(|v| self.neighbors(v).iter().filter(|&&w| !s.contains(w)).count()).sum())
    }

    /// `e(A, B)` for disjoint `A`, `B`.
    pub fn edges_between(&self, a: &VertexSet, b: &VertexSet) -> Result<usize> {
        self.check_set(a)?;
        self.check_set(b)?;
        if let Some(v) = a.first_common(b) {
            return Err(GraphError::Overlap(v));
        }
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        Ok(small.iter().map(|v| self.neighbors(v).iter().filter(|&&w| large.contains(w)).count()).sum())
    }

    /// `B(U, i)`: vertices within distance `i` of `U`.
    pub fn ball(&self, u: &VertexSet, radius: usize) -> Result<VertexSet> {
        self.check_set(u)?;
        if u.is_empty() {
            return Err(GraphError::EmptySet);
        }
        let mut mask = vec![false; self.n()];
        let mut frontier: Vec<Vertex> = u.iter().collect();
        for &v in &frontier {
            mask[v] = true;
        }
        for _ in 0..radius {
            let mut next = Vec::new();
            for &v in &frontier {
                for &w in self.neighbors(v) {
                    if !mask[w] {
                        mask[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(VertexSet::from_mask(&mask))
    }

    /// Whether `G[S]` is connected. The empty set counts as connected.
    pub fn is_connected_set(&self, s: &VertexSet) -> bool {
        let Some(start) = s.first() else { return true };
        if s.max_id().is_some_and(|v| v >= self.n()) {
            return false;
        }
        let mut seen = VertexSet::empty(self.n());
        let _ = seen.insert(start);
        let mut stack = vec![start];
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &w in self.neighbors(v) {
                if s.contains(w) && !seen.contains(w) {
                    let _ = seen.insert(w);
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == s.len()
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.components().len() == 1
    }

    /// Connected components, each sorted, ordered by lowest member.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let mut label = vec![usize::MAX; self.n()];
        let mut comps = Vec::new();
        for root in 0..self.n() {
            if label[root] != usize::MAX {
                continue;
            }
            let id = comps.len();
            label[root] = id;
            let mut comp = vec![root];
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &w in self.neighbors(v) {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// `G[S]` relabelled to `0..|S|` in increasing id order; the map sends new ids to old.
    pub fn induced_subgraph(&self, s: &VertexSet) -> Result<(Graph, Vec<Vertex>)> {
        self.check_set(s)?;
        if s.is_empty() {
            return Err(GraphError::EmptySet);
        }
        let map: Vec<Vertex> = s.iter().collect();
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in map.iter().enumerate() {
            index[v] = i;
        }
        let lists = map
            .iter()
            .map(|&v| self.neighbors(v).iter().filter(|&&w| index[w] != usize::MAX).map(|&w| index[w]).collect())
            .collect();
        Ok((Graph::from_sorted_lists(lists), map))
    }

    /// A shortest path from `A` to `B`. BFS runs from `A` in increasing id order,
    /// so ties go to the lowest-id discoverer.
    pub fn shortest_path_between_sets(&self, a: &VertexSet, b: &VertexSet) -> Result<Path> {
        self.check_set(a)?;
        self.check_set(b)?;
        if a.is_empty() || b.is_empty() {
            return Err(GraphError::EmptySet);
        }
        if let Some(v) = a.first_common(b) {
            return Ok(Path { vertices: vec![v] });
        }
        let mut parent = vec![usize::MAX; self.n()];
        let mut queue: VecDeque<Vertex> = a.iter().collect();
        for v in a.iter() {
            parent[v] = v;
        }
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbors(v) {
                if parent[w] != usize::MAX {
                    continue;
                }
                parent[w] = v;
                if b.contains(w) {
                    let mut vertices = vec![w];
                    let mut cur = w;
                    while parent[cur] != cur {
                        cur = parent[cur];
                        vertices.push(cur);
                    }
                    vertices.reverse();
                    return Ok(Path { vertices });
                }
                queue.push_back(w);
            }
        }
        Err(GraphError::NoPath)
    }

    /// Reads the edge-list format: a header `n m` followed by `m` lines `u v`.
    /// Blank lines and `#` comments are skipped.
    pub fn read_edge_list(reader: impl BufRead) -> Result<Graph> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let mut fields = line.split_whitespace();
            let mut next = |what: &str| -> Result<usize> {
                let tok =
                    fields.next().ok_or_else(|| GraphError::Parse { line: lineno, msg: format!("missing {what}") })?;
                tok.parse().map_err(|_| GraphError::Parse { line: lineno, msg: format!("bad {what} `{tok}`") })
            };
            let (x, y) = (next("first field")?, next("second field")?);
            if fields.next().is_some() {
                return Err(GraphError::Parse { line: lineno, msg: "trailing fields".into() });
            }
            match header {
                None => header = Some((x, y)),
                Some(_) => edges.push((x.min(y), x.max(y))),
            }
        }
        let (n, m) = header.ok_or(GraphError::Parse { line: 0, msg: "missing `n m` header".into() })?;
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 0,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        build_graph(n, &edges)
    }

    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        Self::read_edge_list(text.as_bytes())
    }

    pub fn write_edge_list(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.n(), self.m())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn to_edge_list(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("edge list is ASCII")
    }
}

/// Multi-source BFS restricted to vertices accepted by `allowed`.
/// Returns `(dist, parent)`; unreachable vertices have `dist == usize::MAX`,
/// sources are their own parent.
pub(crate) fn bfs_from(
    g: &Graph,
    sources: impl IntoIterator<Item = Vertex>,
    allowed: impl Fn(Vertex) -> bool,
) -> (Vec<usize>, Vec<Vertex>) {
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in sources {
        if dist[s] == usize::MAX {
            dist[s] = 0;
            parent[s] = s;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if dist[w] == usize::MAX && allowed(w) {
                dist[w] = dist[v] + 1;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    (dist, parent)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        build_graph(n, &edges).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        build_graph(n, &edges).unwrap()
    }

    pub fn set(n: usize, ids: &[Vertex]) -> VertexSet {
        VertexSet::new(n, ids.iter().copied()).unwrap()
    }
}
