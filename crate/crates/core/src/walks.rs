//! Lazy random walks and connected covering sets.
//!
//! A lazy walk stays put with probability 1/2 and otherwise moves to a uniform
//! neighbor; its stationary distribution is `deg(v)/2m`.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{bfs_from, Graph, Vertex, VertexSet};
pub use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("vertex {0} is isolated")]
    IsolatedVertex(Vertex),
    #[error("vertex {0} is outside the graph")]
    VertexOutOfRange(Vertex),
    #[error("graph has no edges")]
    Edgeless,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoveringError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("target {index} has {size} vertices, below the stated minimum {min}")]
    TargetTooSmall { index: usize, size: usize, min: usize },
    #[error("target {index} contains vertices outside the graph")]
    TargetOutOfRange { index: usize },
    #[error("parameters out of range: {0}")]
    Parameters(String),
    #[error("all {attempts} attempts exceeded the size bound {bound:.1}; best set has {} vertices", best.len())]
    SizeBound { attempts: usize, bound: f64, best: VertexSet },
}

/// One lazy step from `v`.
pub fn lazy_step(g: &Graph, v: Vertex, rng: &mut RngStream) -> Result<Vertex, WalkError> {
    if v >= g.n() {
        return Err(WalkError::VertexOutOfRange(v));
    }
    let deg = g.degree(v);
    if deg == 0 {
        return Err(WalkError::IsolatedVertex(v));
    }
    let r = rng.gen_range(0..2 * deg);
    Ok(if r < deg { v } else { g.neighbors(v)[r - deg] })
}

/// Degree-proportional sampler over a cumulative degree table.
#[derive(Debug, Clone)]
pub struct StationarySampler {
    cumulative: Vec<usize>,
}

impl StationarySampler {
    pub fn new(g: &Graph) -> Result<Self, WalkError> {
        if g.m() == 0 {
            return Err(WalkError::Edgeless);
        }
        let mut acc = 0;
        let cumulative = (0..g.n())
            .map(|v| {
                acc += g.degree(v);
                acc
            })
            .collect();
        Ok(StationarySampler { cumulative })
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vertex {
        let total = *self.cumulative.last().expect("nonempty");
        let r = rng.gen_range(0..total);
        self.cumulative.partition_point(|&c| c <= r)
    }
}

/// A vertex drawn from `pi(v) = deg(v)/2m`.
pub fn sample_stationary(g: &Graph, rng: &mut RngStream) -> Result<Vertex, WalkError> {
    Ok(StationarySampler::new(g)?.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Vertex(Vertex),
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkTrace {
    pub vertices: Vec<Vertex>,
    pub visited: VertexSet,
}

/// A walk of `steps` lazy steps; the trace has `steps + 1` entries.
pub fn run_walk(g: &Graph, steps: usize, rng: &mut RngStream, start: Start) -> Result<WalkTrace, WalkError> {
    let mut v = match start {
        Start::Vertex(v) if v >= g.n() => return Err(WalkError::VertexOutOfRange(v)),
        Start::Vertex(v) => v,
        Start::Stationary => sample_stationary(g, rng)?,
    };
    let mut vertices = Vec::with_capacity(steps + 1);
    let mut mask = vec![false; g.n()];
    vertices.push(v);
    mask[v] = true;
    for _ in 0..steps {
        v = lazy_step(g, v, rng)?;
        vertices.push(v);
        mask[v] = true;
    }
    Ok(WalkTrace { vertices, visited: VertexSet::from_mask(&mask) })
}

/// Upper bound on the chance that a stationary-start lazy walk of `steps`
/// steps misses a set of `u_size` vertices: `exp(-(h^3/(8 d^3)) * u*steps/n)`.
pub fn miss_probability_bound(h: f64, d: f64, u_size: usize, n: usize, steps: usize) -> f64 {
    (-(h.powi(3) / (8.0 * d.powi(3))) * (u_size as f64 * steps as f64 / n as f64)).exp()
}

/// Walk length `(16/eps^3) (n/s) ln(q s/n)`, where `q` is first padded with
/// dummy targets so that `q s >= 2n`.
pub fn covering_walk_length(n: usize, s: usize, q: usize, eps: f64) -> f64 {
    16.0 / eps.powi(3) * (n as f64 / s as f64) * padded_log(n, s, q)
}

/// Size bound `K (n/s) ln(q s/n)` with the same padding.
pub fn covering_size_bound(n: usize, s: usize, q: usize, k: f64) -> f64 {
    k * (n as f64 / s as f64) * padded_log(n, s, q)
}

fn padded_log(n: usize, s: usize, q: usize) -> f64 {
    let qs = (q as f64 * s as f64).max(2.0 * n as f64);
    (qs / n as f64).ln()
}

/// Default covering constant, `32/eps^3`.
pub fn default_covering_constant(eps: f64) -> f64 {
    32.0 / eps.powi(3)
}

/// Default retry count, `ceil(3 ln n)`.
pub fn default_retries(n: usize) -> usize {
    (3.0 * (n.max(2) as f64).ln()).ceil() as usize
}

#[derive(Debug, Clone, Serialize)]
pub struct Covering {
    pub set: VertexSet,
    /// 1-based index of the successful attempt.
    pub attempts: usize,
    pub walk_steps: usize,
    pub bound: f64,
}

/// A connected set hitting every target, built from one stationary-start lazy
/// walk of `ceil(l)` steps plus a shortest path from each missed target to the
/// walk. Leaves of a spanning tree of the union are then trimmed while every
/// target stays hit, so the result is connected and never larger than the
/// walk-plus-paths set. The first of `retries` attempts within
/// `K (n/s) ln(qs/n)` is returned.
pub fn covering_set(
    g: &Graph,
    targets: &[VertexSet],
    s: usize,
    eps: f64,
    k: f64,
    retries: usize,
    rng: &RngStream,
) -> Result<Covering, CoveringError> {
    if !(eps > 0.0 && eps < 1.0) || s == 0 || retries == 0 || k <= 0.0 {
        return Err(CoveringError::Parameters(format!("eps={eps}, s={s}, K={k}, retries={retries}")));
    }
    for (index, t) in targets.iter().enumerate() {
        if t.len() < s {
            return Err(CoveringError::TargetTooSmall { index, size: t.len(), min: s });
        }
    }
    let n = g.n();
    let steps = covering_walk_length(n, s, targets.len(), eps).ceil() as usize;
    let bound = covering_size_bound(n, s, targets.len(), k);
    let plan = CoverPlan { steps, quota: None, max_size: bound, required_hits: targets.len(), prune_to: 1, retries };
    cover(g, targets, &plan, rng)
}

/// Engine-facing covering parameters.
#[derive(Debug, Clone)]
pub(crate) struct CoverPlan {
    pub steps: usize,
    /// Stop the walk early once this many distinct vertices are visited.
    pub quota: Option<usize>,
    pub max_size: f64,
    /// How many targets must be hit; the closest ones are chosen.
    pub required_hits: usize,
    /// Trimming stops once the set is this small.
    pub prune_to: usize,
    pub retries: usize,
}

pub(crate) fn cover(
    g: &Graph,
    targets: &[VertexSet],
    plan: &CoverPlan,
    rng: &RngStream,
) -> Result<Covering, CoveringError> {
    if g.m() == 0 {
        return Err(WalkError::Edgeless.into());
    }
    if !g.is_connected() {
        return Err(CoveringError::Disconnected);
    }
    for (index, t) in targets.iter().enumerate() {
        if t.as_slice().last().is_some_and(|&v| v >= g.n()) {
            return Err(CoveringError::TargetOutOfRange { index });
        }
    }
    let sampler = StationarySampler::new(g)?;
    let mut best: Option<VertexSet> = None;
    for attempt in 0..plan.retries {
        let mut stream = rng.fork(attempt as u64);
        let set = cover_once(g, targets, plan, &sampler, &mut stream)?;
        if set.len() as f64 <= plan.max_size {
            return Ok(Covering { set, attempts: attempt + 1, walk_steps: plan.steps, bound: plan.max_size });
        }
        if best.as_ref().is_none_or(|b| set.len() < b.len()) {
            best = Some(set);
        }
    }
    Err(CoveringError::SizeBound {
        attempts: plan.retries,
        bound: plan.max_size,
        best: best.unwrap_or_else(|| VertexSet::empty(g.n())),
    })
}

fn cover_once(
    g: &Graph,
    targets: &[VertexSet],
    plan: &CoverPlan,
    sampler: &StationarySampler,
    rng: &mut RngStream,
) -> Result<VertexSet, WalkError> {
    let n = g.n();
    let mut in_set = vec![false; n];
    let mut v = sampler.sample(rng);
    in_set[v] = true;
    let mut distinct = 1;
    for _ in 0..plan.steps {
        if plan.quota.is_some_and(|q| distinct >= q) {
            break;
        }
        v = lazy_step(g, v, rng)?;
        if !in_set[v] {
            in_set[v] = true;
            distinct += 1;
        }
    }

    let walk: Vec<Vertex> = (0..n).filter(|&v| in_set[v]).collect();
    let (dist, parent) = bfs_from(g, walk.iter().copied(), |_| true);
    // closest vertex of each target to the walk, lowest id among ties
    let mut reach: Vec<(usize, usize, Vertex)> = targets
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let (d, v) = t.iter().map(|v| (dist[v], v)).min().unwrap_or((usize::MAX, usize::MAX));
            (d, j, v)
        })
        .collect();
    reach.sort_unstable();
    let required: Vec<usize> = reach.iter().take(plan.required_hits).map(|&(_, j, _)| j).collect();
    for &(d, _, mut v) in reach.iter().take(plan.required_hits) {
        if d == usize::MAX {
            continue;
        }
        while !in_set[v] {
            in_set[v] = true;
            v = parent[v];
        }
    }
    prune(g, targets, &required, &mut in_set, plan.prune_to);
    Ok(VertexSet::from_mask(&in_set))
}

/// Trims leaves of a BFS spanning tree of `G[set]` (lowest id first) while
/// every required target keeps at least one member in the set.
fn prune(g: &Graph, targets: &[VertexSet], required: &[usize], in_set: &mut [bool], prune_to: usize) {
    let n = g.n();
    let members: Vec<Vertex> = (0..n).filter(|&v| in_set[v]).collect();
    let mut size = members.len();
    if size <= prune_to.max(1) {
        return;
    }
    let mut hits_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; targets.len()];
    for &j in required {
        for v in targets[j].iter() {
            if in_set[v] {
                hits_of[v].push(j);
                count[j] += 1;
            }
        }
    }
    let root = members[0];
    let (_, parent) = bfs_from(g, [root], |w| in_set[w]);
    let mut tree_deg = vec![0usize; n];
    for &v in &members {
        if v != root {
            tree_deg[v] += 1;
            tree_deg[parent[v]] += 1;
        }
    }
    let mut children: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for &v in &members {
        if v != root {
            children[parent[v]].push(v);
        }
    }
    let mut removed = vec![false; n];
    let mut leaves: BTreeSet<Vertex> = members.iter().copied().filter(|&v| tree_deg[v] <= 1).collect();
    while let Some(v) = leaves.pop_first() {
        if size <= prune_to.max(1) {
            break;
        }
        if hits_of[v].iter().any(|&j| count[j] <= 1) {
            continue;
        }
        for &j in &hits_of[v] {
            count[j] -= 1;
        }
        removed[v] = true;
        in_set[v] = false;
        size -= 1;
        let neighbor = if v != root && !removed[parent[v]] {
            Some(parent[v])
        } else {
            children[v].iter().copied().find(|&c| !removed[c])
        };
        if let Some(w) = neighbor {
            tree_deg[w] -= 1;
            if tree_deg[w] <= 1 {
                leaves.insert(w);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{named_fixture, random_regular, Family};
    use crate::graph::build_graph;
    use crate::graph::fixtures::{complete, cycle, set};

    #[test]
    fn lazy_step_on_an_edge() {
        let g = complete(2);
        let mut rng = RngStream::new(1, 0);
        let stays = (0..100_000).filter(|_| lazy_step(&g, 0, &mut rng).unwrap() == 0).count();
        assert!((stays as f64 / 1e5 - 0.5).abs() <= 0.01);
    }

    #[test]
    fn lazy_step_neighbor_frequencies() {
        let g = complete(5);
        let mut rng = RngStream::new(2, 0);
        let draws = 100_000;
        let mut counts = [0usize; 5];
        for _ in 0..draws {
            counts[lazy_step(&g, 0, &mut rng).unwrap()] += 1;
        }
        let p = 1.0 / 8.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts[1..] {
            assert!((c as f64 - draws as f64 * p).abs() <= 3.0 * sigma);
        }
        assert!((counts[0] as f64 / draws as f64 - 0.5).abs() <= 0.01);
    }

    #[test]
    fn lazy_step_errors() {
        let g = build_graph(3, &[(0, 1)]).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert_eq!(lazy_step(&g, 2, &mut rng), Err(WalkError::IsolatedVertex(2)));
        assert_eq!(lazy_step(&g, 5, &mut rng), Err(WalkError::VertexOutOfRange(5)));
    }

    fn chi_square(counts: &[usize], probs: &[f64]) -> f64 {
        let total: usize = counts.iter().sum();
        counts
            .iter()
            .zip(probs)
            .map(|(&c, &p)| {
                let e = total as f64 * p;
                (c as f64 - e).powi(2) / e
            })
            .sum()
    }

    #[test]
    fn stationary_sampling() {
        let star = named_fixture(Family::CompleteBipartite, &[1, 3]).unwrap();
        let sampler = StationarySampler::new(&star).unwrap();
        let mut rng = RngStream::new(3, 0);
        let mut counts = [0usize; 4];
        for _ in 0..100_000 {
            counts[sampler.sample(&mut rng)] += 1;
        }
        // 3 degrees of freedom; 16.27 is the 0.999 quantile
        assert!(chi_square(&counts, &[0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) < 16.27);

        let g = random_regular(10, 3, &mut RngStream::new(4, 0)).unwrap();
        let mut counts = [0usize; 10];
        for _ in 0..100_000 {
            counts[sample_stationary(&g, &mut rng).unwrap()] += 1;
        }
        // 9 degrees of freedom; 27.88 is the 0.999 quantile
        assert!(chi_square(&counts, &[0.1; 10]) < 27.88);
        assert_eq!(sample_stationary(&build_graph(3, &[]).unwrap(), &mut rng), Err(WalkError::Edgeless));
    }

    #[test]
    fn walk_traces() {
        let g = cycle(6);
        let mut rng = RngStream::new(5, 0);
        let t = run_walk(&g, 0, &mut rng, Start::Vertex(4)).unwrap();
        assert_eq!(t.vertices, vec![4]);
        let t = run_walk(&g, 500, &mut rng, Start::Stationary).unwrap();
        assert_eq!(t.vertices.len(), 501);
        for w in t.vertices.windows(2) {
            assert!(w[0] == w[1] || g.has_edge(w[0], w[1]));
        }
        assert_eq!(t.visited, VertexSet::new(6, t.vertices.iter().copied()).unwrap());
    }

    #[test]
    fn walk_occupancy() {
        let mut rng = RngStream::new(6, 0);
        let t = run_walk(&complete(2), 10_000, &mut rng, Start::Stationary).unwrap();
        let zeros = t.vertices.iter().filter(|&&v| v == 0).count() as f64 / t.vertices.len() as f64;
        assert!((zeros - 0.5).abs() <= 0.02);
        let t = run_walk(&cycle(6), 10_000, &mut rng, Start::Stationary).unwrap();
        let mut occ = [0.0; 6];
        for &v in &t.vertices {
            occ[v] += 1.0 / t.vertices.len() as f64;
        }
        let tv: f64 = occ.iter().map(|o| (o - 1.0 / 6.0).abs()).sum::<f64>() / 2.0;
        assert!(tv <= 0.05, "tv = {tv}");
    }

    #[test]
    fn miss_bound_arithmetic() {
        assert!((miss_probability_bound(4.0, 4.0, 100, 100, 8) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(miss_probability_bound(2.0, 4.0, 10, 100, 0), 1.0);
        assert!((miss_probability_bound(2.0, 4.0, 10, 100, 640) - 0.36787944117144233).abs() < 1e-12);
    }

    #[test]
    fn covering_whole_vertex_set() {
        let g = named_fixture(Family::Petersen, &[]).unwrap();
        let c = covering_set(&g, &[VertexSet::full(10)], 10, 0.4, 500.0, 3, &RngStream::new(7, 0)).unwrap();
        assert_eq!(c.set.len(), 1);
    }

    #[test]
    fn covering_antipodal_cycle_vertices() {
        let g = cycle(6);
        let targets = [set(6, &[0]), set(6, &[3])];
        let c = covering_set(&g, &targets, 1, 0.4, 1e6, 3, &RngStream::new(8, 0)).unwrap();
        assert!(c.set.contains(0) && c.set.contains(3));
        assert!(g.is_connected_set(&c.set));
        // oracle: smallest connected subset of C6 holding 0 and 3
        let smallest = (0u32..64)
            .filter(|m| m & 1 != 0 && m & 8 != 0)
            .map(|m| VertexSet::new(6, (0..6).filter(|&v| m >> v & 1 == 1)).unwrap())
            .filter(|s| g.is_connected_set(s))
            .map(|s| s.len())
            .min()
            .unwrap();
        assert_eq!(smallest, 4);
        assert!(c.set.len() >= smallest);
    }

    #[test]
    fn covering_errors() {
        let g = cycle(6);
        let rng = RngStream::new(0, 0);
        assert_eq!(
            covering_set(&g, &[set(6, &[1])], 2, 0.4, 10.0, 3, &rng).unwrap_err(),
            CoveringError::TargetTooSmall { index: 0, size: 1, min: 2 }
        );
        let two = build_graph(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            covering_set(&two, &[set(4, &[0])], 1, 0.4, 10.0, 3, &rng).unwrap_err(),
            CoveringError::Disconnected
        );
        // a bound below one vertex cannot be met
        let err = covering_set(&g, &[set(6, &[0])], 1, 0.4, 1e-3, 2, &rng).unwrap_err();
        assert!(matches!(err, CoveringError::SizeBound { attempts: 2, .. }));
    }

    #[test]
    fn covering_on_random_regular() {
        let g = random_regular(1000, 3, &mut RngStream::new(9, 0)).unwrap();
        let mut pick = RngStream::new(9, 1);
        let targets: Vec<VertexSet> = (0..100)
            .map(|_| {
                let ids: Vec<_> = rand::seq::index::sample(&mut pick, 1000, 20).into_iter().collect();
                VertexSet::new(1000, ids).unwrap()
            })
            .collect();
        let eps = 0.1;
        let c = covering_set(
            &g,
            &targets,
            20,
            eps,
            default_covering_constant(eps),
            default_retries(1000),
            &RngStream::new(9, 2),
        )
        .unwrap();
        assert!(g.is_connected_set(&c.set));
        assert!(targets.iter().all(|t| t.first_common(&c.set).is_some()));
        assert!(c.set.len() as f64 <= c.bound);
    }
}
