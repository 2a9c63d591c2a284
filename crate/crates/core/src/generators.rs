//! Instance generators, named fixtures and the jumbledness checker.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_graph, Graph, Vertex, VertexSet};
use crate::rng::RngStream;
use crate::spectral::EXHAUSTIVE_LIMIT;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("n*d must be even (n={n}, d={d})")]
    Parity { n: usize, d: usize },
    #[error("regular degree must satisfy 3 <= d < n (n={n}, d={d})")]
    DegreeRange { n: usize, d: usize },
    #[error("pairing model failed {attempts} times for n={n}, d={d}; dense near-regular generation is not supported")]
    RetriesExhausted { n: usize, d: usize, attempts: usize },
    #[error("edge probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("invalid parameters for {family}: {reason}")]
    Parameters { family: Family, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Regular,
    Gnp,
    Cycle,
    Complete,
    CompleteBipartite,
    Petersen,
    TwoTriangles,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Regular,
        Family::Gnp,
        Family::Cycle,
        Family::Complete,
        Family::CompleteBipartite,
        Family::Petersen,
        Family::TwoTriangles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Regular => "regular",
            Family::Gnp => "gnp",
            Family::Cycle => "cycle",
            Family::Complete => "complete",
            Family::CompleteBipartite => "complete-bipartite",
            Family::Petersen => "petersen",
            Family::TwoTriangles => "two-triangles",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// A reproducible instance description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub d: usize,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub a: usize,
    #[serde(default)]
    pub b: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Stream id used for instance generation.
pub const GEN_STREAM: u64 = 0x67656e;

impl GenSpec {
    pub fn generate(&self) -> Result<Graph, GenError> {
        let mut rng = RngStream::new(self.seed, GEN_STREAM);
        match self.family {
            Family::Regular => random_regular(self.n, self.d, &mut rng),
            Family::Gnp => gnp(self.n, self.p, &mut rng),
            Family::Cycle | Family::Complete => named_fixture(self.family, &[self.n]),
            Family::CompleteBipartite => named_fixture(self.family, &[self.a, self.b]),
            Family::Petersen | Family::TwoTriangles => named_fixture(self.family, &[]),
        }
    }
}

/// Random simple `d`-regular graph from the pairing model.
///
/// Stubs are paired in shuffled rounds; pairs that would form a loop or a
/// repeated edge go back into the pool, and a stalled pool restarts the
/// attempt.
pub fn random_regular(n: usize, d: usize, rng: &mut RngStream) -> Result<Graph, GenError> {
    if (n * d) % 2 != 0 {
        return Err(GenError::Parity { n, d });
    }
    if d < 3 || d >= n {
        return Err(GenError::DegreeRange { n, d });
    }
    const ATTEMPTS: usize = 500;
    for _ in 0..ATTEMPTS {
        if let Some(edges) = try_pairing(n, d, rng) {
            return Ok(build_graph(n, &edges).expect("pairing emits simple edges"));
        }
    }
    Err(GenError::RetriesExhausted { n, d, attempts: ATTEMPTS })
}

fn try_pairing(n: usize, d: usize, rng: &mut RngStream) -> Option<Vec<(Vertex, Vertex)>> {
    let mut edges: HashSet<(Vertex, Vertex)> = HashSet::with_capacity(n * d / 2);
    let mut stubs: Vec<Vertex> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut leftover = Vec::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u != v && !edges.contains(&(u, v)) {
                edges.insert((u, v));
            } else {
                leftover.extend_from_slice(pair);
            }
        }
        if !leftover.is_empty() && !pool_has_suitable_pair(&leftover, &edges) {
            return None;
        }
        stubs = leftover;
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    Some(edges)
}

fn pool_has_suitable_pair(stubs: &[Vertex], edges: &HashSet<(Vertex, Vertex)>) -> bool {
    let mut vertices: Vec<Vertex> = stubs.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            if !edges.contains(&(u, v)) {
                return true;
            }
        }
    }
    false
}

/// Binomial random graph `G(n, p)`.
pub fn gnp(n: usize, p: f64, rng: &mut RngStream) -> Result<Graph, GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::Probability(p));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Ok(build_graph(n, &edges).expect("pairs are distinct"))
}

/// Deterministic fixtures. Parameters: `cycle [n]`, `complete [n]`,
/// `complete-bipartite [a, b]`, `petersen []`, `two-triangles []`.
pub fn named_fixture(family: Family, params: &[usize]) -> Result<Graph, GenError> {
    let bad = |reason: &str| GenError::Parameters { family, reason: reason.into() };
    let edges: Vec<(Vertex, Vertex)>;
    let n;
    match (family, params) {
        (Family::Cycle, &[k]) => {
            if k < 3 {
                return Err(bad("cycle needs n >= 3"));
            }
            n = k;
            edges = (0..k).map(|i| (i.min((i + 1) % k), i.max((i + 1) % k))).collect();
        }
        (Family::Complete, &[k]) => {
            if k < 1 {
                return Err(bad("complete graph needs n >= 1"));
            }
            n = k;
            edges = (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).collect();
        }
        (Family::CompleteBipartite, &[a, b]) => {
            if a == 0 || b == 0 {
                return Err(bad("both sides must be nonempty"));
            }
            n = a + b;
            edges = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))).collect();
        }
        (Family::Petersen, &[]) => {
            n = 10;
            let mut e = Vec::new();
            for i in 0..5 {
                e.push((i, (i + 1) % 5));
                e.push((i, i + 5));
                e.push((5 + i, 5 + (i + 2) % 5));
            }
            edges = e;
        }
        (Family::TwoTriangles, &[]) => {
            n = 6;
            edges = vec![(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)];
        }
        (Family::Regular | Family::Gnp, _) => return Err(bad("random family, use GenSpec")),
        _ => return Err(bad(&format!("unexpected parameter list {params:?}"))),
    }
    Ok(build_graph(n, &edges).expect("fixture edges are simple"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumbleVerdict {
    /// Exact enumeration found no violating subset.
    Jumbled,
    /// A violating subset exists (exact or sampled).
    Violated,
    /// Sampling found nothing; this is not a certificate.
    NoViolationFound,
}

#[derive(Debug, Clone, Serialize)]
pub struct JumbleReport {
    pub verdict: JumbleVerdict,
    pub exact: bool,
    /// Subset with the largest `|e(X) - p*C(|X|,2)| - beta*|X|`.
    pub worst: Option<VertexSet>,
    pub worst_excess: f64,
}

const JUMBLE_SAMPLES: usize = 10_000;

/// Checks `|e(X) - p*C(|X|,2)| <= beta*|X|` for every subset (exact, `n <= 20`)
/// or for geometrically spread random subsets otherwise.
pub fn jumbledness_check(g: &Graph, p: f64, beta: f64, rng: &mut RngStream) -> JumbleReport {
    let n = g.n();
    let excess = |size: usize, inside: usize| {
        let expected = p * (size * size.saturating_sub(1)) as f64 / 2.0;
        (inside as f64 - expected).abs() - beta * size as f64
    };
    let mut worst: Option<(Vec<Vertex>, f64)> = None;
    let consider = |members: Vec<Vertex>, value: f64, worst: &mut Option<(Vec<Vertex>, f64)>| {
        if worst.as_ref().is_none_or(|(_, w)| value > *w) {
            *worst = Some((members, value));
        }
    };
    let exact = n <= EXHAUSTIVE_LIMIT;
    if exact {
        let adj: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect();
        for mask in 1u32..(1u32 << n) {
            let mut twice = 0;
            let mut rest = mask;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                twice += (adj[v] & mask).count_ones() as usize;
                rest &= rest - 1;
            }
            let value = excess(mask.count_ones() as usize, twice / 2);
            if worst.as_ref().is_none_or(|(_, w)| value > *w) {
                let members = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
                consider(members, value, &mut worst);
            }
        }
    } else {
        let mut order: Vec<Vertex> = (0..n).collect();
        let mut in_set = vec![false; n];
        let levels = (n as f64).log2().ceil().max(1.0) as usize;
        for i in 0..JUMBLE_SAMPLES {
            let frac = (i % levels) as f64 / levels as f64;
            let size = ((n as f64).powf(frac).round() as usize).clamp(1, n);
            let (chosen, _) = order.partial_shuffle(rng, size);
            let members: Vec<Vertex> = chosen.to_vec();
            for &v in &members {
                in_set[v] = true;
            }
            let twice: usize = members.iter().map(|&v| g.neighbors(v).iter().filter(|&&w| in_set[w]).count()).sum();
            for &v in &members {
                in_set[v] = false;
            }
            consider(members, excess(size, twice / 2), &mut worst);
        }
    }
    let (members, worst_excess) = worst.unwrap_or((Vec::new(), f64::NEG_INFINITY));
    let violated = worst_excess > 1e-12;
    let verdict = match (violated, exact) {
        (true, _) => JumbleVerdict::Violated,
        (false, true) => JumbleVerdict::Jumbled,
        (false, false) => JumbleVerdict::NoViolationFound,
    };
    let mut members = members;
    members.sort_unstable();
    JumbleReport {
        verdict,
        exact,
        worst: (!members.is_empty()).then(|| VertexSet::from_sorted_unchecked(n, members)),
        worst_excess,
    }
}
