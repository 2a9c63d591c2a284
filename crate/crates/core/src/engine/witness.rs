use std::fmt;

use serde::{Deserialize, Serialize};

use super::params::required_pairs;
use super::EngineError;
use crate::graph::{Graph, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessKind {
    Complete,
    /// At least `floor(threshold q^2 / 2)` adjacent pairs among `q` sets.
    PairFraction {
        threshold: f64,
    },
}

/// Branch sets of a minor. Ids are kept raw so that malformed input can be
/// reported rather than rejected at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorWitness {
    pub kind: WitnessKind,
    pub branch_sets: Vec<Vec<Vertex>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessJson {
    kind: String,
    order: usize,
    branch_sets: Vec<Vec<Vertex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
}

impl Serialize for MinorWitness {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (kind, threshold) = match self.kind {
            WitnessKind::Complete => ("complete", None),
            WitnessKind::PairFraction { threshold } => ("pair-fraction", Some(threshold)),
        };
        WitnessJson { kind: kind.into(), order: self.order(), branch_sets: self.branch_sets.clone(), threshold }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MinorWitness {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = WitnessJson::deserialize(d)?;
        let kind = match (raw.kind.as_str(), raw.threshold) {
            ("complete", None) => WitnessKind::Complete,
            ("pair-fraction", Some(threshold)) => WitnessKind::PairFraction { threshold },
            ("pair-fraction", None) => return Err(D::Error::custom("pair-fraction witness needs a threshold")),
            ("complete", Some(_)) => return Err(D::Error::custom("complete witness takes no threshold")),
            (other, _) => return Err(D::Error::custom(format!("unknown witness kind {other:?}"))),
        };
        if raw.order != raw.branch_sets.len() {
            return Err(D::Error::custom(format!(
                "order {} does not match {} branch sets",
                raw.order,
                raw.branch_sets.len()
            )));
        }
        Ok(MinorWitness { kind, branch_sets: raw.branch_sets })
    }
}

impl MinorWitness {
    pub fn complete(branch_sets: Vec<Vec<Vertex>>) -> Self {
        MinorWitness { kind: WitnessKind::Complete, branch_sets }
    }

    pub fn order(&self) -> usize {
        self.branch_sets.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("witness serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum WitnessViolation {
    EmptySet { set: usize },
    OutOfRange { set: usize, vertex: Vertex },
    Duplicate { set: usize, vertex: Vertex },
    Overlap { a: usize, b: usize, vertex: Vertex },
    Disconnected { set: usize },
    NotAdjacent { a: usize, b: usize },
    TooFewPairs { found: usize, required: usize },
    BadThreshold { threshold: f64 },
}

impl fmt::Display for WitnessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessViolation::EmptySet { set } => write!(f, "branch set {set} is empty"),
            WitnessViolation::OutOfRange { set, vertex } => {
                write!(f, "branch set {set} names vertex {vertex} outside the graph")
            }
            WitnessViolation::Duplicate { set, vertex } => write!(f, "branch set {set} lists vertex {vertex} twice"),
            WitnessViolation::Overlap { a, b, vertex } => {
                write!(f, "disjointness: branch sets {a} and {b} share vertex {vertex}")
            }
            WitnessViolation::Disconnected { set } => write!(f, "branch set {set} is not connected"),
            WitnessViolation::NotAdjacent { a, b } => write!(f, "no edge between branch sets {a} and {b}"),
            WitnessViolation::TooFewPairs { found, required } => {
                write!(f, "{found} adjacent pairs, at least {required} required")
            }
            WitnessViolation::BadThreshold { threshold } => write!(f, "threshold {threshold} outside [0, 1]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub valid: bool,
    pub order: usize,
    pub adjacent_pairs: Option<usize>,
    pub violation: Option<WitnessViolation>,
}

/// Checks nonemptiness, range, disjointness, connectivity and the adjacency
/// requirement of the witness kind, stopping at the first violation.
pub fn verify_witness(g: &Graph, w: &MinorWitness) -> WitnessReport {
    let order = w.order();
    let fail = |v| WitnessReport { valid: false, order, adjacent_pairs: None, violation: Some(v) };
    let n = g.n();
    let mut owner = vec![usize::MAX; n];
    for (i, set) in w.branch_sets.iter().enumerate() {
        if set.is_empty() {
            return fail(WitnessViolation::EmptySet { set: i });
        }
        for &v in set {
            if v >= n {
                return fail(WitnessViolation::OutOfRange { set: i, vertex: v });
            }
            match owner[v] {
                usize::MAX => owner[v] = i,
                j if j == i => return fail(WitnessViolation::Duplicate { set: i, vertex: v }),
                j => return fail(WitnessViolation::Overlap { a: j, b: i, vertex: v }),
            }
        }
    }
    // connectivity of each set by BFS inside it
    let mut seen = vec![false; n];
    for (i, set) in w.branch_sets.iter().enumerate() {
        let mut stack = vec![set[0]];
        seen[set[0]] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &u in g.neighbors(v) {
                if owner[u] == i && !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    stack.push(u);
                }
            }
        }
        if reached != set.len() {
            return fail(WitnessViolation::Disconnected { set: i });
        }
    }
    let mut adjacent = vec![false; order * order];
    for (i, set) in w.branch_sets.iter().enumerate() {
        for &v in set {
            for &u in g.neighbors(v) {
                let j = owner[u];
                if j != usize::MAX && j != i {
                    adjacent[i * order + j] = true;
                }
            }
        }
    }
    let mut pairs = 0;
    let mut first_missing = None;
    for a in 0..order {
        for b in a + 1..order {
            if adjacent[a * order + b] {
                pairs += 1;
            } else if first_missing.is_none() {
                first_missing = Some((a, b));
            }
        }
    }
    let violation = match w.kind {
        WitnessKind::Complete => first_missing.map(|(a, b)| WitnessViolation::NotAdjacent { a, b }),
        WitnessKind::PairFraction { threshold } if !(0.0..=1.0).contains(&threshold) => {
            Some(WitnessViolation::BadThreshold { threshold })
        }
        WitnessKind::PairFraction { threshold } => {
            let required = required_pairs(threshold, order);
            (pairs < required).then_some(WitnessViolation::TooFewPairs { found: pairs, required })
        }
    };
    WitnessReport { valid: violation.is_none(), order, adjacent_pairs: Some(pairs), violation }
}

/// Largest `n` accepted by [`brute_force_ccl`].
pub const CCL_LIMIT: usize = 10;

/// Exact contraction clique number by exhaustive search over assignments of
/// vertices to branch sets (or to none).
pub fn brute_force_ccl(g: &Graph) -> Result<usize, EngineError> {
    let n = g.n();
    if n > CCL_LIMIT {
        return Err(EngineError::TooLarge { n, limit: CCL_LIMIT });
    }
    let adj: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u)).collect();
    let mut search = Ccl { n, adj, blocks: Vec::new(), best: 0 };
    search.go(0);
    Ok(search.best)
}

struct Ccl {
    n: usize,
    adj: Vec<u32>,
    blocks: Vec<u32>,
    best: usize,
}

impl Ccl {
    fn connected(&self, mask: u32) -> bool {
        let start = mask & mask.wrapping_neg();
        let mut reach = start;
        loop {
            let mut next = reach;
            let mut rest = reach;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                next |= self.adj[v] & mask;
            }
            if next == reach {
                return reach == mask;
            }
            reach = next;
        }
    }

    fn neighborhood(&self, mask: u32) -> u32 {
        let mut out = 0;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out |= self.adj[v];
        }
        out & !mask
    }

    fn is_clique_minor(&self) -> bool {
        if !self.blocks.iter().all(|&b| self.connected(b)) {
            return false;
        }
        let nbhd: Vec<u32> = self.blocks.iter().map(|&b| self.neighborhood(b)).collect();
        (0..self.blocks.len()).all(|i| (i + 1..self.blocks.len()).all(|j| nbhd[i] & self.blocks[j] != 0))
    }

    fn go(&mut self, v: usize) {
        // even if every remaining vertex opened its own block, no improvement
        if self.blocks.len() + (self.n - v) <= self.best {
            return;
        }
        if v == self.n {
            if self.is_clique_minor() {
                self.best = self.blocks.len();
            }
            return;
        }
        for i in 0..self.blocks.len() {
            self.blocks[i] |= 1 << v;
            self.go(v + 1);
            self.blocks[i] &= !(1 << v);
        }
        self.blocks.push(1 << v);
        self.go(v + 1);
        self.blocks.pop();
        self.go(v + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{named_fixture, Family};
    use crate::graph::fixtures::{complete, cycle};

    #[test]
    fn valid_witnesses() {
        let w = MinorWitness::complete(vec![vec![0], vec![1], vec![2], vec![3]]);
        let r = verify_witness(&complete(4), &w);
        assert!(r.valid);
        assert_eq!(r.order, 4);
        let w = MinorWitness::complete(vec![vec![0, 1], vec![2, 3]]);
        assert!(verify_witness(&cycle(4), &w).valid);
    }

    #[test]
    fn violations_are_reported() {
        let g = cycle(6);
        let check = |sets: Vec<Vec<usize>>| verify_witness(&g, &MinorWitness::complete(sets)).violation.unwrap();
        assert_eq!(check(vec![vec![0, 1], vec![1, 2]]), WitnessViolation::Overlap { a: 0, b: 1, vertex: 1 });
        assert_eq!(check(vec![vec![0], vec![]]), WitnessViolation::EmptySet { set: 1 });
        assert_eq!(check(vec![vec![0, 9]]), WitnessViolation::OutOfRange { set: 0, vertex: 9 });
        assert_eq!(check(vec![vec![0, 2]]), WitnessViolation::Disconnected { set: 0 });
        assert_eq!(check(vec![vec![0], vec![3]]), WitnessViolation::NotAdjacent { a: 0, b: 1 });
        assert_eq!(check(vec![vec![0, 0]]), WitnessViolation::Duplicate { set: 0, vertex: 0 });
        let msg = WitnessViolation::Overlap { a: 0, b: 1, vertex: 1 }.to_string();
        assert!(msg.contains("disjointness") && msg.contains('0') && msg.contains('1'));
    }

    #[test]
    fn pair_fraction_counting() {
        let g = cycle(6);
        let sets: Vec<Vec<usize>> = (0..6).map(|v| vec![v]).collect();
        let w = MinorWitness { kind: WitnessKind::PairFraction { threshold: 0.1 }, branch_sets: sets.clone() };
        let r = verify_witness(&g, &w);
        assert!(r.valid);
        assert_eq!(r.adjacent_pairs, Some(6));
        let w = MinorWitness { kind: WitnessKind::PairFraction { threshold: 0.5 }, branch_sets: sets };
        assert_eq!(verify_witness(&g, &w).violation, Some(WitnessViolation::TooFewPairs { found: 6, required: 9 }));
    }

    #[test]
    fn json_round_trip() {
        let w = MinorWitness::complete(vec![vec![0, 1], vec![2]]);
        let text = w.to_json();
        assert_eq!(text, r#"{"kind":"complete","order":2,"branch_sets":[[0,1],[2]]}"#);
        assert_eq!(MinorWitness::from_json(&text).unwrap(), w);
        let pf = MinorWitness { kind: WitnessKind::PairFraction { threshold: 0.1 }, branch_sets: vec![vec![3]] };
        assert_eq!(MinorWitness::from_json(&pf.to_json()).unwrap(), pf);
        assert!(MinorWitness::from_json(r#"{"kind":"complete","order":3,"branch_sets":[[0]]}"#).is_err());
        assert!(MinorWitness::from_json(r#"{"kind":"star","order":1,"branch_sets":[[0]]}"#).is_err());
    }

    #[test]
    fn exact_ccl() {
        assert_eq!(brute_force_ccl(&complete(5)).unwrap(), 5);
        assert_eq!(brute_force_ccl(&cycle(6)).unwrap(), 3);
        assert_eq!(brute_force_ccl(&named_fixture(Family::CompleteBipartite, &[3, 5]).unwrap()).unwrap(), 4);
        assert_eq!(brute_force_ccl(&named_fixture(Family::Petersen, &[]).unwrap()).unwrap(), 5);
        assert_eq!(brute_force_ccl(&named_fixture(Family::TwoTriangles, &[]).unwrap()).unwrap(), 3);
        assert!(brute_force_ccl(&complete(11)).is_err());
    }
}
