use serde::Serialize;

use super::params::{EngineParams, Mode};
use crate::graph::{Graph, VertexSet};

/// `V = D ∪ T_1 ∪ … ∪ T_q ∪ U`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub d: VertexSet,
    pub branch_sets: Vec<VertexSet>,
    pub u: VertexSet,
    /// Adjacent branch-set pairs `(i, j)`, `i < j`; filled in intermediate mode.
    pub pair_edges: Vec<(usize, usize)>,
}

impl Partition {
    /// `D = ∅`, `q = 0`, `U = V`.
    pub fn initial(n: usize) -> Self {
        Partition { d: VertexSet::empty(n), branch_sets: Vec::new(), u: VertexSet::full(n), pair_edges: Vec::new() }
    }

    pub fn q(&self) -> usize {
        self.branch_sets.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    /// The parts must cover `V` exactly once.
    Cover,
    /// Branch-set size, connectivity and neighbourhood.
    A,
    /// Disjointness and pairwise adjacency.
    B,
    /// `|D| <= 2n/3`.
    C,
    /// The bound on `e(D, U)`.
    D,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionViolation {
    pub constraint: Constraint,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub violations: Vec<PartitionViolation>,
}

impl PartitionReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, c: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == c)
    }
}

const SLACK: f64 = 1e-9;

/// The `e(D, U)` bound for the mode, or `None` when it holds.
pub(crate) fn d_bound_violation(params: &EngineParams, d_size: usize, e_du: usize) -> Option<String> {
    if d_size == 0 {
        return (e_du > 0).then(|| format!("e(D, U) = {e_du} with D empty"));
    }
    let (ds, e, df) = (d_size as f64, e_du as f64, params.d as f64);
    let (limit, strict, what) = match params.mode {
        Mode::ConstantDegree => (params.eps * ds * df, true, "eps |D| d"),
        _ if ds <= params.eps * params.n as f64 => ((0.5 + 3.0 * params.zeta) * ds * df, false, "|D|(1/2 + 3 zeta)d"),
        _ => (3.0 * params.zeta * ds * df, false, "3 zeta |D| d"),
    };
    let ok = if strict { e < limit - SLACK } else { e <= limit + SLACK };
    (!ok).then(|| format!("e(D, U) = {e_du} exceeds {what} = {limit:.3} at |D| = {d_size}"))
}

pub(crate) fn c_bound_violation(n: usize, d_size: usize) -> Option<String> {
    (3 * d_size > 2 * n).then(|| format!("|D| = {d_size} exceeds 2n/3 = {:.1}", 2.0 * n as f64 / 3.0))
}

/// Checks every constraint that applies to `params.mode`, listing all violations.
pub fn verify_partition(g: &Graph, p: &Partition, params: &EngineParams) -> PartitionReport {
    let n = g.n();
    let mut out = Vec::new();
    let mut push = |constraint, detail: String| out.push(PartitionViolation { constraint, detail });

    let parts = std::iter::once(&p.d).chain(&p.branch_sets).chain(std::iter::once(&p.u));
    if parts.clone().any(|s| s.universe() != n) {
        push(Constraint::Cover, format!("a part is not a subset of a {n}-vertex universe"));
        return PartitionReport { violations: out };
    }

    // (b) disjointness first, so overlapping branch sets are reported as such
    let mut owner = vec![usize::MAX; n];
    for (i, t) in p.branch_sets.iter().enumerate() {
        for v in t.iter() {
            if owner[v] != usize::MAX {
                push(Constraint::B, format!("branch sets {} and {i} share vertex {v}", owner[v]));
            } else {
                owner[v] = i;
            }
        }
    }
    let mut count = vec![0u8; n];
    for s in parts {
        for v in s.iter() {
            count[v] = count[v].saturating_add(1);
        }
    }
    if let Some(v) = count.iter().position(|&c| c != 1) {
        push(Constraint::Cover, format!("vertex {v} lies in {} parts", count[v]));
    }

    for (i, t) in p.branch_sets.iter().enumerate() {
        if t.len() as f64 > params.branch_cap() + SLACK {
            push(Constraint::A, format!("|T_{i}| = {} exceeds (1 + zeta)t = {:.2}", t.len(), params.branch_cap()));
        }
        if t.is_empty() || !g.is_connected_set(t) {
            push(Constraint::A, format!("T_{i} is not connected"));
        }
        if params.mode != Mode::ConstantDegree {
            let nb = g.external_neighborhood(t).expect("universe checked").len();
            if (nb as f64) < params.neighbourhood_floor() - SLACK {
                push(
                    Constraint::A,
                    format!("|N(T_{i})| = {nb} below t(1/2 + 2 zeta)d = {:.2}", params.neighbourhood_floor()),
                );
            }
        }
    }

    let q = p.branch_sets.len();
    let mut pairs = 0;
    let mut missing = None;
    for i in 0..q {
        for j in i + 1..q {
            if p.branch_sets[i].iter().any(|v| g.neighbors(v).iter().any(|&w| p.branch_sets[j].contains(w))) {
                pairs += 1;
            } else if missing.is_none() {
                missing = Some((i, j));
            }
        }
    }
    match params.mode {
        Mode::Intermediate => {
            let required = params.required_pairs(q);
            if pairs < required {
                push(Constraint::B, format!("{pairs} adjacent pairs, {required} required"));
            }
        }
        _ => {
            if let Some((i, j)) = missing {
                push(Constraint::B, format!("no edge between T_{i} and T_{j}"));
            }
        }
    }

    if let Some(msg) = c_bound_violation(n, p.d.len()) {
        push(Constraint::C, msg);
    }
    let e_du = p.d.iter().map(|v| g.neighbors(v).iter().filter(|&&w| p.u.contains(w)).count()).sum();
    if let Some(msg) = d_bound_violation(params, p.d.len(), e_du) {
        push(Constraint::D, msg);
    }
    PartitionReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{named_fixture, Family};
    use crate::graph::fixtures::set;

    fn petersen_params(mode: Mode) -> EngineParams {
        let eps = 0.45;
        EngineParams {
            mode,
            n: 10,
            d: 3,
            eps,
            zeta: eps / 8.0,
            k: 1.0,
            c: 3.0,
            t: 1,
            r: 2,
            s: 1.0,
            cover_eps: 0.1,
            ell: 1.0,
            walk_steps: 1,
            retries: 1,
            calibrated: true,
        }
    }

    #[test]
    fn initial_partition_is_valid() {
        let g = named_fixture(Family::Petersen, &[]).unwrap();
        for mode in [Mode::Sparse, Mode::ConstantDegree, Mode::Intermediate] {
            assert!(verify_partition(&g, &Partition::initial(10), &petersen_params(mode)).is_valid());
        }
    }

    #[test]
    fn everything_in_d() {
        let g = named_fixture(Family::Petersen, &[]).unwrap();
        let p = Partition { d: VertexSet::full(10), branch_sets: vec![], u: VertexSet::empty(10), pair_edges: vec![] };
        let r = verify_partition(&g, &p, &petersen_params(Mode::ConstantDegree));
        assert!(r.violates(Constraint::C));
    }

    #[test]
    fn shared_vertex() {
        let g = named_fixture(Family::Petersen, &[]).unwrap();
        let p = Partition {
            d: VertexSet::empty(10),
            branch_sets: vec![set(10, &[0]), set(10, &[0])],
            u: set(10, &[1, 2, 3, 4, 5, 6, 7, 8, 9]),
            pair_edges: vec![],
        };
        let r = verify_partition(&g, &p, &petersen_params(Mode::Sparse));
        assert!(r.violates(Constraint::B));
    }

    #[test]
    fn d_bounds_by_mode() {
        let p = petersen_params(Mode::ConstantDegree);
        // eps |D| d = 0.45 * 1 * 3 = 1.35
        assert!(d_bound_violation(&p, 1, 1).is_none());
        assert!(d_bound_violation(&p, 1, 2).is_some());
        let p = petersen_params(Mode::Sparse);
        // |D| = 1 <= eps n = 4.5: limit (1/2 + 3 * 0.05625) * 3 = 2.006
        assert!(d_bound_violation(&p, 1, 2).is_none());
        assert!(d_bound_violation(&p, 1, 3).is_some());
        // |D| = 5 > eps n: limit 3 * 0.05625 * 5 * 3 = 2.53
        assert!(d_bound_violation(&p, 5, 3).is_some());
        assert!(d_bound_violation(&p, 0, 0).is_none());
    }
}
