use std::collections::BTreeSet;
use std::time::Instant;

use serde::Serialize;

use super::grow::{grow_connected_expander, Growth};
use super::params::{EngineParams, Mode, PAIR_FRACTION};
use super::partition::{c_bound_violation, d_bound_violation, verify_partition, Partition};
use super::witness::{verify_witness, MinorWitness, WitnessKind};
use super::EngineError;
use crate::graph::{Graph, Vertex, VertexSet};
use crate::rng::RngStream;
use crate::spectral::lanczos::LanczosConfig;
use crate::spectral::{lambda_normalized_estimate, sweep_from_vector};
use crate::walks::{cover, CoverPlan, CoveringError};

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Defaults to `2n`.
    pub max_iterations: Option<usize>,
    /// Run the full partition checker after every iteration.
    pub verify_each_iteration: bool,
    pub deadline: Option<Instant>,
    /// Tolerance on the `lambda(G[U]) <= zeta^2/2` comparison; ties go to the sweep.
    pub lambda_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_iterations: None, verify_each_iteration: false, deadline: None, lambda_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    Failure,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Event {
    /// A branch set lost too much of its neighbourhood in `U` and moved to `D`.
    #[serde(rename = "t-recycled")]
    TRecycled {
        index: usize,
        size: usize,
        measure: f64,
    },
    VertexMoved {
        vertex: Vertex,
        degree_in_u: usize,
    },
    /// All components of `G[U]` but the largest moved to `D`.
    ComponentsMoved {
        components: usize,
        vertices: usize,
    },
    SweepMoved {
        size: usize,
        cut: usize,
        lambda: f64,
    },
    CoveringBuilt {
        size: usize,
        attempts: usize,
        lambda: f64,
    },
    ExpanderGrown {
        size: usize,
    },
    /// Obstruction from the growth step moved to `D`.
    #[serde(rename = "s-moved")]
    SMoved {
        size: usize,
        cut: usize,
    },
    BranchSetAdded {
        index: usize,
        size: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub outcome: Outcome,
    pub reason: Option<String>,
    /// The final branch sets, verified; present whenever `q >= 1`.
    pub witness: Option<MinorWitness>,
    pub achieved_order: usize,
    pub target_order: usize,
    pub iterations: usize,
    pub history: Vec<HistoryEntry>,
    pub partition: Partition,
    pub params: EngineParams,
}

const U_LABEL: u32 = 0;
const D_LABEL: u32 = 1;

struct State<'a> {
    g: &'a Graph,
    p: &'a EngineParams,
    label: Vec<u32>,
    in_u: Vec<usize>,
    branch: Vec<Vec<Vertex>>,
    nbhd: Vec<Vec<Vertex>>,
    pairs: Vec<(usize, usize)>,
    d_size: usize,
    u_size: usize,
    e_du: usize,
    low: BTreeSet<Vertex>,
    u_version: u64,
    lambda_cache: Option<(u64, f64)>,
}

impl<'a> State<'a> {
    fn new(g: &'a Graph, p: &'a EngineParams) -> Self {
        let n = g.n();
        let in_u = g.degrees();
        let mut s = State {
            g,
            p,
            label: vec![U_LABEL; n],
            in_u,
            branch: Vec::new(),
            nbhd: Vec::new(),
            pairs: Vec::new(),
            d_size: 0,
            u_size: n,
            e_du: 0,
            low: BTreeSet::new(),
            u_version: 0,
            lambda_cache: None,
        };
        s.low = (0..n).filter(|&v| s.is_low(v)).collect();
        s
    }

    fn is_low(&self, v: Vertex) -> bool {
        (self.in_u[v] as f64) < self.p.zeta * self.p.d as f64
    }

    fn d_neighbours(&self, v: Vertex) -> usize {
        self.g.neighbors(v).iter().filter(|&&w| self.label[w] == D_LABEL).count()
    }

    fn leave_u(&mut self, v: Vertex) {
        self.u_size -= 1;
        self.u_version += 1;
        for &w in self.g.neighbors(v) {
            self.in_u[w] -= 1;
            if self.label[w] == U_LABEL && self.is_low(w) {
                self.low.insert(w);
            }
        }
    }

    /// Moves `v` from `U` or a branch set into `D`.
    fn to_d(&mut self, v: Vertex) {
        let from_u = self.label[v] == U_LABEL;
        if from_u {
            self.e_du -= self.d_neighbours(v);
            self.leave_u(v);
        }
        self.label[v] = D_LABEL;
        self.d_size += 1;
        self.e_du += self.in_u[v];
    }

    fn u_to_branch(&mut self, v: Vertex, index: usize) {
        self.e_du -= self.d_neighbours(v);
        self.leave_u(v);
        self.label[v] = 2 + index as u32;
    }

    fn q(&self) -> usize {
        self.branch.len()
    }

    fn u_set(&self) -> VertexSet {
        let mask: Vec<bool> = self.label.iter().map(|&l| l == U_LABEL).collect();
        VertexSet::from_mask(&mask)
    }

    fn snapshot(&self) -> Partition {
        let n = self.g.n();
        let mask = |want: u32| -> VertexSet {
            let m: Vec<bool> = self.label.iter().map(|&l| l == want).collect();
            VertexSet::from_mask(&m)
        };
        Partition {
            d: mask(D_LABEL),
            branch_sets: self
                .branch
                .iter()
                .map(|b| VertexSet::new(n, b.iter().copied()).expect("ids below n"))
                .collect(),
            u: mask(U_LABEL),
            pair_edges: self.pairs.clone(),
        }
    }

    /// Measure compared against the recycling threshold, and whether it fails.
    fn recycle_measure(&self, i: usize) -> (f64, bool) {
        match self.p.mode {
            Mode::ConstantDegree => {
                let e: usize = self.branch[i].iter().map(|&v| self.in_u[v]).sum();
                let e = e as f64;
                (e, e <= self.p.eps * self.p.t as f64 * self.p.d as f64)
            }
            _ => {
                let c = self.nbhd[i].iter().filter(|&&w| self.label[w] == U_LABEL).count() as f64;
                (c, c < self.p.neighbourhood_floor())
            }
        }
    }

    fn recycle(&mut self, i: usize) {
        let members = self.branch.remove(i);
        self.nbhd.remove(i);
        for v in members {
            self.to_d(v);
        }
        for (j, b) in self.branch.iter().enumerate().skip(i) {
            for &v in b {
                self.label[v] = 2 + j as u32;
            }
        }
        self.pairs.retain(|&(a, b)| a != i && b != i);
        for pair in &mut self.pairs {
            if pair.0 > i {
                pair.0 -= 1;
            }
            if pair.1 > i {
                pair.1 -= 1;
            }
        }
    }

    fn add_branch(&mut self, members: Vec<Vertex>) -> usize {
        let index = self.q();
        for &v in &members {
            self.u_to_branch(v, index);
        }
        let set = VertexSet::new(self.g.n(), members.iter().copied()).expect("ids below n");
        let nbhd = self.g.external_neighborhood(&set).expect("same universe");
        if self.p.mode == Mode::Intermediate {
            let mut adjacent = vec![false; index];
            for &v in &members {
                for &w in self.g.neighbors(v) {
                    let l = self.label[w];
                    if l >= 2 && (l - 2) as usize != index {
                        adjacent[(l - 2) as usize] = true;
                    }
                }
            }
            self.pairs.extend((0..index).filter(|&j| adjacent[j]).map(|j| (j, index)));
        }
        self.branch.push(members);
        self.nbhd.push(nbhd.iter().collect());
        index
    }

    /// Cheap constraint checks after each action.
    fn post_check(&self) -> Option<String> {
        let n = self.g.n();
        if let Some(m) = c_bound_violation(n, self.d_size) {
            return Some(format!("constraint (c) broken: {m}"));
        }
        if let Some(m) = d_bound_violation(self.p, self.d_size, self.e_du) {
            return Some(format!("constraint (d) broken: {m}"));
        }
        if self.p.mode == Mode::Intermediate && self.pairs.len() < self.p.required_pairs(self.q()) {
            return Some(format!(
                "constraint (b) broken: {} adjacent pairs, {} required",
                self.pairs.len(),
                self.p.required_pairs(self.q())
            ));
        }
        if 2 * self.u_size < n {
            return Some(format!("|U| = {} fell below n/2", self.u_size));
        }
        None
    }

    fn witness(&self) -> MinorWitness {
        let kind = match self.p.mode {
            Mode::Intermediate => WitnessKind::PairFraction { threshold: PAIR_FRACTION },
            _ => WitnessKind::Complete,
        };
        MinorWitness { kind, branch_sets: self.branch.clone() }
    }
}

/// One action of the loop: what happened, or why the run stops.
enum Step {
    Done(Event, Vec<Event>),
    Fail(Vec<Event>, String),
}

/// Runs the partition-refinement loop until `q = r` or a failure condition.
/// The rule order is: recycle a branch set, move a vertex with few neighbours
/// in `U`, drop stray components of `G[U]`, move a sweep set when
/// `lambda(G[U])` is small, and otherwise build a covering set and grow it.
pub fn find_minor(
    g: &Graph,
    params: &EngineParams,
    rng: &RngStream,
    opts: RunOptions,
) -> Result<RunReport, EngineError> {
    let n = g.n();
    if params.n != n {
        return Err(EngineError::Invalid(format!("parameters are for n = {}, graph has {n} vertices", params.n)));
    }
    if g.max_degree() > params.d {
        return Err(EngineError::Invalid(format!(
            "maximum degree {} exceeds the degree bound {}",
            g.max_degree(),
            params.d
        )));
    }
    if !g.is_connected() {
        return Err(EngineError::Disconnected);
    }
    let max_iter = opts.max_iterations.unwrap_or(2 * n);
    let mut st = State::new(g, params);
    let mut history = Vec::new();
    let mut iterations = 0;
    let (outcome, mut reason) = loop {
        if st.q() >= params.r {
            break (Outcome::Success, None);
        }
        if iterations >= max_iter {
            break (Outcome::Failure, Some(format!("iteration limit {max_iter} reached")));
        }
        if opts.deadline.is_some_and(|d| Instant::now() >= d) {
            break (Outcome::Timeout, Some("time budget exhausted".to_string()));
        }
        iterations += 1;
        let step = iterate(&mut st, rng.fork(iterations as u64), &opts);
        let push = |history: &mut Vec<HistoryEntry>, events: Vec<Event>| {
            history.extend(events.into_iter().map(|event| HistoryEntry { iteration: iterations, event }));
        };
        match step {
            Step::Done(first, rest) => {
                push(&mut history, std::iter::once(first).chain(rest).collect());
                if let Some(m) = st.post_check() {
                    break (Outcome::Failure, Some(m));
                }
                if opts.verify_each_iteration {
                    let report = verify_partition(g, &st.snapshot(), params);
                    if let Some(v) = report.violations.first() {
                        break (
                            Outcome::Failure,
                            Some(format!("partition check failed: {:?}: {}", v.constraint, v.detail)),
                        );
                    }
                }
            }
            Step::Fail(events, m) => {
                push(&mut history, events);
                break (Outcome::Failure, Some(m));
            }
        }
    };

    let mut witness = (st.q() >= 1).then(|| st.witness());
    let mut outcome = outcome;
    if let Some(v) = witness.as_ref().and_then(|w| verify_witness(g, w).violation) {
        outcome = Outcome::Failure;
        reason = Some(format!("emitted witness failed verification: {v}"));
        witness = None;
    }
    Ok(RunReport {
        outcome,
        reason,
        witness,
        achieved_order: st.q(),
        target_order: params.r,
        iterations,
        history,
        partition: st.snapshot(),
        params: params.clone(),
    })
}

fn iterate(st: &mut State, rng: RngStream, opts: &RunOptions) -> Step {
    let p = st.p;
    let g = st.g;

    for i in 0..st.q() {
        let (measure, fails) = st.recycle_measure(i);
        if fails {
            let size = st.branch[i].len();
            st.recycle(i);
            return Step::Done(Event::TRecycled { index: i, size, measure }, vec![]);
        }
    }

    while let Some(v) = st.low.pop_first() {
        if st.label[v] == U_LABEL && st.is_low(v) {
            let degree_in_u = st.in_u[v];
            st.to_d(v);
            return Step::Done(Event::VertexMoved { vertex: v, degree_in_u }, vec![]);
        }
    }

    if 2 * st.u_size < g.n() || st.u_size < 2 {
        return Step::Fail(vec![], format!("|U| = {} fell below n/2", st.u_size));
    }
    let u = st.u_set();
    let (gu, map) = g.induced_subgraph(&u).expect("U is a nonempty subset");
    let comps = gu.components();
    if comps.len() > 1 {
        let keep =
            (0..comps.len()).max_by_key(|&i| (comps[i].len(), std::cmp::Reverse(comps[i][0]))).expect("nonempty");
        let mut moved = 0;
        for (i, c) in comps.iter().enumerate() {
            if i != keep {
                for &v in c {
                    st.to_d(map[v]);
                    moved += 1;
                }
            }
        }
        return Step::Done(Event::ComponentsMoved { components: comps.len() - 1, vertices: moved }, vec![]);
    }

    // spectral test on G[U]
    let zeta = p.zeta;
    let df = p.d as f64;
    let cfg = LanczosConfig { tol: 1e-8, max_matvecs: 20_000, ..LanczosConfig::default() };
    let (lambda, vector) = match st.lambda_cache {
        Some((version, value)) if version == st.u_version && value > zeta * zeta / 2.0 + opts.lambda_tol => {
            (value, Vec::new())
        }
        _ => match lambda_normalized_estimate(&gu, cfg) {
            Ok(est) => {
                st.lambda_cache = Some((st.u_version, est.value));
                (est.value, est.vector)
            }
            Err(e) => return Step::Fail(vec![], format!("spectral step on G[U] failed: {e}")),
        },
    };
    if lambda <= zeta * zeta / 2.0 + opts.lambda_tol {
        let sweep = sweep_from_vector(&gu, &vector);
        let side = if 2 * sweep.set.len() <= gu.n() { sweep.set } else { sweep.set.complement() };
        let cut = sweep.cut;
        if cut as f64 > side.len() as f64 * zeta * df {
            return Step::Fail(
                vec![],
                format!("sweep set of size {} has cut {cut} above |S'| zeta d at lambda {lambda:.3e}", side.len()),
            );
        }
        let size = side.len();
        for v in side.iter() {
            st.to_d(map[v]);
        }
        return Step::Done(Event::SweepMoved { size, cut, lambda }, vec![]);
    }

    // covering set in G[U]
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in map.iter().enumerate() {
        local[v] = i;
    }
    let targets: Vec<VertexSet> = st
        .nbhd
        .iter()
        .map(|nb| {
            VertexSet::new(gu.n(), nb.iter().filter(|&&w| local[w] != usize::MAX).map(|&w| local[w]))
                .expect("local ids")
        })
        .collect();
    if let Some(i) = targets.iter().position(|t| t.is_empty()) {
        return Step::Fail(vec![], format!("T_{i} has no neighbour in U"));
    }
    let q = st.q();
    let required_hits = match p.mode {
        Mode::Intermediate => (PAIR_FRACTION * q as f64).ceil() as usize,
        _ => q,
    };
    let constd = p.mode == Mode::ConstantDegree;
    let plan = CoverPlan {
        steps: p.walk_steps,
        quota: constd.then_some(p.t),
        max_size: p.cover_cap(),
        required_hits,
        prune_to: if constd { p.t } else { 1 },
        retries: p.retries,
    };
    let covering = match cover(&gu, &targets, &plan, &rng) {
        Ok(c) => c,
        Err(CoveringError::SizeBound { attempts, bound, best }) => {
            return Step::Fail(
                vec![],
                format!("covering step: {attempts} attempts all exceeded {bound:.2} vertices (best {})", best.len()),
            )
        }
        Err(e) => return Step::Fail(vec![], format!("covering step failed: {e}")),
    };
    let built = Event::CoveringBuilt { size: covering.set.len(), attempts: covering.attempts, lambda };

    let mut members: Vec<Vertex> = covering.set.iter().map(|v| map[v]).collect();
    let mut events = Vec::new();
    if !constd {
        if p.t > gu.n() {
            return Step::Fail(vec![built], format!("growth size t = {} exceeds |U| = {}", p.t, gu.n()));
        }
        let start = covering.set.first().expect("covering sets are nonempty");
        let threshold = (0.5 + 3.0 * zeta) * df;
        match grow_connected_expander(&gu, start, p.t, threshold) {
            Ok(Growth::Grown(x)) => {
                events.push(Event::ExpanderGrown { size: x.len() });
                let union = covering.set.union(&x);
                members = union.iter().map(|v| map[v]).collect();
                let global = VertexSet::new(g.n(), members.iter().copied()).expect("ids below n");
                let nb = g.external_neighborhood(&global).expect("same universe").len();
                if (nb as f64) < p.neighbourhood_floor() {
                    return Step::Fail(
                        vec![built, events.remove(0)],
                        format!(
                            "new branch set has |N| = {nb} below t(1/2 + 2 zeta)d = {:.2}",
                            p.neighbourhood_floor()
                        ),
                    );
                }
            }
            Ok(Growth::Obstruction(s)) => {
                let cut = gu.edge_cut(&s).expect("same universe");
                let size = s.len();
                for v in s.iter() {
                    st.to_d(map[v]);
                }
                return Step::Done(built, vec![Event::SMoved { size, cut }]);
            }
            Err(e) => return Step::Fail(vec![built], format!("growth step failed: {e}")),
        }
    }
    if members.len() as f64 > p.branch_cap() + 1e-9 {
        return Step::Fail(
            std::iter::once(built).chain(events).collect(),
            format!("new branch set has {} vertices, above (1 + zeta)t = {:.2}", members.len(), p.branch_cap()),
        );
    }
    let size = members.len();
    let index = st.add_branch(members);
    events.push(Event::BranchSetAdded { index, size });
    Step::Done(built, events)
}
