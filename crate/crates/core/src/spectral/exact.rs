//! Exhaustive expansion metrics for small graphs.

use num_rational::Ratio;

use super::{SpectralError, EXHAUSTIVE_LIMIT};
use crate::graph::{Graph, VertexSet};

/// Exact rational value of a cut measure.
pub type Exact = Ratio<u64>;

pub(crate) struct Bitgraph {
    pub n: usize,
    pub adj: Vec<u32>,
    pub deg: Vec<u64>,
}

impl Bitgraph {
    pub fn new(g: &Graph, limit: usize) -> Result<Self, SpectralError> {
        let n = g.n();
        if n > limit.min(31) {
            return Err(SpectralError::TooLarge { n, limit });
        }
        let adj = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect();
        let deg = (0..n).map(|v| g.degree(v) as u64).collect();
        Ok(Bitgraph { n, adj, deg })
    }

    pub fn full(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }

    #[inline]
    pub fn cut(&self, mask: u32) -> u64 {
        let outside = !mask & self.full();
        let mut rest = mask;
        let mut total = 0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            total += (self.adj[v] & outside).count_ones() as u64;
            rest &= rest - 1;
        }
        total
    }

    #[inline]
    pub fn volume(&self, mask: u32) -> u64 {
        let mut rest = mask;
        let mut total = 0;
        while rest != 0 {
            total += self.deg[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        total
    }

    pub fn to_set(&self, mask: u32) -> VertexSet {
        VertexSet::new(self.n, (0..self.n).filter(|&v| mask >> v & 1 == 1)).expect("ids below n")
    }
}

/// Ordering used for ties: smaller set first, then lexicographically smaller
/// sorted member list.
fn set_precedes(a: u32, b: u32) -> bool {
    let (ca, cb) = (a.count_ones(), b.count_ones());
    if ca != cb {
        return ca < cb;
    }
    // Equal sizes: the lexicographically smaller sorted list is the one holding
    // the lowest vertex where the masks differ.
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}

fn minimize(
    bits: &Bitgraph,
    admissible: impl Fn(u32) -> bool,
    value: impl Fn(u32) -> Option<Exact>,
) -> Option<(Exact, u32)> {
    let mut best: Option<(Exact, u32)> = None;
    for mask in 1..=bits.full() {
        if !admissible(mask) {
            continue;
        }
        let Some(v) = value(mask) else { continue };
        let better = match &best {
            None => true,
            Some((bv, bm)) => v < *bv || (v == *bv && set_precedes(mask, *bm)),
        };
        if better {
            best = Some((v, mask));
        }
    }
    best
}

/// `h_k(G) = min e(S, V\S)/|S|` over nonempty `S` with `|S| <= k`.
/// `h(G)` is the case `k = n/2`.
pub fn cheeger_exact(g: &Graph, k: usize) -> Result<(Exact, VertexSet), SpectralError> {
    cheeger_exact_with_limit(g, k, EXHAUSTIVE_LIMIT)
}

pub fn cheeger_exact_with_limit(g: &Graph, k: usize, limit: usize) -> Result<(Exact, VertexSet), SpectralError> {
    let n = g.n();
    if k < 1 || k > n / 2 {
        return Err(SpectralError::SizeBound { k, n });
    }
    let bits = Bitgraph::new(g, limit)?;
    let (value, mask) = minimize(
        &bits,
        |mask| mask.count_ones() as usize <= k,
        |mask| Some(Exact::new(bits.cut(mask), mask.count_ones() as u64)),
    )
    .expect("k >= 1 admits a singleton");
    Ok((value, bits.to_set(mask)))
}

/// `h'(G) = min e(S, V\S) / min(vol S, vol V\S)` over proper nonempty `S`.
/// Sets whose smaller side has zero volume are skipped.
pub fn h_prime_exact(g: &Graph) -> Result<(Exact, VertexSet), SpectralError> {
    let bits = Bitgraph::new(g, EXHAUSTIVE_LIMIT)?;
    if g.m() == 0 {
        return Err(SpectralError::Edgeless);
    }
    let total = 2 * g.m() as u64;
    let full = bits.full();
    let (value, mask) = minimize(
        &bits,
        |mask| mask != full,
        |mask| {
            let vol = bits.volume(mask);
            let denom = vol.min(total - vol);
            (denom > 0).then(|| Exact::new(bits.cut(mask), denom))
        },
    )
    .ok_or(SpectralError::Edgeless)?;
    Ok((value, bits.to_set(mask)))
}

/// `Phi(G) = min e(S, V\S) / (2 vol S)` over `S` with `0 < vol S <= m`.
pub fn conductance_exact(g: &Graph) -> Result<(Exact, VertexSet), SpectralError> {
    let bits = Bitgraph::new(g, EXHAUSTIVE_LIMIT)?;
    if g.m() == 0 {
        return Err(SpectralError::Edgeless);
    }
    if !g.is_connected() {
        return Err(SpectralError::Disconnected);
    }
    let m = g.m() as u64;
    let (value, mask) = minimize(
        &bits,
        |mask| {
            let vol = bits.volume(mask);
            vol > 0 && vol <= m
        },
        |mask| Some(Exact::new(bits.cut(mask), 2 * bits.volume(mask))),
    )
    .expect("a connected graph with an edge has an admissible set");
    Ok((value, bits.to_set(mask)))
}

pub fn to_f64(x: Exact) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{named_fixture, Family};
    use crate::graph::build_graph;
    use crate::graph::fixtures::{complete, cycle, set};

    fn r(a: u64, b: u64) -> Exact {
        Exact::new(a, b)
    }

    #[test]
    fn cheeger_examples() {
        assert_eq!(cheeger_exact(&complete(4), 2).unwrap(), (r(2, 1), set(4, &[0, 1])));
        assert_eq!(cheeger_exact(&cycle(6), 3).unwrap(), (r(2, 3), set(6, &[0, 1, 2])));
        let star = named_fixture(Family::CompleteBipartite, &[1, 3]).unwrap();
        assert_eq!(cheeger_exact(&star, 1).unwrap(), (r(1, 1), set(4, &[1])));
        assert_eq!(cheeger_exact(&cycle(6), 4), Err(SpectralError::SizeBound { k: 4, n: 6 }));
        assert_eq!(cheeger_exact(&cycle(21), 1), Err(SpectralError::TooLarge { n: 21, limit: 20 }));
        assert!(cheeger_exact_with_limit(&cycle(21), 1, 22).is_ok());
    }

    #[test]
    fn h_prime_examples() {
        assert_eq!(h_prime_exact(&complete(2)).unwrap().0, r(1, 1));
        assert_eq!(h_prime_exact(&cycle(6)).unwrap().0, r(1, 3));
        assert_eq!(h_prime_exact(&build_graph(3, &[]).unwrap()), Err(SpectralError::Edgeless));
    }

    #[test]
    fn h_prime_regular_identity() {
        // For d-regular graphs vol(S) = d|S|, so h' = h/d.
        for (g, d) in [(complete(4), 3u64), (cycle(6), 2), (named_fixture(Family::Petersen, &[]).unwrap(), 3)] {
            let (h, _) = cheeger_exact(&g, g.n() / 2).unwrap();
            let (hp, _) = h_prime_exact(&g).unwrap();
            assert_eq!(hp, h / d);
        }
    }

    #[test]
    fn conductance_examples() {
        assert_eq!(conductance_exact(&cycle(6)).unwrap().0, r(1, 6));
        // K4: singletons give 3/6, pairs give 4/12
        assert_eq!(conductance_exact(&complete(4)).unwrap().0, r(1, 3));
        assert_eq!(conductance_exact(&complete(2)).unwrap().0, r(1, 2));
        let two = build_graph(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(conductance_exact(&two), Err(SpectralError::Disconnected));
    }

    #[test]
    fn tie_breaking_prefers_small_then_lexicographic() {
        assert!(set_precedes(0b001, 0b110));
        assert!(set_precedes(0b011, 0b101));
        assert!(!set_precedes(0b101, 0b011));
        assert!(set_precedes(0b0101, 0b0110));
    }
}
