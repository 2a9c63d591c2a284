use serde::Serialize;

use super::{lambda_normalized, SpectralError};
use crate::graph::{Graph, Vertex, VertexSet};

/// Result of a Fiedler sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCut {
    /// The side with `vol(S) <= vol(V)/2`.
    pub set: VertexSet,
    pub cut: usize,
    pub volume: usize,
    /// `cut / vol(S)`.
    pub ratio: f64,
    /// Rayleigh quotient of the sweep vector; upper-bounds `lambda(G)`.
    pub rayleigh: f64,
}

/// Sweep over prefixes of the vertices sorted by the degree-normalized Fiedler
/// vector, keeping the prefix with the least `cut / min(vol S, vol V\S)`.
pub fn sweep_cut(g: &Graph, tol: f64) -> Result<SweepCut, SpectralError> {
    let est = lambda_normalized(g, tol)?;
    if est.disconnected {
        return Err(SpectralError::Disconnected);
    }
    Ok(sweep_from_vector(g, &est.vector))
}

/// Sweep along an arbitrary vector `x` given in the symmetric normalization
/// (entries are divided by `sqrt(deg)` before sorting). Requires `n >= 2` and
/// no isolated vertices.
pub fn sweep_from_vector(g: &Graph, x: &[f64]) -> SweepCut {
    let n = g.n();
    let y: Vec<f64> = (0..n).map(|v| x[v] / (g.degree(v) as f64).sqrt()).collect();
    let mut order: Vec<Vertex> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));

    let total_vol = 2 * g.m();
    let mut in_prefix = vec![false; n];
    let mut cut = 0usize;
    let mut vol = 0usize;
    // (ratio numerator, denominator, prefix length)
    let mut best: Option<(usize, usize, usize)> = None;
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        let inside = g.neighbors(v).iter().filter(|&&w| in_prefix[w]).count();
        cut = cut + g.degree(v) - 2 * inside;
        vol += g.degree(v);
        in_prefix[v] = true;
        let denom = vol.min(total_vol - vol);
        if denom == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((bc, bd, _)) => (cut as u128) * (bd as u128) < (bc as u128) * (denom as u128),
        };
        if better {
            best = Some((cut, denom, k + 1));
        }
    }
    let (cut, _, len) = best.expect("n >= 2 without isolated vertices");
    let prefix: Vec<Vertex> = order[..len].to_vec();
    let prefix_vol: usize = prefix.iter().map(|&v| g.degree(v)).sum();
    let prefix_set = VertexSet::new(n, prefix).expect("ids below n");
    let (set, volume) = if 2 * prefix_vol <= total_vol {
        (prefix_set, prefix_vol)
    } else {
        (prefix_set.complement(), total_vol - prefix_vol)
    };

    let mut lx = vec![0.0; n];
    let inv: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    for v in 0..n {
        let s: f64 = g.neighbors(v).iter().map(|&w| x[w] * inv[w]).sum();
        lx[v] = x[v] - inv[v] * s;
    }
    let num: f64 = x.iter().zip(&lx).map(|(a, b)| a * b).sum();
    let den: f64 = x.iter().map(|a| a * a).sum();
    SweepCut { set, cut, volume, ratio: cut as f64 / volume as f64, rayleigh: num / den }
}
