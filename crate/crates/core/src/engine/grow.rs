use serde::Serialize;

use super::EngineError;
use crate::graph::{Graph, Vertex, VertexSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "set", rename_all = "kebab-case")]
pub enum Growth {
    /// Connected `X` containing the start vertex with `|N(X)| >= s(threshold - 1)`.
    Grown(VertexSet),
    /// `X' ∪ N(X')` at the step where no extension was available.
    Obstruction(VertexSet),
}

/// Grows a connected set from `v` one vertex at a time. With `X'` the current
/// set and `Y = N(X')`: if `|Y| >= threshold(|X'| + 1)` the lowest-id vertex
/// of `Y` is added; otherwise the lowest-id `w` in `Y` with at least
/// `threshold` neighbours outside `X' ∪ Y`; otherwise the lowest-id `w` in `Y`
/// that keeps `|N(X' + w)| >= (|X'| + 1)(threshold - 1)`. When none exists
/// `X' ∪ Y` is returned as an obstruction.
pub fn grow_connected_expander(g: &Graph, v: Vertex, s: usize, threshold: f64) -> Result<Growth, EngineError> {
    let n = g.n();
    if v >= n {
        return Err(EngineError::Invalid(format!("start vertex {v} outside a graph on {n} vertices")));
    }
    if s == 0 || s > n {
        return Err(EngineError::Invalid(format!("target size {s} outside 1..={n}")));
    }
    // 0 = outside, 1 = in X, 2 = in Y
    let mut state = vec![0u8; n];
    let mut x = vec![v];
    state[v] = 1;
    let mut y = std::collections::BTreeSet::new();
    for &w in g.neighbors(v) {
        state[w] = 2;
        y.insert(w);
    }
    let obstruction = |state: &[u8]| {
        let mask: Vec<bool> = state.iter().map(|&c| c != 0).collect();
        Growth::Obstruction(VertexSet::from_mask(&mask))
    };
    if (y.len() as f64) < threshold - 1.0 {
        return Ok(obstruction(&state));
    }
    let fresh = |state: &[u8], w: Vertex| g.neighbors(w).iter().filter(|&&u| state[u] == 0).count();

    while x.len() < s {
        let size = x.len() as f64;
        let pick = if y.len() as f64 >= threshold * (size + 1.0) {
            y.first().copied()
        } else if let Some(&w) = y.iter().find(|&&w| fresh(&state, w) as f64 >= threshold) {
            Some(w)
        } else {
            let need = (size + 1.0) * (threshold - 1.0);
            y.iter().copied().find(|&w| (y.len() - 1 + fresh(&state, w)) as f64 >= need)
        };
        let Some(w) = pick else {
            return Ok(obstruction(&state));
        };
        y.remove(&w);
        state[w] = 1;
        x.push(w);
        for &u in g.neighbors(w) {
            if state[u] == 0 {
                state[u] = 2;
                y.insert(u);
            }
        }
    }
    Ok(Growth::Grown(VertexSet::new(n, x).expect("ids below n")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::random_regular;
    use crate::graph::fixtures::{complete, cycle, set};
    use crate::rng::RngStream;
    use proptest::prelude::*;

    #[test]
    fn base_case() {
        let g = complete(4);
        let Growth::Grown(x) = grow_connected_expander(&g, 0, 1, 3.0).unwrap() else { panic!() };
        assert_eq!(x, set(4, &[0]));
        assert_eq!(g.external_neighborhood(&x).unwrap().len(), 3);
    }

    #[test]
    fn cycle_pair() {
        let g = cycle(6);
        let Growth::Grown(x) = grow_connected_expander(&g, 0, 2, 2.0).unwrap() else { panic!() };
        assert_eq!(x, set(6, &[0, 1]));
        assert_eq!(g.external_neighborhood(&x).unwrap(), set(6, &[2, 5]));
    }

    #[test]
    fn cycle_obstruction() {
        let g = cycle(6);
        // no connected triple of C6 has more than 2 external neighbours
        for m in 0u32..64 {
            let s = VertexSet::new(6, (0..6).filter(|&v| m >> v & 1 == 1)).unwrap();
            if s.len() == 3 && g.is_connected_set(&s) {
                assert!(g.external_neighborhood(&s).unwrap().len() < 5);
            }
        }
        let out = grow_connected_expander(&g, 0, 3, 2.5).unwrap();
        assert_eq!(out, Growth::Obstruction(set(6, &[0, 1, 5])));
    }

    #[test]
    fn errors() {
        let g = cycle(6);
        assert!(grow_connected_expander(&g, 0, 7, 1.0).is_err());
        assert!(grow_connected_expander(&g, 6, 1, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn grown_sets_meet_the_bound(seed in 0u64..200, s in 1usize..40, thr in 1.0f64..5.0, v in 0usize..100) {
            let g = random_regular(100, 4, &mut RngStream::new(seed, 0)).unwrap();
            match grow_connected_expander(&g, v, s, thr).unwrap() {
                Growth::Grown(x) => {
                    prop_assert_eq!(x.len(), s);
                    prop_assert!(x.contains(v));
                    prop_assert!(g.is_connected_set(&x));
                    let nb = g.external_neighborhood(&x).unwrap().len() as f64;
                    prop_assert!(nb >= s as f64 * (thr - 1.0) - 1e-9);
                }
                Growth::Obstruction(o) => {
                    prop_assert!(o.contains(v));
                    prop_assert!(g.is_connected_set(&o));
                }
            }
        }
    }
}
