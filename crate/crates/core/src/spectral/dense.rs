//! Dense eigendecomposition oracles for small graphs (test and acceptance use).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::graph::Graph;

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn adjacency_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut a = DMatrix::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

/// Ascending adjacency spectrum.
pub fn adjacency_spectrum(g: &Graph) -> Vec<f64> {
    sorted_eigenvalues(adjacency_matrix(g))
}

/// Ascending spectrum of `I - D^{-1/2} A D^{-1/2}`; requires no isolated vertices.
pub fn normalized_laplacian_spectrum(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut l = DMatrix::identity(n, n);
    for (u, v) in g.edges() {
        let w = 1.0 / ((g.degree(u) * g.degree(v)) as f64).sqrt();
        l[(u, v)] = -w;
        l[(v, u)] = -w;
    }
    sorted_eigenvalues(l)
}

/// Lazy-walk transition matrix `P`, row-stochastic.
pub fn lazy_transition_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut p = DMatrix::zeros(n, n);
    for v in 0..n {
        p[(v, v)] = 0.5;
        for &w in g.neighbors(v) {
            p[(v, w)] = 0.5 / g.degree(v) as f64;
        }
    }
    p
}

/// Descending spectrum of the lazy-walk matrix `P`.
///
/// `P` is similar to the symmetric `D^{1/2} P D^{-1/2}`, whose eigenvalues are
/// computed here.
pub fn lazy_transition_spectrum(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let p = lazy_transition_matrix(g);
    let sqrt_deg: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| sqrt_deg[i] * p[(i, j)] / sqrt_deg[j]);
    let mut values = sorted_eigenvalues(s);
    values.reverse();
    values
}

/// Spectral gap `1 - lambda_2(P)` of the lazy walk.
pub fn lazy_spectral_gap(g: &Graph) -> f64 {
    1.0 - lazy_transition_spectrum(g)[1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete, cycle};

    #[test]
    fn known_spectra() {
        let k4 = adjacency_spectrum(&complete(4));
        assert!((k4[3] - 3.0).abs() < 1e-12 && (k4[0] + 1.0).abs() < 1e-12);
        let l = normalized_laplacian_spectrum(&cycle(6));
        assert!(l[0].abs() < 1e-12 && (l[1] - 0.5).abs() < 1e-12 && (l[5] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn transition_spectrum_tracks_laplacian() {
        let g = cycle(7);
        let p = lazy_transition_spectrum(&g);
        let l = normalized_laplacian_spectrum(&g);
        assert!((p[0] - 1.0).abs() < 1e-12);
        for (pi, li) in p.iter().zip(&l) {
            assert!((pi - (1.0 - li / 2.0)).abs() < 1e-12);
        }
        let rows = lazy_transition_matrix(&g);
        for i in 0..7 {
            assert!((rows.row(i).sum() - 1.0).abs() < 1e-12);
        }
    }
}
