//! Restarted Lanczos iteration with full reorthogonalization for extreme
//! eigenpairs of sparse symmetric operators.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::graph::Graph;
use crate::rng::mix;

pub trait SymOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Smallest,
    Largest,
}

#[derive(Debug, Clone)]
pub struct EigenEstimate {
    pub value: f64,
    /// Unit-norm Ritz vector.
    pub vector: Vec<f64>,
    /// `||A x - value x||` for the returned vector.
    pub residual: f64,
    pub converged: bool,
    pub matvecs: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosConfig {
    pub tol: f64,
    pub max_matvecs: usize,
    /// Krylov dimension per restart cycle; capped by memory for large operators.
    pub max_basis: usize,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig { tol: 1e-8, max_matvecs: 100_000, max_basis: 160 }
    }
}

/// `I - D^{-1/2} A D^{-1/2}`.
pub struct NormalizedLaplacian<'a> {
    g: &'a Graph,
    inv_sqrt_deg: Vec<f64>,
}

impl<'a> NormalizedLaplacian<'a> {
    /// Requires every degree to be positive.
    pub fn new(g: &'a Graph) -> Self {
        let inv_sqrt_deg = (0..g.n()).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
        NormalizedLaplacian { g, inv_sqrt_deg }
    }

    /// Unit kernel vector, proportional to `sqrt(deg)`.
    pub fn kernel(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.inv_sqrt_deg.iter().map(|s| 1.0 / s).collect();
        normalize(&mut k);
        k
    }
}

impl SymOperator for NormalizedLaplacian<'_> {
    fn dim(&self) -> usize {
        self.g.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for v in 0..self.g.n() {
            let s: f64 = self.g.neighbors(v).iter().map(|&w| x[w] * self.inv_sqrt_deg[w]).sum();
            y[v] = x[v] - self.inv_sqrt_deg[v] * s;
        }
    }
}

pub struct Adjacency<'a>(pub &'a Graph);

impl SymOperator for Adjacency<'_> {
    fn dim(&self) -> usize {
        self.0.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (v, out) in y.iter_mut().enumerate() {
            *out = self.0.neighbors(v).iter().map(|&w| x[w]).sum();
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn normalize(a: &mut [f64]) -> f64 {
    let nrm = norm(a);
    if nrm > 0.0 {
        a.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Removes the components along each (orthonormal) vector in `basis`, twice.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    orthogonalize_all(w, basis, &[]);
}

/// Both sets in the same pass: sweeping `deflate` alone first would let the
/// basis sweep reintroduce deflated directions, which then grow every step.
fn orthogonalize_all(w: &mut [f64], deflate: &[Vec<f64>], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in deflate.iter().chain(basis) {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// Deterministic start vector with no special structure.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| (mix(i as u64, 0x1a2c_5e) >> 11) as f64 / (1u64 << 53) as f64 - 0.5).collect()
}

/// Extreme eigenpair of `op` restricted to the orthogonal complement of `deflate`
/// (which must be orthonormal). Returns `None` if that complement is trivial.
pub fn extreme_eigenpair(
    op: &dyn SymOperator,
    deflate: &[Vec<f64>],
    which: Extreme,
    cfg: LanczosConfig,
) -> Option<EigenEstimate> {
    let n = op.dim();
    let effective = n.saturating_sub(deflate.len());
    if effective == 0 {
        return None;
    }
    let memory_cap = (50_000_000 / n.max(1)).max(8);
    let basis_cap = cfg.max_basis.min(memory_cap).min(effective).max(1);

    let mut x = start_vector(n);
    orthogonalize(&mut x, deflate);
    if normalize(&mut x) == 0.0 {
        x = vec![0.0; n];
        x[0] = 1.0;
        orthogonalize(&mut x, deflate);
        normalize(&mut x);
    }

    let mut matvecs = 0;
    let mut w = vec![0.0; n];
    let mut best: Option<EigenEstimate> = None;
    loop {
        let mut basis: Vec<Vec<f64>> = vec![x.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut exhausted = false;
        for j in 0..basis_cap {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            orthogonalize_all(&mut w, deflate, &basis);
            let b = norm(&w);
            let scale = a.abs().max(beta.last().copied().unwrap_or(0.0)).max(1.0);
            if j + 1 == basis_cap || b <= 1e-12 * scale || matvecs >= cfg.max_matvecs {
                exhausted = b <= 1e-12 * scale;
                beta.push(b);
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        }

        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let idx = (0..k)
            .reduce(|a, b| {
                let better = match which {
                    Extreme::Smallest => eig.eigenvalues[b] < eig.eigenvalues[a],
                    Extreme::Largest => eig.eigenvalues[b] > eig.eigenvalues[a],
                };
                if better {
                    b
                } else {
                    a
                }
            })
            .expect("k >= 1");
        let mut ritz = vec![0.0; n];
        for (i, q) in basis.iter().enumerate() {
            axpy(eig.eigenvectors[(i, idx)], q, &mut ritz);
        }
        orthogonalize(&mut ritz, deflate);
        normalize(&mut ritz);

        op.apply(&ritz, &mut w);
        matvecs += 1;
        let rq = dot(&ritz, &w);
        axpy(-rq, &ritz, &mut w);
        orthogonalize(&mut w, deflate);
        let residual = norm(&w);
        let estimate = EigenEstimate { value: rq, vector: ritz, residual, converged: residual <= cfg.tol, matvecs };
        let improves = best.as_ref().is_none_or(|b| match which {
            Extreme::Smallest => estimate.value <= b.value,
            Extreme::Largest => estimate.value >= b.value,
        });
        if improves {
            best = Some(estimate);
        }
        let current = best.as_ref().expect("set above");
        if current.converged || exhausted || !improves || matvecs >= cfg.max_matvecs {
            let mut out = best.expect("set above");
            out.matvecs = matvecs;
            out.converged = out.residual <= cfg.tol;
            return Some(out);
        }
        x = current.vector.clone();
    }
}
