//! Expansion metrics: exhaustive Cheeger-type constants for small graphs,
//! iterative normalized-Laplacian and adjacency eigenvalues, the Fiedler sweep
//! cut, and the hypothesis gate for the minor engine.

pub mod dense;
mod exact;
mod gate;
pub mod lanczos;
mod report;
mod sweep;

use thiserror::Error;

use crate::graph::{Graph, VertexSet};
use lanczos::{extreme_eigenpair, Adjacency, EigenEstimate, Extreme, LanczosConfig, NormalizedLaplacian};

pub use exact::{cheeger_exact, cheeger_exact_with_limit, conductance_exact, h_prime_exact, to_f64, Exact};
pub use gate::{gate_theorem_hypotheses, GateReport, Route, RouteStatus};
pub use report::{analyze, ExpansionReport, Method, Metric};
pub use sweep::{sweep_cut, sweep_from_vector, SweepCut};

/// Largest `n` for which brute-force metrics are computed.
pub const EXHAUSTIVE_LIMIT: usize = 20;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("n = {n} exceeds the exhaustive limit {limit}; use certified bounds instead")]
    TooLarge { n: usize, limit: usize },
    #[error("size bound k = {k} outside 1..=n/2 for n = {n}")]
    SizeBound { k: usize, n: usize },
    #[error("graph has no edges")]
    Edgeless,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),
    #[error("graph needs at least two vertices")]
    TooSmall,
    #[error("eigensolver did not converge: estimate {estimate}, residual {residual:e} after {matvecs} products")]
    NonConvergence { estimate: f64, residual: f64, matvecs: usize },
}

/// `vol(S)`: the degree sum over `S`.
pub fn volume(g: &Graph, s: &VertexSet) -> usize {
    s.iter().filter(|&v| v < g.n()).map(|v| g.degree(v)).sum()
}

#[derive(Debug, Clone)]
pub struct SpectralEstimate {
    pub value: f64,
    pub residual: f64,
    pub matvecs: usize,
    /// The graph was disconnected and `value` is the exact 0.
    pub disconnected: bool,
    /// Unit eigenvector in the symmetric normalization; empty when disconnected.
    pub vector: Vec<f64>,
}

fn lanczos_cfg(tol: f64) -> LanczosConfig {
    LanczosConfig { tol, ..LanczosConfig::default() }
}

/// Second-smallest normalized-Laplacian eigenvalue, without failing on
/// non-convergence. Disconnected graphs report 0.
pub fn lambda_normalized_estimate(g: &Graph, cfg: LanczosConfig) -> Result<SpectralEstimate, SpectralError> {
    if g.n() < 2 {
        return Err(SpectralError::TooSmall);
    }
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
        return Err(SpectralError::IsolatedVertex(v));
    }
    if !g.is_connected() {
        return Ok(SpectralEstimate { value: 0.0, residual: 0.0, matvecs: 0, disconnected: true, vector: Vec::new() });
    }
    let op = NormalizedLaplacian::new(g);
    let kernel = op.kernel();
    let est = extreme_eigenpair(&op, &[kernel], Extreme::Smallest, cfg).expect("n >= 2");
    Ok(SpectralEstimate {
        value: est.value.max(0.0),
        residual: est.residual,
        matvecs: est.matvecs,
        disconnected: false,
        vector: est.vector,
    })
}

/// `lambda(G)` within `tol`, certified by `||Lx - lambda x|| <= tol`.
pub fn lambda_normalized(g: &Graph, tol: f64) -> Result<SpectralEstimate, SpectralError> {
    let est = lambda_normalized_estimate(g, lanczos_cfg(tol))?;
    if est.residual > tol {
        return Err(SpectralError::NonConvergence {
            estimate: est.value,
            residual: est.residual,
            matvecs: est.matvecs,
        });
    }
    Ok(est)
}

#[derive(Debug, Clone)]
pub struct AdjacencyEstimate {
    /// Second-largest adjacency eigenvalue.
    pub lambda2: f64,
    /// Smallest adjacency eigenvalue.
    pub lambda_min: f64,
    /// `max(|lambda2|, |lambda_min|)`.
    pub abs_second: f64,
    pub residual: f64,
}

fn converged(est: EigenEstimate, tol: f64) -> Result<EigenEstimate, SpectralError> {
    if est.residual > tol {
        Err(SpectralError::NonConvergence { estimate: est.value, residual: est.residual, matvecs: est.matvecs })
    } else {
        Ok(est)
    }
}

/// Second-largest adjacency eigenvalue. Regular graphs deflate the all-ones
/// vector; other graphs deflate a computed top eigenvector.
pub fn lambda2_adjacency(g: &Graph, tol: f64) -> Result<AdjacencyEstimate, SpectralError> {
    let n = g.n();
    if n < 2 {
        return Err(SpectralError::TooSmall);
    }
    if !g.is_connected() {
        return Err(SpectralError::Disconnected);
    }
    let op = Adjacency(g);
    let top = if g.is_regular() {
        vec![1.0 / (n as f64).sqrt(); n]
    } else {
        let est = extreme_eigenpair(&op, &[], Extreme::Largest, lanczos_cfg(tol * 1e-2))
            .map(|e| converged(e, tol))
            .expect("n >= 2")?;
        est.vector
    };
    let second = converged(extreme_eigenpair(&op, &[top], Extreme::Largest, lanczos_cfg(tol)).expect("n >= 2"), tol)?;
    let bottom = converged(extreme_eigenpair(&op, &[], Extreme::Smallest, lanczos_cfg(tol)).expect("n >= 2"), tol)?;
    Ok(AdjacencyEstimate {
        lambda2: second.value,
        lambda_min: bottom.value,
        abs_second: second.value.abs().max(bottom.value.abs()),
        residual: second.residual.max(bottom.residual),
    })
}
