use serde::Serialize;

use super::lanczos::LanczosConfig;
use super::{
    cheeger_exact, conductance_exact, h_prime_exact, lambda2_adjacency, lambda_normalized_estimate, sweep_from_vector,
    to_f64, SpectralError, EXHAUSTIVE_LIMIT,
};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    /// A rigorous one-sided bound derived from a spectral estimate; the
    /// direction is given by the field documentation.
    CertifiedBound,
    IterativeEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metric {
    pub value: f64,
    pub method: Method,
}

impl Metric {
    fn exact(value: f64) -> Self {
        Metric { value, method: Method::Exact }
    }
}

/// Expansion summary. For graphs above the exhaustive limit, `h`, `h_k`,
/// `h_prime` and `phi` are lower bounds from the Cheeger inequality.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub min_degree: usize,
    pub connected: bool,
    pub h: Metric,
    pub k: usize,
    pub h_k: Metric,
    pub h_prime: Metric,
    pub phi: Metric,
    pub lambda_norm: Metric,
    pub lambda_residual: f64,
    /// `cut/vol` of the Fiedler sweep set: an upper bound on `h_prime`.
    pub sweep_ratio: Option<f64>,
    pub lambda2_adj: Option<Metric>,
    pub abs_lambda2_adj: Option<Metric>,
}

/// Computes every metric that applies. `k` defaults to `n/2`.
pub fn analyze(g: &Graph, k: Option<usize>, tol: f64) -> Result<ExpansionReport, SpectralError> {
    let n = g.n();
    if n < 2 {
        return Err(SpectralError::TooSmall);
    }
    if g.m() == 0 {
        return Err(SpectralError::Edgeless);
    }
    let k = k.unwrap_or(n / 2);
    if k < 1 || k > n / 2 {
        return Err(SpectralError::SizeBound { k, n });
    }
    let connected = g.is_connected();
    let lambda = lambda_normalized_estimate(g, LanczosConfig { tol, ..LanczosConfig::default() })?;
    let lambda_norm = Metric {
        value: lambda.value,
        method: if lambda.disconnected { Method::Exact } else { Method::IterativeEstimate },
    };
    let sweep_ratio = (!lambda.disconnected).then(|| sweep_from_vector(g, &lambda.vector).ratio);

    let (h, h_k, h_prime, phi) = if n <= EXHAUSTIVE_LIMIT {
        let h = to_f64(cheeger_exact(g, n / 2)?.0);
        let hk = to_f64(cheeger_exact(g, k)?.0);
        let hp = to_f64(h_prime_exact(g)?.0);
        let phi = match conductance_exact(g) {
            Ok((v, _)) => to_f64(v),
            Err(SpectralError::Disconnected) => 0.0,
            Err(e) => return Err(e),
        };
        (Metric::exact(h), Metric::exact(hk), Metric::exact(hp), Metric::exact(phi))
    } else if !connected {
        // The smallest component has at most n/2 vertices and an empty cut.
        let z = Metric::exact(0.0);
        (z, z, z, z)
    } else {
        // lambda/2 <= h'; h(S) >= h' vol(S)/|S| >= h' min_deg; Phi = h'/2 for the
        // volume-restricted minimum. Subtracting the residual keeps the bound
        // on the safe side of the estimate.
        let lam = (lambda.value - lambda.residual).max(0.0);
        let hp = lam / 2.0;
        let bound = |value| Metric { value, method: Method::CertifiedBound };
        let h = hp * g.min_degree() as f64;
        (bound(h), bound(h), bound(hp), bound(hp / 2.0))
    };

    let (lambda2_adj, abs_lambda2_adj) = if connected {
        match lambda2_adjacency(g, tol) {
            Ok(a) => (
                Some(Metric { value: a.lambda2, method: Method::IterativeEstimate }),
                Some(Metric { value: a.abs_second, method: Method::IterativeEstimate }),
            ),
            Err(SpectralError::NonConvergence { .. }) => (None, None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };

    Ok(ExpansionReport {
        n,
        m: g.m(),
        max_degree: g.max_degree(),
        min_degree: g.min_degree(),
        connected,
        h,
        k,
        h_k,
        h_prime,
        phi,
        lambda_norm,
        lambda_residual: lambda.residual,
        sweep_ratio,
        lambda2_adj,
        abs_lambda2_adj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{named_fixture, random_regular, Family};
    use crate::rng::RngStream;

    #[test]
    fn petersen_report() {
        let g = named_fixture(Family::Petersen, &[]).unwrap();
        let r = analyze(&g, None, 1e-9).unwrap();
        assert_eq!(r.h, Metric::exact(1.0));
        assert_eq!(r.h_prime.method, Method::Exact);
        assert!((r.h_prime.value - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.lambda_norm.value - 2.0 / 3.0).abs() < 1e-8);
        assert!(r.phi.value >= r.h.value / (2.0 * 3.0) - 1e-12);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["h"]["method"], "exact");
        assert_eq!(json["lambda_norm"]["method"], "iterative-estimate");
    }

    #[test]
    fn large_graph_uses_bounds() {
        let g = random_regular(200, 6, &mut RngStream::new(11, 0)).unwrap();
        let r = analyze(&g, None, 1e-8).unwrap();
        assert_eq!(r.h.method, Method::CertifiedBound);
        assert!(r.h.value > 0.0);
        assert!(r.h_prime.value <= r.sweep_ratio.unwrap());
    }
}
