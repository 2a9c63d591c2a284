use serde::Serialize;

use super::{cheeger_exact, lambda2_adjacency, to_f64, EXHAUSTIVE_LIMIT};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteStatus {
    Certified,
    Failed,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Exact,
    Eigenvalue,
    Uncertified,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Exact => "exact",
            Route::Eigenvalue => "eigenvalue",
            Route::Uncertified => "uncertified",
        }
    }
}

/// Which route, if any, certifies `h(G) >= eps*d` together with
/// `h_{eps n}(G) >= (1/2 + eps)d`.
#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub eps: f64,
    pub max_degree: usize,
    pub route: Route,
    pub exact: RouteStatus,
    pub eigenvalue: RouteStatus,
    /// Brute-force `h(G)`, when computed.
    pub h: Option<f64>,
    /// Brute-force `h_k(G)` with `k = ceil(eps n)` clamped to `1..=n/2`.
    pub h_k: Option<(usize, f64)>,
    pub lambda2: Option<f64>,
    /// Epsilon for which the eigenvalue route establishes the hypotheses
    /// (`h >= d/4` and `h_{eps n/4} >= (1/2 + eps/2)d` give `eps/4`).
    pub implied_eps: Option<f64>,
}

pub fn gate_theorem_hypotheses(g: &Graph, eps: f64) -> GateReport {
    let n = g.n();
    let d = g.max_degree();
    let df = d as f64;
    let mut report = GateReport {
        eps,
        max_degree: d,
        route: Route::Uncertified,
        exact: RouteStatus::NotApplicable,
        eigenvalue: RouteStatus::NotApplicable,
        h: None,
        h_k: None,
        lambda2: None,
        implied_eps: None,
    };
    if n >= 2 && n <= EXHAUSTIVE_LIMIT {
        let half = n / 2;
        let k = ((eps * n as f64).ceil() as usize).clamp(1, half);
        let h = to_f64(cheeger_exact(g, half).expect("n within limit").0);
        let hk = to_f64(cheeger_exact(g, k).expect("n within limit").0);
        report.h = Some(h);
        report.h_k = Some((k, hk));
        report.exact =
            if h >= eps * df && hk >= (0.5 + eps) * df { RouteStatus::Certified } else { RouteStatus::Failed };
    }
    if n >= 2 && d >= 3 && g.is_regular() {
        if let Ok(adj) = lambda2_adjacency(g, 1e-9) {
            report.lambda2 = Some(adj.lambda2);
            let upper = adj.lambda2 + adj.residual + 1e-9;
            report.eigenvalue = if upper < (0.5 - eps) * df {
                report.implied_eps = Some(eps / 4.0);
                RouteStatus::Certified
            } else {
                RouteStatus::Failed
            };
        }
    }
    report.route = if report.exact == RouteStatus::Certified {
        Route::Exact
    } else if report.eigenvalue == RouteStatus::Certified {
        Route::Eigenvalue
    } else {
        Route::Uncertified
    };
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{named_fixture, Family};
    use crate::graph::fixtures::{complete, cycle};

    #[test]
    fn complete_graph_exact_route() {
        let r = gate_theorem_hypotheses(&complete(4), 0.1);
        assert_eq!(r.route, Route::Exact);
        assert_eq!(r.h, Some(2.0));
        assert_eq!(r.h_k, Some((1, 3.0)));
    }

    #[test]
    fn petersen_eigenvalue_route() {
        let r = gate_theorem_hypotheses(&named_fixture(Family::Petersen, &[]).unwrap(), 0.1);
        assert_eq!(r.eigenvalue, RouteStatus::Certified);
        assert!((r.lambda2.unwrap() - 1.0).abs() < 1e-8);
        assert_eq!(r.implied_eps, Some(0.025));
    }

    #[test]
    fn cycle_uncertified() {
        let r = gate_theorem_hypotheses(&cycle(6), 0.3);
        assert_eq!(r.route, Route::Uncertified);
        assert_eq!(r.exact, RouteStatus::Failed);
        assert_eq!(r.h_k, Some((2, 1.0)));
        assert_eq!(r.eigenvalue, RouteStatus::NotApplicable);
    }
}
