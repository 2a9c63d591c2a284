use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::walks::{covering_walk_length, default_covering_constant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sparse,
    #[serde(alias = "constd")]
    ConstantDegree,
    Intermediate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sparse => "sparse",
            Mode::ConstantDegree => "constant-degree",
            Mode::Intermediate => "intermediate",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sparse" => Ok(Mode::Sparse),
            "constd" | "constant-degree" => Ok(Mode::ConstantDegree),
            "intermediate" => Ok(Mode::Intermediate),
            other => Err(ParamError::Invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("parameter regime violated: {0}")]
    Regime(String),
}

/// Optional replacements for derived quantities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Covering constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Retry coefficient: the covering step makes `ceil(C ln n)` attempts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Branch-set size scale. Setting both `t` and `r` skips the formulas and
    /// the logarithm precondition, but not the growth-size precondition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Upper limit on the covering walk length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk_cap: Option<usize>,
    /// Expansion used for the covering walk length; defaults to `zeta^3/4`,
    /// the expansion the spectral step certifies for `G[U]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineParams {
    pub mode: Mode,
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub zeta: f64,
    pub k: f64,
    pub c: f64,
    pub t: usize,
    pub r: usize,
    /// Target size for the covering step.
    pub s: f64,
    pub cover_eps: f64,
    /// Formula walk length; usually astronomically large at desk scale.
    pub ell: f64,
    /// Steps actually walked: `min(ell, walk_cap)`.
    pub walk_steps: usize,
    pub retries: usize,
    /// True when `t` and `r` came from overrides.
    pub calibrated: bool,
}

pub const DEFAULT_RETRY_COEFFICIENT: f64 = 3.0;

pub fn compute_params(n: usize, d: usize, eps: f64, mode: Mode) -> Result<EngineParams, ParamError> {
    compute_params_with(n, d, eps, mode, &Overrides::default())
}

pub fn compute_params_with(
    n: usize,
    d: usize,
    eps: f64,
    mode: Mode,
    ov: &Overrides,
) -> Result<EngineParams, ParamError> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(ParamError::Invalid(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    if d < 3 {
        return Err(ParamError::Invalid(format!("degree bound d = {d} must be at least 3")));
    }
    if n < 2 {
        return Err(ParamError::Invalid(format!("n = {n} must be at least 2")));
    }
    let nf = n as f64;
    let df = d as f64;
    let zeta = eps / 8.0;
    let k = ov.k.unwrap_or_else(|| default_covering_constant(zeta));
    let c = ov.c.unwrap_or(DEFAULT_RETRY_COEFFICIENT);
    if !(k > 0.0 && c > 0.0) {
        return Err(ParamError::Invalid(format!("K = {k} and C = {c} must be positive")));
    }
    let calibrated = ov.t.is_some() && ov.r.is_some();

    let (t, r) = match mode {
        Mode::Sparse if !calibrated => {
            let arg = zeta.powi(3) * eps * df;
            if arg <= std::f64::consts::E {
                return Err(ParamError::Regime(format!(
                    "zeta^3 * eps * d = {arg:.3e} must exceed e so that log(zeta^3 eps d) > 1"
                )));
            }
            let t = ov.t.unwrap_or_else(|| (2.0 * k / zeta.powi(2) * nf * arg.ln() / df).sqrt().ceil() as usize);
            let r = ov.r.unwrap_or((zeta.powi(2) * eps * nf / (2.0 * t as f64)).floor() as usize);
            (t, r)
        }
        Mode::ConstantDegree if !calibrated => {
            let t = ov.t.unwrap_or_else(|| nf.sqrt().ceil() as usize);
            let r = ov.r.unwrap_or_else(|| ((zeta.powi(2) * eps * nf.sqrt() / 2.0).floor() as usize).max(1));
            (t, r)
        }
        Mode::Intermediate if !calibrated => {
            let t = ov.t.unwrap_or_else(|| (nf / df).sqrt().ceil() as usize);
            let r = ov.r.unwrap_or_else(|| ((zeta.powi(2) * eps * nf / (2.0 * t as f64)).floor() as usize).max(1));
            (t, r)
        }
        _ => (ov.t.expect("calibrated"), ov.r.expect("calibrated")),
    };
    if t == 0 {
        return Err(ParamError::Invalid("t must be positive".into()));
    }
    if mode != Mode::ConstantDegree && t as f64 > eps * nf / (4.0 * df) {
        return Err(ParamError::Regime(format!(
            "t = {t} exceeds eps*n/(4d) = {:.3}; the growth step needs t = o(n/d)",
            eps * nf / (4.0 * df)
        )));
    }
    if r == 0 {
        return Err(ParamError::Regime(format!("target order r = floor(zeta^2 eps n / 2t) is 0 for n = {n}, t = {t}")));
    }

    let s = match mode {
        Mode::ConstantDegree => eps * t as f64,
        _ => zeta * t as f64 * df,
    };
    let cover_eps = ov.cover_eps.unwrap_or(zeta.powi(3) / 4.0);
    if !(cover_eps > 0.0 && cover_eps < 1.0) {
        return Err(ParamError::Invalid(format!("cover_eps = {cover_eps} must lie in (0, 1)")));
    }
    let ell = covering_walk_length(n, s.ceil().max(1.0) as usize, r, cover_eps);
    let walk_cap = ov.walk_cap.unwrap_or(match mode {
        Mode::ConstantDegree => 20 * t,
        _ => ((4.0 * zeta * t as f64).ceil() as usize).max(1),
    });
    let walk_steps = if ell.is_finite() && ell < walk_cap as f64 { ell.ceil().max(0.0) as usize } else { walk_cap };
    let retries = (c * nf.ln()).ceil().max(1.0) as usize;
    Ok(EngineParams { mode, n, d, eps, zeta, k, c, t, r, s, cover_eps, ell, walk_steps, retries, calibrated })
}

impl EngineParams {
    /// Size cap for branch sets: `(1 + zeta) t`.
    pub fn branch_cap(&self) -> f64 {
        (1.0 + self.zeta) * self.t as f64
    }

    /// Size cap for the covering set.
    pub fn cover_cap(&self) -> f64 {
        match self.mode {
            Mode::ConstantDegree => self.branch_cap(),
            _ => self.zeta * self.t as f64,
        }
    }

    /// Minimum external neighbourhood of a branch set, `t(1/2 + 2 zeta)d`.
    pub fn neighbourhood_floor(&self) -> f64 {
        self.t as f64 * (0.5 + 2.0 * self.zeta) * self.d as f64
    }

    /// Number of adjacent branch-set pairs required in intermediate mode.
    pub fn required_pairs(&self, q: usize) -> usize {
        required_pairs(PAIR_FRACTION, q)
    }

    /// Ratio of the target order to `sqrt(n d / ln d)`.
    pub fn beta(&self) -> f64 {
        scaling_ratio(self.r, self.n, self.d)
    }
}

/// Pair fraction used by intermediate mode.
pub const PAIR_FRACTION: f64 = 0.1;

/// Adjacent pairs needed for a pair-fraction minor of order `q`:
/// `floor(threshold q^2 / 2)`, i.e. average quotient degree at least about `threshold q`.
pub fn required_pairs(threshold: f64, q: usize) -> usize {
    (threshold * (q * q) as f64 / 2.0 + 1e-9).floor() as usize
}

/// `r / sqrt(n d / ln d)`.
pub fn scaling_ratio(r: usize, n: usize, d: usize) -> f64 {
    let d = d as f64;
    r as f64 / (n as f64 * d / d.ln()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_regime_is_out_of_reach_at_moderate_degree() {
        // zeta^3 eps d = 0.05^3 * 0.4 * 16 = 8e-4 < e
        let err = compute_params(100_000, 16, 0.4, Mode::Sparse).unwrap_err();
        assert!(matches!(err, ParamError::Regime(ref m) if m.contains("log")), "{err}");
    }

    #[test]
    fn sparse_formulas_when_the_log_is_large() {
        // zeta^3 eps d > e needs d > e / (0.05^3 * 0.4) ~ 54366
        let (n, d, eps) = (1usize << 54, 60_000, 0.4);
        let p = compute_params(n, d, eps, Mode::Sparse).unwrap();
        let zeta = 0.05f64;
        let k = 32.0 / zeta.powi(3);
        assert_eq!(p.k, k);
        let arg: f64 = zeta.powi(3) * eps * d as f64;
        let t = (2.0 * k / zeta.powi(2) * n as f64 * arg.ln() / d as f64).sqrt().ceil() as usize;
        assert_eq!(p.t, t);
        assert_eq!(p.r, (zeta.powi(2) * eps * n as f64 / (2.0 * t as f64)).floor() as usize);
        assert!(p.r >= 1);
        assert!((p.s - zeta * t as f64 * d as f64).abs() < 1e-6);
    }

    #[test]
    fn constant_degree_shape() {
        let p = compute_params(10_000, 3, 0.4, Mode::ConstantDegree).unwrap();
        assert_eq!(p.t, 100);
        // zeta^2 eps sqrt(n)/2 = 0.05 rounds down to 0; at least one branch set is targeted
        assert_eq!(p.r, 1);
        assert_eq!(p.zeta, 0.05);
        assert!((p.s - 40.0).abs() < 1e-12);
    }

    #[test]
    fn growth_size_precondition() {
        let err = compute_params(100, 50, 0.4, Mode::Intermediate).unwrap_err();
        assert!(matches!(err, ParamError::Regime(ref m) if m.contains("exceeds")), "{err}");
        let ov = Overrides { t: Some(40), r: Some(2), ..Overrides::default() };
        assert!(matches!(compute_params_with(100, 50, 0.4, Mode::Sparse, &ov), Err(ParamError::Regime(_))));
    }

    #[test]
    fn calibrated_overrides() {
        let ov = Overrides { t: Some(20), r: Some(4), walk_cap: Some(7), ..Overrides::default() };
        let p = compute_params_with(16_384, 8, 0.4, Mode::Sparse, &ov).unwrap();
        assert!(p.calibrated);
        assert_eq!((p.t, p.r, p.walk_steps), (20, 4, 7));
        assert_eq!(p.retries, (3.0 * (16_384f64).ln()).ceil() as usize);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(compute_params(100, 3, 0.5, Mode::Sparse), Err(ParamError::Invalid(_))));
        assert!(matches!(compute_params(100, 2, 0.1, Mode::Sparse), Err(ParamError::Invalid(_))));
        assert_eq!("constd".parse::<Mode>().unwrap(), Mode::ConstantDegree);
        assert!("dense".parse::<Mode>().is_err());
    }

    #[test]
    fn pair_requirement() {
        assert_eq!(required_pairs(0.1, 3), 0);
        assert_eq!(required_pairs(0.1, 5), 1);
        assert_eq!(required_pairs(0.1, 10), 5);
    }
}
