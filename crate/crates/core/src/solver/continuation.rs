use serde::{Deserialize, Serialize};

use super::newton::newton_solve;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::lattice::{LatticeSeq, ProblemSpec, SolveResult, Window};

/// Boundary amplitude above which a solution is flagged as a truncation
/// artifact regardless of drift.
pub const BOUNDARY_ARTIFACT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOutcome {
    pub result: SolveResult,
    /// ∞-norm distance between the re-solved profile and the zero-padded start.
    pub drift: f64,
    /// `|u(±K)| > 1e-3` on the original window.
    pub boundary_artifact: bool,
}

/// Zero-pads `result` to half-width `k_new` and re-solves there. `spec` is
/// the problem on the original window.
pub fn window_continuation(
    result: &SolveResult,
    spec: &ProblemSpec,
    k_new: usize,
    cfg: &SolverConfig,
) -> Result<ContinuationOutcome> {
    let old = result.u.window();
    if k_new <= old.half_width() {
        return Err(Error::Usage(format!(
            "window continuation needs K_new > K, got {k_new} <= {}",
            old.half_width()
        )));
    }
    let window = Window::new(k_new)?;
    let wide = spec.on_window(window)?;
    let start = result.u.on_window(window);
    let solved = newton_solve(&start, &wide, cfg)?;
    let edge = result.u.get(old.k_min()).abs().max(result.u.get(old.k_max()).abs());
    Ok(ContinuationOutcome { drift: solved.u.dist_inf(&start), boundary_artifact: edge > BOUNDARY_ARTIFACT, result: solved })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaStep {
    pub lambda: f64,
    pub result: SolveResult,
}

/// Follows a solution branch through `lambdas`, warm-starting each solve
/// from the previous converged profile.
pub fn lambda_continuation(u0: &LatticeSeq, spec: &ProblemSpec, lambdas: &[f64], cfg: &SolverConfig) -> Result<Vec<LambdaStep>> {
    let mut out = Vec::with_capacity(lambdas.len());
    let mut u = u0.clone();
    for &lambda in lambdas {
        let s = spec.with_lambda(lambda)?;
        let result = newton_solve(&u, &s, cfg)?;
        if result.converged {
            u = result.u.clone();
        }
        out.push(LambdaStep { lambda, result });
    }
    Ok(out)
}
