use super::jacobian::jacobian;
use super::SolverConfig;
use crate::error::Result;
use crate::lattice::{norm_inf, norm_x, residual, IterationRecord, LatticeSeq, ProblemSpec, SolveResult};

const MAX_BACKTRACKS: usize = 60;

fn merit(r: &LatticeSeq) -> f64 {
    0.5 * r.dot(r)
}

/// One damped step from `u`. Returns the new iterate, its residual and the
/// accepted step length, or `None` if neither the Newton nor the gradient
/// direction decreases `½|r|²`.
pub(crate) fn damped_step(
    u: &LatticeSeq,
    r: &LatticeSeq,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
) -> Option<(LatticeSeq, LatticeSeq, f64)> {
    let m0 = merit(r);
    let jac = jacobian(u, spec, cfg.jacobian_cap);
    let neg_r: Vec<f64> = r.values().iter().map(|v| -v).collect();
    let w = u.window();

    if let Some(delta) = jac.solve(&neg_r) {
        let delta = LatticeSeq::from_vec_unchecked(w, delta);
        let mut t = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            let trial = u.axpy(t, &delta);
            if trial.is_finite() {
                let rt = residual(&trial, spec);
                let mt = merit(&rt);
                if mt <= (1.0 - 2.0 * cfg.sufficient_decrease * t) * m0 {
                    return Some((trial, rt, t * norm_inf(&delta)));
                }
            }
            t *= cfg.shrink;
        }
    }

    // gradient of ½|r|² is J r (J symmetric)
    let g = LatticeSeq::from_vec_unchecked(w, jac.matvec(r.values()));
    let gg = g.dot(&g);
    if !(gg > 0.0 && gg.is_finite()) {
        return None;
    }
    let mut t = m0 / gg;
    for _ in 0..MAX_BACKTRACKS {
        let trial = u.axpy(-t, &g);
        if trial.is_finite() {
            let rt = residual(&trial, spec);
            if merit(&rt) <= m0 - cfg.sufficient_decrease * t * gg {
                return Some((trial, rt, t * norm_inf(&g)));
            }
        }
        t *= cfg.shrink;
    }
    None
}

/// Damped Newton iteration on the residual. Convergence is judged on the
/// ∞-norm of a freshly evaluated residual, never on the step size.
pub fn newton_solve(u0: &LatticeSeq, spec: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveResult> {
    let mut u = u0.clone();
    let mut r = residual(&u, spec);
    let mut log = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_iter && norm_inf(&r) > cfg.residual_tol {
        let Some((next, rn, step)) = damped_step(&u, &r, spec, cfg) else {
            break;
        };
        iterations += 1;
        u = next;
        r = rn;
        log.push(IterationRecord {
            iteration: iterations,
            residual_inf_norm: norm_inf(&r),
            cerami_metric: (1.0 + norm_x(&u, &spec.coeffs, spec.p)) * r.norm_l2(),
            step,
        });
    }
    SolveResult::evaluate(u, spec, iterations, cfg.residual_tol, log)
}
