use super::jacobian::jacobian;
use super::newton::newton_solve;
use super::set::SolutionSet;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::lattice::{norm_inf, norm_x, residual, IterationRecord, LatticeSeq, ProblemSpec, SolveResult};

const MAX_BACKTRACKS: usize = 40;

/// Multiplicative deflation `M(u) = Π_w (1 + |u - w|_2^(-α))` over a set of
/// known roots and their negatives.
#[derive(Debug, Clone)]
pub struct Deflation {
    exponent: f64,
    points: Vec<LatticeSeq>,
}

impl Deflation {
    pub fn new(known: &SolutionSet, exponent: f64) -> Self {
        let mut points = Vec::with_capacity(2 * known.len());
        for m in known.iter() {
            points.push(m.u.clone());
            if m.u.values().iter().any(|v| *v != 0.0) {
                points.push(m.u.neg());
            }
        }
        Deflation { exponent, points }
    }

    pub fn factor(&self, u: &LatticeSeq) -> f64 {
        self.points
            .iter()
            .map(|w| 1.0 + u.sub(w).norm_l2().powf(-self.exponent))
            .product()
    }

    /// `∇ ln M(u)`.
    pub fn grad_ln(&self, u: &LatticeSeq) -> LatticeSeq {
        let mut g = LatticeSeq::zeros(u.window());
        for w in &self.points {
            let diff = u.sub(w);
            let d = diff.norm_l2();
            let da = d.powf(-self.exponent);
            let c = -self.exponent * da / (d * d * (1.0 + da));
            g = g.axpy(c, &diff);
        }
        g
    }
}

/// Diagnostics of a deflated solve.
#[derive(Debug, Clone)]
pub struct DeflatedTrace {
    pub deflated_iterations: usize,
    /// ∞-norm displacement caused by the undeflated Newton polish.
    pub polish_shift: f64,
    /// ∞-distance from the result to the known set modulo sign.
    pub distance_to_known: f64,
}

/// Newton on the deflated residual `M(u) r(u)` followed by an undeflated
/// polish. The result counts as converged only if it is a root and lies
/// farther than `SolutionSet::DEDUP_TOL` from every known solution.
pub fn deflated_solve(known: &SolutionSet, u0: &LatticeSeq, spec: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveResult> {
    deflated_solve_traced(known, u0, spec, cfg).map(|(r, _)| r)
}

pub fn deflated_solve_traced(
    known: &SolutionSet,
    u0: &LatticeSeq,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<(SolveResult, DeflatedTrace)> {
    if known.is_empty() {
        return Err(Error::Usage("deflated_solve needs at least one known solution".into()));
    }
    let defl = Deflation::new(known, cfg.deflation_exponent.unwrap_or(spec.p));
    let w = u0.window();
    let mut u = u0.clone();
    let mut r = residual(&u, spec);
    let mut m = defl.factor(&u);
    let mut log = Vec::new();
    let mut it = 0;
    while it < cfg.max_iter && norm_inf(&r) > cfg.residual_tol {
        let jac = jacobian(&u, spec, cfg.jacobian_cap);
        let neg_r: Vec<f64> = r.values().iter().map(|v| -v).collect();
        let Some(delta) = jac.solve(&neg_r) else { break };
        let delta = LatticeSeq::from_vec_unchecked(w, delta);
        let denom = 1.0 - defl.grad_ln(&u).dot(&delta);
        if !(denom.is_finite() && denom != 0.0) {
            break;
        }
        let step = delta.scaled(1.0 / denom);
        let merit0 = m * r.norm_l2();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = u.axpy(t, &step);
            if trial.is_finite() {
                let rt = residual(&trial, spec);
                let mt = defl.factor(&trial);
                if mt * rt.norm_l2() <= (1.0 - cfg.sufficient_decrease * t) * merit0 {
                    accepted = Some((trial, rt, mt));
                    break;
                }
            }
            t *= cfg.shrink;
        }
        let Some((next, rn, mn)) = accepted else { break };
        it += 1;
        u = next;
        r = rn;
        m = mn;
        log.push(IterationRecord {
            iteration: it,
            residual_inf_norm: norm_inf(&r),
            cerami_metric: (1.0 + norm_x(&u, &spec.coeffs, spec.p)) * r.norm_l2(),
            step: t * norm_inf(&step),
        });
    }
    let polished = newton_solve(&u, spec, cfg)?;
    let polish_shift = polished.u.dist_inf(&u);
    let distance = known.distance(&polished.u);
    log.extend(polished.log.iter().cloned().map(|mut rec| {
        rec.iteration += it;
        rec
    }));
    let mut res = SolveResult { iterations: it + polished.iterations, log, ..polished };
    if distance <= SolutionSet::DEDUP_TOL {
        res.converged = false;
    }
    Ok((res, DeflatedTrace { deflated_iterations: it, polish_shift, distance_to_known: distance }))
}
