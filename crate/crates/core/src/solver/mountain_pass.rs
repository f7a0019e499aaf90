use super::jacobian::metric;
use super::newton::newton_solve;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::lattice::{energy, norm_inf, residual, LatticeSeq, ProblemSpec, SolveResult};

/// Relative energy decrease over `STALL_WINDOW` iterations below which the
/// path is considered stagnant.
const STALL_REL: f64 = 1e-10;
const STALL_WINDOW: usize = 50;
/// Residual level at which the path maximum is handed to Newton.
const HANDOFF_RESIDUAL: f64 = 1e-3;
/// The path is reparametrized by arc length every this many moves.
const REPARAM_EVERY: usize = 25;
const MAX_BACKTRACKS: usize = 60;

/// One accepted move of the path maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    pub iteration: usize,
    pub index: usize,
    pub energy_before: f64,
    pub energy_after: f64,
    pub residual_inf_norm: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MountainPassTrace {
    pub steps: Vec<PathStep>,
    /// Newton hand-offs that were attempted.
    pub handoffs: usize,
}

fn energies(path: &[LatticeSeq], spec: &ProblemSpec) -> Result<Vec<f64>> {
    path.iter().map(|u| energy(u, spec).map(|e| e.total)).collect()
}

fn argmax(es: &[f64]) -> usize {
    es.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, be), (i, &e)| if e > be { (i, e) } else { (bi, be) })
        .0
}

/// Redistributes the interior points uniformly in arc length along the
/// piecewise-linear path.
fn reparametrize(path: &mut [LatticeSeq]) {
    let n = path.len();
    let mut cum = vec![0.0];
    for i in 1..n {
        cum.push(cum[i - 1] + path[i].sub(&path[i - 1]).norm_l2());
    }
    let total = cum[n - 1];
    if !(total > 0.0 && total.is_finite()) {
        return;
    }
    let old = path.to_vec();
    let mut seg = 0;
    for (i, slot) in path.iter_mut().enumerate().take(n - 1).skip(1) {
        let s = total * i as f64 / (n - 1) as f64;
        while seg + 1 < n - 1 && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let theta = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        *slot = old[seg].axpy(theta, &old[seg + 1].sub(&old[seg]));
    }
}

/// Mountain-pass search on the discretized segment from `u_low` to
/// `u_high`. The highest path point is moved along the preconditioned
/// descent direction with an Armijo search on `J`; once its residual is
/// small or the path stagnates it is refined by [`newton_solve`].
pub fn mountain_pass(u_low: &LatticeSeq, u_high: &LatticeSeq, spec: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveResult> {
    mountain_pass_traced(u_low, u_high, spec, cfg).map(|(r, _)| r)
}

pub fn mountain_pass_traced(
    u_low: &LatticeSeq,
    u_high: &LatticeSeq,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<(SolveResult, MountainPassTrace)> {
    let n = cfg.path_points;
    let dir = u_high.sub(u_low);
    let mut path: Vec<LatticeSeq> = (0..n).map(|i| u_low.axpy(i as f64 / (n - 1) as f64, &dir)).collect();
    let mut es = energies(&path, spec)?;
    let floor = es[0].max(es[n - 1]);
    let gram = metric(&spec.coeffs);
    let mut trace = MountainPassTrace::default();
    let mut handoff_tol = HANDOFF_RESIDUAL;
    let mut history: Vec<f64> = Vec::new();
    let mut best: Option<SolveResult> = None;

    for it in 0..cfg.path_max_iter {
        let i = argmax(&es);
        if i == 0 || i == n - 1 {
            return Err(if it == 0 {
                Error::NoPass(format!(
                    "energy along the segment peaks at an endpoint (J = {:.6e}); no barrier separates the endpoints",
                    es[i]
                ))
            } else {
                Error::PathCollapse
            });
        }
        let u = &path[i];
        let r = residual(u, spec);
        let rn = norm_inf(&r);
        history.push(es[i]);
        let stalled = history.len() > STALL_WINDOW && {
            let old = history[history.len() - 1 - STALL_WINDOW];
            old - es[i] <= STALL_REL * es[i].abs().max(1.0)
        };
        if rn <= handoff_tol || stalled {
            trace.handoffs += 1;
            let res = newton_solve(u, spec, cfg)?;
            if res.converged && res.energy > floor {
                return Ok((res, trace));
            }
            if best.as_ref().is_none_or(|b| res.residual_inf_norm < b.residual_inf_norm) {
                best = Some(res);
            }
            handoff_tol *= 0.1;
            history.clear();
        }
        let Some(d) = gram.solve(r.values()) else {
            break;
        };
        let d = LatticeSeq::from_vec_unchecked(u.window(), d);
        let slope = r.dot(&d);
        if !(slope > 0.0 && slope.is_finite()) {
            break;
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..MAX_BACKTRACKS {
            let trial = u.axpy(-t, &d);
            let e = energy(&trial, spec)?.total;
            if e <= es[i] - cfg.sufficient_decrease * t * slope {
                trace.steps.push(PathStep {
                    iteration: it,
                    index: i,
                    energy_before: es[i],
                    energy_after: e,
                    residual_inf_norm: rn,
                });
                path[i] = trial;
                es[i] = e;
                moved = true;
                break;
            }
            t *= cfg.shrink;
        }
        if !moved {
            // the maximum cannot descend further; let Newton decide
            trace.handoffs += 1;
            let res = newton_solve(&path[i], spec, cfg)?;
            if res.converged && res.energy > floor {
                return Ok((res, trace));
            }
            break;
        }
        if trace.steps.len() % REPARAM_EVERY == 0 {
            reparametrize(&mut path);
            es = energies(&path, spec)?;
        }
    }
    let i = argmax(&es);
    let res = match best {
        Some(b) => b,
        None => newton_solve(&path[i], spec, cfg)?,
    };
    let mut res = res;
    if res.energy <= floor {
        res.converged = false;
    }
    Ok((res, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{CoefficientField, Profile, Window};
    use crate::nonlinearity::{NonlinearitySpec, WeightConvention};

    fn reference(k: usize) -> ProblemSpec {
        let w = Window::new(k).unwrap();
        let coeffs =
            CoefficientField::new(w, Profile::Constant { value: 1.0 }, Profile::Polynomial { exponent: 2.0 }, None)
                .unwrap();
        let nl = NonlinearitySpec::example_log(2.0, 2.0, 2.0, WeightConvention::Shifted).unwrap();
        ProblemSpec::new(2.0, 1.0, coeffs, nl).unwrap()
    }

    #[test]
    fn reference_pass_and_mirror() {
        let spec = reference(50);
        let cfg = SolverConfig::default();
        let w = spec.window();
        let high = LatticeSeq::spike(w, 0, 10.0);
        let (res, trace) = mountain_pass_traced(&LatticeSeq::zeros(w), &high, &spec, &cfg).unwrap();
        assert!(res.converged && res.energy > 0.0, "{res:?}");
        assert!(res.residual_inf_norm <= 1e-8);
        assert!(trace.steps.iter().all(|s| s.energy_after < s.energy_before));
        let mirror = mountain_pass(&LatticeSeq::zeros(w), &high.neg(), &spec, &cfg).unwrap();
        assert!((mirror.energy - res.energy).abs() <= 1e-8);
        assert!(mirror.u.dist_inf(&res.u.neg()) <= 1e-8);
    }

    #[test]
    fn no_pass_without_nonlinearity() {
        let w = Window::new(5).unwrap();
        let spec = ProblemSpec::new(
            2.0,
            1.0,
            CoefficientField::constant(w, 1.0, 1.0).unwrap(),
            NonlinearitySpec::zero(2.0).unwrap(),
        )
        .unwrap();
        let err = mountain_pass(&LatticeSeq::zeros(w), &LatticeSeq::spike(w, 0, 10.0), &spec, &SolverConfig::default());
        assert!(matches!(err, Err(Error::NoPass(_))));
    }
}
