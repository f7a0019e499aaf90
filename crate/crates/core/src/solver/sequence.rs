use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::continuation::window_continuation;
use super::deflation::deflated_solve;
use super::mountain_pass::mountain_pass;
use super::newton::newton_solve;
use super::set::SolutionSet;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::lattice::{energy, norm_inf, residual, tail_mass, tail_threshold, LatticeSeq, ProblemSpec, SolveResult, Window};

/// Relative gap required between consecutive energy levels.
pub const LEVEL_TOL: f64 = 1e-8;
/// Windows with at most this many sites also get all sign-pattern starts.
const PATTERN_SITES: usize = 7;
const BUMP_WIDTHS: [f64; 2] = [1.0, 2.0];

/// Outcome of the acceptance tests for one candidate solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceCheck {
    pub energy: f64,
    /// Independently re-evaluated residual.
    pub residual_inf_norm: f64,
    pub residual_ok: bool,
    /// `max |u(k)|` over `|k| >= floor(0.8K)`.
    pub tail_max: f64,
    pub tail_mass: f64,
    pub tail_ok: bool,
    pub continuation_k: usize,
    pub drift: f64,
    pub continuation_converged: bool,
    pub boundary_artifact: bool,
    pub accepted: bool,
}

/// Residual, tail and window-continuation acceptance of a candidate.
pub fn acceptance_check(res: &SolveResult, spec: &ProblemSpec, cfg: &SolverConfig) -> Result<AcceptanceCheck> {
    let r = norm_inf(&residual(&res.u, spec));
    let residual_ok = r <= cfg.residual_tol;
    let h = tail_threshold(res.u.window());
    let tail_max = res
        .u
        .iter()
        .filter(|(k, _)| k.unsigned_abs() as usize >= h)
        .fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
    let tm = tail_mass(&res.u, h, spec.p);
    let tail_ok = tail_max < cfg.tail_tol && tm < cfg.tail_tol;
    let k_new = res.u.window().half_width() + cfg.continuation_extra.max(1);
    let cont = window_continuation(res, spec, k_new, cfg)?;
    let accepted = residual_ok
        && tail_ok
        && cont.result.converged
        && cont.drift < cfg.drift_tol
        && !cont.boundary_artifact;
    Ok(AcceptanceCheck {
        energy: energy(&res.u, spec)?.total,
        residual_inf_norm: r,
        residual_ok,
        tail_max,
        tail_mass: tm,
        tail_ok,
        continuation_k: k_new,
        drift: cont.drift,
        continuation_converged: cont.result.converged,
        boundary_artifact: cont.boundary_artifact,
        accepted,
    })
}

fn bump(window: Window, center: i64, width: f64, c: f64) -> LatticeSeq {
    let vals = window
        .sites()
        .map(|k| {
            let x = (k - center) as f64 / width;
            c * (-0.5 * x * x).exp()
        })
        .collect();
    LatticeSeq::from_vec_unchecked(window, vals)
}

/// Deterministic starting profiles, ordered by support radius first and
/// amplitude second: spikes `c·δ_{±r}`, symmetric and antisymmetric pairs
/// `c(δ_r ± δ_{-r})`, Gaussian bumps centred at `±r`, sign patterns on
/// very small windows, then `cfg.random_starts` seeded random profiles.
pub fn default_starts(window: Window, cfg: &SolverConfig) -> Vec<LatticeSeq> {
    let ladder = cfg.amplitude_ladder();
    let mut out = Vec::new();
    for r in 0..=window.half_width() as i64 {
        for &c in &ladder {
            out.push(LatticeSeq::spike(window, r, c));
            if r > 0 {
                out.push(LatticeSeq::spike(window, -r, c));
                let pair = LatticeSeq::spike(window, r, c);
                out.push(pair.axpy(1.0, &LatticeSeq::spike(window, -r, c)));
                out.push(pair.axpy(-1.0, &LatticeSeq::spike(window, -r, c)));
            }
            for width in BUMP_WIDTHS {
                out.push(bump(window, r, width, c));
                if r > 0 {
                    out.push(bump(window, -r, width, c));
                }
            }
        }
    }
    let n = window.len();
    if n <= PATTERN_SITES {
        for code in 1..3usize.pow(n as u32) {
            let mut digits = Vec::with_capacity(n);
            let mut x = code;
            for _ in 0..n {
                digits.push((x % 3) as f64 - 1.0);
                x /= 3;
            }
            // one representative per sign pair
            if digits.iter().find(|d| **d != 0.0).is_some_and(|d| *d < 0.0) {
                continue;
            }
            for &c in &ladder {
                out.push(LatticeSeq::from_vec_unchecked(window, digits.iter().map(|d| c * d).collect()));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..cfg.random_starts {
        let c = ladder[i % ladder.len()];
        let vals = (0..n).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); c * z }).collect::<Vec<f64>>();
        out.push(LatticeSeq::from_vec_unchecked(window, vals));
    }
    out
}

/// Solves from `start`, then keeps deflating the roots found so far.
/// Newly found roots are inserted into `known` and returned.
fn explore(start: &LatticeSeq, spec: &ProblemSpec, cfg: &SolverConfig, known: &mut SolutionSet) -> Result<Vec<SolveResult>> {
    let mut found = Vec::new();
    let first = newton_solve(start, spec, cfg)?;
    if first.converged && known.insert(first.clone()) {
        found.push(first);
    }
    for _ in 0..cfg.deflations_per_start {
        let res = deflated_solve(known, start, spec, cfg)?;
        if !res.converged || !known.insert(res.clone()) {
            break;
        }
        found.push(res);
    }
    Ok(found)
}

fn zero_root(spec: &ProblemSpec, cfg: &SolverConfig) -> Result<Option<SolveResult>> {
    let z = newton_solve(&LatticeSeq::zeros(spec.window()), spec, cfg)?;
    Ok((z.converged && z.iterations == 0).then_some(z))
}

/// All critical points reachable from `starts` by Newton and deflation,
/// including the trivial one, deduplicated modulo sign.
pub fn critical_point_census(spec: &ProblemSpec, cfg: &SolverConfig, starts: &[LatticeSeq]) -> Result<SolutionSet> {
    cfg.validate()?;
    let mut known = SolutionSet::new();
    if let Some(z) = zero_root(spec, cfg)? {
        known.insert(z);
    }
    for s in starts {
        explore(s, spec, cfg, &mut known)?;
    }
    Ok(known)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceOutcome {
    /// Accepted solutions with strictly increasing energy.
    pub solutions: SolutionSet,
    /// Every accepted nontrivial solution, including energy ties.
    pub accepted: SolutionSet,
    /// Acceptance record of each candidate, in discovery order.
    pub checks: Vec<AcceptanceCheck>,
    pub starts_used: usize,
    pub complete: bool,
    pub warning: Option<String>,
}

/// Multi-start campaign for `n_target` nontrivial solutions with strictly
/// increasing energy: one mountain pass from 0 to the first ladder spike with
/// negative energy, then Newton and deflated solves from [`default_starts`].
pub fn solution_sequence(spec: &ProblemSpec, cfg: &SolverConfig, n_target: usize) -> Result<SequenceOutcome> {
    cfg.validate()?;
    if n_target == 0 {
        return Err(Error::Usage("n_target must be positive".into()));
    }
    let window = spec.window();
    let mut known = SolutionSet::new();
    if let Some(z) = zero_root(spec, cfg)? {
        known.insert(z);
    }
    let mut accepted = SolutionSet::new();
    let mut checks = Vec::new();

    let consider = |res: SolveResult, accepted: &mut SolutionSet, checks: &mut Vec<AcceptanceCheck>| -> Result<()> {
        if norm_inf(&res.u) <= SolutionSet::DEDUP_TOL || accepted.contains(&res.u) {
            return Ok(());
        }
        let check = acceptance_check(&res, spec, cfg)?;
        if check.accepted {
            accepted.insert(res);
        }
        checks.push(check);
        Ok(())
    };
    let done = |accepted: &SolutionSet| accepted.strict_levels(LEVEL_TOL).len() >= n_target;

    let high = cfg
        .amplitude_ladder()
        .into_iter()
        .map(|c| LatticeSeq::spike(window, 0, c))
        .find(|u| energy(u, spec).is_ok_and(|e| e.total < 0.0));
    if let Some(high) = high {
        match mountain_pass(&LatticeSeq::zeros(window), &high, spec, cfg) {
            Ok(res) if res.converged => {
                if known.insert(res.clone()) {
                    consider(res, &mut accepted, &mut checks)?;
                }
            }
            Ok(_) | Err(Error::NoPass(_)) | Err(Error::PathCollapse) => {}
            Err(e) => return Err(e),
        }
    }

    let starts = default_starts(window, cfg);
    let mut used = 0;
    for s in &starts {
        if done(&accepted) {
            break;
        }
        used += 1;
        for res in explore(s, spec, cfg, &mut known)? {
            consider(res, &mut accepted, &mut checks)?;
        }
    }
    let solutions = accepted.strict_levels(LEVEL_TOL);
    let complete = solutions.len() >= n_target;
    let warning = (!complete).then(|| {
        format!(
            "start budget exhausted: {} of {n_target} strictly increasing levels found after {used} starts",
            solutions.len()
        )
    });
    let solutions = SolutionSet::from_iter(solutions.into_vec().into_iter().take(n_target));
    Ok(SequenceOutcome { solutions, accepted, checks, starts_used: used, complete, warning })
}
