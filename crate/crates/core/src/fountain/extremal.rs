//! Heuristic suprema: `β_{q,n}` by preconditioned projected ascent and
//! `C_n` by sign-pattern search.

use serde::{Deserialize, Serialize};

use super::{rng, sphere_direction, BasisSplit};
use crate::error::{Error, Result};
use crate::lattice::{norm_inf, norm_lp, norm_x_pow, phi, CoefficientField, LatticeSeq, Window};
use crate::solver::Tridiagonal;

const ASCENT_MAX_ITER: usize = 400;
const ASCENT_REL_TOL: f64 = 1e-14;
const MAX_BACKTRACKS: usize = 50;
/// Best spike starts kept for the ascent.
const SPIKE_STARTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub n: usize,
    pub q: f64,
    /// Best `‖u‖_q / ‖u‖_X` found; a lower bound on `β_{q,n}`.
    pub value: f64,
    /// Maximizer, normalized to `‖u‖_X = 1`.
    pub maximizer: LatticeSeq,
}

/// `∇(‖u‖^p)/p`.
fn norm_grad(u: &LatticeSeq, coeffs: &CoefficientField, p: f64) -> Vec<f64> {
    let v = u.values();
    let n = v.len();
    let a = coeffs.a_slice();
    let b = coeffs.b_slice();
    let flux: Vec<f64> = (0..=n)
        .map(|i| {
            let hi = if i < n { v[i] } else { 0.0 };
            let lo = if i > 0 { v[i - 1] } else { 0.0 };
            a[i] * phi(p, hi - lo)
        })
        .collect();
    (0..n).map(|i| flux[i] - flux[i + 1] + b[i] * phi(p, v[i])).collect()
}

/// Sorted window offsets of `sites`.
fn offsets(window: Window, sites: &[i64]) -> Vec<usize> {
    let mut idx: Vec<usize> = sites.iter().map(|&k| window.offset(k).expect("site inside window")).collect();
    idx.sort_unstable();
    idx
}

/// The `p = 2` Gram matrix restricted to coordinates `idx` (sorted); still
/// tridiagonal because only neighbouring sites couple.
fn restricted_metric(coeffs: &CoefficientField, idx: &[usize]) -> Tridiagonal {
    let a = coeffs.a_slice();
    let b = coeffs.b_slice();
    let diag = idx.iter().map(|&i| a[i] + a[i + 1] + b[i]).collect();
    let off: Vec<f64> = idx.windows(2).map(|w| if w[1] == w[0] + 1 { -a[w[1]] } else { 0.0 }).collect();
    Tridiagonal { sub: off.clone(), diag, sup: off }
}

fn ln_ratio(u: &LatticeSeq, coeffs: &CoefficientField, p: f64, q: f64) -> f64 {
    norm_lp(u, q).ln() - norm_x_pow(u, coeffs, p).ln() / p
}

fn normalize(u: &LatticeSeq, coeffs: &CoefficientField, p: f64) -> LatticeSeq {
    u.scaled(1.0 / norm_x_pow(u, coeffs, p).powf(1.0 / p))
}

/// Preconditioned gradient ascent of `ln(‖u‖_q/‖u‖_X)` within the
/// coordinate subspace `idx`.
fn ascend(u0: &LatticeSeq, coeffs: &CoefficientField, p: f64, q: f64, idx: &[usize], pre: &Tridiagonal) -> (f64, LatticeSeq) {
    let window = u0.window();
    let mut u = normalize(u0, coeffs, p);
    let mut val = ln_ratio(&u, coeffs, p, q);
    let mut t = 1.0_f64;
    for _ in 0..ASCENT_MAX_ITER {
        let sq: f64 = u.values().iter().map(|v| v.abs().powf(q)).sum();
        let nx = norm_x_pow(&u, coeffs, p);
        let lg = norm_grad(&u, coeffs, p);
        let g: Vec<f64> = idx.iter().map(|&i| phi(q, u.values()[i]) / sq - lg[i] / nx).collect();
        let Some(d) = pre.solve(&g) else { break };
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if !(slope > 0.0 && slope.is_finite()) {
            break;
        }
        let mut dir = vec![0.0; window.len()];
        for (j, &i) in idx.iter().enumerate() {
            dir[i] = d[j];
        }
        let dir = LatticeSeq::from_vec_unchecked(window, dir);
        t = (2.0 * t).min(1e6);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = u.axpy(t, &dir);
            let v = ln_ratio(&trial, coeffs, p, q);
            if v.is_finite() && v >= val + 1e-4 * t * slope {
                accepted = Some((v, trial));
                break;
            }
            t *= 0.5;
        }
        let Some((v, trial)) = accepted else { break };
        let gain = v - val;
        u = normalize(&trial, coeffs, p);
        val = v;
        if gain <= ASCENT_REL_TOL * val.abs().max(1.0) {
            break;
        }
    }
    (norm_lp(&u, q) / norm_x_pow(&u, coeffs, p).powf(1.0 / p), u)
}

fn check_q(p: f64, q: f64) -> Result<()> {
    if !(q >= p) {
        return Err(Error::InvalidParameter(format!("beta estimate needs q >= p, got q = {q} < p = {p}")));
    }
    Ok(())
}

fn estimate_with(
    split: &BasisSplit,
    coeffs: &CoefficientField,
    n: usize,
    q: f64,
    starts: usize,
    seed: u64,
    warm: Option<&LatticeSeq>,
) -> BetaEstimate {
    let p = split.p();
    let window = split.window();
    let sites = split.z_sites(n);
    let idx = offsets(window, sites);
    let pre = restricted_metric(coeffs, &idx);

    let mut spikes: Vec<(f64, LatticeSeq)> = sites
        .iter()
        .map(|&k| {
            let e = normalize(&LatticeSeq::spike(window, k, 1.0), coeffs, p);
            (norm_lp(&e, q), e)
        })
        .collect();
    spikes.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = spikes[0].clone();
    let mut candidates: Vec<LatticeSeq> = spikes.into_iter().take(SPIKE_STARTS).map(|s| s.1).collect();
    if let Some(w) = warm {
        candidates.push(w.clone());
    }
    let mut r = rng(seed, n as u64);
    for _ in 0..starts {
        candidates.push(sphere_direction(window, sites, coeffs, p, &mut r));
    }
    if sites.len() > 1 {
        for c in &candidates {
            let (v, u) = ascend(c, coeffs, p, q, &idx, &pre);
            if v > best.0 {
                best = (v, u);
            }
        }
    }
    BetaEstimate { n, q, value: best.0, maximizer: best.1 }
}

/// Best `‖u‖_q/‖u‖_X` over `Z_n` from the three strongest spikes plus
/// `starts` seeded random directions.
pub fn beta_estimate(split: &BasisSplit, coeffs: &CoefficientField, n: usize, q: f64, starts: usize, seed: u64) -> Result<BetaEstimate> {
    check_q(split.p(), q)?;
    Ok(estimate_with(split, coeffs, n, q, starts, seed, None))
}

/// Estimates for all `n`, computed from `n = 2K+1` downwards. Each
/// maximization is warm-started from the previous maximizer (which lies in
/// the larger space) and the running maximum is kept, so the profile is
/// nonincreasing in `n` by construction and still a lower bound.
pub fn beta_profile(split: &BasisSplit, coeffs: &CoefficientField, q: f64, starts: usize, seed: u64) -> Result<Vec<BetaEstimate>> {
    check_q(split.p(), q)?;
    let dim = split.dim();
    let mut out: Vec<BetaEstimate> = Vec::with_capacity(dim);
    for n in (1..=dim).rev() {
        let prev = out.last();
        let mut est = estimate_with(split, coeffs, n, q, starts, seed, prev.map(|e| &e.maximizer));
        if let Some(prev) = prev {
            if prev.value > est.value {
                est.value = prev.value;
                est.maximizer = prev.maximizer.clone();
            }
        }
        out.push(est);
    }
    out.reverse();
    Ok(out)
}

/// `‖s‖^p` for the sign pattern `s` on `idx`, i.e. `‖u‖^p/‖u‖_∞^p` at a
/// vertex of the cube.
fn pattern_value(window: Window, idx: &[usize], signs: &[f64], coeffs: &CoefficientField, p: f64) -> f64 {
    let mut v = vec![0.0; window.len()];
    for (&i, &s) in idx.iter().zip(signs) {
        v[i] = s;
    }
    norm_x_pow(&LatticeSeq::from_vec_unchecked(window, v), coeffs, p)
}

/// Single-flip local search over sign patterns on `idx` from `signs`.
fn flip_search(window: Window, idx: &[usize], mut signs: Vec<f64>, coeffs: &CoefficientField, p: f64) -> (f64, Vec<f64>) {
    let mut best = pattern_value(window, idx, &signs, coeffs, p);
    loop {
        let mut improved = false;
        for j in 0..signs.len() {
            signs[j] = -signs[j];
            let v = pattern_value(window, idx, &signs, coeffs, p);
            if v > best * (1.0 + 1e-15) {
                best = v;
                improved = true;
            } else {
                signs[j] = -signs[j];
            }
        }
        if !improved {
            return (best, signs);
        }
    }
}

fn validate_c(split: &BasisSplit, coeffs: &CoefficientField, n: usize, lambda: f64, c: f64, samples: usize, seed: u64) -> bool {
    let p = split.p();
    let mut r = rng(seed, 1 << 32 | n as u64);
    (0..samples).all(|_| {
        let u = sphere_direction(split.window(), split.y_sites(n), coeffs, p, &mut r);
        norm_x_pow(&u, coeffs, p) / p <= lambda * c * norm_inf(&u).powf(p) * (1.0 + 1e-12)
    })
}

/// `C_n` with `(1/p)‖u‖^p <= λ C_n ‖u‖_∞^p` on `Y_n`. The ratio is convex
/// on the cube `‖u‖_∞ <= 1`, so its supremum sits at a sign pattern; the
/// search starts from the alternating and the constant pattern. The value
/// is validated on `samples` random points and doubled until it holds.
pub fn c_n_estimate(split: &BasisSplit, coeffs: &CoefficientField, n: usize, lambda: f64, samples: usize, seed: u64) -> Result<f64> {
    c_n_from(split, coeffs, n, lambda, samples, seed, None).map(|(c, _)| c)
}

fn c_n_from(
    split: &BasisSplit,
    coeffs: &CoefficientField,
    n: usize,
    lambda: f64,
    samples: usize,
    seed: u64,
    warm: Option<&[(usize, f64)]>,
) -> Result<(f64, Vec<(usize, f64)>)> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    let p = split.p();
    let window = split.window();
    let idx = offsets(window, split.y_sites(n));
    let alternating: Vec<f64> = (0..idx.len()).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let mut starts = vec![alternating, vec![1.0; idx.len()]];
    if let Some(w) = warm {
        starts.push(idx.iter().map(|i| w.iter().find(|(j, _)| j == i).map_or(1.0, |x| x.1)).collect());
    }
    let (best, signs) = starts
        .into_iter()
        .map(|s| flip_search(window, &idx, s, coeffs, p))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("nonempty");
    let mut c = best / (p * lambda);
    while !validate_c(split, coeffs, n, lambda, c, samples, seed) {
        c *= 2.0;
    }
    Ok((c, idx.into_iter().zip(signs).collect()))
}

/// `C_n` for all `n`, chained upwards and kept nondecreasing.
pub fn c_n_profile(split: &BasisSplit, coeffs: &CoefficientField, lambda: f64, samples: usize, seed: u64) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(split.dim());
    let mut warm: Option<Vec<(usize, f64)>> = None;
    for n in 1..=split.dim() {
        let (c, signs) = c_n_from(split, coeffs, n, lambda, samples, seed, warm.as_deref())?;
        out.push(out.last().map_or(c, |prev: &f64| prev.max(c)));
        warm = Some(signs);
    }
    Ok(out)
}
