//! Radii and sphere-sampled checks of the two geometric conditions.

use serde::{Deserialize, Serialize};

use super::{rng, sphere_direction, BasisSplit};
use crate::error::{Error, Result};
use crate::lattice::{compensated_sum, energy, LatticeSeq, ProblemSpec};
use crate::nonlinearity::NonlinearitySpec;

/// Absolute slack of both sampled inequalities.
const SLACK: f64 = 1e-9;
/// Samples per decade when testing `F ≥ 2C|t|^p` on `(T, 10T]`.
const THRESHOLD_SAMPLES: usize = 8;
const LN_T_MIN: f64 = -13.815510557964274; // ln 1e-6
const LN_T_MAX: f64 = 1e12;
const RHO_FACTOR: f64 = 1.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionIReport {
    pub n: usize,
    pub radius: f64,
    /// `r^p / (2p)`.
    pub bound: f64,
    pub samples: usize,
    pub min_energy: f64,
    pub violations: usize,
    /// First violating sample.
    pub witness: Option<LatticeSeq>,
}

impl ConditionIReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Samples the sphere `‖u‖ = r` in `Z_n` and checks `J_λ(u) >= r^p/(2p) - 1e-9`.
pub fn verify_condition_i(
    split: &BasisSplit,
    spec: &ProblemSpec,
    n: usize,
    d: f64,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<ConditionIReport> {
    if !(r > 0.0 && r.is_finite()) || !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("condition (i) needs r > 0 and d > 0, got r = {r}, d = {d}")));
    }
    let p = spec.p;
    let bound = r.powf(p) / (2.0 * p);
    let mut g = rng(seed, 2 << 32 | n as u64);
    let mut rep = ConditionIReport { n, radius: r, bound, samples, min_energy: f64::INFINITY, violations: 0, witness: None };
    for _ in 0..samples {
        let u = sphere_direction(split.window(), split.z_sites(n), &spec.coeffs, p, &mut g).scaled(r);
        let j = energy(&u, spec)?.total;
        rep.min_energy = rep.min_energy.min(j);
        if !(j >= bound - SLACK) {
            rep.violations += 1;
            rep.witness.get_or_insert(u);
        }
    }
    Ok(rep)
}

fn threshold_holds(nl: &NonlinearitySpec, c_n: f64, h: i64, ln_t: f64) -> Result<bool> {
    let step = std::f64::consts::LN_10 / THRESHOLD_SAMPLES as f64;
    for k in -h..=h {
        for j in 0..=THRESHOLD_SAMPLES {
            if nl.primitive_over_power(k, ln_t + j as f64 * step)? < 2.0 * c_n {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Smallest `ln T` (to relative precision 1e-12) such that
/// `F(k,t) >= 2 C_n |t|^p` at the sampled `|k| <= h`, `t ∈ [T, 10T]`.
/// Only `t > 0` is sampled; `F` is even under (H1).
pub fn threshold_search(nl: &NonlinearitySpec, c_n: f64, h: i64) -> Result<f64> {
    if threshold_holds(nl, c_n, h, LN_T_MIN)? {
        return Ok(LN_T_MIN);
    }
    let mut lo = LN_T_MIN;
    let mut hi = LN_T_MIN;
    loop {
        hi = if hi < 1.0 { hi + std::f64::consts::LN_10 } else { 2.0 * hi };
        if hi > LN_T_MAX {
            return Err(Error::WeakSuperlinearity { h, ln_t_max: LN_T_MAX });
        }
        if threshold_holds(nl, c_n, h, hi)? {
            break;
        }
        lo = hi;
    }
    while hi - lo > 1e-12 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if threshold_holds(nl, c_n, h, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub ln_t: f64,
    pub ln_rho: f64,
}

impl RhoEstimate {
    /// `ρ_n`, infinite when it overflows `f64`.
    pub fn rho(&self) -> f64 {
        self.ln_rho.exp()
    }
}

/// `ρ_n = 1.01 · max{(λ p C_n)^(1/p) T, r_n}` in log form.
pub fn rho_n_compute(spec: &ProblemSpec, c_n: f64, r_n: f64, h_n: i64) -> Result<RhoEstimate> {
    let ln_t = threshold_search(&spec.nonlinearity, c_n, h_n)?;
    let p = spec.p;
    let a = (spec.lambda * p * c_n).ln() / p + ln_t;
    Ok(RhoEstimate { ln_t, ln_rho: RHO_FACTOR.ln() + a.max(r_n.ln()) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionIiReport {
    pub n: usize,
    pub ln_rho: f64,
    pub samples: usize,
    /// Largest sampled `J_λ(u)/ρ^p`.
    pub max_scaled_energy: f64,
    pub violations: usize,
    /// Samples that also satisfy `J_λ(u) <= -(1/p)‖u‖^p`.
    pub stronger: usize,
    /// Direction (unit norm) of the first violating sample.
    pub witness: Option<LatticeSeq>,
}

impl ConditionIiReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// `J_λ(ρ v)/ρ^p` for `‖v‖ = 1`, without forming `ρ`.
pub fn scaled_energy(spec: &ProblemSpec, v: &LatticeSeq, ln_rho: f64) -> Result<f64> {
    let p = spec.p;
    let terms = v
        .iter()
        .filter(|(_, x)| *x != 0.0)
        .map(|(k, x)| Ok(x.abs().powf(p) * spec.nonlinearity.primitive_over_power(k, ln_rho + x.abs().ln())?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(1.0 / p - spec.lambda * compensated_sum(terms))
}

/// Samples the sphere `‖u‖ = ρ` in `Y_n` and checks `J_λ(u) <= 1e-9`.
pub fn verify_condition_ii(
    split: &BasisSplit,
    spec: &ProblemSpec,
    n: usize,
    ln_rho: f64,
    samples: usize,
    seed: u64,
) -> Result<ConditionIiReport> {
    let p = spec.p;
    let mut g = rng(seed, 3 << 32 | n as u64);
    let mut rep = ConditionIiReport {
        n,
        ln_rho,
        samples,
        max_scaled_energy: f64::NEG_INFINITY,
        violations: 0,
        stronger: 0,
        witness: None,
    };
    for _ in 0..samples {
        let v = sphere_direction(split.window(), split.y_sites(n), &spec.coeffs, p, &mut g);
        let s = scaled_energy(spec, &v, ln_rho)?;
        rep.max_scaled_energy = rep.max_scaled_energy.max(s);
        if s > 0.0 && p * ln_rho + s.ln() > SLACK.ln() {
            rep.violations += 1;
            rep.witness.get_or_insert(v);
        }
        if s <= -1.0 / p {
            rep.stronger += 1;
        }
    }
    Ok(rep)
}
