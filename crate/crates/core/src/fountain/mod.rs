//! Finite-window realization of the fountain geometry: the nested
//! subspaces `Y_n ⊂ X` and `Z_n ⊂ X`, the embedding constants `β_{q,n}`,
//! the radii `r_n < ρ_n` and sphere-sampled checks of the two geometric
//! conditions.
//!
//! The basis is fixed to normalized coordinate spikes `e_i = δ_{k_i}/‖δ_{k_i}‖`
//! in spiral order `k_1, k_2, ... = 0, 1, -1, 2, -2, ...`, so `Y_n` is spanned
//! by the first `n` sites and `Z_n` by sites `n..=2K+1` (they share `e_n`).
//! Radii can be astronomically large; `ρ_n` is carried as `ln ρ_n`.

mod conditions;
mod extremal;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{norm_x, norm_x_pow, CoefficientField, LatticeSeq, ProblemSpec, Window};

pub use conditions::{
    rho_n_compute, threshold_search, verify_condition_i, verify_condition_ii, ConditionIReport, ConditionIiReport,
    RhoEstimate,
};
pub use extremal::{beta_estimate, beta_profile, c_n_estimate, c_n_profile, BetaEstimate};

/// Spike basis in spiral order over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSplit {
    window: Window,
    p: f64,
    order: Vec<i64>,
    /// `‖δ_{k_i}‖_X`.
    spike_norms: Vec<f64>,
}

impl BasisSplit {
    pub fn new(coeffs: &CoefficientField, p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::Domain(format!("p must be > 1, got {p}")));
        }
        let window = coeffs.window();
        let k = window.half_width() as i64;
        let order: Vec<i64> = std::iter::once(0).chain((1..=k).flat_map(|j| [j, -j])).collect();
        let spike_norms = order.iter().map(|&s| norm_x(&LatticeSeq::spike(window, s, 1.0), coeffs, p)).collect();
        Ok(BasisSplit { window, p, order, spike_norms })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `2K + 1`.
    pub fn dim(&self) -> usize {
        self.order.len()
    }

    /// Site `k_i` of the basis vector `e_i`, `i` starting at 1.
    pub fn site(&self, i: usize) -> i64 {
        self.order[i - 1]
    }

    /// The normalized spike `e_i`, `i` starting at 1.
    pub fn basis_vector(&self, i: usize) -> LatticeSeq {
        LatticeSeq::spike(self.window, self.order[i - 1], 1.0 / self.spike_norms[i - 1])
    }

    /// Sites spanning `Y_n`.
    pub fn y_sites(&self, n: usize) -> &[i64] {
        self.check(n);
        &self.order[..n]
    }

    /// Sites spanning `Z_n`.
    pub fn z_sites(&self, n: usize) -> &[i64] {
        self.check(n);
        &self.order[n - 1..]
    }

    /// Largest `|k|` in the support of `Y_n`; every point of the unit sphere
    /// of `Y_n` vanishes beyond it.
    pub fn h_n(&self, n: usize) -> i64 {
        self.y_sites(n).iter().map(|k| k.abs()).max().unwrap_or(0)
    }

    fn check(&self, n: usize) {
        assert!((1..=self.dim()).contains(&n), "n = {n} outside 1..={}", self.dim());
    }
}

/// Uniform random direction on `sites` (independent standard normals),
/// scaled to `‖u‖_X = 1`.
pub(crate) fn sphere_direction(
    window: Window,
    sites: &[i64],
    coeffs: &CoefficientField,
    p: f64,
    rng: &mut ChaCha8Rng,
) -> LatticeSeq {
    loop {
        let mut vals = vec![0.0; window.len()];
        for &k in sites {
            let z: f64 = StandardNormal.sample(rng);
            vals[window.offset(k).expect("site inside window")] = z;
        }
        let u = LatticeSeq::from_vec_unchecked(window, vals);
        let nx = norm_x_pow(&u, coeffs, p).powf(1.0 / p);
        if nx > 0.0 && nx.is_finite() {
            return u.scaled(1.0 / nx);
        }
    }
}

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `((1/2p - λ d β_p^p)/(λ d β_q^q))^(1/(q-p))`, or `None` when the
/// numerator is not positive (`n` below the feasibility threshold).
pub fn r_n_compute(d: f64, q: f64, lambda: f64, p: f64, beta_p: f64, beta_q: f64) -> Result<Option<f64>> {
    if !(d > 0.0) || !(q > p) || !(p > 1.0) || !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "r_n needs d > 0, q > p > 1, lambda > 0 (d = {d}, q = {q}, p = {p}, lambda = {lambda})"
        )));
    }
    let num = 1.0 / (2.0 * p) - lambda * d * beta_p.powf(p);
    if !(num > 0.0) {
        return Ok(None);
    }
    Ok(Some((num / (lambda * d * beta_q.powf(q))).powf(1.0 / (q - p))))
}

/// `(1/p) r^p - λ d (β_p^p r^p + β_q^q r^q)`, the lower bound on `J_λ` over
/// the sphere of radius `r` in `Z_n`; equals `r^p/(2p)` at `r = r_n`.
pub fn sphere_lower_bound(d: f64, q: f64, lambda: f64, p: f64, beta_p: f64, beta_q: f64, r: f64) -> f64 {
    r.powf(p) / p - lambda * d * (beta_p.powf(p) * r.powf(p) + beta_q.powf(q) * r.powf(q))
}

/// Knobs of the fountain table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FountainConfig {
    /// Random starts per `β` maximization (spike and warm starts come on top).
    pub beta_starts: usize,
    /// Sphere samples per condition check.
    pub samples: usize,
    /// Samples used to validate each `C_n`.
    pub c_n_samples: usize,
    pub seed: u64,
}

impl Default for FountainConfig {
    fn default() -> Self {
        FountainConfig { beta_starts: 4, samples: 1000, c_n_samples: 10_000, seed: 0 }
    }
}

/// One row of the fountain table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FountainData {
    pub n: usize,
    pub beta_p: f64,
    pub beta_q: f64,
    /// `None` below the feasibility threshold.
    pub r_n: Option<f64>,
    pub c_n: f64,
    pub h_n: i64,
    pub ln_t: Option<f64>,
    pub ln_rho_n: Option<f64>,
    /// `r_n^p / (2p)`.
    pub a_n_bound: Option<f64>,
    /// Sampled maximum of `J_λ / ρ_n^p` on the `Y_n` sphere.
    pub b_n_scaled: Option<f64>,
    pub condition_i: Option<ConditionIReport>,
    pub condition_ii: Option<ConditionIiReport>,
    pub note: Option<String>,
}

/// Full table for `n = 1..=2K+1`.
pub fn fountain_table(spec: &ProblemSpec, d: f64, q: f64, cfg: &FountainConfig) -> Result<Vec<FountainData>> {
    let split = BasisSplit::new(&spec.coeffs, spec.p)?;
    let bp = beta_profile(&split, &spec.coeffs, spec.p, cfg.beta_starts, cfg.seed)?;
    let bq = beta_profile(&split, &spec.coeffs, q, cfg.beta_starts, cfg.seed ^ 0x9e37)?;
    let cs = c_n_profile(&split, &spec.coeffs, spec.lambda, cfg.c_n_samples, cfg.seed)?;
    let mut rows = Vec::with_capacity(split.dim());
    for n in 1..=split.dim() {
        let (beta_p, beta_q) = (bp[n - 1].value, bq[n - 1].value);
        let r_n = r_n_compute(d, q, spec.lambda, spec.p, beta_p, beta_q)?;
        let c_n = cs[n - 1];
        let h_n = split.h_n(n);
        let mut row = FountainData {
            n,
            beta_p,
            beta_q,
            r_n,
            c_n,
            h_n,
            ln_t: None,
            ln_rho_n: None,
            a_n_bound: r_n.map(|r| r.powf(spec.p) / (2.0 * spec.p)),
            b_n_scaled: None,
            condition_i: None,
            condition_ii: None,
            note: None,
        };
        let Some(r) = r_n else {
            row.note = Some("infeasible: 1/(2p) <= lambda d beta_p^p".into());
            rows.push(row);
            continue;
        };
        row.condition_i = Some(verify_condition_i(&split, spec, n, d, r, cfg.samples, cfg.seed.wrapping_add(n as u64))?);
        match rho_n_compute(spec, c_n, r, h_n) {
            Ok(est) => {
                let rep = verify_condition_ii(&split, spec, n, est.ln_rho, cfg.samples, cfg.seed.wrapping_add(n as u64))?;
                row.ln_t = Some(est.ln_t);
                row.ln_rho_n = Some(est.ln_rho);
                row.b_n_scaled = Some(rep.max_scaled_energy);
                row.condition_ii = Some(rep);
            }
            Err(e @ Error::WeakSuperlinearity { .. }) => row.note = Some(e.to_string()),
            Err(e) => return Err(e),
        }
        rows.push(row);
    }
    Ok(rows)
}
