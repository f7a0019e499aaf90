//! Sampled checks of the structural hypotheses on `b` and `f`.
//!
//! Verdicts are three-valued. A refutation always carries a concrete sample
//! point that can be re-evaluated; "satisfied on samples" is evidence only.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::NonlinearitySpec;
use crate::error::{Error, Result};
use crate::lattice::{compensated_sum, CoefficientField};

/// Pointwise violation tolerance (scaled by the size of the compared terms where roundoff grows with them).
const TOL: f64 = 1e-9;
/// `|t|` from which the superlinear-growth conditions are tested.
const T_FAR: f64 = 1e6;
/// Near-origin threshold for (H3) refutation and the ratio bound it uses.
const T_NEAR: f64 = 1e-6;
const H3_REFUTE_RATIO: f64 = 0.1;
const H3_ACCEPT_RATIO: f64 = 1e-3;
/// `𝓕` values at or below this (same relative scaling) are excluded from the σ-ratio.
const CURLY_FLOOR: f64 = 1e-12;
/// Block-sum ratio below which partial sums are taken as summable.
const SUMMABLE_RATIO: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    B,
    H1,
    H2,
    H3,
    H4,
    H5,
    H2p,
    H3p,
    H4p,
}

impl Condition {
    pub const ALL: [Condition; 9] = [
        Condition::B,
        Condition::H1,
        Condition::H2,
        Condition::H3,
        Condition::H4,
        Condition::H5,
        Condition::H2p,
        Condition::H3p,
        Condition::H4p,
    ];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::B => "B",
            Condition::H1 => "H1",
            Condition::H2 => "H2",
            Condition::H3 => "H3",
            Condition::H4 => "H4",
            Condition::H5 => "H5",
            Condition::H2p => "H2p",
            Condition::H3p => "H3p",
            Condition::H4p => "H4p",
        };
        f.write_str(s)
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Usage(format!("unknown condition '{s}' (expected one of B, H1..H5, H2p, H3p, H4p)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    Site { k: i64 },
    Point { k: i64, t: f64 },
    Scaled { k: i64, t: f64, s: f64 },
    /// Partial sums over `|k| <= k_max` at amplitude level `t`.
    PartialSums { k_max: i64, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    SatisfiedOnSamples,
    Refuted { witness: Witness },
    Inconclusive,
}

impl Verdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::SatisfiedOnSamples => "satisfied_on_samples",
            Verdict::Refuted { .. } => "refuted",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub condition: Condition,
    pub verdict: Verdict,
    /// Estimated constants such as `d`, `q`, `sigma`.
    pub constants: BTreeMap<String, f64>,
    pub note: String,
}

impl HypothesisReport {
    fn new(condition: Condition, verdict: Verdict, note: impl Into<String>) -> Self {
        HypothesisReport { condition, verdict, constants: BTreeMap::new(), note: note.into() }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.to_string(), value);
        self
    }
}

/// Sample points for the hypothesis checks: sites `|k| <= k_max`, amplitudes
/// `±t` log-spaced over `[t_min, t_max]`, scale factors `s` uniform on
/// `[0, 1]`, and amplitude levels for the summability check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingPlan {
    pub k_max: i64,
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    pub s_points: usize,
    pub t_levels: Vec<f64>,
    /// Growth exponent for (H2)/(H2'); defaults to the nonlinearity's own.
    pub q: Option<f64>,
    /// Fixed constant for (H2)/(H2'); estimated when absent.
    pub d: Option<f64>,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            k_max: 100,
            t_min: 1e-6,
            t_max: 1e8,
            per_decade: 10,
            s_points: 21,
            t_levels: vec![1.0, 10.0, 100.0],
            q: None,
            d: None,
        }
    }
}

impl SamplingPlan {
    fn validate(&self) -> Result<()> {
        if self.k_max < 0 || self.per_decade == 0 || !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return Err(Error::Usage("empty sampling plan".into()));
        }
        Ok(())
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + Clone {
        -self.k_max..=self.k_max
    }

    /// Positive amplitudes, log-spaced, both ends included.
    pub fn positive_amplitudes(&self) -> Vec<f64> {
        let decades = (self.t_max / self.t_min).log10();
        let n = (decades * self.per_decade as f64).ceil().max(1.0) as usize;
        let lr = (self.t_max / self.t_min).ln() / n as f64;
        let mut ts: Vec<f64> = (0..=n).map(|i| self.t_min * (i as f64 * lr).exp()).collect();
        ts[n] = self.t_max;
        ts
    }

    /// `±t` for every positive amplitude.
    pub fn amplitudes(&self) -> Vec<f64> {
        let pos = self.positive_amplitudes();
        pos.iter().map(|t| -t).rev().chain(pos.iter().copied()).collect()
    }

    pub fn scale_factors(&self) -> Vec<f64> {
        let n = self.s_points.max(2);
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }
}

fn abs_pow(t: f64, e: f64) -> f64 {
    t.abs().powf(e)
}

/// Checks hypothesis `condition` for `nl` on `plan`. Condition `B` concerns
/// the potential and is handled by [`check_coefficients`].
pub fn check_hypothesis(nl: &NonlinearitySpec, condition: Condition, plan: &SamplingPlan) -> Result<HypothesisReport> {
    plan.validate()?;
    match condition {
        Condition::B => Err(Error::Usage("condition B concerns b(k); use check_coefficients".into())),
        Condition::H1 => check_odd(nl, plan),
        Condition::H2 => check_growth_bound(nl, plan, Condition::H2),
        Condition::H2p => check_growth_bound(nl, plan, Condition::H2p),
        Condition::H3 => check_small_t(nl, plan),
        Condition::H4 => check_superlinear(nl, plan, false),
        Condition::H4p => check_superlinear(nl, plan, true),
        Condition::H5 => check_curly_monotone(nl, plan),
        Condition::H3p => check_summable(nl, plan),
    }
}

/// (B): `b(k) >= b0 > 0`, with growth towards the window edges as evidence
/// for `b(k) -> ∞`.
pub fn check_coefficients(coeffs: &CoefficientField) -> HypothesisReport {
    let w = coeffs.window();
    let b0 = coeffs.b0();
    if let Some(k) = w.sites().find(|&k| coeffs.b(k) < b0 || coeffs.b(k) <= 0.0) {
        return HypothesisReport::new(Condition::B, Verdict::Refuted { witness: Witness::Site { k } }, "b(k) below floor")
            .with("b0", b0);
    }
    let half = w.half_width() as i64 / 2;
    let core_max = (-half..=half).map(|k| coeffs.b(k)).fold(f64::NEG_INFINITY, f64::max);
    let edge_min = coeffs.b(w.k_min()).min(coeffs.b(w.k_max()));
    let verdict = if edge_min > core_max {
        Verdict::SatisfiedOnSamples
    } else {
        Verdict::Inconclusive
    };
    HypothesisReport::new(Condition::B, verdict, "floor holds; growth judged from edge vs core values")
        .with("b0", b0)
        .with("edge_min", edge_min)
        .with("core_max", core_max)
}

fn check_odd(nl: &NonlinearitySpec, plan: &SamplingPlan) -> Result<HypothesisReport> {
    let ts = plan.positive_amplitudes();
    let mut worst = 0.0_f64;
    for k in plan.sites() {
        for &t in &ts {
            let fp = nl.f(k, t);
            let defect = (nl.f(k, -t) + fp).abs();
            worst = worst.max(defect);
            if defect > TOL * fp.abs().max(1.0) {
                return Ok(HypothesisReport::new(
                    Condition::H1,
                    Verdict::Refuted { witness: Witness::Point { k, t } },
                    "f(k,-t) != -f(k,t)",
                )
                .with("defect", defect));
            }
        }
    }
    Ok(HypothesisReport::new(Condition::H1, Verdict::SatisfiedOnSamples, "odd on samples").with("max_defect", worst))
}

/// Per-amplitude maxima and the overall argmax `(k, t, ratio)`.
type RatioScan = (Vec<f64>, Option<(i64, f64, f64)>);

/// Largest ratio over sites per positive amplitude (both signs).
fn ratio_profile(
    plan: &SamplingPlan,
    ts: &[f64],
    mut ratio: impl FnMut(i64, f64) -> Result<f64>,
) -> Result<RatioScan> {
    let mut best: Option<(i64, f64, f64)> = None;
    let mut prof = Vec::with_capacity(ts.len());
    for &t in ts {
        let mut m = f64::NEG_INFINITY;
        for k in plan.sites() {
            for tt in [t, -t] {
                let r = ratio(k, tt)?;
                m = m.max(r);
                if best.is_none_or(|b| r > b.2) {
                    best = Some((k, tt, r));
                }
            }
        }
        prof.push(m);
    }
    Ok((prof, best))
}

/// Does the sampled profile flatten out (or decrease) towards `idx_end`?
/// Uses points one and two decades inside the end.
fn end_is_bounded(prof: &[f64], per_decade: usize, at_start: bool) -> bool {
    let n = prof.len();
    if n < 2 * per_decade + 1 {
        return false;
    }
    let (r3, r2, r1) = if at_start {
        (prof[0], prof[per_decade], prof[2 * per_decade])
    } else {
        (prof[n - 1], prof[n - 1 - per_decade], prof[n - 1 - 2 * per_decade])
    };
    r3 <= r2 * (1.0 + 1e-6) || (r3 - r2) <= 0.5 * (r2 - r1)
}

fn check_growth_bound(nl: &NonlinearitySpec, plan: &SamplingPlan, cond: Condition) -> Result<HypothesisReport> {
    let p = nl.p();
    let q = plan.q.unwrap_or_else(|| nl.growth_exponent());
    if !(q > p) {
        return Err(Error::Usage(format!("{cond} needs q > p, got q = {q}")));
    }
    let denom = |t: f64| match cond {
        Condition::H2 => abs_pow(t, p) + abs_pow(t, q),
        _ => abs_pow(t, q),
    };
    let ts = plan.positive_amplitudes();
    if let Some(d) = plan.d {
        for k in plan.sites() {
            for &t in &ts {
                for tt in [t, -t] {
                    let lhs = nl.primitive(k, tt)?.abs();
                    if lhs - d * denom(tt) > TOL {
                        return Ok(HypothesisReport::new(
                            cond,
                            Verdict::Refuted { witness: Witness::Point { k, t: tt } },
                            "|F| exceeds the bound with the given d",
                        )
                        .with("d", d)
                        .with("q", q));
                    }
                }
            }
        }
        return Ok(HypothesisReport::new(cond, Verdict::SatisfiedOnSamples, "bound holds with the given d")
            .with("d", d)
            .with("q", q));
    }
    let (prof, _) = ratio_profile(plan, &ts, |k, t| Ok(nl.primitive(k, t)?.abs() / denom(t)))?;
    let d = prof.iter().copied().fold(0.0, f64::max);
    let bounded = d.is_finite()
        && end_is_bounded(&prof, plan.per_decade, true)
        && end_is_bounded(&prof, plan.per_decade, false);
    let verdict = if bounded {
        Verdict::SatisfiedOnSamples
    } else {
        Verdict::Inconclusive
    };
    Ok(HypothesisReport::new(cond, verdict, "d estimated as the grid supremum of |F|/bound").with("d", d).with("q", q))
}

fn check_small_t(nl: &NonlinearitySpec, plan: &SamplingPlan) -> Result<HypothesisReport> {
    let p = nl.p();
    let ts = plan.positive_amplitudes();
    let ratio = |k: i64, t: f64| nl.f(k, t).abs() / abs_pow(t, p - 1.0);
    for &t in ts.iter().filter(|t| **t <= T_NEAR) {
        for k in plan.sites() {
            for tt in [t, -t] {
                if ratio(k, tt) >= H3_REFUTE_RATIO {
                    return Ok(HypothesisReport::new(
                        Condition::H3,
                        Verdict::Refuted { witness: Witness::Point { k, t: tt } },
                        "f/|t|^(p-1) not small near the origin",
                    )
                    .with("ratio", ratio(k, tt)));
                }
            }
        }
    }
    let inner = ts[0];
    let outer = inner * 100.0;
    let sup_at = |t: f64| plan.sites().map(|k| ratio(k, t).max(ratio(k, -t))).fold(0.0, f64::max);
    let r_inner = sup_at(inner);
    let r_outer = sup_at(outer);
    let verdict = if r_inner <= H3_ACCEPT_RATIO && r_inner <= r_outer {
        Verdict::SatisfiedOnSamples
    } else {
        Verdict::Inconclusive
    };
    Ok(HypothesisReport::new(Condition::H3, verdict, "sup_k f/|t|^(p-1) at the innermost amplitude")
        .with("ratio_inner", r_inner)
        .with("ratio_outer", r_outer))
}

fn check_superlinear(nl: &NonlinearitySpec, plan: &SamplingPlan, uniform: bool) -> Result<HypothesisReport> {
    let cond = if uniform { Condition::H4p } else { Condition::H4 };
    let p = nl.p();
    let ratio = |k: i64, t: f64| nl.f(k, t) * t / abs_pow(t, p);
    let global_ref = plan.sites().map(|k| ratio(k, 1.0).max(ratio(k, -1.0))).fold(f64::NEG_INFINITY, f64::max);
    let far: Vec<f64> = plan.positive_amplitudes().into_iter().filter(|t| *t >= T_FAR).collect();
    let mut worst: Option<(i64, f64, f64, f64)> = None;
    for k in plan.sites() {
        for &t in &far {
            for tt in [t, -t] {
                let reference = if uniform { global_ref } else { ratio(k, tt.signum()) };
                let r = ratio(k, tt);
                let margin = r - reference;
                if margin <= TOL && worst.is_none_or(|w| margin < w.3) {
                    worst = Some((k, tt, r, margin));
                }
            }
        }
    }
    if let Some((k, t, r, _)) = worst {
        return Ok(HypothesisReport::new(
            cond,
            Verdict::Refuted { witness: Witness::Point { k, t } },
            "f t/|t|^p at large |t| has not risen above its level at |t| = 1",
        )
        .with("ratio", r)
        .with("reference", if uniform { global_ref } else { ratio(k, t.signum()) }));
    }
    let verdict = if far.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::SatisfiedOnSamples
    };
    let min_far = far
        .last()
        .map(|&t| plan.sites().map(|k| ratio(k, t).min(ratio(k, -t))).fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NAN);
    Ok(HypothesisReport::new(cond, verdict, "growth of f t/|t|^p beyond |t| = 1e6")
        .with("reference", global_ref)
        .with("min_ratio_at_t_max", min_far))
}

/// `𝓕(k,t)` together with the magnitude of its two terms, which sets the
/// roundoff scale of the difference.
fn curly_scaled(nl: &NonlinearitySpec, k: i64, t: f64) -> Result<(f64, f64)> {
    let ft = nl.f(k, t) * t;
    let pf = nl.p() * nl.primitive(k, t)?;
    Ok((ft - pf, 1.0_f64.max(ft.abs() + pf.abs())))
}

fn check_curly_monotone(nl: &NonlinearitySpec, plan: &SamplingPlan) -> Result<HypothesisReport> {
    let ts = plan.amplitudes();
    let ss = plan.scale_factors();
    let mut sigma = 1.0_f64;
    let mut min_curly = f64::INFINITY;
    for k in plan.sites() {
        for &t in &ts {
            let (c, scale) = curly_scaled(nl, k, t)?;
            min_curly = min_curly.min(c);
            if c < -TOL * scale {
                return Ok(HypothesisReport::new(
                    Condition::H5,
                    Verdict::Refuted { witness: Witness::Point { k, t } },
                    "curly F negative",
                )
                .with("curly_f", c));
            }
            for &s in &ss {
                let (cs, scale_s) = curly_scaled(nl, k, s * t)?;
                if c > CURLY_FLOOR * scale {
                    sigma = sigma.max(cs / c);
                } else if cs > TOL * scale_s {
                    return Ok(HypothesisReport::new(
                        Condition::H5,
                        Verdict::Refuted { witness: Witness::Scaled { k, t, s } },
                        "curly F vanishes at t but not at s t",
                    )
                    .with("curly_f_scaled", cs));
                }
            }
        }
    }
    Ok(HypothesisReport::new(Condition::H5, Verdict::SatisfiedOnSamples, "sigma is the sampled sup of F(k,st)/F(k,t)")
        .with("sigma", sigma)
        .with("min_curly_f", min_curly))
}

/// `sup_{|t| <= level} |F(k, t)|` over the plan's amplitudes plus `±level`.
fn sup_primitive(nl: &NonlinearitySpec, k: i64, level: f64, ts: &[f64]) -> Result<f64> {
    let mut m = nl.primitive(k, level)?.abs().max(nl.primitive(k, -level)?.abs());
    for &t in ts.iter().filter(|t| t.abs() <= level) {
        m = m.max(nl.primitive(k, t)?.abs());
    }
    Ok(m)
}

fn check_summable(nl: &NonlinearitySpec, plan: &SamplingPlan) -> Result<HypothesisReport> {
    if plan.k_max < 4 || plan.t_levels.is_empty() {
        return Err(Error::Usage("H3p needs k_max >= 4 and at least one amplitude level".into()));
    }
    let ts = plan.amplitudes();
    let kq = plan.k_max / 4;
    let kh = plan.k_max / 2;
    let mut report = HypothesisReport::new(Condition::H3p, Verdict::SatisfiedOnSamples, "dyadic block ratio of partial sums");
    let mut worst_ratio = 0.0_f64;
    for &level in &plan.t_levels {
        let a: BTreeMap<i64, f64> =
            plan.sites().map(|k| Ok((k, sup_primitive(nl, k, level, &ts)?))).collect::<Result<_>>()?;
        let block = |lo: i64, hi: i64| compensated_sum(a.iter().filter(|(k, _)| k.abs() > lo && k.abs() <= hi).map(|(_, v)| *v));
        let inner = block(kq, kh);
        let outer = block(kh, plan.k_max);
        let ratio = if inner > 0.0 { outer / inner } else if outer > 0.0 { f64::INFINITY } else { 0.0 };
        worst_ratio = worst_ratio.max(ratio);
        report.constants.insert(format!("block_ratio_T{level}"), ratio);
        report.constants.insert(format!("partial_sum_T{level}"), compensated_sum(a.values().copied()));
        if ratio >= 1.0 {
            report.verdict = Verdict::Refuted { witness: Witness::PartialSums { k_max: plan.k_max, t: level } };
            report.note = "partial sums do not decay: block sums non-decreasing".into();
            return Ok(report);
        }
    }
    if worst_ratio >= SUMMABLE_RATIO {
        report.verdict = Verdict::Inconclusive;
    }
    Ok(report)
}

/// Worst margins of `F(k,t) >= 0` and `f(k,t) t >= 0` over the plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_primitive: f64,
    pub min_primitive_at: (i64, f64),
    pub min_f_times_t: f64,
    pub min_f_times_t_at: (i64, f64),
    pub holds: bool,
}

pub fn lemma_pos_check(nl: &NonlinearitySpec, sites: &[i64], amplitudes: &[f64]) -> Result<PositivityReport> {
    let mut rep = PositivityReport {
        min_primitive: f64::INFINITY,
        min_primitive_at: (0, 0.0),
        min_f_times_t: f64::INFINITY,
        min_f_times_t_at: (0, 0.0),
        holds: true,
    };
    for &k in sites {
        for &t in amplitudes {
            let big_f = nl.primitive(k, t)?;
            let ft = nl.f(k, t) * t;
            if big_f < rep.min_primitive {
                rep.min_primitive = big_f;
                rep.min_primitive_at = (k, t);
            }
            if ft < rep.min_f_times_t {
                rep.min_f_times_t = ft;
                rep.min_f_times_t_at = (k, t);
            }
        }
    }
    rep.holds = rep.min_primitive >= -1e-12 && rep.min_f_times_t >= -1e-12;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InconsistencyRow {
    pub k: i64,
    /// `S_K = Σ_{|k|<=K} sup_{|t|<=T} |F(k,t)|`.
    pub partial_sum: f64,
    pub mean: f64,
    /// `Σ_{|k|<=K} [(T - T1) - |F(k, T1)|]`.
    pub lower_bound_sum: f64,
    /// `(2K+1) min_k [(T - T1) - |F(k, T1)|]`, when that minimum is positive.
    pub linear_certificate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InconsistencyReport {
    pub t: f64,
    pub t1: f64,
    /// A sample with `|t| >= T1` where `|f(k,t)| < 1`.
    pub violation: Option<Witness>,
    pub rows: Vec<InconsistencyRow>,
}

const INCONSISTENCY_T_POINTS: usize = 256;

/// Partial sums of `sup_{|t|<=T}|F(k,t)|` for a nonlinearity with
/// `|f(k,t)| >= 1` whenever `|t| >= T1`; their linear growth shows the
/// summability requirement cannot hold alongside uniform superlinearity.
pub fn inconsistency_demo(nl: &NonlinearitySpec, t: f64, t1: f64, k_list: &[i64]) -> Result<InconsistencyReport> {
    if !(t1 > 0.0 && t > t1) {
        return Err(Error::Usage(format!("need T > T1 > 0, got T = {t}, T1 = {t1}")));
    }
    if k_list.is_empty() || k_list.iter().any(|k| *k < 0) {
        return Err(Error::Usage("K list must be nonempty and nonnegative".into()));
    }
    let k_top = *k_list.iter().max().unwrap();
    let n = INCONSISTENCY_T_POINTS;
    let above: Vec<f64> = (0..=n).map(|i| t1 + (t - t1) * i as f64 / n as f64).collect();
    let mut worst: Option<(i64, f64, f64)> = None;
    for k in -k_top..=k_top {
        for &s in &above {
            for ss in [s, -s] {
                let v = nl.f(k, ss).abs();
                if v < 1.0 - 1e-12 && worst.is_none_or(|w| v < w.2) {
                    worst = Some((k, ss, v));
                }
            }
        }
    }
    if let Some((k, s, _)) = worst {
        return Ok(InconsistencyReport { t, t1, violation: Some(Witness::Point { k, t: s }), rows: vec![] });
    }
    let grid: Vec<f64> = (0..=n).map(|i| t * i as f64 / n as f64).collect();
    let mut sup = BTreeMap::new();
    let mut bound = BTreeMap::new();
    for k in -k_top..=k_top {
        let mut m = 0.0_f64;
        for &s in &grid {
            m = m.max(nl.primitive(k, s)?.abs()).max(nl.primitive(k, -s)?.abs());
        }
        sup.insert(k, m);
        bound.insert(k, (t - t1) - nl.primitive(k, t1)?.abs());
    }
    let rows = k_list
        .iter()
        .map(|&kk| {
            let partial_sum = compensated_sum((-kk..=kk).map(|k| sup[&k]));
            let lower_bound_sum = compensated_sum((-kk..=kk).map(|k| bound[&k]));
            let min_b = (-kk..=kk).map(|k| bound[&k]).fold(f64::INFINITY, f64::min);
            let count = (2 * kk + 1) as f64;
            InconsistencyRow {
                k: kk,
                partial_sum,
                mean: partial_sum / count,
                lower_bound_sum,
                linear_certificate: (min_b > 0.0).then_some(count * min_b),
            }
        })
        .collect();
    Ok(InconsistencyReport { t, t1, violation: None, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Profile, Window};
    use crate::nonlinearity::WeightConvention;

    fn log(mu: f64, nu: f64) -> NonlinearitySpec {
        NonlinearitySpec::example_log(2.0, mu, nu, WeightConvention::Shifted).unwrap()
    }

    fn small_plan() -> SamplingPlan {
        SamplingPlan { k_max: 20, per_decade: 5, ..SamplingPlan::default() }
    }

    #[test]
    fn example_log_satisfies_h1_to_h5() {
        let nl = log(2.0, 2.0);
        for c in [Condition::H1, Condition::H2, Condition::H3, Condition::H4, Condition::H5] {
            let rep = check_hypothesis(&nl, c, &small_plan()).unwrap();
            assert_eq!(rep.verdict, Verdict::SatisfiedOnSamples, "{c}: {rep:?}");
        }
        let h5 = check_hypothesis(&nl, Condition::H5, &small_plan()).unwrap();
        assert!((h5.constants["sigma"] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn example_log_fails_uniform_superlinearity() {
        let rep = check_hypothesis(&log(2.0, 2.0), Condition::H4p, &small_plan()).unwrap();
        match rep.verdict {
            Verdict::Refuted { witness: Witness::Point { k, .. } } => assert_eq!(k.abs(), 20),
            v => panic!("expected refutation, got {v:?}"),
        }
    }

    #[test]
    fn pure_power_fails_summability() {
        let nl = NonlinearitySpec::pure_power(2.0, 4.0, 1.0).unwrap();
        let rep = check_hypothesis(&nl, Condition::H3p, &small_plan()).unwrap();
        assert!(rep.verdict.is_refuted());
        assert!((rep.constants["block_ratio_T1"] - 2.0).abs() < 1e-12);
        let rep = check_hypothesis(&nl, Condition::H4p, &small_plan()).unwrap();
        assert_eq!(rep.verdict, Verdict::SatisfiedOnSamples);
    }

    #[test]
    fn example_log_summable() {
        let rep = check_hypothesis(&log(2.0, 2.0), Condition::H3p, &small_plan()).unwrap();
        assert_eq!(rep.verdict, Verdict::SatisfiedOnSamples, "{rep:?}");
    }

    #[test]
    fn p_power_is_not_superlinear() {
        let nl = NonlinearitySpec::p_power(2.0, 1.0).unwrap();
        assert!(check_hypothesis(&nl, Condition::H4, &small_plan()).unwrap().verdict.is_refuted());
        assert!(check_hypothesis(&nl, Condition::H3, &small_plan()).unwrap().verdict.is_refuted());
    }

    #[test]
    fn negated_power_violates_positivity() {
        let nl = NonlinearitySpec::p_power(3.0, -1.0).unwrap();
        // 𝓕 ≡ 0 for every multiple of φ_p, so (H5) alone does not catch the sign flip
        let rep = check_hypothesis(&nl, Condition::H5, &small_plan()).unwrap();
        assert_eq!(rep.verdict, Verdict::SatisfiedOnSamples);
        let pos = lemma_pos_check(&nl, &[0, 1], &[-2.0, 0.0, 2.0]).unwrap();
        assert!(!pos.holds);
        assert!(pos.min_primitive < 0.0 && pos.min_f_times_t < 0.0);
    }

    #[test]
    fn fixed_d_refutes_with_witness() {
        let nl = NonlinearitySpec::pure_power(2.0, 4.0, 1.0).unwrap();
        let plan = SamplingPlan { d: Some(0.1), ..small_plan() };
        let rep = check_hypothesis(&nl, Condition::H2p, &plan).unwrap();
        let Verdict::Refuted { witness: Witness::Point { k, t } } = rep.verdict else { panic!() };
        assert!(nl.primitive(k, t).unwrap().abs() > 0.1 * t.abs().powi(4));
        let plan = SamplingPlan { d: Some(0.25), ..small_plan() };
        assert_eq!(check_hypothesis(&nl, Condition::H2p, &plan).unwrap().verdict, Verdict::SatisfiedOnSamples);
    }

    #[test]
    fn empty_plan_is_usage_error() {
        let plan = SamplingPlan { per_decade: 0, ..SamplingPlan::default() };
        assert!(matches!(check_hypothesis(&log(2.0, 2.0), Condition::H1, &plan), Err(Error::Usage(_))));
        let plan = SamplingPlan { t_min: 1.0, t_max: 1.0, ..SamplingPlan::default() };
        assert!(check_hypothesis(&log(2.0, 2.0), Condition::H1, &plan).is_err());
    }

    #[test]
    fn potential_check() {
        let win = Window::new(10).unwrap();
        let grow = CoefficientField::new(win, Profile::Constant { value: 1.0 }, Profile::Polynomial { exponent: 2.0 }, None)
            .unwrap();
        assert_eq!(check_coefficients(&grow).verdict, Verdict::SatisfiedOnSamples);
        let flat = CoefficientField::constant(win, 1.0, 1.0).unwrap();
        assert_eq!(check_coefficients(&flat).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn condition_names_round_trip() {
        for c in Condition::ALL {
            assert_eq!(c.to_string().parse::<Condition>().unwrap(), c);
        }
        assert!("H9".parse::<Condition>().is_err());
    }

    #[test]
    fn inconsistency_pure_power() {
        let nl = NonlinearitySpec::pure_power(2.0, 4.0, 1.0).unwrap();
        let rep = inconsistency_demo(&nl, 2.0, 1.0, &[0, 100, 200]).unwrap();
        assert!(rep.violation.is_none());
        for row in &rep.rows {
            assert_eq!(row.mean, 4.0);
            assert_eq!(row.linear_certificate, Some((2 * row.k + 1) as f64 * 0.75));
        }
        let ratio = rep.rows[2].partial_sum / rep.rows[1].partial_sum;
        assert!((ratio - 401.0 / 201.0).abs() < 1e-12);
    }

    #[test]
    fn inconsistency_example_log_violates_precondition() {
        let rep = inconsistency_demo(&log(2.0, 2.0), 10.0, 2.0, &[30]).unwrap();
        match rep.violation {
            Some(Witness::Point { k, t }) => {
                assert_eq!(k.abs(), 30);
                assert!(log(2.0, 2.0).f(k, t).abs() < 1.0);
            }
            v => panic!("{v:?}"),
        }
        assert!(inconsistency_demo(&log(2.0, 2.0), 1.0, 2.0, &[3]).is_err());
    }
}
