//! Sequences on truncated integer lattices, the weighted space norm, the
//! energy functional and its gradient (the Euler–Lagrange residual).
//!
//! A [`Window`] of half-width `K` stands for the sites `-K..=K`. Every
//! sequence is implicitly zero outside its window, which is how the decay
//! condition `u(k) -> 0` is modelled on a finite computer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// The index set `{-K, ..., K}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    half_width: usize,
}

impl Window {
    pub fn new(half_width: usize) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::InvalidParameter("window half-width K must be >= 1".into()));
        }
        Ok(Window { half_width })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Number of sites, `2K + 1`.
    pub fn len(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k_min(&self) -> i64 {
        -(self.half_width as i64)
    }

    pub fn k_max(&self) -> i64 {
        self.half_width as i64
    }

    pub fn contains(&self, k: i64) -> bool {
        k.unsigned_abs() as usize <= self.half_width
    }

    /// Storage offset of site `k`, if inside the window.
    pub fn offset(&self, k: i64) -> Option<usize> {
        self.contains(k).then(|| (k + self.half_width as i64) as usize)
    }

    pub fn site(&self, offset: usize) -> i64 {
        offset as i64 - self.half_width as i64
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + Clone {
        self.k_min()..=self.k_max()
    }
}

/// A real sequence on a [`Window`], zero outside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSeq {
    window: Window,
    values: Vec<f64>,
}

impl LatticeSeq {
    pub fn new(window: Window, values: Vec<f64>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::InvalidParameter(format!(
                "sequence length {} does not match window length {}",
                values.len(),
                window.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite value at site {}",
                window.site(i)
            )));
        }
        Ok(LatticeSeq { window, values })
    }

    pub fn zeros(window: Window) -> Self {
        LatticeSeq { window, values: vec![0.0; window.len()] }
    }

    /// `amplitude * delta_k`.
    pub fn spike(window: Window, k: i64, amplitude: f64) -> Self {
        let mut u = Self::zeros(window);
        if let Some(i) = window.offset(k) {
            u.values[i] = amplitude;
        }
        u
    }

    pub fn from_fn(window: Window, f: impl Fn(i64) -> f64) -> Result<Self> {
        Self::new(window, window.sites().map(f).collect())
    }

    pub(crate) fn from_vec_unchecked(window: Window, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), window.len());
        LatticeSeq { window, values }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[cfg(test)]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `u(k)`, with zero extension outside the window.
    pub fn get(&self, k: i64) -> f64 {
        self.window.offset(k).map_or(0.0, |i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.window.sites().zip(self.values.iter().copied())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_vec_unchecked(self.window, self.values.iter().map(|v| c * v).collect())
    }

    pub fn neg(&self) -> Self {
        Self::from_vec_unchecked(self.window, self.values.iter().map(|v| -v).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &LatticeSeq) -> Self {
        assert_eq!(self.window, other.window, "window mismatch");
        Self::from_vec_unchecked(
            self.window,
            self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect(),
        )
    }

    pub fn sub(&self, other: &LatticeSeq) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn dot(&self, other: &LatticeSeq) -> f64 {
        assert_eq!(self.window, other.window, "window mismatch");
        compensated_sum(self.values.iter().zip(&other.values).map(|(a, b)| a * b))
    }

    pub fn norm_l2(&self) -> f64 {
        norm_lp(self, 2.0)
    }

    /// `sup_k |self(k) - other(k)|`.
    pub fn dist_inf(&self, other: &LatticeSeq) -> f64 {
        assert_eq!(self.window, other.window, "window mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }

    /// Re-expresses the sequence on another window, zero-padding or cutting.
    pub fn on_window(&self, window: Window) -> Self {
        LatticeSeq::from_vec_unchecked(window, window.sites().map(|k| self.get(k)).collect())
    }
}

/// How a coefficient sequence is generated from the site index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// `1 + |k|^exponent`.
    Polynomial { exponent: f64 },
    /// Explicit values for sites `first, first + 1, ...`.
    Table { first: i64, values: Vec<f64> },
}

impl Profile {
    pub fn eval(&self, k: i64) -> Option<f64> {
        match self {
            Profile::Constant { value } => Some(*value),
            Profile::Polynomial { exponent } => Some(1.0 + (k.unsigned_abs() as f64).powf(*exponent)),
            Profile::Table { first, values } => {
                let i = k - first;
                (i >= 0).then(|| values.get(i as usize).copied()).flatten()
            }
        }
    }
}

/// Coefficients `a(k)` for `k in -K..=K+1` and `b(k)` for `k in -K..=K`,
/// together with the floor `b0` of the potential.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    window: Window,
    a_profile: Profile,
    b_profile: Profile,
    b0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl CoefficientField {
    /// Samples the profiles on `window`. When `b0` is `None` the floor is the
    /// minimum of `b` over the window.
    pub fn new(window: Window, a_profile: Profile, b_profile: Profile, b0: Option<f64>) -> Result<Self> {
        let a = (window.k_min()..=window.k_max() + 1)
            .map(|k| {
                a_profile
                    .eval(k)
                    .ok_or_else(|| Error::InvalidParameter(format!("a(k) table does not cover k = {k}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let b = window
            .sites()
            .map(|k| {
                b_profile
                    .eval(k)
                    .ok_or_else(|| Error::InvalidParameter(format!("b(k) table does not cover k = {k}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "a(k) must be positive, got a({}) = {v}",
                window.k_min() + i as i64
            )));
        }
        let b_min = b.iter().copied().fold(f64::INFINITY, f64::min);
        let b0 = b0.unwrap_or(b_min);
        if !(b0.is_finite() && b0 > 0.0) {
            return Err(Error::InvalidParameter(format!("b0 must be positive, got {b0}")));
        }
        if let Some((i, v)) = b.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= b0)) {
            return Err(Error::InvalidParameter(format!(
                "b(k) must satisfy b(k) >= b0 = {b0}, got b({}) = {v}",
                window.site(i)
            )));
        }
        Ok(CoefficientField { window, a_profile, b_profile, b0, a, b })
    }

    /// `a ≡ a_value`, `b ≡ b_value`.
    pub fn constant(window: Window, a_value: f64, b_value: f64) -> Result<Self> {
        Self::new(
            window,
            Profile::Constant { value: a_value },
            Profile::Constant { value: b_value },
            None,
        )
    }

    /// The same profiles sampled on another window.
    pub fn on_window(&self, window: Window) -> Result<Self> {
        Self::new(window, self.a_profile.clone(), self.b_profile.clone(), Some(self.b0))
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn a_profile(&self) -> &Profile {
        &self.a_profile
    }

    pub fn b_profile(&self) -> &Profile {
        &self.b_profile
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// `a(k)` for `k in -K..=K+1`.
    pub fn a(&self, k: i64) -> f64 {
        self.a[(k - self.window.k_min()) as usize]
    }

    pub fn b(&self, k: i64) -> f64 {
        self.b[(k - self.window.k_min()) as usize]
    }

    pub(crate) fn a_slice(&self) -> &[f64] {
        &self.a
    }

    pub(crate) fn b_slice(&self) -> &[f64] {
        &self.b
    }
}

/// Exponent, parameter, coefficients and nonlinearity of one problem instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub p: f64,
    pub lambda: f64,
    pub coeffs: CoefficientField,
    pub nonlinearity: NonlinearitySpec,
}

impl ProblemSpec {
    pub fn new(p: f64, lambda: f64, coeffs: CoefficientField, nonlinearity: NonlinearitySpec) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Domain(format!("p must be > 1, got {p}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
        }
        if (nonlinearity.p() - p).abs() > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "nonlinearity built for p = {} but problem has p = {p}",
                nonlinearity.p()
            )));
        }
        Ok(ProblemSpec { p, lambda, coeffs, nonlinearity })
    }

    pub fn window(&self) -> Window {
        self.coeffs.window()
    }

    /// Same problem on another window (coefficient profiles re-sampled).
    pub fn on_window(&self, window: Window) -> Result<Self> {
        Ok(ProblemSpec { coeffs: self.coeffs.on_window(window)?, ..self.clone() })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.p, lambda, self.coeffs.clone(), self.nonlinearity.clone())
    }
}

/// One entry of a solver iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual_inf_norm: f64,
    pub cerami_metric: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub u: LatticeSeq,
    pub energy: f64,
    pub residual_inf_norm: f64,
    pub cerami_metric: f64,
    pub tail_mass: f64,
    /// Threshold `h` used for `tail_mass`, `floor(0.8 K)`.
    pub tail_threshold: usize,
    pub iterations: usize,
    pub converged: bool,
    pub log: Vec<IterationRecord>,
}

impl SolveResult {
    /// Evaluates all diagnostics at `u` from scratch.
    pub fn evaluate(u: LatticeSeq, spec: &ProblemSpec, iterations: usize, tol: f64, log: Vec<IterationRecord>) -> Result<Self> {
        let r = residual(&u, spec);
        let residual_inf_norm = norm_inf(&r);
        let cerami = (1.0 + norm_x(&u, &spec.coeffs, spec.p)) * r.norm_l2();
        let h = tail_threshold(u.window());
        Ok(SolveResult {
            energy: energy(&u, spec)?.total,
            residual_inf_norm,
            cerami_metric: cerami,
            tail_mass: tail_mass(&u, h, spec.p),
            tail_threshold: h,
            iterations,
            converged: residual_inf_norm <= tol,
            log,
            u,
        })
    }
}

/// `floor(0.8 K)`.
pub fn tail_threshold(window: Window) -> usize {
    (window.half_width() * 4) / 5
}

/// `|t|^(p-2) t`, extended by 0 at the origin.
pub fn phi_p(p: f64, t: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("phi_p requires p > 1, got {p}")));
    }
    Ok(phi(p, t))
}

#[inline]
pub(crate) fn phi(p: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if p == 2.0 {
        t
    } else {
        t.abs().powf(p - 2.0) * t
    }
}

/// `(p - 1)|t|^(p-2)`; infinite at 0 when `p < 2`.
#[inline]
pub(crate) fn phi_prime(p: f64, t: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if t == 0.0 {
        if p > 2.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (p - 1.0) * t.abs().powf(p - 2.0)
    }
}

#[inline]
fn abs_pow(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t * t
    } else {
        t.abs().powf(p)
    }
}

/// `Δu(k-1) = u(k) - u(k-1)` for `k in -K..=K+1`.
pub fn forward_diff(u: &LatticeSeq) -> Vec<f64> {
    let w = u.window();
    (w.k_min()..=w.k_max() + 1).map(|k| u.get(k) - u.get(k - 1)).collect()
}

/// `‖u‖^p = Σ a(k)|Δu(k-1)|^p + b(k)|u(k)|^p`.
pub fn norm_x_pow(u: &LatticeSeq, coeffs: &CoefficientField, p: f64) -> f64 {
    assert_eq!(u.window(), coeffs.window(), "coefficients do not cover the window");
    let vals = u.values();
    let n = vals.len();
    let a = coeffs.a_slice();
    let b = coeffs.b_slice();
    let diff = (0..=n).map(|i| {
        let hi = if i < n { vals[i] } else { 0.0 };
        let lo = if i > 0 { vals[i - 1] } else { 0.0 };
        a[i] * abs_pow(hi - lo, p)
    });
    let pot = vals.iter().zip(b).map(|(v, bk)| bk * abs_pow(*v, p));
    compensated_sum(diff.chain(pot))
}

pub fn norm_x(u: &LatticeSeq, coeffs: &CoefficientField, p: f64) -> f64 {
    norm_x_pow(u, coeffs, p).powf(1.0 / p)
}

pub fn norm_lp(u: &LatticeSeq, p: f64) -> f64 {
    compensated_sum(u.values().iter().map(|v| abs_pow(*v, p))).powf(1.0 / p)
}

pub fn norm_inf(u: &LatticeSeq) -> f64 {
    u.values().iter().fold(0.0, |m, v| f64::max(m, v.abs()))
}

/// Components of `J_λ = Φ - λΨ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub phi: f64,
    pub psi: f64,
    pub total: f64,
}

pub fn energy(u: &LatticeSeq, spec: &ProblemSpec) -> Result<Energy> {
    let phi = norm_x_pow(u, &spec.coeffs, spec.p) / spec.p;
    let psi = compensated_sum(
        u.iter()
            .map(|(k, t)| spec.nonlinearity.primitive(k, t))
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(Energy { phi, psi, total: phi - spec.lambda * psi })
}

/// Left-hand side minus right-hand side of the difference equation at each
/// site; equals `∂J_λ/∂u(k)` on the truncated space.
pub fn residual(u: &LatticeSeq, spec: &ProblemSpec) -> LatticeSeq {
    assert_eq!(u.window(), spec.coeffs.window(), "coefficients do not cover the window");
    let p = spec.p;
    let vals = u.values();
    let n = vals.len();
    let a = spec.coeffs.a_slice();
    let b = spec.coeffs.b_slice();
    let w = u.window();
    let mut out = Vec::with_capacity(n);
    // flux[i] = a(k_i) φ_p(Δu(k_i - 1)), i = 0..=n
    let flux: Vec<f64> = (0..=n)
        .map(|i| {
            let hi = if i < n { vals[i] } else { 0.0 };
            let lo = if i > 0 { vals[i - 1] } else { 0.0 };
            a[i] * phi(p, hi - lo)
        })
        .collect();
    for i in 0..n {
        let k = w.site(i);
        let t = vals[i];
        let r = -(flux[i + 1] - flux[i]) + b[i] * phi(p, t) - spec.lambda * spec.nonlinearity.f(k, t);
        out.push(r);
    }
    LatticeSeq::from_vec_unchecked(w, out)
}

/// `(Σ_{|k|>h} |u(k)|^p)^(1/p)`.
pub fn tail_mass(u: &LatticeSeq, h: usize, p: f64) -> f64 {
    compensated_sum(
        u.iter()
            .filter(|(k, _)| k.unsigned_abs() as usize > h)
            .map(|(_, v)| abs_pow(v, p)),
    )
    .powf(1.0 / p)
}

/// `(1 + ‖u‖)·|r(u)|_2`, with the Euclidean residual norm standing in for
/// the dual norm of `J_λ'(u)`.
pub fn cerami_metric(u: &LatticeSeq, spec: &ProblemSpec) -> f64 {
    (1.0 + norm_x(u, &spec.coeffs, spec.p)) * residual(u, spec).norm_l2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{NonlinearitySpec, WeightConvention};

    fn w(k: usize) -> Window {
        Window::new(k).unwrap()
    }

    fn zero_spec(window: Window, p: f64) -> ProblemSpec {
        ProblemSpec::new(
            p,
            1.0,
            CoefficientField::constant(window, 1.0, 1.0).unwrap(),
            NonlinearitySpec::zero(p).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn phi_p_values() {
        assert_eq!(phi_p(2.0, 3.0).unwrap(), 3.0);
        assert_eq!(phi_p(3.0, -2.0).unwrap(), -4.0);
        assert_eq!(phi_p(1.5, 0.0).unwrap(), 0.0);
        assert!(matches!(phi_p(1.0, 2.0), Err(Error::Domain(_))));
        assert!(phi_p(0.5, 2.0).is_err());
    }

    #[test]
    fn window_rejects_zero() {
        assert!(Window::new(0).is_err());
        let win = w(3);
        assert_eq!(win.len(), 7);
        assert_eq!(win.offset(-3), Some(0));
        assert_eq!(win.offset(4), None);
    }

    #[test]
    fn sequence_rejects_nan_and_bad_length() {
        assert!(LatticeSeq::new(w(1), vec![0.0, f64::NAN, 0.0]).is_err());
        assert!(LatticeSeq::new(w(1), vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn forward_diff_of_spike() {
        let u = LatticeSeq::spike(w(2), 0, 1.0);
        // k = -2..=3
        assert_eq!(forward_diff(&u), vec![0.0, 0.0, 1.0, -1.0, 0.0, 0.0]);
        assert!(forward_diff(&LatticeSeq::zeros(w(2))).iter().all(|d| *d == 0.0));
    }

    #[test]
    fn forward_diff_matches_elementwise_subtraction() {
        let vals = vec![0.3, -1.2, 2.5, 0.7, -0.4];
        let u = LatticeSeq::new(w(2), vals.clone()).unwrap();
        let mut ext = vec![0.0];
        ext.extend(&vals);
        ext.push(0.0);
        let oracle: Vec<f64> = ext.windows(2).map(|p| p[1] - p[0]).collect();
        assert_eq!(forward_diff(&u), oracle);
    }

    #[test]
    fn norm_x_of_spike_is_sqrt3() {
        let win = w(3);
        let c = CoefficientField::constant(win, 1.0, 1.0).unwrap();
        let u = LatticeSeq::spike(win, 0, 1.0);
        assert!((norm_x(&u, &c, 2.0) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(norm_x(&LatticeSeq::zeros(win), &c, 2.0), 0.0);
        let v = LatticeSeq::new(win, vec![0.1, -0.5, 2.0, 1.0, 0.0, 0.3, -0.2]).unwrap();
        let n = norm_x(&v, &c, 3.0);
        assert!((norm_x(&v.scaled(-2.5), &c, 3.0) - 2.5 * n).abs() < 1e-12 * n);
    }

    #[test]
    fn lp_and_sup_norms() {
        let win = w(2);
        let d = LatticeSeq::spike(win, 0, 1.0);
        for p in [1.5, 2.0, 3.0, 7.0] {
            assert!((norm_lp(&d, p) - 1.0).abs() < 1e-15);
        }
        assert_eq!(norm_inf(&d), 1.0);
        let two = LatticeSeq::new(win, vec![0.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((norm_lp(&two, 2.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn energy_of_spike_without_nonlinearity() {
        let spec = zero_spec(w(3), 2.0);
        let e = energy(&LatticeSeq::spike(w(3), 0, 1.0), &spec).unwrap();
        assert!((e.total - 1.5).abs() < 1e-15);
        assert_eq!(energy(&LatticeSeq::zeros(w(3)), &spec).unwrap().total, 0.0);
    }

    #[test]
    fn residual_hand_evaluation_p3() {
        let spec = zero_spec(w(2), 3.0);
        let r = residual(&LatticeSeq::spike(w(2), 0, 1.0), &spec);
        // r(0) = -[φ3(-1) - φ3(1)] + φ3(1) = 3
        assert_eq!(r.get(0), 3.0);
        // r(1) = -[φ3(0) - φ3(0 - 1)] + 0 = φ3(-1) = -1
        assert_eq!(r.get(1), -1.0);
        // r(-1) = -[φ3(1 - 0) - φ3(0)] = -1
        assert_eq!(r.get(-1), -1.0);
        assert_eq!(r.get(2), 0.0);
    }

    #[test]
    fn zero_is_critical() {
        let nl = NonlinearitySpec::example_log(2.0, 2.0, 2.0, WeightConvention::Shifted).unwrap();
        let spec = ProblemSpec::new(2.0, 1.0, CoefficientField::constant(w(4), 1.0, 1.0).unwrap(), nl).unwrap();
        let r = residual(&LatticeSeq::zeros(w(4)), &spec);
        assert!(r.values().iter().all(|v| *v == 0.0));
        assert_eq!(cerami_metric(&LatticeSeq::zeros(w(4)), &spec), 0.0);
    }

    #[test]
    fn tail_mass_cases() {
        let win = w(5);
        let d = LatticeSeq::spike(win, 0, 1.0);
        assert_eq!(tail_mass(&d, 1, 2.0), 0.0);
        assert_eq!(tail_mass(&d, 0, 2.0), 0.0);
        let s = LatticeSeq::spike(win, 3, 2.0);
        assert!((tail_mass(&s, 2, 2.0) - 2.0).abs() < 1e-15);
        assert_eq!(tail_mass(&s, 5, 2.0), 0.0);
        let v = LatticeSeq::from_fn(win, |k| (k as f64 * 0.7).sin() + 0.1).unwrap();
        let p = 2.5;
        let lhs = tail_mass(&v, 0, p).powf(p) + v.get(0).abs().powf(p);
        assert!((lhs - norm_lp(&v, p).powf(p)).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut xs = vec![1.0];
        xs.extend(std::iter::repeat_n(1e-16, 10_000));
        let s = compensated_sum(xs.iter().copied());
        assert!((s - (1.0 + 1e-12)).abs() < 1e-16);
    }

    #[test]
    fn coefficient_validation() {
        let win = w(2);
        assert!(CoefficientField::constant(win, 0.0, 1.0).is_err());
        assert!(CoefficientField::constant(win, 1.0, -1.0).is_err());
        let c = CoefficientField::new(win, Profile::Constant { value: 1.0 }, Profile::Polynomial { exponent: 2.0 }, None)
            .unwrap();
        assert_eq!(c.b(2), 5.0);
        assert_eq!(c.b0(), 1.0);
        assert_eq!(c.a(3), 1.0);
        let short = Profile::Table { first: -1, values: vec![1.0, 1.0, 1.0] };
        assert!(CoefficientField::new(win, Profile::Constant { value: 1.0 }, short, None).is_err());
        assert!(CoefficientField::new(win, Profile::Constant { value: 1.0 }, Profile::Constant { value: 1.0 }, Some(2.0))
            .is_err());
    }
}
