//! Nonlinearities `f(k, t)`, their primitives `F(k, t) = ∫_0^t f(k, s) ds`
//! and the quantity `𝓕(k, t) = f(k, t) t - p F(k, t)`.

mod hypotheses;
mod profile;
pub mod quadrature;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use profile::LogProfile;
use quadrature::{adaptive_simpson, QUAD_ABS_TOL, QUAD_BUDGET};

pub use hypotheses::{
    check_coefficients, check_hypothesis, inconsistency_demo, lemma_pos_check, Condition, HypothesisReport,
    InconsistencyReport, InconsistencyRow, PositivityReport, SamplingPlan, Verdict, Witness,
};

/// Site weight of the logarithmic example family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightConvention {
    /// `w(k) = (1 + |k|)^(-μ)`.
    #[default]
    Shifted,
    /// `w(k) = |k|^(-μ)` for `k != 0`, `w(0) = 1`.
    Absolute,
}

impl WeightConvention {
    pub fn weight(self, mu: f64, k: i64) -> f64 {
        let ak = k.unsigned_abs() as f64;
        match self {
            WeightConvention::Shifted => (1.0 + ak).powf(-mu),
            WeightConvention::Absolute if k == 0 => 1.0,
            WeightConvention::Absolute => ak.powf(-mu),
        }
    }
}

pub type ScalarFn = Arc<dyn Fn(i64, f64) -> f64 + Send + Sync>;

/// A user-supplied nonlinearity. The primitive falls back to quadrature and
/// the derivative to central differences when not given.
#[derive(Clone)]
pub struct CustomNonlinearity {
    pub name: String,
    pub f: ScalarFn,
    pub primitive: Option<ScalarFn>,
    pub derivative: Option<ScalarFn>,
}

impl fmt::Debug for CustomNonlinearity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("CustomNonlinearity")
            .field("name", &self.name)
            .field("closed_form_primitive", &self.primitive.is_some())
            .field("derivative", &self.derivative.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum NonlinearityKind {
    /// `f(k, t) = w(k) |t|^(p-2) t ln(1 + |t|^ν)`.
    ExampleLog { mu: f64, nu: f64, weight: WeightConvention },
    /// `f(k, t) = c |t|^(q-2) t`, independent of `k`.
    PurePower { q: f64, c: f64 },
    Custom(CustomNonlinearity),
}

#[derive(Debug, Clone)]
pub struct NonlinearitySpec {
    kind: NonlinearityKind,
    p: f64,
    profile: Option<Arc<LogProfile>>,
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("p must be > 1, got {p}")))
    }
}

impl NonlinearitySpec {
    pub fn example_log(p: f64, mu: f64, nu: f64, weight: WeightConvention) -> Result<Self> {
        check_p(p)?;
        if !(mu > 1.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be > 1, got {mu}")));
        }
        if !(nu >= 1.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must be >= 1, got {nu}")));
        }
        let profile = (!profile::has_closed_form(p, nu)).then(|| Arc::new(LogProfile::new(p, nu)));
        Ok(NonlinearitySpec { kind: NonlinearityKind::ExampleLog { mu, nu, weight }, p, profile })
    }

    pub fn pure_power(p: f64, q: f64, c: f64) -> Result<Self> {
        check_p(p)?;
        if !(q > p && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("pure power needs q > p = {p}, got {q}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("pure power needs c > 0, got {c}")));
        }
        Ok(NonlinearitySpec { kind: NonlinearityKind::PurePower { q, c }, p, profile: None })
    }

    pub fn custom(p: f64, custom: CustomNonlinearity) -> Result<Self> {
        check_p(p)?;
        Ok(NonlinearitySpec { kind: NonlinearityKind::Custom(custom), p, profile: None })
    }

    /// `f ≡ 0`.
    pub fn zero(p: f64) -> Result<Self> {
        Self::custom(
            p,
            CustomNonlinearity {
                name: "zero".into(),
                f: Arc::new(|_, _| 0.0),
                primitive: Some(Arc::new(|_, _| 0.0)),
                derivative: Some(Arc::new(|_, _| 0.0)),
            },
        )
    }

    /// `f(k, t) = c φ_p(t)`, with primitive `c |t|^p / p`.
    pub fn p_power(p: f64, c: f64) -> Result<Self> {
        Self::custom(
            p,
            CustomNonlinearity {
                name: format!("p_power(c={c})"),
                f: Arc::new(move |_, t| c * crate::lattice::phi(p, t)),
                primitive: Some(Arc::new(move |_, t| c * t.abs().powf(p) / p)),
                derivative: Some(Arc::new(move |_, t| c * crate::lattice::phi_prime(p, t))),
            },
        )
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match &self.kind {
            NonlinearityKind::ExampleLog { mu, nu, weight } => {
                format!("example_log(mu={mu}, nu={nu}, weight={weight:?})")
            }
            NonlinearityKind::PurePower { q, c } => format!("pure_power(q={q}, c={c})"),
            NonlinearityKind::Custom(c) => c.name.clone(),
        }
    }

    /// Growth exponent `q > p` used by default for the (H2)-type bounds.
    pub fn growth_exponent(&self) -> f64 {
        match &self.kind {
            NonlinearityKind::ExampleLog { nu, .. } => self.p + nu,
            NonlinearityKind::PurePower { q, .. } => *q,
            NonlinearityKind::Custom(_) => 2.0 * self.p,
        }
    }

    /// `f(k, t)`.
    pub fn f(&self, k: i64, t: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::ExampleLog { mu, nu, weight } => {
                if t == 0.0 {
                    return 0.0;
                }
                let at = t.abs();
                weight.weight(*mu, k) * crate::lattice::phi(self.p, t) * at.powf(*nu).ln_1p()
            }
            NonlinearityKind::PurePower { q, c } => c * crate::lattice::phi(*q, t),
            NonlinearityKind::Custom(c) => (c.f)(k, t),
        }
    }

    /// `∂f/∂t (k, t)`; may be infinite at `t = 0` for exponents below 2.
    pub fn df(&self, k: i64, t: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::ExampleLog { mu, nu, weight } => {
                if t == 0.0 {
                    return 0.0;
                }
                let p = self.p;
                let at = t.abs();
                let atnu = at.powf(*nu);
                let w = weight.weight(*mu, k);
                w * ((p - 1.0) * at.powf(p - 2.0) * atnu.ln_1p() + nu * at.powf(p + nu - 2.0) / (1.0 + atnu))
            }
            NonlinearityKind::PurePower { q, c } => c * crate::lattice::phi_prime(*q, t),
            NonlinearityKind::Custom(c) => match &c.derivative {
                Some(d) => d(k, t),
                None => {
                    let h = 1e-6 * t.abs().max(1.0);
                    ((c.f)(k, t + h) - (c.f)(k, t - h)) / (2.0 * h)
                }
            },
        }
    }

    /// `F(k, t)`: closed form where available, otherwise adaptive quadrature
    /// (absolute tolerance `1e-10`).
    pub fn primitive(&self, k: i64, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            NonlinearityKind::ExampleLog { mu, nu, weight } => {
                let w = weight.weight(*mu, k);
                let g = match &self.profile {
                    None => profile::closed_form(self.p, *nu, t.abs()),
                    Some(prof) => prof.eval(t.abs()),
                };
                g.map(|g| w * g).ok_or(Error::Quadrature { k, t })
            }
            NonlinearityKind::PurePower { q, c } => Ok(c * t.abs().powf(*q) / q),
            NonlinearityKind::Custom(c) => match &c.primitive {
                Some(prim) => Ok(prim(k, t)),
                None => adaptive_simpson(|s| (c.f)(k, s), 0.0, t, QUAD_ABS_TOL, QUAD_BUDGET)
                    .ok_or(Error::Quadrature { k, t }),
            },
        }
    }

    /// `𝓕(k, t) = f(k, t) t - p F(k, t)`.
    pub fn curly_f(&self, k: i64, t: f64) -> Result<f64> {
        Ok(self.f(k, t) * t - self.p * self.primitive(k, t)?)
    }

    /// `F(k, x) / x^p` for `x = exp(ln_x) > 0`, evaluated without forming
    /// `x` when it would overflow. Used on spheres of very large radius.
    pub fn primitive_over_power(&self, k: i64, ln_x: f64) -> Result<f64> {
        let p = self.p;
        match &self.kind {
            NonlinearityKind::ExampleLog { mu, nu, weight } => {
                let w = weight.weight(*mu, k);
                if ln_x * (p + nu).max(2.0) < 600.0 {
                    let x = ln_x.exp();
                    return Ok(self.primitive(k, x)? / x.powf(p));
                }
                // G(x)/x^p = ln(1 + x^ν)/p - ν/p² + O(x^-min(ν, p) ln x)
                Ok(w * (nu * ln_x / p - nu / (p * p)))
            }
            NonlinearityKind::PurePower { q, c } => Ok(c / q * ((q - p) * ln_x).exp()),
            NonlinearityKind::Custom(_) => {
                let x = ln_x.exp();
                Ok(self.primitive(k, x)? / x.powf(p))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log22() -> NonlinearitySpec {
        NonlinearitySpec::example_log(2.0, 2.0, 2.0, WeightConvention::Shifted).unwrap()
    }

    fn trapezoid(g: impl Fn(f64) -> f64, t: f64, n: usize) -> f64 {
        let h = t / n as f64;
        let mut s = 0.5 * (g(0.0) + g(t));
        for i in 1..n {
            s += g(i as f64 * h);
        }
        s * h
    }

    #[test]
    fn example_log_values() {
        let nl = NonlinearitySpec::example_log(2.0, 2.0, 1.0, WeightConvention::Shifted).unwrap();
        assert_eq!(nl.f(5, 0.0), 0.0);
        assert!((nl.f(0, 1.0) - 2f64.ln()).abs() < 1e-15);
        for (k, t) in [(0, 0.3), (3, -2.0), (-7, 11.0)] {
            assert_eq!(nl.f(k, -t), -nl.f(k, t));
        }
    }

    #[test]
    fn weight_conventions() {
        assert_eq!(WeightConvention::Shifted.weight(2.0, -3), 1.0 / 16.0);
        assert_eq!(WeightConvention::Absolute.weight(2.0, -3), 1.0 / 9.0);
        assert_eq!(WeightConvention::Absolute.weight(2.0, 0), 1.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(NonlinearitySpec::example_log(2.0, 1.0, 2.0, WeightConvention::Shifted).is_err());
        assert!(NonlinearitySpec::example_log(2.0, 2.0, 0.5, WeightConvention::Shifted).is_err());
        assert!(NonlinearitySpec::example_log(1.0, 2.0, 2.0, WeightConvention::Shifted).is_err());
        assert!(NonlinearitySpec::pure_power(2.0, 2.0, 1.0).is_err());
        assert!(NonlinearitySpec::pure_power(2.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn pure_power_primitive_and_curly() {
        let nl = NonlinearitySpec::pure_power(2.0, 4.0, 1.0).unwrap();
        assert_eq!(nl.primitive(3, 2.0).unwrap(), 4.0);
        assert_eq!(nl.primitive(3, 0.0).unwrap(), 0.0);
        assert_eq!(nl.curly_f(0, 2.0).unwrap(), 8.0);
        assert_eq!(nl.curly_f(0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn example_log_primitive_matches_trapezoid() {
        let nl = NonlinearitySpec::example_log(2.0, 2.0, 1.0, WeightConvention::Shifted).unwrap();
        let oracle = trapezoid(|s| s * (1.0 + s).ln(), 1.0, 200_000);
        assert!((nl.primitive(0, 1.0).unwrap() - oracle).abs() < 1e-8);
        assert_eq!(nl.primitive(0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_forms_and_quadrature_agree() {
        // integer p with ν in {1, 2} take the closed form; others the cached profile
        let cases = [(2.0, 1.0), (2.0, 2.0), (3.0, 2.0), (4.0, 1.0), (1.5, 1.0), (2.5, 3.0), (3.0, 1.5)];
        for (p, nu) in cases {
            let nl = NonlinearitySpec::example_log(p, 2.0, nu, WeightConvention::Shifted).unwrap();
            for t in [1e-4, 0.3, 0.9, 1.7, 6.0, 40.0] {
                let g = |s: f64| s.powf(p - 1.0) * s.powf(nu).ln_1p();
                let q = adaptive_simpson(g, 0.0, t, 1e-14, QUAD_BUDGET).unwrap();
                let got = nl.primitive(0, t).unwrap();
                assert!((got - q).abs() <= 1e-10 * q.abs().max(1e-3), "p={p} nu={nu} t={t}: {got} vs {q}");
                assert_eq!(nl.primitive(2, -t).unwrap(), nl.primitive(2, t).unwrap());
            }
        }
    }

    #[test]
    fn cached_profile_is_consistent_after_many_calls() {
        let nl = NonlinearitySpec::example_log(1.5, 2.0, 1.0, WeightConvention::Shifted).unwrap();
        let before = nl.primitive(1, 2.345).unwrap();
        for i in 0..3000 {
            nl.primitive(1, 1.0 + i as f64 * 1e-3).unwrap();
        }
        let after = nl.primitive(1, 2.345).unwrap();
        assert!((before - after).abs() < 1e-12 * before.abs());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for nl in [
            log22(),
            NonlinearitySpec::example_log(3.0, 2.0, 1.0, WeightConvention::Absolute).unwrap(),
            NonlinearitySpec::pure_power(2.0, 4.0, 2.0).unwrap(),
            NonlinearitySpec::p_power(2.5, 1.0).unwrap(),
        ] {
            for (k, t) in [(0, 0.7), (2, -1.9), (-4, 3.3)] {
                let h = 1e-6;
                let fd = (nl.f(k, t + h) - nl.f(k, t - h)) / (2.0 * h);
                let d = nl.df(k, t);
                assert!((fd - d).abs() < 1e-6 * d.abs().max(1.0), "{}: {fd} vs {d}", nl.label());
            }
        }
    }

    #[test]
    fn log_space_primitive_continuity() {
        let nl = log22();
        // around the switch point both branches must agree closely
        let ln_x = 150.0;
        let direct = nl.primitive_over_power(0, ln_x).unwrap();
        let asym = 2.0 * ln_x / 2.0 - 2.0 / 4.0;
        assert!((direct - asym).abs() < 1e-12 * asym);
        assert!(nl.primitive_over_power(0, 1e6).unwrap() > 0.0);
    }

    #[test]
    fn custom_without_primitive_uses_quadrature() {
        let nl = NonlinearitySpec::custom(
            2.0,
            CustomNonlinearity {
                name: "cubic".into(),
                f: Arc::new(|_, t| t * t * t),
                primitive: None,
                derivative: None,
            },
        )
        .unwrap();
        assert!((nl.primitive(0, 2.0).unwrap() - 4.0).abs() < 1e-10);
        assert!((nl.df(0, 2.0) - 12.0).abs() < 1e-6);
    }
}
