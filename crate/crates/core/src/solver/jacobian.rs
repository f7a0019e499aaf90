use super::tridiag::{solve_tridiagonal, tridiagonal_matvec};
use crate::lattice::{phi_prime, CoefficientField, LatticeSeq, ProblemSpec};

/// Symmetric tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        solve_tridiagonal(&self.sub, &self.diag, &self.sup, rhs)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        tridiagonal_matvec(&self.sub, &self.diag, &self.sup, x)
    }
}

fn clamp(v: f64, cap: f64) -> f64 {
    if v.is_nan() {
        cap
    } else {
        v.clamp(-cap, cap)
    }
}

/// Jacobian of the residual at `u`; `φ_p'` and `∂f/∂t` are clamped to `cap`.
pub fn jacobian(u: &LatticeSeq, spec: &ProblemSpec, cap: f64) -> Tridiagonal {
    let p = spec.p;
    let vals = u.values();
    let n = vals.len();
    let w = u.window();
    let a = spec.coeffs.window();
    assert_eq!(w, a, "coefficients do not cover the window");
    let coeff_a = |i: usize| spec.coeffs.a(w.k_min() + i as i64);
    // bond[i] = a(k_i) φ_p'(u_i - u_{i-1}), i = 0..=n
    let bond: Vec<f64> = (0..=n)
        .map(|i| {
            let hi = if i < n { vals[i] } else { 0.0 };
            let lo = if i > 0 { vals[i - 1] } else { 0.0 };
            coeff_a(i) * clamp(phi_prime(p, hi - lo), cap)
        })
        .collect();
    let diag = (0..n)
        .map(|i| {
            let k = w.site(i);
            bond[i] + bond[i + 1] + spec.coeffs.b(k) * clamp(phi_prime(p, vals[i]), cap)
                - spec.lambda * clamp(spec.nonlinearity.df(k, vals[i]), cap)
        })
        .collect();
    let off: Vec<f64> = (1..n).map(|i| -bond[i]).collect();
    Tridiagonal { sub: off.clone(), diag, sup: off }
}

/// Gram matrix of the `p = 2` version of the space norm; SPD, used to
/// precondition gradient steps.
pub(crate) fn metric(coeffs: &CoefficientField) -> Tridiagonal {
    let w = coeffs.window();
    let n = w.len();
    let a = |i: usize| coeffs.a(w.k_min() + i as i64);
    let diag = (0..n).map(|i| a(i) + a(i + 1) + coeffs.b(w.site(i))).collect();
    let off: Vec<f64> = (1..n).map(|i| -a(i)).collect();
    Tridiagonal { sub: off.clone(), diag, sup: off }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{residual, Window};
    use crate::nonlinearity::{NonlinearitySpec, WeightConvention};

    #[test]
    fn jacobian_matches_finite_differences_of_residual() {
        let w = Window::new(3).unwrap();
        for p in [2.0, 3.0, 2.5] {
            let nl = NonlinearitySpec::example_log(p, 2.0, 2.0, WeightConvention::Shifted).unwrap();
            let coeffs = CoefficientField::new(
                w,
                crate::lattice::Profile::Constant { value: 1.3 },
                crate::lattice::Profile::Polynomial { exponent: 2.0 },
                None,
            )
            .unwrap();
            let spec = ProblemSpec::new(p, 0.7, coeffs, nl).unwrap();
            let u = LatticeSeq::new(w, vec![0.4, -1.1, 2.3, 0.9, -0.2, 1.5, 0.3]).unwrap();
            let jac = jacobian(&u, &spec, 1e8);
            for j in 0..w.len() {
                let h = 1e-6;
                let mut up = u.clone();
                up.values_mut()[j] += h;
                let mut dn = u.clone();
                dn.values_mut()[j] -= h;
                let col: Vec<f64> = residual(&up, &spec)
                    .values()
                    .iter()
                    .zip(residual(&dn, &spec).values())
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect();
                let mut e = vec![0.0; w.len()];
                e[j] = 1.0;
                let exact = jac.matvec(&e);
                for (c, x) in col.iter().zip(&exact) {
                    assert!((c - x).abs() < 1e-6 * x.abs().max(1.0), "p={p}, col {j}: {c} vs {x}");
                }
            }
        }
    }

    #[test]
    fn clamp_applies_below_two() {
        let w = Window::new(1).unwrap();
        let nl = NonlinearitySpec::zero(1.5).unwrap();
        let spec = ProblemSpec::new(1.5, 1.0, CoefficientField::constant(w, 1.0, 1.0).unwrap(), nl).unwrap();
        let jac = jacobian(&LatticeSeq::zeros(w), &spec, 1e8);
        assert!(jac.diag.iter().all(|d| *d == 3e8));
    }
}
