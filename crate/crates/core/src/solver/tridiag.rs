//! Tridiagonal linear solves.

/// Solves `A x = rhs` for tridiagonal `A` with Gaussian elimination and
/// partial pivoting (the `gtsv` scheme). `sub[i] = A[i+1][i]`,
/// `sup[i] = A[i][i+1]`. Returns `None` when a pivot vanishes relative to
/// the matrix scale or the solution is not finite.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    if n == 0 || rhs.len() != n || sub.len() + 1 != n || sup.len() + 1 != n {
        return None;
    }
    let scale = diag
        .iter()
        .chain(sub)
        .chain(sup)
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return None;
    }
    let tiny = scale * 1e-15;
    let mut d = diag.to_vec();
    let dl = sub.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i].abs() <= tiny {
                return None;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
        } else {
            // swap rows i and i+1
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = tmp;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
    }
    if d[n - 1].abs() <= tiny {
        return None;
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
    b.iter().all(|v| v.is_finite()).then_some(b)
}

/// `A x` for tridiagonal `A`.
pub fn tridiagonal_matvec(sub: &[f64], diag: &[f64], sup: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut v = diag[i] * x[i];
            if i > 0 {
                v += sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += sup[i] * x[i + 1];
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn needs_pivoting() {
        // zero leading pivot
        let sub = [1.0, 1.0];
        let diag = [0.0, 1.0, 2.0];
        let sup = [1.0, 3.0];
        let x = [1.0, -2.0, 0.5];
        let rhs = tridiagonal_matvec(&sub, &diag, &sup, &x);
        let got = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for (a, b) in got.iter().zip(x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_is_rejected() {
        assert!(solve_tridiagonal(&[1.0], &[1.0, 1.0], &[1.0], &[1.0, 2.0]).is_none());
        assert!(solve_tridiagonal(&[], &[0.0], &[], &[1.0]).is_none());
    }

    proptest! {
        #[test]
        fn solves_random_systems(
            vals in prop::collection::vec(-5.0f64..5.0, 3 * 12),
            n in 1usize..12,
        ) {
            let diag: Vec<f64> = vals[..n].iter().map(|v| v + 11.0 * v.signum()).collect();
            let sub = vals[12..12 + n - 1].to_vec();
            let sup = vals[24..24 + n - 1].to_vec();
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let rhs = tridiagonal_matvec(&sub, &diag, &sup, &x);
            let got = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
            for (a, b) in got.iter().zip(&x) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
