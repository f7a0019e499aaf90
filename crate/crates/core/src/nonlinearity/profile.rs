//! The k-independent profile `G(x) = ∫_0^x s^(p-1) ln(1 + s^ν) ds`, so that
//! the logarithmic example has `F(k, t) = w(k) G(|t|)`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use super::quadrature::{adaptive_simpson, QUAD_ABS_TOL, QUAD_BUDGET};
use crate::lattice::compensated_sum;

/// Calls after which the interpolation table is built.
const CACHE_AFTER_CALLS: usize = 1000;
const TABLE_RATIO: f64 = 1.001;
const TABLE_X_MAX: f64 = 1e8;
/// Below `x^ν = SERIES_LIMIT` the power series is used.
const SERIES_LIMIT: f64 = 0.25;

pub(crate) fn has_closed_form(p: f64, nu: f64) -> bool {
    p.fract() == 0.0 && (2.0..=24.0).contains(&p) && (nu == 1.0 || nu == 2.0)
}

fn integrand(p: f64, nu: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.powf(p - 1.0) * s.powf(nu).ln_1p()
    }
}

/// `Σ_{m>=1} (-1)^(m+1)/m · x^(p+mν)/(p+mν)`, valid for `x^ν < 1`.
fn series(p: f64, nu: f64, x: f64) -> f64 {
    let y = x.powf(nu);
    let xp = x.powf(p);
    let mut ym = 1.0;
    let mut terms = Vec::with_capacity(64);
    for m in 1..400 {
        ym *= y;
        let mf = m as f64;
        let term = ym * xp / (mf * (p + mf * nu));
        let term = if m % 2 == 1 { term } else { -term };
        terms.push(term);
        if term.abs() < 1e-18 * terms[0].abs() {
            break;
        }
    }
    compensated_sum(terms.into_iter().rev())
}

/// Closed form for integer `p` and `ν ∈ {1, 2}`.
pub(crate) fn closed_form(p: f64, nu: f64, x: f64) -> Option<f64> {
    if x == 0.0 {
        return Some(0.0);
    }
    if x.powf(nu) <= SERIES_LIMIT {
        return Some(series(p, nu, x));
    }
    let n = p as i32;
    let value = if nu == 1.0 {
        // ∫_0^x s^n/(1+s) ds = Σ_{j=1}^n (-1)^(n-j) x^j/j + (-1)^n ln(1+x)
        let mut terms: Vec<f64> = (1..=n)
            .map(|j| {
                let t = x.powi(j) / j as f64;
                if (n - j) % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .collect();
        let l = x.ln_1p();
        terms.push(if n % 2 == 0 { l } else { -l });
        let int = compensated_sum(terms);
        x.powi(n) / p * x.ln_1p() - int / p
    } else {
        // I_m = ∫_0^x s^m/(1+s²) ds = x^(m-1)/(m-1) - I_(m-2)
        let m_target = n + 1;
        let (mut m, mut int) = if m_target % 2 == 1 {
            (1, 0.5 * (x * x).ln_1p())
        } else {
            (0, x.atan())
        };
        while m < m_target {
            m += 2;
            int = x.powi(m - 1) / (m - 1) as f64 - int;
        }
        x.powi(n) / p * (x * x).ln_1p() - 2.0 / p * int
    };
    Some(value)
}

struct Table {
    x0: f64,
    ln_ratio: f64,
    xs: Vec<f64>,
    gs: Vec<f64>,
    dgs: Vec<f64>,
}

/// Quadrature-backed profile with a lazily built cubic Hermite table.
pub(crate) struct LogProfile {
    p: f64,
    nu: f64,
    x0: f64,
    g0: f64,
    calls: AtomicUsize,
    table: OnceLock<Option<Table>>,
}

impl std::fmt::Debug for LogProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LogProfile")
            .field("p", &self.p)
            .field("nu", &self.nu)
            .field("cached", &self.table.get().is_some())
            .finish()
    }
}

impl LogProfile {
    pub(crate) fn new(p: f64, nu: f64) -> Self {
        let x0 = SERIES_LIMIT.powf(1.0 / nu);
        LogProfile { p, nu, x0, g0: series(p, nu, x0), calls: AtomicUsize::new(0), table: OnceLock::new() }
    }

    fn quad(&self, from: f64, to: f64) -> Option<f64> {
        let (p, nu) = (self.p, self.nu);
        adaptive_simpson(|s| integrand(p, nu, s), from, to, QUAD_ABS_TOL.min(1e-13), QUAD_BUDGET)
    }

    fn build(&self) -> Option<Table> {
        let ln_ratio = TABLE_RATIO.ln();
        let count = ((TABLE_X_MAX / self.x0).ln() / ln_ratio).ceil() as usize + 1;
        let mut xs = Vec::with_capacity(count);
        let mut gs = Vec::with_capacity(count);
        let mut pieces = vec![self.g0];
        let mut x_prev = self.x0;
        xs.push(self.x0);
        gs.push(self.g0);
        for i in 1..count {
            let x = self.x0 * (i as f64 * ln_ratio).exp();
            pieces.push(self.quad(x_prev, x)?);
            xs.push(x);
            gs.push(compensated_sum(pieces.iter().copied()));
            x_prev = x;
        }
        let dgs = xs.iter().map(|x| integrand(self.p, self.nu, *x)).collect();
        Some(Table { x0: self.x0, ln_ratio, xs, gs, dgs })
    }

    pub(crate) fn eval(&self, x: f64) -> Option<f64> {
        if x == 0.0 {
            return Some(0.0);
        }
        if x <= self.x0 {
            return Some(series(self.p, self.nu, x));
        }
        let calls = self.calls.fetch_add(1, Ordering::Relaxed);
        let table = if calls >= CACHE_AFTER_CALLS {
            self.table.get_or_init(|| self.build()).as_ref()
        } else {
            self.table.get().and_then(|t| t.as_ref())
        };
        if let Some(t) = table {
            if let Some(v) = t.interpolate(x) {
                return Some(v);
            }
            let last = *t.xs.last()?;
            return Some(t.gs.last()? + self.quad(last, x)?);
        }
        Some(self.g0 + self.quad(self.x0, x)?)
    }
}

impl Table {
    fn interpolate(&self, x: f64) -> Option<f64> {
        let pos = (x / self.x0).ln() / self.ln_ratio;
        let i = (pos.floor() as usize).min(self.xs.len().saturating_sub(2));
        if x > *self.xs.last()? {
            return None;
        }
        let (xa, xb) = (self.xs[i], self.xs[i + 1]);
        let h = xb - xa;
        let s = (x - xa) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Some(h00 * self.gs[i] + h10 * h * self.dgs[i] + h01 * self.gs[i + 1] + h11 * h * self.dgs[i + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_p2_nu2() {
        let x: f64 = 1.0;
        let expect = 0.5 * ((1.0 + x * x) * (x * x).ln_1p() - x * x);
        assert!((closed_form(2.0, 2.0, x).unwrap() - expect).abs() < 1e-15);
        let x: f64 = 0.1;
        let expect = 0.5 * ((1.0 + x * x) * (x * x).ln_1p() - x * x);
        assert!((closed_form(2.0, 2.0, x).unwrap() - expect).abs() < 1e-18);
    }

    #[test]
    fn series_agrees_with_closed_form_at_switch() {
        for (p, nu) in [(2.0, 1.0), (3.0, 2.0), (5.0, 1.0)] {
            let x: f64 = SERIES_LIMIT.powf(1.0 / nu);
            let s = series(p, nu, x);
            let int = adaptive_simpson(|s| integrand(p, nu, s), 0.0, x, 1e-16, QUAD_BUDGET).unwrap();
            assert!((s - int).abs() < 1e-14, "{p} {nu}");
        }
    }

    #[test]
    fn table_interpolation_accuracy() {
        let prof = LogProfile::new(1.5, 1.0);
        let table = prof.build().unwrap();
        for x in [0.7, 1.3, 9.9, 123.4, 5.5e4] {
            let direct = prof.g0 + prof.quad(prof.x0, x).unwrap();
            let interp = table.interpolate(x).unwrap();
            assert!((direct - interp).abs() < 1e-11 * direct, "x={x}: {direct} vs {interp}");
        }
    }
}
