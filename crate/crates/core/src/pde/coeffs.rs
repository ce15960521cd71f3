//! Angular coefficient functions of the planar L1 median flow.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use super::quad::integrate;

const REL_TOL: f64 = 1e-13;

fn breakpoints(lambda: f64) -> Vec<f64> {
    let s = lambda.min(1.0 / lambda);
    let mut pts = vec![0.0, FRAC_PI_2];
    let mut t = s / 16.0;
    while t < 0.5 {
        pts.push(t);
        pts.push(FRAC_PI_2 - t);
        t *= 4.0;
    }
    pts.push(0.25 * std::f64::consts::PI);
    pts.sort_by(f64::total_cmp);
    pts
}

/// Ratio of angular integrals with weight `(cos^2 + lambda^2 sin^2)^{-3/2}`.
fn ratio(lambda: f64, num: impl Fn(f64, f64) -> f64, den: impl Fn(f64, f64) -> f64) -> f64 {
    let l2 = lambda * lambda;
    let w = |phi: f64| {
        let (s, c) = phi.sin_cos();
        let g = c * c + l2 * s * s;
        (s, c, 1.0 / (g * g.sqrt()))
    };
    let b = breakpoints(lambda);
    let n = integrate(
        |phi| {
            let (s, c, k) = w(phi);
            num(s, c) * k
        },
        &b,
        REL_TOL,
    );
    let d = integrate(
        |phi| {
            let (s, c, k) = w(phi);
            den(s, c) * k
        },
        &b,
        REL_TOL,
    );
    n / d
}

/// `Q1(lambda)`, with `Q1(0) = 1`, `Q1(1) = 1/4` and `lambda Q1(lambda) -> 0` at infinity.
pub fn q1(lambda: f64) -> f64 {
    let lambda = lambda.abs();
    if lambda == 0.0 {
        return 1.0;
    }
    if lambda > 1e12 {
        return 0.0;
    }
    ratio(lambda, |s, c| c * c * s * s, |_, c| c * c)
}

/// `Q2(lambda)`, with `Q2(0) = 1` and `Q2(1) = 3/4`.
pub fn q2(lambda: f64) -> f64 {
    let lambda = lambda.abs();
    if lambda == 0.0 {
        return 1.0;
    }
    if lambda > 1e12 {
        return 1.0 - q1(1.0 / lambda);
    }
    ratio(lambda, |s, _| s * s * s * s, |s, _| s * s)
}

/// Tabulated `Q1`, `Q2` on a logarithmic grid with monotone cubic interpolation.
pub struct QTable {
    log_lo: f64,
    step: f64,
    q1: Vec<f64>,
    q2: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl QTable {
    fn build() -> Self {
        let (log_lo, log_hi, n) = (-8.0f64 * std::f64::consts::LN_10, 8.0 * std::f64::consts::LN_10, 2401);
        let step = (log_hi - log_lo) / (n - 1) as f64;
        let lam = |k: usize| (log_lo + step * k as f64).exp();
        let q1v: Vec<f64> = (0..n).map(|k| q1(lam(k))).collect();
        let q2v: Vec<f64> = (0..n).map(|k| q2(lam(k))).collect();
        let slopes = |v: &[f64]| -> Vec<f64> {
            let delta: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]) / step).collect();
            let mut d = vec![0.0; v.len()];
            d[0] = delta[0];
            d[v.len() - 1] = delta[delta.len() - 1];
            for k in 1..v.len() - 1 {
                d[k] = if delta[k - 1] * delta[k] <= 0.0 { 0.0 } else { 2.0 / (1.0 / delta[k - 1] + 1.0 / delta[k]) };
            }
            d
        };
        QTable { log_lo, step, d1: slopes(&q1v), d2: slopes(&q2v), q1: q1v, q2: q2v }
    }

    /// Shared table, built on first use.
    pub fn global() -> &'static QTable {
        static TABLE: OnceLock<QTable> = OnceLock::new();
        TABLE.get_or_init(QTable::build)
    }

    fn interp(&self, v: &[f64], d: &[f64], lambda: f64) -> Option<f64> {
        let x = (lambda.ln() - self.log_lo) / self.step;
        if !(x >= 0.0 && x <= (v.len() - 1) as f64) {
            return None;
        }
        let k = (x.floor() as usize).min(v.len() - 2);
        let t = x - k as f64;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        Some(h00 * v[k] + h10 * self.step * d[k] + h01 * v[k + 1] + h11 * self.step * d[k + 1])
    }

    pub fn q1(&self, lambda: f64) -> f64 {
        self.interp(&self.q1, &self.d1, lambda.abs()).unwrap_or_else(|| q1(lambda))
    }

    pub fn q2(&self, lambda: f64) -> f64 {
        self.interp(&self.q2, &self.d2, lambda.abs()).unwrap_or_else(|| q2(lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_values() {
        assert!((q1(1.0) - 0.25).abs() < 1e-12);
        assert!((q2(1.0) - 0.75).abs() < 1e-12);
        assert!((q1(1e-9) - 1.0).abs() < 0.2);
        assert!(1e6 * q1(1e6) < 1e-4);
    }
}
