//! Univariate medians of samples, weighted samples and densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::WeightedPointSet;

/// Closed interval `[lo, hi]`, possibly a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidInput(format!("interval bounds out of order: {lo} > {hi}")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Pivot rule for selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pivot {
    #[default]
    Random,
    MedianOfMedians,
}

/// k-th smallest element (1-based) in expected linear time.
pub fn select_kth(xs: &[f64], k: usize) -> Result<f64> {
    select_kth_with(xs, k, Pivot::Random)
}

pub fn select_kth_with(xs: &[f64], k: usize, pivot: Pivot) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if k == 0 || k > xs.len() {
        return Err(Error::IndexOutOfRange { k, n: xs.len() });
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("NaN in sample".into()));
    }
    let mut v = xs.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(xs.len() as u64);
    Ok(select_in_place(&mut v, k - 1, pivot, &mut rng))
}

fn select_in_place(v: &mut [f64], mut k: usize, pivot: Pivot, rng: &mut ChaCha8Rng) -> f64 {
    let mut lo = 0;
    let mut hi = v.len();
    loop {
        if hi - lo <= 16 {
            v[lo..hi].sort_by(f64::total_cmp);
            return v[lo + k];
        }
        let p = match pivot {
            Pivot::Random => v[rng.random_range(lo..hi)],
            Pivot::MedianOfMedians => median_of_medians(&v[lo..hi]),
        };
        // Three-way partition of v[lo..hi] around p.
        let (mut lt, mut i, mut gt) = (lo, lo, hi);
        while i < gt {
            if v[i] < p {
                v.swap(lt, i);
                lt += 1;
                i += 1;
            } else if v[i] > p {
                gt -= 1;
                v.swap(i, gt);
            } else {
                i += 1;
            }
        }
        let (nl, ne) = (lt - lo, gt - lt);
        if k < nl {
            hi = lt;
        } else if k < nl + ne {
            return p;
        } else {
            k -= nl + ne;
            lo = gt;
        }
    }
}

fn median_of_medians(v: &[f64]) -> f64 {
    let mut meds: Vec<f64> = v
        .chunks(5)
        .map(|c| {
            let mut c = c.to_vec();
            c.sort_by(f64::total_cmp);
            c[(c.len() - 1) / 2]
        })
        .collect();
    let k = (meds.len() - 1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    select_in_place(&mut meds, k, Pivot::MedianOfMedians, &mut rng)
}

/// Rank median: the middle order statistic, or the interval between the two middle ones.
pub fn median_rank(xs: &[f64]) -> Result<Interval> {
    let n = xs.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if n % 2 == 1 {
        Ok(Interval::point(select_kth(xs, n / 2 + 1)?))
    } else {
        Interval::new(select_kth(xs, n / 2)?, select_kth(xs, n / 2 + 1)?)
    }
}

fn check_weighted(values: &[f64], weights: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: values.len(), found: weights.len() });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidInput("weights must be finite and positive".into()));
    }
    Ok(())
}

/// Distinct sorted values with their accumulated weights.
fn grouped(values: &[f64], weights: &[f64]) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    for (v, w) in pairs {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    out
}

/// Weighted median. The lower median is the least value whose closed left
/// half-line carries at least half the weight; the symmetric median also
/// requires half the weight on the closed right half-line and may be an interval.
pub fn median_weighted(values: &[f64], weights: &[f64], symmetric: bool) -> Result<Interval> {
    check_weighted(values, weights)?;
    let g = grouped(values, weights);
    let total: f64 = g.iter().map(|p| p.1).sum();
    let half = 0.5 * total;
    let mut acc = 0.0;
    let mut lower = g.len() - 1;
    for (k, &(_, w)) in g.iter().enumerate() {
        acc += w;
        if acc >= half {
            lower = k;
            break;
        }
    }
    if !symmetric {
        return Ok(Interval::point(g[lower].0));
    }
    let mut acc = 0.0;
    let mut upper = 0;
    for (k, &(_, w)) in g.iter().enumerate().rev() {
        acc += w;
        if acc >= half {
            upper = k;
            break;
        }
    }
    Ok(Interval { lo: g[lower.min(upper)].0, hi: g[lower.max(upper)].0 })
}

/// Symmetric weighted median of the single coordinate of a 1-D set.
pub fn median_weighted_set(set: &WeightedPointSet, symmetric: bool) -> Result<Interval> {
    set.require_nonempty()?;
    set.require_dim(1)?;
    median_weighted(set.coords(), set.weights(), symmetric)
}

/// Median by stripping extrema: repeatedly delete the endpoint of smaller
/// half-line depth (both on ties) and return the hull of the last deletion.
pub fn median_extrema_stripping(values: &[f64], weights: &[f64]) -> Result<Interval> {
    check_weighted(values, weights)?;
    let g = grouped(values, weights);
    let (mut l, mut r) = (0usize, g.len() - 1);
    let (mut left_gone, mut right_gone) = (0.0, 0.0);
    loop {
        if l == r {
            return Ok(Interval::point(g[l].0));
        }
        let dl = left_gone + g[l].1;
        let dr = right_gone + g[r].1;
        if dl == dr {
            if r == l + 1 {
                return Ok(Interval { lo: g[l].0, hi: g[r].0 });
            }
            left_gone = dl;
            right_gone = dr;
            l += 1;
            r -= 1;
        } else if dl < dr {
            left_gone = dl;
            l += 1;
        } else {
            right_gone = dr;
            r -= 1;
        }
    }
}

/// Half-line depth `min(w(x <= mu), w(x >= mu))`.
pub fn halfline_depth(mu: f64, values: &[f64], weights: &[f64]) -> f64 {
    let (mut left, mut right) = (0.0, 0.0);
    for (&v, &w) in values.iter().zip(weights) {
        if v <= mu {
            left += w;
        }
        if v >= mu {
            right += w;
        }
    }
    left.min(right)
}

/// Weighted sum of absolute deviations.
pub fn l1_objective(mu: f64, values: &[f64], weights: &[f64]) -> f64 {
    values.iter().zip(weights).map(|(v, w)| w * (v - mu).abs()).sum()
}

/// Density made of polynomial pieces plus point masses. Piece `k` lives on
/// `[breaks[k], breaks[k+1]]` and is `sum_j c[j] (x - breaks[k])^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDensity1D {
    breaks: Vec<f64>,
    pieces: Vec<Vec<f64>>,
    peaks: Vec<(f64, f64)>,
}

impl PiecewiseDensity1D {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Vec<f64>>, peaks: Vec<(f64, f64)>) -> Result<Self> {
        if breaks.len() != pieces.len() + 1 && !(pieces.is_empty() && breaks.is_empty()) {
            return Err(Error::InvalidDensity("need one more breakpoint than pieces".into()));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidDensity("breakpoints must increase strictly".into()));
        }
        if peaks.iter().any(|&(x, w)| !(x.is_finite() && w > 0.0)) {
            return Err(Error::InvalidDensity("peaks need finite positions and positive mass".into()));
        }
        let mut peaks = peaks;
        peaks.sort_by(|a, b| a.0.total_cmp(&b.0));
        let d = PiecewiseDensity1D { breaks, pieces, peaks };
        for k in 0..d.pieces.len() {
            let (a, b) = (d.breaks[k], d.breaks[k + 1]);
            for s in 0..=64 {
                let x = a + (b - a) * s as f64 / 64.0;
                if d.piece_value(k, x) < -1e-12 {
                    return Err(Error::InvalidDensity(format!("negative density at {x}")));
                }
            }
        }
        let total = d.cdf(f64::INFINITY);
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("total mass {total} differs from 1")));
        }
        Ok(d)
    }

    /// Uniform density on `[a, b]`.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![vec![1.0 / (b - a)]], vec![])
    }

    /// Point masses only.
    pub fn discrete(peaks: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(vec![], vec![], peaks)
    }

    fn piece_value(&self, k: usize, x: f64) -> f64 {
        let t = x - self.breaks[k];
        self.pieces[k].iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    fn piece_integral(&self, k: usize, x: f64) -> f64 {
        let t = x - self.breaks[k];
        self.pieces[k].iter().enumerate().rev().fold(0.0, |acc, (j, c)| acc * t + c / (j + 1) as f64) * t
    }

    pub fn has_peaks(&self) -> bool {
        !self.peaks.is_empty()
    }

    pub fn support(&self) -> (f64, f64) {
        let mut lo = self.breaks.first().copied().unwrap_or(f64::INFINITY);
        let mut hi = self.breaks.last().copied().unwrap_or(f64::NEG_INFINITY);
        for &(x, _) in &self.peaks {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        (lo, hi)
    }

    /// Value of the continuous part.
    pub fn density(&self, x: f64) -> f64 {
        if self.pieces.is_empty() || x < self.breaks[0] || x > *self.breaks.last().unwrap() {
            return 0.0;
        }
        let k = self.breaks.partition_point(|&b| b <= x).saturating_sub(1).min(self.pieces.len() - 1);
        self.piece_value(k, x)
    }

    /// Continuous mass of `(-inf, x]`.
    pub fn continuous_cdf(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.pieces.len() {
            let (a, b) = (self.breaks[k], self.breaks[k + 1]);
            if x <= a {
                break;
            }
            acc += self.piece_integral(k, x.min(b));
        }
        acc
    }

    /// Total mass of `(-inf, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.continuous_cdf(x) + self.peaks.iter().filter(|p| p.0 <= x).map(|p| p.1).sum::<f64>()
    }

    /// Total mass of `[x, inf)`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        let total = self.continuous_cdf(f64::INFINITY);
        total - self.continuous_cdf(x) + self.peaks.iter().filter(|p| p.0 >= x).map(|p| p.1).sum::<f64>()
    }
}

/// Median of a density: lower median, or the symmetric median interval.
pub fn median_density(gamma: &PiecewiseDensity1D, symmetric: bool) -> Result<Interval> {
    let (a, b) = gamma.support();
    if !(a <= b) {
        return Err(Error::EmptyInput);
    }
    let span = (b - a).max(1.0);
    let snap = |x: f64| {
        for &(p, _) in &gamma.peaks {
            if (p - x).abs() <= 1e-12 * span {
                return p;
            }
        }
        x
    };
    // Least x with cdf(x) >= 1/2.
    let (mut lo, mut hi) = (a, b);
    if gamma.cdf(a) >= 0.5 {
        hi = a;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gamma.cdf(mid) >= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lower = snap(hi);
    if !symmetric {
        return Ok(Interval::point(lower));
    }
    // Greatest x with upper_tail(x) >= 1/2.
    let (mut lo, mut hi) = (a, b);
    if gamma.upper_tail(b) >= 0.5 {
        lo = b;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gamma.upper_tail(mid) >= 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let upper = snap(lo);
    if upper - lower <= 1e-12 * span {
        let m = if gamma.peaks.iter().any(|p| p.0 == lower) { lower } else { 0.5 * (lower + upper) };
        return Ok(Interval::point(if gamma.peaks.iter().any(|p| p.0 == upper) { upper } else { m }));
    }
    Ok(Interval { lo: lower.min(upper), hi: lower.max(upper) })
}

/// Continuous stripping of extrema: both support ends move inward at speed
/// `1/gamma`, removing mass at unit rate from each side, until they meet.
/// Integrated with classical RK4 in the removed-mass variable with step `mass_step`.
pub fn median_density_ode(gamma: &PiecewiseDensity1D, mass_step: f64) -> Result<f64> {
    if gamma.has_peaks() {
        return Err(Error::InvalidDensity("continuous stripping needs a density without point masses".into()));
    }
    if !(mass_step > 0.0 && mass_step < 0.25) {
        return Err(Error::InvalidInput("mass step must lie in (0, 0.25)".into()));
    }
    let (a0, b0) = gamma.support();
    let width = b0 - a0;
    for s in 1..1024 {
        let x = a0 + width * s as f64 / 1024.0;
        if gamma.density(x) <= 0.0 {
            return Err(Error::DensityVanishesInside(x));
        }
    }
    // Points where the removed mass from the left (resp. right) equals m.
    let invert_left = |m: f64| {
        let (mut lo, mut hi) = (a0, b0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gamma.continuous_cdf(mid) < m {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let invert_right = |m: f64| {
        let (mut lo, mut hi) = (a0, b0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - gamma.continuous_cdf(mid) > m {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let rate = |x: f64, dir: f64| -> Result<f64> {
        let g = gamma.density(x);
        if g <= 0.0 {
            return Err(Error::DensityVanishesInside(x));
        }
        Ok(dir / g)
    };
    let rk4 = |x: f64, h: f64, dir: f64| -> Result<f64> {
        let k1 = rate(x, dir)?;
        let k2 = rate(x + 0.5 * h * k1, dir)?;
        let k3 = rate(x + 0.5 * h * k2, dir)?;
        let k4 = rate(x + h * k3, dir)?;
        Ok(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    };
    // The first quanta are placed by inverting the distribution function,
    // which avoids the 1/gamma singularity where the density vanishes at an end.
    const START_QUANTA: usize = 8;
    let mut m = START_QUANTA as f64 * mass_step;
    let mut a = invert_left(m);
    let mut b = invert_right(m);
    while 1.0 - 2.0 * m >= 2.0 * mass_step {
        a = rk4(a, mass_step, 1.0)?;
        b = rk4(b, mass_step, -1.0)?;
        m += mass_step;
    }
    let rest = 0.5 * (1.0 - 2.0 * m);
    if rest > 0.0 {
        a = rk4(a, rest, 1.0)?;
        b = rk4(b, rest, -1.0)?;
    }
    Ok(0.5 * (a + b))
}
