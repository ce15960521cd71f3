//! Half-space (Tukey) depth and median.

use crate::config::{HALFSPACE_DIRECTIONS, HALFSPACE_EXACT_MAX_N};
use crate::error::{Error, Result};
use crate::geom::{dist, ConvexPolytope, MedianResult, PointN, Status, WeightedPointSet, ORIENT_EPS};

/// Weight of the lightest closed half-plane whose boundary passes through `y`.
pub fn halfspace_depth(y: &[f64], set: &WeightedPointSet) -> Result<f64> {
    set.require_nonempty()?;
    set.require_dim(2)?;
    if y.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: y.len() });
    }
    Ok(depth_2d([y[0], y[1]], &set.to_2d(), set.weights()))
}

pub(crate) fn depth_2d(y: [f64; 2], pts: &[[f64; 2]], w: &[f64]) -> f64 {
    let scale = pts.iter().map(|p| dist(p, &y)).fold(0.0, f64::max);
    let mut base = 0.0;
    let mut rays: Vec<([f64; 2], f64, f64)> = Vec::with_capacity(pts.len());
    for (p, &wi) in pts.iter().zip(w) {
        let a = [p[0] - y[0], p[1] - y[1]];
        if a[0].hypot(a[1]) <= 1e-12 * scale {
            base += wi;
        } else {
            rays.push((a, a[1].atan2(a[0]), wi));
        }
    }
    if rays.is_empty() {
        return base;
    }
    rays.sort_by(|a, b| a.1.total_cmp(&b.1));
    let crs = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    let tol = |a: [f64; 2], b: [f64; 2]| ORIENT_EPS * a[0].hypot(a[1]) * b[0].hypot(b[1]);
    let same = |a: [f64; 2], b: [f64; 2]| crs(a, b).abs() <= tol(a, b) && a[0] * b[0] + a[1] * b[1] > 0.0;
    // Merge rays pointing the same way.
    let mut groups: Vec<([f64; 2], f64)> = Vec::new();
    for (a, _, wi) in rays {
        match groups.last_mut() {
            Some(g) if same(g.0, a) => g.1 += wi,
            _ => groups.push((a, wi)),
        }
    }
    if groups.len() > 1 && same(groups[0].0, groups[groups.len() - 1].0) {
        let (_, wl) = groups.pop().unwrap();
        groups[0].1 += wl;
    }
    let g = groups.len();
    // Open arc (a_k, a_k + pi], i.e. half-plane just past direction k.
    let in_arc = |k: usize, j: usize| {
        let (a, b) = (groups[k].0, groups[j % g].0);
        let c = crs(a, b);
        if c.abs() <= tol(a, b) {
            a[0] * b[0] + a[1] * b[1] < 0.0
        } else {
            c > 0.0
        }
    };
    let mut prefix = vec![0.0; 2 * g + 1];
    for k in 0..2 * g {
        prefix[k + 1] = prefix[k] + groups[k % g].1;
    }
    let mut best = f64::INFINITY;
    let mut end = 1;
    for k in 0..g {
        end = end.max(k + 1);
        while end < k + g && in_arc(k, end) {
            end += 1;
        }
        best = best.min(prefix[end] - prefix[k + 1]);
    }
    base + best
}

/// Approximate depth from `directions` sampled unit normals (planar or spatial data).
pub fn halfspace_depth_sampled(y: &[f64], set: &WeightedPointSet, directions: usize) -> Result<f64> {
    set.require_nonempty()?;
    let dirs = sample_directions(set.dim(), directions)?;
    let mut best = f64::INFINITY;
    for u in &dirs {
        let t: f64 = y.iter().zip(u).map(|(a, b)| a * b).sum();
        let s: f64 =
            set.iter().filter(|(p, _)| p.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() >= t).map(|(_, w)| w).sum();
        best = best.min(s);
    }
    Ok(best)
}

fn sample_directions(dim: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    let count = count.max(4);
    match dim {
        2 => Ok((0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            Ok((0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect())
        }
        d => Err(Error::DimUnsupported(d)),
    }
}

/// Keeps the part of a convex polygon with `<x, u> <= s`.
fn clip(poly: &[[f64; 2]], u: [f64; 2], s: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let f = |p: &[f64; 2]| p[0] * u[0] + p[1] * u[1] - s;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fp, fq) = (f(&p), f(&q));
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Projections of the data along one family of parallel lines, enough to
/// answer "k-th largest" queries in both orientations.
trait TailOracle: Sync {
    fn directions(&self) -> usize;
    fn normal(&self, d: usize) -> [f64; 2];
    /// Largest `t` with weight of `{<x,u> >= t}` at least `k`, and the same for `-u`.
    fn thresholds(&self, d: usize, k: f64) -> Option<(f64, f64)>;
}

/// Exact oracle: one direction per pair of distinct points, plus the axes.
struct PairOracle<'a> {
    pts: &'a [[f64; 2]],
    w: &'a [f64],
    normals: Vec<[f64; 2]>,
    orders: Vec<Vec<u16>>,
}

impl<'a> PairOracle<'a> {
    fn new(pts: &'a [[f64; 2]], w: &'a [f64]) -> Self {
        let mut normals = vec![[1.0, 0.0], [0.0, 1.0]];
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (dx, dy) = (pts[j][0] - pts[i][0], pts[j][1] - pts[i][1]);
                let len = dx.hypot(dy);
                if len > 0.0 {
                    normals.push([-dy / len, dx / len]);
                }
            }
        }
        let orders = normals
            .iter()
            .map(|u| {
                let mut o: Vec<u16> = (0..pts.len() as u16).collect();
                let pr = |i: u16| pts[i as usize][0] * u[0] + pts[i as usize][1] * u[1];
                o.sort_by(|&a, &b| pr(a).total_cmp(&pr(b)));
                o
            })
            .collect();
        PairOracle { pts, w, normals, orders }
    }
}

impl TailOracle for PairOracle<'_> {
    fn directions(&self) -> usize {
        self.normals.len()
    }

    fn normal(&self, d: usize) -> [f64; 2] {
        self.normals[d]
    }

    fn thresholds(&self, d: usize, k: f64) -> Option<(f64, f64)> {
        let u = self.normals[d];
        let pr = |i: u16| self.pts[i as usize][0] * u[0] + self.pts[i as usize][1] * u[1];
        let o = &self.orders[d];
        let mut acc = 0.0;
        let mut hi = None;
        for &i in o.iter().rev() {
            acc += self.w[i as usize];
            if acc >= k {
                hi = Some(pr(i));
                break;
            }
        }
        let mut acc = 0.0;
        let mut lo = None;
        for &i in o {
            acc += self.w[i as usize];
            if acc >= k {
                lo = Some(-pr(i));
                break;
            }
        }
        Some((hi?, lo?))
    }
}

/// Sampled oracle for large unit-weight samples: evenly spread directions,
/// with only the central quantile range of each projection kept in order.
struct SampledOracle {
    normals: Vec<[f64; 2]>,
    /// Sorted central projections and the rank (from the bottom, 0-based) of the first one.
    slices: Vec<(Vec<f64>, usize)>,
    n: usize,
}

impl SampledOracle {
    fn new(pts: &[[f64; 2]], lines: usize, lo_frac: f64) -> Self {
        let n = pts.len();
        let normals: Vec<[f64; 2]> = (0..lines)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / lines as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let a = ((lo_frac * n as f64).floor() as usize).min(n - 1);
        let b = n - a;
        let mut buf = vec![0.0; n];
        let slices = normals
            .iter()
            .map(|u| {
                for (v, p) in buf.iter_mut().zip(pts) {
                    *v = p[0] * u[0] + p[1] * u[1];
                }
                buf.select_nth_unstable_by(a, f64::total_cmp);
                let rest = &mut buf[a..];
                if b > a && b - a < rest.len() {
                    rest.select_nth_unstable_by(b - a, f64::total_cmp);
                }
                let mut s = buf[a..b.max(a + 1)].to_vec();
                s.sort_unstable_by(f64::total_cmp);
                (s, a)
            })
            .collect();
        SampledOracle { normals, slices, n }
    }
}

impl TailOracle for SampledOracle {
    fn directions(&self) -> usize {
        self.normals.len()
    }

    fn normal(&self, d: usize) -> [f64; 2] {
        self.normals[d]
    }

    fn thresholds(&self, d: usize, k: f64) -> Option<(f64, f64)> {
        let k = k.round() as usize;
        let (s, off) = &self.slices[d];
        // k-th largest has bottom rank n - k; k-th smallest has rank k - 1.
        let hi = (self.n - k).checked_sub(*off).and_then(|r| s.get(r))?;
        let lo = (k - 1).checked_sub(*off).and_then(|r| s.get(r))?;
        Some((*hi, -*lo))
    }
}

/// Depth region `D_k` clipped from a box, with absolute slack.
fn region(oracle: &dyn TailOracle, k: f64, start: &[[f64; 2]], slack: f64) -> Option<Vec<[f64; 2]>> {
    let mut poly = start.to_vec();
    for d in 0..oracle.directions() {
        let u = oracle.normal(d);
        let (hi, lo) = oracle.thresholds(d, k)?;
        poly = clip(&poly, u, hi + slack);
        poly = clip(&poly, [-u[0], -u[1]], lo + slack);
        if poly.is_empty() {
            return None;
        }
    }
    Some(poly)
}

/// Merges vertices closer than `tol` and snaps them onto nearby data points.
fn tidy(poly: &[[f64; 2]], pts: &[[f64; 2]], tol: f64) -> Vec<[f64; 2]> {
    let mut clusters: Vec<([f64; 2], usize)> = Vec::new();
    for p in poly {
        match clusters.iter_mut().find(|(c, m)| dist(&[c[0] / *m as f64, c[1] / *m as f64], p) <= tol) {
            Some((c, m)) => {
                c[0] += p[0];
                c[1] += p[1];
                *m += 1;
            }
            None => clusters.push((*p, 1)),
        }
    }
    clusters
        .into_iter()
        .map(|(c, m)| {
            let q = [c[0] / m as f64, c[1] / m as f64];
            pts.iter().copied().find(|x| dist(x, &q) <= tol).unwrap_or(q)
        })
        .collect()
}

fn start_box(set: &WeightedPointSet) -> Vec<[f64; 2]> {
    let (lo, hi) = set.bounding_box();
    let d = set.diameter().max(1.0);
    vec![[lo[0] - d, lo[1] - d], [hi[0] + d, lo[1] - d], [hi[0] + d, hi[1] + d], [lo[0] - d, hi[1] + d]]
}

/// Deepest region by bisection on the depth level.
fn deepest(
    oracle: &dyn TailOracle,
    set: &WeightedPointSet,
    integral: bool,
    k_min: f64,
    k_max: f64,
) -> Option<(f64, Vec<[f64; 2]>)> {
    let start = start_box(set);
    let slack = 1e-10 * set.diameter().max(f64::MIN_POSITIVE);
    let unit = set.weight(0);
    let mut lo_k = k_min;
    let mut lo_poly = region(oracle, lo_k, &start, slack)?;
    let mut hi_k = k_max;
    if let Some(p) = region(oracle, k_max, &start, slack) {
        return Some((k_max, p));
    }
    for _ in 0..200 {
        let mid = if integral { ((lo_k + hi_k) / (2.0 * unit)).floor() * unit } else { 0.5 * (lo_k + hi_k) };
        if mid <= lo_k || mid >= hi_k {
            break;
        }
        match region(oracle, mid, &start, slack) {
            Some(p) => {
                lo_k = mid;
                lo_poly = p;
            }
            None => hi_k = mid,
        }
    }
    Some((lo_k, lo_poly))
}

/// Half-space median: the region of maximal depth. The `objective_value` of
/// the result holds that maximal depth. Up to the configured size the
/// computation is exact; larger samples use sampled directions.
pub fn median_halfspace(set: &WeightedPointSet) -> Result<MedianResult> {
    set.require_nonempty()?;
    set.require_dim(2)?;
    if set.len() > HALFSPACE_EXACT_MAX_N {
        return median_halfspace_sampled(set, HALFSPACE_DIRECTIONS);
    }
    let pts = set.to_2d();
    let w = set.weights();
    let integral = w.iter().all(|&x| x == w[0]);
    let oracle = PairOracle::new(&pts, w);
    let total = set.total_weight();
    let diam = set.diameter();
    let mut cap = total;
    loop {
        let (k, poly) = deepest(&oracle, set, integral, w[0].min(total), cap)
            .ok_or_else(|| Error::DegenerateData("empty depth region".into()))?;
        let verts = tidy(&poly, &pts, 1e-7 * diam.max(f64::MIN_POSITIVE));
        let hull = ConvexPolytope::hull_2d(&verts);
        let rep = if hull.is_point() { hull.vertices()[0].coords().to_vec() } else { hull.centroid() };
        let depth = depth_2d([rep[0], rep[1]], &pts, w);
        if depth >= k * (1.0 - 1e-12) || cap <= w[0] {
            return Ok(MedianResult::exact(rep, Some(hull), Some(depth)));
        }
        cap = if integral { k - w[0] } else { depth };
    }
}

/// Half-space median restricted to `lines` evenly spaced direction pairs.
/// Intended for large unit-weight samples; other weights fall back to the pair oracle.
pub fn median_halfspace_sampled(set: &WeightedPointSet, lines: usize) -> Result<MedianResult> {
    set.require_nonempty()?;
    set.require_dim(2)?;
    let pts = set.to_2d();
    let w = set.weights();
    if !w.iter().all(|&x| x == w[0]) {
        return Err(Error::InvalidInput("sampled half-space median needs equal weights".into()));
    }
    let n = pts.len();
    let oracle = SampledOracle::new(&pts, lines.max(3), 0.3);
    let k_min = (0.3 * n as f64).floor().max(1.0) + 1.0;
    let k_max = (n as f64 / 2.0).ceil();
    let (k, poly) = deepest(&oracle, set, true, k_min.min(k_max), k_max)
        .or_else(|| {
            let full = SampledOracle::new(&pts, lines.max(3), 0.0);
            deepest(&full, set, true, 1.0, k_max)
        })
        .ok_or_else(|| Error::DegenerateData("empty depth region".into()))?;
    let hull = ConvexPolytope::hull_2d(&poly);
    let rep = hull.centroid();
    Ok(MedianResult {
        representative: PointN::new(rep)?,
        median_set: Some(hull),
        objective_value: Some(k * w[0]),
        iterations: 0,
        status: Status::Converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_with_inner_point() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [1.0, 1.0]]).unwrap();
        assert_eq!(halfspace_depth(&[1.0, 1.0], &set).unwrap(), 2.0);
        assert_eq!(halfspace_depth(&[0.5, 0.5], &set).unwrap(), 1.0);
        assert_eq!(halfspace_depth(&[5.0, 5.0], &set).unwrap(), 0.0);
        let r = median_halfspace(&set).unwrap();
        assert_eq!(r.representative.coords(), &[1.0, 1.0]);
        assert_eq!(r.objective_value, Some(2.0));
    }

    #[test]
    fn square_has_its_centre() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let r = median_halfspace(&set).unwrap();
        assert!(dist(r.representative.coords(), &[0.5, 0.5]) < 1e-9);
        assert!(r.median_set.unwrap().is_point());
        assert_eq!(r.objective_value, Some(2.0));
    }

    #[test]
    fn three_points_give_the_triangle() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let r = median_halfspace(&set).unwrap();
        assert_eq!(r.median_set.unwrap().vertices().len(), 3);
        assert_eq!(r.objective_value, Some(1.0));
    }
}
