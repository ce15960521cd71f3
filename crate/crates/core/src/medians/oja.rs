//! Oja simplex median: exact planar solver, large-sample solver, 3-D and 2-in-3 variants.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};

use crate::config::{OJA_EXACT_MAX_N, SET_REL_TOL};
use crate::error::{Error, Result};
use crate::geom::{dist, intersect_lines, ConvexPolytope, MedianResult, PointN, Status, WeightedPointSet};
use crate::hull::hull_indices;
use crate::univariate::median_weighted;

/// Solver selection for the Oja median.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OjaMode {
    /// Exact minimiser set (planar data only).
    Exact,
    /// Iterative descent; the only choice in three dimensions.
    Subgradient,
    /// Exact up to the configured size, iterative above it.
    #[default]
    Auto,
}

/// Sum of weighted simplex volumes spanned by `mu` and each pair (plane) or triple (space).
pub fn oja_objective(mu: &[f64], set: &WeightedPointSet) -> Result<f64> {
    set.require_nonempty()?;
    let n = set.len();
    match set.dim() {
        2 => {
            let mut e = 0.0;
            for i in 0..n {
                let a = set.point(i);
                for j in i + 1..n {
                    let b = set.point(j);
                    let det = (a[0] - mu[0]) * (b[1] - mu[1]) - (a[1] - mu[1]) * (b[0] - mu[0]);
                    e += set.weight(i) * set.weight(j) * 0.5 * det.abs();
                }
            }
            Ok(e)
        }
        3 => {
            let m = Vector3::from_column_slice(mu);
            let p: Vec<Vector3<f64>> = set.points().map(|q| Vector3::from_column_slice(q) - m).collect();
            let mut e = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let c = p[i].cross(&p[j]);
                    let wij = set.weight(i) * set.weight(j);
                    for k in j + 1..n {
                        e += wij * set.weight(k) * c.dot(&p[k]).abs() / 6.0;
                    }
                }
            }
            Ok(e)
        }
        d => Err(Error::DimUnsupported(d)),
    }
}

/// Term `c |n . x - d|` of the planar objective, one per pair of distinct points.
#[derive(Debug, Clone, Copy)]
struct PairLine {
    n: [f64; 2],
    d: f64,
    c: f64,
}

impl PairLine {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.c * (self.n[0] * x + self.n[1] * y - self.d).abs()
    }

    fn swapped(&self) -> PairLine {
        PairLine { n: [self.n[1], self.n[0]], d: self.d, c: self.c }
    }
}

fn pair_lines(pts: &[[f64; 2]], w: &[f64]) -> Vec<PairLine> {
    let mut lines = Vec::with_capacity(pts.len() * pts.len().saturating_sub(1) / 2);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (dx, dy) = (pts[j][0] - pts[i][0], pts[j][1] - pts[i][1]);
            let len = dx.hypot(dy);
            if len == 0.0 {
                continue;
            }
            let n = [-dy / len, dx / len];
            lines.push(PairLine { n, d: n[0] * pts[i][0] + n[1] * pts[i][1], c: 0.5 * w[i] * w[j] * len });
        }
    }
    lines
}

fn lines_objective(lines: &[PairLine], x: f64, y: f64) -> f64 {
    lines.iter().map(|l| l.eval(x, y)).sum()
}

/// `min_y E(x, y)` and its minimiser, via a weighted median of the crossing heights.
fn profile(lines: &[PairLine], x: f64, ys: &mut Vec<f64>, ws: &mut Vec<f64>) -> (f64, f64) {
    ys.clear();
    ws.clear();
    for l in lines {
        if l.n[1].abs() > 1e-12 {
            ys.push((l.d - l.n[0] * x) / l.n[1]);
            ws.push(l.c * l.n[1].abs());
        }
    }
    let y = if ys.is_empty() { 0.0 } else { median_weighted(ys, ws, false).map(|iv| iv.lo).unwrap_or(0.0) };
    (lines_objective(lines, x, y), y)
}

fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    if fm <= fc.min(fd) {
        m
    } else if fc <= fd {
        c
    } else {
        d
    }
}

/// Extent of the sublevel set `{f <= level}` of a convex function, given a point inside.
fn sublevel_range<F: FnMut(f64) -> f64>(mut f: F, lo_bound: f64, inside: f64, hi_bound: f64, level: f64) -> (f64, f64) {
    let mut edge = |mut out: f64, mut inn: f64| {
        if f(out) <= level {
            return out;
        }
        for _ in 0..100 {
            let mid = 0.5 * (out + inn);
            if f(mid) <= level {
                inn = mid;
            } else {
                out = mid;
            }
        }
        inn
    };
    (edge(lo_bound, inside), edge(hi_bound, inside))
}

fn is_collinear(pts: &[[f64; 2]]) -> bool {
    hull_indices(pts).len() < 3
}

/// Exact planar Oja median set.
///
/// The objective is a convex piecewise-linear function whose pieces are cut by
/// the lines through pairs of data points. A nested golden-section search over
/// exact inner weighted medians locates the optimal value; the vertices of the
/// line arrangement inside the near-optimal bounding box are then evaluated
/// exactly and their optimal ones span the median set.
fn oja_exact_2d(set: &WeightedPointSet) -> Result<MedianResult> {
    let pts = set.to_2d();
    let w = set.weights();
    if is_collinear(&pts) {
        return Err(Error::DegenerateData("points are collinear; lift them off the line to use the Oja median".into()));
    }
    let lines = pair_lines(&pts, w);
    let swapped: Vec<PairLine> = lines.iter().map(PairLine::swapped).collect();
    let (lo, hi) = set.bounding_box();
    let diam = set.diameter();
    let pad = 0.01 * diam;
    let (mut ys, mut ws) = (Vec::new(), Vec::new());
    let x_star = golden_min(|x| profile(&lines, x, &mut ys, &mut ws).0, lo[0] - pad, hi[0] + pad);
    let (e_star, y_star) = profile(&lines, x_star, &mut ys, &mut ws);
    let level = e_star * (1.0 + SET_REL_TOL) + f64::MIN_POSITIVE;
    let (xa, xb) = sublevel_range(|x| profile(&lines, x, &mut ys, &mut ws).0, lo[0] - pad, x_star, hi[0] + pad, level);
    let (ya, yb) =
        sublevel_range(|y| profile(&swapped, y, &mut ys, &mut ws).0, lo[1] - pad, y_star, hi[1] + pad, level);
    let slack = 1e-9 * diam;
    let (bx0, bx1, by0, by1) = (xa - slack, xb + slack, ya - slack, yb + slack);
    let centre = [0.5 * (bx0 + bx1), 0.5 * (by0 + by1)];
    let half_diag = 0.5 * (bx1 - bx0).hypot(by1 - by0);
    let near: Vec<&PairLine> =
        lines.iter().filter(|l| (l.n[0] * centre[0] + l.n[1] * centre[1] - l.d).abs() <= half_diag + slack).collect();
    let inside = |p: [f64; 2]| p[0] >= bx0 && p[0] <= bx1 && p[1] >= by0 && p[1] <= by1;
    let mut cands: Vec<[f64; 2]> = pts.iter().copied().filter(|p| inside(*p)).collect();
    for i in 0..near.len() {
        for j in i + 1..near.len() {
            if let Some(p) = intersect_lines(near[i].n, near[i].d, near[j].n, near[j].d) {
                if inside(p) {
                    cands.push(p);
                }
            }
        }
    }
    if cands.is_empty() {
        cands.push([x_star, y_star]);
    }
    let vals: Vec<f64> = cands.iter().map(|p| lines_objective(&lines, p[0], p[1])).collect();
    let best = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let keep = best * (1.0 + SET_REL_TOL) + f64::MIN_POSITIVE;
    // Near-coincident vertices are one arrangement vertex computed several ways.
    let merge = 1e-12 * diam;
    let mut opt: Vec<[f64; 2]> = Vec::new();
    for (p, v) in cands.iter().zip(&vals) {
        if *v > keep {
            continue;
        }
        let p = pts.iter().copied().find(|x| dist(x, p) <= merge).unwrap_or(*p);
        if !opt.iter().any(|q| dist(q, &p) <= merge) {
            opt.push(p);
        }
    }
    let poly = ConvexPolytope::hull_2d(&opt);
    let rep = if poly.is_point() { poly.vertices()[0].coords().to_vec() } else { poly.centroid() };
    let obj = lines_objective(&lines, rep[0], rep[1]);
    Ok(MedianResult::exact(rep, Some(poly), Some(obj)))
}

/// Objective and gradient of the planar Oja energy in `O(N log N)` by sorting
/// the data by angle around `mu`.
pub fn oja_value_and_gradient(pts: &[[f64; 2]], w: &[f64], mu: [f64; 2]) -> (f64, [f64; 2]) {
    let mut items: Vec<(f64, [f64; 2], f64)> = pts
        .iter()
        .zip(w)
        .filter_map(|(p, &wi)| {
            let a = [p[0] - mu[0], p[1] - mu[1]];
            (a != [0.0, 0.0]).then(|| (a[1].atan2(a[0]), a, wi))
        })
        .collect();
    items.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = items.len();
    if n < 2 {
        return (0.0, [0.0, 0.0]);
    }
    // Prefix sums over the list traversed twice, angles shifted by 2 pi on the second pass.
    let mut pw = vec![0.0; 2 * n + 1];
    let mut px = vec![0.0; 2 * n + 1];
    let mut py = vec![0.0; 2 * n + 1];
    for k in 0..2 * n {
        let (_, a, wi) = items[k % n];
        pw[k + 1] = pw[k] + wi;
        px[k + 1] = px[k] + wi * a[0];
        py[k + 1] = py[k] + wi * a[1];
    }
    let angle = |k: usize| items[k % n].0 + if k >= n { 2.0 * std::f64::consts::PI } else { 0.0 };
    let (wt, sx, sy) = (pw[n], px[n], py[n]);
    let mut e = 0.0;
    let mut g = [0.0, 0.0];
    let mut end = 1;
    for p in 0..n {
        let (th, a, wi) = items[p];
        if end < p + 1 {
            end = p + 1;
        }
        while end < p + n && angle(end) < th + std::f64::consts::PI {
            end += 1;
        }
        let (wp, spx, spy) = (pw[end] - pw[p + 1], px[end] - px[p + 1], py[end] - py[p + 1]);
        let wn = wt - wp - wi;
        let (snx, sny) = (sx - spx - wi * a[0], sy - spy - wi * a[1]);
        let (dx, dy) = (2.0 * spx - sx, 2.0 * spy - sy);
        e += wi * (a[0] * dy - a[1] * dx);
        let vx = a[0] * (wp - wn) - (spx - snx);
        let vy = a[1] * (wp - wn) - (spy - sny);
        g[0] += wi * vy;
        g[1] -= wi * vx;
    }
    (0.25 * e, [0.25 * g[0], 0.25 * g[1]])
}

/// Iterative planar Oja median for large samples: Newton steps with a
/// finite-difference Hessian and backtracking, then diminishing normalised
/// subgradient steps if descent stalls. The best iterate is returned.
/// Largest sample size that gets the subgradient polish after Newton descent.
const POLISH_MAX_N: usize = 2000;

fn oja_descent_2d(set: &WeightedPointSet) -> Result<MedianResult> {
    let pts = set.to_2d();
    let w = set.weights();
    if is_collinear(&pts) {
        return Err(Error::DegenerateData("points are collinear; lift them off the line to use the Oja median".into()));
    }
    let spread = set.diameter();
    let start = [
        median_weighted(&set.component(0), w, true)?.midpoint(),
        median_weighted(&set.component(1), w, true)?.midpoint(),
    ];
    let f = |m: [f64; 2]| oja_value_and_gradient(&pts, w, m);
    let mut mu = start;
    let (mut e, mut g) = f(mu);
    let h = 1e-2 * spread;
    let mut iterations = 0;
    let mut status = Status::MaxIter;
    let fd_hessian = |mu: [f64; 2]| {
        let gxp = f([mu[0] + h, mu[1]]).1;
        let gxm = f([mu[0] - h, mu[1]]).1;
        let gyp = f([mu[0], mu[1] + h]).1;
        let gym = f([mu[0], mu[1] - h]).1;
        let hxx = (gxp[0] - gxm[0]) / (2.0 * h);
        let hyy = (gyp[1] - gym[1]) / (2.0 * h);
        let hxy = 0.25 * ((gxp[1] - gxm[1]) + (gyp[0] - gym[0])) / h;
        Matrix2::new(hxx, hxy, hxy, hyy)
    };
    let mut hess = fd_hessian(mu);
    let mut fresh = true;
    for _ in 0..100 {
        iterations += 1;
        let gv = Vector2::new(g[0], g[1]);
        let dir = match hess.try_inverse() {
            Some(inv) if hess[(0, 0)] > 0.0 && hess.determinant() > 0.0 => -(inv * gv),
            _ => -gv * (0.1 * spread / gv.norm().max(f64::MIN_POSITIVE)),
        };
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand = [mu[0] + t * dir[0], mu[1] + t * dir[1]];
            let (ec, gc) = f(cand);
            if ec < e {
                let step = t * dir.norm();
                mu = cand;
                e = ec;
                g = gc;
                moved = true;
                if step <= 1e-10 * spread {
                    status = Status::Converged;
                }
                break;
            }
            t *= 0.5;
        }
        if status == Status::Converged || (!moved && fresh) {
            status = Status::Converged;
            break;
        }
        // A curvature model that needed backtracking or failed is refreshed.
        fresh = t < 1.0 || !moved;
        if fresh {
            hess = fd_hessian(mu);
        }
    }
    // Subgradient polish for non-smooth small samples.
    let mut best = (e, mu);
    let mut cur = mu;
    let mut gc = g;
    let polish = if pts.len() <= POLISH_MAX_N { 200 } else { 0 };
    for k in 0..polish {
        let norm = gc[0].hypot(gc[1]);
        if norm == 0.0 {
            break;
        }
        let step = 1e-3 * spread / (k as f64 + 1.0);
        cur = [cur[0] - step * gc[0] / norm, cur[1] - step * gc[1] / norm];
        let (ec, gn) = f(cur);
        gc = gn;
        if ec < best.0 {
            best = (ec, cur);
        }
    }
    let rep = best.1.to_vec();
    Ok(MedianResult {
        representative: PointN::new(rep.clone())?,
        median_set: Some(ConvexPolytope::point(PointN::new(rep)?)),
        objective_value: Some(best.0),
        iterations,
        status,
    })
}

/// Minimises `sum_k w_k |r_k(x)|` for affine residuals by iteratively
/// reweighted least squares. `accumulate(x, M, v)` must add `omega_k A_k^T A_k`
/// to `M` and `omega_k A_k^T b_k` to `v` (the minimiser of the weighted
/// problem solves `M x = v`) using weights from `omega(|r_k|)`, and return the objective.
fn irls3<F>(x0: Vector3<f64>, scale: f64, mut accumulate: F) -> (Vector3<f64>, f64, usize, Status)
where
    F: FnMut(&Vector3<f64>, f64, &mut Matrix3<f64>, &mut Vector3<f64>) -> f64,
{
    let mut x = x0;
    let mut best = (x0, f64::INFINITY);
    let mut floor = 0.0;
    let mut status = Status::MaxIter;
    let mut it = 0;
    let mut stall = 0;
    while it < 5000 {
        it += 1;
        let mut m = Matrix3::zeros();
        let mut v = Vector3::zeros();
        let obj = accumulate(&x, floor, &mut m, &mut v);
        if it == 1 {
            floor = 1e-15 * obj.max(f64::MIN_POSITIVE);
        }
        if obj < best.1 {
            let rel = (best.1 - obj) / obj.max(f64::MIN_POSITIVE);
            best = (x, obj);
            stall = if rel < 1e-14 { stall + 1 } else { 0 };
        } else {
            stall += 1;
        }
        if stall >= 5 {
            status = Status::Converged;
            break;
        }
        let Some(next) = m.lu().solve(&v) else { break };
        if (next - x).norm() <= 1e-14 * scale {
            x = next;
            status = Status::Converged;
            let mut m = Matrix3::zeros();
            let mut v = Vector3::zeros();
            let obj = accumulate(&x, floor, &mut m, &mut v);
            if obj < best.1 {
                best = (x, obj);
            }
            break;
        }
        x = next;
    }
    (best.0, best.1, it, status)
}

fn spans_space(set: &WeightedPointSet) -> bool {
    let mean = set.weighted_mean();
    let mut c = Matrix3::zeros();
    for p in set.points() {
        let d = Vector3::new(p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]);
        c += d * d.transpose();
    }
    let ev = SymmetricEigen::new(c).eigenvalues;
    let max = ev.max();
    max > 0.0 && ev.min() > 1e-12 * max
}

fn oja_descent_3d(set: &WeightedPointSet) -> Result<MedianResult> {
    let n = set.len();
    if n > 200 {
        return Err(Error::InvalidInput("three-dimensional Oja median is limited to 200 points".into()));
    }
    if !spans_space(set) {
        return Err(Error::DegenerateData("points are coplanar; lift them off the plane to use the Oja median".into()));
    }
    let p: Vec<Vector3<f64>> = set.points().map(Vector3::from_column_slice).collect();
    let w = set.weights();
    // Residual (a - mu) . N / 6 with N the normal of the triangle (a, b, c).
    let mut terms: Vec<(Vector3<f64>, f64, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let nrm = (p[j] - p[i]).cross(&(p[k] - p[i])) / 6.0;
                if nrm.norm() > 0.0 {
                    terms.push((nrm, p[i].dot(&nrm), w[i] * w[j] * w[k]));
                }
            }
        }
    }
    let x0 = Vector3::from_column_slice(&set.weighted_mean());
    let (x, obj, it, status) = irls3(x0, set.diameter(), |x, floor, m, v| {
        let mut e = 0.0;
        for (nrm, d, c) in &terms {
            let r = (nrm.dot(x) - d).abs();
            e += c * r;
            let om = c / r.max(floor);
            *m += om * nrm * nrm.transpose();
            *v += om * d * nrm;
        }
        e
    });
    let rep = x.as_slice().to_vec();
    Ok(MedianResult {
        representative: PointN::new(rep.clone())?,
        median_set: Some(ConvexPolytope::point(PointN::new(rep)?)),
        objective_value: Some(obj),
        iterations: it,
        status,
    })
}

/// Oja median of planar or spatial data.
pub fn median_oja(set: &WeightedPointSet, mode: OjaMode) -> Result<MedianResult> {
    set.require_nonempty()?;
    match (set.dim(), mode) {
        (2, OjaMode::Exact) => oja_exact_2d(set),
        (2, OjaMode::Subgradient) => oja_descent_2d(set),
        (2, OjaMode::Auto) if set.len() <= OJA_EXACT_MAX_N => oja_exact_2d(set),
        (2, OjaMode::Auto) => oja_descent_2d(set),
        (3, OjaMode::Exact) => Err(Error::DimUnsupported(3)),
        (3, _) => oja_descent_3d(set),
        (d, _) => Err(Error::DimUnsupported(d)),
    }
}

/// Adds to every point a copy shifted by `1e-4 * diameter` along the normal of
/// the line (plane) containing the data, so that the Oja median is defined.
pub fn lift_degenerate(set: &WeightedPointSet) -> Result<WeightedPointSet> {
    set.require_nonempty()?;
    let eps = 1e-4 * set.diameter().max(f64::MIN_POSITIVE);
    let normal: Vec<f64> = match set.dim() {
        2 => {
            let pts = set.to_2d();
            let far = pts.iter().copied().max_by(|a, b| dist(a, &pts[0]).total_cmp(&dist(b, &pts[0]))).unwrap();
            let d = [far[0] - pts[0][0], far[1] - pts[0][1]];
            let len = d[0].hypot(d[1]);
            if len == 0.0 {
                vec![0.0, 1.0]
            } else {
                vec![-d[1] / len, d[0] / len]
            }
        }
        3 => {
            let mean = set.weighted_mean();
            let mut c = Matrix3::zeros();
            for p in set.points() {
                let d = Vector3::new(p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]);
                c += d * d.transpose();
            }
            let eig = SymmetricEigen::new(c);
            let k = eig.eigenvalues.imin();
            eig.eigenvectors.column(k).iter().copied().collect()
        }
        d => return Err(Error::DimUnsupported(d)),
    };
    let mut coords = set.coords().to_vec();
    for p in set.points() {
        coords.extend(p.iter().zip(&normal).map(|(x, v)| x + eps * v));
    }
    let mut weights = set.weights().to_vec();
    weights.extend_from_slice(set.weights());
    WeightedPointSet::new(set.dim(), coords, weights)
}

/// Objective of the Oja median of planar data embedded in space: the sum of
/// weighted triangle areas `|(x_i - mu) x (x_j - mu)| / 2`.
pub fn oja23_objective(mu: &[f64], set: &WeightedPointSet) -> Result<f64> {
    set.require_dim(3)?;
    let m = Vector3::from_column_slice(mu);
    let p: Vec<Vector3<f64>> = set.points().map(|q| Vector3::from_column_slice(q) - m).collect();
    let mut e = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            e += set.weight(i) * set.weight(j) * 0.5 * p[i].cross(&p[j]).norm();
        }
    }
    Ok(e)
}

/// Oja median for a two-parameter sample in R^3, minimising the sum of triangle areas.
/// Collinear data give the univariate median along their line.
pub fn median_oja_23(set: &WeightedPointSet) -> Result<MedianResult> {
    set.require_nonempty()?;
    set.require_dim(3)?;
    let n = set.len();
    let p: Vec<Vector3<f64>> = set.points().map(Vector3::from_column_slice).collect();
    let w = set.weights();
    let diam = set.diameter();
    let far = p.iter().max_by(|a, b| (*a - p[0]).norm().total_cmp(&(*b - p[0]).norm())).unwrap();
    let axis = far - p[0];
    if axis.norm() == 0.0 || p.iter().all(|q| (q - p[0]).cross(&axis).norm() <= 1e-12 * diam * axis.norm()) {
        return super::l1::median_l1(set, &super::l1::L1Config::default());
    }
    let x0 = Vector3::from_column_slice(&set.weighted_mean());
    let (x, obj, it, status) = irls3(x0, diam, |mu, floor, m, v| {
        let mut e = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let d = p[i] - p[j];
                let c = p[i].cross(&p[j]);
                let r = (c + mu.cross(&d)).norm();
                let cw = 0.5 * w[i] * w[j];
                e += cw * r;
                let om = cw / r.max(floor);
                let dd = d.norm_squared();
                *m += om * (Matrix3::identity() * dd - d * d.transpose());
                *v += om * c.cross(&d);
            }
        }
        e
    });
    let rep = x.as_slice().to_vec();
    Ok(MedianResult {
        representative: PointN::new(rep.clone())?,
        median_set: Some(ConvexPolytope::point(PointN::new(rep)?)),
        objective_value: Some(obj),
        iterations: it,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_gives_whole_triangle() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let r = median_oja(&set, OjaMode::Exact).unwrap();
        assert_eq!(r.median_set.as_ref().unwrap().vertices().len(), 3);
        assert!(dist(r.representative.coords(), &[1.0 / 3.0, 1.0 / 3.0]) < 1e-12);
    }

    #[test]
    fn inner_point_is_the_median() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [1.0, 1.0]]).unwrap();
        let r = median_oja(&set, OjaMode::Exact).unwrap();
        assert!(r.median_set.as_ref().unwrap().is_point());
        assert_eq!(r.representative.coords(), &[1.0, 1.0]);
    }

    #[test]
    fn convex_quadrilateral_gives_diagonal_crossing() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [3.0, 0.0], [4.0, 2.0], [0.0, 3.0]]).unwrap();
        let r = median_oja(&set, OjaMode::Exact).unwrap();
        assert!(dist(r.representative.coords(), &[2.0, 1.0]) < 1e-12);
    }

    #[test]
    fn collinear_is_degenerate_and_lift_recovers() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [7.0, 7.0], [3.0, 3.0]]).unwrap();
        assert!(matches!(median_oja(&set, OjaMode::Exact), Err(Error::DegenerateData(_))));
        let r = median_oja(&lift_degenerate(&set).unwrap(), OjaMode::Exact).unwrap();
        assert!(dist(r.representative.coords(), &[2.0, 2.0]) < 1e-3);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pts: Vec<[f64; 2]> = (0..30)
            .map(|i| {
                let t = i as f64;
                [(t * 1.7).sin() * 3.0 + t * 0.1, (t * 2.3).cos() * 2.0]
            })
            .collect();
        let w: Vec<f64> = (0..30).map(|i| 1.0 + (i % 3) as f64).collect();
        let set = WeightedPointSet::new(2, pts.iter().flatten().copied().collect(), w.clone()).unwrap();
        let mu = [0.31, -0.17];
        let (e, g) = oja_value_and_gradient(&pts, &w, mu);
        assert!((e - oja_objective(&mu, &set).unwrap()).abs() < 1e-9 * e);
        let h = 1e-6;
        let fx = (oja_objective(&[mu[0] + h, mu[1]], &set).unwrap()
            - oja_objective(&[mu[0] - h, mu[1]], &set).unwrap())
            / (2.0 * h);
        let fy = (oja_objective(&[mu[0], mu[1] + h], &set).unwrap()
            - oja_objective(&[mu[0], mu[1] - h], &set).unwrap())
            / (2.0 * h);
        assert!((g[0] - fx).abs() < 1e-5 * e && (g[1] - fy).abs() < 1e-5 * e, "{g:?} vs {fx} {fy}");
    }
}
