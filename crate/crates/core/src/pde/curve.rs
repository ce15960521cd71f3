//! Inward curve evolution whose vanishing point approximates the convex hull
//! stripping median of a planar density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::PointN;

/// Planar density sampled on demand.
pub trait Density2D: Sync {
    fn density(&self, p: [f64; 2]) -> f64;
    /// Upper bound of the density.
    fn max_density(&self) -> f64;
    /// Bounding box `(min, max)` of the support.
    fn support(&self) -> ([f64; 2], [f64; 2]);
    /// Resolution of the representation, used as a length unit by callers.
    fn cell_size(&self) -> f64;
}

/// Density on a regular grid, bilinearly interpolated and zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    origin: [f64; 2],
    spacing: f64,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl GridDensity {
    /// `values[i * cols + j]` sits at `origin + spacing * (j, i)`.
    pub fn new(origin: [f64; 2], spacing: f64, rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows < 2 || cols < 2 || !(spacing > 0.0) {
            return Err(Error::InvalidDensity("density grid needs at least 2x2 nodes and positive spacing".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDensity("non-finite density value".into()));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::NonPositiveDensity);
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidDensity("density vanishes everywhere".into()));
        }
        Ok(GridDensity { origin, spacing, rows, cols, values })
    }

    /// Samples `f` on the grid covering `[lo, hi]` with the given spacing.
    pub fn from_fn(lo: [f64; 2], hi: [f64; 2], spacing: f64, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let cols = ((hi[0] - lo[0]) / spacing).ceil() as usize + 1;
        let rows = ((hi[1] - lo[1]) / spacing).ceil() as usize + 1;
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f([lo[0] + j as f64 * spacing, lo[1] + i as f64 * spacing]));
            }
        }
        Self::new(lo, spacing, rows, cols, values)
    }

    /// Indicator of a polygon given by its vertices, with a one-node margin.
    pub fn uniform_polygon(vertices: &[[f64; 2]], spacing: f64) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDensity("polygon needs at least 3 vertices".into()));
        }
        let (lo, hi) = bbox(vertices);
        let lo = [lo[0] - 2.0 * spacing, lo[1] - 2.0 * spacing];
        let hi = [hi[0] + 2.0 * spacing, hi[1] + 2.0 * spacing];
        Self::from_fn(lo, hi, spacing, |p| if point_in_polygon(p, vertices) { 1.0 } else { 0.0 })
    }

    /// Indicator of a disc.
    pub fn uniform_disc(center: [f64; 2], radius: f64, spacing: f64) -> Result<Self> {
        let m = radius + 2.0 * spacing;
        Self::from_fn([center[0] - m, center[1] - m], [center[0] + m, center[1] + m], spacing, |p| {
            if (p[0] - center[0]).hypot(p[1] - center[1]) <= radius {
                1.0
            } else {
                0.0
            }
        })
    }
}

impl Density2D for GridDensity {
    fn density(&self, p: [f64; 2]) -> f64 {
        let x = (p[0] - self.origin[0]) / self.spacing;
        let y = (p[1] - self.origin[1]) / self.spacing;
        if !(x >= 0.0 && y >= 0.0 && x <= (self.cols - 1) as f64 && y <= (self.rows - 1) as f64) {
            return 0.0;
        }
        let j = (x.floor() as usize).min(self.cols - 2);
        let i = (y.floor() as usize).min(self.rows - 2);
        let (fx, fy) = (x - j as f64, y - i as f64);
        let v = |i: usize, j: usize| self.values[i * self.cols + j];
        (1.0 - fy) * ((1.0 - fx) * v(i, j) + fx * v(i, j + 1)) + fy * ((1.0 - fx) * v(i + 1, j) + fx * v(i + 1, j + 1))
    }

    fn max_density(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn support(&self) -> ([f64; 2], [f64; 2]) {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.values[i * self.cols + j] > 0.0 {
                    let p = [self.origin[0] + j as f64 * self.spacing, self.origin[1] + i as f64 * self.spacing];
                    for a in 0..2 {
                        lo[a] = lo[a].min(p[a]);
                        hi[a] = hi[a].max(p[a]);
                    }
                }
            }
        }
        (lo, hi)
    }

    fn cell_size(&self) -> f64 {
        self.spacing
    }
}

/// Constant density on the whole plane; the flow becomes affine curvature flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDensity(pub f64);

impl Density2D for ConstantDensity {
    fn density(&self, _: [f64; 2]) -> f64 {
        self.0
    }
    fn max_density(&self) -> f64 {
        self.0
    }
    fn support(&self) -> ([f64; 2], [f64; 2]) {
        ([f64::NEG_INFINITY; 2], [f64::INFINITY; 2])
    }
    fn cell_size(&self) -> f64 {
        0.0
    }
}

fn bbox(pts: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in pts {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Closed polyline, stored counter-clockwise, with the density sampled at
/// each vertex during evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    vertices: Vec<[f64; 2]>,
    density: Vec<f64>,
}

impl ClosedCurve {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 8 {
            return Err(Error::InvalidInput(format!("closed curve needs at least 8 vertices, got {}", vertices.len())));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("curve vertex is not finite".into()));
        }
        let mut c = ClosedCurve { density: vec![f64::NAN; vertices.len()], vertices };
        if c.signed_area() < 0.0 {
            c.vertices.reverse();
        }
        if c.self_intersects() {
            return Err(Error::CurveSelfIntersection);
        }
        Ok(c)
    }

    pub fn circle(center: [f64; 2], radius: f64, n: usize) -> Result<Self> {
        Self::ellipse(center, radius, radius, 0.0, n)
    }

    /// Ellipse with semi-axes `a`, `b`, the first rotated by `angle`.
    pub fn ellipse(center: [f64; 2], a: f64, b: f64, angle: f64, n: usize) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let v = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                let (x, y) = (a * t.cos(), b * t.sin());
                [center[0] + c * x - s * y, center[1] + s * x + c * y]
            })
            .collect();
        Self::new(v)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Density values at the vertices from the latest evolution step
    /// (`NaN` before any step).
    pub fn density_samples(&self) -> &[f64] {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|k| {
                let (a, b) = (self.vertices[k], self.vertices[(k + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|k| seg_len(self.vertices[k], self.vertices[(k + 1) % n])).sum()
    }

    /// Area centroid, falling back to the vertex mean for vanishing area.
    pub fn centroid(&self) -> [f64; 2] {
        let n = self.vertices.len();
        let a = self.signed_area();
        let mean = {
            let s = self.vertices.iter().fold([0.0; 2], |s, p| [s[0] + p[0], s[1] + p[1]]);
            [s[0] / n as f64, s[1] / n as f64]
        };
        if a.abs() <= 1e-300 {
            return mean;
        }
        let mut c = [0.0; 2];
        for k in 0..n {
            let (p, q) = (self.vertices[k], self.vertices[(k + 1) % n]);
            let (p, q) = ([p[0] - mean[0], p[1] - mean[1]], [q[0] - mean[0], q[1] - mean[1]]);
            let w = p[0] * q[1] - q[0] * p[1];
            c[0] += (p[0] + q[0]) * w;
            c[1] += (p[1] + q[1]) * w;
        }
        [mean[0] + c[0] / (6.0 * a), mean[1] + c[1] / (6.0 * a)]
    }

    /// Redistributes `n` vertices uniformly in arclength along the polyline.
    pub fn resampled(&self, n: usize) -> ClosedCurve {
        let m = self.vertices.len();
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for k in 0..m {
            let l = cum[k] + seg_len(self.vertices[k], self.vertices[(k + 1) % m]);
            cum.push(l);
        }
        let total = cum[m];
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        for k in 0..n {
            let s = total * k as f64 / n as f64;
            while seg + 1 < m && cum[seg + 1] <= s {
                seg += 1;
            }
            let (a, b) = (self.vertices[seg], self.vertices[(seg + 1) % m]);
            let len = cum[seg + 1] - cum[seg];
            let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
        ClosedCurve { density: vec![f64::NAN; n], vertices: out }
    }

    /// True when two non-adjacent edges intersect.
    pub fn self_intersects(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let (lo, hi) = bbox(v);
        let tol = 1e-12 * (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (v[j], v[(j + 1) % n]);
                if segments_cross(a, b, c, d, tol) {
                    return true;
                }
            }
        }
        false
    }

    /// Polyline as `x,y` CSV lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y\n");
        for p in &self.vertices {
            s.push_str(&format!("{:?},{:?}\n", p[0], p[1]));
        }
        s
    }
}

fn seg_len(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2], tol: f64) -> bool {
    if a[0].max(b[0]) < c[0].min(d[0]) - tol
        || c[0].max(d[0]) < a[0].min(b[0]) - tol
        || a[1].max(b[1]) < c[1].min(d[1]) - tol
        || c[1].max(d[1]) < a[1].min(b[1]) - tol
    {
        return false;
    }
    let (d1, d2) = (orient(a, b, c), orient(a, b, d));
    let (d3, d4) = (orient(c, d, a), orient(c, d, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Curvature of the circle through three points, signed positive for left
/// turns of a counter-clockwise curve.
fn circumcurvature(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let den = seg_len(a, b) * seg_len(b, c) * seg_len(a, c);
    if den == 0.0 {
        return 0.0;
    }
    2.0 * orient(a, b, c) / den
}

/// Factor of the automatic time step. Larger steps are stable on curved
/// arcs but let straight runs of the polyline zigzag, which drags the
/// vanishing point.
pub const AUTO_STEP_FACTOR: f64 = 0.05;

/// Time stepping for [`evolve_chs_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeStep {
    Fixed(f64),
    /// `AUTO_STEP_FACTOR (min segment)^{4/3} (min density)^{2/3}`, recomputed every step.
    Auto,
}

/// Result of [`evolve_chs_curve`].
#[derive(Debug, Clone)]
pub struct CurveEvolution {
    pub curve: ClosedCurve,
    pub time: f64,
    pub steps: usize,
    /// Smallest time step used.
    pub min_dt: f64,
    /// Set once the enclosed area fell below `1e-3` of the initial area.
    pub vanishing_point: Option<[f64; 2]>,
}

/// Moves each vertex along the inward normal with speed
/// `max(gamma, epsilon)^{-2/3} kappa^{1/3}`, resampling to uniform arclength
/// after every step. Stops after `steps` steps or when the curve vanishes.
pub fn evolve_chs_curve(
    curve: &ClosedCurve,
    density: &dyn Density2D,
    epsilon: f64,
    dt: TimeStep,
    steps: usize,
) -> Result<CurveEvolution> {
    evolve_chs_curve_observed(curve, density, epsilon, dt, steps, |_, _| {})
}

/// As [`evolve_chs_curve`], calling `observe(step, curve)` after every step.
pub fn evolve_chs_curve_observed<F>(
    curve: &ClosedCurve,
    density: &dyn Density2D,
    epsilon: f64,
    dt: TimeStep,
    steps: usize,
    mut observe: F,
) -> Result<CurveEvolution>
where
    F: FnMut(usize, &ClosedCurve),
{
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be non-negative, got {epsilon}")));
    }
    if let TimeStep::Fixed(h) = dt {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {h}")));
        }
    }
    let n = curve.len();
    let area0 = curve.area();
    let mut cur = curve.resampled(n);
    let mut time = 0.0;
    let mut min_dt = f64::INFINITY;
    for step in 1..=steps {
        let v = &cur.vertices;
        let gam: Vec<f64> = v
            .iter()
            .map(|&p| {
                let g = density.density(p);
                if g < 0.0 {
                    return Err(Error::NonPositiveDensity);
                }
                let g = g.max(epsilon);
                if g <= 0.0 {
                    return Err(Error::NonPositiveDensity);
                }
                Ok(g)
            })
            .collect::<Result<_>>()?;
        let h = match dt {
            TimeStep::Fixed(h) => h,
            TimeStep::Auto => {
                let smin = (0..n).map(|k| seg_len(v[k], v[(k + 1) % n])).fold(f64::INFINITY, f64::min);
                let gmin = gam.iter().copied().fold(f64::INFINITY, f64::min);
                AUTO_STEP_FACTOR * smin.powf(4.0 / 3.0) * gmin.powf(2.0 / 3.0)
            }
        };
        min_dt = min_dt.min(h);
        let moved: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let (a, b, c) = (v[(k + n - 1) % n], v[k], v[(k + 1) % n]);
                let kappa = circumcurvature(a, b, c).max(0.0);
                let t = [c[0] - a[0], c[1] - a[1]];
                let tl = t[0].hypot(t[1]);
                if tl == 0.0 {
                    return b;
                }
                let normal = [-t[1] / tl, t[0] / tl];
                let speed = gam[k].powf(-2.0 / 3.0) * kappa.cbrt();
                [b[0] + h * speed * normal[0], b[1] + h * speed * normal[1]]
            })
            .collect();
        let mut next = ClosedCurve { vertices: moved, density: gam };
        if next.signed_area() <= 0.0 || next.self_intersects() {
            return Err(Error::CurveSelfIntersection);
        }
        let dens = std::mem::take(&mut next.density);
        next = next.resampled(n);
        next.density = dens;
        time += h;
        cur = next;
        observe(step, &cur);
        if cur.area() < 1e-3 * area0 {
            let p = cur.centroid();
            return Ok(CurveEvolution { curve: cur, time, steps: step, min_dt, vanishing_point: Some(p) });
        }
    }
    Ok(CurveEvolution { curve: cur, time, steps, min_dt, vanishing_point: None })
}

/// Vanishing point of the regularised flow started from a circle enclosing
/// the support of `density`. `epsilon` defaults to `1e-3` of the maximal density.
pub fn chs_vanishing_point(density: &dyn Density2D, epsilon: Option<f64>) -> Result<PointN> {
    let (lo, hi) = density.support();
    if !(lo.iter().chain(&hi).all(|v| v.is_finite())) {
        return Err(Error::InvalidDensity("density support must be bounded".into()));
    }
    let eps = epsilon.unwrap_or(crate::config::CHS_EPSILON * density.max_density());
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let radius = 0.5 * (hi[0] - lo[0]).hypot(hi[1] - lo[1]) + 2.0 * density.cell_size();
    let curve = ClosedCurve::circle(center, radius, 256)?;
    let evo = evolve_chs_curve(&curve, density, eps, TimeStep::Auto, 1_000_000)?;
    let p =
        evo.vanishing_point.ok_or_else(|| Error::InvalidInput("curve did not vanish within the step budget".into()))?;
    PointN::new(p.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_geometry() {
        let c = ClosedCurve::circle([1.0, 2.0], 3.0, 400).unwrap();
        assert!((c.area() - std::f64::consts::PI * 9.0).abs() < 1e-2);
        let m = c.centroid();
        assert!((m[0] - 1.0).abs() < 1e-9 && (m[1] - 2.0).abs() < 1e-9);
        let r = c.resampled(100);
        assert_eq!(r.len(), 100);
        assert!(!r.self_intersects());
    }

    #[test]
    fn bowtie_is_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [3.0, 0.0], [2.0, 1.0], [1.0, 2.0], [0.0, 3.0]];
        assert!(matches!(ClosedCurve::new(v), Err(Error::CurveSelfIntersection)));
    }

    #[test]
    fn disc_density_vanishes_at_center() {
        let h = 0.05;
        let d = GridDensity::uniform_disc([0.3, -0.2], 1.0, h).unwrap();
        let p = chs_vanishing_point(&d, None).unwrap();
        assert!((p[0] - 0.3).hypot(p[1] + 0.2) <= 2.0 * h, "{p:?}");
    }

    #[test]
    fn ellipse_under_affine_flow_vanishes_at_center() {
        let c = ClosedCurve::ellipse([0.5, 0.25], 2.0, 0.7, 0.4, 200).unwrap();
        let evo = evolve_chs_curve(&c, &ConstantDensity(1.0), 0.0, TimeStep::Auto, 100_000).unwrap();
        let p = evo.vanishing_point.unwrap();
        assert!((p[0] - 0.5).hypot(p[1] - 0.25) < 0.02, "{p:?}");
    }
}
