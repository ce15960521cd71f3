//! Points, weighted point sets, convex polytopes and planar predicates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for orientation tests, scaled by the squared diameter.
pub const ORIENT_EPS: f64 = 1e-12;

/// A point with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointN(Vec<f64>);

impl PointN {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        Ok(PointN(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &PointN) -> f64 {
        dist(&self.0, &other.0)
    }
}

impl From<[f64; 2]> for PointN {
    fn from(p: [f64; 2]) -> Self {
        PointN(p.to_vec())
    }
}

impl From<[f64; 3]> for PointN {
    fn from(p: [f64; 3]) -> Self {
        PointN(p.to_vec())
    }
}

impl std::ops::Index<usize> for PointN {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Finite multiset of points in R^n with strictly positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPointSet {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedPointSet {
    /// `coords` is row-major, one point per `dim` entries.
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if coords.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch { expected: dim * weights.len(), found: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput("weights must be finite and positive".into()));
        }
        Ok(WeightedPointSet { dim, coords, weights })
    }

    pub fn unweighted(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        let n = coords.len() / dim;
        Self::new(dim, coords, vec![1.0; n])
    }

    pub fn from_points(points: &[PointN]) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyInput)?.dim();
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
            coords.extend_from_slice(p.coords());
        }
        Self::unweighted(dim, coords)
    }

    pub fn from_rows<const D: usize>(rows: &[[f64; D]]) -> Result<Self> {
        Self::unweighted(D, rows.iter().flatten().copied().collect())
    }

    pub fn from_weighted_rows<const D: usize>(rows: &[[f64; D]], weights: &[f64]) -> Result<Self> {
        Self::new(D, rows.iter().flatten().copied().collect(), weights.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points().zip(self.weights.iter().copied())
    }

    /// Same points with weights rescaled to sum to one.
    pub fn normalized(&self) -> Self {
        let total = self.total_weight();
        WeightedPointSet {
            dim: self.dim,
            coords: self.coords.clone(),
            weights: self.weights.iter().map(|w| w / total).collect(),
        }
    }

    pub fn with_unit_weights(&self) -> Self {
        WeightedPointSet { dim: self.dim, coords: self.coords.clone(), weights: vec![1.0; self.len()] }
    }

    pub fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyInput)
        } else {
            Ok(())
        }
    }

    pub fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            Err(Error::DimUnsupported(self.dim))
        } else {
            Ok(())
        }
    }

    pub fn to_2d(&self) -> Vec<[f64; 2]> {
        self.points().map(|p| [p[0], p[1]]).collect()
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.points().map(|p| p[c]).collect()
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Length of the bounding-box diagonal; zero for a single location.
    pub fn diameter(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let (lo, hi) = self.bounding_box();
        dist(&lo, &hi)
    }

    pub fn weighted_mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        let mut total = 0.0;
        for (p, w) in self.iter() {
            for k in 0..self.dim {
                m[k] += w * p[k];
            }
            total += w;
        }
        m.iter_mut().for_each(|v| *v /= total);
        m
    }

    /// Applies `f` to every point, keeping weights.
    pub fn map_points<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let mut coords = Vec::with_capacity(self.coords.len());
        let mut dim = None;
        for p in self.points() {
            let q = f(p)?;
            match dim {
                None => dim = Some(q.len()),
                Some(d) if d != q.len() => return Err(Error::DimensionMismatch { expected: d, found: q.len() }),
                _ => {}
            }
            coords.extend(q);
        }
        Self::new(dim.unwrap_or(self.dim), coords, self.weights.clone())
    }
}

/// Termination status of a median computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    Exact,
    MaxIter,
}

/// Convex polytope stored by its vertices. In the plane vertices are kept
/// counterclockwise starting at the lexicographically smallest one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolytope {
    dim: usize,
    vertices: Vec<PointN>,
}

impl ConvexPolytope {
    pub fn point(p: PointN) -> Self {
        ConvexPolytope { dim: p.dim(), vertices: vec![p] }
    }

    /// Canonical hull of arbitrary planar points.
    pub fn hull_2d(points: &[[f64; 2]]) -> Self {
        let idx = crate::hull::hull_indices(points);
        ConvexPolytope { dim: 2, vertices: idx.into_iter().map(|i| PointN::from(points[i])).collect() }
    }

    /// Interval `[lo, hi]` on the line.
    pub fn interval(lo: f64, hi: f64) -> Self {
        let mut vertices = vec![PointN(vec![lo])];
        if hi > lo {
            vertices.push(PointN(vec![hi]));
        }
        ConvexPolytope { dim: 1, vertices }
    }

    /// Segment between two points of any dimension.
    pub fn segment(a: Vec<f64>, b: Vec<f64>) -> Self {
        let dim = a.len();
        let mut vertices = vec![PointN(a.clone())];
        if a != b {
            vertices.push(PointN(b));
        }
        ConvexPolytope { dim, vertices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[PointN] {
        &self.vertices
    }

    pub fn is_point(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Area centroid for polygons with positive area, vertex mean otherwise.
    pub fn centroid(&self) -> Vec<f64> {
        let n = self.vertices.len();
        if self.dim == 2 && n >= 3 {
            let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
            let o = self.vertices[0].coords();
            for i in 1..n - 1 {
                let p = self.vertices[i].coords();
                let q = self.vertices[i + 1].coords();
                let t = cross(o, p, q) / 2.0;
                a += t;
                cx += t * (o[0] + p[0] + q[0]) / 3.0;
                cy += t * (o[1] + p[1] + q[1]) / 3.0;
            }
            if a > 0.0 {
                return vec![cx / a, cy / a];
            }
        }
        let mut m = vec![0.0; self.dim];
        for v in &self.vertices {
            for k in 0..self.dim {
                m[k] += v[k] / n as f64;
            }
        }
        m
    }

    pub fn area(&self) -> f64 {
        if self.dim != 2 || self.vertices.len() < 3 {
            return 0.0;
        }
        let o = self.vertices[0].coords();
        (1..self.vertices.len() - 1)
            .map(|i| cross(o, self.vertices[i].coords(), self.vertices[i + 1].coords()) / 2.0)
            .sum()
    }

    /// Planar membership test with absolute slack `tol`.
    pub fn contains_2d(&self, p: [f64; 2], tol: f64) -> bool {
        let v: Vec<[f64; 2]> = self.vertices.iter().map(|v| [v[0], v[1]]).collect();
        match v.len() {
            0 => false,
            1 => dist(&v[0], &p) <= tol,
            2 => segment_distance(v[0], v[1], p) <= tol,
            n => (0..n).all(|i| {
                let a = v[i];
                let b = v[(i + 1) % n];
                let len = dist(&a, &b);
                cross(&a, &b, &p) / len >= -tol
            }),
        }
    }

    /// Image of the vertex set under `f`; planar results are re-canonicalised.
    pub fn map<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let mapped = self.vertices.iter().map(|v| f(v.coords())).collect::<Result<Vec<_>>>()?;
        if self.dim == 2 && mapped.iter().all(|p| p.len() == 2) {
            let pts: Vec<[f64; 2]> = mapped.iter().map(|p| [p[0], p[1]]).collect();
            return Ok(Self::hull_2d(&pts));
        }
        let dim = mapped.first().map_or(self.dim, |p| p.len());
        Ok(ConvexPolytope { dim, vertices: mapped.into_iter().map(PointN).collect() })
    }

    /// Symmetric Hausdorff distance between the vertex sets.
    pub fn vertex_distance(&self, other: &ConvexPolytope) -> f64 {
        let one_way = |a: &[PointN], b: &[PointN]| {
            a.iter().map(|p| b.iter().map(|q| p.distance(q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        if self.vertices.is_empty() || other.vertices.is_empty() {
            return f64::INFINITY;
        }
        one_way(&self.vertices, &other.vertices).max(one_way(&other.vertices, &self.vertices))
    }
}

/// Result of a median computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianResult {
    pub representative: PointN,
    pub median_set: Option<ConvexPolytope>,
    pub objective_value: Option<f64>,
    pub iterations: usize,
    pub status: Status,
}

impl MedianResult {
    pub fn exact(representative: Vec<f64>, median_set: Option<ConvexPolytope>, objective: Option<f64>) -> Self {
        MedianResult {
            representative: PointN(representative),
            median_set,
            objective_value: objective,
            iterations: 0,
            status: Status::Exact,
        }
    }
}

/// Twice the signed area of the triangle `abc`.
#[inline]
pub fn cross(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Orientation of `abc` with tolerance relative to `scale^2`: +1 left turn, -1 right turn, 0 collinear.
pub fn orient2d(a: &[f64], b: &[f64], c: &[f64], scale: f64) -> i8 {
    let v = cross(a, b, c);
    let eps = ORIENT_EPS * scale * scale;
    if v > eps {
        1
    } else if v < -eps {
        -1
    } else {
        0
    }
}

pub(crate) fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return dist(&a, &p);
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    dist(&[a[0] + t * d[0], a[1] + t * d[1]], &p)
}

/// Intersection of the lines `n1.x = d1` and `n2.x = d2`, if not parallel.
pub(crate) fn intersect_lines(n1: [f64; 2], d1: f64, n2: [f64; 2], d2: f64) -> Option<[f64; 2]> {
    let det = n1[0] * n2[1] - n1[1] * n2[0];
    if det.abs() < 1e-14 * (n1[0].hypot(n1[1]) * n2[0].hypot(n2[1])) {
        return None;
    }
    Some([(d1 * n2[1] - d2 * n1[1]) / det, (n1[0] * d2 - n2[0] * d1) / det])
}
