//! Area-uniform low-discrepancy samples of selector regions.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::WeightedPointSet;

use super::synth::SyntheticImage;

/// Shape of the selector region around the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SelectorShape {
    /// Disc of radius `rho` in the plane.
    Disc,
    /// Ball of radius `rho` in space.
    Ball3,
    /// Continuous amoeba: geodesic ball of radius `rho` on the graph
    /// `(x, beta u(x))`.
    Amoeba { beta: f64 },
}

/// Geodesic directions shot to outline an amoeba.
pub const AMOEBA_DIRECTIONS: usize = 4096;
/// Integration steps per geodesic.
pub const AMOEBA_STEPS: usize = 64;

/// Deterministic seed for an independent stream, from a base seed and two indices.
pub fn stream_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    for _ in 0..2 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Concentric map of the square `[-1, 1]^2` onto the unit disc.
fn concentric(a: f64, b: f64) -> [f64; 2] {
    use std::f64::consts::FRAC_PI_4;
    if a == 0.0 && b == 0.0 {
        return [0.0, 0.0];
    }
    let (r, phi) = if a.abs() > b.abs() { (a, FRAC_PI_4 * b / a) } else { (b, 2.0 * FRAC_PI_4 - FRAC_PI_4 * a / b) };
    [r * phi.cos(), r * phi.sin()]
}

/// Offsets in the unit disc: one jittered point per cell of a `k x k`
/// stratification (`2 k^2 >= m`) together with its mirror image through the
/// origin.
pub fn disc_offsets(m: usize, rng: &mut impl Rng) -> Vec<[f64; 2]> {
    let k = ((m as f64 / 2.0).sqrt().ceil() as usize).max(1);
    let mut out = Vec::with_capacity(2 * k * k);
    for i in 0..k {
        for j in 0..k {
            let a = -1.0 + 2.0 * (i as f64 + rng.random::<f64>()) / k as f64;
            let b = -1.0 + 2.0 * (j as f64 + rng.random::<f64>()) / k as f64;
            let p = concentric(a, b);
            out.push(p);
            out.push([-p[0], -p[1]]);
        }
    }
    out
}

/// Offsets in the unit ball: jittered cube cells kept when inside, each
/// together with its mirror image through the origin.
pub fn ball_offsets(m: usize, rng: &mut impl Rng) -> Vec<[f64; 3]> {
    let frac = std::f64::consts::PI / 6.0;
    let k = ((m as f64 / (2.0 * frac)).cbrt().ceil() as usize).max(1);
    let mut out = Vec::with_capacity(m + m / 8);
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                let p = [i, j, l].map(|c| -1.0 + 2.0 * (c as f64 + rng.random::<f64>()) / k as f64);
                if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0 {
                    out.push(p);
                    out.push([-p[0], -p[1], -p[2]]);
                }
            }
        }
    }
    out
}

/// Boundary of a continuous amoeba, as endpoints of geodesics shot in
/// evenly spaced directions, star-shaped around the centre.
#[derive(Debug, Clone)]
pub struct AmoebaOutline {
    center: [f64; 2],
    angles: Vec<f64>,
    points: Vec<[f64; 2]>,
    metric: Matrix2<f64>,
}

fn metric_at(img: &SyntheticImage, x: &[f64], beta: f64) -> (Matrix2<f64>, DMatrix<f64>) {
    let j = img.jacobian(x);
    let jtj = j.transpose() * &j;
    let g = Matrix2::new(1.0, 0.0, 0.0, 1.0)
        + beta * beta * Matrix2::new(jtj[(0, 0)], jtj[(0, 1)], jtj[(1, 0)], jtj[(1, 1)]);
    (g, j)
}

fn geodesic_accel(img: &SyntheticImage, x: [f64; 2], v: [f64; 2], beta: f64) -> [f64; 2] {
    let (g, j) = metric_at(img, &x, beta);
    let hs = img.hessian(&x);
    let q = DVector::from_iterator(
        hs.len(),
        hs.iter().map(|h| v[0] * (h[(0, 0)] * v[0] + h[(0, 1)] * v[1]) + v[1] * (h[(1, 0)] * v[0] + h[(1, 1)] * v[1])),
    );
    let f = j.transpose() * q;
    let rhs = Vector2::new(f[0], f[1]) * (-beta * beta);
    let a = g.try_inverse().map(|gi| gi * rhs).unwrap_or_else(Vector2::zeros);
    [a[0], a[1]]
}

impl AmoebaOutline {
    /// Shoots `directions` unit-speed geodesics of length `rho` from `x0`
    /// with `steps` RK4 steps each.
    pub fn new(
        img: &SyntheticImage,
        x0: [f64; 2],
        beta: f64,
        rho: f64,
        directions: usize,
        steps: usize,
    ) -> Result<Self> {
        if img.m() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: img.m() });
        }
        if !(rho > 0.0) || !(beta >= 0.0) || directions < 8 || steps == 0 {
            return Err(Error::InvalidInput("amoeba needs rho > 0, beta >= 0 and enough directions".into()));
        }
        let (g0, _) = metric_at(img, &x0, beta);
        let h = rho / steps as f64;
        let mut points = Vec::with_capacity(directions);
        for k in 0..directions {
            let phi = std::f64::consts::TAU * k as f64 / directions as f64;
            let w = Vector2::new(phi.cos(), phi.sin());
            let s = (w.transpose() * g0 * w)[0].sqrt();
            let mut x = x0;
            let mut v = [w[0] / s, w[1] / s];
            for _ in 0..steps {
                let add = |p: [f64; 2], d: [f64; 2], t: f64| [p[0] + t * d[0], p[1] + t * d[1]];
                let a1 = geodesic_accel(img, x, v, beta);
                let (x2, v2) = (add(x, v, 0.5 * h), add(v, a1, 0.5 * h));
                let a2 = geodesic_accel(img, x2, v2, beta);
                let (x3, v3) = (add(x, v2, 0.5 * h), add(v, a2, 0.5 * h));
                let a3 = geodesic_accel(img, x3, v3, beta);
                let (x4, v4) = (add(x, v3, h), add(v, a3, h));
                let a4 = geodesic_accel(img, x4, v4, beta);
                for c in 0..2 {
                    x[c] += h / 6.0 * (v[c] + 2.0 * v2[c] + 2.0 * v3[c] + v4[c]);
                    v[c] += h / 6.0 * (a1[c] + 2.0 * a2[c] + 2.0 * a3[c] + a4[c]);
                }
            }
            points.push(x);
        }
        let angles: Vec<f64> = points.iter().map(|p| (p[1] - x0[1]).atan2(p[0] - x0[0])).collect();
        let start = angles[0];
        let unwrapped: Vec<f64> = angles.iter().map(|a| (a - start).rem_euclid(std::f64::consts::TAU)).collect();
        if unwrapped.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateData("amoeba outline is not star-shaped around its centre".into()));
        }
        let angles = unwrapped.iter().map(|a| a + start).collect();
        Ok(AmoebaOutline { center: x0, angles, points, metric: g0 })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn area(&self) -> f64 {
        let n = self.points.len();
        0.5 * (0..n)
            .map(|k| {
                let (a, b) = (self.points[k], self.points[(k + 1) % n]);
                (a[0] - self.center[0]) * (b[1] - self.center[1]) - (a[1] - self.center[1]) * (b[0] - self.center[0])
            })
            .sum::<f64>()
    }

    /// Whether `p` lies in the outlined region.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let q = [p[0] - self.center[0], p[1] - self.center[1]];
        if q == [0.0, 0.0] {
            return true;
        }
        let start = self.angles[0];
        let t = q[1].atan2(q[0]);
        let rel = (t - start).rem_euclid(std::f64::consts::TAU);
        let n = self.points.len();
        let k = self.angles.partition_point(|a| a - start <= rel).max(1) - 1;
        let (a, b) = (self.points[k], self.points[(k + 1) % n]);
        let a = [a[0] - self.center[0], a[1] - self.center[1]];
        let b = [b[0] - self.center[0], b[1] - self.center[1]];
        let cr = |u: [f64; 2], v: [f64; 2]| u[0] * v[1] - u[1] * v[0];
        cr([b[0] - a[0], b[1] - a[1]], [q[0] - a[0], q[1] - a[1]]) >= 0.0
    }

    /// Area-uniform stratified sample of about `m` points of the region.
    pub fn sample(&self, m: usize, rng: &mut impl Rng) -> Vec<[f64; 2]> {
        let eig = SymmetricEigen::new(self.metric);
        let axes = [eig.eigenvectors.column(0).into_owned(), eig.eigenvectors.column(1).into_owned()];
        let ext: Vec<f64> = axes
            .iter()
            .map(|ax| {
                self.points
                    .iter()
                    .map(|p| ((p[0] - self.center[0]) * ax[0] + (p[1] - self.center[1]) * ax[1]).abs())
                    .fold(0.0, f64::max)
                    * (1.0 + 1e-9)
            })
            .collect();
        let eff = self.area() / (4.0 * ext[0] * ext[1]);
        let cells = m as f64 / eff.max(1e-3);
        let k0 = ((cells * ext[0] / ext[1]).sqrt().ceil() as usize).max(1);
        let k1 = ((cells / k0 as f64).ceil() as usize).max(1);
        let mut out = Vec::with_capacity(m + m / 8);
        for i in 0..k0 {
            for j in 0..k1 {
                let s = ext[0] * (-1.0 + 2.0 * (i as f64 + rng.random::<f64>()) / k0 as f64);
                let t = ext[1] * (-1.0 + 2.0 * (j as f64 + rng.random::<f64>()) / k1 as f64);
                let p = [
                    self.center[0] + s * axes[0][0] + t * axes[1][0],
                    self.center[1] + s * axes[0][1] + t * axes[1][1],
                ];
                if self.contains(p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// Sample locations of the selector region of radius `rho` around `x0`.
pub fn selector_points(
    img: &SyntheticImage,
    x0: &[f64],
    shape: SelectorShape,
    rho: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if m < 1000 {
        return Err(Error::InvalidInput(format!("at least 1000 samples are needed, got {m}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {rho}")));
    }
    if x0.len() != img.m() {
        return Err(Error::DimensionMismatch { expected: img.m(), found: x0.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match shape {
        SelectorShape::Disc => {
            if img.m() != 2 {
                return Err(Error::DimensionMismatch { expected: 2, found: img.m() });
            }
            disc_offsets(m, &mut rng).into_iter().map(|p| vec![x0[0] + rho * p[0], x0[1] + rho * p[1]]).collect()
        }
        SelectorShape::Ball3 => {
            if img.m() != 3 {
                return Err(Error::DimensionMismatch { expected: 3, found: img.m() });
            }
            ball_offsets(m, &mut rng)
                .into_iter()
                .map(|p| vec![x0[0] + rho * p[0], x0[1] + rho * p[1], x0[2] + rho * p[2]])
                .collect()
        }
        SelectorShape::Amoeba { beta } => {
            let outline = AmoebaOutline::new(img, [x0[0], x0[1]], beta, rho, AMOEBA_DIRECTIONS, AMOEBA_STEPS)?;
            outline.sample(m, &mut rng).into_iter().map(|p| p.to_vec()).collect()
        }
    })
}

/// Image values at an area-uniform sample of the selector region, with unit
/// weights.
pub fn sample_selector(
    img: &SyntheticImage,
    x0: &[f64],
    shape: SelectorShape,
    rho: f64,
    m: usize,
    seed: u64,
) -> Result<WeightedPointSet> {
    let pts = selector_points(img, x0, shape, rho, m, seed)?;
    let n = img.n();
    let mut coords = vec![0.0; pts.len() * n];
    for (p, out) in pts.iter().zip(coords.chunks_exact_mut(n)) {
        img.value_into(p, out);
    }
    WeightedPointSet::unweighted(n, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medians::median_componentwise;

    fn linear() -> SyntheticImage {
        SyntheticImage::Quadratic {
            value: vec![0.5],
            jacobian: DMatrix::from_row_slice(1, 2, &[2.0, -1.0]),
            hessian: vec![DMatrix::zeros(2, 2)],
            center: vec![0.0, 0.0],
        }
    }

    #[test]
    fn constant_image_gives_equal_values() {
        let img = SyntheticImage::Quadratic {
            value: vec![1.5, -2.0],
            jacobian: DMatrix::zeros(2, 2),
            hessian: vec![DMatrix::zeros(2, 2); 2],
            center: vec![0.0, 0.0],
        };
        let s = sample_selector(&img, &[0.3, 0.1], SelectorShape::Disc, 0.2, 2000, 1).unwrap();
        assert!(s.points().all(|p| p == [1.5, -2.0]));
    }

    #[test]
    fn linear_image_median_is_centre_value() {
        let s = sample_selector(&linear(), &[0.2, 0.4], SelectorShape::Disc, 0.1, 20_000, 3).unwrap();
        let m = median_componentwise(&s).unwrap();
        let exact = 0.5 + 2.0 * 0.2 - 0.4;
        assert!((m.representative[0] - exact).abs() < 1e-12);
    }

    #[test]
    fn amoeba_of_linear_image_is_metric_ellipse() {
        let beta = 1.5;
        let o = AmoebaOutline::new(&linear(), [0.1, 0.2], beta, 0.1, AMOEBA_DIRECTIONS, AMOEBA_STEPS).unwrap();
        let det = 1.0 + beta * beta * 5.0;
        let exact = std::f64::consts::PI * 0.01 / det.sqrt();
        assert!((o.area() / exact - 1.0).abs() < 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = o.sample(10_000, &mut rng);
        assert!((pts.len() as f64 / 10_000.0 - 1.0).abs() < 0.05);
    }

    #[test]
    fn ball_sample_is_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts = ball_offsets(5000, &mut rng);
        assert!(pts.len() > 4000 && pts.iter().all(|p| p.iter().map(|c| c * c).sum::<f64>() <= 1.0));
    }
}
