//! Explicit finite-difference time stepping of the reference PDEs on grids.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageGrid;

use super::coeffs::QTable;
use super::rhs::{
    rhs_amoeba_oja_22, rhs_l1_22_tabulated, rhs_mcm, rhs_oja_22, rhs_oja_23, rhs_oja_33, rhs_selfsnakes, JetPoint,
};

/// Right-hand side driving [`evolve_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhsKind {
    Mcm,
    Selfsnakes { beta: f64 },
    L1_22,
    Oja22,
    Oja33,
    Oja23,
    AmoebaOja22 { beta: f64 },
}

impl RhsKind {
    /// `(domain dimension, channels)` the PDE acts on.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            RhsKind::Mcm | RhsKind::Selfsnakes { .. } => (2, 1),
            RhsKind::L1_22 | RhsKind::Oja22 | RhsKind::AmoebaOja22 { .. } => (2, 2),
            RhsKind::Oja33 => (3, 3),
            RhsKind::Oja23 => (2, 3),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RhsKind::Mcm => "mcm",
            RhsKind::Selfsnakes { .. } => "selfsnakes",
            RhsKind::L1_22 => "l1_22",
            RhsKind::Oja22 => "oja_22",
            RhsKind::Oja33 => "oja_33",
            RhsKind::Oja23 => "oja_23",
            RhsKind::AmoebaOja22 { .. } => "amoeba_oja_22",
        }
    }

    /// Parses a name as printed by [`RhsKind::name`]; `beta` feeds the
    /// amoeba-based flows.
    pub fn from_name(name: &str, beta: f64) -> Result<Self> {
        Ok(match name {
            "mcm" => RhsKind::Mcm,
            "selfsnakes" => RhsKind::Selfsnakes { beta },
            "l1_22" => RhsKind::L1_22,
            "oja_22" => RhsKind::Oja22,
            "oja_33" => RhsKind::Oja33,
            "oja_23" => RhsKind::Oja23,
            "amoeba_oja_22" => RhsKind::AmoebaOja22 { beta },
            other => return Err(Error::InvalidInput(format!("unknown PDE '{other}'"))),
        })
    }

    /// Evaluates the right-hand side at a jet.
    pub fn eval(&self, jet: &JetPoint) -> Result<Vec<f64>> {
        match *self {
            RhsKind::Mcm => rhs_mcm(jet),
            RhsKind::Selfsnakes { beta } => rhs_selfsnakes(jet, beta),
            RhsKind::L1_22 => rhs_l1_22_tabulated(jet, QTable::global()),
            RhsKind::Oja22 => rhs_oja_22(jet),
            RhsKind::Oja33 => rhs_oja_33(jet),
            RhsKind::Oja23 => rhs_oja_23(jet),
            RhsKind::AmoebaOja22 { beta } => rhs_amoeba_oja_22(jet, beta),
        }
    }
}

/// Result of [`evolve_grid`].
#[derive(Debug, Clone)]
pub struct GridEvolution {
    pub image: ImageGrid,
    pub dt: f64,
    pub steps: usize,
    /// Stability bound estimated on the initial image.
    pub stability_bound: f64,
    /// Pixel updates skipped because the jet was degenerate, summed over steps.
    pub frozen_updates: usize,
}

/// Finite-difference view of a grid: axis `a` of the jet is the `a`-th
/// fastest grid axis, so `x` runs along columns and `y` along rows.
struct Stencil<'a> {
    data: &'a [f64],
    extent: Vec<usize>,
    strides: Vec<usize>,
    ch: usize,
    h: f64,
}

impl<'a> Stencil<'a> {
    fn new(img: &'a ImageGrid) -> Self {
        let mut extent = img.extent().to_vec();
        extent.reverse();
        let mut strides = img.strides();
        strides.reverse();
        Stencil { data: img.data(), extent, strides, ch: img.channels(), h: img.spacing() }
    }

    fn index(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.extent[axis]
    }

    fn at(&self, field: &[f64], node: usize, c: usize) -> f64 {
        field[node * self.ch + c]
    }

    fn d1(&self, field: &[f64], node: usize, c: usize, axis: usize) -> f64 {
        let n = self.extent[axis];
        let s = self.strides[axis];
        let i = self.index(node, axis);
        let f = |k: isize| self.at(field, (node as isize + k * s as isize) as usize, c);
        let h = self.h;
        match (n, i) {
            (1, _) => 0.0,
            (2, 0) => (f(1) - f(0)) / h,
            (2, _) => (f(0) - f(-1)) / h,
            (_, 0) => (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h),
            (_, i) if i == n - 1 => (3.0 * f(0) - 4.0 * f(-1) + f(-2)) / (2.0 * h),
            _ => (f(1) - f(-1)) / (2.0 * h),
        }
    }

    /// Range of the values in the `3^m` neighbourhood of a scalar node.
    fn neighbourhood_range(&self, node: usize) -> (f64, f64) {
        let mut nodes = vec![node];
        for a in 0..self.extent.len() {
            let i = self.index(node, a);
            let s = self.strides[a];
            let mut more = Vec::with_capacity(nodes.len() * 3);
            for &k in &nodes {
                more.push(k);
                if i > 0 {
                    more.push(k - s);
                }
                if i + 1 < self.extent[a] {
                    more.push(k + s);
                }
            }
            nodes = more;
        }
        nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| {
            let v = self.data[k * self.ch];
            (lo.min(v), hi.max(v))
        })
    }

    fn d2(&self, node: usize, c: usize, axis: usize) -> f64 {
        let n = self.extent[axis];
        let s = self.strides[axis];
        let i = self.index(node, axis);
        let f = |k: isize| self.at(self.data, (node as isize + k * s as isize) as usize, c);
        let h2 = self.h * self.h;
        match (n, i) {
            (1 | 2, _) => 0.0,
            (3, 0) => (f(0) - 2.0 * f(1) + f(2)) / h2,
            (3, 2) => (f(0) - 2.0 * f(-1) + f(-2)) / h2,
            (_, 0) => (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2,
            (_, i) if i == n - 1 => (2.0 * f(0) - 5.0 * f(-1) + 4.0 * f(-2) - f(-3)) / h2,
            _ => (f(1) - 2.0 * f(0) + f(-1)) / h2,
        }
    }
}

fn first_derivatives(st: &Stencil) -> Vec<Vec<f64>> {
    let nodes = st.data.len() / st.ch;
    (0..st.extent.len())
        .map(|a| {
            let mut out = vec![0.0; st.data.len()];
            for k in 0..nodes {
                for c in 0..st.ch {
                    out[k * st.ch + c] = st.d1(st.data, k, c, a);
                }
            }
            out
        })
        .collect()
}

fn jet_at(st: &Stencil, d1: &[Vec<f64>], node: usize) -> JetPoint {
    let m = st.extent.len();
    let n = st.ch;
    let value = (0..n).map(|c| st.at(st.data, node, c)).collect();
    let jacobian = DMatrix::from_fn(n, m, |c, a| st.at(&d1[a], node, c));
    let hessian = (0..n)
        .map(|c| {
            let mut h = DMatrix::zeros(m, m);
            for a in 0..m {
                h[(a, a)] = st.d2(node, c, a);
                for b in 0..a {
                    let v = 0.5 * (st.d1(&d1[a], node, c, b) + st.d1(&d1[b], node, c, a));
                    h[(a, b)] = v;
                    h[(b, a)] = v;
                }
            }
            h
        })
        .collect();
    JetPoint { value, jacobian, hessian }
}

fn degenerate(jet: &JetPoint) -> bool {
    jet.jacobian.norm() < 1e-8
}

/// Largest absolute row sum of the (Hessian -> rhs) linear map at a jet,
/// or `None` where the rhs is not defined.
fn diffusion_estimate(kind: &RhsKind, jet: &JetPoint) -> Option<f64> {
    if degenerate(jet) {
        return None;
    }
    let (m, n) = (jet.m(), jet.n());
    let mut probe = jet.clone();
    for h in &mut probe.hessian {
        h.fill(0.0);
    }
    let base = kind.eval(&probe).ok()?;
    let mut rows = vec![0.0; base.len()];
    for c in 0..n {
        for a in 0..m {
            for b in 0..=a {
                let mut p = probe.clone();
                p.hessian[c][(a, b)] = 1.0;
                p.hessian[c][(b, a)] = 1.0;
                let out = kind.eval(&p).ok()?;
                for (r, (o, z)) in rows.iter_mut().zip(out.iter().zip(&base)) {
                    *r += (o - z).abs();
                }
            }
        }
    }
    Some(rows.into_iter().fold(0.0, f64::max))
}

fn check_shape(image: &ImageGrid, kind: &RhsKind) -> Result<()> {
    let (m, n) = kind.shape();
    if image.ndim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: image.ndim() });
    }
    if image.channels() != n {
        return Err(Error::DimensionMismatch { expected: n, found: image.channels() });
    }
    if image.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("image contains non-finite values".into()));
    }
    Ok(())
}

/// Stable explicit time step `h^2 / (4 c_max)` estimated on `image`, where
/// `c_max` bounds the second-order coefficients of the PDE over all regular
/// pixels. Infinite when no pixel is regular.
pub fn stable_time_step(image: &ImageGrid, kind: RhsKind) -> Result<f64> {
    check_shape(image, &kind)?;
    let st = Stencil::new(image);
    let d1 = first_derivatives(&st);
    let nodes = image.num_nodes();
    let est: Vec<Option<f64>> =
        (0..nodes).into_par_iter().map(|k| diffusion_estimate(&kind, &jet_at(&st, &d1, k))).collect();
    let cmax = est.into_iter().flatten().fold(0.0, f64::max);
    let h = image.spacing();
    Ok(if cmax > 0.0 { h * h / (4.0 * cmax) } else { f64::INFINITY })
}

/// Explicit Euler steps `u += dt * rhs(jet(u))` with finite-difference jets.
/// Pixels whose Jacobian norm is below `1e-8`, or where the rhs is
/// undefined, do not move in that step. For scalar flows each update is
/// clamped to the value range of the node's `3^m` neighbourhood, which keeps
/// the discrete maximum principle.
pub fn evolve_grid(image: &ImageGrid, kind: RhsKind, dt: f64, steps: usize) -> Result<GridEvolution> {
    evolve_grid_observed(image, kind, dt, steps, |_, _| {})
}

/// As [`evolve_grid`], calling `observe(step, image)` after every step.
pub fn evolve_grid_observed<F>(
    image: &ImageGrid,
    kind: RhsKind,
    dt: f64,
    steps: usize,
    mut observe: F,
) -> Result<GridEvolution>
where
    F: FnMut(usize, &ImageGrid),
{
    check_shape(image, &kind)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    let bound = stable_time_step(image, kind)?;
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!("time step {dt} exceeds the stability bound {bound}")));
    }
    let amp0 = image.data().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let mut cur = image.clone();
    let mut frozen = 0;
    let scalar = kind.shape().1 == 1;
    for step in 1..=steps {
        let st = Stencil::new(&cur);
        let d1 = first_derivatives(&st);
        let ch = cur.channels();
        let updates: Vec<Option<Vec<f64>>> = (0..cur.num_nodes())
            .into_par_iter()
            .map(|k| {
                let jet = jet_at(&st, &d1, k);
                if degenerate(&jet) {
                    return None;
                }
                kind.eval(&jet).ok().filter(|v| v.iter().all(|x| x.is_finite()))
            })
            .collect();
        let mut next = cur.clone();
        let data = next.data_mut();
        for (k, u) in updates.into_iter().enumerate() {
            match u {
                Some(u) => {
                    for c in 0..ch {
                        data[k * ch + c] += dt * u[c];
                    }
                    if scalar {
                        let (lo, hi) = st.neighbourhood_range(k);
                        data[k] = data[k].clamp(lo, hi);
                    }
                }
                None => frozen += 1,
            }
        }
        let amp = next.data().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(amp <= 10.0 * amp0) {
            return Err(Error::UnstableStep(format!("max |u| grew from {amp0:.3e} to {amp:.3e} at step {step}")));
        }
        cur = next;
        observe(step, &cur);
    }
    Ok(GridEvolution { image: cur, dt, steps, stability_bound: bound, frozen_updates: frozen })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(n: usize) -> ImageGrid {
        let c = (n as f64 - 1.0) / 2.0;
        ImageGrid::from_fn_2d(n, n, 1, |i, j| {
            let r = (i as f64 - c).hypot(j as f64 - c);
            vec![0.5 * (1.0 - ((r - n as f64 / 4.0) / 2.0).tanh())]
        })
        .unwrap()
    }

    #[test]
    fn constant_and_linear_images_are_fixed() {
        let c = ImageGrid::from_fn_2d(12, 10, 2, |_, _| vec![0.4, -1.0]).unwrap();
        let out = evolve_grid(&c, RhsKind::Oja22, 0.1, 5).unwrap();
        assert_eq!(out.image, c);
        let lin = ImageGrid::from_fn_2d(12, 10, 2, |i, j| vec![i as f64 + 0.5 * j as f64, 2.0 * j as f64 - i as f64])
            .unwrap();
        for kind in [RhsKind::Oja22, RhsKind::L1_22, RhsKind::AmoebaOja22 { beta: 1.0 }] {
            let dt = stable_time_step(&lin, kind).unwrap();
            let out = evolve_grid(&lin, kind, dt, 5).unwrap();
            assert!(out.image.max_abs_diff(&lin) < 1e-9, "{}", kind.name());
        }
    }

    #[test]
    fn mcm_shrinks_level_sets_within_bounds() {
        let img = disc(40);
        let (lo, hi) = img.min_max();
        let dt = stable_time_step(&img, RhsKind::Mcm).unwrap();
        let mut areas = vec![img.data().iter().filter(|&&v| v > 0.5).count()];
        let out = evolve_grid_observed(&img, RhsKind::Mcm, dt, 100, |_, im| {
            areas.push(im.data().iter().filter(|&&v| v > 0.5).count());
        })
        .unwrap();
        let (a, b) = out.image.min_max();
        assert!(a >= lo - 1e-9 && b <= hi + 1e-9, "{a} {b} vs {lo} {hi}");
        assert!(areas.windows(2).all(|w| w[1] <= w[0]));
        assert!(areas.last().unwrap() < &areas[0]);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let img = disc(20);
        let dt = stable_time_step(&img, RhsKind::Mcm).unwrap();
        assert!(evolve_grid(&img, RhsKind::Mcm, 2.0 * dt, 1).is_err());
        assert!(evolve_grid(&img, RhsKind::Oja22, dt, 1).is_err());
    }
}
