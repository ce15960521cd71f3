//! Jets, geometric frames and reference right-hand sides of median-filter PDEs.

use nalgebra::{DMatrix, Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::coeffs::{q1, q2, QTable};

/// Second-order jet of an `(m, n)` image at a point: values, Jacobian
/// (`n x m`, rows are channel gradients) and one `m x m` Hessian per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    pub value: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub hessian: Vec<DMatrix<f64>>,
}

impl JetPoint {
    pub fn new(value: Vec<f64>, jacobian: DMatrix<f64>, hessian: Vec<DMatrix<f64>>) -> Result<Self> {
        let (n, m) = jacobian.shape();
        if value.len() != n || hessian.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: hessian.len() });
        }
        if hessian.iter().any(|h| h.shape() != (m, m)) {
            return Err(Error::InvalidInput("Hessian shape does not match the domain dimension".into()));
        }
        let mut hessian = hessian;
        for h in &mut hessian {
            *h = 0.5 * (&*h + h.transpose());
        }
        Ok(JetPoint { value, jacobian, hessian })
    }

    /// Domain dimension `m`.
    pub fn m(&self) -> usize {
        self.jacobian.ncols()
    }

    /// Number of channels `n`.
    pub fn n(&self) -> usize {
        self.jacobian.nrows()
    }

    fn require(&self, m: usize, n: usize) -> Result<()> {
        if self.m() != m {
            return Err(Error::DimensionMismatch { expected: m, found: self.m() });
        }
        if self.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.n() });
        }
        Ok(())
    }

    /// Second directional derivative `a^T H_c b` for every channel.
    pub fn second(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        self.hessian
            .iter()
            .map(|h| {
                let mut s = 0.0;
                for i in 0..a.len() {
                    for j in 0..b.len() {
                        s += a[i] * h[(i, j)] * b[j];
                    }
                }
                s
            })
            .collect()
    }

    fn h(&self, c: usize, i: usize, j: usize) -> f64 {
        self.hessian[c][(i, j)]
    }
}

/// Geometric coordinates of a planar bivariate jet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricFrame {
    /// Unit eigenvector of the major eigenvalue of the structure tensor.
    pub eta: [f64; 2],
    /// Unit eigenvector of the minor eigenvalue; `(eta, xi)` is right-handed.
    pub xi: [f64; 2],
    pub structure_tensor: Matrix2<f64>,
    /// Euclidean normalisation matrix.
    pub normalisation: Matrix2<f64>,
    /// Norms of the directional derivatives along `eta` and `xi`.
    pub norm_eta: f64,
    pub norm_xi: f64,
    /// Set when both eigenvalues coincide; then `eta`, `xi` are the axes.
    pub degenerate: bool,
}

fn jac2(jet: &JetPoint) -> Matrix2<f64> {
    let d = &jet.jacobian;
    Matrix2::new(d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)])
}

/// Structure tensor eigenframe and normalisation matrix of a `(2, 2)` jet.
pub fn geometric_frame(jet: &JetPoint) -> Result<GeometricFrame> {
    jet.require(2, 2)?;
    let d = jac2(jet);
    let scale = d.norm_squared();
    if d.determinant().abs() <= 1e-12 * scale || scale == 0.0 {
        return Err(Error::SingularJacobian);
    }
    let j = d.transpose() * d;
    let eig = SymmetricEigen::new(j);
    let (lmax, lmin) = (eig.eigenvalues.max(), eig.eigenvalues.min());
    let degenerate = lmax - lmin <= 1e-10 * lmax;
    let mut eta = if degenerate {
        Vector2::new(1.0, 0.0)
    } else {
        let k = eig.eigenvalues.imax();
        eig.eigenvectors.column(k).into_owned()
    };
    if !degenerate {
        let gu = Vector2::new(d[(0, 0)], d[(0, 1)]);
        let gv = Vector2::new(d[(1, 0)], d[(1, 1)]);
        let s = if eta.dot(&gu).abs() > 1e-14 * gu.norm() { eta.dot(&gu) } else { eta.dot(&gv) };
        if s < 0.0 {
            eta = -eta;
        }
    }
    let xi = Vector2::new(-eta[1], eta[0]);
    let norm_eta = (d * eta).norm();
    let norm_xi = (d * xi).norm();
    let p = Matrix2::from_columns(&[eta, xi]);
    let dinv_t = d.try_inverse().ok_or(Error::SingularJacobian)?.transpose();
    let r = dinv_t * p * Matrix2::from_diagonal(&Vector2::new(norm_eta, norm_xi));
    Ok(GeometricFrame {
        eta: [eta[0], eta[1]],
        xi: [xi[0], xi[1]],
        structure_tensor: j,
        normalisation: r,
        norm_eta,
        norm_xi,
        degenerate,
    })
}

fn grad_scalar(jet: &JetPoint) -> Result<(f64, f64, f64, f64, f64)> {
    jet.require(2, 1)?;
    let (ux, uy) = (jet.jacobian[(0, 0)], jet.jacobian[(0, 1)]);
    if ux.hypot(uy) <= 1e-12 {
        return Err(Error::VanishingGradient);
    }
    Ok((ux, uy, jet.h(0, 0, 0), jet.h(0, 0, 1), jet.h(0, 1, 1)))
}

/// Mean curvature motion `u_t = u_xi_xi = kappa |grad u|`.
pub fn rhs_mcm(jet: &JetPoint) -> Result<Vec<f64>> {
    let (ux, uy, uxx, uxy, uyy) = grad_scalar(jet)?;
    Ok(vec![(ux * ux * uyy - 2.0 * ux * uy * uxy + uy * uy * uxx) / (ux * ux + uy * uy)])
}

/// Self-snakes `u_t = |grad u| div(g(|grad u|) grad u / |grad u|)` with `g(s) = 1 / (1 + beta^2 s^2)`.
pub fn rhs_selfsnakes(jet: &JetPoint, beta: f64) -> Result<Vec<f64>> {
    let (ux, uy, uxx, uxy, uyy) = grad_scalar(jet)?;
    let s2 = ux * ux + uy * uy;
    let u_xixi = (ux * ux * uyy - 2.0 * ux * uy * uxy + uy * uy * uxx) / s2;
    let u_etaeta = (ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy) / s2;
    let b2s2 = beta * beta * s2;
    let g = 1.0 / (1.0 + b2s2);
    let sgp = -2.0 * b2s2 / ((1.0 + b2s2) * (1.0 + b2s2));
    Ok(vec![g * u_xixi + sgp * u_etaeta])
}

fn vec2(v: &[f64]) -> Vector2<f64> {
    Vector2::new(v[0], v[1])
}

/// Frame-based evaluation shared by the L1 flows.
fn l1_22(jet: &JetPoint, q1f: impl Fn(f64) -> f64, q2f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let f = geometric_frame(jet)?;
    let (r, s) = (f.norm_eta, f.norm_xi);
    let lam = r / s;
    let rot = f.normalisation;
    let (q1l, q2l, q1i, q2i) = (q1f(lam), q2f(lam), q1f(1.0 / lam), q2f(1.0 / lam));
    let sm = rot * Matrix2::from_diagonal(&Vector2::new(q1l, q2l)) * rot.transpose();
    let tm = rot * Matrix2::from_diagonal(&Vector2::new(q2i, q1i)) * rot.transpose();
    let wm = rot * Matrix2::new(0.0, lam * q1l, q1i / lam, 0.0) * rot.transpose();
    let uee = vec2(&jet.second(&f.eta, &f.eta));
    let uxx = vec2(&jet.second(&f.xi, &f.xi));
    let uxe = vec2(&jet.second(&f.xi, &f.eta));
    let out = sm * uee + tm * uxx - 2.0 * wm * uxe;
    Ok(vec![out[0], out[1]])
}

/// L1 median flow of a `(2, 2)` image, time scale `rho^2 / 6`.
pub fn rhs_l1_22(jet: &JetPoint) -> Result<Vec<f64>> {
    l1_22(jet, q1, q2)
}

/// As [`rhs_l1_22`] with tabulated coefficients.
pub fn rhs_l1_22_tabulated(jet: &JetPoint, table: &QTable) -> Result<Vec<f64>> {
    l1_22(jet, |l| table.q1(l), |l| table.q2(l))
}

/// Oja median flow of a `(2, 2)` image, time scale `rho^2 / 24`:
/// `u_t = 2 Lap u + A (u_yy - u_xx) + B u_xy`.
pub fn rhs_oja_22(jet: &JetPoint) -> Result<Vec<f64>> {
    jet.require(2, 2)?;
    let d = jac2(jet);
    let (ux, uy, vx, vy) = (d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)]);
    let det = ux * vy - uy * vx;
    if det.abs() <= 1e-12 * d.norm_squared() {
        return Err(Error::SingularJacobian);
    }
    let a = Matrix2::new(ux * vy + uy * vx, -2.0 * ux * uy, 2.0 * vx * vy, -ux * vy - uy * vx) / det;
    let b = Matrix2::new(ux * vx - uy * vy, -ux * ux + uy * uy, vx * vx - vy * vy, -ux * vx + uy * vy) * (2.0 / det);
    let hxx = Vector2::new(jet.h(0, 0, 0), jet.h(1, 0, 0));
    let hyy = Vector2::new(jet.h(0, 1, 1), jet.h(1, 1, 1));
    let hxy = Vector2::new(jet.h(0, 0, 1), jet.h(1, 0, 1));
    let out = 2.0 * (hxx + hyy) + a * (hyy - hxx) + b * hxy;
    Ok(vec![out[0], out[1]])
}

/// Oja (equivalently affine-invariant) median flow of a `(3, 3)` image at
/// time scale `rho^2 / 20`, the scale on which it reduces to
/// `u_t = u_xx + 2 u_yy + 2 u_zz - ...` at the identity Jacobian.
/// For time scale `rho^2 / 60` multiply by 3.
pub fn rhs_oja_33(jet: &JetPoint) -> Result<Vec<f64>> {
    jet.require(3, 3)?;
    let d = Matrix3::from_fn(|i, j| jet.jacobian[(i, j)]);
    if d.determinant().abs() <= 1e-12 * d.norm().powi(3) {
        return Err(Error::SingularJacobian);
    }
    let dinv = d.try_inverse().ok_or(Error::SingularJacobian)?;
    let e = |i: usize, j: usize| {
        let mut m = Matrix3::zeros();
        m[(i, j)] = 1.0;
        m
    };
    let a1 = Matrix3::identity() - 3.0 * d * e(1, 1) * dinv;
    let a2 = Matrix3::identity() - 3.0 * d * e(2, 2) * dinv;
    let b1 = -3.0 * d * (e(0, 1) + e(1, 0)) * dinv;
    let b2 = -3.0 * d * (e(0, 2) + e(2, 0)) * dinv;
    let b3 = -3.0 * d * (e(1, 2) + e(2, 1)) * dinv;
    let hv = |i: usize, j: usize| Vector3::new(jet.h(0, i, j), jet.h(1, i, j), jet.h(2, i, j));
    let lap = hv(0, 0) + hv(1, 1) + hv(2, 2);
    let out = 5.0 * lap
        + a1 * (hv(1, 1) - hv(0, 0))
        + a2 * (hv(2, 2) - hv(0, 0))
        + b1 * hv(0, 1)
        + b2 * hv(0, 2)
        + b3 * hv(1, 2);
    Ok(out.iter().map(|v| v / 3.0).collect())
}

/// Oja median flow of a `(2, 3)` image (surface in R^3), time scale `rho^2 / 24`.
pub fn rhs_oja_23(jet: &JetPoint) -> Result<Vec<f64>> {
    jet.require(2, 3)?;
    let dx = Vector3::new(jet.jacobian[(0, 0)], jet.jacobian[(1, 0)], jet.jacobian[(2, 0)]);
    let dy = Vector3::new(jet.jacobian[(0, 1)], jet.jacobian[(1, 1)], jet.jacobian[(2, 1)]);
    let nrm = dx.cross(&dy);
    if nrm.norm() <= 1e-12 * dx.norm() * dy.norm() || nrm.norm() == 0.0 {
        return Err(Error::RankDeficient);
    }
    let d3 = Matrix3::from_columns(&[dx, dy, nrm / nrm.norm()]);
    let inv = d3.try_inverse().ok_or(Error::RankDeficient)?;
    let a = d3 * Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 0.0)) * inv;
    let b = -2.0 * d3 * Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0) * inv;
    let hv = |i: usize, j: usize| Vector3::new(jet.h(0, i, j), jet.h(1, i, j), jet.h(2, i, j));
    let out = 2.0 * (hv(0, 0) + hv(1, 1)) + a * (hv(1, 1) - hv(0, 0)) + b * hv(0, 1);
    Ok(out.iter().copied().collect())
}

/// Oja median flow with amoeba selection for a `(2, 2)` image, time scale `rho^2 / 24`.
pub fn rhs_amoeba_oja_22(jet: &JetPoint, beta: f64) -> Result<Vec<f64>> {
    let f = geometric_frame(jet)?;
    let (r, s) = (f.norm_eta, f.norm_xi);
    let b2 = beta * beta;
    let t1 = |z: f64| (1.0 - 8.0 * b2 * z * z) / ((1.0 + b2 * z * z) * (1.0 + b2 * z * z));
    let t2 = |w: f64, z: f64| 3.0 / ((1.0 + b2 * w * w) * (1.0 + b2 * z * z));
    let t3 = |w: f64, z: f64| (w / z) * (1.0 + 4.0 * b2 * z * z) / ((1.0 + b2 * w * w) * (1.0 + b2 * z * z));
    let rot = f.normalisation;
    let m1 = rot * Matrix2::from_diagonal(&Vector2::new(t1(r), t2(r, s))) * rot.transpose();
    let m2 = rot * Matrix2::from_diagonal(&Vector2::new(t2(r, s), t1(s))) * rot.transpose();
    let m3 = rot * (-2.0 * Matrix2::new(0.0, t3(r, s), t3(s, r), 0.0)) * rot.transpose();
    let uee = vec2(&jet.second(&f.eta, &f.eta));
    let uxx = vec2(&jet.second(&f.xi, &f.xi));
    let uex = vec2(&jet.second(&f.eta, &f.xi));
    let out = m1 * uee + m2 * uxx + m3 * uex;
    Ok(vec![out[0], out[1]])
}
