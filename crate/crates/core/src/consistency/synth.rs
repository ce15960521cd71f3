//! Closed-form smooth test images with exact jets.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::JetPoint;

/// Smooth image with closed-form value, Jacobian and Hessians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SyntheticImage {
    /// `u(x) = u0 + D (x - c) + 1/2 [(x - c)^T H_k (x - c)]_k`.
    Quadratic { value: Vec<f64>, jacobian: DMatrix<f64>, hessian: Vec<DMatrix<f64>>, center: Vec<f64> },
    /// Planar grey-value image `u(x, y) = tanh(a x) + b y^2`.
    TanhRamp { a: f64, b: f64 },
}

impl SyntheticImage {
    /// Quadratic image whose jet at `center` equals `jet`.
    pub fn from_jet(jet: &JetPoint, center: Vec<f64>) -> Result<Self> {
        if center.len() != jet.m() {
            return Err(Error::DimensionMismatch { expected: jet.m(), found: center.len() });
        }
        Ok(SyntheticImage::Quadratic {
            value: jet.value.clone(),
            jacobian: jet.jacobian.clone(),
            hessian: jet.hessian.clone(),
            center,
        })
    }

    /// Domain dimension.
    pub fn m(&self) -> usize {
        match self {
            SyntheticImage::Quadratic { jacobian, .. } => jacobian.ncols(),
            SyntheticImage::TanhRamp { .. } => 2,
        }
    }

    /// Number of channels.
    pub fn n(&self) -> usize {
        match self {
            SyntheticImage::Quadratic { jacobian, .. } => jacobian.nrows(),
            SyntheticImage::TanhRamp { .. } => 1,
        }
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.value_into(x, &mut out);
        out
    }

    /// Writes the value at `x` into `out` (length `n`).
    pub fn value_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            SyntheticImage::Quadratic { value, jacobian, hessian, center } => {
                let m = center.len();
                let mut d = [0.0; 3];
                for a in 0..m {
                    d[a] = x[a] - center[a];
                }
                for (c, o) in out.iter_mut().enumerate() {
                    let mut v = value[c];
                    for a in 0..m {
                        v += jacobian[(c, a)] * d[a];
                        let mut q = 0.0;
                        for b in 0..m {
                            q += hessian[c][(a, b)] * d[b];
                        }
                        v += 0.5 * d[a] * q;
                    }
                    *o = v;
                }
            }
            SyntheticImage::TanhRamp { a, b } => out[0] = (a * x[0]).tanh() + b * x[1] * x[1],
        }
    }

    /// Jacobian (`n x m`) at `x`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        match self {
            SyntheticImage::Quadratic { jacobian, hessian, center, .. } => {
                let (n, m) = jacobian.shape();
                DMatrix::from_fn(n, m, |c, a| {
                    jacobian[(c, a)] + (0..m).map(|b| hessian[c][(a, b)] * (x[b] - center[b])).sum::<f64>()
                })
            }
            SyntheticImage::TanhRamp { a, b } => {
                let t = (a * x[0]).tanh();
                DMatrix::from_row_slice(1, 2, &[a * (1.0 - t * t), 2.0 * b * x[1]])
            }
        }
    }

    /// Hessians at `x`, one per channel.
    pub fn hessian(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        match self {
            SyntheticImage::Quadratic { hessian, .. } => hessian.clone(),
            SyntheticImage::TanhRamp { a, b } => {
                let t = (a * x[0]).tanh();
                let uxx = -2.0 * a * a * t * (1.0 - t * t);
                vec![DMatrix::from_row_slice(2, 2, &[uxx, 0.0, 0.0, 2.0 * b])]
            }
        }
    }

    /// Second-order jet at `x`.
    pub fn jet(&self, x: &[f64]) -> JetPoint {
        JetPoint { value: self.value(x), jacobian: self.jacobian(x), hessian: self.hessian(x) }
    }
}
