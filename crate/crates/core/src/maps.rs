//! Affine and projective transformations of R^n.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ConvexPolytope, WeightedPointSet};

/// Relative size below which a projective denominator counts as zero.
const DENOM_EPS: f64 = 1e-12;

/// `x -> A x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub matrix: DMatrix<f64>,
    pub shift: DVector<f64>,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, shift: DVector<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != shift.len() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: shift.len() });
        }
        Ok(AffineMap { matrix, shift })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap { matrix: DMatrix::identity(n, n), shift: DVector::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok((&self.matrix * DVector::from_column_slice(x) + &self.shift).as_slice().to_vec())
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.matrix.clone().try_inverse().ok_or(Error::SingularMap)?;
        let shift = -(&inv * &self.shift);
        Ok(AffineMap { matrix: inv, shift })
    }

    /// 2-norm condition number of the linear part.
    pub fn condition_number(&self) -> f64 {
        let s = self.matrix.singular_values();
        s.max() / s.min()
    }

    pub fn to_projective(&self) -> ProjectiveMap {
        let n = self.dim();
        ProjectiveMap { matrix: self.matrix.clone(), shift: self.shift.clone(), row: DVector::zeros(n), scale: 1.0 }
    }
}

/// `x -> (P x + q) / (r^T x + s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveMap {
    pub matrix: DMatrix<f64>,
    pub shift: DVector<f64>,
    pub row: DVector<f64>,
    pub scale: f64,
}

impl ProjectiveMap {
    pub fn new(matrix: DMatrix<f64>, shift: DVector<f64>, row: DVector<f64>, scale: f64) -> Result<Self> {
        let n = shift.len();
        if matrix.nrows() != n || matrix.ncols() != n || row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        Ok(ProjectiveMap { matrix, shift, row, scale })
    }

    /// Builds the map from its `(n+1) x (n+1)` homogeneous matrix.
    pub fn from_homogeneous(h: &DMatrix<f64>) -> Result<Self> {
        if !h.is_square() || h.nrows() < 2 {
            return Err(Error::InvalidInput("homogeneous matrix must be square".into()));
        }
        let n = h.nrows() - 1;
        Ok(ProjectiveMap {
            matrix: h.view((0, 0), (n, n)).into_owned(),
            shift: h.view((0, n), (n, 1)).column(0).into_owned(),
            row: h.view((n, 0), (1, n)).transpose().column(0).into_owned(),
            scale: h[(n, n)],
        })
    }

    pub fn homogeneous(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n + 1, n + 1);
        h.view_mut((0, 0), (n, n)).copy_from(&self.matrix);
        h.view_mut((0, n), (n, 1)).copy_from(&self.shift);
        h.view_mut((n, 0), (1, n)).copy_from(&self.row.transpose());
        h[(n, n)] = self.scale;
        h
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    fn denom_scale(&self, x: &[f64]) -> f64 {
        self.scale.abs() + self.row.iter().zip(x).map(|(r, v)| (r * v).abs()).sum::<f64>()
    }

    pub fn denominator(&self, x: &[f64]) -> f64 {
        self.scale + self.row.iter().zip(x).map(|(r, v)| r * v).sum::<f64>()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let den = self.denominator(x);
        if den.abs() <= DENOM_EPS * self.denom_scale(x).max(f64::MIN_POSITIVE) {
            return Err(Error::DenominatorVanishes);
        }
        let num = &self.matrix * DVector::from_column_slice(x) + &self.shift;
        Ok(num.iter().map(|v| v / den).collect())
    }

    /// `self` after `inner`.
    pub fn compose(&self, inner: &ProjectiveMap) -> Result<Self> {
        Self::from_homogeneous(&(self.homogeneous() * inner.homogeneous()))
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.homogeneous().try_inverse().ok_or(Error::SingularMap)?;
        Self::from_homogeneous(&inv)
    }

    /// Fails with `DenominatorVanishes` unless the denominator keeps one sign on the points.
    pub fn apply_set(&self, set: &WeightedPointSet) -> Result<WeightedPointSet> {
        let mut sign = 0.0;
        for p in set.points() {
            let d = self.denominator(p);
            if sign * d < 0.0 {
                return Err(Error::DenominatorVanishes);
            }
            sign = d.signum();
        }
        set.map_points(|p| self.apply(p))
    }

    pub fn apply_polytope(&self, poly: &ConvexPolytope) -> Result<ConvexPolytope> {
        poly.map(|p| self.apply(p))
    }
}

/// Applies a projective map to a point.
pub fn apply_projective(map: &ProjectiveMap, x: &[f64]) -> Result<Vec<f64>> {
    map.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample() -> ProjectiveMap {
        ProjectiveMap::new(
            DMatrix::from_row_slice(2, 2, &[1.2, 0.3, -0.1, 0.9]),
            DVector::from_vec(vec![0.5, -0.2]),
            DVector::from_vec(vec![0.1, 0.2]),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn composition_matches_sequential_application() {
        let a = sample();
        let b = ProjectiveMap::new(
            DMatrix::from_row_slice(2, 2, &[0.7, -0.4, 0.2, 1.1]),
            DVector::from_vec(vec![-0.3, 0.1]),
            DVector::from_vec(vec![-0.05, 0.15]),
            0.9,
        )
        .unwrap();
        let x = [0.4, 0.7];
        let seq = a.apply(&b.apply(&x).unwrap()).unwrap();
        let comp = a.compose(&b).unwrap().apply(&x).unwrap();
        assert_relative_eq!(seq[0], comp[0], epsilon = 1e-12);
        assert_relative_eq!(seq[1], comp[1], epsilon = 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        let a = sample();
        let x = [0.3, -0.6];
        let y = a.inverse().unwrap().apply(&a.apply(&x).unwrap()).unwrap();
        assert_relative_eq!(x[0], y[0], epsilon = 1e-12);
        assert_relative_eq!(x[1], y[1], epsilon = 1e-12);
    }

    #[test]
    fn vanishing_denominator() {
        let a = ProjectiveMap::new(DMatrix::identity(2, 2), DVector::zeros(2), DVector::from_vec(vec![1.0, 0.0]), -1.0)
            .unwrap();
        assert!(matches!(a.apply(&[1.0, 3.0]), Err(Error::DenominatorVanishes)));
    }
}
