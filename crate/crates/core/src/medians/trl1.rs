//! Transformation-retransformation L1 median.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geom::{MedianResult, PointN, WeightedPointSet};

use super::l1::{median_l1, L1Config};

/// Pairwise scatter `sum_{i,j} w_i w_j (x_i - x_j)(x_i - x_j)^T` with its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub matrix: DMatrix<f64>,
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Matching unit eigenvectors as columns.
    pub eigenvectors: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn is_positive_definite(&self) -> bool {
        let max = self.eigenvalues.last().copied().unwrap_or(0.0);
        max > 0.0 && self.eigenvalues[0] > 1e-10 * max
    }
}

/// Pairwise scatter computed through the identity
/// `sum_{i,j} w_i w_j (x_i - x_j)(x_i - x_j)^T = 2 W sum_i w_i (x_i - m)(x_i - m)^T`.
pub fn covariance(set: &WeightedPointSet) -> Result<CovarianceMatrix> {
    set.require_nonempty()?;
    let n = set.dim();
    let mean = set.weighted_mean();
    let total = set.total_weight();
    let mut c = DMatrix::zeros(n, n);
    for (p, w) in set.iter() {
        let d = DVector::from_iterator(n, p.iter().zip(&mean).map(|(x, m)| x - m));
        c += w * &d * d.transpose();
    }
    c *= 2.0 * total;
    Ok(spectral(c))
}

fn spectral(matrix: DMatrix<f64>) -> CovarianceMatrix {
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = order.len();
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    CovarianceMatrix { eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(), eigenvectors: vecs, matrix }
}

/// `C^{-1/2}` by eigendecomposition; fails unless `C` is positive definite.
pub fn inv_sqrt(c: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    if !c.is_positive_definite() {
        return Err(Error::SingularCovariance);
    }
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        c.eigenvalues.len(),
        c.eigenvalues.iter().map(|l| 1.0 / l.sqrt()),
    ));
    Ok(&c.eigenvectors * d * c.eigenvectors.transpose())
}

/// L1 median after whitening with `T`, mapped back through `T^{-1}`.
fn median_after(
    set: &WeightedPointSet,
    t: &DMatrix<f64>,
    t_inv: &DMatrix<f64>,
    cfg: &L1Config,
) -> Result<MedianResult> {
    let mean = DVector::from_column_slice(&set.weighted_mean());
    let moved = set.map_points(|p| Ok((t * (DVector::from_column_slice(p) - &mean)).as_slice().to_vec()))?;
    let r = median_l1(&moved, cfg)?;
    let back =
        |x: &[f64]| -> Result<Vec<f64>> { Ok((t_inv * DVector::from_column_slice(x) + &mean).as_slice().to_vec()) };
    Ok(MedianResult {
        representative: PointN::new(back(r.representative.coords())?)?,
        median_set: r.median_set.map(|s| s.map(back)).transpose()?,
        objective_value: r.objective_value,
        iterations: r.iterations,
        status: r.status,
    })
}

/// Affine-equivariant L1 median: whiten with `C^{-1/2}`, take the L1 median, map back.
pub fn median_trl1(set: &WeightedPointSet, cfg: &L1Config) -> Result<MedianResult> {
    set.require_nonempty()?;
    if set.dim() == 1 {
        return median_l1(set, cfg);
    }
    let c = covariance(set)?;
    let t = inv_sqrt(&c)?;
    let t_inv = t.clone().try_inverse().ok_or(Error::SingularCovariance)?;
    median_after(set, &t, &t_inv, cfg)
}

/// Variant for samples of a two-parameter family in R^3: only the plane of the
/// two dominant eigenvectors is whitened, the normal direction is scaled by
/// the geometric mean of the two in-plane factors.
pub fn median_trl1_planar(set: &WeightedPointSet, cfg: &L1Config) -> Result<MedianResult> {
    set.require_nonempty()?;
    set.require_dim(3)?;
    let c = covariance(set)?;
    let (l1, l2) = (c.eigenvalues[2], c.eigenvalues[1]);
    if !(l1 > 0.0 && l2 > 1e-10 * l1) {
        return Err(Error::SingularCovariance);
    }
    let s1 = 1.0 / l1.sqrt();
    let s2 = 1.0 / l2.sqrt();
    let s3 = (s1 * s2).sqrt();
    let v = &c.eigenvectors;
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![s3, s2, s1]));
    let t = v * &d * v.transpose();
    let dinv = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0 / s3, 1.0 / s2, 1.0 / s1]));
    let t_inv = v * dinv * v.transpose();
    median_after(set, &t, &t_inv, cfg)
}
