//! Multivariate medians.

pub mod chs;
pub mod halfspace;
pub mod l1;
pub mod oja;
pub mod trl1;

pub use chs::{hull_layers, median_chs};
pub use halfspace::{halfspace_depth, halfspace_depth_sampled, median_halfspace, median_halfspace_sampled};
pub use l1::{l1_objective, median_componentwise, median_l1, median_medoid, L1Config};
pub use oja::{
    lift_degenerate, median_oja, median_oja_23, oja23_objective, oja_objective, oja_value_and_gradient, OjaMode,
};
pub use trl1::{covariance, inv_sqrt, median_trl1, median_trl1_planar, CovarianceMatrix};
