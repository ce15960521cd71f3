//! Reference PDEs approximated by median filters, and their discretisations.

pub mod coeffs;
pub mod curve;
pub mod grid;
pub(crate) mod quad;
pub mod rhs;

pub use coeffs::{q1, q2, QTable};
pub use curve::{
    chs_vanishing_point, evolve_chs_curve, evolve_chs_curve_observed, ClosedCurve, ConstantDensity, CurveEvolution,
    Density2D, GridDensity, TimeStep, AUTO_STEP_FACTOR,
};
pub use grid::{evolve_grid, evolve_grid_observed, stable_time_step, GridEvolution, RhsKind};
pub use rhs::{
    geometric_frame, rhs_amoeba_oja_22, rhs_l1_22, rhs_l1_22_tabulated, rhs_mcm, rhs_oja_22, rhs_oja_23, rhs_oja_33,
    rhs_selfsnakes, GeometricFrame, JetPoint,
};
