//! Default numerical settings shared by the library and the command line.

/// Weiszfeld stopping tolerance, relative to the data diameter.
pub const L1_TOL: f64 = 1e-10;
pub const L1_MAX_ITER: usize = 10_000;

/// Largest set handled by the exact planar Oja solver under automatic mode selection.
pub const OJA_EXACT_MAX_N: usize = 40;
/// Largest set handled by the exact half-space median.
pub const HALFSPACE_EXACT_MAX_N: usize = 200;
/// Number of directions used by the sampled half-space median.
pub const HALFSPACE_DIRECTIONS: usize = 720;

/// Relative objective tolerance that decides membership in a median set.
pub const SET_REL_TOL: f64 = 1e-9;

/// Default radius of the disc structuring element.
pub const DISC_RADIUS: f64 = 1.5;
pub const FILTER_ITERATIONS: usize = 1;
pub const AMOEBA_BETA: f64 = 1.0;
pub const AMOEBA_RHO: f64 = 3.0;

/// Consistency experiments.
pub const SAMPLES: usize = 200_000;
pub const SEED: u64 = 20_240_917;
/// Trials of an equivariance experiment.
pub const TRIALS: usize = 100;
/// Condition bound of random affine maps in equivariance experiments.
pub const COND_BOUND: f64 = 100.0;
/// Condition bound of random Jacobians and warps in consistency experiments.
pub const JET_COND_BOUND: f64 = 20.0;
/// Directions of the half-space median in consistency experiments.
pub const CONSISTENCY_HALFSPACE_LINES: usize = 180;

/// Relative threshold below which a density counts as zero.
pub const CHS_EPSILON: f64 = 1e-3;
