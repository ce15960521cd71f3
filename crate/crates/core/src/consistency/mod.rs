//! Numerical checks that median filters approach their PDE limits and that
//! medians respect their equivariances.

pub mod equivariance;
pub mod experiments;
pub mod sampling;
pub mod study;
pub mod synth;

pub use equivariance::{
    equivariance_suite, random_transform, EquivarianceMedian, EquivarianceOptions, EquivarianceReport,
    EquivarianceTrial, TransformFamily,
};
pub use experiments::{run_experiment, CaseReport, ExperimentOptions, ExperimentReport, EXPERIMENTS};
pub use sampling::{sample_selector, selector_points, stream_seed, AmoebaOutline, SelectorShape};
pub use study::{
    convergence_study, fitted_order, pde_estimate, random_jet, random_matrix, warp_jet, ConsistencyReport,
    EscalationStep, Estimator, StudySpec, TauRule, TrialRecord,
};
pub use synth::SyntheticImage;
