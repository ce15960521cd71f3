//! Named consistency experiments with JSON and CSV reports.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::{JET_COND_BOUND, SAMPLES, SEED};
use crate::error::{Error, Result};
use crate::pde::{rhs_amoeba_oja_22, rhs_mcm, rhs_oja_22, rhs_oja_23, rhs_oja_33, rhs_selfsnakes, JetPoint};

use super::sampling::SelectorShape;
use super::study::{
    convergence_study, experiment_rng, fitted_order, random_matrix, warp_jet, ConsistencyReport, Estimator, StudySpec,
    TauRule,
};
use super::synth::SyntheticImage;

/// Names accepted by [`run_experiment`].
pub const EXPERIMENTS: [&str; 14] = [
    "guichard_morel",
    "oja_22_oja",
    "oja_22_trl1",
    "oja_22_halfspace",
    "ojapde33_lemma",
    "ojapde33_prop",
    "ojapde23_lemma",
    "ojapde23_warped",
    "amoeba_selfsnakes",
    "amoeba_oja_trl1",
    "amoeba_oja_oja",
    "chs_conjecture",
    "halfspace_vs_oja",
    "trl1_vs_oja",
];

/// Overrides of an experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub seed: Option<u64>,
    pub radii: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub trials: Option<usize>,
    /// Number of randomly warped jets for experiments that use them.
    pub jets: Option<usize>,
    /// Cap for automatic sample escalation; `Some(0)` disables it.
    pub max_samples: Option<usize>,
}

/// One study within an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub label: String,
    pub jet: JetPoint,
    #[serde(flatten)]
    pub report: ConsistencyReport,
}

/// Summary over all cases: per radius the largest error of any case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub radii: Vec<f64>,
    pub errors: Vec<f64>,
    pub relative_errors: Vec<f64>,
    pub fitted_order: Option<f64>,
    /// Whether the experiment only reports data and asserts nothing.
    pub report_only: bool,
    pub cases: Vec<CaseReport>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    /// One line per trial: case, radius, trial, seed, samples, estimate and
    /// analytic components.
    pub fn trials_csv(&self) -> String {
        let n = self.cases.first().map_or(0, |c| c.report.analytic.len());
        let mut s = String::from("case,radius,trial,seed,samples");
        for c in 0..n {
            s.push_str(&format!(",estimate{c}"));
        }
        for c in 0..n {
            s.push_str(&format!(",analytic{c}"));
        }
        s.push('\n');
        for case in &self.cases {
            for t in &case.report.trial_records {
                s.push_str(&format!("{},{:?},{},{},{}", case.label, t.radius, t.trial, t.seed, t.samples));
                for v in t.estimate.iter().chain(&case.report.analytic) {
                    s.push_str(&format!(",{v:?}"));
                }
                s.push('\n');
            }
        }
        s
    }
}

struct Plan {
    estimator: Estimator,
    shape: SelectorShape,
    tau: TauRule,
    radii: Vec<f64>,
    samples: usize,
    trials: usize,
    max_samples: Option<usize>,
    report_only: bool,
    cases: Vec<(String, SyntheticImage, Vec<f64>, Vec<f64>)>,
}

fn jet(m: usize, jac: &[f64], hess: &[&[f64]]) -> JetPoint {
    let n = hess.len();
    JetPoint::new(
        vec![0.0; n],
        DMatrix::from_row_slice(n, m, jac),
        hess.iter().map(|h| DMatrix::from_row_slice(m, m, h)).collect(),
    )
    .expect("consistent jet")
}

fn normalized_22() -> JetPoint {
    jet(2, &[1.0, 0.0, 0.0, 1.0], &[&[0.9, -0.3, -0.3, 0.2], &[-0.4, 0.5, 0.5, -0.6]])
}

fn normalized_33() -> JetPoint {
    let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    jet(
        3,
        &id,
        &[
            &[0.8, -0.2, 0.3, -0.2, 0.5, 0.1, 0.3, 0.1, -0.4],
            &[-0.3, 0.4, 0.0, 0.4, 0.6, -0.5, 0.0, -0.5, 0.2],
            &[0.2, 0.1, -0.6, 0.1, -0.7, 0.3, -0.6, 0.3, 0.5],
        ],
    )
}

fn normalized_23() -> JetPoint {
    jet(2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0], &[&[0.7, -0.2, -0.2, 0.4], &[-0.5, 0.3, 0.3, 0.6], &[0.6, 0.2, 0.2, -0.3]])
}

fn origin(m: usize) -> Vec<f64> {
    vec![0.0; m]
}

/// `count` warps `A u` of `base` with random `A` of bounded condition number.
fn warped(base: &JetPoint, count: usize, seed: u64) -> Vec<JetPoint> {
    let mut rng = experiment_rng(seed, 1);
    let n = base.n();
    (0..count).map(|_| warp_jet(base, &random_matrix(n, n, JET_COND_BOUND, &mut rng))).collect()
}

fn jet_cases(
    base: JetPoint,
    warps: usize,
    seed: u64,
    include_base: bool,
    rhs: impl Fn(&JetPoint) -> Result<Vec<f64>>,
) -> Result<Vec<(String, SyntheticImage, Vec<f64>, Vec<f64>)>> {
    let m = base.m();
    let mut jets = Vec::new();
    if include_base {
        jets.push(("normalized".to_string(), base.clone()));
    }
    for (k, j) in warped(&base, warps, seed).into_iter().enumerate() {
        jets.push((format!("warped{k}"), j));
    }
    jets.into_iter()
        .map(|(label, j)| {
            let analytic = rhs(&j)?;
            Ok((label, SyntheticImage::from_jet(&j, origin(m))?, origin(m), analytic))
        })
        .collect()
}

fn plan(name: &str, opts: &ExperimentOptions, seed: u64) -> Result<Plan> {
    let planar = vec![0.2, 0.1, 0.05];
    let jets = opts.jets.unwrap_or(10);
    let base = |estimator, shape, tau, radii: Vec<f64>, samples, trials| Plan {
        estimator,
        shape,
        tau,
        radii,
        samples,
        trials,
        max_samples: None,
        report_only: false,
        cases: Vec::new(),
    };
    let mut p = match name {
        "guichard_morel" => {
            let img = SyntheticImage::Quadratic {
                value: vec![0.0],
                jacobian: DMatrix::zeros(1, 2),
                hessian: vec![DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -2.0])],
                center: vec![0.0, 0.0],
            };
            let x0 = vec![0.5, 0.3];
            let analytic = rhs_mcm(&img.jet(&x0))?;
            let mut p = base(Estimator::Rank, SelectorShape::Disc, TauRule::Six, planar, SAMPLES, 8);
            p.max_samples = Some(16 * SAMPLES);
            p.cases.push(("x2-y2".into(), img, x0, analytic));
            p
        }
        "oja_22_oja" | "oja_22_trl1" | "oja_22_halfspace" => {
            let est = match name {
                "oja_22_oja" => Estimator::Oja,
                "oja_22_trl1" => Estimator::Trl1,
                _ => Estimator::Halfspace,
            };
            let mut p = base(est, SelectorShape::Disc, TauRule::TwentyFour, planar, SAMPLES, 1);
            p.cases = jet_cases(normalized_22(), jets, seed, true, rhs_oja_22)?;
            p
        }
        "ojapde33_lemma" => {
            let mut p = base(Estimator::L1, SelectorShape::Ball3, TauRule::Twenty, vec![0.32, 0.16, 0.08], 500_000, 1);
            p.cases = jet_cases(normalized_33(), 0, seed, true, rhs_oja_33)?;
            p
        }
        "ojapde33_prop" => {
            let mut p = base(Estimator::Trl1, SelectorShape::Ball3, TauRule::Sixty, vec![0.32, 0.16, 0.08], 500_000, 1);
            let rhs60 = |j: &JetPoint| rhs_oja_33(j).map(|v| v.into_iter().map(|x| 3.0 * x).collect());
            p.cases = jet_cases(normalized_33(), opts.jets.unwrap_or(3), seed, true, rhs60)?;
            p
        }
        "ojapde23_lemma" => {
            let mut p = base(Estimator::L1, SelectorShape::Disc, TauRule::TwentyFour, planar, SAMPLES, 1);
            p.cases = jet_cases(normalized_23(), 0, seed, true, rhs_oja_23)?;
            let w_only = jet(2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0], &[&[0.0; 4], &[0.0; 4], &[0.6, 0.2, 0.2, -0.3]]);
            p.cases.extend(jet_cases(w_only, 0, seed, true, rhs_oja_23)?.into_iter().map(|mut c| {
                c.0 = "w_channel".into();
                c
            }));
            p
        }
        "ojapde23_warped" => {
            let mut p = base(Estimator::Trl1Planar, SelectorShape::Disc, TauRule::TwentyFour, planar, SAMPLES, 1);
            p.cases = jet_cases(normalized_23(), opts.jets.unwrap_or(5), seed, false, rhs_oja_23)?;
            p
        }
        "amoeba_selfsnakes" => {
            let beta = 1.0;
            let img = SyntheticImage::TanhRamp { a: 5.0, b: 0.1 };
            let x0 = vec![0.1, 0.5];
            let analytic = rhs_selfsnakes(&img.jet(&x0), beta)?;
            let mut p = base(Estimator::Rank, SelectorShape::Amoeba { beta }, TauRule::Six, planar, SAMPLES, 4);
            p.max_samples = Some(8 * SAMPLES);
            p.cases.push(("tanh_ramp".into(), img, x0, analytic));
            p
        }
        "amoeba_oja_trl1" | "amoeba_oja_oja" => {
            let beta = 1.0;
            let est = if name == "amoeba_oja_trl1" { Estimator::Trl1 } else { Estimator::Oja };
            let mut p = base(est, SelectorShape::Amoeba { beta }, TauRule::TwentyFour, planar, SAMPLES, 1);
            let j = jet(2, &[1.0, 0.3, -0.2, 0.7], &[&[0.9, -0.3, -0.3, 0.2], &[-0.4, 0.5, 0.5, -0.6]]);
            p.cases = jet_cases(j, 0, seed, true, |j| rhs_amoeba_oja_22(j, beta))?;
            p.cases[0].0 = "generic".into();
            p
        }
        "chs_conjecture" => {
            let mut p = base(Estimator::Chs, SelectorShape::Disc, TauRule::TwentyFour, planar, 20_000, 4);
            p.report_only = true;
            p.cases = jet_cases(normalized_22(), opts.jets.unwrap_or(2), seed, true, rhs_oja_22)?;
            p
        }
        "halfspace_vs_oja" | "trl1_vs_oja" => {
            let est = if name == "halfspace_vs_oja" { Estimator::Halfspace } else { Estimator::Trl1 };
            let mut p = base(est, SelectorShape::Disc, TauRule::TwentyFour, planar, SAMPLES, 1);
            let mut rng = experiment_rng(seed, 2);
            let jets: Vec<JetPoint> =
                (0..opts.jets.unwrap_or(5)).map(|_| super::study::random_jet(2, 2, JET_COND_BOUND, &mut rng)).collect();
            p.cases = jets
                .into_iter()
                .enumerate()
                .map(|(k, j)| {
                    let a = rhs_oja_22(&j)?;
                    Ok((format!("random{k}"), SyntheticImage::from_jet(&j, origin(2))?, origin(2), a))
                })
                .collect::<Result<_>>()?;
            p
        }
        other => return Err(Error::InvalidInput(format!("unknown experiment `{other}`"))),
    };
    if let Some(r) = &opts.radii {
        p.radii = r.clone();
    }
    if let Some(m) = opts.samples {
        p.samples = m;
    }
    if let Some(t) = opts.trials {
        p.trials = t;
    }
    if let Some(cap) = opts.max_samples {
        p.max_samples = (cap > 0).then_some(cap);
    }
    Ok(p)
}

/// Runs a named experiment.
pub fn run_experiment(name: &str, opts: &ExperimentOptions) -> Result<ExperimentReport> {
    let seed = opts.seed.unwrap_or(SEED);
    let p = plan(name, opts, seed)?;
    let mut cases = Vec::with_capacity(p.cases.len());
    for (k, (label, image, x0, analytic)) in p.cases.into_iter().enumerate() {
        let jet = image.jet(&x0);
        let spec = StudySpec {
            image,
            x0,
            shape: p.shape,
            estimator: p.estimator,
            tau: p.tau,
            analytic,
            radii: p.radii.clone(),
            samples: p.samples,
            trials: p.trials,
            max_samples: p.max_samples,
            seed: super::sampling::stream_seed(seed, k as u64, 0x5EED),
        };
        cases.push(CaseReport { label, jet, report: convergence_study(&spec)? });
    }
    let nr = p.radii.len();
    let max_over = |f: &dyn Fn(&ConsistencyReport) -> &Vec<f64>| -> Vec<f64> {
        (0..nr).map(|r| cases.iter().map(|c| f(&c.report)[r]).fold(0.0, f64::max)).collect()
    };
    let errors = max_over(&|r| &r.errors);
    let relative_errors = max_over(&|r| &r.relative_errors);
    Ok(ExperimentReport {
        experiment: name.to_string(),
        seed,
        fitted_order: fitted_order(&p.radii, &errors),
        radii: p.radii,
        errors,
        relative_errors,
        report_only: p.report_only,
        cases,
    })
}
