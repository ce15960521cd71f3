//! Scaled filter residuals and their convergence to PDE right-hand sides.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::CONSISTENCY_HALFSPACE_LINES;
use crate::error::{Error, Result};
use crate::geom::WeightedPointSet;
use crate::medians::{
    median_chs, median_componentwise, median_halfspace_sampled, median_l1, median_oja, median_oja_23, median_trl1,
    median_trl1_planar, L1Config, OjaMode,
};
use crate::pde::JetPoint;
use crate::univariate::median_rank;

use super::sampling::{sample_selector, stream_seed, SelectorShape};
use super::synth::SyntheticImage;

/// Median applied to the sampled values, in a variant suited to large samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Rank,
    Componentwise,
    L1,
    Trl1,
    /// Transformation-retransformation L1 median of trivariate values
    /// spread around a plane.
    Trl1Planar,
    Oja,
    Oja23,
    /// Half-space median over evenly spaced directions.
    Halfspace,
    Chs,
}

impl Estimator {
    pub const ALL: [Estimator; 9] = [
        Estimator::Rank,
        Estimator::Componentwise,
        Estimator::L1,
        Estimator::Trl1,
        Estimator::Trl1Planar,
        Estimator::Oja,
        Estimator::Oja23,
        Estimator::Halfspace,
        Estimator::Chs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Rank => "rank",
            Estimator::Componentwise => "componentwise",
            Estimator::L1 => "l1",
            Estimator::Trl1 => "trl1",
            Estimator::Trl1Planar => "trl1_planar",
            Estimator::Oja => "oja",
            Estimator::Oja23 => "oja23",
            Estimator::Halfspace => "halfspace",
            Estimator::Chs => "chs",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown estimator `{s}`")))
    }

    /// Representative median of `set`.
    pub fn estimate(self, set: &WeightedPointSet) -> Result<Vec<f64>> {
        let cfg = L1Config { tol: 1e-13, ..L1Config::default() };
        let r = match self {
            Estimator::Rank => {
                set.require_dim(1)?;
                return Ok(vec![median_rank(set.coords())?.midpoint()]);
            }
            Estimator::Componentwise => median_componentwise(set)?,
            Estimator::L1 => median_l1(set, &cfg)?,
            Estimator::Trl1 => median_trl1(set, &cfg)?,
            Estimator::Trl1Planar => median_trl1_planar(set, &cfg)?,
            Estimator::Oja => median_oja(set, OjaMode::Subgradient)?,
            Estimator::Oja23 => median_oja_23(set)?,
            Estimator::Halfspace => median_halfspace_sampled(set, CONSISTENCY_HALFSPACE_LINES)?,
            Estimator::Chs => median_chs(set)?,
        };
        Ok(r.representative.into_vec())
    }
}

/// Time scale matched to the limit under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauRule {
    /// `rho^2 / 6`
    Six,
    /// `rho^2 / 24`
    TwentyFour,
    /// `rho^2 / 20`
    Twenty,
    /// `rho^2 / 60`
    Sixty,
}

impl TauRule {
    pub fn tau(self, rho: f64) -> f64 {
        let d = match self {
            TauRule::Six => 6.0,
            TauRule::TwentyFour => 24.0,
            TauRule::Twenty => 20.0,
            TauRule::Sixty => 60.0,
        };
        rho * rho / d
    }
}

/// Scaled one-step residual `(median(values) - u(x0)) / tau(rho)` from one
/// sample of the selector region.
#[allow(clippy::too_many_arguments)]
pub fn pde_estimate(
    img: &SyntheticImage,
    x0: &[f64],
    shape: SelectorShape,
    estimator: Estimator,
    rho: f64,
    samples: usize,
    tau: TauRule,
    seed: u64,
) -> Result<Vec<f64>> {
    let set = sample_selector(img, x0, shape, rho, samples, seed)?;
    let med = estimator.estimate(&set)?;
    let u0 = img.value(x0);
    let t = tau.tau(rho);
    Ok(med.iter().zip(&u0).map(|(m, u)| (m - u) / t).collect())
}

/// Setup of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub image: SyntheticImage,
    pub x0: Vec<f64>,
    pub shape: SelectorShape,
    pub estimator: Estimator,
    pub tau: TauRule,
    /// Right-hand side of the limit PDE at `x0`.
    pub analytic: Vec<f64>,
    /// Strictly decreasing radii, at least three.
    pub radii: Vec<f64>,
    pub samples: usize,
    /// Independent samples per radius; estimates are averaged.
    pub trials: usize,
    /// Upper bound for doubling the sample count until the sampling noise at
    /// the smallest radius is below a fifth of its error.
    pub max_samples: Option<usize>,
    pub seed: u64,
}

/// One sampled estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub radius: f64,
    pub trial: usize,
    pub seed: u64,
    pub samples: usize,
    pub estimate: Vec<f64>,
}

/// Errors of the averaged estimates against the analytic right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub estimator: Estimator,
    pub shape: SelectorShape,
    pub tau: TauRule,
    pub x0: Vec<f64>,
    pub radii: Vec<f64>,
    pub samples: usize,
    pub trials: usize,
    pub analytic: Vec<f64>,
    pub estimates: Vec<Vec<f64>>,
    pub errors: Vec<f64>,
    pub relative_errors: Vec<f64>,
    /// Standard error of the averaged estimate per radius (zero for one trial).
    pub noise: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln radius`.
    pub fitted_order: Option<f64>,
    /// Runs with smaller sample counts that were too noisy, in order.
    pub escalations: Vec<EscalationStep>,
    pub trial_records: Vec<TrialRecord>,
}

/// Errors of a discarded run before the sample count was doubled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscalationStep {
    pub samples: usize,
    pub errors: Vec<f64>,
    pub relative_errors: Vec<f64>,
    pub noise: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Slope of the least-squares line through `(ln x, ln y)` for positive `y`.
pub fn fitted_order(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, &e)| e > 0.0).map(|(r, e)| (r.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn run(spec: &StudySpec, samples: usize) -> Result<ConsistencyReport> {
    let jobs: Vec<(usize, usize)> = (0..spec.radii.len()).flat_map(|r| (0..spec.trials).map(move |t| (r, t))).collect();
    let results: Vec<Result<TrialRecord>> = jobs
        .par_iter()
        .map(|&(r, t)| {
            let seed = stream_seed(spec.seed, t as u64, r as u64);
            let rho = spec.radii[r];
            let estimate =
                pde_estimate(&spec.image, &spec.x0, spec.shape, spec.estimator, rho, samples, spec.tau, seed)?;
            Ok(TrialRecord { radius: rho, trial: t, seed, samples, estimate })
        })
        .collect();
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    let n = spec.analytic.len();
    let scale = norm(&spec.analytic);
    let mut estimates = Vec::new();
    let mut errors = Vec::new();
    let mut relative = Vec::new();
    let mut noise = Vec::new();
    for chunk in records.chunks(spec.trials) {
        let mut mean = vec![0.0; n];
        for rec in chunk {
            for c in 0..n {
                mean[c] += rec.estimate[c] / spec.trials as f64;
            }
        }
        let se = if spec.trials > 1 {
            let ss: f64 = chunk
                .iter()
                .map(|rec| rec.estimate.iter().zip(&mean).map(|(e, m)| (e - m) * (e - m)).sum::<f64>())
                .sum();
            (ss / ((spec.trials - 1) * spec.trials) as f64).sqrt()
        } else {
            0.0
        };
        let diff: Vec<f64> = mean.iter().zip(&spec.analytic).map(|(m, a)| m - a).collect();
        let err = norm(&diff);
        errors.push(err);
        relative.push(if scale > 0.0 { err / scale } else { err });
        noise.push(se);
        estimates.push(mean);
    }
    Ok(ConsistencyReport {
        estimator: spec.estimator,
        shape: spec.shape,
        tau: spec.tau,
        x0: spec.x0.clone(),
        radii: spec.radii.clone(),
        samples,
        trials: spec.trials,
        analytic: spec.analytic.clone(),
        fitted_order: fitted_order(&spec.radii, &errors),
        estimates,
        errors,
        relative_errors: relative,
        noise,
        escalations: Vec::new(),
        trial_records: records,
    })
}

/// Estimates the limit at every radius and compares with the analytic
/// right-hand side.
pub fn convergence_study(spec: &StudySpec) -> Result<ConsistencyReport> {
    if spec.radii.len() < 3 {
        return Err(Error::InvalidInput("a convergence study needs at least three radii".into()));
    }
    if spec.radii.windows(2).any(|w| !(w[1] < w[0])) || spec.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidInput("radii must be positive and strictly decreasing".into()));
    }
    if spec.trials == 0 {
        return Err(Error::InvalidInput("at least one trial is needed".into()));
    }
    if spec.analytic.len() != spec.image.n() {
        return Err(Error::DimensionMismatch { expected: spec.image.n(), found: spec.analytic.len() });
    }
    let mut samples = spec.samples;
    let mut history = Vec::new();
    loop {
        let mut report = run(spec, samples)?;
        let last = report.errors.len() - 1;
        let noisy = report.noise[last] > 0.2 * report.errors[last];
        match spec.max_samples {
            Some(cap) if noisy && 2 * samples <= cap => {
                history.push(EscalationStep {
                    samples,
                    errors: report.errors,
                    relative_errors: report.relative_errors,
                    noise: report.noise,
                });
                samples *= 2;
            }
            _ => {
                report.escalations = history;
                return Ok(report);
            }
        }
    }
}

/// Random matrix with entries uniform in `[-1, 1]` and condition number at
/// most `cond_bound`, redrawn until it qualifies.
pub fn random_matrix(rows: usize, cols: usize, cond_bound: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..=1.0));
        let sv = m.singular_values();
        let (hi, lo) = (sv.max(), sv.min());
        if lo > 0.0 && hi / lo <= cond_bound {
            return m;
        }
    }
}

/// Random jet: Jacobian from [`random_matrix`], symmetric Hessians with
/// entries uniform in `[-1, 1]`, zero value.
pub fn random_jet(m: usize, n: usize, cond_bound: f64, rng: &mut impl Rng) -> JetPoint {
    let jacobian = random_matrix(n, m, cond_bound, rng);
    let hessian = (0..n)
        .map(|_| {
            let h = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..=1.0));
            (&h + h.transpose()) * 0.5
        })
        .collect();
    JetPoint { value: vec![0.0; n], jacobian, hessian }
}

/// Jet of `A u` for a linear map `A` of the value space.
pub fn warp_jet(jet: &JetPoint, a: &DMatrix<f64>) -> JetPoint {
    let n = jet.n();
    let value = (a * nalgebra::DVector::from_column_slice(&jet.value)).as_slice().to_vec();
    let jacobian = a * &jet.jacobian;
    let hessian = (0..a.nrows())
        .map(|c| (0..n).fold(DMatrix::zeros(jet.m(), jet.m()), |acc, d| acc + &jet.hessian[d] * a[(c, d)]))
        .collect();
    JetPoint { value, jacobian, hessian }
}

/// Seeded generator for auxiliary draws of an experiment.
pub fn experiment_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, stream, u64::MAX))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_power_law() {
        let r = [0.4, 0.2, 0.1];
        let e: Vec<f64> = r.iter().map(|x: &f64| 3.0 * x * x).collect();
        assert!((fitted_order(&r, &e).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_matrices_respect_condition_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = random_matrix(3, 2, 20.0, &mut rng);
            let sv = m.singular_values();
            assert!(sv.max() / sv.min() <= 20.0);
        }
    }
}
