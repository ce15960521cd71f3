//! Empirical equivariance of medians under random transformations.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{COND_BOUND, SEED, TRIALS};
use crate::error::{Error, Result};
use crate::geom::{ConvexPolytope, MedianResult, WeightedPointSet};
use crate::maps::ProjectiveMap;
use crate::medians::{median_chs, median_halfspace, median_l1, median_oja, median_trl1, L1Config, OjaMode};

use super::sampling::stream_seed;
use super::study::random_matrix;

/// Median under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivarianceMedian {
    L1,
    Trl1,
    Oja,
    Halfspace,
    Chs,
}

impl EquivarianceMedian {
    pub const ALL: [EquivarianceMedian; 5] = [
        EquivarianceMedian::L1,
        EquivarianceMedian::Trl1,
        EquivarianceMedian::Oja,
        EquivarianceMedian::Halfspace,
        EquivarianceMedian::Chs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EquivarianceMedian::L1 => "l1",
            EquivarianceMedian::Trl1 => "trl1",
            EquivarianceMedian::Oja => "oja",
            EquivarianceMedian::Halfspace => "halfspace",
            EquivarianceMedian::Chs => "chs",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown median `{s}`")))
    }

    /// Whether the comparison uses the whole median set.
    pub fn set_valued(self) -> bool {
        matches!(self, EquivarianceMedian::Oja | EquivarianceMedian::Halfspace | EquivarianceMedian::Chs)
    }

    fn compute(self, set: &WeightedPointSet) -> Result<MedianResult> {
        let cfg = L1Config { tol: 1e-13, ..L1Config::default() };
        match self {
            EquivarianceMedian::L1 => median_l1(set, &cfg),
            EquivarianceMedian::Trl1 => median_trl1(set, &cfg),
            EquivarianceMedian::Oja => median_oja(set, OjaMode::Exact),
            EquivarianceMedian::Halfspace => median_halfspace(set),
            EquivarianceMedian::Chs => median_chs(set),
        }
    }
}

/// Class of random transformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformFamily {
    Similarity,
    Affine,
    Projective,
}

impl TransformFamily {
    pub fn name(self) -> &'static str {
        match self {
            TransformFamily::Similarity => "similarity",
            TransformFamily::Affine => "affine",
            TransformFamily::Projective => "projective",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        [TransformFamily::Similarity, TransformFamily::Affine, TransformFamily::Projective]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown transformation family `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceOptions {
    pub trials: usize,
    pub cond_bound: f64,
    pub seed: u64,
    /// Smallest denominator of projective maps over the data.
    pub min_denominator: f64,
}

impl Default for EquivarianceOptions {
    fn default() -> Self {
        EquivarianceOptions { trials: TRIALS, cond_bound: COND_BOUND, seed: SEED, min_denominator: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceTrial {
    pub trial: usize,
    pub seed: u64,
    pub points: usize,
    /// `|med(T X) - T med(X)| / diam(T X)`, on median sets where applicable.
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub median: EquivarianceMedian,
    pub family: TransformFamily,
    pub seed: u64,
    pub trials: usize,
    pub cond_bound: f64,
    pub set_valued: bool,
    pub max_discrepancy: f64,
    /// Fraction of trials with discrepancy above `1e-3`.
    pub fraction_above_1e3: f64,
    pub discrepancies: Vec<f64>,
    pub trial_records: Vec<EquivarianceTrial>,
}

impl EquivarianceReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn trials_csv(&self) -> String {
        let mut s = String::from("trial,seed,points,discrepancy\n");
        for t in &self.trial_records {
            s.push_str(&format!("{},{},{},{:?}\n", t.trial, t.seed, t.points, t.discrepancy));
        }
        s
    }
}

/// Random map of the family. Projective maps keep the denominator at least
/// `min_den` on `pts` and vary it by a factor of two or more across the data.
pub fn random_transform(
    family: TransformFamily,
    pts: &[[f64; 2]],
    cond_bound: f64,
    min_den: f64,
    rng: &mut impl Rng,
) -> ProjectiveMap {
    let shift = DVector::from_fn(2, |_, _| rng.random_range(-2.0..=2.0));
    let matrix = match family {
        TransformFamily::Similarity => {
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let s: f64 = rng.random_range(0.5..=2.0);
            let f = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
            DMatrix::from_row_slice(2, 2, &[s * t.cos(), -s * t.sin(), f * s * t.sin(), f * s * t.cos()])
        }
        _ => random_matrix(2, 2, cond_bound, rng),
    };
    let row = match family {
        TransformFamily::Projective => {
            let diam = diameter(pts);
            loop {
                let r = DVector::from_fn(2, |_, _| rng.random_range(-1.0..=1.0));
                let dens = pts.iter().map(|p| 1.0 + r[0] * p[0] + r[1] * p[1]);
                let (lo, hi) = dens.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| (a.min(d), b.max(d)));
                if lo >= min_den && hi >= 2.0 * lo && r.norm() * diam >= 0.3 {
                    break r;
                }
            }
        }
        _ => DVector::zeros(2),
    };
    ProjectiveMap::new(matrix, shift, row, 1.0).expect("consistent dimensions")
}

fn diameter(pts: &[[f64; 2]]) -> f64 {
    let mut d: f64 = 0.0;
    for a in pts {
        for b in pts {
            d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    d
}

fn trial(
    median: EquivarianceMedian,
    family: TransformFamily,
    opts: &EquivarianceOptions,
    t: usize,
) -> Result<EquivarianceTrial> {
    let seed = stream_seed(opts.seed, t as u64, 0xE0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(10..=40);
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]).collect();
    let set = WeightedPointSet::from_rows(&pts)?;
    let map = random_transform(family, &pts, opts.cond_bound, opts.min_denominator, &mut rng);
    let mapped = map.apply_set(&set)?;
    let before = median.compute(&set)?;
    let after = median.compute(&mapped)?;
    let diam = diameter(&mapped.to_2d());
    let gap = if median.set_valued() {
        let poly =
            |r: &MedianResult| r.median_set.clone().unwrap_or_else(|| ConvexPolytope::point(r.representative.clone()));
        map.apply_polytope(&poly(&before))?.vertex_distance(&poly(&after))
    } else {
        let image = map.apply(before.representative.coords())?;
        image.iter().zip(after.representative.coords()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    };
    Ok(EquivarianceTrial { trial: t, seed, points: n, discrepancy: gap / diam })
}

use rand::SeedableRng;

/// Runs `opts.trials` independent trials of random data and random maps.
pub fn equivariance_suite(
    median: EquivarianceMedian,
    family: TransformFamily,
    opts: &EquivarianceOptions,
) -> Result<EquivarianceReport> {
    if opts.trials == 0 {
        return Err(Error::InvalidInput("at least one trial is needed".into()));
    }
    let records = (0..opts.trials)
        .into_par_iter()
        .map(|t| trial(median, family, opts, t))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let discrepancies: Vec<f64> = records.iter().map(|r| r.discrepancy).collect();
    let above = discrepancies.iter().filter(|&&d| d > 1e-3).count();
    Ok(EquivarianceReport {
        median,
        family,
        seed: opts.seed,
        trials: opts.trials,
        cond_bound: opts.cond_bound,
        set_valued: median.set_valued(),
        max_discrepancy: discrepancies.iter().copied().fold(0.0, f64::max),
        fraction_above_1e3: above as f64 / opts.trials as f64,
        discrepancies,
        trial_records: records,
    })
}
