//! Median filtering of planar images with fixed or adaptive (amoeba) windows.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::WeightedPointSet;
use crate::image::ImageGrid;
use crate::medians::{
    median_chs, median_componentwise, median_halfspace, median_l1, median_medoid, median_oja, median_oja_23,
    median_trl1, median_trl1_planar, L1Config, OjaMode,
};
use crate::univariate::median_rank;

/// Pixel offsets `(di, dj)` relative to the window centre.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuringElement {
    pub offsets: Vec<[isize; 2]>,
}

impl StructuringElement {
    /// All offsets with `di^2 + dj^2 <= r^2`.
    pub fn disc(radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput("disc radius must be finite and non-negative".into()));
        }
        let r = radius.floor() as isize;
        let r2 = radius * radius * (1.0 + 1e-12);
        let mut offsets = Vec::new();
        for di in -r..=r {
            for dj in -r..=r {
                if (di * di + dj * dj) as f64 <= r2 {
                    offsets.push([di, dj]);
                }
            }
        }
        Ok(StructuringElement { offsets })
    }

    /// The `(2l+1) x (2l+1)` square.
    pub fn square(half_width: usize) -> Self {
        let l = half_width as isize;
        let offsets = (-l..=l).flat_map(|di| (-l..=l).map(move |dj| [di, dj])).collect();
        StructuringElement { offsets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// Treatment of window pixels falling outside the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Reflection about the edge pixel (the edge is not repeated).
    #[default]
    Mirror,
    Clamp,
    /// Outside pixels are left out of the window.
    Skip,
}

/// Edge weights of the amoeba pixel graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmoebaMetric {
    /// `sqrt(step^2 + beta^2 |du|^2)`.
    #[default]
    L2,
    /// `step + beta |du|`.
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Neighbourhood {
    Four,
    #[default]
    Eight,
}

/// Amoeba window: all pixels within amoeba distance `rho` of the centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmoebaConfig {
    pub beta: f64,
    pub rho: f64,
    pub metric: AmoebaMetric,
    pub neighbourhood: Neighbourhood,
}

impl Default for AmoebaConfig {
    fn default() -> Self {
        AmoebaConfig {
            beta: crate::config::AMOEBA_BETA,
            rho: crate::config::AMOEBA_RHO,
            metric: AmoebaMetric::L2,
            neighbourhood: Neighbourhood::Eight,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Ord64(f64);
impl Eq for Ord64 {}
impl PartialOrd for Ord64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ord64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Amoeba structuring element at pixel `(i, j)`: Dijkstra on the pixel graph
/// with edge lengths combining spatial step and value difference of `pilot`.
pub fn amoeba_mask(pilot: &ImageGrid, i: usize, j: usize, cfg: &AmoebaConfig) -> Result<StructuringElement> {
    if pilot.ndim() != 2 {
        return Err(Error::DimUnsupported(pilot.ndim()));
    }
    if !(cfg.beta >= 0.0 && cfg.rho >= 0.0) {
        return Err(Error::InvalidInput("amoeba beta and radius must be non-negative".into()));
    }
    let (rows, cols) = (pilot.rows(), pilot.cols());
    if i >= rows || j >= cols {
        return Err(Error::InvalidInput("pixel outside image".into()));
    }
    let steps: &[(isize, isize)] = match cfg.neighbourhood {
        Neighbourhood::Four => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
        Neighbourhood::Eight => &[(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)],
    };
    let r = cfg.rho.floor() as isize;
    let side = (2 * r + 1) as usize;
    let local = |di: isize, dj: isize| ((di + r) as usize) * side + (dj + r) as usize;
    let mut best = vec![f64::INFINITY; side * side];
    let mut heap = BinaryHeap::new();
    best[local(0, 0)] = 0.0;
    heap.push(Reverse((Ord64(0.0), 0isize, 0isize)));
    let mut offsets = Vec::new();
    while let Some(Reverse((Ord64(d), di, dj))) = heap.pop() {
        if d > best[local(di, dj)] {
            continue;
        }
        offsets.push([di, dj]);
        let here = pilot.pixel((i as isize + di) as usize, (j as isize + dj) as usize);
        for &(si, sj) in steps {
            let (ni, nj) = (di + si, dj + sj);
            let (gi, gj) = (i as isize + ni, j as isize + nj);
            if ni.abs() > r || nj.abs() > r || gi < 0 || gj < 0 || gi >= rows as isize || gj >= cols as isize {
                continue;
            }
            let there = pilot.pixel(gi as usize, gj as usize);
            let du = here.iter().zip(there).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let step = ((si * si + sj * sj) as f64).sqrt();
            let len = match cfg.metric {
                AmoebaMetric::L2 => step.hypot(cfg.beta * du),
                AmoebaMetric::L1 => step + cfg.beta * du,
            };
            let nd = d + len;
            if nd <= cfg.rho * (1.0 + 1e-12) && nd < best[local(ni, nj)] {
                best[local(ni, nj)] = nd;
                heap.push(Reverse((Ord64(nd), ni, nj)));
            }
        }
    }
    offsets.sort_unstable();
    Ok(StructuringElement { offsets })
}

/// Median used inside each window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregator {
    Rank,
    Componentwise,
    L1,
    Trl1,
    Oja,
    Oja23,
    Halfspace,
    Chs,
    Medoid,
}

impl Aggregator {
    pub const ALL: [Aggregator; 9] = [
        Aggregator::Rank,
        Aggregator::Componentwise,
        Aggregator::L1,
        Aggregator::Trl1,
        Aggregator::Oja,
        Aggregator::Oja23,
        Aggregator::Halfspace,
        Aggregator::Chs,
        Aggregator::Medoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Rank => "rank",
            Aggregator::Componentwise => "componentwise",
            Aggregator::L1 => "l1",
            Aggregator::Trl1 => "trl1",
            Aggregator::Oja => "oja",
            Aggregator::Oja23 => "oja23",
            Aggregator::Halfspace => "halfspace",
            Aggregator::Chs => "chs",
            Aggregator::Medoid => "medoid",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown aggregator `{s}`")))
    }

    /// Checks that the aggregator accepts `channels`-valued data.
    pub fn check_channels(self, channels: usize) -> Result<()> {
        let ok = match self {
            Aggregator::Rank => channels == 1,
            Aggregator::Oja | Aggregator::Halfspace | Aggregator::Chs => channels == 2,
            Aggregator::Oja23 => channels == 3,
            Aggregator::Trl1 => (1..=3).contains(&channels),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleAggregator(format!("{} cannot aggregate {channels}-channel values", self.name())))
        }
    }

    /// Representative median of the window values.
    pub fn aggregate(self, values: &WeightedPointSet) -> Result<Vec<f64>> {
        values.require_nonempty()?;
        self.check_channels(values.dim())?;
        let first = values.point(0);
        if values.points().all(|p| p == first) {
            return Ok(first.to_vec());
        }
        let cfg = L1Config::default();
        let r = match self {
            Aggregator::Rank => return Ok(vec![median_rank(values.coords())?.midpoint()]),
            Aggregator::Componentwise => median_componentwise(values)?,
            Aggregator::L1 => median_l1(values, &cfg)?,
            Aggregator::Trl1 if values.dim() == 3 => median_trl1_planar(values, &cfg)?,
            Aggregator::Trl1 => median_trl1(values, &cfg)?,
            Aggregator::Oja => median_oja(values, OjaMode::Auto)?,
            Aggregator::Oja23 => median_oja_23(values)?,
            Aggregator::Halfspace => median_halfspace(values)?,
            Aggregator::Chs => median_chs(values)?,
            Aggregator::Medoid => median_medoid(values)?,
        };
        Ok(r.representative.into_vec())
    }
}

/// How windows are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    Element(StructuringElement),
    /// Amoeba windows, computed from `pilot` if given, else from the current iterate.
    Amoeba {
        config: AmoebaConfig,
        pilot: Option<ImageGrid>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterParams {
    pub selection: Selection,
    pub aggregator: Aggregator,
    pub boundary: Boundary,
    pub iterations: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            selection: Selection::Element(StructuringElement::disc(crate::config::DISC_RADIUS).expect("valid radius")),
            aggregator: Aggregator::Rank,
            boundary: Boundary::Mirror,
            iterations: crate::config::FILTER_ITERATIONS,
        }
    }
}

/// Filtered image and the number of pixels where the aggregator failed
/// (those keep their input value).
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub image: ImageGrid,
    pub failures: usize,
}

fn reflect(k: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = k.rem_euclid(period);
    (if m >= n as isize { period - m } else { m }) as usize
}

fn window_values(
    img: &ImageGrid,
    i: usize,
    j: usize,
    offsets: &[[isize; 2]],
    boundary: Boundary,
) -> Result<WeightedPointSet> {
    let (rows, cols) = (img.rows(), img.cols());
    let c = img.channels();
    let mut coords = Vec::with_capacity(offsets.len() * c);
    for &[di, dj] in offsets {
        let (gi, gj) = (i as isize + di, j as isize + dj);
        let inside = gi >= 0 && gj >= 0 && gi < rows as isize && gj < cols as isize;
        let (pi, pj) = if inside {
            (gi as usize, gj as usize)
        } else {
            match boundary {
                Boundary::Mirror => (reflect(gi, rows), reflect(gj, cols)),
                Boundary::Clamp => (gi.clamp(0, rows as isize - 1) as usize, gj.clamp(0, cols as isize - 1) as usize),
                Boundary::Skip => continue,
            }
        };
        coords.extend_from_slice(img.pixel(pi, pj));
    }
    WeightedPointSet::unweighted(c, coords)
}

/// Iterated median filter. Pixels are processed in parallel; the result does
/// not depend on the number of threads.
pub fn median_filter(image: &ImageGrid, params: &FilterParams) -> Result<FilterOutput> {
    if image.ndim() != 2 {
        return Err(Error::DimUnsupported(image.ndim()));
    }
    params.aggregator.check_channels(image.channels())?;
    if let Selection::Amoeba { pilot: Some(p), .. } = &params.selection {
        if p.extent() != image.extent() {
            return Err(Error::DimensionMismatch { expected: image.num_nodes(), found: p.num_nodes() });
        }
    }
    let (rows, cols) = (image.rows(), image.cols());
    let c = image.channels();
    let mut cur = image.clone();
    let mut failures = 0;
    for _ in 0..params.iterations {
        let results: Vec<(Vec<f64>, bool)> = (0..rows * cols)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / cols, k % cols);
                let computed = (|| -> Result<Vec<f64>> {
                    let values = match &params.selection {
                        Selection::Element(se) => window_values(&cur, i, j, &se.offsets, params.boundary)?,
                        Selection::Amoeba { config, pilot } => {
                            let mask = amoeba_mask(pilot.as_ref().unwrap_or(&cur), i, j, config)?;
                            window_values(&cur, i, j, &mask.offsets, Boundary::Skip)?
                        }
                    };
                    params.aggregator.aggregate(&values)
                })();
                match computed {
                    Ok(v) => (v, false),
                    Err(_) => (cur.pixel(i, j).to_vec(), true),
                }
            })
            .collect();
        let mut data = Vec::with_capacity(rows * cols * c);
        for (v, failed) in results {
            failures += failed as usize;
            data.extend(v);
        }
        cur = ImageGrid::new(vec![rows, cols], c, data)?.with_spacing(image.spacing());
    }
    Ok(FilterOutput { image: cur, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_sizes() {
        assert_eq!(StructuringElement::disc(1.0).unwrap().len(), 5);
        assert_eq!(StructuringElement::disc(1.5).unwrap().len(), 9);
        assert_eq!(StructuringElement::disc(2.0).unwrap().len(), 13);
    }

    #[test]
    fn reflection() {
        assert_eq!(reflect(-1, 5), 1);
        assert_eq!(reflect(5, 5), 3);
        assert_eq!(reflect(-9, 5), 1);
        assert_eq!(reflect(3, 1), 0);
    }

    #[test]
    fn amoeba_of_flat_image_is_a_disc() {
        let img = ImageGrid::zeros(vec![11, 11], 1).unwrap();
        let cfg = AmoebaConfig { beta: 1.0, rho: 2.0, metric: AmoebaMetric::L2, neighbourhood: Neighbourhood::Four };
        let m = amoeba_mask(&img, 5, 5, &cfg).unwrap();
        assert_eq!(m.len(), 13);
    }
}
