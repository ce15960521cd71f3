//! Spatial (L1) median, componentwise median and medoid.

use crate::error::Result;
use crate::geom::{dist, ConvexPolytope, MedianResult, PointN, Status, WeightedPointSet};
use crate::univariate::median_weighted;

/// Settings for the Weiszfeld iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Config {
    /// Relative step size (w.r.t. the data diameter) at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for L1Config {
    fn default() -> Self {
        L1Config { tol: crate::config::L1_TOL, max_iter: crate::config::L1_MAX_ITER }
    }
}

/// Weighted sum of Euclidean distances from `mu`.
pub fn l1_objective(mu: &[f64], set: &WeightedPointSet) -> f64 {
    set.iter().map(|(p, w)| w * dist(p, mu)).sum()
}

/// Direction and spread of a set lying on a line, if it does.
fn collinear_axis(set: &WeightedPointSet) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = set.dim();
    let diam = set.diameter();
    let a = set.point(0).to_vec();
    let far = set.points().max_by(|p, q| dist(p, &a).total_cmp(&dist(q, &a)))?;
    let len = dist(far, &a);
    if len == 0.0 {
        return Some((a, vec![0.0; n]));
    }
    let dir: Vec<f64> = far.iter().zip(&a).map(|(f, o)| (f - o) / len).collect();
    for p in set.points() {
        let t: f64 = p.iter().zip(&a).zip(&dir).map(|((x, o), d)| (x - o) * d).sum();
        let off = p.iter().zip(&a).zip(&dir).map(|((x, o), d)| (x - o - t * d).powi(2)).sum::<f64>().sqrt();
        if off > 1e-12 * diam {
            return None;
        }
    }
    Some((a, dir))
}

/// Weighted spatial median by the Weiszfeld iteration with the Vardi-Zhang
/// modification at data points. A data point is accepted as soon as the
/// optimality condition holds there. Collinear data reduce to the univariate
/// weighted median, which can be an interval.
pub fn median_l1(set: &WeightedPointSet, cfg: &L1Config) -> Result<MedianResult> {
    set.require_nonempty()?;
    let n = set.dim();
    if let Some((origin, dir)) = collinear_axis(set) {
        let ts: Vec<f64> =
            set.points().map(|p| p.iter().zip(&origin).zip(&dir).map(|((x, o), d)| (x - o) * d).sum()).collect();
        let iv = median_weighted(&ts, set.weights(), true)?;
        let at = |t: f64| -> Vec<f64> { origin.iter().zip(&dir).map(|(o, d)| o + t * d).collect() };
        let rep = at(iv.midpoint());
        let obj = l1_objective(&rep, set);
        let median_set = if iv.is_point() {
            ConvexPolytope::point(PointN::new(rep.clone())?)
        } else {
            ConvexPolytope::segment(at(iv.lo), at(iv.hi))
        };
        return Ok(MedianResult::exact(rep, Some(median_set), Some(obj)));
    }
    let diam = set.diameter();
    let collide = 1e-13 * diam;
    let mut y = set.weighted_mean();
    let mut status = Status::MaxIter;
    let mut iterations = 0;
    let mut num = vec![0.0; n];
    let mut grad = vec![0.0; n];
    while iterations < cfg.max_iter {
        iterations += 1;
        num.iter_mut().for_each(|v| *v = 0.0);
        grad.iter_mut().for_each(|v| *v = 0.0);
        let (mut den, mut eta) = (0.0, 0.0);
        let (mut nearest, mut nearest_d) = (0, f64::INFINITY);
        for (i, (p, w)) in set.iter().enumerate() {
            let d = dist(p, &y);
            if d < nearest_d {
                nearest_d = d;
                nearest = i;
            }
            if d <= collide {
                eta += w;
                continue;
            }
            let c = w / d;
            den += c;
            for k in 0..n {
                num[k] += c * p[k];
                grad[k] += c * (p[k] - y[k]);
            }
        }
        let r = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if eta > 0.0 && r <= eta {
            status = Status::Exact;
            break;
        }
        // Close to a data point: test it directly for optimality.
        if nearest_d > collide && nearest_d < 1e-3 * diam {
            let x = set.point(nearest).to_vec();
            if vertex_is_optimal(set, &x, collide) {
                y = x;
                status = Status::Exact;
                break;
            }
        }
        let t: Vec<f64> = num.iter().map(|v| v / den).collect();
        let next: Vec<f64> = if eta == 0.0 {
            t
        } else {
            let lam = (eta / r).min(1.0);
            t.iter().zip(&y).map(|(ti, yi)| (1.0 - lam) * ti + lam * yi).collect()
        };
        let step = dist(&next, &y);
        y = next;
        if step <= cfg.tol * diam {
            status = Status::Converged;
            break;
        }
    }
    let obj = l1_objective(&y, set);
    Ok(MedianResult {
        median_set: Some(ConvexPolytope::point(PointN::new(y.clone())?)),
        representative: PointN::new(y)?,
        objective_value: Some(obj),
        iterations,
        status,
    })
}

/// Optimality of a data location: the pull of the other points does not
/// exceed the weight sitting there.
fn vertex_is_optimal(set: &WeightedPointSet, x: &[f64], collide: f64) -> bool {
    let n = set.dim();
    let mut g = vec![0.0; n];
    let mut eta = 0.0;
    for (p, w) in set.iter() {
        let d = dist(p, x);
        if d <= collide {
            eta += w;
        } else {
            for k in 0..n {
                g[k] += w * (p[k] - x[k]) / d;
            }
        }
    }
    g.iter().map(|v| v * v).sum::<f64>().sqrt() <= eta
}

/// Coordinatewise symmetric weighted median; ties resolve to the interval midpoint.
pub fn median_componentwise(set: &WeightedPointSet) -> Result<MedianResult> {
    set.require_nonempty()?;
    let rep = (0..set.dim())
        .map(|c| median_weighted(&set.component(c), set.weights(), true).map(|iv| iv.midpoint()))
        .collect::<Result<Vec<_>>>()?;
    Ok(MedianResult::exact(rep, None, None))
}

/// Data point minimising the weighted distance sum; ties go to the lowest index.
pub fn median_medoid(set: &WeightedPointSet) -> Result<MedianResult> {
    set.require_nonempty()?;
    let mut best = (0, f64::INFINITY);
    for (i, p) in set.points().enumerate() {
        let s = l1_objective(p, set);
        if s < best.1 {
            best = (i, s);
        }
    }
    let rep = set.point(best.0).to_vec();
    Ok(MedianResult::exact(rep.clone(), Some(ConvexPolytope::point(PointN::new(rep)?)), Some(best.1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obtuse_triangle_gives_obtuse_vertex() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [4.0, 0.0], [2.0, 0.3]]).unwrap();
        let r = median_l1(&set, &L1Config::default()).unwrap();
        assert_eq!(r.representative.coords(), &[2.0, 0.3]);
        assert_eq!(r.status, Status::Exact);
    }

    #[test]
    fn quadrilateral_gives_diagonal_intersection() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [3.0, 0.0], [4.0, 2.0], [0.0, 3.0]]).unwrap();
        let r = median_l1(&set, &L1Config::default()).unwrap();
        // Diagonals (0,0)-(4,2) and (3,0)-(0,3) meet at (2,1).
        assert!(dist(r.representative.coords(), &[2.0, 1.0]) < 1e-8);
    }

    #[test]
    fn collinear_even_count_is_a_segment() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [5.0, 5.0]]).unwrap();
        let r = median_l1(&set, &L1Config::default()).unwrap();
        assert_eq!(r.median_set.unwrap().vertices().len(), 2);
        assert!(dist(r.representative.coords(), &[1.5, 1.5]) < 1e-12);
    }

    #[test]
    fn medoid_tie_breaks_low() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(median_medoid(&set).unwrap().representative.coords(), &[0.0, 0.0]);
    }
}
