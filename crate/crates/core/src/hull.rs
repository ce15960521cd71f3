//! Planar convex hulls.

use crate::error::Result;
use crate::geom::{dist, ConvexPolytope, WeightedPointSet, ORIENT_EPS};

/// Indices of the strict hull vertices of `points`, counterclockwise, starting
/// at the lexicographically smallest point. Collinear boundary points and
/// repeated copies are left out; the first copy of a repeated vertex is used.
pub fn hull_indices(points: &[[f64; 2]]) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a][0].total_cmp(&points[b][0]).then(points[a][1].total_cmp(&points[b][1])).then(a.cmp(&b))
    });
    order.dedup_by(|b, a| points[*a] == points[*b]);
    if order.len() < 3 {
        return order;
    }
    let first = points[order[0]];
    let scale = order.iter().map(|&i| dist(&points[i], &first)).fold(0.0, f64::max);
    let eps = ORIENT_EPS * scale * scale;
    let turn = |a: usize, b: usize, c: usize| crate::geom::cross(&points[a], &points[b], &points[c]);

    let mut lower: Vec<usize> = Vec::with_capacity(order.len());
    for &i in &order {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], i) <= eps {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::with_capacity(order.len());
    for &i in order.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], i) <= eps {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && points[lower[0]] == points[lower[1]] {
        lower.truncate(1);
    }
    lower
}

/// Convex hull of a planar point set as a canonical polytope.
pub fn convex_hull_2d(set: &WeightedPointSet) -> Result<ConvexPolytope> {
    set.require_nonempty()?;
    set.require_dim(2)?;
    Ok(ConvexPolytope::hull_2d(&set.to_2d()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_interior_and_edge_points() {
        let pts = [[1.0, 1.0], [0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [0.0, 0.0]];
        assert_eq!(hull_indices(&pts), vec![1, 3, 0, 4]);
    }

    #[test]
    fn collinear_gives_endpoints() {
        let pts = [[2.0, 2.0], [0.0, 0.0], [1.0, 1.0]];
        assert_eq!(hull_indices(&pts), vec![1, 0]);
    }

    #[test]
    fn repeated_point() {
        let pts = [[1.0, 2.0], [1.0, 2.0]];
        assert_eq!(hull_indices(&pts), vec![0]);
    }
}
