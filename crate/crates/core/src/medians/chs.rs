//! Convex hull stripping median.

use std::collections::HashSet;

use crate::error::Result;
use crate::geom::{ConvexPolytope, MedianResult, WeightedPointSet};
use crate::hull::hull_indices;

/// Successive convex hull layers of a planar set, outermost first. Every
/// copy of a point sitting at a hull vertex leaves with that layer.
pub fn hull_layers(set: &WeightedPointSet) -> Result<Vec<ConvexPolytope>> {
    set.require_nonempty()?;
    set.require_dim(2)?;
    let mut rest = set.to_2d();
    let mut layers = Vec::new();
    while !rest.is_empty() {
        let idx = hull_indices(&rest);
        let verts: Vec<[f64; 2]> = idx.iter().map(|&i| rest[i]).collect();
        let key = |p: &[f64; 2]| (p[0].to_bits(), p[1].to_bits());
        let gone: HashSet<(u64, u64)> = verts.iter().map(key).collect();
        layers.push(ConvexPolytope::hull_2d(&rest));
        rest.retain(|p| !gone.contains(&key(p)));
    }
    Ok(layers)
}

/// Hull of the last non-empty layer; representative is its centroid. Weights are ignored.
pub fn median_chs(set: &WeightedPointSet) -> Result<MedianResult> {
    let layers = hull_layers(set)?;
    let last = layers.last().cloned().expect("non-empty set has a layer");
    let rep = last.centroid();
    let mut r = MedianResult::exact(rep, Some(last), None);
    r.iterations = layers.len();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_squares() {
        let set = WeightedPointSet::from_rows(&[
            [0.0, 0.0],
            [4.0, 0.0],
            [4.0, 4.0],
            [0.0, 4.0],
            [1.0, 1.0],
            [3.0, 1.0],
            [3.0, 3.0],
            [1.0, 3.0],
            [2.0, 2.0],
        ])
        .unwrap();
        let r = median_chs(&set).unwrap();
        assert_eq!(r.representative.coords(), &[2.0, 2.0]);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn collinear_matches_univariate_stripping() {
        let set = WeightedPointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]).unwrap();
        let r = median_chs(&set).unwrap();
        assert_eq!(r.median_set.unwrap().vertices().len(), 2);
        assert_eq!(r.representative.coords(), &[1.5, 0.0]);
    }
}
