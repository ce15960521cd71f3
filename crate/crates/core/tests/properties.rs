mod common;

use common::{brute_depth, line_intersections};
use mvmedian::consistency::{random_jet, random_matrix, warp_jet};
use mvmedian::filtering::{median_filter, Aggregator, Boundary, FilterParams, Selection, StructuringElement};
use mvmedian::io::{format_csv, parse_csv};
use mvmedian::medians::{
    covariance, halfspace_depth, median_halfspace, median_l1, median_oja, median_trl1, oja_objective, L1Config, OjaMode,
};
use mvmedian::pde::{geometric_frame, q1, q2, rhs_mcm, rhs_oja_22, JetPoint};
use mvmedian::univariate::{halfline_depth, l1_objective, median_extrema_stripping, median_rank, median_weighted};
use mvmedian::{convex_hull_2d, ImageGrid, WeightedPointSet};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_ints(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0i32..12).prop_map(f64::from), 1..max_len)
}

fn planar_points(lo: usize, hi: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((-20i32..=20, -20i32..=20).prop_map(|(x, y)| [f64::from(x), f64::from(y)]), lo..hi)
}

fn general_points(lo: usize, hi: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y)| [x, y]), lo..hi)
}

/// Hull of the maximisers of `f` over the data values.
fn argmax_hull(values: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
    let best = values.iter().map(|&v| f(v)).fold(f64::NEG_INFINITY, f64::max);
    let at: Vec<f64> = values.iter().copied().filter(|&v| f(v) == best).collect();
    (at.iter().copied().fold(f64::INFINITY, f64::min), at.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn univariate_characterisations_agree(values in small_ints(40)) {
        let w = vec![1.0; values.len()];
        let rank = median_rank(&values).unwrap();
        let weighted = median_weighted(&values, &w, true).unwrap();
        let stripped = median_extrema_stripping(&values, &w).unwrap();
        let depth = argmax_hull(&values, |m| halfline_depth(m, &values, &w));
        let energy = argmax_hull(&values, |m| -l1_objective(m, &values, &w));
        prop_assert_eq!((rank.lo, rank.hi), (weighted.lo, weighted.hi));
        prop_assert_eq!((rank.lo, rank.hi), (stripped.lo, stripped.hi));
        prop_assert_eq!((rank.lo, rank.hi), depth);
        prop_assert_eq!((rank.lo, rank.hi), energy);
    }

    #[test]
    fn csv_round_trip(pts in general_points(1, 30), ws in prop::collection::vec(0.01f64..10.0, 30)) {
        let set = WeightedPointSet::from_weighted_rows(&pts, &ws[..pts.len()]).unwrap();
        let back = parse_csv(&format_csv(&set)).unwrap();
        prop_assert_eq!(back, set);
    }

    #[test]
    fn hull_contains_every_point(pts in general_points(1, 40)) {
        let set = WeightedPointSet::from_rows(&pts).unwrap();
        let hull = convex_hull_2d(&set).unwrap();
        for p in &pts {
            prop_assert!(hull.contains_2d(*p, 1e-9));
        }
        for v in hull.vertices() {
            prop_assert!(pts.iter().any(|p| p[0] == v.coords()[0] && p[1] == v.coords()[1]));
        }
    }

    #[test]
    fn depth_matches_direction_enumeration(pts in planar_points(1, 25), y in (-20i32..=20, -20i32..=20)) {
        let set = WeightedPointSet::from_rows(&pts).unwrap();
        let y = [f64::from(y.0), f64::from(y.1)];
        prop_assert_eq!(halfspace_depth(&y, &set).unwrap() as usize, brute_depth(y, &pts));
    }

    #[test]
    fn covariance_is_symmetric_psd(pts in general_points(3, 30)) {
        let set = WeightedPointSet::from_rows(&pts).unwrap();
        let c = covariance(&set).unwrap();
        prop_assert!((c.matrix[(0, 1)] - c.matrix[(1, 0)]).abs() < 1e-14);
        prop_assert!(c.eigenvalues.iter().all(|&l| l >= -1e-12));
        let pairwise: f64 = pts
            .iter()
            .flat_map(|a| pts.iter().map(move |b| (a[0] - b[0]) * (a[1] - b[1])))
            .sum();
        prop_assert!((c.matrix[(0, 1)] - pairwise).abs() < 1e-10 * (1.0 + pairwise.abs()));
    }

    #[test]
    fn q_coefficients_reciprocity(l in 0.05f64..20.0) {
        prop_assert!((q2(l) - (1.0 - q1(1.0 / l))).abs() < 1e-8);
        prop_assert!(q1(l) >= 0.0 && q2(l) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn halfspace_median_is_deepest(pts in general_points(3, 9)) {
        let set = WeightedPointSet::from_rows(&pts).unwrap();
        let med = median_halfspace(&set).unwrap();
        let d = halfspace_depth(med.representative.coords(), &set).unwrap();
        for c in line_intersections(&pts) {
            prop_assert!(halfspace_depth(&c, &set).unwrap() <= d);
        }
    }

    #[test]
    fn oja_median_beats_all_candidates(pts in general_points(3, 8)) {
        let set = WeightedPointSet::from_rows(&pts).unwrap();
        let med = median_oja(&set, OjaMode::Exact).unwrap();
        let best = oja_objective(med.representative.coords(), &set).unwrap();
        for c in line_intersections(&pts) {
            prop_assert!(best <= oja_objective(&c, &set).unwrap() * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn l1_median_similarity_equivariance(pts in general_points(3, 20), t in 0.0f64..6.3, s in 0.5f64..2.0, sh in (-2.0f64..2.0, -2.0f64..2.0)) {
        let cfg = L1Config { tol: 1e-13, ..L1Config::default() };
        let f = |p: &[f64]| vec![s * (t.cos() * p[0] - t.sin() * p[1]) + sh.0, s * (t.sin() * p[0] + t.cos() * p[1]) + sh.1];
        let set = WeightedPointSet::from_rows(&pts).unwrap();
        let mapped = set.map_points(|p| Ok(f(p))).unwrap();
        let a = f(median_l1(&set, &cfg).unwrap().representative.coords());
        let b = median_l1(&mapped, &cfg).unwrap().representative.into_vec();
        prop_assert!(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() <= 1e-6 * mapped.diameter());
    }

    #[test]
    fn trl1_affine_equivariance(pts in general_points(4, 20), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(2, 2, 100.0, &mut rng);
        let cfg = L1Config { tol: 1e-13, ..L1Config::default() };
        let f = |p: &[f64]| vec![a[(0, 0)] * p[0] + a[(0, 1)] * p[1] + 0.5, a[(1, 0)] * p[0] + a[(1, 1)] * p[1] - 1.0];
        let set = WeightedPointSet::from_rows(&pts).unwrap();
        let mapped = set.map_points(|p| Ok(f(p))).unwrap();
        let x = f(median_trl1(&set, &cfg).unwrap().representative.coords());
        let y = median_trl1(&mapped, &cfg).unwrap().representative.into_vec();
        prop_assert!(((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt() <= 1e-6 * mapped.diameter());
    }

    #[test]
    fn median_filter_constant_and_range(rows in 3usize..8, cols in 3usize..8, seed in any::<u64>(), c in -5.0f64..5.0) {
        let params = FilterParams {
            selection: Selection::Element(StructuringElement::disc(1.5).unwrap()),
            aggregator: Aggregator::Rank,
            boundary: Boundary::Mirror,
            iterations: 2,
        };
        let flat = ImageGrid::from_fn_2d(rows, cols, 1, |_, _| vec![c]).unwrap();
        prop_assert_eq!(median_filter(&flat, &params).unwrap().image, flat);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy = ImageGrid::from_fn_2d(rows, cols, 1, |_, _| vec![rand::Rng::random::<f64>(&mut rng)]).unwrap();
        let (lo, hi) = noisy.min_max();
        let out = median_filter(&noisy, &params).unwrap().image;
        prop_assert!(out.data().iter().all(|v| noisy.data().contains(v) && *v >= lo && *v <= hi));
    }

    #[test]
    fn frame_is_orthonormal_and_sign_stable(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jet = random_jet(2, 2, 20.0, &mut rng);
        let f = geometric_frame(&jet).unwrap();
        let dot = f.eta[0] * f.xi[0] + f.eta[1] * f.xi[1];
        prop_assert!(dot.abs() < 1e-12);
        prop_assert!((f.eta[0].hypot(f.eta[1]) - 1.0).abs() < 1e-12);
        prop_assert!((f.xi[0] * f.eta[1] - f.xi[1] * f.eta[0] + 1.0).abs() < 1e-12);
        let flipped = JetPoint::new(
            jet.value.iter().map(|v| -v).collect(),
            -&jet.jacobian,
            jet.hessian.iter().map(|h| -h).collect(),
        ).unwrap();
        let g = geometric_frame(&flipped).unwrap();
        prop_assert!((f.eta[0].abs() - g.eta[0].abs()).abs() < 1e-10);
        prop_assert!((f.eta[1].abs() - g.eta[1].abs()).abs() < 1e-10);
    }

    #[test]
    fn oja_rhs_value_equivariance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jet = random_jet(2, 2, 20.0, &mut rng);
        let a: DMatrix<f64> = random_matrix(2, 2, 20.0, &mut rng);
        let base = rhs_oja_22(&jet).unwrap();
        let warped = rhs_oja_22(&warp_jet(&jet, &a)).unwrap();
        let expect = &a * nalgebra::DVector::from_column_slice(&base);
        let scale = 1.0 + expect.norm();
        for c in 0..2 {
            prop_assert!((warped[c] - expect[c]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn mcm_is_odd_in_the_image(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jet = random_jet(2, 1, 20.0, &mut rng);
        let neg = JetPoint::new(vec![-jet.value[0]], -&jet.jacobian, vec![-&jet.hessian[0]]).unwrap();
        let (a, b) = (rhs_mcm(&jet).unwrap()[0], rhs_mcm(&neg).unwrap()[0]);
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}
