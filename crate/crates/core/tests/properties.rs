use compress_cert::bounds::{
    binomial_approx_bound, binomial_tail_inv, kl_compression_bound, kl_div, kl_inv, linear_compression_bound,
    p2l_bound, BoundInputs,
};
use compress_cert::data::{split, target_bounds, Dataset, DatasetMeta, Targets};
use compress_cert::learners::{forest_fit, tree_build, TreeParams};
use compress_cert::p2l::IndexVector;
use proptest::prelude::*;

fn dataset(n: usize) -> Dataset {
    Dataset::new(
        (0..n).map(|i| i as f64).collect(),
        1,
        Targets::Real(vec![0.0; n]),
        DatasetMeta::new("prop"),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn kl_inv_inverts_kl_div(q in 0.0..0.99f64, eps in 1e-6..5.0f64) {
        let p = kl_inv(q, eps);
        prop_assert!(p >= q && p <= 1.0);
        // p is the largest point with kl(q, p) <= eps, up to bisection width
        prop_assert!(kl_div(q, p) <= eps * (1.0 + 1e-9));
        if p < 1.0 - 1e-9 {
            prop_assert!(kl_div(q, p + 1e-9) > eps * (1.0 - 1e-9));
        }
    }

    #[test]
    fn bounds_lie_in_unit_interval_and_exceed_the_loss(
        n in 20u64..5000, frac in 0.0..0.5f64, loss in 0.0..1.0f64, delta in 1e-4..0.5f64,
    ) {
        let m = (frac * n as f64) as u64;
        let inputs = BoundInputs::new(n, m, loss, delta);
        let kl = kl_compression_bound(&inputs).unwrap().bound_value;
        prop_assert!(kl >= loss - 1e-12 && kl <= 1.0);
        let lin = linear_compression_bound(&inputs, 1.0, 0.5).unwrap().bound_value;
        prop_assert!(lin >= loss - 1e-12);
    }

    #[test]
    fn kl_bound_monotone(n in 50u64..3000, m in 0u64..20, loss in 0.0..0.5f64, delta in 1e-3..0.2f64) {
        let b = |m: u64, loss: f64, delta: f64| kl_compression_bound(&BoundInputs::new(n, m, loss, delta)).unwrap().bound_value;
        let base = b(m, loss, delta);
        prop_assert!(b(m + 1, loss, delta) >= base - 1e-12);
        prop_assert!(b(m, loss + 0.05, delta) >= base - 1e-12);
        prop_assert!(b(m, loss, delta / 2.0) >= base - 1e-12);
    }

    #[test]
    fn p2l_bound_monotone_in_m(n in 100u64..5000, m in 1u64..50) {
        // small m can be vacuous because the horizon equals m; compare only informative bounds
        let (a, b) = (p2l_bound(m, n, 0.01).unwrap(), p2l_bound(m + 1, n, 0.01).unwrap());
        prop_assert!(b.bound_value <= 1.0);
        if !a.vacuous && !b.vacuous {
            prop_assert!(b.bound_value >= a.bound_value - 1e-12);
        }
    }

    #[test]
    fn tail_inversion_at_zero_errors_is_closed_form(m in 1u64..10_000, delta in 1e-10..0.9f64) {
        let got = binomial_tail_inv(0, m, delta).unwrap();
        prop_assert!((got - (1.0 - delta.powf(1.0 / m as f64))).abs() < 1e-9);
    }

    #[test]
    fn binomial_approx_not_above_kl_at_zero_loss(n in 50u64..3000, m in 0u64..30) {
        let inputs = BoundInputs::new(n, m, 0.0, 0.01);
        let bin = binomial_approx_bound(&inputs).unwrap().bound_value;
        let kl = kl_compression_bound(&inputs).unwrap().bound_value;
        prop_assert!(bin <= kl + 1e-9);
    }

    #[test]
    fn deep_tree_interpolates_distinct_points(ys in prop::collection::vec(-100.0..100.0f64, 1..40)) {
        let xs: Vec<Vec<f64>> = (0..ys.len()).map(|i| vec![i as f64, ((i * 7) % 5) as f64]).collect();
        let rows: Vec<&[f64]> = xs.iter().map(|r| r.as_slice()).collect();
        let params = TreeParams { max_depth: ys.len().max(1), ..TreeParams::default() };
        let tree = tree_build(&rows, &ys, &params).unwrap();
        for (x, y) in rows.iter().zip(&ys) {
            prop_assert_eq!(tree.predict(x), *y);
        }
    }

    #[test]
    fn tree_and_forest_predict_within_target_range(
        ys in prop::collection::vec(-50.0..50.0f64, 2..60), probe in -10.0..70.0f64, depth in 1usize..6,
    ) {
        let xs: Vec<Vec<f64>> = (0..ys.len()).map(|i| vec![i as f64]).collect();
        let rows: Vec<&[f64]> = xs.iter().map(|r| r.as_slice()).collect();
        let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let params = TreeParams { max_depth: depth, n_estimators: 7, bootstrap_seed: 5, ..TreeParams::default() };
        let t = tree_build(&rows, &ys, &params).unwrap().predict(&[probe]);
        let f = forest_fit(&rows, &ys, &params).unwrap().predict(&[probe]);
        prop_assert!(t >= lo && t <= hi);
        prop_assert!(f >= lo && f <= hi);
    }

    #[test]
    fn target_bounds_contain_observed_range(ys in prop::collection::vec(-1e3..1e3f64, 2..50), p in 0.0..0.5f64) {
        let b = target_bounds(&ys, p).unwrap();
        let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(b.y_lo <= lo && b.y_hi >= hi);
        prop_assert!(b.loss_max() > 0.0);
        prop_assert!((b.sigma - (hi - lo) / 2.0).abs() <= 1e-9 * b.sigma.max(1.0));
    }

    #[test]
    fn split_partitions_the_pool(n in 10usize..3000, seed in any::<u64>(), builtin in any::<bool>()) {
        let s = split(&dataset(n), seed, builtin).unwrap();
        let test = s.test.as_ref().map_or(0, |t| t.len());
        prop_assert_eq!(s.train.len() + s.val.len() + test, n);
        prop_assert_eq!(builtin, s.test.is_none());
        let mut all: Vec<u64> = [Some(&s.train), Some(&s.val), s.test.as_ref()]
            .into_iter()
            .flatten()
            .flat_map(|d| (0..d.len()).map(|i| d.row(i)[0] as u64).collect::<Vec<_>>())
            .collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n as u64).collect::<Vec<_>>());
    }

    #[test]
    fn index_vector_and_complement_partition(n in 1usize..200, picks in prop::collection::vec(any::<prop::sample::Index>(), 0..50)) {
        let mut idx: Vec<usize> = picks.iter().map(|p| p.index(n)).collect();
        idx.sort_unstable();
        idx.dedup();
        let v = IndexVector::new(idx.clone(), n).unwrap();
        let comp = v.complement();
        prop_assert_eq!(v.len() + comp.len(), n);
        prop_assert!(comp.iter().all(|i| !v.contains(*i)));
    }
}
