use nalgebra::DVector;
use proptest::prelude::*;

use rgta::problems::{
    centralized_optimum, generate_quadratic, parse_libsvm, Dataset, GradientOracle, LogisticProblem, QuadraticSpec,
};

fn central_difference<O: GradientOracle>(o: &O, node: usize, x: &[f64], h: f64) -> DVector<f64> {
    DVector::from_fn(x.len(), |j, _| {
        let (mut a, mut b) = (x.to_vec(), x.to_vec());
        a[j] += h;
        b[j] -= h;
        (o.local_value(node, &a) - o.local_value(node, &b)) / (2.0 * h)
    })
}

fn synthetic_logistic(seed: u64, rows: usize, d: usize, nodes: usize) -> LogisticProblem {
    // Small deterministic generator; labels follow a hidden linear rule.
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let data: Vec<Vec<f64>> = (0..rows).map(|_| (0..d).map(|_| next()).collect()).collect();
    let labels = data
        .iter()
        .map(|r| if r.iter().enumerate().map(|(j, v)| v * (j as f64 - 1.0)).sum::<f64>() + 0.3 * next() > 0.0 { 1.0 } else { -1.0 })
        .collect();
    LogisticProblem::new(Dataset::from_dense(labels, &data).unwrap(), nodes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadratic_gradient_matches_finite_differences(seed in any::<u64>(), node in 0usize..4) {
        let q = generate_quadratic(QuadraticSpec::new(4, 5, 100.0, seed)).unwrap();
        let x: Vec<f64> = (0..5).map(|j| (j as f64 + seed as f64 * 1e-3).cos()).collect();
        let g = q.local_gradient(node, &x);
        let fd = central_difference(&q, node, &x, 1e-4);
        prop_assert!((fd - &g).norm() <= 1e-6 * g.norm().max(1.0));
    }

    #[test]
    fn logistic_gradient_matches_finite_differences(seed in any::<u64>(), node in 0usize..3) {
        let lp = synthetic_logistic(seed, 60, 6, 3);
        let x: Vec<f64> = (0..6).map(|j| 0.3 * (j as f64 + seed as f64 * 1e-3).sin()).collect();
        let g = lp.local_gradient(node, &x);
        let fd = central_difference(&lp, node, &x, 1e-6);
        prop_assert!((fd - &g).norm() <= 1e-5 * g.norm().max(1e-3));
    }
}

#[test]
fn logistic_optimum_is_stationary() {
    let lp = synthetic_logistic(3, 90, 5, 4);
    assert_eq!(lp.block_sizes(), vec![23, 23, 22, 22]);
    let xs = centralized_optimum(&lp, 1e-10, 1_000_000).unwrap();
    assert!(lp.global_gradient(xs.as_slice()).norm() <= 1e-10);
    assert!(lp.strong_convexity() > 0.0 && lp.strong_convexity() <= lp.lipschitz());
}

#[test]
fn quadratic_optimum_agrees_with_iterative_solver() {
    let q = generate_quadratic(QuadraticSpec::new(6, 4, 50.0, 8)).unwrap();
    let direct = q.optimum().unwrap();
    let iterative = centralized_optimum(&q, 1e-12, 10_000_000).unwrap();
    assert!((direct - iterative).amax() <= 1e-9);
}

#[test]
fn libsvm_round_trip_through_logistic() {
    let text = "+1 1:0.5 3:1\n-1 2:1\n+1 1:1 2:0.25\n-1 3:-1\n";
    let ds = parse_libsvm(text.as_bytes(), Some(3)).unwrap();
    assert_eq!((ds.len(), ds.dim(), ds.nnz()), (4, 3, 6));
    let lp = LogisticProblem::new(ds, 2).unwrap();
    let g = lp.local_gradient(0, &[0.0; 3]);
    // Rows 1 and 2 at the origin: each contributes −b a / 2, averaged over 2.
    assert!((g[0] + 0.125).abs() < 1e-15);
    assert!((g[1] - 0.25).abs() < 1e-15);
    assert!((g[2] + 0.25).abs() < 1e-15);
}
