use nalgebra::DMatrix;
use proptest::prelude::*;

use rgta::network::{beta_of, consensus_apply, MixingMatrix, Topology, TopologyKind, WeightScheme};

fn kind() -> impl Strategy<Value = TopologyKind> {
    prop_oneof![Just(TopologyKind::Star), Just(TopologyKind::Line), Just(TopologyKind::Complete)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // W is symmetric, so ‖W^k − J‖ = β^k.
    #[test]
    fn beta_of_power(k in kind(), n in 2usize..20, e in 1u32..8) {
        let w = MixingMatrix::from_topology(&Topology::build(k, n).unwrap(), WeightScheme::Metropolis).unwrap();
        let b = beta_of(&w.power(e)).unwrap();
        prop_assert!((b - w.beta().powi(e as i32)).abs() <= 1e-10);
    }

    #[test]
    fn mixing_preserves_column_means(k in kind(), n in 2usize..20, reps in 1u32..5, seed in any::<u32>()) {
        let w = MixingMatrix::from_topology(&Topology::build(k, n).unwrap(), WeightScheme::Metropolis).unwrap();
        let x = DMatrix::from_fn(n, 3, |i, j| (((i * 7 + j * 13) as u32 ^ seed) % 101) as f64 - 50.0);
        let y = consensus_apply(&w, &x, reps).unwrap();
        for j in 0..3 {
            prop_assert!((x.column(j).mean() - y.column(j).mean()).abs() <= 1e-10);
        }
        let spread = |m: &DMatrix<f64>| {
            (0..3).map(|j| {
                let c = m.column(j);
                c.map(|v| (v - c.mean()).powi(2)).sum().sqrt()
            }).sum::<f64>()
        };
        prop_assert!(spread(&y) <= w.beta().powi(reps as i32) * spread(&x) * (1.0 + 1e-12) + 1e-9);
    }

    #[test]
    fn metropolis_is_doubly_stochastic(k in kind(), n in 2usize..30) {
        let w = MixingMatrix::from_topology(&Topology::build(k, n).unwrap(), WeightScheme::Metropolis).unwrap();
        let m = w.matrix();
        prop_assert!((m - m.transpose()).amax() == 0.0);
        for i in 0..n {
            prop_assert!((m.row(i).sum() - 1.0).abs() <= 1e-14);
            prop_assert!(m.row(i).iter().all(|&v| v >= 0.0));
        }
        prop_assert!(w.beta() < 1.0);
    }
}

#[test]
fn complete_equal_weights_reach_consensus_in_one_round() {
    let w = MixingMatrix::from_topology(&Topology::build(TopologyKind::Complete, 5).unwrap(), WeightScheme::EqualComplete)
        .unwrap();
    assert!(w.beta() <= 1e-15);
    let x = DMatrix::from_fn(5, 2, |i, j| (i + 3 * j) as f64);
    let y = consensus_apply(&w, &x, 1).unwrap();
    for j in 0..2 {
        assert!(y.column(j).iter().all(|v| (v - x.column(j).mean()).abs() < 1e-12));
    }
}
