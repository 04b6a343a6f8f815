use super::coins::CoinStream;
use super::state::StackedState;
use crate::network::CommunicationSet;
use crate::problems::GradientOracle;

/// One iteration of the randomized tracking update with the coin already
/// drawn. Returns `theta`.
///
/// With `theta`:  `X ← W1ⁿX − α W2ⁿY`, `Y ← W3ⁿY + W4ⁿ(G⁺ − G)`.
/// Without:       `X ← X − αY`,        `Y ← Y + G⁺ − G`.
pub fn rgta_step_with<O: GradientOracle + ?Sized>(
    state: &mut StackedState,
    oracle: &O,
    comm: &CommunicationSet,
    alpha: f64,
    theta: bool,
) -> bool {
    let StackedState {
        x,
        y,
        g,
        scratch,
        comm_rounds,
        ..
    } = &mut *state;
    let reps = comm.n_c();
    if theta {
        scratch.a.copy_from(x);
        comm.matrix(1).mix_in_place(&mut scratch.a, reps, &mut scratch.c);
        scratch.b.copy_from(y);
        comm.matrix(2).mix_in_place(&mut scratch.b, reps, &mut scratch.c);
        x.copy_from(&scratch.a);
        x.zip_apply(&scratch.b, |xi, yi| *xi -= alpha * yi);

        oracle.stacked_gradients(x, &mut scratch.a);
        scratch.b.copy_from(&scratch.a);
        scratch.b -= &*g;
        comm.matrix(4).mix_in_place(&mut scratch.b, reps, &mut scratch.c);
        comm.matrix(3).mix_in_place(y, reps, &mut scratch.c);
        *y += &scratch.b;
        *comm_rounds += reps as u64;
    } else {
        x.zip_apply(&*y, |xi, yi| *xi -= alpha * yi);
        oracle.stacked_gradients(x, &mut scratch.a);
        *y += &scratch.a;
        *y -= &*g;
    }
    std::mem::swap(g, &mut scratch.a);
    state.grad_evals += 1;
    state.k += 1;
    theta
}

/// Draws `θ_k ~ Bernoulli(p)` for the current iteration and steps.
pub fn rgta_step<O: GradientOracle + ?Sized>(
    state: &mut StackedState,
    oracle: &O,
    comm: &CommunicationSet,
    alpha: f64,
    coins: &mut CoinStream,
    p: f64,
) -> bool {
    let theta = coins.coin(state.k, p);
    rgta_step_with(state, oracle, comm, alpha, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::state::{init_state, init_state_shared};
    use crate::network::{MixingMatrix, Topology, TopologyKind, Variant, WeightScheme};
    use crate::problems::QuadraticProblem;
    use nalgebra::{DMatrix, DVector};

    fn scalar(q: &[f64], v: &[f64]) -> QuadraticProblem {
        QuadraticProblem::new(
            q.iter().map(|&a| DMatrix::from_element(1, 1, a)).collect(),
            v.iter().map(|&b| DVector::from_element(1, b)).collect(),
        )
        .unwrap()
    }

    fn mixing(kind: TopologyKind, n: usize, scheme: WeightScheme) -> MixingMatrix {
        MixingMatrix::from_topology(&Topology::build(kind, n).unwrap(), scheme).unwrap()
    }

    #[test]
    fn single_node_is_gradient_descent() {
        let p = scalar(&[2.0], &[-4.0]);
        let w = mixing(TopologyKind::Complete, 1, WeightScheme::Metropolis);
        for theta in [[true, false], [false, true], [true, true]] {
            let set = CommunicationSet::for_variant(Variant::Three, &w, 1).unwrap();
            let mut s = init_state_shared(&p, &DVector::zeros(1)).unwrap();
            rgta_step_with(&mut s, &p, &set, 0.25, theta[0]);
            assert_eq!(s.x[(0, 0)], 1.0);
            assert_eq!(s.y[(0, 0)], -2.0);
            rgta_step_with(&mut s, &p, &set, 0.25, theta[1]);
            assert_eq!(s.x[(0, 0)], 1.5);
        }
    }

    #[test]
    fn local_branch_moves_along_tracker() {
        let p = scalar(&[1.0, 1.0], &[0.0, 0.0]);
        let w = mixing(TopologyKind::Complete, 2, WeightScheme::Metropolis);
        let set = CommunicationSet::for_variant(Variant::One, &w, 1).unwrap();
        let mut s = init_state(&p, &DMatrix::from_column_slice(2, 1, &[1.0, 3.0])).unwrap();
        s.y = DMatrix::from_column_slice(2, 1, &[2.0, 0.0]);
        rgta_step_with(&mut s, &p, &set, 0.5, false);
        assert_eq!(s.x.as_slice(), &[0.0, 3.0]);
        assert_eq!(s.comm_rounds, 0);
        assert_eq!(s.grad_evals, 2);
    }

    #[test]
    fn averaging_matrix_gives_consensus() {
        let p = scalar(&[1.0, 2.0, 3.0], &[1.0, -1.0, 0.5]);
        let w = mixing(TopologyKind::Complete, 3, WeightScheme::EqualComplete);
        let set = CommunicationSet::for_variant(Variant::Three, &w, 2).unwrap();
        let mut s = init_state(&p, &DMatrix::from_column_slice(3, 1, &[1.0, -2.0, 5.0])).unwrap();
        rgta_step_with(&mut s, &p, &set, 0.1, true);
        assert!(s.cons_error_x() < 1e-15);
        assert_eq!(s.comm_rounds, 2);
    }

    #[test]
    fn coherent_cache_after_steps() {
        let p = scalar(&[1.0, 2.0, 3.0], &[1.0, -1.0, 0.5]);
        let w = mixing(TopologyKind::Line, 3, WeightScheme::Metropolis);
        let set = CommunicationSet::for_variant(Variant::Two, &w, 3).unwrap();
        let mut s = init_state_shared(&p, &DVector::zeros(1)).unwrap();
        let mut coins = CoinStream::new(3);
        for _ in 0..20 {
            rgta_step(&mut s, &p, &set, 0.05, &mut coins, 0.5);
        }
        let mut fresh = DMatrix::zeros(3, 1);
        p.stacked_gradients(&s.x, &mut fresh);
        assert_eq!(fresh, s.g);
    }
}
