//! Property tests for the structural invariants of the tensor toolkit
//! and the transition layer.

use ndarray::prelude::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use riqmc::linalg;
use riqmc::random;
use riqmc::tensor::{
    partial_trace, reverse_chain_order, tensor_product, weighted_norm, ComplexOperator,
    FactorDims,
};
use riqmc::C64;

fn random_op(dims: &[usize], seed: u64) -> ComplexOperator {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let total: usize = dims.iter().product();
    ComplexOperator::new(
        random::random_matrix(total, &mut rng),
        FactorDims::new(dims.to_vec()).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_preserves_trace(
        seed in 0u64..1_000_000,
        d0 in 2usize..4,
        d1 in 2usize..4,
        d2 in 2usize..4,
        keep_mask in 1usize..7,
    ) {
        let dims = [d0, d1, d2];
        let op = random_op(&dims, seed);
        let keep: Vec<usize> = (0..3).filter(|k| keep_mask & (1 << k) != 0).collect();
        let reduced = partial_trace(&op, &keep).unwrap();
        let dt = (reduced.trace() - op.trace()).norm();
        prop_assert!(dt < 1e-10, "trace defect {dt}");
    }

    #[test]
    fn partial_trace_positive_on_psd(seed in 0u64..1_000_000) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let psd = random::random_psd(12, &mut rng);
        let op = ComplexOperator::new(psd, FactorDims::new(vec![3, 2, 2]).unwrap()).unwrap();
        for keep in [vec![0], vec![1], vec![0, 2]] {
            let reduced = partial_trace(&op, &keep).unwrap();
            prop_assert!(linalg::min_eig(reduced.matrix()).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn reverse_chain_order_is_involutive(seed in 0u64..1_000_000, slots in 2usize..4) {
        let dims: Vec<usize> = std::iter::once(2).chain(std::iter::repeat(2).take(slots)).collect();
        let op = random_op(&dims, seed);
        let back = reverse_chain_order(&reverse_chain_order(&op).unwrap()).unwrap();
        prop_assert!(linalg::frobenius(&(back.matrix() - op.matrix())) < 1e-12);
    }

    #[test]
    fn reverse_chain_order_is_multiplicative(seed in 0u64..1_000_000) {
        let dims = [2usize, 2, 2];
        let a = random_op(&dims, seed);
        let b = random_op(&dims, seed.wrapping_add(1));
        let lhs = reverse_chain_order(&a.dot(&b).unwrap()).unwrap();
        let rhs = reverse_chain_order(&a)
            .unwrap()
            .dot(&reverse_chain_order(&b).unwrap())
            .unwrap();
        prop_assert!(linalg::frobenius(&(lhs.matrix() - rhs.matrix())) < 1e-11);
    }

    #[test]
    fn tensor_product_traces_factorize(seed in 0u64..1_000_000) {
        let a = random_op(&[3], seed);
        let b = random_op(&[2], seed.wrapping_add(7));
        let prod = tensor_product(&a, &b);
        let lhs = prod.trace();
        let rhs = a.trace() * b.trace();
        prop_assert!((lhs - rhs).norm() < 1e-11);
        prop_assert_eq!(prod.dims().dims(), &[3, 2]);
    }

    #[test]
    fn weighted_norm_satisfies_parallelogram_law(seed in 0u64..1_000_000) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let phi = random::random_faithful_density(3, &mut rng);
        let a = ComplexOperator::on_system(random::random_matrix(3, &mut rng)).unwrap();
        let b = ComplexOperator::on_system(random::random_matrix(3, &mut rng)).unwrap();
        let sum = ComplexOperator::on_system(a.matrix() + b.matrix()).unwrap();
        let diff = ComplexOperator::on_system(a.matrix() - b.matrix()).unwrap();
        let lhs = weighted_norm(&sum, &phi).unwrap().powi(2)
            + weighted_norm(&diff, &phi).unwrap().powi(2);
        let rhs = 2.0 * weighted_norm(&a, &phi).unwrap().powi(2)
            + 2.0 * weighted_norm(&b, &phi).unwrap().powi(2);
        prop_assert!((lhs - rhs).abs() < 1e-10, "parallelogram defect {}", (lhs - rhs).abs());
    }

    #[test]
    fn distances_lie_in_unit_interval(seed in 0u64..1_000_000, n in 2usize..5) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let a = random::random_density(n, &mut rng);
        let b = random::random_density(n, &mut rng);
        let t = riqmc::tensor::trace_distance(&a, &b).unwrap();
        let f = riqmc::tensor::fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&t));
        prop_assert!((0.0..=1.0).contains(&f));
        // Fuchs–van de Graaf: 1 − √F ≤ T ≤ √(1 − F)
        prop_assert!(t <= (1.0 - f).sqrt() + 1e-10);
        prop_assert!(t >= 1.0 - f.sqrt() - 1e-10);
    }

    #[test]
    fn transition_is_unital_homomorphism(seed in 0u64..1_000_000) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let m = random::random_product_stationary_model(2, &mut rng).unwrap();
        let a = ComplexOperator::on_system(random::random_matrix(2, &mut rng)).unwrap();
        let b = ComplexOperator::on_system(random::random_matrix(2, &mut rng)).unwrap();
        let jab = m.apply_j(&a.dot(&b).unwrap()).unwrap();
        let jajb = m.apply_j(&a).unwrap().dot(&m.apply_j(&b).unwrap()).unwrap();
        prop_assert!(linalg::frobenius(&(jab.matrix() - jajb.matrix())) < 1e-10);
        let one = ComplexOperator::identity(FactorDims::system_only(2));
        let jone = m.apply_j(&one).unwrap();
        prop_assert!(linalg::frobenius(&(jone.matrix() - &linalg::identity(4))) < 1e-12);
    }

    #[test]
    fn schrodinger_heisenberg_duality(seed in 0u64..1_000_000) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let m = random::random_product_stationary_model(2, &mut rng).unwrap();
        let sigma = random::random_density(2, &mut rng);
        let theta_m = random::random_psd(4, &mut rng);
        let tr = linalg::trace(&theta_m.view()).re;
        let theta = riqmc::tensor::DensityState::on_chain(theta_m.mapv(|z| z / tr), 2, 2).unwrap();
        let a = ComplexOperator::on_system(random::random_matrix(2, &mut rng)).unwrap();
        let evolved = m.evolve_state(&sigma, &theta).unwrap();
        let lhs = evolved.expectation(&a.matrix().view());
        let joint = riqmc::tensor::tensor_states(&sigma, &theta);
        let rhs = joint.expectation(&m.apply_jn(&a, 2).unwrap().matrix().view());
        prop_assert!((lhs - rhs).norm() < 1e-11);
    }

    #[test]
    fn row_major_index_convention_roundtrip(i0 in 0usize..2, i1 in 0usize..3, i2 in 0usize..2) {
        // index(|i₀,i₁,i₂⟩) = i₀·6 + i₁·2 + i₂ for dims [2,3,2]
        let dims = FactorDims::new(vec![2, 3, 2]).unwrap();
        let idx = i0 * 6 + i1 * 2 + i2;
        let total = dims.total();
        let mut mtx = Array2::<C64>::zeros((total, total));
        mtx[[idx, idx]] = C64::new(1.0, 0.0);
        let op = ComplexOperator::new(mtx, dims).unwrap();
        // tracing out the other factors leaves the marked basis state
        let keep1 = partial_trace(&op, &[1]).unwrap();
        prop_assert!((keep1.matrix()[[i1, i1]].re - 1.0).abs() < 1e-14);
        let keep02 = partial_trace(&op, &[0, 2]).unwrap();
        prop_assert!((keep02.matrix()[[i0 * 2 + i2, i0 * 2 + i2]].re - 1.0).abs() < 1e-14);
    }
}
