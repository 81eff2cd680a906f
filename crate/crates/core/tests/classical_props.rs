use canonmap::classical::{
    apply_stochastic, pseudo_inverse, pseudo_inverse_stochastic, ProbabilityVector,
    StochasticMatrix,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_simplex(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let v = DVector::from_fn(n, |_, _| -rng.random::<f64>().max(1e-300).ln());
    let s = v.sum();
    v / s
}

fn random_stochastic(n: usize, rng: &mut ChaCha8Rng) -> StochasticMatrix {
    let cols: Vec<_> = (0..n).map(|_| random_simplex(n, rng)).collect();
    StochasticMatrix::new(DMatrix::from_columns(&cols)).unwrap()
}

proptest! {
    #[test]
    fn outputs_stay_in_the_simplex(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = canonmap::sampling::rng_from_seed(seed);
        let m = random_stochastic(n, &mut rng);
        let p = ProbabilityVector::new(random_simplex(n, &mut rng)).unwrap();
        let out = apply_stochastic(&m, &p).unwrap();
        prop_assert!(ProbabilityVector::new(out.as_vector().clone()).is_ok());
    }

    #[test]
    fn permutation_inverse_is_stochastic_transpose(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = canonmap::sampling::rng_from_seed(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let m = StochasticMatrix::permutation(&perm).unwrap();
        let inv = pseudo_inverse(m.matrix());
        prop_assert_eq!(&inv, &m.matrix().transpose());
        prop_assert!(StochasticMatrix::new(inv).is_ok());
    }

    #[test]
    fn image_preimage_round_trip(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = canonmap::sampling::rng_from_seed(seed);
        let m = random_stochastic(n, &mut rng);
        let p = apply_stochastic(&m, &ProbabilityVector::new(random_simplex(n, &mut rng)).unwrap()).unwrap();
        let pre = pseudo_inverse_stochastic(&m, &p).unwrap();
        prop_assert!((m.matrix() * &pre.preimage - p.as_vector()).amax() < 1e-10);
    }
}
