use chromaforge::amygdala::{AmygdalaConfig, AmygdalaModel, Percept, SomGrid, SomParams};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Setup {
    config: AmygdalaConfig,
    n_objects: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    percept: Percept,
}

impl Setup {
    fn model(&self) -> AmygdalaModel {
        let names = (0..self.n_objects).map(|i| format!("obj{i}")).collect();
        let mut m = AmygdalaModel::new(self.config.clone(), names).unwrap();
        let units = m.code_len();
        m.weights_mut().copy_from_slice(&self.weights[..self.n_objects * units]);
        m.bias_mut().copy_from_slice(&self.bias[..self.n_objects]);
        m
    }
}

fn setup() -> impl Strategy<Value = Setup> {
    (1usize..5, 1usize..5, 1usize..6, 2usize..6, any::<u64>(), 0.0f64..1.0).prop_flat_map(
        |(rows, cols, face_dim, n_objects, seed, lr)| {
            let units = 3 * rows * cols;
            (
                proptest::collection::vec(-20.0f64..20.0, n_objects * units),
                proptest::collection::vec(-20.0f64..20.0, n_objects),
                proptest::collection::vec(0.0f64..1.0, face_dim),
                (0.0f64..1.0, 0.0f64..1.0, 0.0f64..24.0),
            )
                .prop_map(move |(weights, bias, face, (px, py, hour))| Setup {
                    config: AmygdalaConfig {
                        rows,
                        cols,
                        som: SomParams {
                            eta0: 0.3,
                            sigma0: rows.max(cols) as f64,
                            tau: 1000.0,
                        },
                        lr,
                        face_dim,
                        seed,
                    },
                    n_objects,
                    weights,
                    bias,
                    percept: Percept::new(face, [px, py], hour),
                })
        },
    )
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn estimate_is_a_distribution(s in setup()) {
        let p = s.model().estimate(&s.percept).unwrap();
        prop_assert_eq!(p.len(), s.n_objects);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn shifting_every_logit_changes_nothing(s in setup(), c in -50.0f64..50.0) {
        let m = s.model();
        let mut shifted = m.clone();
        shifted.bias_mut().iter_mut().for_each(|b| *b += c);
        let a = m.estimate(&s.percept).unwrap();
        let b = shifted.estimate(&s.percept).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn zero_learning_rate_keeps_the_perceptron(s in setup(), pick in any::<prop::sample::Index>()) {
        let mut m = s.model();
        m.set_lr(0.0);
        let (w, b) = (m.weights().to_vec(), m.bias().to_vec());
        m.interact(&s.percept, pick.index(s.n_objects)).unwrap();
        prop_assert_eq!(m.weights(), &w[..]);
        prop_assert_eq!(m.bias(), &b[..]);
    }

    #[test]
    fn relabeling_objects_permutes_estimates(
        (s, perm) in setup().prop_flat_map(|s| { let n = s.n_objects; (Just(s), permutation(n)) }),
        pick in any::<prop::sample::Index>(),
    ) {
        let m = s.model();
        let pm = m.permute_objects(&perm).unwrap();
        let a = m.estimate(&s.percept).unwrap();
        let b = pm.estimate(&s.percept).unwrap();
        for i in 0..s.n_objects {
            prop_assert!((a[i] - b[perm[i]]).abs() <= 1e-12);
        }
        // training commutes with relabeling too
        let obj = pick.index(s.n_objects);
        let (mut m, mut pm) = (m, pm);
        m.interact(&s.percept, obj).unwrap();
        pm.interact(&s.percept, perm[obj]).unwrap();
        let a = m.estimate(&s.percept).unwrap();
        let b = pm.estimate(&s.percept).unwrap();
        for i in 0..s.n_objects {
            prop_assert!((a[i] - b[perm[i]]).abs() <= 1e-12);
        }
    }

    #[test]
    fn repeated_training_contracts_the_winner(
        rows in 1usize..6, cols in 1usize..6, dim in 1usize..5,
        eta0 in 0.01f64..0.99, seed in any::<u64>(),
        x in proptest::collection::vec(-1.0f64..1.0, 4),
    ) {
        use rand::SeedableRng;
        let params = SomParams { eta0, sigma0: rows.max(cols) as f64, tau: 1000.0 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut som = SomGrid::random(rows, cols, &vec![(-1.0, 1.0); dim], params, &mut rng).unwrap();
        let x = &x[..dim];
        let dist = |som: &SomGrid, (r, c): (usize, usize)| {
            som.weight(r, c).iter().zip(x).map(|(w, v)| (w - v).powi(2)).sum::<f64>().sqrt()
        };
        for _ in 0..10 {
            let bmu = som.bmu(x).unwrap();
            let before = dist(&som, bmu);
            prop_assert_eq!(som.train_step(x).unwrap(), bmu);
            let after = dist(&som, bmu);
            if before > 0.0 {
                prop_assert!(after < before, "{before} -> {after}");
            }
            prop_assert_eq!(som.bmu(x).unwrap(), bmu);
        }
    }

    /// Once the maps have settled on a percept, a step raises the target
    /// logit and lowers all others, so the loss cannot rise at any rate.
    #[test]
    fn loss_does_not_rise_on_the_trained_sample(s in setup(), lr in 0.0f64..=8.0, pick in any::<prop::sample::Index>()) {
        let mut m = s.model();
        m.set_lr(lr);
        let obj = pick.index(s.n_objects);
        m.interact(&s.percept, obj).unwrap();
        for _ in 0..5 {
            let before = m.loss(&s.percept, obj).unwrap();
            m.interact(&s.percept, obj).unwrap();
            let after = m.loss(&s.percept, obj).unwrap();
            prop_assert!(after <= before + 1e-12, "{before} -> {after}");
        }
    }
}
