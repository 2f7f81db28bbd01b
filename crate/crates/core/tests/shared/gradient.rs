//! Central finite-difference check of the classifier gradient.

use assistant_core::nlu::{loss, loss_and_gradient, Params, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;

/// Random 3-class, 10-example problem over a 6-dimensional unit-norm input,
/// with non-zero parameters so every gradient entry is exercised.
pub fn random_instance(seed: u64) -> (Params, Vec<Sample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (classes, dim) = (3, 6);
    let data = (0..10)
        .map(|i| {
            let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            Sample {
                x: raw.iter().enumerate().map(|(f, v)| (f, v / norm)).collect(),
                label: i % classes,
            }
        })
        .collect();
    let mut params = Params::zeros(classes, dim);
    for w in params.weights.iter_mut().chain(params.biases.iter_mut()) {
        *w = rng.gen_range(-1.0..1.0);
    }
    (params, data)
}

/// Largest relative error between analytic and numeric partials over the
/// instances generated from `seeds`.
pub fn max_relative_error(seeds: std::ops::Range<u64>) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in seeds {
        let (params, data) = random_instance(seed);
        let (l, grad) = loss_and_gradient(&params, &data);
        assert!((l - loss(&params, &data)).abs() < 1e-12, "loss_and_gradient disagrees with loss");
        let n_w = params.weights.len();
        let analytic: Vec<f64> = grad.weights.iter().chain(&grad.biases).copied().collect();
        for (i, a) in analytic.iter().enumerate() {
            let bump = |delta: f64| {
                let mut p = params.clone();
                if i < n_w {
                    p.weights[i] += delta;
                } else {
                    p.biases[i - n_w] += delta;
                }
                loss(&p, &data)
            };
            let numeric = (bump(STEP) - bump(-STEP)) / (2.0 * STEP);
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8));
        }
    }
    worst
}

