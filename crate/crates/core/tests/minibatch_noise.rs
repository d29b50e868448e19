//! Compares the per-step noise injected by the two mini-batch privacy
//! placements on the quantile-regression oracle: one central draw scaled
//! by 1/s versus the mean of s per-sample privatizations.

use ldp_sgd::models::{QuantRegModel, QuantRegOracle};
use ldp_sgd::rng::substream;
use ldp_sgd::sgd::{GradientOracle, PrivateGradientOracle};

#[test]
fn central_noise_variance_is_one_over_s_times_local() {
    let beta_star = vec![0.0, 0.0, 1.0, -1.0];
    let model = QuantRegModel::truncated_normal(0.5, beta_star.clone()).unwrap();
    let noisy = QuantRegOracle::new(&model, Some(1.0)).unwrap();
    let clean = QuantRegOracle::new(&model, None).unwrap();

    let batch = 5usize;
    let draws = 100_000usize;
    let d = model.dim();
    let row = [1.0, -0.3, 0.2, 0.9, 0.4];
    let mut rng = substream(77, &[]);
    let mut out = vec![0.0; d];
    let mut base = vec![0.0; d];
    clean.gradient(&row, &beta_star, &mut base).unwrap();

    // Laplace scale 2*max(tau,1-tau)*m*d/eps = 4, so each privatized
    // coordinate has variance 2*16 = 32 around the clean gradient.
    let per_sample_var = 32.0;

    let mut central_sq = 0.0;
    for _ in 0..draws {
        noisy.central_noise(batch, &mut rng, &mut out).unwrap();
        central_sq += out[0] * out[0];
    }
    let central_var = central_sq / draws as f64;
    let expected_central = per_sample_var / (batch * batch) as f64;
    assert!(
        (central_var / expected_central - 1.0).abs() < 0.05,
        "central-draw variance {central_var:.4} vs expected {expected_central:.4}"
    );

    let mut local_sq = 0.0;
    for _ in 0..draws {
        let mut acc = 0.0;
        for _ in 0..batch {
            noisy.private_gradient(&row, &beta_star, &mut rng, &mut out).unwrap();
            acc += (out[0] - base[0]) / batch as f64;
        }
        local_sq += acc * acc;
    }
    let local_var = local_sq / draws as f64;
    let expected_local = per_sample_var / batch as f64;
    assert!(
        (local_var / expected_local - 1.0).abs() < 0.05,
        "per-sample-mean variance {local_var:.4} vs expected {expected_local:.4}"
    );
    assert!((central_var * batch as f64 / local_var - 1.0).abs() < 0.1);
}
