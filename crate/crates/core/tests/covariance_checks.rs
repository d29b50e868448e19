//! Monte Carlo checks that the sample covariance of the scaled averaged
//! iterate matches the closed-form asymptotic covariance.

use ldp_sgd::models::{
    QuantRegModel, QuantRegOracle, QuantRegStream, QuantileModel, QuantileOracle,
    StandardNormalStream,
};
use ldp_sgd::rng::{substream, STREAM_DATA, STREAM_PRIVACY};
use ldp_sgd::schedule::LearningRateSchedule;
use ldp_sgd::sgd::{run_ldp_sgd, run_sgd, RunConfig};
use ldp_sgd::trace::TraceSpec;
use nalgebra::DMatrix;

#[test]
fn quantile_ldp_variance_matches_closed_form() {
    let model = QuantileModel::standard_normal(0.5).unwrap();
    let oracle = QuantileOracle::new(&model, Some(1.0)).unwrap();
    let sigma = model.asymptotic_cov(Some(1.0)).unwrap().sigma()[(0, 0)];

    let schedule = LearningRateSchedule::new(1.0, 0.51).unwrap();
    let n = 100_000u64;
    let config = RunConfig::new(n, vec![0.0]).unwrap();
    let spec = TraceSpec::blocks(n as usize);
    let reps = 500u64;
    let root_n = (n as f64).sqrt();

    let mut scaled = Vec::with_capacity(reps as usize);
    for r in 0..reps {
        let mut data = StandardNormalStream::new(substream(9001, &[r, STREAM_DATA]));
        let mut privacy_rng = substream(9001, &[r, STREAM_PRIVACY]);
        let (mean, _) =
            run_ldp_sgd(&oracle, &mut data, &schedule, &config, &spec, &mut privacy_rng)
                .unwrap();
        scaled.push(root_n * mean[0]);
    }
    let avg = scaled.iter().sum::<f64>() / reps as f64;
    let var =
        scaled.iter().map(|v| (v - avg) * (v - avg)).sum::<f64>() / (reps as f64 - 1.0);
    let ratio = var / sigma;
    assert!(
        (ratio - 1.0).abs() < 0.15,
        "sample variance {var:.4} vs asymptotic {sigma:.4} (ratio {ratio:.4})"
    );
}

#[test]
fn quantreg_variance_matches_closed_form_without_noise() {
    let beta_star = vec![0.0, 0.0, 1.0, -1.0];
    let model = QuantRegModel::truncated_normal(0.5, beta_star.clone()).unwrap();
    let oracle = QuantRegOracle::new(&model, None).unwrap();
    let sigma = model.asymptotic_cov(None).unwrap().sigma().clone();
    let d = model.dim();

    let schedule = LearningRateSchedule::new(1.0, 0.51).unwrap();
    let n = 100_000u64;
    let config = RunConfig::new(n, beta_star.clone()).unwrap();
    let spec = TraceSpec::blocks(n as usize);
    let reps = 500u64;
    let root_n = (n as f64).sqrt();

    let mut rows: Vec<f64> = Vec::with_capacity(reps as usize * d);
    for r in 0..reps {
        let mut data = QuantRegStream::new(&model, substream(9002, &[r, STREAM_DATA]));
        let (mean, _) = run_sgd(&oracle, &mut data, &schedule, &config, &spec).unwrap();
        for k in 0..d {
            rows.push(root_n * (mean[k] - beta_star[k]));
        }
    }

    let mut avg = vec![0.0; d];
    for r in 0..reps as usize {
        for k in 0..d {
            avg[k] += rows[r * d + k];
        }
    }
    for a in &mut avg {
        *a /= reps as f64;
    }
    let mut sample = DMatrix::<f64>::zeros(d, d);
    for r in 0..reps as usize {
        for j in 0..d {
            for k in 0..d {
                sample[(j, k)] +=
                    (rows[r * d + j] - avg[j]) * (rows[r * d + k] - avg[k]);
            }
        }
    }
    sample /= reps as f64 - 1.0;

    let diff = &sample - &sigma;
    let rel = spectral_norm(&diff) / spectral_norm(&sigma);
    assert!(
        rel < 0.20,
        "spectral deviation {rel:.4}; sample diag {:?} vs asymptotic diag {:?}",
        (0..d).map(|k| sample[(k, k)]).collect::<Vec<_>>(),
        (0..d).map(|k| sigma[(k, k)]).collect::<Vec<_>>()
    );
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}
