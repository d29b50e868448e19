//! SGD runners with Polyak-Ruppert averaging: plain, per-datum LDP, and
//! mini-batch variants sharing one streaming driver.
//!
//! Every runner consumes each datum exactly once, so a per-datum
//! privatization budget of epsilon makes the whole run epsilon-LDP by
//! parallel composition.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::data::SampleStream;
use crate::error::{Error, Result};
use crate::schedule::LearningRateSchedule;
use crate::trace::{IterateTrace, TraceSpec};

/// Where privatization noise enters a mini-batch update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyMode {
    /// No noise; the update uses the plain batch-mean gradient.
    #[default]
    None,
    /// One noise draw per step, scaled down by the batch size.
    CentralDp,
    /// Every gradient in the batch privatized before averaging.
    LocalDp,
}

/// Run-shape parameters shared by all runners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    iterations: u64,
    theta0: Vec<f64>,
    batch_size: usize,
    privacy_mode: PrivacyMode,
}

impl RunConfig {
    /// Single-sample, noise-free configuration.
    pub fn new(iterations: u64, theta0: Vec<f64>) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::InvalidParameter("iteration count must be at least 1".into()));
        }
        if theta0.is_empty() {
            return Err(Error::InvalidParameter("initial point must have dimension >= 1".into()));
        }
        if let Some(bad) = theta0.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("initial point contains {bad}")));
        }
        Ok(Self { iterations, theta0, batch_size: 1, privacy_mode: PrivacyMode::None })
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        self.batch_size = batch_size;
        Ok(self)
    }

    pub fn with_privacy_mode(mut self, mode: PrivacyMode) -> Self {
        self.privacy_mode = mode;
        self
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn theta0(&self) -> &[f64] {
        &self.theta0
    }

    pub fn dim(&self) -> usize {
        self.theta0.len()
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn privacy_mode(&self) -> PrivacyMode {
        self.privacy_mode
    }
}

/// A model's noisy gradient evaluation g(X, theta).
pub trait GradientOracle {
    /// Parameter dimension d.
    fn dim(&self) -> usize;

    /// Number of fields in one datum X.
    fn sample_width(&self) -> usize;

    /// Writes g(X, theta) into `out` (length `dim()`).
    fn gradient(&self, sample: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()>;
}

/// A gradient oracle paired with an epsilon-LDP randomization of its output.
pub trait PrivateGradientOracle: GradientOracle {
    /// Per-datum budget, or `None` when the oracle applies no noise.
    fn budget(&self) -> Option<f64>;

    /// Writes the privatized gradient A(g(X, theta)) into `out`.
    fn private_gradient(
        &self,
        sample: &[f64],
        theta: &[f64],
        rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()>;

    /// Writes the single per-step noise vector for a central-model batch
    /// update into `out`, already scaled by 1/batch_size.
    fn central_noise(
        &self,
        _batch_size: usize,
        _rng: &mut dyn RngCore,
        _out: &mut [f64],
    ) -> Result<()> {
        Err(Error::Unsupported("this oracle has no central-model noise distribution".into()))
    }
}

/// Adapts a closure `(sample, theta, out)` to both oracle traits, with
/// identity privatization and no declared budget.
pub struct FnOracle<F> {
    dim: usize,
    sample_width: usize,
    f: F,
}

impl<F: Fn(&[f64], &[f64], &mut [f64])> FnOracle<F> {
    pub fn new(dim: usize, sample_width: usize, f: F) -> Self {
        Self { dim, sample_width, f }
    }
}

impl<F: Fn(&[f64], &[f64], &mut [f64])> GradientOracle for FnOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_width(&self) -> usize {
        self.sample_width
    }

    fn gradient(&self, sample: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()> {
        (self.f)(sample, theta, out);
        Ok(())
    }
}

impl<F: Fn(&[f64], &[f64], &mut [f64])> PrivateGradientOracle for FnOracle<F> {
    fn budget(&self) -> Option<f64> {
        None
    }

    fn private_gradient(
        &self,
        sample: &[f64],
        theta: &[f64],
        _rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()> {
        self.gradient(sample, theta, out)
    }
}

fn check_shapes(oracle_dim: usize, sample_width: usize, data_width: usize, config: &RunConfig) -> Result<()> {
    if oracle_dim != config.dim() {
        return Err(Error::DimensionMismatch(format!(
            "oracle dimension {oracle_dim} vs initial point dimension {}",
            config.dim()
        )));
    }
    if sample_width != data_width {
        return Err(Error::DimensionMismatch(format!(
            "oracle expects rows of width {sample_width}, data stream yields width {data_width}"
        )));
    }
    Ok(())
}

fn check_budget<O: PrivateGradientOracle + ?Sized>(oracle: &O) -> Result<()> {
    if let Some(eps) = oracle.budget() {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "private oracle declares non-positive budget {eps}"
            )));
        }
    }
    Ok(())
}

/// The shared recursion: fill a batch of rows, ask `step` for the update
/// direction, apply theta_i = theta_{i-1} - eta_i * direction, feed the
/// trace. `step` sees the batch as `batch_size` consecutive rows.
fn drive<S, F>(
    data: &mut S,
    schedule: &LearningRateSchedule,
    config: &RunConfig,
    trace_spec: &TraceSpec,
    mut step: F,
) -> Result<(Vec<f64>, IterateTrace)>
where
    S: SampleStream + ?Sized,
    F: FnMut(u64, &[f64], &[f64], &mut [f64]) -> Result<()>,
{
    let dim = config.dim();
    let width = data.width();
    let batch = config.batch_size();
    let mut trace = IterateTrace::new(dim, config.iterations(), trace_spec)?;
    let mut theta = config.theta0().to_vec();
    let mut rows = vec![0.0; width * batch];
    let mut direction = vec![0.0; dim];

    for i in 1..=config.iterations() {
        for r in 0..batch {
            if !data.next_row(&mut rows[r * width..(r + 1) * width])? {
                return Err(Error::DataExhausted { iteration: i });
            }
        }
        step(i, &rows, &theta, &mut direction)?;
        if direction.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: i });
        }
        let eta = schedule.step_size(i);
        for (t, g) in theta.iter_mut().zip(&direction) {
            *t -= eta * g;
        }
        trace.push(&theta)?;
    }
    Ok((trace.running_mean().to_vec(), trace))
}

/// Plain averaged SGD over a data stream, one datum per iteration.
pub fn run_sgd<O, S>(
    oracle: &O,
    data: &mut S,
    schedule: &LearningRateSchedule,
    config: &RunConfig,
    trace_spec: &TraceSpec,
) -> Result<(Vec<f64>, IterateTrace)>
where
    O: GradientOracle + ?Sized,
    S: SampleStream + ?Sized,
{
    if config.batch_size() != 1 {
        return Err(Error::InvalidParameter(
            "run_sgd is single-sample; use run_minibatch for batch sizes above 1".into(),
        ));
    }
    if config.privacy_mode() != PrivacyMode::None {
        return Err(Error::InvalidParameter(
            "run_sgd applies no noise; use run_ldp_sgd or run_minibatch".into(),
        ));
    }
    check_shapes(oracle.dim(), oracle.sample_width(), data.width(), config)?;
    drive(data, schedule, config, trace_spec, |_, row, theta, out| {
        oracle.gradient(row, theta, out)
    })
}

/// Averaged SGD on privatized gradients, one datum per iteration. Each
/// datum is touched exactly once, so the run inherits the oracle's
/// per-datum budget.
pub fn run_ldp_sgd<O, S, R>(
    oracle: &O,
    data: &mut S,
    schedule: &LearningRateSchedule,
    config: &RunConfig,
    trace_spec: &TraceSpec,
    rng: &mut R,
) -> Result<(Vec<f64>, IterateTrace)>
where
    O: PrivateGradientOracle + ?Sized,
    S: SampleStream + ?Sized,
    R: RngCore,
{
    if config.batch_size() != 1 {
        return Err(Error::InvalidParameter(
            "run_ldp_sgd is single-sample; use run_minibatch for batch sizes above 1".into(),
        ));
    }
    check_budget(oracle)?;
    check_shapes(oracle.dim(), oracle.sample_width(), data.width(), config)?;
    drive(data, schedule, config, trace_spec, |_, row, theta, out| {
        oracle.private_gradient(row, theta, &mut *rng, out)
    })
}

/// Mini-batch SGD: `batch_size` fresh data per iteration, with the noise
/// placement selected by `config.privacy_mode()`.
pub fn run_minibatch<O, S, R>(
    oracle: &O,
    data: &mut S,
    schedule: &LearningRateSchedule,
    config: &RunConfig,
    trace_spec: &TraceSpec,
    rng: &mut R,
) -> Result<(Vec<f64>, IterateTrace)>
where
    O: PrivateGradientOracle + ?Sized,
    S: SampleStream + ?Sized,
    R: RngCore,
{
    if config.privacy_mode() != PrivacyMode::None {
        check_budget(oracle)?;
    }
    check_shapes(oracle.dim(), oracle.sample_width(), data.width(), config)?;
    let dim = oracle.dim();
    let width = oracle.sample_width();
    let batch = config.batch_size();
    let inv = 1.0 / batch as f64;
    let mut term = vec![0.0; dim];
    drive(data, schedule, config, trace_spec, |_, rows, theta, out| {
        out.fill(0.0);
        for r in 0..batch {
            let row = &rows[r * width..(r + 1) * width];
            match config.privacy_mode() {
                PrivacyMode::LocalDp => oracle.private_gradient(row, theta, &mut *rng, &mut term)?,
                PrivacyMode::None | PrivacyMode::CentralDp => {
                    oracle.gradient(row, theta, &mut term)?
                }
            }
            for (acc, t) in out.iter_mut().zip(&term) {
                *acc += t * inv;
            }
        }
        if config.privacy_mode() == PrivacyMode::CentralDp {
            oracle.central_noise(batch, &mut *rng, &mut term)?;
            for (acc, t) in out.iter_mut().zip(&term) {
                *acc += t;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SliceStream;
    use crate::privacy::laplace_noise;
    use crate::rng::substream;
    use std::cell::Cell;

    fn schedule() -> LearningRateSchedule {
        LearningRateSchedule::new(1.0, 0.51).unwrap()
    }

    fn zeros_stream(n: usize) -> SliceStream {
        SliceStream::new(vec![0.0; n], 1).unwrap()
    }

    #[test]
    fn deterministic_recursion_reaches_zero_in_one_step() {
        let oracle = FnOracle::new(1, 1, |_x, theta: &[f64], out: &mut [f64]| {
            out[0] = theta[0];
        });
        let config = RunConfig::new(2, vec![1.0]).unwrap();
        let mut data = zeros_stream(2);
        let (mean, trace) =
            run_sgd(&oracle, &mut data, &schedule(), &config, &TraceSpec::blocks(1)).unwrap();
        assert_eq!(mean, vec![0.0]);
        assert_eq!(trace.block_sum(0), &[0.0]);
        assert_eq!(trace.block_sum(1), &[0.0]);
    }

    #[test]
    fn zero_gradient_fixes_the_iterates() {
        let oracle = FnOracle::new(2, 1, |_x, _theta: &[f64], out: &mut [f64]| out.fill(0.0));
        let config = RunConfig::new(50, vec![0.3, -0.7]).unwrap();
        let mut data = zeros_stream(50);
        let (mean, _) =
            run_sgd(&oracle, &mut data, &schedule(), &config, &TraceSpec::blocks(5)).unwrap();
        assert_eq!(mean, vec![0.3, -0.7]);
    }

    #[test]
    fn single_step_identity() {
        let oracle = FnOracle::new(1, 1, |x: &[f64], theta: &[f64], out: &mut [f64]| {
            out[0] = theta[0] + x[0];
        });
        let config = RunConfig::new(1, vec![2.0]).unwrap();
        let mut data = SliceStream::new(vec![0.5], 1).unwrap();
        let mut rng = substream(0, &[]);
        let (mean, _) = run_ldp_sgd(
            &oracle,
            &mut data,
            &schedule(),
            &config,
            &TraceSpec::blocks(1),
            &mut rng,
        )
        .unwrap();
        assert_eq!(mean, vec![2.0 - 1.0 * 2.5]);
    }

    #[test]
    fn mean_matches_naive_recursion() {
        let oracle = FnOracle::new(1, 1, |x: &[f64], theta: &[f64], out: &mut [f64]| {
            out[0] = 0.5 * (theta[0] - 1.0) + x[0];
        });
        let n = 137;
        let xs: Vec<f64> = (0..n).map(|i| ((i * 37 + 11) % 19) as f64 / 19.0 - 0.5).collect();
        let config = RunConfig::new(n as u64, vec![0.0]).unwrap();
        let mut data = SliceStream::new(xs.clone(), 1).unwrap();
        let (mean, _) =
            run_sgd(&oracle, &mut data, &schedule(), &config, &TraceSpec::blocks(10)).unwrap();

        let mut theta = 0.0;
        let mut acc = 0.0;
        for (i, x) in xs.iter().enumerate() {
            let eta = schedule().step_size(i as u64 + 1);
            theta -= eta * (0.5 * (theta - 1.0) + x);
            acc += theta;
        }
        approx::assert_relative_eq!(mean[0], acc / n as f64, max_relative = 1e-14);
    }

    #[test]
    fn identity_privatization_matches_plain_sgd() {
        let plain = FnOracle::new(1, 1, |x: &[f64], theta: &[f64], out: &mut [f64]| {
            out[0] = theta[0] - x[0];
        });
        let xs: Vec<f64> = (0..200).map(|i| (i as f64 * 0.7).sin()).collect();
        let config = RunConfig::new(200, vec![1.0]).unwrap();

        let mut data = SliceStream::new(xs.clone(), 1).unwrap();
        let (a, trace_a) =
            run_sgd(&plain, &mut data, &schedule(), &config, &TraceSpec::blocks(14)).unwrap();

        let mut data = SliceStream::new(xs, 1).unwrap();
        let mut rng = substream(1, &[]);
        let (b, trace_b) = run_ldp_sgd(
            &plain,
            &mut data,
            &schedule(),
            &config,
            &TraceSpec::blocks(14),
            &mut rng,
        )
        .unwrap();
        assert_eq!(a, b);
        for j in 0..trace_a.num_blocks() {
            assert_eq!(trace_a.block_sum(j), trace_b.block_sum(j));
        }
    }

    #[test]
    fn minibatch_of_one_reduces_to_the_single_sample_runner() {
        let oracle = FnOracle::new(1, 1, |x: &[f64], theta: &[f64], out: &mut [f64]| {
            out[0] = theta[0] - x[0];
        });
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 1.3).cos()).collect();
        let config = RunConfig::new(100, vec![0.5]).unwrap();

        let mut data = SliceStream::new(xs.clone(), 1).unwrap();
        let (single, _) =
            run_sgd(&oracle, &mut data, &schedule(), &config, &TraceSpec::blocks(10)).unwrap();

        let mut data = SliceStream::new(xs, 1).unwrap();
        let mut rng = substream(2, &[]);
        let (batched, _) = run_minibatch(
            &oracle,
            &mut data,
            &schedule(),
            &config,
            &TraceSpec::blocks(10),
            &mut rng,
        )
        .unwrap();
        assert_eq!(single, batched);
    }

    #[test]
    fn minibatch_averages_the_batch_gradients() {
        let oracle = FnOracle::new(1, 1, |x: &[f64], _theta: &[f64], out: &mut [f64]| {
            out[0] = x[0];
        });
        let config =
            RunConfig::new(1, vec![0.0]).unwrap().with_batch_size(4).unwrap();
        let mut data = SliceStream::new(vec![1.0, 2.0, 3.0, 6.0], 1).unwrap();
        let mut rng = substream(3, &[]);
        let (mean, _) = run_minibatch(
            &oracle,
            &mut data,
            &schedule(),
            &config,
            &TraceSpec::blocks(1),
            &mut rng,
        )
        .unwrap();
        assert_eq!(mean, vec![-3.0]);
    }

    struct CountingOracle {
        plain: Cell<u64>,
        private: Cell<u64>,
        central: Cell<u64>,
        scale: f64,
    }

    impl CountingOracle {
        fn new(scale: f64) -> Self {
            Self { plain: Cell::new(0), private: Cell::new(0), central: Cell::new(0), scale }
        }
    }

    impl GradientOracle for CountingOracle {
        fn dim(&self) -> usize {
            1
        }

        fn sample_width(&self) -> usize {
            1
        }

        fn gradient(&self, _x: &[f64], _theta: &[f64], out: &mut [f64]) -> Result<()> {
            self.plain.set(self.plain.get() + 1);
            out[0] = 0.0;
            Ok(())
        }
    }

    impl PrivateGradientOracle for CountingOracle {
        fn budget(&self) -> Option<f64> {
            Some(1.0)
        }

        fn private_gradient(
            &self,
            _x: &[f64],
            _theta: &[f64],
            rng: &mut dyn RngCore,
            out: &mut [f64],
        ) -> Result<()> {
            self.private.set(self.private.get() + 1);
            out[0] = laplace_noise(self.scale, rng);
            Ok(())
        }

        fn central_noise(
            &self,
            batch_size: usize,
            rng: &mut dyn RngCore,
            out: &mut [f64],
        ) -> Result<()> {
            self.central.set(self.central.get() + 1);
            out[0] = laplace_noise(self.scale, rng) / batch_size as f64;
            Ok(())
        }
    }

    #[test]
    fn noise_draw_counts_match_the_privacy_mode() {
        let steps = 12;
        let batch = 5;
        let base = RunConfig::new(steps, vec![0.0]).unwrap().with_batch_size(batch).unwrap();

        let oracle = CountingOracle::new(1.0);
        let mut data = zeros_stream((steps as usize) * batch);
        let mut rng = substream(4, &[]);
        let config = base.clone().with_privacy_mode(PrivacyMode::LocalDp);
        run_minibatch(&oracle, &mut data, &schedule(), &config, &TraceSpec::blocks(3), &mut rng)
            .unwrap();
        assert_eq!(oracle.private.get(), steps * batch as u64);
        assert_eq!(oracle.central.get(), 0);

        let oracle = CountingOracle::new(1.0);
        let mut data = zeros_stream((steps as usize) * batch);
        let config = base.with_privacy_mode(PrivacyMode::CentralDp);
        run_minibatch(&oracle, &mut data, &schedule(), &config, &TraceSpec::blocks(3), &mut rng)
            .unwrap();
        assert_eq!(oracle.central.get(), steps);
        assert_eq!(oracle.plain.get(), steps * batch as u64);
    }

    #[test]
    fn central_noise_variance_is_batch_size_smaller() {
        // Both modes inject mean-zero Laplace noise around a zero gradient;
        // central adds one draw / s per step, local averages s draws. The
        // per-step update variances are 2(b/s)^2 and 2b^2/s: ratio 1/s.
        let batch = 5;
        let steps = 40_000u64;
        let scale = 1.0;
        let mut local_var = 0.0;
        let mut central_var = 0.0;
        let mut rng = substream(5, &[]);
        for _ in 0..steps {
            let mut acc = 0.0;
            for _ in 0..batch {
                acc += laplace_noise(scale, &mut rng);
            }
            let local = acc / batch as f64;
            local_var += local * local;
            let central = laplace_noise(scale, &mut rng) / batch as f64;
            central_var += central * central;
        }
        let ratio = central_var / local_var;
        let expected = 1.0 / batch as f64;
        assert!(
            (ratio - expected).abs() < 0.05 * expected,
            "variance ratio {ratio} vs {expected}"
        );
    }

    #[test]
    fn exhausted_stream_reports_the_failing_iteration() {
        let oracle = FnOracle::new(1, 1, |_x, _theta: &[f64], out: &mut [f64]| out.fill(0.0));
        let config = RunConfig::new(5, vec![0.0]).unwrap();
        let mut data = zeros_stream(3);
        let err = run_sgd(&oracle, &mut data, &schedule(), &config, &TraceSpec::blocks(1))
            .unwrap_err();
        assert!(matches!(err, Error::DataExhausted { iteration: 4 }));
    }

    #[test]
    fn non_finite_gradient_reports_the_failing_iteration() {
        let oracle = FnOracle::new(1, 1, |x: &[f64], _theta: &[f64], out: &mut [f64]| {
            out[0] = if x[0] > 1.5 { f64::NAN } else { 0.0 };
        });
        let config = RunConfig::new(4, vec![0.0]).unwrap();
        let mut data = SliceStream::new(vec![0.0, 2.0, 0.0, 0.0], 1).unwrap();
        let err = run_sgd(&oracle, &mut data, &schedule(), &config, &TraceSpec::blocks(1))
            .unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { iteration: 2 }));
    }

    struct BadBudget;

    impl GradientOracle for BadBudget {
        fn dim(&self) -> usize {
            1
        }

        fn sample_width(&self) -> usize {
            1
        }

        fn gradient(&self, _x: &[f64], _theta: &[f64], out: &mut [f64]) -> Result<()> {
            out[0] = 0.0;
            Ok(())
        }
    }

    impl PrivateGradientOracle for BadBudget {
        fn budget(&self) -> Option<f64> {
            Some(0.0)
        }

        fn private_gradient(
            &self,
            _x: &[f64],
            _theta: &[f64],
            _rng: &mut dyn RngCore,
            out: &mut [f64],
        ) -> Result<()> {
            out[0] = 0.0;
            Ok(())
        }
    }

    #[test]
    fn non_positive_budget_is_rejected() {
        let config = RunConfig::new(2, vec![0.0]).unwrap();
        let mut data = zeros_stream(2);
        let mut rng = substream(6, &[]);
        let err = run_ldp_sgd(
            &BadBudget,
            &mut data,
            &schedule(),
            &config,
            &TraceSpec::blocks(1),
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn config_and_shape_validation() {
        assert!(RunConfig::new(0, vec![0.0]).is_err());
        assert!(RunConfig::new(1, vec![]).is_err());
        assert!(RunConfig::new(1, vec![f64::NAN]).is_err());
        assert!(RunConfig::new(1, vec![0.0]).unwrap().with_batch_size(0).is_err());

        let oracle = FnOracle::new(2, 1, |_x, _theta: &[f64], out: &mut [f64]| out.fill(0.0));
        let config = RunConfig::new(1, vec![0.0]).unwrap();
        let mut data = zeros_stream(1);
        assert!(matches!(
            run_sgd(&oracle, &mut data, &schedule(), &config, &TraceSpec::blocks(1)),
            Err(Error::DimensionMismatch(_))
        ));

        let oracle = FnOracle::new(1, 3, |_x, _theta: &[f64], out: &mut [f64]| out.fill(0.0));
        let mut data = zeros_stream(1);
        assert!(matches!(
            run_sgd(&oracle, &mut data, &schedule(), &config, &TraceSpec::blocks(1)),
            Err(Error::DimensionMismatch(_))
        ));

        let oracle = FnOracle::new(1, 1, |_x, _theta: &[f64], out: &mut [f64]| out.fill(0.0));
        let batched = config.clone().with_batch_size(2).unwrap();
        let mut data = zeros_stream(4);
        assert!(run_sgd(&oracle, &mut data, &schedule(), &batched, &TraceSpec::blocks(1)).is_err());
        let private = config.with_privacy_mode(PrivacyMode::LocalDp);
        let mut data = zeros_stream(1);
        assert!(run_sgd(&oracle, &mut data, &schedule(), &private, &TraceSpec::blocks(1)).is_err());
    }
}
