//! Experiment resolution and replication fan-out.
//!
//! Replication `r` of an experiment draws its data from
//! `substream(master_seed, [r, STREAM_DATA])`, its privatization noise from
//! `substream(master_seed, [r, STREAM_PRIVACY])`, and seeds its bootstrap
//! with `fold_seed(master_seed, [r, STREAM_BOOTSTRAP])`, so results do not
//! depend on how replications are scheduled across workers.

use std::time::{Duration, Instant};

use ldp_sgd::bootstrap::{
    batch_mean_ci, block_layout, bootstrap_confidence_interval, BlockLayout, BlockSpec,
    BootstrapConfig, ConfidenceInterval,
};
use ldp_sgd::data::SampleStream;
use ldp_sgd::error::{Error, Result};
use ldp_sgd::models::{
    QuantRegModel, QuantRegOracle, QuantRegStream, QuantileModel, QuantileOracle,
    StandardNormalStream,
};
use ldp_sgd::rng::{fold_seed, substream, ChaCha8Rng, STREAM_BOOTSTRAP, STREAM_DATA, STREAM_PRIVACY};
use ldp_sgd::schedule::LearningRateSchedule;
use ldp_sgd::sgd::{run_ldp_sgd, PrivateGradientOracle, RunConfig};
use ldp_sgd::trace::{IterateTrace, TraceSpec};
use rayon::prelude::*;

use crate::report::{Report, ReplicationRow};
use crate::spec::{ExperimentSpec, Method, ModelSpec};

/// A model spec turned into runnable objects.
pub enum ModelInstance {
    Quantile(QuantileModel),
    Quantreg(QuantRegModel),
}

impl ModelInstance {
    pub fn build(spec: &ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Quantile { tau, .. } => {
                Ok(Self::Quantile(QuantileModel::standard_normal(*tau)?))
            }
            ModelSpec::Quantreg { tau, beta_star } => {
                Ok(Self::Quantreg(QuantRegModel::truncated_normal(*tau, beta_star.clone())?))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Quantile(_) => 1,
            Self::Quantreg(m) => m.dim(),
        }
    }

    /// The estimand the coverage check targets.
    pub fn theta_star(&self) -> Vec<f64> {
        match self {
            Self::Quantile(m) => vec![m.x_tau()],
            Self::Quantreg(m) => m.beta_star().to_vec(),
        }
    }

    pub fn oracle(&self, budget: Option<f64>) -> Result<Box<dyn PrivateGradientOracle>> {
        Ok(match self {
            Self::Quantile(m) => Box::new(QuantileOracle::new(m, budget)?),
            Self::Quantreg(m) => Box::new(QuantRegOracle::new(m, budget)?),
        })
    }

    pub fn stream(&self, rng: ChaCha8Rng) -> Box<dyn SampleStream> {
        match self {
            Self::Quantile(_) => Box::new(StandardNormalStream::new(rng)),
            Self::Quantreg(m) => Box::new(QuantRegStream::new(m, rng)),
        }
    }
}

/// One replication's estimate, interval, and coverage outcome.
#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub replicate: u64,
    pub theta_bar: Vec<f64>,
    pub ci: ConfidenceInterval,
    pub covered: Vec<bool>,
    pub length: Vec<f64>,
    /// In-memory diagnostics only; never serialized, so reports stay
    /// byte-identical across machines and worker counts.
    pub wall_time: Duration,
}

impl ReplicationResult {
    fn rows(&self) -> impl Iterator<Item = ReplicationRow> + '_ {
        (0..self.theta_bar.len()).map(move |coord| ReplicationRow {
            replicate: self.replicate,
            coord,
            theta_bar: self.theta_bar[coord],
            lower: self.ci.lower[coord],
            upper: self.ci.upper[coord],
            covered: self.covered[coord],
            length: self.length[coord],
        })
    }
}

/// One point of a trajectory export.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub iteration: u64,
    pub method: Method,
    pub coord: usize,
    pub theta_bar: f64,
    pub lower: f64,
    pub upper: f64,
}

/// A validated spec plus the resolved objects shared by all replications.
pub struct Experiment {
    spec: ExperimentSpec,
    model: ModelInstance,
    schedule: LearningRateSchedule,
    layout: BlockLayout,
    theta0: Vec<f64>,
    theta_star: Vec<f64>,
}

impl Experiment {
    pub fn new(spec: ExperimentSpec) -> Result<Self> {
        if spec.replications == 0 {
            return Err(Error::InvalidParameter("replication count must be at least 1".into()));
        }
        let model = ModelInstance::build(&spec.model)?;
        let schedule = LearningRateSchedule::new(spec.schedule.c, spec.schedule.gamma)?;
        let layout = block_layout(spec.n, &spec.bootstrap.block, Some(spec.schedule.gamma))?;
        let theta0 = match &spec.theta0 {
            Some(t) => {
                if t.len() != model.dim() {
                    return Err(Error::DimensionMismatch(format!(
                        "theta0 has {} coordinates, model needs {}",
                        t.len(),
                        model.dim()
                    )));
                }
                t.clone()
            }
            None => vec![0.0; model.dim()],
        };
        // Surfaces budget and alpha validation errors before any work runs.
        model.oracle(spec.privacy_epsilon)?;
        BootstrapConfig::new(
            spec.bootstrap.replicates,
            spec.bootstrap.block,
            spec.bootstrap.alpha,
            0,
        )?;
        let theta_star = model.theta_star();
        Ok(Self { spec, model, schedule, layout, theta0, theta_star })
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    /// Present when the step-size decay is too slow for the block growth.
    pub fn schedule_warning(&self) -> Option<&str> {
        self.layout.schedule_warning.as_deref()
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    fn sgd_pass(&self, replicate: u64, n: u64, block_length: u64) -> Result<(Vec<f64>, IterateTrace)> {
        let oracle = self.model.oracle(self.spec.privacy_epsilon)?;
        let mut data =
            self.model.stream(substream(self.spec.master_seed, &[replicate, STREAM_DATA]));
        let mut privacy_rng = substream(self.spec.master_seed, &[replicate, STREAM_PRIVACY]);
        let config = RunConfig::new(n, self.theta0.clone())?;
        let trace_spec = TraceSpec::blocks(block_length as usize);
        run_ldp_sgd(&*oracle, &mut *data, &self.schedule, &config, &trace_spec, &mut privacy_rng)
    }

    fn interval(
        &self,
        method: Method,
        replicate: u64,
        block_length: u64,
        theta_bar: &[f64],
        trace: &IterateTrace,
    ) -> Result<ConfidenceInterval> {
        match method {
            Method::BlockBootstrap => {
                let config = BootstrapConfig::new(
                    self.spec.bootstrap.replicates,
                    BlockSpec::Length(block_length),
                    self.spec.bootstrap.alpha,
                    fold_seed(self.spec.master_seed, &[replicate, STREAM_BOOTSTRAP]),
                )?
                .with_multiplier(self.spec.bootstrap.multiplier);
                Ok(bootstrap_confidence_interval(trace, theta_bar, &config)?.0)
            }
            Method::BatchMean => batch_mean_ci(trace, self.spec.bootstrap.alpha),
        }
    }

    fn outcome(
        &self,
        replicate: u64,
        theta_bar: Vec<f64>,
        ci: ConfidenceInterval,
        start: Instant,
    ) -> ReplicationResult {
        let covered: Vec<bool> =
            (0..ci.dim()).map(|k| ci.contains(k, self.theta_star[k])).collect();
        let length: Vec<f64> = (0..ci.dim()).map(|k| ci.length(k)).collect();
        ReplicationResult {
            replicate,
            theta_bar,
            ci,
            covered,
            length,
            wall_time: start.elapsed(),
        }
    }

    /// Runs replication `replicate` with the spec's method.
    pub fn run_replication(&self, replicate: u64) -> Result<ReplicationResult> {
        let start = Instant::now();
        let (theta_bar, trace) = self.sgd_pass(replicate, self.spec.n, self.layout.block_length)?;
        let ci = self.interval(
            self.spec.method,
            replicate,
            self.layout.block_length,
            &theta_bar,
            &trace,
        )?;
        Ok(self.outcome(replicate, theta_bar, ci, start))
    }

    /// Runs replication `replicate` once and prices both interval methods
    /// from the same trace.
    pub fn run_replication_both(
        &self,
        replicate: u64,
    ) -> Result<(ReplicationResult, ReplicationResult)> {
        let start = Instant::now();
        let (theta_bar, trace) = self.sgd_pass(replicate, self.spec.n, self.layout.block_length)?;
        let bb = self.interval(
            Method::BlockBootstrap,
            replicate,
            self.layout.block_length,
            &theta_bar,
            &trace,
        )?;
        let bm =
            self.interval(Method::BatchMean, replicate, self.layout.block_length, &theta_bar, &trace)?;
        Ok((
            self.outcome(replicate, theta_bar.clone(), bb, start),
            self.outcome(replicate, theta_bar, bm, start),
        ))
    }

    /// All replications, merged in replication order. Any failure aborts
    /// the experiment.
    pub fn run(&self, workers: Option<usize>) -> Result<Report> {
        let results = with_pool(workers, || {
            (0..self.spec.replications)
                .into_par_iter()
                .map(|r| self.run_replication(r))
                .collect::<Result<Vec<_>>>()
        })??;
        Ok(Report::new(self.spec.clone(), collect_rows(&results)))
    }

    /// Both methods over shared SGD runs, as two reports.
    pub fn run_compare(&self, workers: Option<usize>) -> Result<(Report, Report)> {
        let results = with_pool(workers, || {
            (0..self.spec.replications)
                .into_par_iter()
                .map(|r| self.run_replication_both(r))
                .collect::<Result<Vec<_>>>()
        })??;
        let (bb, bm): (Vec<_>, Vec<_>) = results.into_iter().unzip();
        let mut bb_spec = self.spec.clone();
        bb_spec.method = Method::BlockBootstrap;
        let mut bm_spec = self.spec.clone();
        bm_spec.method = Method::BatchMean;
        Ok((
            Report::new(bb_spec, collect_rows(&bb)),
            Report::new(bm_spec, collect_rows(&bm)),
        ))
    }

    /// Replays replication 0 up to each checkpoint and prices both interval
    /// methods there, with block length `floor(k^beta)` capped at `k/2` so
    /// even the earliest checkpoints keep at least two blocks.
    pub fn trajectory(&self, checkpoints: &[u64]) -> Result<Vec<TrajectoryRow>> {
        if checkpoints.is_empty() {
            return Err(Error::InvalidParameter("checkpoint schedule is empty".into()));
        }
        let beta = match self.spec.bootstrap.block {
            BlockSpec::Exponent(b) => b,
            BlockSpec::Length(l) => (l as f64).ln() / (self.spec.n as f64).ln(),
        };
        for &k in checkpoints {
            if k > self.spec.n {
                return Err(Error::InvalidParameter(format!(
                    "checkpoint {k} lies beyond the run length {}",
                    self.spec.n
                )));
            }
            if k < 4 {
                return Err(Error::InvalidParameter(format!(
                    "checkpoint {k} is too early to form two blocks"
                )));
            }
        }
        let mut out = Vec::new();
        for &k in checkpoints {
            let raw = ((k as f64).powf(beta) + 1e-9).floor() as u64;
            let block_length = raw.clamp(1, k / 2);
            let (theta_bar, trace) = self.sgd_pass(0, k, block_length)?;
            for method in [Method::BlockBootstrap, Method::BatchMean] {
                let ci = self.interval(method, 0, block_length, &theta_bar, &trace)?;
                for (coord, &center) in theta_bar.iter().enumerate() {
                    out.push(TrajectoryRow {
                        iteration: k,
                        method,
                        coord,
                        theta_bar: center,
                        lower: ci.lower[coord],
                        upper: ci.upper[coord],
                    });
                }
            }
        }
        Ok(out)
    }
}

fn collect_rows(results: &[ReplicationResult]) -> Vec<ReplicationRow> {
    results.iter().flat_map(|res| res.rows()).collect()
}

/// Runs `f` on a dedicated pool of `workers` threads, or inline on the
/// global pool when no count is forced.
fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            if w == 0 {
                return Err(Error::InvalidParameter("worker count must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build().map_err(|e| {
                Error::InvalidParameter(format!("cannot build a {w}-thread pool: {e}"))
            })?;
            Ok(pool.install(f))
        }
    }
}

/// Renders trajectory rows as CSV.
pub fn trajectory_csv(rows: &[TrajectoryRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["iteration", "method", "coord", "theta_bar", "lower", "upper"])?;
    for row in rows {
        writer.write_record([
            row.iteration.to_string(),
            row.method.label().to_string(),
            row.coord.to_string(),
            format!("{}", row.theta_bar),
            format!("{}", row.lower),
            format!("{}", row.upper),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
