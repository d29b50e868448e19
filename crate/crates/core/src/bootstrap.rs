//! Multiplier block bootstrap over a streaming iterate trace, plus the
//! batch-mean baseline.
//!
//! A replicate perturbs the centered block sums with i.i.d. mean-zero,
//! variance-one multipliers; quantiles of the replicates translate the
//! averaged iterate into a confidence interval. Cost per replicate is
//! O(m·d), never touching the n raw iterates again.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::trace::IterateTrace;

/// Bounded multiplier distributions with mean zero and variance one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierLaw {
    /// Uniform on (-sqrt(3), sqrt(3)).
    #[default]
    UniformSqrt3,
    /// Plus or minus one with equal probability.
    Rademacher,
}

impl MultiplierLaw {
    /// Consumes exactly one uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match self {
            Self::UniformSqrt3 => 3.0_f64.sqrt() * (2.0 * u - 1.0),
            Self::Rademacher => {
                if u < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// Block geometry, either grown with the run length or pinned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSpec {
    /// Block length floor(n^exponent).
    Exponent(f64),
    /// Explicit block length.
    Length(u64),
}

/// Resolved block geometry for a run of length n.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLayout {
    pub block_length: u64,
    pub num_blocks: u64,
    /// Set when the step-size exponent is too large for this block growth
    /// rate, which breaks the asymptotics behind the bootstrap.
    pub schedule_warning: Option<String>,
}

/// Resolves (l, m) for a run of length `n` and flags schedules whose decay
/// exponent gamma is not below the block exponent beta.
pub fn block_layout(n: u64, block: &BlockSpec, schedule_gamma: Option<f64>) -> Result<BlockLayout> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "run length {n} is too short to form two blocks of length at least 2"
        )));
    }
    let (block_length, beta) = match *block {
        BlockSpec::Exponent(beta) => {
            if !(0.0..1.0).contains(&beta) || beta <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "block exponent must lie in (0, 1), got {beta}"
                )));
            }
            // The 1e-9 nudge keeps floor() stable when n^beta lands on an
            // integer up to rounding, e.g. 16^0.75.
            let l = ((n as f64).powf(beta) + 1e-9).floor() as u64;
            (l.max(1), beta)
        }
        BlockSpec::Length(l) => {
            if l == 0 || l > n {
                return Err(Error::InvalidParameter(format!(
                    "block length {l} must lie in [1, {n}]"
                )));
            }
            ((l), (l as f64).ln() / (n as f64).ln())
        }
    };
    let num_blocks = n / block_length;
    if num_blocks < 2 {
        return Err(Error::InvalidParameter(format!(
            "block length {block_length} leaves {num_blocks} block(s) for n = {n}; need at least 2"
        )));
    }
    let schedule_warning = schedule_gamma.and_then(|gamma| {
        (gamma >= beta).then(|| {
            format!(
                "step-size exponent {gamma} is not below the block exponent {beta:.4}; \
                 the block sums grow too slowly for valid intervals"
            )
        })
    });
    Ok(BlockLayout { block_length, num_blocks, schedule_warning })
}

/// Bootstrap tuning: replicate count B, block geometry, tail level alpha,
/// multiplier law, and the seed of the multiplier stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    replicates: usize,
    block: BlockSpec,
    alpha: f64,
    multiplier: MultiplierLaw,
    seed: u64,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, block: BlockSpec, alpha: f64, seed: u64) -> Result<Self> {
        if replicates < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 bootstrap replicates, got {replicates}"
            )));
        }
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "tail level alpha must lie in (0, 0.5), got {alpha}"
            )));
        }
        Ok(Self { replicates, block, alpha, multiplier: MultiplierLaw::default(), seed })
    }

    pub fn with_multiplier(mut self, law: MultiplierLaw) -> Self {
        self.multiplier = law;
        self
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn block(&self) -> &BlockSpec {
        &self.block
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn multiplier(&self) -> MultiplierLaw {
        self.multiplier
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// The B bootstrap perturbations, stored flat as B rows of dimension d.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDraws {
    dim: usize,
    values: Vec<f64>,
}

impl BootstrapDraws {
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn replicate(&self, b: usize) -> &[f64] {
        &self.values[b * self.dim..(b + 1) * self.dim]
    }

    /// Writes rows `replicate,coord,value` with round-trippable decimals.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["replicate", "coord", "value"])?;
        for b in 0..self.len() {
            for (k, v) in self.replicate(b).iter().enumerate() {
                w.write_record([b.to_string(), k.to_string(), format!("{v}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn check_finalized(trace: &IterateTrace) -> Result<()> {
    if !trace.is_complete() {
        return Err(Error::InvalidParameter(format!(
            "trace holds {} of {} iterates; resampling needs the finished run",
            trace.len(),
            trace.expected_len()
        )));
    }
    Ok(())
}

/// One bootstrap perturbation from the finalized trace:
/// out = (1/(m·l)) Σ_j multipliers[j] · (block_sum[j] − l·theta_bar).
///
/// Algebraically equal to the same weighted sum over the raw centered
/// iterates, but evaluated in O(m·d).
pub fn bootstrap_replicate(
    trace: &IterateTrace,
    theta_bar: &[f64],
    multipliers: &[f64],
    out: &mut [f64],
) -> Result<()> {
    check_finalized(trace)?;
    let d = trace.dim();
    let m = trace.num_blocks();
    if theta_bar.len() != d || out.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "trace dimension {d} vs center {} and output {}",
            theta_bar.len(),
            out.len()
        )));
    }
    if multipliers.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} multipliers for {m} blocks",
            multipliers.len()
        )));
    }
    let l = trace.block_length() as f64;
    let norm = 1.0 / (m as f64 * l);
    out.fill(0.0);
    for (j, &w) in multipliers.iter().enumerate() {
        let sums = trace.block_sum(j);
        for k in 0..d {
            out[k] += w * (sums[k] - l * theta_bar[k]);
        }
    }
    for v in out.iter_mut() {
        *v *= norm;
    }
    Ok(())
}

/// Runs B replicates with fresh multipliers each. Replicate b draws its
/// multipliers from a substream keyed by (seed, b), so the output is
/// independent of evaluation order and worker count.
pub fn run_bootstrap(
    trace: &IterateTrace,
    theta_bar: &[f64],
    config: &BootstrapConfig,
) -> Result<BootstrapDraws> {
    check_finalized(trace)?;
    let layout = block_layout(trace.expected_len(), config.block(), None)?;
    if layout.block_length != trace.block_length() as u64 {
        return Err(Error::InvalidParameter(format!(
            "configured block length {} does not match the trace's {}",
            layout.block_length,
            trace.block_length()
        )));
    }
    let d = trace.dim();
    let m = trace.num_blocks();
    let b_total = config.replicates();
    let mut values = vec![0.0; b_total * d];
    let mut multipliers = vec![0.0; m];
    for b in 0..b_total {
        let mut rng = substream(config.seed(), &[b as u64]);
        for slot in multipliers.iter_mut() {
            *slot = config.multiplier().sample(&mut rng);
        }
        let out = &mut values[b * d..(b + 1) * d];
        bootstrap_replicate(trace, theta_bar, &multipliers, out)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteDraw { replicate: b });
        }
    }
    Ok(BootstrapDraws { dim: d, values })
}

/// Per-coordinate order statistic at rank ceil(level · B).
pub fn empirical_quantile(draws: &BootstrapDraws, level: f64) -> Result<Vec<f64>> {
    if !level.is_finite() || level <= 0.0 || level >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie in (0, 1), got {level}"
        )));
    }
    let b_total = draws.len();
    if b_total < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 draws for a quantile, got {b_total}"
        )));
    }
    // level·B can land a hair above an integer (0.05 * 100 rounds up in
    // binary); the nudge keeps the rank at the intended order statistic.
    let rank = ((level * b_total as f64 - 1e-9).ceil() as usize).clamp(1, b_total);
    let mut column = vec![0.0; b_total];
    let mut out = vec![0.0; draws.dim()];
    for (k, slot) in out.iter_mut().enumerate() {
        for (b, cell) in column.iter_mut().enumerate() {
            *cell = draws.replicate(b)[k];
        }
        column.sort_by(f64::total_cmp);
        *slot = column[rank - 1];
    }
    Ok(out)
}

/// Per-coordinate interval endpoints with its nominal coverage level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Nominal coverage 1 − 2·alpha.
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn length(&self, coord: usize) -> f64 {
        self.upper[coord] - self.lower[coord]
    }

    pub fn contains(&self, coord: usize, value: f64) -> bool {
        self.lower[coord] <= value && value <= self.upper[coord]
    }
}

/// Shifts the center by the two tail quantiles:
/// [theta_bar + q_lo, theta_bar + q_hi] at level 1 − 2·alpha.
pub fn confidence_interval(
    theta_bar: &[f64],
    q_lo: &[f64],
    q_hi: &[f64],
    alpha: f64,
) -> Result<ConfidenceInterval> {
    if theta_bar.len() != q_lo.len() || theta_bar.len() != q_hi.len() {
        return Err(Error::DimensionMismatch(format!(
            "center dimension {} vs quantiles {} and {}",
            theta_bar.len(),
            q_lo.len(),
            q_hi.len()
        )));
    }
    let mut lower = Vec::with_capacity(theta_bar.len());
    let mut upper = Vec::with_capacity(theta_bar.len());
    for (coord, ((&t, &lo), &hi)) in theta_bar.iter().zip(q_lo).zip(q_hi).enumerate() {
        if lo > hi {
            return Err(Error::CrossedInterval { coord, lower: t + lo, upper: t + hi });
        }
        lower.push(t + lo);
        upper.push(t + hi);
    }
    Ok(ConfidenceInterval { lower, upper, level: 1.0 - 2.0 * alpha })
}

/// Full pipeline: replicates, tail quantiles, interval.
pub fn bootstrap_confidence_interval(
    trace: &IterateTrace,
    theta_bar: &[f64],
    config: &BootstrapConfig,
) -> Result<(ConfidenceInterval, BootstrapDraws)> {
    let draws = run_bootstrap(trace, theta_bar, config)?;
    let q_lo = empirical_quantile(&draws, config.alpha())?;
    let q_hi = empirical_quantile(&draws, 1.0 - config.alpha())?;
    let ci = confidence_interval(theta_bar, &q_lo, &q_hi, config.alpha())?;
    Ok((ci, draws))
}

/// Batch-mean covariance estimate from the block means:
/// (l/(m−1)) Σ_j (b̄_j − theta_bar)(b̄_j − theta_bar)^T.
pub fn batch_mean_covariance(trace: &IterateTrace) -> Result<DMatrix<f64>> {
    check_finalized(trace)?;
    let d = trace.dim();
    let m = trace.num_blocks();
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "batch-mean estimate needs at least 2 blocks, got {m}"
        )));
    }
    let l = trace.block_length() as f64;
    let theta_bar = trace.running_mean();
    let mut sigma = DMatrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for j in 0..m {
        let sums = trace.block_sum(j);
        for k in 0..d {
            centered[k] = sums[k] / l - theta_bar[k];
        }
        for r in 0..d {
            for c in 0..d {
                sigma[(r, c)] += centered[r] * centered[c];
            }
        }
    }
    sigma.scale_mut(l / (m as f64 - 1.0));
    Ok(sigma)
}

/// Gaussian baseline interval: theta_bar ± z_{1−alpha} sqrt(Σ̂_kk / n)
/// with Σ̂ the batch-mean covariance.
pub fn batch_mean_ci(trace: &IterateTrace, alpha: f64) -> Result<ConfidenceInterval> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "tail level alpha must lie in (0, 0.5), got {alpha}"
        )));
    }
    let sigma = batch_mean_covariance(trace)?;
    let z = Normal::standard().inverse_cdf(1.0 - alpha);
    let n = trace.len() as f64;
    let theta_bar = trace.running_mean();
    let mut lower = Vec::with_capacity(trace.dim());
    let mut upper = Vec::with_capacity(trace.dim());
    for k in 0..trace.dim() {
        let half = z * (sigma[(k, k)] / n).sqrt();
        lower.push(theta_bar[k] - half);
        upper.push(theta_bar[k] + half);
    }
    Ok(ConfidenceInterval { lower, upper, level: 1.0 - 2.0 * alpha })
}
