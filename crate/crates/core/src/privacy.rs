//! Pure epsilon-LDP building blocks: Laplace noise, binary randomized
//! response with its unbiased decoder, and a composition ledger.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated per-datum privacy budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    epsilon: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "privacy budget must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// One draw of Laplace(0, `scale`) noise.
///
/// Sampled by inverting the CDF on a single uniform draw, so the mapping
/// from RNG stream position to noise value is fixed and platform-stable.
pub fn laplace_noise<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    let centered: f64 = rng.random::<f64>() - 0.5;
    // centered = -0.5 has probability 2^-53; clamp away the resulting ln(0).
    let interior = (1.0 - 2.0 * centered.abs()).max(f64::MIN_POSITIVE);
    -scale * centered.signum() * interior.ln()
}

/// Additive Laplace mechanism calibrated to an L1 sensitivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceMechanism {
    sensitivity: f64,
    epsilon: f64,
    scale: f64,
}

impl LaplaceMechanism {
    pub fn new(sensitivity: f64, params: PrivacyParams) -> Result<Self> {
        if !sensitivity.is_finite() || sensitivity <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sensitivity must be positive and finite, got {sensitivity}"
            )));
        }
        Ok(Self {
            sensitivity,
            epsilon: params.epsilon(),
            scale: sensitivity / params.epsilon(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    /// Noise scale `sensitivity / epsilon`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        laplace_noise(self.scale, rng)
    }

    pub fn privatize<R: Rng + ?Sized>(&self, value: f64, rng: &mut R) -> Result<f64> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cannot privatize non-finite value {value}"
            )));
        }
        Ok(value + self.sample(rng))
    }

    /// Adds independent noise to each coordinate. The mechanism's
    /// sensitivity must cover the L1 sensitivity of the whole vector.
    pub fn privatize_slice<R: Rng + ?Sized>(&self, values: &[f64], rng: &mut R, out: &mut [f64]) -> Result<()> {
        if values.len() != out.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} inputs vs {} outputs",
                values.len(),
                out.len()
            )));
        }
        for (slot, &value) in out.iter_mut().zip(values) {
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "cannot privatize non-finite value {value}"
                )));
            }
            *slot = value + self.sample(rng);
        }
        Ok(())
    }
}

/// Convenience wrapper: privatize a gradient vector with L1 sensitivity
/// `l1_sensitivity` under budget `params`.
pub fn privatize_vector_laplace<R: Rng + ?Sized>(
    values: &[f64],
    l1_sensitivity: f64,
    params: PrivacyParams,
    rng: &mut R,
    out: &mut [f64],
) -> Result<()> {
    LaplaceMechanism::new(l1_sensitivity, params)?.privatize_slice(values, rng, out)
}

/// Binary randomized response: keep the bit with probability
/// `e^eps / (1 + e^eps)`, flip it otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedResponse {
    epsilon: f64,
    keep: f64,
    flip: f64,
}

/// Budgets below this make the debiasing denominator `2p - 1` too small to
/// divide by safely.
pub const MIN_DEBIAS_EPSILON: f64 = 1e-6;

impl RandomizedResponse {
    pub fn new(params: PrivacyParams) -> Self {
        let epsilon = params.epsilon();
        Self {
            epsilon,
            keep: 1.0 / (1.0 + (-epsilon).exp()),
            flip: 1.0 / (1.0 + epsilon.exp()),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Probability of reporting the true bit.
    pub fn keep_probability(&self) -> f64 {
        self.keep
    }

    /// Probability of reporting the flipped bit.
    pub fn flip_probability(&self) -> f64 {
        self.flip
    }

    /// Consumes exactly one uniform draw per call.
    pub fn randomize<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> bool {
        if rng.random::<f64>() < self.keep {
            bit
        } else {
            !bit
        }
    }

    /// Unbiased decoder `(bit - (1 - p)) / (2p - 1)` of a randomized bit:
    /// averaging it over the response distribution recovers the true bit.
    pub fn debias(&self, noisy_bit: bool) -> Result<f64> {
        if self.epsilon < MIN_DEBIAS_EPSILON {
            return Err(Error::InvalidParameter(format!(
                "epsilon {} is below {MIN_DEBIAS_EPSILON}; the debiasing denominator underflows",
                self.epsilon
            )));
        }
        let denom = self.keep - self.flip;
        Ok((if noisy_bit { self.keep } else { -self.flip }) / denom)
    }
}

/// How a mechanism's budget combines with what is already recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    /// Same data touched again: budgets add.
    Sequential,
    /// Disjoint data: the budget is the maximum.
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub mechanism: String,
    pub epsilon: f64,
    /// Attests that this mechanism ran on data disjoint from every other
    /// entry; required for parallel composition.
    pub disjoint: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetTotals {
    /// Worst case if all entries touched the same data.
    pub sequential: f64,
    /// Budget when all entries are disjoint.
    pub parallel: f64,
}

/// Append-only record of the mechanisms applied during a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    entries: Vec<LedgerEntry>,
}

impl BudgetLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one mechanism application and returns the updated totals.
    /// Parallel composition is refused unless the entry is flagged disjoint.
    pub fn compose(&mut self, entry: LedgerEntry, mode: Composition) -> Result<BudgetTotals> {
        if !entry.epsilon.is_finite() || entry.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ledger entry \"{}\" has invalid budget {}",
                entry.mechanism, entry.epsilon
            )));
        }
        if mode == Composition::Parallel && !entry.disjoint {
            return Err(Error::NotDisjoint(entry.mechanism));
        }
        self.entries.push(entry);
        Ok(self.totals())
    }

    /// Totals are order-free functions of the recorded entries; the
    /// sequential sum runs over sorted budgets so reordered ledgers agree
    /// to the last bit.
    pub fn totals(&self) -> BudgetTotals {
        let mut budgets: Vec<f64> = self.entries.iter().map(|e| e.epsilon).collect();
        budgets.sort_by(f64::total_cmp);
        BudgetTotals {
            sequential: budgets.iter().sum(),
            parallel: budgets.last().copied().unwrap_or(0.0),
        }
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }
}
