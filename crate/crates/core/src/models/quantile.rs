//! Quantile estimation: the subgradient of the check loss, its randomized
//! response privatization, and the closed-form asymptotic covariance.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::AsymptoticCov;
use crate::data::SampleStream;
use crate::error::{Error, Result};
use crate::privacy::{PrivacyParams, RandomizedResponse};
use crate::sgd::{GradientOracle, PrivateGradientOracle};

/// Check-loss subgradient −tau + 1{x ≤ theta}, with a closed boundary.
pub fn quantile_gradient(x: f64, theta: f64, tau: f64) -> f64 {
    if x <= theta {
        1.0 - tau
    } else {
        -tau
    }
}

/// The gradient with its indicator passed through randomized response and
/// debiased, so its conditional mean given x is the clean gradient.
pub fn quantile_private_gradient<R: Rng + ?Sized>(
    x: f64,
    theta: f64,
    tau: f64,
    privacy_epsilon: f64,
    rng: &mut R,
) -> Result<f64> {
    let rr = RandomizedResponse::new(PrivacyParams::new(privacy_epsilon)?);
    let noisy = rr.randomize(x <= theta, rng);
    Ok(rr.debias(noisy)? - tau)
}

/// Variance added by the debiased randomized response:
/// p(1−p)/(2p−1)² = e^eps/(e^eps−1)².
pub fn quantile_s_ldp(privacy_epsilon: f64) -> f64 {
    let p = RandomizedResponse::new(
        PrivacyParams::new(privacy_epsilon).expect("caller validates the budget"),
    )
    .keep_probability();
    p * (1.0 - p) / ((2.0 * p - 1.0) * (2.0 * p - 1.0))
}

/// Covariance (S_SGD + S_LDP)/density² with S_SGD = tau(1−tau); `budget`
/// `None` drops the privacy term.
pub fn closed_form_sigma_quantile(
    tau: f64,
    budget: Option<f64>,
    density_at_quantile: f64,
) -> Result<AsymptoticCov> {
    if !(0.0..1.0).contains(&tau) || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!("quantile level must lie in (0,1), got {tau}")));
    }
    if !density_at_quantile.is_finite() || density_at_quantile <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "density at the quantile must be positive, got {density_at_quantile}"
        )));
    }
    let s_ldp = match budget {
        Some(eps) => {
            PrivacyParams::new(eps)?;
            quantile_s_ldp(eps)
        }
        None => 0.0,
    };
    AsymptoticCov::from_components(
        DMatrix::from_element(1, 1, density_at_quantile),
        DMatrix::from_element(1, 1, tau * (1.0 - tau)),
        DMatrix::from_element(1, 1, s_ldp),
    )
}

/// A target quantile: the level tau, the true quantile of the data law,
/// and the data density there.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileModel {
    tau: f64,
    x_tau: f64,
    density_at_quantile: f64,
}

impl QuantileModel {
    /// The built-in data law: X ~ N(0,1).
    pub fn standard_normal(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level must lie in (0,1), got {tau}"
            )));
        }
        let normal = Normal::standard();
        let x_tau = normal.inverse_cdf(tau);
        Ok(Self { tau, x_tau, density_at_quantile: normal.pdf(x_tau) })
    }

    /// A custom data law, described by its tau-quantile and density there.
    pub fn with_target(tau: f64, x_tau: f64, density_at_quantile: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level must lie in (0,1), got {tau}"
            )));
        }
        if !x_tau.is_finite() {
            return Err(Error::InvalidParameter(format!("quantile target must be finite, got {x_tau}")));
        }
        if !density_at_quantile.is_finite() || density_at_quantile <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "density at the quantile must be positive, got {density_at_quantile}"
            )));
        }
        Ok(Self { tau, x_tau, density_at_quantile })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// The true parameter theta*.
    pub fn x_tau(&self) -> f64 {
        self.x_tau
    }

    pub fn density_at_quantile(&self) -> f64 {
        self.density_at_quantile
    }

    pub fn asymptotic_cov(&self, budget: Option<f64>) -> Result<AsymptoticCov> {
        closed_form_sigma_quantile(self.tau, budget, self.density_at_quantile)
    }
}

/// Gradient oracle for a [`QuantileModel`]; `budget` `None` disables the
/// randomization entirely.
#[derive(Debug, Clone)]
pub struct QuantileOracle {
    tau: f64,
    privatizer: Option<Privatizer>,
}

#[derive(Debug, Clone, Copy)]
struct Privatizer {
    rr: RandomizedResponse,
    debias_one: f64,
    debias_zero: f64,
}

impl QuantileOracle {
    pub fn new(model: &QuantileModel, budget: Option<f64>) -> Result<Self> {
        let privatizer = match budget {
            Some(eps) => {
                let rr = RandomizedResponse::new(PrivacyParams::new(eps)?);
                Some(Privatizer {
                    rr,
                    debias_one: rr.debias(true)?,
                    debias_zero: rr.debias(false)?,
                })
            }
            None => None,
        };
        Ok(Self { tau: model.tau(), privatizer })
    }
}

impl GradientOracle for QuantileOracle {
    fn dim(&self) -> usize {
        1
    }

    fn sample_width(&self) -> usize {
        1
    }

    fn gradient(&self, sample: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = quantile_gradient(sample[0], theta[0], self.tau);
        Ok(())
    }
}

impl PrivateGradientOracle for QuantileOracle {
    fn budget(&self) -> Option<f64> {
        self.privatizer.map(|p| p.rr.epsilon())
    }

    fn private_gradient(
        &self,
        sample: &[f64],
        theta: &[f64],
        rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()> {
        match &self.privatizer {
            Some(p) => {
                let noisy = p.rr.randomize(sample[0] <= theta[0], rng);
                out[0] = (if noisy { p.debias_one } else { p.debias_zero }) - self.tau;
                Ok(())
            }
            None => self.gradient(sample, theta, out),
        }
    }
}

/// Endless stream of i.i.d. N(0,1) rows of width one.
pub struct StandardNormalStream<R> {
    rng: R,
}

impl<R: Rng> StandardNormalStream<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }
}

impl<R: Rng> SampleStream for StandardNormalStream<R> {
    fn width(&self) -> usize {
        1
    }

    fn next_row(&mut self, out: &mut [f64]) -> Result<bool> {
        out[0] = self.rng.sample(StandardNormal);
        Ok(true)
    }
}
