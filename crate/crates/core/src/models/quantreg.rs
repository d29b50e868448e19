//! Median regression on bounded covariates: the check-loss subgradient,
//! its Laplace privatization, the truncated-normal design generator, and
//! the closed-form asymptotic covariance.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use statrs::distribution::{Continuous, Normal};

use super::AsymptoticCov;
use crate::data::SampleStream;
use crate::error::{Error, Result};
use crate::privacy::{LaplaceMechanism, PrivacyParams};
use crate::sgd::{GradientOracle, PrivateGradientOracle};

/// Coordinate variance of N(0,1) conditioned on [−1, 1]:
/// 1 − 2φ(1)/(2Φ(1)−1).
pub const TRUNCATED_COORD_VARIANCE: f64 = 0.29112509477279314;

/// Check-loss subgradient (−tau + 1{y − x·beta ≤ 0}) · x.
pub fn quantreg_gradient(x: &[f64], y: f64, beta: &[f64], tau: f64, out: &mut [f64]) -> Result<()> {
    if x.len() != beta.len() || x.len() != out.len() {
        return Err(Error::DimensionMismatch(format!(
            "covariate dimension {} vs coefficients {} and output {}",
            x.len(),
            beta.len(),
            out.len()
        )));
    }
    let fitted: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
    let scalar = if y - fitted <= 0.0 { 1.0 - tau } else { -tau };
    for (slot, &xv) in out.iter_mut().zip(x) {
        *slot = scalar * xv;
    }
    Ok(())
}

/// Covariance Σ_X^{-1}(S_SGD + S_LDP)Σ_X^{-1}/density² with
/// S_SGD = tau(1−tau)Σ_X and S_LDP = 2·(2·max(tau,1−tau)·m·d/eps)²·I.
pub fn closed_form_sigma_quantreg(
    tau: f64,
    budget: Option<f64>,
    m_bound: f64,
    sigma_x: &DMatrix<f64>,
    density_at_zero: f64,
) -> Result<AsymptoticCov> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level must lie in (0,1), got {tau}")));
    }
    if !m_bound.is_finite() || m_bound <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "covariate bound must be positive, got {m_bound}"
        )));
    }
    if !density_at_zero.is_finite() || density_at_zero <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "error density at zero must be positive, got {density_at_zero}"
        )));
    }
    let d = sigma_x.nrows();
    if sigma_x.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "design second moment is {}x{}",
            d,
            sigma_x.ncols()
        )));
    }
    let s_ldp = match budget {
        Some(eps) => {
            PrivacyParams::new(eps)?;
            let scale = laplace_scale(tau, m_bound, d, eps);
            DMatrix::from_diagonal_element(d, d, 2.0 * scale * scale)
        }
        None => DMatrix::zeros(d, d),
    };
    AsymptoticCov::from_components(
        sigma_x * density_at_zero,
        sigma_x * (tau * (1.0 - tau)),
        s_ldp,
    )
}

/// Per-coordinate Laplace scale 2·max(tau, 1−tau)·m·d/eps.
fn laplace_scale(tau: f64, m_bound: f64, d: usize, eps: f64) -> f64 {
    2.0 * tau.max(1.0 - tau) * m_bound * d as f64 / eps
}

/// Median regression y = x·beta* + N(0,1) on the design
/// x = (1, x_1, .., x_{d−1}) with truncated standard normal coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantRegModel {
    tau: f64,
    beta_star: Vec<f64>,
    m_bound: f64,
    sigma_x: DMatrix<f64>,
    density_at_zero: f64,
}

impl QuantRegModel {
    /// The built-in design. Standard normal errors put their tau-quantile
    /// at zero only for tau = 1/2, so other levels are rejected: they
    /// would make beta* differ from the stated coefficients.
    pub fn truncated_normal(tau: f64, beta_star: Vec<f64>) -> Result<Self> {
        if tau != 0.5 {
            return Err(Error::InvalidParameter(format!(
                "standard normal errors center the median; level {tau} shifts the true intercept"
            )));
        }
        if beta_star.is_empty() {
            return Err(Error::InvalidParameter("coefficient vector must be non-empty".into()));
        }
        if let Some(bad) = beta_star.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("coefficient vector contains {bad}")));
        }
        let d = beta_star.len();
        let mut sigma_x = DMatrix::zeros(d, d);
        sigma_x[(0, 0)] = 1.0;
        for k in 1..d {
            sigma_x[(k, k)] = TRUNCATED_COORD_VARIANCE;
        }
        let density_at_zero = Normal::standard().pdf(0.0);
        Ok(Self { tau, beta_star, m_bound: 1.0, sigma_x, density_at_zero })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.beta_star.len()
    }

    /// The true parameter beta*.
    pub fn beta_star(&self) -> &[f64] {
        &self.beta_star
    }

    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    pub fn sigma_x(&self) -> &DMatrix<f64> {
        &self.sigma_x
    }

    pub fn density_at_zero(&self) -> f64 {
        self.density_at_zero
    }

    pub fn asymptotic_cov(&self, budget: Option<f64>) -> Result<AsymptoticCov> {
        closed_form_sigma_quantreg(self.tau, budget, self.m_bound, &self.sigma_x, self.density_at_zero)
    }
}

/// Gradient oracle for a [`QuantRegModel`]; rows are d covariates then y.
#[derive(Debug, Clone)]
pub struct QuantRegOracle {
    tau: f64,
    dim: usize,
    m_bound: f64,
    mechanism: Option<LaplaceMechanism>,
}

impl QuantRegOracle {
    pub fn new(model: &QuantRegModel, budget: Option<f64>) -> Result<Self> {
        let mechanism = match budget {
            Some(eps) => {
                let params = PrivacyParams::new(eps)?;
                let sensitivity = 2.0 * model.tau().max(1.0 - model.tau())
                    * model.m_bound()
                    * model.dim() as f64;
                Some(LaplaceMechanism::new(sensitivity, params)?)
            }
            None => None,
        };
        Ok(Self { tau: model.tau(), dim: model.dim(), m_bound: model.m_bound(), mechanism })
    }

    fn check_bound(&self, x: &[f64]) -> Result<()> {
        for &v in x {
            if v.is_nan() || v.abs() > self.m_bound {
                return Err(Error::CovariateBound { value: v, bound: self.m_bound });
            }
        }
        Ok(())
    }
}

impl GradientOracle for QuantRegOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_width(&self) -> usize {
        self.dim + 1
    }

    fn gradient(&self, sample: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()> {
        quantreg_gradient(&sample[..self.dim], sample[self.dim], theta, self.tau, out)
    }
}

impl PrivateGradientOracle for QuantRegOracle {
    fn budget(&self) -> Option<f64> {
        self.mechanism.map(|m| m.epsilon())
    }

    fn private_gradient(
        &self,
        sample: &[f64],
        theta: &[f64],
        rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()> {
        self.gradient(sample, theta, out)?;
        if let Some(mech) = &self.mechanism {
            // The sensitivity behind the noise scale assumes the
            // advertised covariate bound; a violation means the data
            // generator and the privacy calibration disagree.
            self.check_bound(&sample[..self.dim])?;
            for slot in out.iter_mut() {
                *slot += mech.sample(rng);
            }
        }
        Ok(())
    }

    fn central_noise(
        &self,
        batch_size: usize,
        rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()> {
        let mech = self.mechanism.as_ref().ok_or_else(|| {
            Error::Unsupported("central noise needs a declared privacy budget".into())
        })?;
        for slot in out.iter_mut() {
            *slot = mech.sample(rng) / batch_size as f64;
        }
        Ok(())
    }
}

/// Endless stream of rows (1, x_1, .., x_{d−1}, y): intercept, rejection-
/// sampled truncated normals, response x·beta* + N(0,1).
pub struct QuantRegStream<R> {
    rng: R,
    beta_star: Vec<f64>,
}

impl<R: Rng> QuantRegStream<R> {
    pub fn new(model: &QuantRegModel, rng: R) -> Self {
        Self { rng, beta_star: model.beta_star().to_vec() }
    }

    fn truncated_normal(&mut self) -> f64 {
        loop {
            let z: f64 = self.rng.sample(StandardNormal);
            if z.abs() <= 1.0 {
                return z;
            }
        }
    }
}

impl<R: Rng> SampleStream for QuantRegStream<R> {
    fn width(&self) -> usize {
        self.beta_star.len() + 1
    }

    fn next_row(&mut self, out: &mut [f64]) -> Result<bool> {
        let d = self.beta_star.len();
        out[0] = 1.0;
        for slot in out.iter_mut().take(d).skip(1) {
            *slot = self.truncated_normal();
        }
        let noise: f64 = self.rng.sample(StandardNormal);
        out[d] = out[..d].iter().zip(&self.beta_star).map(|(x, b)| x * b).sum::<f64>() + noise;
        Ok(true)
    }
}
