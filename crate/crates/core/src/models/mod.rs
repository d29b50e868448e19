//! The two built-in estimation problems, each bundling a data generator,
//! the subgradient, its privatization, and the closed-form asymptotic
//! covariance used to validate interval lengths.

mod quantile;
mod quantreg;

pub use quantile::{
    closed_form_sigma_quantile, quantile_gradient, quantile_private_gradient, quantile_s_ldp,
    QuantileModel, QuantileOracle, StandardNormalStream,
};
pub use quantreg::{
    closed_form_sigma_quantreg, quantreg_gradient, QuantRegModel, QuantRegOracle, QuantRegStream,
    TRUNCATED_COORD_VARIANCE,
};

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Sandwich covariance G^{-1}(S_SGD + S_LDP)G^{-1} of the scaled averaged
/// iterates, kept with its three factors.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCov {
    sigma: DMatrix<f64>,
    s_sgd: DMatrix<f64>,
    s_ldp: DMatrix<f64>,
    g: DMatrix<f64>,
}

impl AsymptoticCov {
    pub fn from_components(
        g: DMatrix<f64>,
        s_sgd: DMatrix<f64>,
        s_ldp: DMatrix<f64>,
    ) -> Result<Self> {
        let d = g.nrows();
        for (name, m) in [("linearization", &g), ("sampling noise", &s_sgd), ("privacy noise", &s_ldp)]
        {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "{name} matrix is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("linearization matrix is singular".into()))?;
        let sigma = &g_inv * (&s_sgd + &s_ldp) * &g_inv;
        Ok(Self { sigma, s_sgd, s_ldp, g })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn s_sgd(&self) -> &DMatrix<f64> {
        &self.s_sgd
    }

    pub fn s_ldp(&self) -> &DMatrix<f64> {
        &self.s_ldp
    }

    pub fn g_matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Length 2·z_{1−alpha}·sqrt(Σ_kk/n) of the level 1−2·alpha Gaussian
    /// interval this covariance predicts for coordinate k at run length n.
    pub fn predicted_ci_length(&self, coord: usize, alpha: f64, n: u64) -> f64 {
        let z = Normal::standard().inverse_cdf(1.0 - alpha);
        2.0 * z * (self.sigma[(coord, coord)] / n as f64).sqrt()
    }
}
