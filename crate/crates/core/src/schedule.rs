//! Polynomially decaying step sizes and the diagnostics that certify a
//! schedule before a long run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step sizes `scale * i^(-exponent)` for 1-based iteration numbers, with
/// the exponent restricted to (1/2, 1) so that averaged iterates are
/// asymptotically normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningRateSchedule {
    scale: f64,
    exponent: f64,
}

impl LearningRateSchedule {
    pub fn new(scale: f64, exponent: f64) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step-size scale must be positive and finite, got {scale}"
            )));
        }
        if !exponent.is_finite() || exponent <= 0.5 || exponent >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "step-size exponent must lie strictly inside (0.5, 1), got {exponent}"
            )));
        }
        Ok(Self { scale, exponent })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Step size for iteration `i >= 1`.
    pub fn step_size(&self, i: u64) -> f64 {
        debug_assert!(i >= 1);
        self.scale * (i as f64).powf(-self.exponent)
    }
}

/// Result of [`check_base_case`] for one curvature value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseCaseCheck {
    /// Smallest admissible index at which the inequality holds (the search
    /// cap if it never did).
    pub base_index: u64,
    pub holds: bool,
    /// Damped squared-step sum at `base_index`.
    pub lhs: f64,
    /// Half the scaled step size at `base_index`.
    pub rhs: f64,
}

/// Indices examined before the base-case search gives up.
const BASE_CASE_SEARCH_CAP: u64 = 1 << 20;

/// Certifies a schedule against a curvature eigenvalue `lambda`.
///
/// Searches for the smallest index `b` with `b^exponent >= 2 * lambda *
/// scale` at which
///
/// ```text
/// sum_{j=1..b} (lambda * eta_j)^2 * prod_{k=j+1..b} (1 - lambda * eta_k)^2
///     >= lambda * eta_b / 2.
/// ```
///
/// Once the inequality holds at one admissible index it propagates to every
/// later one, so a failure at the first admissible index is retried at
/// subsequent indices up to a cap of 2^20; `holds = false` means no index
/// below the cap worked.
pub fn check_base_case(schedule: &LearningRateSchedule, lambda: f64) -> Result<BaseCaseCheck> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "curvature eigenvalue must be positive and finite, got {lambda}"
        )));
    }
    let gamma = schedule.exponent();
    let target = 2.0 * lambda * schedule.scale();

    let guess = target.powf(1.0 / gamma).floor().max(1.0);
    let mut first = if guess.is_finite() && guess < BASE_CASE_SEARCH_CAP as f64 {
        guess as u64
    } else {
        BASE_CASE_SEARCH_CAP
    };
    while first > 1 && ((first - 1) as f64).powf(gamma) >= target - 1e-12 {
        first -= 1;
    }
    while first < BASE_CASE_SEARCH_CAP && ((first as f64).powf(gamma) < target - 1e-12) {
        first += 1;
    }

    // lhs follows the recursion s_b = (lambda eta_b)^2 + (1 - lambda eta_b)^2 s_{b-1},
    // so the search advances in O(1) per candidate index.
    let mut lhs = 0.0;
    let mut b = 0;
    loop {
        b += 1;
        let le = lambda * schedule.step_size(b);
        lhs = le * le + (1.0 - le) * (1.0 - le) * lhs;
        if b >= first {
            let rhs = le / 2.0;
            if lhs >= rhs || b >= BASE_CASE_SEARCH_CAP {
                return Ok(BaseCaseCheck { base_index: b, holds: lhs >= rhs, lhs, rhs });
            }
        }
    }
}

/// Residual of the telescoping identity
///
/// ```text
/// sum_{j=1..b} lambda*eta_j * prod_{k=j+1..b} (1 - lambda*eta_k)
///     = 1 - prod_{k=1..b} (1 - lambda*eta_k),
/// ```
///
/// which is exact in real arithmetic; the returned value is a rounding-noise
/// self-test of the schedule arithmetic.
pub fn verify_sum_identity(schedule: &LearningRateSchedule, lambda: f64, b: u64) -> Result<f64> {
    if b < 1 {
        return Err(Error::InvalidParameter("identity needs b >= 1".into()));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be finite, got {lambda}")));
    }
    let mut sum = 0.0;
    let mut prod = 1.0;
    for j in (1..=b).rev() {
        let le = lambda * schedule.step_size(j);
        sum += le * prod;
        prod *= 1.0 - le;
    }
    Ok((sum - (1.0 - prod)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_parameters() {
        assert!(LearningRateSchedule::new(0.0, 0.51).is_err());
        assert!(LearningRateSchedule::new(-1.0, 0.51).is_err());
        assert!(LearningRateSchedule::new(1.0, 0.5).is_err());
        assert!(LearningRateSchedule::new(1.0, 1.0).is_err());
        assert!(LearningRateSchedule::new(f64::NAN, 0.51).is_err());
        assert!(LearningRateSchedule::new(1.0, f64::INFINITY).is_err());
        assert!(LearningRateSchedule::new(1.0, 0.51).is_ok());
    }

    #[test]
    fn step_size_values() {
        let s = LearningRateSchedule::new(1.0, 0.51).unwrap();
        assert_eq!(s.step_size(1), 1.0);
        assert_relative_eq!(s.step_size(2), 0.7022224378689986, max_relative = 1e-15);
        let s2 = LearningRateSchedule::new(2.0, 0.75).unwrap();
        assert_relative_eq!(s2.step_size(16), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn steps_decrease() {
        for (c, g) in [(0.5, 0.51), (1.0, 0.51), (2.0, 0.75), (0.1, 0.99)] {
            let s = LearningRateSchedule::new(c, g).unwrap();
            for i in 1..2000 {
                assert!(s.step_size(i + 1) < s.step_size(i), "c={c} g={g} i={i}");
            }
        }
    }

    #[test]
    fn base_case_default_schedule() {
        let s = LearningRateSchedule::new(1.0, 0.51).unwrap();
        let check = check_base_case(&s, 1.0).unwrap();
        assert_eq!(check.base_index, 4);
        assert!(check.holds);
        assert_relative_eq!(check.lhs, 0.35445107722898417, max_relative = 1e-9);
        assert_relative_eq!(check.rhs, 0.2465581761233398, max_relative = 1e-9);
    }

    #[test]
    fn base_case_single_term_equality() {
        let s = LearningRateSchedule::new(0.5, 0.51).unwrap();
        let check = check_base_case(&s, 1.0).unwrap();
        assert_eq!(check.base_index, 1);
        assert!(check.holds);
        assert_eq!(check.lhs, 0.25);
        assert_eq!(check.rhs, 0.25);
    }

    #[test]
    fn base_case_holds_on_default_grid() {
        // Frozen from an independent direct evaluation of the finite sums.
        let expected = [
            (0.1, 9, 0.017219189027465123, 0.01630445642881952),
            (0.5, 1, 0.25, 0.25),
            (1.0, 4, 0.35445107722898417, 0.2465581761233398),
            (2.0, 16, 0.3265051941310437, 0.24316373685307138),
        ];
        let s = LearningRateSchedule::new(1.0, 0.51).unwrap();
        for (lambda, base_index, lhs, rhs) in expected {
            let check = check_base_case(&s, lambda).unwrap();
            assert!(check.holds, "lambda={lambda}");
            assert_eq!(check.base_index, base_index, "lambda={lambda}");
            assert_relative_eq!(check.lhs, lhs, max_relative = 1e-9);
            assert_relative_eq!(check.rhs, rhs, max_relative = 1e-9);
        }
    }

    #[test]
    fn base_case_outputs_positive() {
        for (c, g, lambda) in [(1.0, 0.51, 1.0), (2.0, 0.75, 0.3), (0.7, 0.6, 2.5)] {
            let s = LearningRateSchedule::new(c, g).unwrap();
            let check = check_base_case(&s, lambda).unwrap();
            assert!(check.lhs > 0.0);
            assert!(check.rhs > 0.0);
        }
    }

    #[test]
    fn base_case_rejects_nonpositive_lambda() {
        let s = LearningRateSchedule::new(1.0, 0.51).unwrap();
        assert!(check_base_case(&s, 0.0).is_err());
        assert!(check_base_case(&s, -1.0).is_err());
        assert!(check_base_case(&s, f64::NAN).is_err());
    }

    #[test]
    fn sum_identity_is_exact_at_b1() {
        let s = LearningRateSchedule::new(1.0, 0.51).unwrap();
        assert_eq!(verify_sum_identity(&s, 1.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn sum_identity_residuals_are_rounding_noise() {
        let s = LearningRateSchedule::new(1.0, 0.51).unwrap();
        assert!(verify_sum_identity(&s, 1.0, 100).unwrap() < 1e-12);
        let s2 = LearningRateSchedule::new(1.0, 0.75).unwrap();
        assert!(verify_sum_identity(&s2, 0.5, 10_000).unwrap() < 1e-10);
    }
}
