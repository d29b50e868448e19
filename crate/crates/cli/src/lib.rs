//! Monte Carlo experiment harness around the `ldp-sgd` library: experiment
//! specifications, replication fan-out, and coverage/length reports.
//!
//! An [`spec::ExperimentSpec`] describes one cell of a coverage study
//! (model, method, run length, privacy budget, schedules, seeds). The
//! [`runner::Experiment`] resolves it, runs the replications in parallel
//! with per-replication RNG substreams, and produces a [`report::Report`]
//! whose serialized form depends only on the spec, never on the worker
//! count.

pub mod report;
pub mod runner;
pub mod spec;

/// Maps an error to the CLI exit-code contract: 2 for validation errors,
/// 3 for numerical failures discovered mid-computation, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<ldp_sgd::Error>() {
        Some(e) if e.is_validation() => 2,
        Some(e) if e.is_numerical() => 3,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_class() {
        let validation: anyhow::Error = ldp_sgd::Error::InvalidParameter("bad".into()).into();
        assert_eq!(exit_code(&validation), 2);
        let numerical: anyhow::Error = ldp_sgd::Error::NonFiniteGradient { iteration: 3 }.into();
        assert_eq!(exit_code(&numerical), 3);
        let other = anyhow::anyhow!("disk on fire");
        assert_eq!(exit_code(&other), 1);
    }
}

