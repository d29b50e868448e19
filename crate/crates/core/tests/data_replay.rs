//! Runs the same SGD pass from an in-memory stream and from spilled CSV and
//! binary files, expecting bit-identical results.

use ldp_sgd::data::{open_data_file, spill_binary, spill_csv};
use ldp_sgd::models::{QuantRegModel, QuantRegOracle, QuantRegStream};
use ldp_sgd::rng::{substream, STREAM_DATA};
use ldp_sgd::schedule::LearningRateSchedule;
use ldp_sgd::sgd::{run_sgd, GradientOracle, RunConfig};
use ldp_sgd::trace::TraceSpec;

#[test]
fn spilled_files_replay_bit_identically() {
    let beta_star = vec![0.1, -0.2, 0.3, 0.0];
    let model = QuantRegModel::truncated_normal(0.5, beta_star.clone()).unwrap();
    let oracle = QuantRegOracle::new(&model, None).unwrap();
    let n = 2_000u64;

    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("rows.csv");
    let bin_path = dir.path().join("rows.bin");
    let mut source = QuantRegStream::new(&model, substream(31, &[0, STREAM_DATA]));
    spill_csv(&mut source, n, &csv_path).unwrap();
    let mut source = QuantRegStream::new(&model, substream(31, &[0, STREAM_DATA]));
    spill_binary(&mut source, n, &bin_path).unwrap();

    let schedule = LearningRateSchedule::new(1.0, 0.6).unwrap();
    let config = RunConfig::new(n, vec![0.0; 4]).unwrap();
    let spec = TraceSpec::blocks(50);
    let width = oracle.sample_width();

    let mut live = QuantRegStream::new(&model, substream(31, &[0, STREAM_DATA]));
    let (mean_live, trace_live) =
        run_sgd(&oracle, &mut live, &schedule, &config, &spec).unwrap();

    for path in [&csv_path, &bin_path] {
        let mut replay = open_data_file(path, width).unwrap();
        let (mean, trace) =
            run_sgd(&oracle, &mut *replay, &schedule, &config, &spec).unwrap();
        assert_eq!(mean, mean_live, "replaying {}", path.display());
        for b in 0..trace_live.num_blocks() {
            assert_eq!(trace.block_sum(b), trace_live.block_sum(b));
        }
    }
}
