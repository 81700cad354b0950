//! End-to-end experiments: configuration, Monte Carlo sweeps with a
//! failure-count stop rule, CSV/JSON output, ansatz fits and reports.

mod config;
mod experiment;
mod fit;
mod report;

pub use config::{Curve, ExperimentConfig, Mode, PartitionConfig, SweepParameter};
pub use experiment::{
    point_circuit, prepare_code, run_experiment, run_experiment_with, sample_and_decode,
    sample_shots, ExperimentPoint, PointCounts, PreparedCode, ShotBudget,
};
pub use fit::{fit_ansatz, FitResult};
pub use report::{
    build_report, crossing, default_alpha, fit_rows, per_round, read_points_csv, write_points_csv,
    write_rows_csv, Crossing, CsvRow, FitRecord, Report, ReportRow,
};

use serde::Serialize;

use crate::decode::DecoderConfig;
use crate::partition::PartitionStats;

/// Sidecar metadata written next to a sweep CSV.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub decoder: DecoderConfig,
    pub rounds: Vec<(String, usize)>,
    pub partition: Option<PartitionStats>,
    pub failed_points: Vec<(usize, String)>,
}

impl RunMetadata {
    pub fn new(
        config: &ExperimentConfig,
        points: &[ExperimentPoint],
    ) -> crate::Result<RunMetadata> {
        let mut rounds: Vec<(String, usize)> = Vec::new();
        for p in points {
            if !rounds.iter().any(|(c, _)| *c == p.code) {
                rounds.push((p.code.clone(), p.rounds));
            }
        }
        let partition = if config.curves.iter().any(|c| c.mode == Mode::Partitioned) {
            prepare_code(config, None)?.partition.map(|x| x.1)
        } else {
            None
        };
        Ok(RunMetadata {
            version: env!("CARGO_PKG_VERSION"),
            config: config.clone(),
            decoder: config.decoder_config(),
            rounds,
            partition,
            failed_points: points
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.error.clone().map(|e| (i, e)))
                .collect(),
        })
    }
}
