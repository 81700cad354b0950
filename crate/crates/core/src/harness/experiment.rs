use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode, SweepParameter};
use crate::circuit::{build_bb_circuit, build_surface_circuit, Basis, Circuit, NoiseModel};
use crate::codes::{build_bb_code, build_preset, preset, CssCode};
use crate::decode::{count_failures, Decoder, DecoderConfig, LogicalErrorRate};
use crate::error::{Error, Result};
use crate::partition::{
    bipartition, build_combined_tanner, import_partition, partition_stats, Partition,
    PartitionStats,
};
use crate::rng::keyed_rng;
use crate::sim::{extract_dem, FrameSample, FrameSampler};

/// Sampling stop rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotBudget {
    pub max_shots: u64,
    pub max_failures: u64,
    pub batch_size: usize,
}

/// Totals of one sampled point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointCounts {
    pub shots: u64,
    pub failures: u64,
    pub batches: u64,
}

/// Samples `circuit`, decodes the detectors of `basis` and counts logical
/// failures until the budget stops it. Batch `b` draws from
/// `keyed_rng(seed, [key, b])`; batches run `workers` at a time and are
/// reduced in order, so totals do not depend on `workers`.
pub fn sample_and_decode(
    circuit: &Circuit,
    basis: Basis,
    decoder: &DecoderConfig,
    budget: ShotBudget,
    seed: u64,
    key: u64,
    workers: usize,
) -> Result<PointCounts> {
    let dem = extract_dem(circuit)?;
    let (dem, kept) = dem.restrict_to_basis(basis);
    let dec = Decoder::new(&dem, decoder)?;
    let sampler = FrameSampler::new(circuit);
    let run_batch = |b: u64, shots: usize| -> Result<u64> {
        let mut rng = keyed_rng(seed, &[key, b]);
        let s = sampler.sample(shots, &mut rng).select_detectors(&kept);
        let actual = s.observable_masks();
        let mut pred = Vec::with_capacity(shots);
        for fired in s.fired_by_shot() {
            pred.push(dec.decode_fired(&fired)?);
        }
        count_failures(&pred, &actual)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let mut counts = PointCounts {
        shots: 0,
        failures: 0,
        batches: 0,
    };
    while counts.shots < budget.max_shots && counts.failures < budget.max_failures {
        let mut wave = Vec::new();
        let mut planned = counts.shots;
        for i in 0..workers.max(1) as u64 {
            if planned >= budget.max_shots {
                break;
            }
            let n = (budget.batch_size as u64).min(budget.max_shots - planned);
            wave.push((counts.batches + i, n as usize));
            planned += n;
        }
        let results: Vec<Result<u64>> =
            pool.install(|| wave.par_iter().map(|&(b, n)| run_batch(b, n)).collect());
        for ((_, n), r) in wave.iter().zip(results) {
            counts.failures += r?;
            counts.shots += *n as u64;
            counts.batches += 1;
            if counts.failures >= budget.max_failures {
                break;
            }
        }
    }
    Ok(counts)
}

/// Draws `shots` frame-sampler shots in batches of `batch_size`, batch `b`
/// from `keyed_rng(seed, [key, b])`, run on `workers` threads.
pub fn sample_shots(
    circuit: &Circuit,
    shots: usize,
    batch_size: usize,
    seed: u64,
    key: u64,
    workers: usize,
) -> Result<FrameSample> {
    let sampler = FrameSampler::new(circuit);
    let batch = batch_size.max(1);
    let plan: Vec<(u64, usize)> = (0..shots.div_ceil(batch))
        .map(|b| (b as u64, batch.min(shots - b * batch)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let parts: Vec<FrameSample> = pool.install(|| {
        plan.par_iter()
            .map(|&(b, n)| sampler.sample(n, &mut keyed_rng(seed, &[key, b])))
            .collect()
    });
    if parts.is_empty() {
        return Ok(FrameSample::zeros(
            0,
            circuit.num_detectors,
            circuit.num_observables,
        ));
    }
    FrameSample::concat(&parts)
}

/// One row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPoint {
    pub code: String,
    pub mode: Mode,
    pub distance: Option<usize>,
    pub rounds: usize,
    pub p: f64,
    pub p_bell: f64,
    pub p_ghz: f64,
    pub shots: u64,
    pub failures: u64,
    pub p_l: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bell_per_shot: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    /// Set when the point could not be run; the sweep continues.
    pub error: Option<String>,
}

/// Code, partition and metadata shared by every point of one code.
pub struct PreparedCode {
    pub code: CssCode,
    pub distance: usize,
    pub rounds: usize,
    pub partition: Option<(Partition, PartitionStats)>,
}

pub fn prepare_code(
    config: &ExperimentConfig,
    surface_distance: Option<usize>,
) -> Result<PreparedCode> {
    let (code, distance) = match config.code.as_str() {
        "surface" => {
            let d =
                surface_distance.ok_or_else(|| Error::config("distances", "missing distance"))?;
            (crate::codes::build_surface_code(d)?, d)
        }
        "bb" => {
            let spec = config
                .bb_spec
                .as_ref()
                .ok_or_else(|| Error::config("bb_spec", "missing"))?;
            let d = config.bb_distance.or(config.rounds).unwrap_or(1);
            let mut code = build_bb_code(spec)?;
            code.d = config.bb_distance;
            (code, d)
        }
        name => (build_preset(name)?, preset(name)?.1),
    };
    let rounds = config.rounds.unwrap_or(distance);
    let partition = if config.curves.iter().any(|c| c.mode == Mode::Partitioned) {
        let g = build_combined_tanner(&code);
        let part = match &config.partition.file {
            Some(path) => import_partition(&g, path)?,
            None => bipartition(
                &g,
                config.partition.tol,
                config.partition.restarts,
                config.partition.seed,
            )?,
        };
        let stats = partition_stats(&g, &part)?;
        Some((part, stats))
    } else {
        None
    };
    Ok(PreparedCode {
        code,
        distance,
        rounds,
        partition,
    })
}

/// Builds the memory circuit of one point.
pub fn point_circuit(
    prepared: &PreparedCode,
    mode: Mode,
    noise: &NoiseModel,
    basis: Basis,
) -> Result<Circuit> {
    let code = &prepared.code;
    match code.family {
        crate::codes::CodeFamily::Surface { distance } => build_surface_circuit(
            distance,
            prepared.rounds,
            noise,
            mode == Mode::Networked,
            basis,
        ),
        _ => {
            let part = match mode {
                Mode::Partitioned => Some(
                    &prepared
                        .partition
                        .as_ref()
                        .ok_or_else(|| Error::config("curves.mode", "partition missing"))?
                        .0,
                ),
                _ => None,
            };
            build_bb_circuit(code, prepared.rounds, noise, part, basis)
        }
    }
}

/// Runs every (code, curve, value) point of the sweep in order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentPoint>> {
    run_experiment_with(config, |_| {})
}

/// As [`run_experiment`], calling `progress` after each point.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    mut progress: impl FnMut(&ExperimentPoint),
) -> Result<Vec<ExperimentPoint>> {
    config.validate()?;
    let budget = ShotBudget {
        max_shots: config.max_shots,
        max_failures: config.max_failures,
        batch_size: config.batch_size,
    };
    let decoder = config.decoder_config();
    let distances: Vec<Option<usize>> = if config.is_surface() {
        config.distances.iter().map(|&d| Some(d)).collect()
    } else {
        vec![None]
    };
    let mut points = Vec::new();
    let mut key = 0u64;
    for d in distances {
        let prepared = prepare_code(config, d)?;
        for curve in &config.curves {
            let p_bell = curve.bell_error()?;
            for &v in &config.values {
                let (p, p_ghz) = match config.sweep {
                    SweepParameter::P => (v, config.p_ghz),
                    SweepParameter::PGhz => (config.p, v),
                };
                let mut noise = NoiseModel::uniform(p);
                if curve.mode == Mode::Networked {
                    noise = noise.with_ghz(p_ghz);
                }
                if curve.mode == Mode::Partitioned {
                    noise = noise.with_bell(p_bell);
                }
                let start = Instant::now();
                let outcome =
                    point_circuit(&prepared, curve.mode, &noise, config.basis).and_then(|c| {
                        let bell = c.meta.bell_pairs_per_round * prepared.rounds;
                        sample_and_decode(
                            &c,
                            config.basis,
                            &decoder,
                            budget,
                            config.seed,
                            key,
                            config.workers,
                        )
                        .map(|r| (r, bell))
                    });
                let (counts, bell, error) = match outcome {
                    Ok((r, bell)) => (r, bell, None),
                    Err(e) => (
                        PointCounts {
                            shots: 0,
                            failures: 0,
                            batches: 0,
                        },
                        0,
                        Some(e.to_string()),
                    ),
                };
                let rate = LogicalErrorRate::from_counts(counts.failures, counts.shots);
                let point = ExperimentPoint {
                    code: prepared.code.name(),
                    mode: curve.mode,
                    distance: Some(prepared.distance),
                    rounds: prepared.rounds,
                    p,
                    p_bell: if curve.mode == Mode::Partitioned {
                        p_bell
                    } else {
                        0.0
                    },
                    p_ghz: if curve.mode == Mode::Networked {
                        p_ghz
                    } else {
                        0.0
                    },
                    shots: counts.shots,
                    failures: counts.failures,
                    p_l: rate.rate,
                    ci_lo: rate.ci_lo,
                    ci_hi: rate.ci_hi,
                    bell_per_shot: bell,
                    seed: config.seed,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    error,
                };
                progress(&point);
                points.push(point);
                key += 1;
            }
        }
    }
    Ok(points)
}
