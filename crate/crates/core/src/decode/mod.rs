//! Decoders: exact minimum-weight perfect matching for surface-code DEMs and
//! BP-OSD for BB-code DEMs, plus logical error-rate statistics.

mod blossom;
mod bposd;
mod matching;
mod stats;

pub use blossom::max_weight_matching;
pub use bposd::{bposd_decode, BpOsdConfig, BpOsdDecoder, BpOsdResult};
pub use matching::{decompose_dem, edge_weight, mwpm_decode, Edge, MatchingGraph, WEIGHT_SCALE};
pub use stats::{count_failures, logical_error_rate, wilson_interval, LogicalErrorRate, Z95};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sim::{dem_matrices, DetectorErrorModel, FrameSample};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecoderConfig {
    Matching,
    BpOsd(BpOsdConfig),
}

/// A decoder prepared for one DEM.
#[derive(Clone, Debug)]
pub enum Decoder {
    Matching(MatchingGraph),
    BpOsd(BpOsdDecoder),
}

impl Decoder {
    /// Matching decomposes hyperedges first; BP-OSD uses the DEM as is.
    pub fn new(dem: &DetectorErrorModel, config: &DecoderConfig) -> Result<Decoder> {
        Ok(match config {
            DecoderConfig::Matching => {
                Decoder::Matching(MatchingGraph::from_dem(&decompose_dem(dem)?)?)
            }
            DecoderConfig::BpOsd(c) => {
                let (h, l, pri) = dem_matrices(dem);
                Decoder::BpOsd(BpOsdDecoder::new(&h, &l, &pri, c.clone())?)
            }
        })
    }

    pub fn decode_fired(&self, fired: &[u32]) -> Result<u64> {
        match self {
            Decoder::Matching(g) => Ok(g.decode(fired)),
            Decoder::BpOsd(d) => d.decode_fired(fired),
        }
    }

    /// Predicted observable masks for every shot, decoded in parallel.
    pub fn decode_sample(&self, sample: &FrameSample) -> Result<Vec<u64>> {
        sample
            .fired_by_shot()
            .par_iter()
            .map(|f| self.decode_fired(f))
            .collect()
    }
}

/// Packs predictions as a sample with no detectors.
pub fn predictions_to_sample(predictions: &[u64], num_observables: usize) -> FrameSample {
    let mut s = FrameSample::zeros(predictions.len(), 0, num_observables);
    for (shot, &m) in predictions.iter().enumerate() {
        for k in 0..num_observables {
            if m >> k & 1 == 1 {
                s.set_observable(shot, k, true);
            }
        }
    }
    s
}
