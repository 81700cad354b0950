//! Pauli-frame sampling, detector error models and a reference tableau
//! simulator.

mod dem;
mod frame;
pub mod tableau;

pub use dem::{
    combine, dem_matrices, dem_sample, dem_sample_with, extract_dem, DetectorErrorModel, Fault,
};
pub use frame::{frame_sample, FrameSampler};

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"NQSHOTS1";

/// Detector events and observable flips, stored column-wise: one bit-packed
/// row of `words` u64 per detector (or observable), one bit per shot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameSample {
    pub shots: usize,
    pub num_detectors: usize,
    pub num_observables: usize,
    words: usize,
    detectors: Vec<u64>,
    observables: Vec<u64>,
}

impl FrameSample {
    /// Wraps column data, clearing bits beyond `shots`.
    pub fn from_columns(
        shots: usize,
        num_detectors: usize,
        num_observables: usize,
        mut detectors: Vec<u64>,
        mut observables: Vec<u64>,
    ) -> FrameSample {
        let words = shots.div_ceil(64).max(1);
        assert_eq!(detectors.len(), num_detectors * words);
        assert_eq!(observables.len(), num_observables * words);
        let tail = shots % 64;
        let mask = if tail == 0 && shots > 0 {
            !0
        } else {
            (1u64 << tail) - 1
        };
        for v in [&mut detectors, &mut observables] {
            for row in v.chunks_mut(words) {
                row[words - 1] &= mask;
            }
        }
        FrameSample {
            shots,
            num_detectors,
            num_observables,
            words,
            detectors,
            observables,
        }
    }

    pub fn zeros(shots: usize, num_detectors: usize, num_observables: usize) -> FrameSample {
        let words = shots.div_ceil(64).max(1);
        FrameSample::from_columns(
            shots,
            num_detectors,
            num_observables,
            vec![0; num_detectors * words],
            vec![0; num_observables * words],
        )
    }

    pub fn detector(&self, shot: usize, d: usize) -> bool {
        self.detectors[d * self.words + shot / 64] >> (shot % 64) & 1 == 1
    }

    pub fn observable(&self, shot: usize, k: usize) -> bool {
        self.observables[k * self.words + shot / 64] >> (shot % 64) & 1 == 1
    }

    pub fn set_detector(&mut self, shot: usize, d: usize, v: bool) {
        let (i, b) = (d * self.words + shot / 64, 1u64 << (shot % 64));
        if v {
            self.detectors[i] |= b;
        } else {
            self.detectors[i] &= !b;
        }
    }

    pub fn set_observable(&mut self, shot: usize, k: usize, v: bool) {
        let (i, b) = (k * self.words + shot / 64, 1u64 << (shot % 64));
        if v {
            self.observables[i] |= b;
        } else {
            self.observables[i] &= !b;
        }
    }

    /// Bit-packed shots of one detector.
    pub fn detector_column(&self, d: usize) -> &[u64] {
        &self.detectors[d * self.words..(d + 1) * self.words]
    }

    /// Number of shots in which each detector fired.
    pub fn detector_counts(&self) -> Vec<usize> {
        (0..self.num_detectors)
            .map(|d| {
                self.detector_column(d)
                    .iter()
                    .map(|w| w.count_ones() as usize)
                    .sum()
            })
            .collect()
    }

    /// Fired detectors of every shot, in increasing order.
    pub fn fired_by_shot(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.shots];
        for d in 0..self.num_detectors {
            for (k, &word) in self.detector_column(d).iter().enumerate() {
                let mut v = word;
                while v != 0 {
                    let s = k * 64 + v.trailing_zeros() as usize;
                    v &= v - 1;
                    out[s].push(d as u32);
                }
            }
        }
        out
    }

    /// Observable flips of every shot as a bit mask (observable `k` is bit `k`).
    pub fn observable_masks(&self) -> Vec<u64> {
        assert!(
            self.num_observables <= 64,
            "at most 64 observables per mask"
        );
        let mut out = vec![0u64; self.shots];
        for k in 0..self.num_observables {
            for (i, &word) in self.observables[k * self.words..(k + 1) * self.words]
                .iter()
                .enumerate()
            {
                let mut v = word;
                while v != 0 {
                    let s = i * 64 + v.trailing_zeros() as usize;
                    v &= v - 1;
                    out[s] |= 1 << k;
                }
            }
        }
        out
    }

    /// Keeps only the listed detectors, in the given order.
    pub fn select_detectors(&self, keep: &[usize]) -> FrameSample {
        let mut det = Vec::with_capacity(keep.len() * self.words);
        for &d in keep {
            det.extend_from_slice(self.detector_column(d));
        }
        FrameSample::from_columns(
            self.shots,
            keep.len(),
            self.num_observables,
            det,
            self.observables.clone(),
        )
    }

    /// Concatenates shots of samples with equal widths.
    pub fn concat(parts: &[FrameSample]) -> Result<FrameSample> {
        let Some(first) = parts.first() else {
            return Ok(FrameSample::zeros(0, 0, 0));
        };
        let shots: usize = parts.iter().map(|p| p.shots).sum();
        let mut out = FrameSample::zeros(shots, first.num_detectors, first.num_observables);
        let mut base = 0;
        for p in parts {
            if p.num_detectors != first.num_detectors || p.num_observables != first.num_observables
            {
                return Err(Error::SampleFormat(
                    "concatenating samples of different widths".into(),
                ));
            }
            for s in 0..p.shots {
                for d in 0..p.num_detectors {
                    if p.detector(s, d) {
                        out.set_detector(base + s, d, true);
                    }
                }
                for k in 0..p.num_observables {
                    if p.observable(s, k) {
                        out.set_observable(base + s, k, true);
                    }
                }
            }
            base += p.shots;
        }
        Ok(out)
    }

    /// Binary form: 8-byte magic, shots/detectors/observables as u64 LE, then
    /// one row per shot of `ceil((D + O) / 8)` bytes, detectors first, LSB
    /// first within each byte.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [self.shots, self.num_detectors, self.num_observables] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        let width = self.num_detectors + self.num_observables;
        let mut row = vec![0u8; width.div_ceil(8)];
        for s in 0..self.shots {
            row.fill(0);
            for d in 0..self.num_detectors {
                if self.detector(s, d) {
                    row[d / 8] |= 1 << (d % 8);
                }
            }
            for k in 0..self.num_observables {
                if self.observable(s, k) {
                    let b = self.num_detectors + k;
                    row[b / 8] |= 1 << (b % 8);
                }
            }
            w.write_all(&row)?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<FrameSample> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::SampleFormat("bad magic".into()));
        }
        let mut dims = [0usize; 3];
        for v in dims.iter_mut() {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *v = u64::from_le_bytes(b) as usize;
        }
        let [shots, nd, no] = dims;
        let width = nd + no;
        let mut out = FrameSample::zeros(shots, nd, no);
        let mut row = vec![0u8; width.div_ceil(8)];
        for s in 0..shots {
            r.read_exact(&mut row)
                .map_err(|_| Error::SampleFormat(format!("truncated at shot {s}")))?;
            for b in 0..width {
                if row[b / 8] >> (b % 8) & 1 == 1 {
                    if b < nd {
                        out.set_detector(s, b, true);
                    } else {
                        out.set_observable(s, b - nd, true);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Debug CSV: header `shot,D0,..,L0,..` then one 0/1 row per shot.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("shot");
        for d in 0..self.num_detectors {
            let _ = write!(s, ",D{d}");
        }
        for k in 0..self.num_observables {
            let _ = write!(s, ",L{k}");
        }
        s.push('\n');
        for shot in 0..self.shots {
            let _ = write!(s, "{shot}");
            for d in 0..self.num_detectors {
                s.push_str(if self.detector(shot, d) { ",1" } else { ",0" });
            }
            for k in 0..self.num_observables {
                s.push_str(if self.observable(shot, k) { ",1" } else { ",0" });
            }
            s.push('\n');
        }
        s
    }
}
