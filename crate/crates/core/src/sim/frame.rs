use rand::{Rng, RngCore};

use super::tableau::{run_tableau, Outcome};
use super::FrameSample;
use crate::circuit::{Basis, Circuit, Instruction, Pauli};
use crate::rng::keyed_rng;

/// Geometric gap sampler: number of failures before the next success.
#[derive(Clone, Copy)]
pub(crate) struct Skip {
    log_q: f64,
    always: bool,
}

impl Skip {
    pub(crate) fn new(p: f64) -> Option<Skip> {
        if p <= 0.0 {
            None
        } else {
            Some(Skip {
                log_q: (-p).ln_1p(),
                always: p >= 1.0,
            })
        }
    }

    #[inline]
    pub(crate) fn gap(&self, rng: &mut impl Rng) -> usize {
        if self.always {
            return 0;
        }
        let u: f64 = 1.0 - rng.gen::<f64>();
        let g = u.ln() / self.log_q;
        if g >= usize::MAX as f64 {
            usize::MAX
        } else {
            g as usize
        }
    }

    /// Calls `f` on each hit in `0..len`.
    #[inline]
    pub(crate) fn for_each_hit(
        &self,
        len: usize,
        rng: &mut impl Rng,
        mut f: impl FnMut(usize, &mut dyn RngCore),
    ) {
        let mut s = self.gap(rng);
        while s < len {
            f(s, &mut *rng as &mut dyn RngCore);
            s = s.saturating_add(1).saturating_add(self.gap(rng));
        }
    }
}

trait RngCoreExt {
    fn below(&mut self, n: u32) -> u32;
}

impl RngCoreExt for dyn RngCore + '_ {
    fn below(&mut self, n: u32) -> u32 {
        ((self.next_u32() as u64 * n as u64) >> 32) as u32
    }
}

/// Pauli-frame sampler with a precomputed noiseless reference.
///
/// Frames are bit-packed, 64 shots per word. Reset and measured qubits get a
/// random frame component along their eigenbasis, so outcomes that are random
/// in the ideal circuit come out random here too and non-deterministic
/// detectors show up as noise instead of silently reading 0.
pub struct FrameSampler<'a> {
    circuit: &'a Circuit,
    ref_detectors: Vec<bool>,
    ref_observables: Vec<bool>,
}

impl<'a> FrameSampler<'a> {
    pub fn new(circuit: &'a Circuit) -> Self {
        let mut rng = keyed_rng(0, &[]);
        let run = run_tableau(circuit, false, Outcome::Zero, &mut rng);
        FrameSampler {
            circuit,
            ref_detectors: run.detectors,
            ref_observables: run.observables,
        }
    }

    /// Detector and observable values of the noiseless reference run.
    pub fn reference(&self) -> (&[bool], &[bool]) {
        (&self.ref_detectors, &self.ref_observables)
    }

    pub fn sample(&self, shots: usize, rng: &mut impl Rng) -> FrameSample {
        let c = self.circuit;
        let w = shots.div_ceil(64).max(1);
        let nq = c.num_qubits;
        let mut fx = vec![0u64; nq * w];
        let mut fz = vec![0u64; nq * w];
        rng.fill(&mut fz[..]);
        let mut rec = vec![0u64; c.num_measurements * w];
        let mut det = vec![0u64; c.num_detectors * w];
        let mut obs = vec![0u64; c.num_observables * w];
        let mut m = 0usize;
        let mut d = 0usize;

        // Pauli k in 1..4 on qubit q at shot s: bit0 = X, bit1 = Z.
        fn hit(fx: &mut [u64], fz: &mut [u64], w: usize, q: usize, s: usize, k: usize) {
            let (i, b) = (q * w + s / 64, 1u64 << (s % 64));
            if k & 1 != 0 {
                fx[i] ^= b;
            }
            if k & 2 != 0 {
                fz[i] ^= b;
            }
        }

        for ins in &c.instructions {
            match ins {
                Instruction::Reset { basis, targets } => {
                    for &q in targets {
                        let (randomized, cleared) = match basis {
                            Basis::Z => (&mut fz, &mut fx),
                            Basis::X => (&mut fx, &mut fz),
                        };
                        cleared[q * w..(q + 1) * w].fill(0);
                        rng.fill(&mut randomized[q * w..(q + 1) * w]);
                    }
                }
                Instruction::H { targets } => {
                    for &q in targets {
                        for k in q * w..(q + 1) * w {
                            std::mem::swap(&mut fx[k], &mut fz[k]);
                        }
                    }
                }
                Instruction::Cx { pairs } => {
                    for &(a, b) in pairs {
                        for k in 0..w {
                            fx[b * w + k] ^= fx[a * w + k];
                            fz[a * w + k] ^= fz[b * w + k];
                        }
                    }
                }
                Instruction::Cz { pairs } => {
                    for &(a, b) in pairs {
                        for k in 0..w {
                            fz[a * w + k] ^= fx[b * w + k];
                            fz[b * w + k] ^= fx[a * w + k];
                        }
                    }
                }
                Instruction::Measure {
                    basis,
                    flip,
                    targets,
                } => {
                    let skip = Skip::new(*flip);
                    for &q in targets {
                        let (seen, other) = match basis {
                            Basis::Z => (&fx, &mut fz),
                            Basis::X => (&fz, &mut fx),
                        };
                        rec[m * w..(m + 1) * w].copy_from_slice(&seen[q * w..(q + 1) * w]);
                        for k in 0..w {
                            other[q * w + k] ^= rng.next_u64();
                        }
                        if let Some(sk) = skip {
                            let row = &mut rec[m * w..(m + 1) * w];
                            sk.for_each_hit(shots, rng, |s, _| row[s / 64] ^= 1 << (s % 64));
                        }
                        m += 1;
                    }
                }
                Instruction::Pauli { .. } => {}
                Instruction::PauliError { pauli, p, targets } => {
                    if let Some(sk) = Skip::new(*p) {
                        let k = match pauli {
                            Pauli::X => 1,
                            Pauli::Z => 2,
                            Pauli::Y => 3,
                        };
                        for &q in targets {
                            sk.for_each_hit(shots, rng, |s, _| hit(&mut fx, &mut fz, w, q, s, k));
                        }
                    }
                }
                Instruction::Depolarize1 { p, targets } => {
                    if let Some(sk) = Skip::new(*p) {
                        for &q in targets {
                            sk.for_each_hit(shots, rng, |s, r| {
                                let k = 1 + r.below(3) as usize;
                                hit(&mut fx, &mut fz, w, q, s, k)
                            });
                        }
                    }
                }
                Instruction::Depolarize2 { p, pairs } => {
                    if let Some(sk) = Skip::new(*p) {
                        for &(a, b) in pairs {
                            sk.for_each_hit(shots, rng, |s, r| {
                                let k = 1 + r.below(15) as usize;
                                hit(&mut fx, &mut fz, w, a, s, k & 3);
                                hit(&mut fx, &mut fz, w, b, s, k >> 2);
                            });
                        }
                    }
                }
                Instruction::DepolarizeN { p, targets } => {
                    if let Some(sk) = Skip::new(*p) {
                        let count = (1u32 << (2 * targets.len())) - 1;
                        sk.for_each_hit(shots, rng, |s, r| {
                            let k = 1 + r.below(count) as usize;
                            for (i, &q) in targets.iter().enumerate() {
                                hit(&mut fx, &mut fz, w, q, s, (k >> (2 * i)) & 3);
                            }
                        });
                    }
                }
                Instruction::CondPauli {
                    pauli,
                    record,
                    target,
                } => {
                    let (px, pz) = pauli.bits();
                    for k in 0..w {
                        let f = rec[record * w + k];
                        if px {
                            fx[target * w + k] ^= f;
                        }
                        if pz {
                            fz[target * w + k] ^= f;
                        }
                    }
                }
                Instruction::Detector { records, .. } => {
                    let fill = if self.ref_detectors[d] { !0u64 } else { 0 };
                    for k in 0..w {
                        let mut v = fill;
                        for &r in records {
                            v ^= rec[r * w + k];
                        }
                        det[d * w + k] = v;
                    }
                    d += 1;
                }
                Instruction::Observable { index, records } => {
                    for k in 0..w {
                        let mut v = 0;
                        for &r in records {
                            v ^= rec[r * w + k];
                        }
                        obs[index * w + k] ^= v;
                    }
                }
                Instruction::Tick => {}
            }
        }
        for (i, &r) in self.ref_observables.iter().enumerate() {
            if r {
                obs[i * w..(i + 1) * w].iter_mut().for_each(|v| *v = !*v);
            }
        }
        FrameSample::from_columns(shots, c.num_detectors, c.num_observables, det, obs)
    }
}

/// Samples `shots` runs of `circuit`; identical inputs give identical output.
pub fn frame_sample(circuit: &Circuit, shots: usize, seed: u64) -> FrameSample {
    let mut rng = keyed_rng(seed, &[0x6672_616d]);
    FrameSampler::new(circuit).sample(shots, &mut rng)
}
