use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use super::frame::Skip;
use super::FrameSample;
use crate::circuit::{Basis, Circuit, Instruction, Pauli};
use crate::error::{Error, Result};
use crate::gf2::BinaryMatrix;
use crate::rng::keyed_rng;

/// One merged fault mechanism.
#[derive(Clone, Debug, PartialEq)]
pub struct Fault {
    pub p: f64,
    pub detectors: Vec<usize>,
    pub observables: Vec<usize>,
}

/// Independent fault mechanisms with their detector/observable signatures.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub faults: Vec<Fault>,
    pub detector_coords: Vec<Vec<f64>>,
}

/// Combined probability of two independent flips: `p + q - 2pq`.
pub fn combine(p: f64, q: f64) -> f64 {
    p + q - 2.0 * p * q
}

/// Per-component probability when a uniform channel over `count` non-identity
/// Paulis with total probability `p` is rewritten as independent components.
fn independent_component(p: f64, count: usize) -> f64 {
    if count == 1 {
        return p;
    }
    let base = 1.0 - (count as f64 + 1.0) / count as f64 * p;
    if base <= 0.0 {
        return 0.5;
    }
    // count + 1 = 4^w components; the channel is a product over 2w - 1 halvings.
    let halvings = ((count + 1) as f64).log2() - 1.0;
    (1.0 - base.powf(1.0 / 2f64.powf(halvings))) / 2.0
}

struct Sens {
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl Sens {
    fn row<'a>(v: &'a [u64], words: usize, q: usize) -> &'a [u64] {
        &v[q * words..(q + 1) * words]
    }
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn first_target(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
}

struct Collector {
    faults: HashMap<Vec<u64>, f64>,
}

impl Collector {
    fn add(&mut self, sig: Vec<u64>, p: f64) {
        if p <= 0.0 || sig.iter().all(|&w| w == 0) {
            return;
        }
        let e = self.faults.entry(sig).or_insert(0.0);
        *e = combine(*e, p);
    }
}

/// Builds the detector error model by propagating detector and observable
/// sensitivities backwards through the circuit. Each channel component is an
/// elementary fault; identical signatures merge with `p + q - 2pq`.
///
/// Fails when a detector or observable is not deterministic in the noiseless
/// circuit.
pub fn extract_dem(circuit: &Circuit) -> Result<DetectorErrorModel> {
    let nd = circuit.num_detectors;
    let no = circuit.num_observables;
    let words = (nd + no).div_ceil(64).max(1);
    let nq = circuit.num_qubits;
    let mut s = Sens {
        words,
        x: vec![0; nq * words],
        z: vec![0; nq * words],
    };
    let mut rec = vec![0u64; circuit.num_measurements * words];
    let mut m = circuit.num_measurements;
    let mut d = nd;
    let mut col = Collector {
        faults: HashMap::new(),
    };
    let nondet = |t: usize| {
        if t < nd {
            Error::NonDeterministicDetector(t)
        } else {
            Error::NonDeterministicObservable(t - nd)
        }
    };
    let w = words;

    for ins in circuit.instructions.iter().rev() {
        match ins {
            Instruction::Detector { records, .. } => {
                d -= 1;
                for &r in records {
                    rec[r * w + d / 64] ^= 1 << (d % 64);
                }
            }
            Instruction::Observable { index, records } => {
                let t = nd + index;
                for &r in records {
                    rec[r * w + t / 64] ^= 1 << (t % 64);
                }
            }
            Instruction::Measure {
                basis,
                flip,
                targets,
            } => {
                for &q in targets.iter().rev() {
                    m -= 1;
                    let r = rec[m * w..(m + 1) * w].to_vec();
                    col.add(r.clone(), *flip);
                    let (hit, other) = match basis {
                        Basis::Z => (&mut s.x, &s.z),
                        Basis::X => (&mut s.z, &s.x),
                    };
                    if let Some(t) = first_target(Sens::row(other, w, q)) {
                        return Err(nondet(t));
                    }
                    xor_into(&mut hit[q * w..(q + 1) * w], &r);
                }
            }
            Instruction::Reset { basis, targets } => {
                for &q in targets {
                    let other = match basis {
                        Basis::Z => &s.z,
                        Basis::X => &s.x,
                    };
                    if let Some(t) = first_target(Sens::row(other, w, q)) {
                        return Err(nondet(t));
                    }
                    s.x[q * w..(q + 1) * w].fill(0);
                    s.z[q * w..(q + 1) * w].fill(0);
                }
            }
            Instruction::H { targets } => {
                for &q in targets {
                    for k in q * w..(q + 1) * w {
                        std::mem::swap(&mut s.x[k], &mut s.z[k]);
                    }
                }
            }
            Instruction::Cx { pairs } => {
                for &(c, t) in pairs.iter().rev() {
                    for k in 0..w {
                        s.x[c * w + k] ^= s.x[t * w + k];
                        s.z[t * w + k] ^= s.z[c * w + k];
                    }
                }
            }
            Instruction::Cz { pairs } => {
                for &(a, b) in pairs.iter().rev() {
                    for k in 0..w {
                        let (za, zb) = (s.z[a * w + k], s.z[b * w + k]);
                        s.x[a * w + k] ^= zb;
                        s.x[b * w + k] ^= za;
                    }
                }
            }
            Instruction::Pauli { .. } | Instruction::Tick => {}
            Instruction::CondPauli {
                pauli,
                record,
                target,
            } => {
                let (px, pz) = pauli.bits();
                let t = *target;
                for k in 0..w {
                    let mut v = 0;
                    if px {
                        v ^= s.x[t * w + k];
                    }
                    if pz {
                        v ^= s.z[t * w + k];
                    }
                    rec[record * w + k] ^= v;
                }
            }
            Instruction::PauliError { pauli, p, targets } => {
                for &q in targets {
                    col.add(pauli_sig(&s, q, *pauli), *p);
                }
            }
            Instruction::Depolarize1 { p, targets } => {
                let pc = independent_component(*p, 3);
                for &q in targets {
                    for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
                        col.add(pauli_sig(&s, q, pauli), pc);
                    }
                }
            }
            Instruction::Depolarize2 { p, pairs } => {
                let pc = independent_component(*p, 15);
                for &(a, b) in pairs {
                    add_uniform(&mut col, &s, &[a, b], pc);
                }
            }
            Instruction::DepolarizeN { p, targets } => {
                let count = (1usize << (2 * targets.len())) - 1;
                add_uniform(&mut col, &s, targets, independent_component(*p, count));
            }
        }
    }
    for q in 0..nq {
        if let Some(t) = first_target(Sens::row(&s.z, w, q)) {
            return Err(nondet(t));
        }
    }

    let mut faults: Vec<Fault> = col
        .faults
        .into_iter()
        .map(|(sig, p)| {
            let mut detectors = Vec::new();
            let mut observables = Vec::new();
            for (i, &word) in sig.iter().enumerate() {
                let mut v = word;
                while v != 0 {
                    let t = i * 64 + v.trailing_zeros() as usize;
                    v &= v - 1;
                    if t < nd {
                        detectors.push(t);
                    } else {
                        observables.push(t - nd);
                    }
                }
            }
            Fault {
                p: p.min(0.5),
                detectors,
                observables,
            }
        })
        .collect();
    sort_faults(&mut faults);
    Ok(DetectorErrorModel {
        num_detectors: nd,
        num_observables: no,
        faults,
        detector_coords: circuit.detector_coords(),
    })
}

fn sort_faults(faults: &mut [Fault]) {
    faults.sort_by(|a, b| {
        a.detectors
            .cmp(&b.detectors)
            .then_with(|| a.observables.cmp(&b.observables))
    });
}

fn pauli_sig(s: &Sens, q: usize, p: Pauli) -> Vec<u64> {
    let w = s.words;
    let (px, pz) = p.bits();
    let mut v = vec![0u64; w];
    if px {
        xor_into(&mut v, Sens::row(&s.x, w, q));
    }
    if pz {
        xor_into(&mut v, Sens::row(&s.z, w, q));
    }
    v
}

/// Adds every non-identity Pauli on `qubits` as a fault with probability `p`.
fn add_uniform(col: &mut Collector, s: &Sens, qubits: &[usize], p: f64) {
    let w = s.words;
    let count = 1usize << (2 * qubits.len());
    // Gray-code walk over the 2w generator bits keeps each step one XOR.
    let gens: Vec<&[u64]> = qubits
        .iter()
        .flat_map(|&q| [Sens::row(&s.x, w, q), Sens::row(&s.z, w, q)])
        .collect();
    let mut cur = vec![0u64; w];
    for k in 1..count {
        let bit = k.trailing_zeros() as usize;
        xor_into(&mut cur, gens[bit]);
        col.add(cur.clone(), p);
    }
}

impl DetectorErrorModel {
    pub fn num_faults(&self) -> usize {
        self.faults.len()
    }

    /// Restricts to the detectors with `keep[d]`, renumbering them in order.
    /// Faults left without detectors are dropped; the rest are re-merged.
    pub fn restrict(&self, keep: &[bool]) -> DetectorErrorModel {
        let mut map = vec![usize::MAX; self.num_detectors];
        let mut coords = Vec::new();
        let mut next = 0;
        for d in 0..self.num_detectors {
            if keep[d] {
                map[d] = next;
                next += 1;
                if let Some(c) = self.detector_coords.get(d) {
                    coords.push(c.clone());
                }
            }
        }
        let mut merged: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
        for f in &self.faults {
            let dets: Vec<usize> = f
                .detectors
                .iter()
                .filter(|&&d| keep[d])
                .map(|&d| map[d])
                .collect();
            if dets.is_empty() {
                continue;
            }
            let e = merged.entry((dets, f.observables.clone())).or_insert(0.0);
            *e = combine(*e, f.p);
        }
        let mut faults: Vec<Fault> = merged
            .into_iter()
            .map(|((detectors, observables), p)| Fault {
                p: p.min(0.5),
                detectors,
                observables,
            })
            .collect();
        sort_faults(&mut faults);
        DetectorErrorModel {
            num_detectors: next,
            num_observables: self.num_observables,
            faults,
            detector_coords: coords,
        }
    }

    /// Keeps only detectors whose third coordinate marks checks of `basis`.
    pub fn restrict_to_basis(&self, basis: Basis) -> (DetectorErrorModel, Vec<usize>) {
        let tag = basis.tag();
        let keep: Vec<bool> = (0..self.num_detectors)
            .map(|d| self.detector_coords.get(d).and_then(|c| c.get(2)) == Some(&tag))
            .collect();
        let kept: Vec<usize> = (0..self.num_detectors).filter(|&d| keep[d]).collect();
        (self.restrict(&keep), kept)
    }

    /// Text form: one `error(p) D.. L..` line per fault.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for f in &self.faults {
            let _ = write!(s, "error({})", f.p);
            for d in &f.detectors {
                let _ = write!(s, " D{d}");
            }
            for l in &f.observables {
                let _ = write!(s, " L{l}");
            }
            s.push('\n');
        }
        s
    }

    /// Parses `error(p) D.. L..` lines; detector and observable counts are
    /// the given minimums or one past the largest index seen.
    pub fn from_text(text: &str, num_detectors: usize, num_observables: usize) -> Result<Self> {
        let mut faults = Vec::new();
        let (mut nd, mut no) = (num_detectors, num_observables);
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::Parse {
                line: i + 1,
                message: format!("{m}: `{line}`"),
            };
            let rest = line
                .strip_prefix("error(")
                .ok_or_else(|| err("expected error(p)"))?;
            let close = rest.find(')').ok_or_else(|| err("unclosed argument"))?;
            let p: f64 = rest[..close]
                .trim()
                .parse()
                .map_err(|_| err("bad probability"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
            let mut f = Fault {
                p,
                detectors: Vec::new(),
                observables: Vec::new(),
            };
            for tok in rest[close + 1..].split_whitespace() {
                if let Some(v) = tok.strip_prefix('D') {
                    let d: usize = v.parse().map_err(|_| err("bad detector"))?;
                    nd = nd.max(d + 1);
                    f.detectors.push(d);
                } else if let Some(v) = tok.strip_prefix('L') {
                    let l: usize = v.parse().map_err(|_| err("bad observable"))?;
                    no = no.max(l + 1);
                    f.observables.push(l);
                } else {
                    return Err(err("unknown target"));
                }
            }
            f.detectors.sort_unstable();
            f.observables.sort_unstable();
            faults.push(f);
        }
        Ok(DetectorErrorModel {
            num_detectors: nd,
            num_observables: no,
            faults,
            detector_coords: Vec::new(),
        })
    }
}

/// `(check, logical, priors)` with one column per fault.
pub fn dem_matrices(dem: &DetectorErrorModel) -> (BinaryMatrix, BinaryMatrix, Vec<f64>) {
    let f = dem.faults.len();
    let mut check_rows = vec![Vec::new(); dem.num_detectors];
    let mut logical_rows = vec![Vec::new(); dem.num_observables];
    for (j, fault) in dem.faults.iter().enumerate() {
        for &d in &fault.detectors {
            check_rows[d].push(j);
        }
        for &l in &fault.observables {
            logical_rows[l].push(j);
        }
    }
    (
        BinaryMatrix::from_row_supports(f, check_rows),
        BinaryMatrix::from_row_supports(f, logical_rows),
        dem.faults.iter().map(|x| x.p).collect(),
    )
}

/// Samples faults independently with their priors.
pub fn dem_sample_with(dem: &DetectorErrorModel, shots: usize, rng: &mut impl Rng) -> FrameSample {
    let w = shots.div_ceil(64).max(1);
    let mut det = vec![0u64; dem.num_detectors * w];
    let mut obs = vec![0u64; dem.num_observables * w];
    for f in &dem.faults {
        if let Some(sk) = Skip::new(f.p) {
            sk.for_each_hit(shots, rng, |s, _| {
                let (k, b) = (s / 64, 1u64 << (s % 64));
                for &d in &f.detectors {
                    det[d * w + k] ^= b;
                }
                for &l in &f.observables {
                    obs[l * w + k] ^= b;
                }
            });
        }
    }
    FrameSample::from_columns(shots, dem.num_detectors, dem.num_observables, det, obs)
}

pub fn dem_sample(dem: &DetectorErrorModel, shots: usize, seed: u64) -> FrameSample {
    let mut rng = keyed_rng(seed, &[0x6465_6d]);
    dem_sample_with(dem, shots, &mut rng)
}
