//! Noisy stabilizer circuits and syndrome-extraction builders.

mod bb;
mod gadgets;
mod memory;
mod noise;
mod surface;
mod text;

pub use bb::{build_bb_circuit, build_bb_circuit_with_schedule};
pub use gadgets::{
    bell_pair_prep, ghz_measure_gadget, ghz_prepare, teleported_cnot_consume,
    teleported_cnot_gadget, GadgetNoise,
};
pub use memory::{Schedule, Step};
pub use noise::{bell_fidelity_to_p, bell_p_to_fidelity, GhzChannel, NoiseModel};
pub use surface::build_surface_circuit;
pub use text::{circuit_from_text, circuit_to_text};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    /// Detector coordinate tag: 0 for Z-type checks, 1 for X-type checks.
    pub fn tag(self) -> f64 {
        match self {
            Basis::Z => 0.0,
            Basis::X => 1.0,
        }
    }

    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

impl std::str::FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Basis::X),
            "Z" | "z" => Ok(Basis::Z),
            _ => Err(Error::config(
                "basis",
                format!("expected X or Z, got `{s}`"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// (x, z) components.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// One circuit instruction. Record references are absolute measurement
/// indices; the text form writes them as `rec[-k]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    /// `R` (Z basis) or `RX`.
    Reset {
        basis: Basis,
        targets: Vec<usize>,
    },
    H {
        targets: Vec<usize>,
    },
    Cx {
        pairs: Vec<(usize, usize)>,
    },
    Cz {
        pairs: Vec<(usize, usize)>,
    },
    /// `M(p)` / `MX(p)`: the recorded outcome is flipped with probability `flip`.
    Measure {
        basis: Basis,
        flip: f64,
        targets: Vec<usize>,
    },
    /// Deterministic Pauli gate.
    Pauli {
        pauli: Pauli,
        targets: Vec<usize>,
    },
    /// `X_ERROR(p)`, `Y_ERROR(p)`, `Z_ERROR(p)`.
    PauliError {
        pauli: Pauli,
        p: f64,
        targets: Vec<usize>,
    },
    Depolarize1 {
        p: f64,
        targets: Vec<usize>,
    },
    Depolarize2 {
        p: f64,
        pairs: Vec<(usize, usize)>,
    },
    /// One joint channel on all targets: each of the `4^w - 1` non-identity
    /// Paulis with probability `p / (4^w - 1)`.
    DepolarizeN {
        p: f64,
        targets: Vec<usize>,
    },
    /// Pauli on `target` applied when measurement `record` reads 1.
    CondPauli {
        pauli: Pauli,
        record: usize,
        target: usize,
    },
    Detector {
        coords: Vec<f64>,
        records: Vec<usize>,
    },
    Observable {
        index: usize,
        records: Vec<usize>,
    },
    Tick,
}

impl Instruction {
    fn probability(&self) -> Option<f64> {
        match self {
            Instruction::Measure { flip, .. } => Some(*flip),
            Instruction::PauliError { p, .. }
            | Instruction::Depolarize1 { p, .. }
            | Instruction::Depolarize2 { p, .. }
            | Instruction::DepolarizeN { p, .. } => Some(*p),
            _ => None,
        }
    }

    fn qubits(&self) -> Vec<usize> {
        match self {
            Instruction::Reset { targets, .. }
            | Instruction::H { targets }
            | Instruction::Measure { targets, .. }
            | Instruction::Pauli { targets, .. }
            | Instruction::PauliError { targets, .. }
            | Instruction::Depolarize1 { targets, .. }
            | Instruction::DepolarizeN { targets, .. } => targets.clone(),
            Instruction::Cx { pairs }
            | Instruction::Cz { pairs }
            | Instruction::Depolarize2 { pairs, .. } => {
                pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
            }
            Instruction::CondPauli { target, .. } => vec![*target],
            _ => Vec::new(),
        }
    }
}

/// Builder-level description carried alongside the instruction list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CircuitMeta {
    /// Noisy syndrome cycles.
    pub rounds: usize,
    pub basis: Option<Basis>,
    /// Instruction index at which each noisy round starts.
    pub round_starts: Vec<usize>,
    /// Teleported CNOTs (one Bell pair each) per noisy round.
    pub bell_pairs_per_round: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub instructions: Vec<Instruction>,
    pub num_measurements: usize,
    pub num_detectors: usize,
    pub num_observables: usize,
    pub meta: CircuitMeta,
}

impl Circuit {
    /// Builds a circuit from raw instructions, checking every invariant.
    pub fn from_instructions(instructions: Vec<Instruction>) -> Result<Circuit> {
        let mut b = CircuitBuilder::new(0);
        for ins in instructions {
            b.push(ins);
        }
        let c = b.finish();
        c.validate()?;
        Ok(c)
    }

    /// Probabilities in range, qubits in range, distinct gate operands and
    /// record references that point backwards.
    pub fn validate(&self) -> Result<()> {
        let mut measured = 0usize;
        for (i, ins) in self.instructions.iter().enumerate() {
            if let Some(p) = ins.probability() {
                if !(0.0..=1.0).contains(&p) || p.is_nan() {
                    return Err(Error::InvalidProbability(p));
                }
            }
            for q in ins.qubits() {
                if q >= self.num_qubits {
                    return Err(Error::InvalidCircuit(format!(
                        "instruction {i} targets qubit {q} of {}",
                        self.num_qubits
                    )));
                }
            }
            match ins {
                Instruction::Cx { pairs }
                | Instruction::Cz { pairs }
                | Instruction::Depolarize2 { pairs, .. } => {
                    if pairs.iter().any(|&(a, b)| a == b) {
                        return Err(Error::InvalidCircuit(format!(
                            "instruction {i} pairs a qubit with itself"
                        )));
                    }
                }
                Instruction::DepolarizeN { targets, .. } => {
                    let mut t = targets.clone();
                    t.sort_unstable();
                    t.dedup();
                    if t.len() != targets.len() || targets.is_empty() || targets.len() > 8 {
                        return Err(Error::InvalidCircuit(format!(
                            "instruction {i} needs 1..=8 distinct targets"
                        )));
                    }
                }
                Instruction::Measure { targets, .. } => measured += targets.len(),
                Instruction::CondPauli { record, .. } => {
                    if *record >= measured {
                        return Err(Error::InvalidCircuit(format!(
                            "instruction {i} uses measurement {record} before it exists"
                        )));
                    }
                }
                Instruction::Detector { records, .. } | Instruction::Observable { records, .. } => {
                    if let Some(r) = records.iter().find(|&&r| r >= measured) {
                        return Err(Error::InvalidCircuit(format!(
                            "instruction {i} uses measurement {r} before it exists"
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Each qubit takes part in at most one unitary gate (H, CX, CZ) between
    /// consecutive TICKs.
    pub fn check_schedule(&self) -> Result<()> {
        let mut used = vec![false; self.num_qubits];
        let mut touched = Vec::new();
        let mut layer = 0;
        for ins in &self.instructions {
            let qs: Vec<usize> = match ins {
                Instruction::H { targets } => targets.clone(),
                Instruction::Cx { pairs } | Instruction::Cz { pairs } => {
                    pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
                }
                Instruction::Tick => {
                    for &q in &touched {
                        used[q] = false;
                    }
                    touched.clear();
                    layer += 1;
                    continue;
                }
                _ => continue,
            };
            for q in qs {
                if used[q] {
                    return Err(Error::InvalidCircuit(format!(
                        "qubit {q} used by two gates in tick layer {layer}"
                    )));
                }
                used[q] = true;
                touched.push(q);
            }
        }
        Ok(())
    }

    /// Number of two-qubit depolarizing channels emitted with rate exactly `p`.
    pub fn count_depolarize2(&self, p: f64) -> usize {
        self.instructions
            .iter()
            .map(|ins| match ins {
                Instruction::Depolarize2 { p: q, pairs } if *q == p => pairs.len(),
                _ => 0,
            })
            .sum()
    }

    pub fn num_ticks(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Tick))
            .count()
    }

    /// Coordinates of every detector in declaration order.
    pub fn detector_coords(&self) -> Vec<Vec<f64>> {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Detector { coords, .. } => Some(coords.clone()),
                _ => None,
            })
            .collect()
    }

    /// Check type of each detector from its third coordinate, when present.
    pub fn detector_bases(&self) -> Vec<Option<Basis>> {
        self.detector_coords()
            .iter()
            .map(|c| match c.get(2) {
                Some(&t) if t == 0.0 => Some(Basis::Z),
                Some(&t) if t == 1.0 => Some(Basis::X),
                _ => None,
            })
            .collect()
    }

    /// Copy with every noise channel and measurement flip removed.
    pub fn without_noise(&self) -> Circuit {
        let instructions = self
            .instructions
            .iter()
            .filter_map(|ins| match ins {
                Instruction::PauliError { .. }
                | Instruction::Depolarize1 { .. }
                | Instruction::Depolarize2 { .. }
                | Instruction::DepolarizeN { .. } => None,
                Instruction::Measure { basis, targets, .. } => Some(Instruction::Measure {
                    basis: *basis,
                    flip: 0.0,
                    targets: targets.clone(),
                }),
                other => Some(other.clone()),
            })
            .collect();
        Circuit {
            instructions,
            ..self.clone()
        }
    }
}

/// Incremental circuit construction with measurement bookkeeping and per-tick
/// occupancy tracking for idle noise.
pub struct CircuitBuilder {
    num_qubits: usize,
    instructions: Vec<Instruction>,
    measurements: usize,
    detectors: usize,
    observables: usize,
    busy: Vec<bool>,
    pub meta: CircuitMeta,
}

impl CircuitBuilder {
    pub fn new(num_qubits: usize) -> Self {
        CircuitBuilder {
            num_qubits,
            instructions: Vec::new(),
            measurements: 0,
            detectors: 0,
            observables: 0,
            busy: vec![false; num_qubits],
            meta: CircuitMeta::default(),
        }
    }

    pub fn num_measurements(&self) -> usize {
        self.measurements
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    fn mark(&mut self, q: usize) {
        if q >= self.num_qubits {
            self.num_qubits = q + 1;
            self.busy.resize(self.num_qubits, false);
        }
        self.busy[q] = true;
    }

    /// Appends any instruction, updating counters.
    pub fn push(&mut self, ins: Instruction) {
        let occupies = matches!(
            ins,
            Instruction::Reset { .. }
                | Instruction::H { .. }
                | Instruction::Cx { .. }
                | Instruction::Cz { .. }
                | Instruction::Measure { .. }
        );
        for q in ins.qubits() {
            if occupies {
                self.mark(q);
            } else if q >= self.num_qubits {
                self.num_qubits = q + 1;
                self.busy.resize(self.num_qubits, false);
            }
        }
        match &ins {
            Instruction::Measure { targets, .. } => self.measurements += targets.len(),
            Instruction::Detector { .. } => self.detectors += 1,
            Instruction::Observable { index, .. } => {
                self.observables = self.observables.max(index + 1)
            }
            Instruction::Tick => self.busy.iter_mut().for_each(|b| *b = false),
            _ => {}
        }
        self.instructions.push(ins);
    }

    pub fn reset(&mut self, basis: Basis, targets: &[usize]) {
        if !targets.is_empty() {
            self.push(Instruction::Reset {
                basis,
                targets: targets.to_vec(),
            });
        }
    }

    /// Reset followed by the flip that spoils it (X after R, Z after RX).
    pub fn noisy_reset(&mut self, basis: Basis, targets: &[usize], p: f64) {
        if targets.is_empty() {
            return;
        }
        self.reset(basis, targets);
        let pauli = match basis {
            Basis::Z => Pauli::X,
            Basis::X => Pauli::Z,
        };
        self.push(Instruction::PauliError {
            pauli,
            p,
            targets: targets.to_vec(),
        });
    }

    pub fn h(&mut self, targets: &[usize]) {
        if !targets.is_empty() {
            self.push(Instruction::H {
                targets: targets.to_vec(),
            });
        }
    }

    pub fn cx(&mut self, pairs: &[(usize, usize)]) {
        if !pairs.is_empty() {
            self.push(Instruction::Cx {
                pairs: pairs.to_vec(),
            });
        }
    }

    pub fn cz(&mut self, pairs: &[(usize, usize)]) {
        if !pairs.is_empty() {
            self.push(Instruction::Cz {
                pairs: pairs.to_vec(),
            });
        }
    }

    pub fn depolarize1(&mut self, p: f64, targets: &[usize]) {
        if !targets.is_empty() {
            self.push(Instruction::Depolarize1 {
                p,
                targets: targets.to_vec(),
            });
        }
    }

    pub fn depolarize2(&mut self, p: f64, pairs: &[(usize, usize)]) {
        if !pairs.is_empty() {
            self.push(Instruction::Depolarize2 {
                p,
                pairs: pairs.to_vec(),
            });
        }
    }

    /// Returns the record index of each target, in order.
    pub fn measure(&mut self, basis: Basis, flip: f64, targets: &[usize]) -> Vec<usize> {
        let start = self.measurements;
        if !targets.is_empty() {
            self.push(Instruction::Measure {
                basis,
                flip,
                targets: targets.to_vec(),
            });
        }
        (start..self.measurements).collect()
    }

    pub fn cond_pauli(&mut self, pauli: Pauli, record: usize, target: usize) {
        self.push(Instruction::CondPauli {
            pauli,
            record,
            target,
        });
    }

    pub fn detector(&mut self, coords: Vec<f64>, records: Vec<usize>) {
        self.push(Instruction::Detector { coords, records });
    }

    pub fn observable(&mut self, index: usize, records: Vec<usize>) {
        self.push(Instruction::Observable { index, records });
    }

    /// Closes the tick layer. Qubits of `idle_pool` that no reset, gate or
    /// measurement touched in this layer get `DEPOLARIZE1(p_idle)`.
    pub fn tick(&mut self, idle_pool: &[usize], p_idle: Option<f64>) {
        if let Some(p) = p_idle {
            let idle: Vec<usize> = idle_pool
                .iter()
                .copied()
                .filter(|&q| !self.busy.get(q).copied().unwrap_or(false))
                .collect();
            self.depolarize1(p, &idle);
        }
        self.push(Instruction::Tick);
    }

    pub fn mark_round_start(&mut self) {
        let at = self.instructions.len();
        self.meta.round_starts.push(at);
    }

    pub fn finish(self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            instructions: self.instructions,
            num_measurements: self.measurements,
            num_detectors: self.detectors,
            num_observables: self.observables,
            meta: self.meta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_counts() {
        let mut b = CircuitBuilder::new(3);
        b.reset(Basis::Z, &[0, 1, 2]);
        b.cx(&[(0, 1)]);
        b.tick(&[0, 1, 2], Some(0.01));
        let r = b.measure(Basis::Z, 0.0, &[1, 2]);
        assert_eq!(r, vec![0, 1]);
        b.detector(vec![0.0], vec![0]);
        b.observable(2, vec![1]);
        let c = b.finish();
        assert_eq!(c.num_measurements, 2);
        assert_eq!(c.num_detectors, 1);
        assert_eq!(c.num_observables, 3);
        assert!(c.validate().is_ok());
        assert!(c.check_schedule().is_ok());
    }

    #[test]
    fn idle_noise_only_on_untouched() {
        let mut b = CircuitBuilder::new(4);
        b.cx(&[(0, 1)]);
        b.tick(&[0, 1, 2, 3], Some(0.1));
        let c = b.finish();
        assert_eq!(
            c.instructions[1],
            Instruction::Depolarize1 {
                p: 0.1,
                targets: vec![2, 3]
            }
        );
    }

    #[test]
    fn forward_record_rejected() {
        let ins = vec![
            Instruction::Detector {
                coords: vec![],
                records: vec![0],
            },
            Instruction::Measure {
                basis: Basis::Z,
                flip: 0.0,
                targets: vec![0],
            },
        ];
        assert!(Circuit::from_instructions(ins).is_err());
    }

    #[test]
    fn schedule_violation_detected() {
        let mut b = CircuitBuilder::new(3);
        b.cx(&[(0, 1)]);
        b.cx(&[(1, 2)]);
        assert!(b.finish().check_schedule().is_err());
    }

    #[test]
    fn bad_probability_rejected() {
        let ins = vec![Instruction::Depolarize1 {
            p: 1.5,
            targets: vec![0],
        }];
        assert!(matches!(
            Circuit::from_instructions(ins),
            Err(Error::InvalidProbability(_))
        ));
    }
}
