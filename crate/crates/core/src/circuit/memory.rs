use serde::{Deserialize, Serialize};

use super::gadgets::{bell_pair_prep, teleported_cnot_consume, GadgetNoise};
use super::{Basis, Circuit, CircuitBuilder, NoiseModel};
use crate::codes::CssCode;
use crate::error::{Error, Result};
use crate::partition::Partition;

/// What a check ancilla does in one tick layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Reset,
    Measure,
    Idle,
    /// CNOT with the neighbour in this interaction slot.
    Cnot(usize),
}

/// Per-tick actions of X-check and Z-check ancillas over one syndrome cycle.
///
/// Both lists have one entry per tick layer. Read cyclically from `Reset`,
/// every slot's `Cnot` must appear once before `Measure`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub x: Vec<Step>,
    pub z: Vec<Step>,
}

impl Schedule {
    /// Depth-8 bivariate bicycle cycle. Slots 0..3 are the `A` (X-checks) or
    /// `B^T` (Z-checks) terms, slots 3..6 the `B` or `A^T` terms.
    pub fn bb_depth8() -> Schedule {
        use Step::*;
        Schedule {
            x: vec![
                Reset,
                Cnot(1),
                Cnot(4),
                Cnot(3),
                Cnot(5),
                Cnot(0),
                Cnot(2),
                Measure,
            ],
            z: vec![
                Cnot(3),
                Cnot(5),
                Cnot(0),
                Cnot(1),
                Cnot(2),
                Cnot(4),
                Measure,
                Reset,
            ],
        }
    }

    /// Surface code cycle: reset, the four compass slots N, W, E, S for both
    /// check types at once, measure.
    pub fn surface_nwes() -> Schedule {
        use Step::*;
        let s = vec![Reset, Cnot(0), Cnot(1), Cnot(2), Cnot(3), Measure];
        Schedule { x: s.clone(), z: s }
    }

    pub fn depth(&self) -> usize {
        self.x.len()
    }

    pub fn validate(&self, slots: usize) -> Result<()> {
        if self.x.len() != self.z.len() || self.x.is_empty() {
            return Err(Error::InvalidCircuit(
                "X and Z schedules must have the same non-zero length".into(),
            ));
        }
        for (name, steps) in [("x", &self.x), ("z", &self.z)] {
            let bad = |m: &str| Error::InvalidCircuit(format!("{name} schedule: {m}"));
            let resets: Vec<usize> = positions(steps, Step::Reset);
            let measures: Vec<usize> = positions(steps, Step::Measure);
            if resets.len() != 1 || measures.len() != 1 {
                return Err(bad("needs exactly one reset and one measure"));
            }
            let r = resets[0];
            let mut seen = vec![false; slots];
            let mut measured = false;
            for k in 1..steps.len() {
                match steps[(r + k) % steps.len()] {
                    Step::Measure => measured = true,
                    Step::Cnot(s) => {
                        if measured {
                            return Err(bad("CNOT after measurement"));
                        }
                        if s >= slots || seen[s] {
                            return Err(bad("slot missing, repeated or out of range"));
                        }
                        seen[s] = true;
                    }
                    _ => {}
                }
            }
            if seen.iter().any(|&s| !s) {
                return Err(bad("not every slot is scheduled"));
            }
        }
        Ok(())
    }

    /// True when the check type resets after it measures within one listing,
    /// so its ancilla must be prepared before the first cycle.
    fn resets_late(steps: &[Step]) -> bool {
        positions(steps, Step::Reset)[0] > positions(steps, Step::Measure)[0]
    }
}

fn positions(steps: &[Step], target: Step) -> Vec<usize> {
    steps
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == target)
        .map(|(i, _)| i)
        .collect()
}

/// Measurement records of one syndrome cycle; a check's outcome is the parity
/// of its records.
#[derive(Clone, Debug, Default)]
pub(super) struct Syndromes {
    pub x: Vec<Vec<usize>>,
    pub z: Vec<Vec<usize>>,
}

fn concat(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

/// Detectors comparing a cycle with the previous one. Coordinates are
/// `(check, round, type)` with type 0 for Z-checks and 1 for X-checks.
pub(super) fn compare_rounds(
    b: &mut CircuitBuilder,
    round: usize,
    prev: &Syndromes,
    cur: &Syndromes,
) {
    for (i, (p, c)) in prev.z.iter().zip(&cur.z).enumerate() {
        b.detector(vec![i as f64, round as f64, 0.0], concat(c, p));
    }
    for (i, (p, c)) in prev.x.iter().zip(&cur.x).enumerate() {
        b.detector(vec![i as f64, round as f64, 1.0], concat(c, p));
    }
}

/// Ideal preparation of the data qubits in a product eigenstate of `basis`.
pub(super) fn init_data(b: &mut CircuitBuilder, data: &[usize], basis: Basis) {
    b.reset(basis, data);
}

/// Transversal data readout, the closing detector layer and the logical
/// observables.
pub(super) fn close_memory(
    b: &mut CircuitBuilder,
    code: &CssCode,
    data: &[usize],
    basis: Basis,
    p_meas: f64,
    last: &Syndromes,
    round: usize,
) {
    let recs = b.measure(basis, p_meas, data);
    let (checks, prev, tag) = match basis {
        Basis::Z => (&code.hz, &last.z, 0.0),
        Basis::X => (&code.hx, &last.x, 1.0),
    };
    for i in 0..checks.rows() {
        let from_data: Vec<usize> = checks.row(i).iter().map(|&q| recs[q]).collect();
        b.detector(
            vec![i as f64, round as f64, tag],
            concat(&from_data, &prev[i]),
        );
    }
    for (k, l) in code.logicals.iter().enumerate() {
        let support = match basis {
            Basis::Z => &l.z,
            Basis::X => &l.x,
        };
        b.observable(k, support.iter().map(|&q| recs[q]).collect());
    }
}

struct Layout {
    n: usize,
    rx: usize,
    rz: usize,
    pool: usize,
}

impl Layout {
    fn x_anc(&self, i: usize) -> usize {
        self.n + i
    }
    fn z_anc(&self, i: usize) -> usize {
        self.n + self.rx + i
    }
    fn pool_base(&self) -> usize {
        self.n + self.rx + self.rz
    }
    fn total(&self) -> usize {
        self.pool_base() + 2 * self.pool
    }
}

/// Interactions in one tick: (control, target, crosses the partition).
fn tick_cnots(
    code: &CssCode,
    sched: &Schedule,
    t: usize,
    lay: &Layout,
    partition: Option<&Partition>,
) -> Vec<(usize, usize, bool)> {
    let node = |v: usize| partition.map(|p| p.node(v));
    let mut out = Vec::new();
    if let Step::Cnot(s) = sched.x[t] {
        for (i, slots) in code.x_slots.iter().enumerate() {
            if let Some(d) = slots[s] {
                let a = lay.x_anc(i);
                out.push((a, d, node(a) != node(d)));
            }
        }
    }
    if let Step::Cnot(s) = sched.z[t] {
        for (i, slots) in code.z_slots.iter().enumerate() {
            if let Some(d) = slots[s] {
                let a = lay.z_anc(i);
                out.push((d, a, node(a) != node(d)));
            }
        }
    }
    out
}

/// Memory experiment with one ancilla per check, following `sched`. With a
/// partition, every check-data interaction across the cut in a noisy cycle
/// becomes a teleported CNOT consuming one Bell pair.
pub(super) fn ancilla_memory_circuit(
    code: &CssCode,
    sched: &Schedule,
    rounds: usize,
    noise: &NoiseModel,
    partition: Option<&Partition>,
    basis: Basis,
) -> Result<Circuit> {
    if rounds == 0 {
        return Err(Error::InvalidCircuit("rounds must be at least 1".into()));
    }
    noise.validate()?;
    let slots = code
        .x_slots
        .iter()
        .chain(&code.z_slots)
        .map(|s| s.len())
        .max()
        .unwrap_or(0);
    sched.validate(slots)?;
    let mut lay = Layout {
        n: code.n,
        rx: code.num_x_checks(),
        rz: code.num_z_checks(),
        pool: 0,
    };
    if let Some(p) = partition {
        if p.num_vertices() != lay.n + lay.rx + lay.rz {
            return Err(Error::InvalidPartition(format!(
                "partition has {} vertices, code has {}",
                p.num_vertices(),
                lay.n + lay.rx + lay.rz
            )));
        }
    }
    let depth = sched.depth();
    let per_tick: Vec<Vec<(usize, usize, bool)>> = (0..depth)
        .map(|t| tick_cnots(code, sched, t, &lay, partition))
        .collect();
    lay.pool = per_tick
        .iter()
        .map(|c| c.iter().filter(|e| e.2).count())
        .max()
        .unwrap_or(0);
    let bell_per_round: usize = per_tick.iter().flatten().filter(|e| e.2).count();

    let data: Vec<usize> = (0..lay.n).collect();
    let x_anc: Vec<usize> = (0..lay.rx).map(|i| lay.x_anc(i)).collect();
    let z_anc: Vec<usize> = (0..lay.rz).map(|i| lay.z_anc(i)).collect();
    let idle_pool: Vec<usize> = (0..lay.pool_base()).collect();
    let gadget_noise = if noise.gadget_per_operation {
        GadgetNoise::PerOperation {
            p_gate: noise.p_gate,
            p_meas: noise.p_meas,
        }
    } else {
        GadgetNoise::Lumped { p: noise.p_gate }
    };

    let mut b = CircuitBuilder::new(lay.total());
    b.meta.rounds = rounds;
    b.meta.basis = Some(basis);
    b.meta.bell_pairs_per_round = bell_per_round;

    init_data(&mut b, &data, basis);
    if Schedule::resets_late(&sched.x) {
        b.reset(Basis::X, &x_anc);
    }
    if Schedule::resets_late(&sched.z) {
        b.reset(Basis::Z, &z_anc);
    }
    b.tick(&[], None);

    let mut prev = Syndromes::default();
    for round in 0..=rounds {
        let noisy = round > 0;
        if noisy {
            b.mark_round_start();
        }
        let mut cur = Syndromes {
            x: vec![Vec::new(); lay.rx],
            z: vec![Vec::new(); lay.rz],
        };
        for t in 0..depth {
            let cnots = &per_tick[t];
            let gadgets: Vec<(usize, usize)> = if noisy {
                cnots.iter().filter(|e| e.2).map(|e| (e.0, e.1)).collect()
            } else {
                Vec::new()
            };
            let bell: Vec<(usize, usize)> = (0..gadgets.len())
                .map(|j| (lay.pool_base() + 2 * j, lay.pool_base() + 2 * j + 1))
                .collect();
            if !gadgets.is_empty() {
                bell_pair_prep(&mut b, &bell, noise.p_bell);
                b.tick(&[], None);
            }
            for (anc, steps, rb) in [(&x_anc, &sched.x, Basis::X), (&z_anc, &sched.z, Basis::Z)] {
                if steps[t] == Step::Reset {
                    if noisy {
                        b.noisy_reset(rb, anc, noise.p_reset);
                    } else {
                        b.reset(rb, anc);
                    }
                }
            }
            let local: Vec<(usize, usize)> = cnots
                .iter()
                .filter(|e| !(noisy && e.2))
                .map(|e| (e.0, e.1))
                .collect();
            b.cx(&local);
            if noisy {
                b.depolarize2(noise.p_gate, &local);
            }
            for (j, &(c, tq)) in gadgets.iter().enumerate() {
                teleported_cnot_consume(&mut b, c, tq, bell[j].0, bell[j].1, gadget_noise);
            }
            let flip = if noisy { noise.p_meas } else { 0.0 };
            if sched.z[t] == Step::Measure {
                let recs = b.measure(Basis::Z, flip, &z_anc);
                cur.z = recs.into_iter().map(|r| vec![r]).collect();
            }
            if sched.x[t] == Step::Measure {
                let recs = b.measure(Basis::X, flip, &x_anc);
                cur.x = recs.into_iter().map(|r| vec![r]).collect();
            }
            b.tick(&idle_pool, noisy.then_some(noise.p_idle));
        }
        if noisy {
            compare_rounds(&mut b, round, &prev, &cur);
        }
        prev = cur;
    }
    close_memory(&mut b, code, &data, basis, noise.p_meas, &prev, rounds + 1);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_schedules_validate() {
        Schedule::bb_depth8().validate(6).unwrap();
        Schedule::surface_nwes().validate(4).unwrap();
    }

    #[test]
    fn malformed_schedules_rejected() {
        use Step::*;
        let mut s = Schedule::bb_depth8();
        s.x[1] = Cnot(4);
        assert!(s.validate(6).is_err());
        let s = Schedule {
            x: vec![Reset, Measure, Cnot(0)],
            z: vec![Reset, Cnot(0), Measure],
        };
        assert!(s.validate(1).is_err());
        let s = Schedule {
            x: vec![Reset, Cnot(0), Measure],
            z: vec![Reset, Cnot(0)],
        };
        assert!(s.validate(1).is_err());
    }

    #[test]
    fn late_reset_detection() {
        let s = Schedule::bb_depth8();
        assert!(!Schedule::resets_late(&s.x));
        assert!(Schedule::resets_late(&s.z));
    }
}
