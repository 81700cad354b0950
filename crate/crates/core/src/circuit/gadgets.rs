use super::noise::GhzChannel;
use super::{Basis, CircuitBuilder, Instruction, Pauli};

/// Noise carried by the local operations of a teleported CNOT.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GadgetNoise {
    /// One `DEPOLARIZE2(p)` on (control, target) after the gadget, exactly
    /// what the replaced local CNOT would have carried.
    Lumped { p: f64 },
    /// `DEPOLARIZE2(p_gate)` after each of the two CNOTs and `p_meas` flips on
    /// both ancilla measurements.
    PerOperation { p_gate: f64, p_meas: f64 },
}

impl GadgetNoise {
    pub fn none() -> Self {
        GadgetNoise::Lumped { p: 0.0 }
    }
}

/// Prepares `|00> + |11>` on each `(a, b)` pair (ideal), then one
/// `DEPOLARIZE2(p_bell)` per pair. Uses no gates beyond one CNOT per pair, so
/// it fits in a single tick layer.
pub fn bell_pair_prep(b: &mut CircuitBuilder, pairs: &[(usize, usize)], p_bell: f64) {
    let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let bs: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    b.reset(Basis::X, &a);
    b.reset(Basis::Z, &bs);
    b.cx(pairs);
    for &pair in pairs {
        b.depolarize2(p_bell, &[pair]);
    }
}

/// Consumes the Bell pair `(a, b)` to apply CNOT(control -> target); returns
/// the records of `a` (Z basis) and `b` (X basis).
pub fn teleported_cnot_consume(
    bld: &mut CircuitBuilder,
    control: usize,
    target: usize,
    a: usize,
    b: usize,
    noise: GadgetNoise,
) -> (usize, usize) {
    bld.cx(&[(control, a)]);
    bld.cx(&[(b, target)]);
    let flip = match noise {
        GadgetNoise::PerOperation { p_gate, p_meas } => {
            bld.depolarize2(p_gate, &[(control, a)]);
            bld.depolarize2(p_gate, &[(b, target)]);
            p_meas
        }
        GadgetNoise::Lumped { .. } => 0.0,
    };
    let ra = bld.measure(Basis::Z, flip, &[a])[0];
    let rb = bld.measure(Basis::X, flip, &[b])[0];
    bld.cond_pauli(Pauli::X, ra, target);
    bld.cond_pauli(Pauli::Z, rb, control);
    if let GadgetNoise::Lumped { p } = noise {
        bld.depolarize2(p, &[(control, target)]);
    }
    (ra, rb)
}

/// Full teleported CNOT: Bell-pair preparation in its own tick layer, then
/// the consuming operations. Errors on colliding qubits.
pub fn teleported_cnot_gadget(
    bld: &mut CircuitBuilder,
    control: usize,
    target: usize,
    ancilla_a: usize,
    ancilla_b: usize,
    p_bell: f64,
    noise: GadgetNoise,
) -> crate::Result<(usize, usize)> {
    let qs = [control, target, ancilla_a, ancilla_b];
    for i in 0..4 {
        for j in i + 1..4 {
            if qs[i] == qs[j] {
                return Err(crate::Error::InvalidCircuit(format!(
                    "teleported CNOT qubit {} used twice",
                    qs[i]
                )));
            }
        }
    }
    bell_pair_prep(bld, &[(ancilla_a, ancilla_b)], p_bell);
    bld.tick(&[], None);
    Ok(teleported_cnot_consume(
        bld, control, target, ancilla_a, ancilla_b, noise,
    ))
}

/// Ideal preparation of one GHZ state per group, followed by the GHZ
/// channel at rate `p` (omitted when `noise` is `None`).
///
/// X-type groups get `|0..0> + |1..1>`; Z-type groups get its Hadamard
/// image. Fan-out is a doubling tree so every tick layer uses each qubit in
/// at most one gate; the layers carry no idle noise.
pub fn ghz_prepare(
    b: &mut CircuitBuilder,
    groups: &[(Basis, Vec<usize>)],
    noise: Option<(f64, GhzChannel)>,
) {
    let heads: Vec<usize> = groups.iter().filter_map(|g| g.1.first().copied()).collect();
    let tails: Vec<usize> = groups
        .iter()
        .flat_map(|g| g.1.iter().skip(1).copied())
        .collect();
    b.reset(Basis::X, &heads);
    b.reset(Basis::Z, &tails);
    let max_w = groups.iter().map(|g| g.1.len()).max().unwrap_or(0);
    let mut filled = 1;
    while filled < max_w {
        let mut pairs = Vec::new();
        for (_, qs) in groups {
            for i in 0..filled {
                if i + filled < qs.len() {
                    pairs.push((qs[i], qs[i + filled]));
                }
            }
        }
        b.cx(&pairs);
        b.tick(&[], None);
        filled *= 2;
    }
    let rotated: Vec<usize> = groups
        .iter()
        .filter(|g| g.0 == Basis::Z)
        .flat_map(|g| g.1.iter().copied())
        .collect();
    if !rotated.is_empty() {
        b.h(&rotated);
        b.tick(&[], None);
    }
    match noise {
        Some((p, GhzChannel::PerQubit)) => {
            let all: Vec<usize> = groups.iter().flat_map(|g| g.1.iter().copied()).collect();
            b.depolarize1(p, &all);
        }
        Some((p, GhzChannel::Joint)) => {
            for (_, qs) in groups {
                if !qs.is_empty() {
                    b.push(Instruction::DepolarizeN {
                        p,
                        targets: qs.clone(),
                    });
                }
            }
        }
        None => {}
    }
}

/// Measures the `basis`-type stabilizer on `data` through a GHZ state on
/// `ghz`: one local CNOT per (data, GHZ) pair, then single-qubit readout of
/// the GHZ qubits. The stabilizer outcome is the parity of the returned
/// records.
pub fn ghz_measure_gadget(
    b: &mut CircuitBuilder,
    data: &[usize],
    basis: Basis,
    ghz: &[usize],
    p_ghz: f64,
    channel: GhzChannel,
    p_gate: f64,
    p_meas: f64,
) -> crate::Result<Vec<usize>> {
    if data.len() != ghz.len() || data.is_empty() {
        return Err(crate::Error::InvalidCircuit(format!(
            "GHZ gadget needs equal non-zero lengths, got {} data and {} GHZ qubits",
            data.len(),
            ghz.len()
        )));
    }
    ghz_prepare(b, &[(basis, ghz.to_vec())], Some((p_ghz, channel)));
    let pairs: Vec<(usize, usize)> = data
        .iter()
        .zip(ghz)
        .map(|(&d, &g)| match basis {
            Basis::X => (g, d),
            Basis::Z => (d, g),
        })
        .collect();
    b.cx(&pairs);
    b.depolarize2(p_gate, &pairs);
    b.tick(&[], None);
    Ok(b.measure(basis, p_meas, ghz))
}
