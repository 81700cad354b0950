use super::gadgets::ghz_prepare;
use super::memory::{
    ancilla_memory_circuit, close_memory, compare_rounds, init_data, Schedule, Syndromes,
};
use super::{Basis, Circuit, CircuitBuilder, NoiseModel};
use crate::codes::{build_surface_code, CssCode};
use crate::error::{Error, Result};

/// Planar surface-code memory experiment.
///
/// Monolithic circuits use one ancilla per check; networked circuits measure
/// every check through a GHZ state with one qubit per neighbour. Both start
/// with an ideal projection round and end with a transversal data readout.
pub fn build_surface_circuit(
    d: usize,
    rounds: usize,
    noise: &NoiseModel,
    networked: bool,
    basis: Basis,
) -> Result<Circuit> {
    let code = build_surface_code(d)?;
    if networked {
        ghz_memory_circuit(&code, rounds, noise, basis)
    } else {
        ancilla_memory_circuit(&code, &Schedule::surface_nwes(), rounds, noise, None, basis)
    }
}

/// GHZ-mediated memory experiment: per cycle, one ideal GHZ state per check
/// hit by the GHZ channel, four CNOT layers in compass order, then GHZ
/// readout. Idle noise applies to data qubits only.
pub(super) fn ghz_memory_circuit(
    code: &CssCode,
    rounds: usize,
    noise: &NoiseModel,
    basis: Basis,
) -> Result<Circuit> {
    if rounds == 0 {
        return Err(Error::InvalidCircuit("rounds must be at least 1".into()));
    }
    noise.validate()?;
    let n = code.n;
    let slots = code
        .x_slots
        .iter()
        .chain(&code.z_slots)
        .map(|s| s.len())
        .max()
        .unwrap_or(0);

    // GHZ qubit for every (check, slot) with a neighbour.
    let mut next = n;
    let mut assign = |checks: &[Vec<Option<usize>>]| -> Vec<Vec<Option<usize>>> {
        checks
            .iter()
            .map(|s| {
                s.iter()
                    .map(|d| {
                        d.map(|_| {
                            next += 1;
                            next - 1
                        })
                    })
                    .collect()
            })
            .collect()
    };
    let x_ghz = assign(&code.x_slots);
    let z_ghz = assign(&code.z_slots);
    let total = next;
    let groups: Vec<(Basis, Vec<usize>)> = x_ghz
        .iter()
        .map(|g| (Basis::X, g.iter().flatten().copied().collect()))
        .chain(
            z_ghz
                .iter()
                .map(|g| (Basis::Z, g.iter().flatten().copied().collect())),
        )
        .collect();
    let data: Vec<usize> = (0..n).collect();

    let mut b = CircuitBuilder::new(total);
    b.meta.rounds = rounds;
    b.meta.basis = Some(basis);
    init_data(&mut b, &data, basis);
    b.tick(&[], None);

    let mut prev = Syndromes::default();
    for round in 0..=rounds {
        let noisy = round > 0;
        if noisy {
            b.mark_round_start();
        }
        ghz_prepare(
            &mut b,
            &groups,
            noisy.then_some((noise.p_ghz, noise.ghz_channel)),
        );
        b.tick(&[], None);
        for s in 0..slots {
            let mut pairs = Vec::new();
            for (checks, ghz, kind) in [
                (&code.x_slots, &x_ghz, Basis::X),
                (&code.z_slots, &z_ghz, Basis::Z),
            ] {
                for (c, g) in checks.iter().zip(ghz) {
                    if let (Some(Some(dq)), Some(Some(gq))) = (c.get(s), g.get(s)) {
                        pairs.push(match kind {
                            Basis::X => (*gq, *dq),
                            Basis::Z => (*dq, *gq),
                        });
                    }
                }
            }
            b.cx(&pairs);
            if noisy {
                b.depolarize2(noise.p_gate, &pairs);
            }
            b.tick(&data, noisy.then_some(noise.p_idle));
        }
        let flip = if noisy { noise.p_meas } else { 0.0 };
        let mut cur = Syndromes::default();
        let z_targets: Vec<usize> = z_ghz.iter().flatten().flatten().copied().collect();
        let x_targets: Vec<usize> = x_ghz.iter().flatten().flatten().copied().collect();
        let z_recs = b.measure(Basis::Z, flip, &z_targets);
        let x_recs = b.measure(Basis::X, flip, &x_targets);
        let split = |ghz: &[Vec<Option<usize>>], recs: &[usize]| -> Vec<Vec<usize>> {
            let mut k = 0;
            ghz.iter()
                .map(|g| {
                    let w = g.iter().flatten().count();
                    k += w;
                    recs[k - w..k].to_vec()
                })
                .collect()
        };
        cur.z = split(&z_ghz, &z_recs);
        cur.x = split(&x_ghz, &x_recs);
        b.tick(&data, noisy.then_some(noise.p_idle));
        if noisy {
            compare_rounds(&mut b, round, &prev, &cur);
        }
        prev = cur;
    }
    close_memory(&mut b, code, &data, basis, noise.p_meas, &prev, rounds + 1);
    Ok(b.finish())
}
