mod common;

use netqec::circuit::{
    build_bb_circuit, build_surface_circuit, Basis, Circuit, GhzChannel, Instruction, NoiseModel,
    Pauli,
};
use netqec::codes::{build_preset, build_surface_code, CssCode};
use netqec::partition::{bipartition, build_combined_tanner};
use netqec::sim::tableau::{run_tableau, Outcome};
use netqec::sim::{extract_dem, DetectorErrorModel};

#[test]
fn teleported_cnot_matches_direct_cnot() {
    for (seed, p_bell, p) in [
        (1, 0.0, 0.0),
        (2, 0.0, 0.0),
        (3, 0.2, 0.0),
        (4, 0.1, 0.05),
        (5, 0.3, 0.1),
    ] {
        let (stat, bound) = common::teleported_cnot_oracle(seed, p_bell, p, 20_000);
        assert!(stat < bound, "seed {seed}: chi2 {stat:.1} >= {bound:.1}");
    }
}

#[test]
fn ghz_gadget_matches_direct_measurement() {
    let mut seed = 10;
    for w in [2, 3, 4] {
        for basis in [Basis::Z, Basis::X] {
            for (p, ch) in [
                (0.0, GhzChannel::PerQubit),
                (0.15, GhzChannel::PerQubit),
                (0.2, GhzChannel::Joint),
            ] {
                seed += 1;
                let (stat, bound) = common::ghz_oracle(seed, w, basis, p, ch, 10_000);
                assert!(
                    stat < bound,
                    "w={w} {basis:?} {ch:?}: chi2 {stat:.1} >= {bound:.1}"
                );
            }
        }
    }
}

/// Inserts `pauli` on data qubit `q` just before the transversal readout.
fn with_final_error(c: &Circuit, n: usize, q: usize, pauli: Pauli) -> Circuit {
    let at = c
        .instructions
        .iter()
        .rposition(|i| matches!(i, Instruction::Measure { targets, .. } if targets.len() == n))
        .unwrap();
    let Instruction::Measure { targets, .. } = &c.instructions[at] else {
        unreachable!()
    };
    let mut ins = c.instructions.clone();
    ins.insert(
        at,
        Instruction::Pauli {
            pauli,
            targets: vec![targets[q]],
        },
    );
    Circuit::from_instructions(ins).unwrap()
}

fn check_final_layer(code: &CssCode, c: &Circuit, basis: Basis, rounds: usize) {
    let (checks, pauli, tag) = match basis {
        Basis::Z => (&code.hz, Pauli::X, 0.0),
        Basis::X => (&code.hx, Pauli::Z, 1.0),
    };
    let coords = c.detector_coords();
    assert!(
        coords[c.num_detectors - 1][1] >= rounds as f64 && coords[c.num_detectors - 1][2] == tag
    );
    let mut rng = common::rng(0);
    for q in 0..code.n {
        let run = run_tableau(
            &with_final_error(c, code.n, q, pauli),
            false,
            Outcome::Zero,
            &mut rng,
        );
        let mut fired: Vec<usize> = (0..c.num_detectors).filter(|&d| run.detectors[d]).collect();
        fired.sort();
        // The closing layer is the last block of detectors, one per check.
        let base = c.num_detectors - checks.rows();
        let mut expect: Vec<usize> = (0..checks.rows())
            .filter(|&i| checks.get(i, q))
            .map(|i| base + i)
            .collect();
        expect.sort();
        assert_eq!(fired, expect, "qubit {q}");
        for (k, l) in code.logicals.iter().enumerate() {
            let support = if basis == Basis::Z { &l.z } else { &l.x };
            assert_eq!(
                run.observables[k],
                support.contains(&q),
                "qubit {q} logical {k}"
            );
        }
    }
}

#[test]
fn pauli_error_before_readout_fires_its_checks() {
    for basis in [Basis::Z, Basis::X] {
        for networked in [false, true] {
            let code = build_surface_code(3).unwrap();
            let c =
                build_surface_circuit(3, 2, &NoiseModel::noiseless(), networked, basis).unwrap();
            check_final_layer(&code, &c, basis, 2);
        }
        let code = build_preset("bb72").unwrap();
        let c = build_bb_circuit(&code, 1, &NoiseModel::noiseless(), None, basis).unwrap();
        check_final_layer(&code, &c, basis, 1);
    }
}

fn signature_map(dem: &DetectorErrorModel) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let mut v: Vec<_> = dem
        .faults
        .iter()
        .map(|f| (f.detectors.clone(), f.observables.clone(), f.p))
        .collect();
    v.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    v
}

#[test]
fn ideal_gadgets_leave_the_error_model_unchanged() {
    let code = build_preset("bb72").unwrap();
    let part = bipartition(&build_combined_tanner(&code), 2, 8, 0).unwrap();
    let noise = NoiseModel::uniform(0.002);
    let mono = build_bb_circuit(&code, 2, &noise, None, Basis::Z).unwrap();
    let split = build_bb_circuit(&code, 2, &noise.with_bell(0.0), Some(&part), Basis::Z).unwrap();
    assert!(split.meta.bell_pairs_per_round > 0);
    assert_eq!(mono.num_detectors, split.num_detectors);
    let a = signature_map(&extract_dem(&mono).unwrap());
    let b = signature_map(&extract_dem(&split).unwrap());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((&x.0, &x.1), (&y.0, &y.1));
        assert!(
            (x.2 - y.2).abs() <= 1e-12 * x.2.max(1e-300),
            "{x:?} vs {y:?}"
        );
    }
}
