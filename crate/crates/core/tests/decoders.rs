mod common;

use netqec::circuit::{build_bb_circuit, build_surface_circuit, Basis, NoiseModel};
use netqec::codes::build_preset;
use netqec::decode::{decompose_dem, BpOsdConfig, BpOsdDecoder};
use netqec::gf2::BitVector;
use netqec::sim::{dem_matrices, dem_sample, extract_dem};
use rand::Rng;

#[test]
fn matching_equals_brute_force_on_random_graphs() {
    let mut r = common::rng(1);
    let mut syndromes = 0;
    for _ in 0..100 {
        let nd = r.gen_range(2..=9);
        let nf = r.gen_range(1..=14);
        syndromes += common::check_matching_against_brute_force(&common::random_graphlike_dem(
            &mut r, nd, nf,
        ));
    }
    assert!(syndromes > 500);
}

#[test]
fn matching_equals_brute_force_on_surface_subsets() {
    let c = build_surface_circuit(3, 3, &NoiseModel::uniform(0.01), true, Basis::Z).unwrap();
    let (dem, _) = extract_dem(&c).unwrap().restrict_to_basis(Basis::Z);
    let dem = decompose_dem(&dem).unwrap();
    let mut r = common::rng(2);
    for _ in 0..40 {
        let sub = common::sub_dem(&dem, &mut r, 16);
        if sub.num_detectors <= 63 {
            common::check_matching_against_brute_force(&sub);
        }
    }
}

#[test]
fn bp_recovers_single_faults_on_bb72() {
    let code = build_preset("bb72").unwrap();
    let c = build_bb_circuit(&code, 1, &NoiseModel::uniform(0.001), None, Basis::Z).unwrap();
    let (dem, _) = extract_dem(&c).unwrap().restrict_to_basis(Basis::Z);
    let (h, l, pri) = dem_matrices(&dem);
    let dec = BpOsdDecoder::new(&h, &l, &pri, BpOsdConfig::default()).unwrap();
    let cols = h.columns();
    let lcols = l.columns();
    let mut wrong = 0;
    for (j, col) in cols.iter().enumerate() {
        let syndrome = BitVector::from_positions(h.rows(), col.iter().copied());
        let res = dec.decode(&syndrome).unwrap();
        assert_eq!(h.mul_vec(&res.estimate), syndrome, "fault {j}");
        let want = lcols[j].iter().fold(0u64, |m, &k| m ^ 1 << k);
        if res.observables != want {
            wrong += 1;
        }
    }
    // Single faults are far below the code distance; every one is corrected.
    assert_eq!(
        wrong,
        0,
        "{wrong} of {} single faults miscorrected",
        cols.len()
    );
}

#[test]
fn bposd_corrections_reproduce_sampled_syndromes() {
    let c = build_surface_circuit(3, 3, &NoiseModel::uniform(0.01), true, Basis::Z).unwrap();
    let (dem, _) = extract_dem(&c).unwrap().restrict_to_basis(Basis::Z);
    let (h, l, pri) = dem_matrices(&dem);
    for order in [0, 4] {
        let cfg = BpOsdConfig {
            osd_order: order,
            ..BpOsdConfig::default()
        };
        let dec = BpOsdDecoder::new(&h, &l, &pri, cfg).unwrap();
        let s = dem_sample(&dem, 20_000, order as u64);
        for fired in s.fired_by_shot() {
            let syn = BitVector::from_positions(h.rows(), fired.iter().map(|&d| d as usize));
            let res = dec.decode(&syn).unwrap();
            assert_eq!(h.mul_vec(&res.estimate), syn);
        }
    }
}
