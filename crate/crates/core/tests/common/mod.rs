#![allow(dead_code)]

use std::collections::HashMap;

use netqec::circuit::{
    ghz_measure_gadget, teleported_cnot_gadget, Basis, Circuit, CircuitBuilder, GadgetNoise,
    GhzChannel, Pauli,
};
use netqec::decode::{edge_weight, MatchingGraph};
use netqec::sim::tableau::{run_tableau, Outcome};
use netqec::sim::{DetectorErrorModel, Fault, FrameSample};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Upper `1e-6` quantile of chi-square with `dof` degrees of freedom
/// (Wilson-Hilferty).
pub fn chi2_bound(dof: usize) -> f64 {
    let k = dof.max(1) as f64;
    let z = 4.753;
    k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3)
}

/// Two-sample chi-square statistic over equal sample sizes, with its
/// degrees of freedom.
pub fn chi2_two_sample(a: &HashMap<Vec<bool>, u64>, b: &HashMap<Vec<bool>, u64>) -> (f64, usize) {
    let mut keys: Vec<&Vec<bool>> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut stat = 0.0;
    for k in &keys {
        let x = *a.get(*k).unwrap_or(&0) as f64;
        let y = *b.get(*k).unwrap_or(&0) as f64;
        stat += (x - y) * (x - y) / (x + y);
    }
    (stat, keys.len().saturating_sub(1))
}

fn histogram(shots: usize, mut one: impl FnMut() -> Vec<bool>) -> HashMap<Vec<bool>, u64> {
    let mut h = HashMap::new();
    for _ in 0..shots {
        *h.entry(one()).or_insert(0) += 1;
    }
    h
}

fn last(run: &[bool], n: usize) -> Vec<bool> {
    run[run.len() - n..].to_vec()
}

fn measure_all(b: &mut CircuitBuilder, qubits: &[usize], bases: &[Basis]) {
    for (&q, &basis) in qubits.iter().zip(bases) {
        b.measure(basis, 0.0, &[q]);
    }
}

fn random_basis(r: &mut impl Rng) -> Basis {
    if r.gen() {
        Basis::X
    } else {
        Basis::Z
    }
}

/// Teleported CNOT against a direct CNOT on `c, t`, each half of a Bell pair
/// with a reference qubit.
///
/// A Bell-pair Pauli `(x_a, z_a) (x_b, z_b)` leaves `X_t^(x_a ^ x_b)` and
/// `Z_c^(z_a ^ z_b)` after the gadget, so uniform two-qubit depolarizing noise
/// of rate `p_bell` on the pair equals, on the direct side, no error with
/// weight 3/15 and each of `X_t`, `Z_c`, `X_t Z_c` with weight 4/15.
/// Returns the chi-square statistic and its bound.
pub fn teleported_cnot_oracle(seed: u64, p_bell: f64, p_lumped: f64, shots: usize) -> (f64, f64) {
    let mut r = rng(seed);
    let (c, t, a, b, r1, r2) = (0, 1, 2, 3, 4, 5);
    let bases: Vec<Basis> = (0..4).map(|_| random_basis(&mut r)).collect();
    let h_c: bool = r.gen();
    let h_t: bool = r.gen();
    let cz: bool = r.gen();
    let prep = |bl: &mut CircuitBuilder| {
        bl.reset(Basis::X, &[c, t]);
        bl.reset(Basis::Z, &[r1, r2]);
        bl.cx(&[(c, r1), (t, r2)]);
        if h_c {
            bl.h(&[c]);
        }
        if h_t {
            bl.h(&[t]);
        }
        if cz {
            bl.cz(&[(c, t)]);
        }
        bl.tick(&[], None);
    };
    let mut g = CircuitBuilder::new(6);
    prep(&mut g);
    teleported_cnot_gadget(
        &mut g,
        c,
        t,
        a,
        b,
        p_bell,
        GadgetNoise::Lumped { p: p_lumped },
    )
    .unwrap();
    measure_all(&mut g, &[c, t, r1, r2], &bases);
    let gadget = g.finish();
    let direct: Vec<Circuit> = (0..4)
        .map(|e| {
            let mut d = CircuitBuilder::new(6);
            prep(&mut d);
            d.cx(&[(c, t)]);
            if e & 1 == 1 {
                d.push(netqec::circuit::Instruction::Pauli {
                    pauli: Pauli::X,
                    targets: vec![t],
                });
            }
            if e & 2 == 2 {
                d.push(netqec::circuit::Instruction::Pauli {
                    pauli: Pauli::Z,
                    targets: vec![c],
                });
            }
            d.depolarize2(p_lumped, &[(c, t)]);
            d.tick(&[], None);
            measure_all(&mut d, &[c, t, r1, r2], &bases);
            d.finish()
        })
        .collect();
    let mut rg = rng(seed ^ 0xA5A5);
    let hg = histogram(shots, || {
        last(
            &run_tableau(&gadget, true, Outcome::Random, &mut rg).measurements,
            4,
        )
    });
    let mut rd = rng(seed ^ 0x5A5A);
    let hd = histogram(shots, || {
        let e = if rd.gen::<f64>() < p_bell {
            match rd.gen_range(0..15) {
                0..=2 => 0,
                3..=6 => 1,
                7..=10 => 2,
                _ => 3,
            }
        } else {
            0
        };
        last(
            &run_tableau(&direct[e], true, Outcome::Random, &mut rd).measurements,
            4,
        )
    });
    let (stat, dof) = chi2_two_sample(&hg, &hd);
    (stat, chi2_bound(dof))
}

/// GHZ-mediated stabilizer measurement against a single-ancilla measurement
/// on a random graph state of `w` data qubits, data read out afterwards in
/// random bases.
///
/// For a `Z`-type check a GHZ-qubit Pauli `(x, z)` flips the outcome when
/// `x = 1` and leaves `Z` on its data qubit when `z = 1`; `X`-type checks
/// swap the roles. The direct side injects those equivalents.
pub fn ghz_oracle(
    seed: u64,
    w: usize,
    basis: Basis,
    p_ghz: f64,
    channel: GhzChannel,
    shots: usize,
) -> (f64, f64) {
    let mut r = rng(seed);
    let data: Vec<usize> = (0..w).collect();
    let ghz: Vec<usize> = (w..2 * w).collect();
    let anc = w;
    let read: Vec<Basis> = (0..w).map(|_| random_basis(&mut r)).collect();
    let mut czs = Vec::new();
    for i in 0..w {
        for j in i + 1..w {
            if r.gen_bool(0.5) {
                czs.push((i, j));
            }
        }
    }
    let rot: Vec<usize> = data.iter().copied().filter(|_| r.gen()).collect();
    let prep = |bl: &mut CircuitBuilder| {
        bl.reset(Basis::X, &data);
        for &(i, j) in &czs {
            bl.cz(&[(i, j)]);
            bl.tick(&[], None);
        }
        if !rot.is_empty() {
            bl.h(&rot);
        }
        bl.tick(&[], None);
    };
    let mut g = CircuitBuilder::new(2 * w);
    prep(&mut g);
    let recs = ghz_measure_gadget(&mut g, &data, basis, &ghz, p_ghz, channel, 0.0, 0.0).unwrap();
    assert_eq!(recs.len(), w);
    measure_all(&mut g, &data, &read);
    let gadget = g.finish();

    let mut cache: HashMap<(bool, Vec<bool>), Circuit> = HashMap::new();
    let build_direct = |flip: bool, errs: &[bool]| -> Circuit {
        let mut d = CircuitBuilder::new(w + 1);
        prep(&mut d);
        match basis {
            Basis::Z => {
                d.reset(Basis::Z, &[anc]);
                for &q in &data {
                    d.cx(&[(q, anc)]);
                    d.tick(&[], None);
                }
            }
            Basis::X => {
                d.reset(Basis::X, &[anc]);
                for &q in &data {
                    d.cx(&[(anc, q)]);
                    d.tick(&[], None);
                }
            }
        }
        let (flip_p, data_p) = match basis {
            Basis::Z => (Pauli::X, Pauli::Z),
            Basis::X => (Pauli::Z, Pauli::X),
        };
        if flip {
            d.push(netqec::circuit::Instruction::Pauli {
                pauli: flip_p,
                targets: vec![anc],
            });
        }
        let hit: Vec<usize> = data.iter().copied().filter(|&q| errs[q]).collect();
        if !hit.is_empty() {
            d.push(netqec::circuit::Instruction::Pauli {
                pauli: data_p,
                targets: hit,
            });
        }
        d.measure(basis, 0.0, &[anc]);
        measure_all(&mut d, &data, &read);
        d.finish()
    };

    let mut rg = rng(seed ^ 0x1111);
    let hg = histogram(shots, || {
        let m = run_tableau(&gadget, true, Outcome::Random, &mut rg).measurements;
        let parity = recs.iter().fold(false, |x, &i| x ^ m[i]);
        let mut key = vec![parity];
        key.extend_from_slice(&m[m.len() - w..]);
        key
    });
    let mut rd = rng(seed ^ 0x2222);
    let hd = histogram(shots, || {
        // Per GHZ qubit: (flips the outcome, hits its data qubit).
        let mut flip = false;
        let mut errs = vec![false; w];
        match channel {
            GhzChannel::PerQubit => {
                for e in errs.iter_mut() {
                    if rd.gen::<f64>() < p_ghz {
                        let (fl, da) = match rd.gen_range(0..3) {
                            0 => (true, false),
                            1 => (true, true),
                            _ => (false, true),
                        };
                        flip ^= fl;
                        *e = da;
                    }
                }
            }
            GhzChannel::Joint => {
                if rd.gen::<f64>() < p_ghz {
                    let k: u64 = rd.gen_range(1..1u64 << (2 * w));
                    for (i, e) in errs.iter_mut().enumerate() {
                        flip ^= k >> (2 * i) & 1 == 1;
                        *e = k >> (2 * i + 1) & 1 == 1;
                    }
                }
            }
        }
        let c = cache
            .entry((flip, errs.clone()))
            .or_insert_with(|| build_direct(flip, &errs));
        let m = run_tableau(c, true, Outcome::Random, &mut rd).measurements;
        last(&m, w + 1)
    });
    let (stat, dof) = chi2_two_sample(&hg, &hd);
    (stat, chi2_bound(dof))
}

/// Minimum total integer weight of a fault subset reproducing each syndrome,
/// with the observable mask of one minimiser; `None` when unreachable.
pub fn brute_force_table(dem: &DetectorErrorModel) -> HashMap<Vec<usize>, (i64, u64)> {
    let f = dem.faults.len();
    assert!(f <= 20);
    let sig: Vec<(u64, u64, i64)> = dem
        .faults
        .iter()
        .map(|x| {
            (
                x.detectors.iter().fold(0u64, |m, &d| m ^ 1 << d),
                x.observables.iter().fold(0u64, |m, &l| m ^ 1 << l),
                edge_weight(x.p),
            )
        })
        .collect();
    let mut best: HashMap<u64, (i64, u64)> = HashMap::new();
    for mask in 0u64..1 << f {
        let (mut s, mut o, mut w) = (0u64, 0u64, 0i64);
        for (i, &(ds, os, ws)) in sig.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s ^= ds;
                o ^= os;
                w += ws;
            }
        }
        let e = best.entry(s).or_insert((i64::MAX, 0));
        if w < e.0 {
            *e = (w, o);
        }
    }
    best.into_iter()
        .map(|(s, v)| ((0..64).filter(|&d| s >> d & 1 == 1).collect(), v))
        .collect()
}

/// Random graph-like DEM on at most `nd` detectors with `nf` faults and one
/// observable.
pub fn random_graphlike_dem(r: &mut impl Rng, nd: usize, nf: usize) -> DetectorErrorModel {
    let faults = (0..nf)
        .map(|_| {
            let a = r.gen_range(0..nd);
            let detectors = if r.gen_bool(0.3) {
                vec![a]
            } else {
                let mut b = r.gen_range(0..nd);
                while b == a {
                    b = r.gen_range(0..nd);
                }
                let mut v = vec![a, b];
                v.sort();
                v
            };
            Fault {
                p: r.gen_range(0.01..0.3),
                detectors,
                observables: if r.gen_bool(0.3) { vec![0] } else { vec![] },
            }
        })
        .collect();
    DetectorErrorModel {
        num_detectors: nd,
        num_observables: 1,
        faults,
        detector_coords: vec![],
    }
}

/// Compares matching with the brute-force table on every reachable
/// syndrome: equal minimum weights, and equal observables when the minimiser
/// is the unique one of its weight class (checked by comparing weights only
/// when ties exist). Returns the number of syndromes checked.
pub fn check_matching_against_brute_force(dem: &DetectorErrorModel) -> usize {
    let g = MatchingGraph::from_dem(dem).unwrap();
    let table = brute_force_table(dem);
    // Syndromes whose optimum is reached with two different observable masks.
    let mut ambiguous: HashMap<Vec<usize>, bool> = HashMap::new();
    {
        let f = dem.faults.len();
        let mut seen: HashMap<u64, (i64, u64)> = HashMap::new();
        for mask in 0u64..1 << f {
            let (mut s, mut o, mut w) = (0u64, 0u64, 0i64);
            for (i, x) in dem.faults.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    s ^= x.detectors.iter().fold(0u64, |m, &d| m ^ 1 << d);
                    o ^= x.observables.iter().fold(0u64, |m, &l| m ^ 1 << l);
                    w += edge_weight(x.p);
                }
            }
            let key: Vec<usize> = (0..64).filter(|&d| s >> d & 1 == 1).collect();
            let best = table[&key].0;
            if w == best {
                match seen.get(&s) {
                    Some(&(_, o0)) if o0 != o => {
                        ambiguous.insert(key, true);
                    }
                    None => {
                        seen.insert(s, (w, o));
                    }
                    _ => {}
                }
            }
        }
    }
    for (syndrome, &(w, o)) in &table {
        let fired: Vec<u32> = syndrome.iter().map(|&d| d as u32).collect();
        let (obs, weight) = g.decode_with_weight(&fired);
        assert_eq!(weight, w, "syndrome {syndrome:?}");
        if !ambiguous.contains_key(syndrome) {
            assert_eq!(obs, o, "syndrome {syndrome:?}");
        }
    }
    table.len()
}

/// Per-column firing counts of detectors and observables.
pub fn column_counts(s: &FrameSample) -> (Vec<usize>, Vec<usize>) {
    let obs = (0..s.num_observables)
        .map(|k| (0..s.shots).filter(|&i| s.observable(i, k)).count())
        .collect();
    (s.detector_counts(), obs)
}

/// Largest z-score between two equal-size samples over detector and
/// observable marginals and `pairs` detector co-firing rates.
pub fn max_marginal_z(a: &FrameSample, b: &FrameSample, pairs: &[(usize, usize)]) -> f64 {
    let n = a.shots as f64;
    let z = |x: usize, y: usize| {
        let (px, py) = (x as f64 / n, y as f64 / n);
        let var = (px * (1.0 - px) + py * (1.0 - py)) / n;
        if var == 0.0 {
            if x == y {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (px - py).abs() / var.sqrt()
        }
    };
    let (da, oa) = column_counts(a);
    let (db, ob) = column_counts(b);
    let mut worst = 0.0f64;
    for (x, y) in da.iter().zip(&db).chain(oa.iter().zip(&ob)) {
        worst = worst.max(z(*x, *y));
    }
    let co = |s: &FrameSample, i: usize, j: usize| {
        s.detector_column(i)
            .iter()
            .zip(s.detector_column(j))
            .map(|(x, y)| (x & y).count_ones() as usize)
            .sum::<usize>()
    };
    for &(i, j) in pairs {
        worst = worst.max(z(co(a, i, j), co(b, i, j)));
    }
    worst
}

/// Detector pairs that share a fault, capped at `max`.
pub fn correlated_pairs(dem: &DetectorErrorModel, max: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for f in &dem.faults {
        for i in 0..f.detectors.len() {
            for j in i + 1..f.detectors.len() {
                let pr = (f.detectors[i], f.detectors[j]);
                if !out.contains(&pr) {
                    out.push(pr);
                    if out.len() == max {
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// `nf` random graph-like faults of `dem`, detectors renumbered densely.
pub fn sub_dem(dem: &DetectorErrorModel, r: &mut impl Rng, nf: usize) -> DetectorErrorModel {
    let picked: Vec<&Fault> = dem.faults.choose_multiple(r, nf).collect();
    let mut ids: Vec<usize> = picked
        .iter()
        .flat_map(|f| f.detectors.iter().copied())
        .collect();
    ids.sort();
    ids.dedup();
    let faults = picked
        .iter()
        .map(|f| Fault {
            p: f.p,
            detectors: f
                .detectors
                .iter()
                .map(|d| ids.binary_search(d).unwrap())
                .collect(),
            observables: f.observables.clone(),
        })
        .collect();
    DetectorErrorModel {
        num_detectors: ids.len(),
        num_observables: dem.num_observables,
        faults,
        detector_coords: vec![],
    }
}
