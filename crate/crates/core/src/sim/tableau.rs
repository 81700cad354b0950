//! Stabilizer tableau simulator (CHP style), used as the reference run for
//! the frame sampler and as an oracle in tests.

use rand::Rng;

use crate::circuit::{Basis, Circuit, Instruction, Pauli};

/// Destabilizer/stabilizer tableau on `n` qubits, all initialised to `|0>`.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    words: usize,
    // 2n + 1 rows (last is scratch), each `words` u64 for x and for z.
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

/// How to resolve measurements whose outcome is random.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Always report 0 (reference runs).
    Zero,
    /// Flip a fair coin.
    Random,
}

impl Tableau {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Tableau {
            n,
            words,
            x: vec![0; rows * words],
            z: vec![0; rows * words],
            r: vec![false; rows],
        };
        for i in 0..n {
            t.x[i * words + i / 64] |= 1 << (i % 64);
            t.z[(n + i) * words + i / 64] |= 1 << (i % 64);
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn bit(v: &[u64], row: usize, words: usize, q: usize) -> bool {
        v[row * words + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn xb(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.x, row, self.words, q)
    }

    #[inline]
    fn zb(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.z, row, self.words, q)
    }

    fn flip_x(&mut self, row: usize, q: usize) {
        self.x[row * self.words + q / 64] ^= 1 << (q % 64);
    }

    fn flip_z(&mut self, row: usize, q: usize) {
        self.z[row * self.words + q / 64] ^= 1 << (q % 64);
    }

    pub fn h(&mut self, q: usize) {
        for row in 0..2 * self.n {
            let (xv, zv) = (self.xb(row, q), self.zb(row, q));
            self.r[row] ^= xv & zv;
            if xv != zv {
                self.flip_x(row, q);
                self.flip_z(row, q);
            }
        }
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for row in 0..2 * self.n {
            let (xc, zc, xt, zt) = (
                self.xb(row, c),
                self.zb(row, c),
                self.xb(row, t),
                self.zb(row, t),
            );
            self.r[row] ^= xc & zt & !(xt ^ zc);
            if xc {
                self.flip_x(row, t);
            }
            if zt {
                self.flip_z(row, c);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cx(a, b);
        self.h(b);
    }

    pub fn pauli(&mut self, p: Pauli, q: usize) {
        let (px, pz) = p.bits();
        for row in 0..2 * self.n {
            // X anticommutes with Z components, Z with X components.
            let anti = (px & self.zb(row, q)) ^ (pz & self.xb(row, q));
            self.r[row] ^= anti;
        }
    }

    /// Multiplies row `i` into row `h`, tracking the sign.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut g: i64 = 0;
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let plus = (x1 & z1 & z2 & !x2) | (x1 & !z1 & x2 & z2) | (!x1 & z1 & x2 & !z2);
            let minus = (x1 & z1 & x2 & !z2) | (x1 & !z1 & z2 & !x2) | (!x1 & z1 & x2 & z2);
            g += plus.count_ones() as i64 - minus.count_ones() as i64;
            self.x[h * w + k] = x1 ^ x2;
            self.z[h * w + k] = z1 ^ z2;
        }
        let total = (2 * self.r[h] as i64 + 2 * self.r[i] as i64 + g).rem_euclid(4);
        self.r[h] = total == 2;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        self.x.copy_within(src * w..(src + 1) * w, dst * w);
        self.z.copy_within(src * w..(src + 1) * w, dst * w);
        self.r[dst] = self.r[src];
    }

    fn clear_row(&mut self, row: usize) {
        let w = self.words;
        self.x[row * w..(row + 1) * w].fill(0);
        self.z[row * w..(row + 1) * w].fill(0);
        self.r[row] = false;
    }

    /// Whether a Z measurement of `q` has a determined outcome.
    pub fn is_deterministic_z(&self, q: usize) -> bool {
        (self.n..2 * self.n).all(|p| !self.xb(p, q))
    }

    /// Z-basis measurement.
    pub fn measure_z(&mut self, q: usize, mode: Outcome, rng: &mut impl Rng) -> bool {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&p| self.xb(p, q)) {
            for i in 0..2 * n {
                if i != p && self.xb(i, q) {
                    self.rowsum(i, p);
                }
            }
            self.copy_row(p - n, p);
            self.clear_row(p);
            self.flip_z(p, q);
            let outcome = match mode {
                Outcome::Zero => false,
                Outcome::Random => rng.gen(),
            };
            self.r[p] = outcome;
            outcome
        } else {
            let scratch = 2 * n;
            self.clear_row(scratch);
            for i in 0..n {
                if self.xb(i, q) {
                    self.rowsum(scratch, i + n);
                }
            }
            self.r[scratch]
        }
    }

    pub fn measure(&mut self, basis: Basis, q: usize, mode: Outcome, rng: &mut impl Rng) -> bool {
        match basis {
            Basis::Z => self.measure_z(q, mode, rng),
            Basis::X => {
                self.h(q);
                let m = self.measure_z(q, mode, rng);
                self.h(q);
                m
            }
        }
    }

    pub fn reset(&mut self, basis: Basis, q: usize, rng: &mut impl Rng) {
        if self.measure_z(q, Outcome::Random, rng) {
            self.pauli(Pauli::X, q);
        }
        if basis == Basis::X {
            self.h(q);
        }
    }

    /// Expectation sign of a Pauli product if it is in the stabilizer group:
    /// `Some(false)` for +1, `Some(true)` for -1, `None` when random.
    pub fn peek_pauli(&self, paulis: &[(usize, Pauli)]) -> Option<bool> {
        let n = self.n;
        let mut probe = self.clone();
        // Anticommutation with any stabilizer means a random outcome.
        for s in n..2 * n {
            let mut anti = false;
            for &(q, p) in paulis {
                let (px, pz) = p.bits();
                anti ^= (px & probe.zb(s, q)) ^ (pz & probe.xb(s, q));
            }
            if anti {
                return None;
            }
        }
        // Destabilizers that anticommute select the stabilizers in the product.
        let scratch = 2 * n;
        probe.clear_row(scratch);
        for d in 0..n {
            let mut anti = false;
            for &(q, p) in paulis {
                let (px, pz) = p.bits();
                anti ^= (px & probe.zb(d, q)) ^ (pz & probe.xb(d, q));
            }
            if anti {
                probe.rowsum(scratch, d + n);
            }
        }
        // The product equals the target up to sign; Y = iXZ bookkeeping is
        // handled by rowsum, so only the sign bit remains.
        Some(probe.r[scratch])
    }
}

/// Outcome of running a circuit on the tableau simulator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableauRun {
    pub measurements: Vec<bool>,
    pub detectors: Vec<bool>,
    pub observables: Vec<bool>,
}

/// Runs `circuit` once. Noise channels are sampled when `noisy` is set and
/// ignored otherwise; random measurement outcomes follow `mode`.
pub fn run_tableau(
    circuit: &Circuit,
    noisy: bool,
    mode: Outcome,
    rng: &mut impl Rng,
) -> TableauRun {
    let mut t = Tableau::new(circuit.num_qubits);
    let mut meas: Vec<bool> = Vec::with_capacity(circuit.num_measurements);
    let mut dets = Vec::with_capacity(circuit.num_detectors);
    let mut obs = vec![false; circuit.num_observables];
    const PAULIS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    for ins in &circuit.instructions {
        match ins {
            Instruction::Reset { basis, targets } => {
                for &q in targets {
                    t.reset(*basis, q, rng);
                }
            }
            Instruction::H { targets } => targets.iter().for_each(|&q| t.h(q)),
            Instruction::Cx { pairs } => pairs.iter().for_each(|&(c, x)| t.cx(c, x)),
            Instruction::Cz { pairs } => pairs.iter().for_each(|&(a, b)| t.cz(a, b)),
            Instruction::Measure {
                basis,
                flip,
                targets,
            } => {
                for &q in targets {
                    let mut m = t.measure(*basis, q, mode, rng);
                    if noisy && *flip > 0.0 && rng.gen::<f64>() < *flip {
                        m = !m;
                    }
                    meas.push(m);
                }
            }
            Instruction::Pauli { pauli, targets } => {
                targets.iter().for_each(|&q| t.pauli(*pauli, q))
            }
            Instruction::PauliError { pauli, p, targets } if noisy => {
                for &q in targets {
                    if rng.gen::<f64>() < *p {
                        t.pauli(*pauli, q);
                    }
                }
            }
            Instruction::Depolarize1 { p, targets } if noisy => {
                for &q in targets {
                    if rng.gen::<f64>() < *p {
                        t.pauli(PAULIS[rng.gen_range(0..3)], q);
                    }
                }
            }
            Instruction::Depolarize2 { p, pairs } if noisy => {
                for &(a, b) in pairs {
                    if rng.gen::<f64>() < *p {
                        let k = rng.gen_range(1..16);
                        apply_index(&mut t, &[a, b], k);
                    }
                }
            }
            Instruction::DepolarizeN { p, targets } if noisy => {
                if rng.gen::<f64>() < *p {
                    let k = rng.gen_range(1..1usize << (2 * targets.len()));
                    apply_index(&mut t, targets, k);
                }
            }
            Instruction::CondPauli {
                pauli,
                record,
                target,
            } => {
                if meas[*record] {
                    t.pauli(*pauli, *target);
                }
            }
            Instruction::Detector { records, .. } => {
                dets.push(records.iter().fold(false, |a, &r| a ^ meas[r]));
            }
            Instruction::Observable { index, records } => {
                obs[*index] ^= records.iter().fold(false, |a, &r| a ^ meas[r]);
            }
            _ => {}
        }
    }
    TableauRun {
        measurements: meas,
        detectors: dets,
        observables: obs,
    }
}

/// Applies the Pauli string with index `k` (two bits per qubit: 1=X, 2=Z, 3=Y).
fn apply_index(t: &mut Tableau, qubits: &[usize], k: usize) {
    for (i, &q) in qubits.iter().enumerate() {
        match (k >> (2 * i)) & 3 {
            1 => t.pauli(Pauli::X, q),
            2 => t.pauli(Pauli::Z, q),
            3 => t.pauli(Pauli::Y, q),
            _ => {}
        }
    }
}
