use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BpOsdConfig {
    pub max_iterations: usize,
    /// Min-sum scaling factor.
    pub scaling: f64,
    /// 0 is OSD-0; `w > 0` also tries every pattern on the `w` most likely
    /// non-pivot columns.
    pub osd_order: usize,
}

impl Default for BpOsdConfig {
    fn default() -> Self {
        BpOsdConfig {
            max_iterations: 30,
            scaling: 0.625,
            osd_order: 0,
        }
    }
}

impl BpOsdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations", "must be at least 1"));
        }
        if !(self.scaling > 0.0 && self.scaling <= 1.0) {
            return Err(Error::config("scaling", "must lie in (0, 1]"));
        }
        if self.osd_order > 16 {
            return Err(Error::config("osd_order", "at most 16"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpOsdResult {
    pub estimate: BitVector,
    /// `logical * estimate` as a bit mask.
    pub observables: u64,
    pub bp_converged: bool,
}

/// Min-sum belief propagation with ordered-statistics post-processing.
#[derive(Clone, Debug)]
pub struct BpOsdDecoder {
    config: BpOsdConfig,
    rows: usize,
    cols: usize,
    /// Edge `e` joins check `edge_row[e]` to column `edge_col[e]`; edges are
    /// grouped by row.
    edge_col: Vec<usize>,
    row_start: Vec<usize>,
    col_edges: Vec<Vec<usize>>,
    column_bits: Vec<BitVector>,
    logical_cols: Vec<u64>,
    prior_llr: Vec<f64>,
}

impl BpOsdDecoder {
    pub fn new(
        check: &BinaryMatrix,
        logical: &BinaryMatrix,
        priors: &[f64],
        config: BpOsdConfig,
    ) -> Result<Self> {
        config.validate()?;
        let (rows, cols) = (check.rows(), check.cols());
        if priors.len() != cols || logical.cols() != cols {
            return Err(Error::DimensionMismatch(format!(
                "{cols} columns, {} priors, {} logical columns",
                priors.len(),
                logical.cols()
            )));
        }
        if logical.rows() > 64 {
            return Err(Error::DimensionMismatch("at most 64 logical rows".into()));
        }
        let mut edge_col = Vec::with_capacity(check.nnz());
        let mut row_start = vec![0];
        let mut col_edges = vec![Vec::new(); cols];
        let mut col_rows = vec![Vec::new(); cols];
        for r in 0..rows {
            for &c in check.row(r) {
                col_edges[c].push(edge_col.len());
                col_rows[c].push(r);
                edge_col.push(c);
            }
            row_start.push(edge_col.len());
        }
        let column_bits = col_rows
            .into_iter()
            .map(|rs| BitVector::from_positions(rows, rs))
            .collect();
        let mut logical_cols = vec![0u64; cols];
        for l in 0..logical.rows() {
            for &c in logical.row(l) {
                logical_cols[c] |= 1 << l;
            }
        }
        let prior_llr = priors
            .iter()
            .map(|&p| {
                let p = p.clamp(1e-15, 1.0 - 1e-15);
                ((1.0 - p) / p).ln()
            })
            .collect();
        Ok(BpOsdDecoder {
            config,
            rows,
            cols,
            edge_col,
            row_start,
            col_edges,
            column_bits,
            logical_cols,
            prior_llr,
        })
    }

    pub fn config(&self) -> &BpOsdConfig {
        &self.config
    }

    fn observables_of(&self, est: &BitVector) -> u64 {
        est.ones().fold(0, |m, c| m ^ self.logical_cols[c])
    }

    fn syndrome_of(&self, hard: &[bool]) -> BitVector {
        let mut s = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let mut par = false;
            for e in self.row_start[r]..self.row_start[r + 1] {
                par ^= hard[self.edge_col[e]];
            }
            if par {
                s.set(r, true);
            }
        }
        s
    }

    /// Returns the posterior log-likelihood ratios and, if BP converged, the
    /// hard decision.
    fn belief_propagation(&self, syndrome: &BitVector) -> (Vec<f64>, Option<Vec<bool>>) {
        let ne = self.edge_col.len();
        let mut v2c: Vec<f64> = self.edge_col.iter().map(|&c| self.prior_llr[c]).collect();
        let mut c2v = vec![0.0f64; ne];
        let mut post = self.prior_llr.clone();
        let mut hard = vec![false; self.cols];
        for _ in 0..self.config.max_iterations {
            for r in 0..self.rows {
                let (lo, hi) = (self.row_start[r], self.row_start[r + 1]);
                let mut sign = syndrome.get(r);
                let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
                for e in lo..hi {
                    let m = v2c[e];
                    sign ^= m < 0.0;
                    let a = m.abs();
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        arg = e;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for e in lo..hi {
                    let mag = if e == arg { min2 } else { min1 };
                    let s = sign ^ (v2c[e] < 0.0);
                    let v = self.config.scaling * mag;
                    c2v[e] = if s { -v } else { v };
                }
            }
            for c in 0..self.cols {
                let mut total = self.prior_llr[c];
                for &e in &self.col_edges[c] {
                    total += c2v[e];
                }
                post[c] = total;
                hard[c] = total < 0.0;
                for &e in &self.col_edges[c] {
                    v2c[e] = total - c2v[e];
                }
            }
            if self.syndrome_of(&hard) == *syndrome {
                return (post, Some(hard));
            }
        }
        (post, None)
    }

    /// Ordered-statistics decoding on columns sorted by `post`.
    fn osd(&self, syndrome: &BitVector, post: &[f64]) -> Result<BitVector> {
        let mut order: Vec<usize> = (0..self.cols).collect();
        order.sort_by(|&a, &b| post[a].total_cmp(&post[b]).then(a.cmp(&b)));
        let full = self.config.osd_order > 0;
        // Basis vectors reduced against earlier ones, each with the set of
        // pivot columns composing it.
        let mut basis: Vec<(usize, BitVector, BitVector)> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        let mut non_pivots: Vec<usize> = Vec::new();
        let mut s = syndrome.clone();
        let mut s_comb = BitVector::zeros(self.rows);
        for &c in &order {
            if basis.len() == self.rows || (!full && s.is_zero()) {
                if full {
                    non_pivots.push(c);
                    continue;
                }
                break;
            }
            let mut v = self.column_bits[c].clone();
            let mut comb = BitVector::zeros(self.rows);
            for (p, b, bc) in &basis {
                if v.get(*p) {
                    v.xor_assign(b);
                    comb.xor_assign(bc);
                }
            }
            match v.first_one() {
                Some(p) => {
                    comb.set(basis.len(), true);
                    if s.get(p) {
                        s.xor_assign(&v);
                        s_comb.xor_assign(&comb);
                    }
                    basis.push((p, v, comb));
                    pivots.push(c);
                }
                None => non_pivots.push(c),
            }
        }
        if !s.is_zero() {
            return Err(Error::SyndromeNotInColumnSpace);
        }
        let to_estimate = |comb: &BitVector, extra: &[usize]| {
            let mut e = BitVector::zeros(self.cols);
            for i in comb.ones() {
                e.toggle(pivots[i]);
            }
            for &c in extra {
                e.toggle(c);
            }
            e
        };
        let mut best = to_estimate(&s_comb, &[]);
        if !full {
            return Ok(best);
        }
        let cost = |e: &BitVector| e.ones().map(|c| self.prior_llr[c]).sum::<f64>();
        let mut best_cost = cost(&best);
        let w = self.config.osd_order.min(non_pivots.len());
        for pattern in 1u32..1 << w {
            let extra: Vec<usize> = (0..w)
                .filter(|i| pattern >> i & 1 == 1)
                .map(|i| non_pivots[i])
                .collect();
            let mut t = syndrome.clone();
            for &c in &extra {
                t.xor_assign(&self.column_bits[c]);
            }
            let mut comb = BitVector::zeros(self.rows);
            for (p, b, bc) in &basis {
                if t.get(*p) {
                    t.xor_assign(b);
                    comb.xor_assign(bc);
                }
            }
            let e = to_estimate(&comb, &extra);
            let c = cost(&e);
            if c < best_cost {
                best_cost = c;
                best = e;
            }
        }
        Ok(best)
    }

    pub fn decode(&self, syndrome: &BitVector) -> Result<BpOsdResult> {
        if syndrome.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "syndrome of length {} for {} checks",
                syndrome.len(),
                self.rows
            )));
        }
        if syndrome.is_zero() {
            return Ok(BpOsdResult {
                estimate: BitVector::zeros(self.cols),
                observables: 0,
                bp_converged: true,
            });
        }
        let (post, hard) = self.belief_propagation(syndrome);
        let (estimate, bp_converged) = match hard {
            Some(h) => (BitVector::from_bools(&h), true),
            None => (self.osd(syndrome, &post)?, false),
        };
        let check = self.syndrome_of(&(0..self.cols).map(|c| estimate.get(c)).collect::<Vec<_>>());
        assert_eq!(
            check, *syndrome,
            "BP-OSD estimate does not reproduce the syndrome"
        );
        Ok(BpOsdResult {
            observables: self.observables_of(&estimate),
            estimate,
            bp_converged,
        })
    }

    /// Decodes from a list of fired check indices.
    pub fn decode_fired(&self, fired: &[u32]) -> Result<u64> {
        if fired.is_empty() {
            return Ok(0);
        }
        let s = BitVector::from_positions(self.rows, fired.iter().map(|&d| d as usize));
        Ok(self.decode(&s)?.observables)
    }
}

/// One-shot convenience wrapper.
pub fn bposd_decode(
    check: &BinaryMatrix,
    logical: &BinaryMatrix,
    priors: &[f64],
    syndrome: &BitVector,
    config: &BpOsdConfig,
) -> Result<BpOsdResult> {
    BpOsdDecoder::new(check, logical, priors, config.clone())?.decode(syndrome)
}
