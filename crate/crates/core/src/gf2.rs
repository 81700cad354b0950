//! Linear algebra over GF(2).
//!
//! [`BinaryMatrix`] is the sparse storage used for check matrices and detector
//! error models. Elimination runs on dense [`BitVector`] rows.

use std::fmt;

use crate::error::{Error, Result};

/// Dense bit vector packed into 64-bit words.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_positions<I: IntoIterator<Item = usize>>(len: usize, positions: I) -> Self {
        let mut v = Self::zeros(len);
        for p in positions {
            v.toggle(p);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_positions(
            bits.len(),
            bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i),
        )
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of the bitwise AND.
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        write!(f, "BitVector({s})")
    }
}

/// Sparse matrix over GF(2), stored as sorted column lists per row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    row_entries: Vec<Vec<usize>>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            rows,
            cols,
            row_entries: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        BinaryMatrix {
            rows: n,
            cols: n,
            row_entries: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Builds a matrix from explicit positions; rejects out-of-range and repeated entries.
    pub fn from_entries<I>(rows: usize, cols: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut row_entries = vec![Vec::new(); rows];
        for (row, col) in entries {
            if row >= rows || col >= cols {
                return Err(Error::EntryOutOfBounds {
                    row,
                    col,
                    rows,
                    cols,
                });
            }
            row_entries[row].push(col);
        }
        for (row, r) in row_entries.iter_mut().enumerate() {
            r.sort_unstable();
            if let Some(w) = r.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEntry { row, col: w[0] });
            }
        }
        Ok(BinaryMatrix {
            rows,
            cols,
            row_entries,
        })
    }

    /// Builds a matrix from per-row supports. Repeated columns cancel in pairs.
    pub fn from_row_supports(cols: usize, supports: Vec<Vec<usize>>) -> Self {
        let rows = supports.len();
        let row_entries = supports
            .into_iter()
            .map(|mut r| {
                assert!(r.iter().all(|&c| c < cols), "column index out of range");
                r.sort_unstable();
                cancel_pairs(r)
            })
            .collect();
        BinaryMatrix {
            rows,
            cols,
            row_entries,
        }
    }

    pub fn from_dense_rows(cols: usize, rows: &[BitVector]) -> Self {
        let row_entries = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols);
                r.ones().collect()
            })
            .collect();
        BinaryMatrix {
            rows: rows.len(),
            cols,
            row_entries,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_entries[r]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_entries[r].binary_search(&c).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.row_entries.iter().map(Vec::len).sum()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_entries[r].len()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for r in &self.row_entries {
            for &c in r {
                w[c] += 1;
            }
        }
        w
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_entries
            .iter()
            .enumerate()
            .flat_map(|(r, cs)| cs.iter().map(move |&c| (r, c)))
    }

    pub fn is_zero(&self) -> bool {
        self.row_entries.iter().all(Vec::is_empty)
    }

    pub fn transpose(&self) -> Self {
        let mut t = vec![Vec::new(); self.cols];
        for (r, cs) in self.row_entries.iter().enumerate() {
            for &c in cs {
                t[c].push(r);
            }
        }
        BinaryMatrix {
            rows: self.cols,
            cols: self.rows,
            row_entries: t,
        }
    }

    /// Column lists per column (the transpose's rows).
    pub fn columns(&self) -> Vec<Vec<usize>> {
        self.transpose().row_entries
    }

    pub fn mul(&self, rhs: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Vec::with_capacity(self.rows);
        let mut acc = BitVector::zeros(rhs.cols);
        for r in &self.row_entries {
            for &k in r {
                for &c in &rhs.row_entries[k] {
                    acc.toggle(c);
                }
            }
            out.push(acc.ones().collect::<Vec<_>>());
            for &k in r {
                for &c in &rhs.row_entries[k] {
                    acc.set(c, false);
                }
            }
        }
        Ok(BinaryMatrix {
            rows: self.rows,
            cols: rhs.cols,
            row_entries: out,
        })
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols);
        let mut out = BitVector::zeros(self.rows);
        for (r, cs) in self.row_entries.iter().enumerate() {
            if cs.iter().filter(|&&c| v.get(c)).count() % 2 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    pub fn hstack(&self, rhs: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, rhs.rows
            )));
        }
        let row_entries = self
            .row_entries
            .iter()
            .zip(&rhs.row_entries)
            .map(|(a, b)| {
                a.iter()
                    .copied()
                    .chain(b.iter().map(|&c| c + self.cols))
                    .collect()
            })
            .collect();
        Ok(BinaryMatrix {
            rows: self.rows,
            cols: self.cols + rhs.cols,
            row_entries,
        })
    }

    pub fn vstack(&self, rhs: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, rhs.cols
            )));
        }
        let mut row_entries = self.row_entries.clone();
        row_entries.extend(rhs.row_entries.iter().cloned());
        Ok(BinaryMatrix {
            rows: self.rows + rhs.rows,
            cols: self.cols,
            row_entries,
        })
    }

    pub fn add(&self, rhs: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("matrix sum".into()));
        }
        let row_entries = self
            .row_entries
            .iter()
            .zip(&rhs.row_entries)
            .map(|(a, b)| {
                let mut r: Vec<usize> = a.iter().chain(b).copied().collect();
                r.sort_unstable();
                cancel_pairs(r)
            })
            .collect();
        Ok(BinaryMatrix {
            rows: self.rows,
            cols: self.cols,
            row_entries,
        })
    }

    pub fn dense_row(&self, r: usize) -> BitVector {
        BitVector::from_positions(self.cols, self.row_entries[r].iter().copied())
    }

    pub fn to_dense_rows(&self) -> Vec<BitVector> {
        (0..self.rows).map(|r| self.dense_row(r)).collect()
    }

    /// Sparse coordinate text: header `H <rows> <cols>` then one `row col` pair per line.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = format!("H {} {}\n", self.rows, self.cols);
        for (r, c) in self.entries() {
            s.push_str(&format!("{r} {c}\n"));
        }
        s
    }

    pub fn from_coordinate_text(text: &str) -> Result<BinaryMatrix> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || Error::Parse {
            line: 1,
            message: format!("expected `H <rows> <cols>`, got `{header}`"),
        };
        if parts.len() != 3 || parts[0] != "H" {
            return Err(bad_header());
        }
        let rows: usize = parts[1].parse().map_err(|_| bad_header())?;
        let cols: usize = parts[2].parse().map_err(|_| bad_header())?;
        let mut entries = Vec::new();
        for (i, line) in lines {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(r)), Some(Ok(c)), None) => entries.push((r, c)),
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("expected `row col`, got `{line}`"),
                    })
                }
            }
        }
        BinaryMatrix::from_entries(rows, cols, entries)
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows.min(32) {
            let s: String = (0..self.cols.min(96))
                .map(|c| if self.get(r, c) { '1' } else { '.' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

fn cancel_pairs(sorted: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(sorted.len());
    for c in sorted {
        if out.last() == Some(&c) {
            out.pop();
        } else {
            out.push(c);
        }
    }
    out
}

/// Reduced row echelon form of a set of dense rows.
///
/// Pivots are chosen lowest column first. `rows` is reduced in place and
/// truncated to the nonzero rows; the returned vector lists the pivot column
/// of each remaining row.
pub fn rref(rows: &mut Vec<BitVector>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(found) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, found);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    pivots
}

pub fn rank(m: &BinaryMatrix) -> usize {
    let mut rows = m.to_dense_rows();
    rref(&mut rows, m.cols()).len()
}

/// Solves `m * x = rhs`; free variables are set to zero.
pub fn solve(m: &BinaryMatrix, rhs: &BitVector) -> Result<BitVector> {
    if rhs.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} for {} rows",
            rhs.len(),
            m.rows()
        )));
    }
    let n = m.cols();
    let mut aug: Vec<BitVector> = (0..m.rows())
        .map(|r| {
            let mut v = BitVector::from_positions(n + 1, m.row(r).iter().copied());
            if rhs.get(r) {
                v.set(n, true);
            }
            v
        })
        .collect();
    let pivots = rref(&mut aug, n + 1);
    if pivots.last() == Some(&n) {
        return Err(Error::InconsistentSystem);
    }
    let mut x = BitVector::zeros(n);
    for (row, &p) in aug.iter().zip(&pivots) {
        if row.get(n) {
            x.set(p, true);
        }
    }
    Ok(x)
}

/// Basis of the right null space `{x : m * x = 0}`, one vector per free column.
pub fn kernel(m: &BinaryMatrix) -> Vec<BitVector> {
    let n = m.cols();
    let mut rows = m.to_dense_rows();
    let pivots = rref(&mut rows, n);
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..n)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = BitVector::zeros(n);
            v.set(free, true);
            for (row, &p) in rows.iter().zip(&pivots) {
                if row.get(free) {
                    v.set(p, true);
                }
            }
            v
        })
        .collect()
}

/// Incrementally built span with membership queries.
///
/// Vectors are kept reduced against earlier pivots, so reduction is a single
/// pass in insertion order.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    len: usize,
    basis: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl SpanBasis {
    pub fn new(len: usize) -> Self {
        SpanBasis {
            len,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut v = v.clone();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(b);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` if independent; returns whether the dimension grew.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.len);
        let r = self.reduce(v);
        match r.first_one() {
            Some(p) => {
                self.basis.push(r);
                self.pivots.push(p);
                true
            }
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent dense eliminator on `Vec<Vec<u8>>`.
    fn brute_rank(mut a: Vec<Vec<u8>>) -> usize {
        let rows = a.len();
        let cols = if rows == 0 { 0 } else { a[0].len() };
        let mut r = 0;
        for c in 0..cols {
            if let Some(p) = (r..rows).find(|&i| a[i][c] == 1) {
                a.swap(r, p);
                for i in 0..rows {
                    if i != r && a[i][c] == 1 {
                        for j in 0..cols {
                            a[i][j] ^= a[r][j];
                        }
                    }
                }
                r += 1;
            }
        }
        r
    }

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, density: f64) -> BinaryMatrix {
        let entries: Vec<(usize, usize)> = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .filter(|_| rng.gen_bool(density))
            .collect();
        BinaryMatrix::from_entries(rows, cols, entries).unwrap()
    }

    fn to_bytes(m: &BinaryMatrix) -> Vec<Vec<u8>> {
        (0..m.rows())
            .map(|r| (0..m.cols()).map(|c| m.get(r, c) as u8).collect())
            .collect()
    }

    #[test]
    fn identity_and_zero_rank() {
        assert_eq!(rank(&BinaryMatrix::identity(4)), 4);
        assert_eq!(rank(&BinaryMatrix::zeros(5, 7)), 0);
    }

    #[test]
    fn random_rank_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = random_matrix(&mut rng, 20, 30, 0.15);
            assert_eq!(rank(&m), brute_rank(to_bytes(&m)));
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let m = random_matrix(&mut rng, 12, 18, 0.2);
            let x = BitVector::from_bools(&(0..18).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>());
            let b = m.mul_vec(&x);
            let sol = solve(&m, &b).unwrap();
            assert_eq!(m.mul_vec(&sol), b);
        }
        let m = BinaryMatrix::from_entries(2, 2, [(0, 0), (1, 0)]).unwrap();
        let b = BitVector::from_positions(2, [0]);
        assert!(matches!(solve(&m, &b), Err(Error::InconsistentSystem)));
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 10, 25, 0.2);
        let ker = kernel(&m);
        assert_eq!(ker.len(), 25 - rank(&m));
        for v in &ker {
            assert!(m.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(matches!(
            BinaryMatrix::from_entries(2, 2, [(2, 0)]),
            Err(Error::EntryOutOfBounds { .. })
        ));
        assert!(matches!(
            BinaryMatrix::from_entries(2, 2, [(1, 1), (1, 1)]),
            Err(Error::DuplicateEntry { .. })
        ));
    }

    #[test]
    fn weights_and_coordinate_text() {
        let m = BinaryMatrix::from_entries(3, 4, [(0, 1), (0, 3), (2, 1)]).unwrap();
        assert_eq!(m.row_weight(0), 2);
        assert_eq!(m.col_weights(), vec![0, 2, 0, 1]);
        let text = m.to_coordinate_text();
        assert!(text.starts_with("H 3 4\n"));
        assert_eq!(BinaryMatrix::from_coordinate_text(&text).unwrap(), m);
    }

    #[test]
    fn span_basis_membership() {
        let mut s = SpanBasis::new(6);
        assert!(s.insert(&BitVector::from_positions(6, [0, 1])));
        assert!(s.insert(&BitVector::from_positions(6, [1, 2])));
        assert!(!s.insert(&BitVector::from_positions(6, [0, 2])));
        assert!(s.contains(&BitVector::from_positions(6, [0, 2])));
        assert!(!s.contains(&BitVector::from_positions(6, [3])));
        assert_eq!(s.dim(), 2);
    }

    proptest::proptest! {
        #[test]
        fn product_transpose_identity(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 5, 7, 0.3);
            let b = random_matrix(&mut rng, 7, 4, 0.3);
            let ab_t = a.mul(&b).unwrap().transpose();
            let bt_at = b.transpose().mul(&a.transpose()).unwrap();
            proptest::prop_assert_eq!(ab_t, bt_at);
        }
    }
}
