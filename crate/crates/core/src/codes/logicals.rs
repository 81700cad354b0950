use super::{checks_commute, LogicalPair};
use crate::error::{Error, Result};
use crate::gf2::{self, BinaryMatrix, BitVector, SpanBasis};

/// Logical operator pairs of the CSS code `(hx, hz)`.
///
/// X-type candidates span `ker(H_Z)` modulo the row space of `H_X`, Z-type
/// candidates `ker(H_X)` modulo the row space of `H_Z`. Symplectic
/// Gram-Schmidt then pairs them so that `x_i . z_j = delta_ij`, taking the
/// lowest-index partner at each step. Each operator is finally shortened
/// greedily by stabilizer multiplication, which leaves the pairing intact.
pub fn compute_logicals(hx: &BinaryMatrix, hz: &BinaryMatrix) -> Result<Vec<LogicalPair>> {
    if hx.cols() != hz.cols() {
        return Err(Error::DimensionMismatch(
            "H_X and H_Z column counts differ".into(),
        ));
    }
    if !checks_commute(hx, hz) {
        return Err(Error::NonCommutingChecks);
    }
    let mut xs = quotient_basis(hz, hx);
    let mut zs = quotient_basis(hx, hz);
    let k = hx.cols() - gf2::rank(hx) - gf2::rank(hz);
    debug_assert_eq!(xs.len(), k);
    debug_assert_eq!(zs.len(), k);

    for i in 0..k {
        // The pairing restricted to the unprocessed block is invertible, so a
        // partner always exists.
        let j = (i..k)
            .find(|&j| xs[i].dot(&zs[j]))
            .ok_or_else(|| Error::InvalidCode("degenerate symplectic form".into()))?;
        zs.swap(i, j);
        for l in i + 1..k {
            if xs[l].dot(&zs[i]) {
                let xi = xs[i].clone();
                xs[l].xor_assign(&xi);
            }
            if xs[i].dot(&zs[l]) {
                let zi = zs[i].clone();
                zs[l].xor_assign(&zi);
            }
        }
    }

    let hx_rows = hx.to_dense_rows();
    let hz_rows = hz.to_dense_rows();
    Ok(xs
        .into_iter()
        .zip(zs)
        .map(|(x, z)| LogicalPair {
            x: shorten(x, &hx_rows).ones().collect(),
            z: shorten(z, &hz_rows).ones().collect(),
        })
        .collect())
}

/// Basis for `ker(kernel_of)` modulo `rowspace(modulo)`, in kernel order.
fn quotient_basis(kernel_of: &BinaryMatrix, modulo: &BinaryMatrix) -> Vec<BitVector> {
    let mut span = SpanBasis::new(modulo.cols());
    for r in modulo.to_dense_rows() {
        span.insert(&r);
    }
    gf2::kernel(kernel_of)
        .into_iter()
        .filter(|v| span.insert(v))
        .collect()
}

fn shorten(mut op: BitVector, stabilizers: &[BitVector]) -> BitVector {
    loop {
        let mut improved = false;
        for s in stabilizers {
            let mut t = op.clone();
            t.xor_assign(s);
            if t.count_ones() < op.count_ones() {
                op = t;
                improved = true;
            }
        }
        if !improved {
            return op;
        }
    }
}

/// `k x k` table of `x_i . z_j` over GF(2).
pub fn symplectic_pairing(n: usize, logicals: &[LogicalPair]) -> Vec<Vec<bool>> {
    let xs: Vec<BitVector> = logicals
        .iter()
        .map(|p| BitVector::from_positions(n, p.x.iter().copied()))
        .collect();
    let zs: Vec<BitVector> = logicals
        .iter()
        .map(|p| BitVector::from_positions(n, p.z.iter().copied()))
        .collect();
    xs.iter()
        .map(|x| zs.iter().map(|z| x.dot(z)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_bb_code, build_surface_code, preset};

    fn assert_valid(hx: &BinaryMatrix, hz: &BinaryMatrix, logicals: &[LogicalPair]) {
        let n = hx.cols();
        let table = symplectic_pairing(n, logicals);
        for (i, row) in table.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, i == j, "pairing ({i},{j})");
            }
        }
        let mut xspan = SpanBasis::new(n);
        for r in hx.to_dense_rows() {
            xspan.insert(&r);
        }
        let mut zspan = SpanBasis::new(n);
        for r in hz.to_dense_rows() {
            zspan.insert(&r);
        }
        for p in logicals {
            let x = BitVector::from_positions(n, p.x.iter().copied());
            let z = BitVector::from_positions(n, p.z.iter().copied());
            assert!(hz.mul_vec(&x).is_zero());
            assert!(hx.mul_vec(&z).is_zero());
            assert!(!xspan.contains(&x));
            assert!(!zspan.contains(&z));
        }
    }

    #[test]
    fn surface_d3_single_pair_weight_three() {
        let code = build_surface_code(3).unwrap();
        let l = compute_logicals(&code.hx, &code.hz).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].z.len(), 3);
        assert_valid(&code.hx, &code.hz, &l);
    }

    #[test]
    fn bb72_twelve_pairs() {
        let (spec, _) = preset("bb72").unwrap();
        let code = build_bb_code(&spec).unwrap();
        let l = compute_logicals(&code.hx, &code.hz).unwrap();
        assert_eq!(l.len(), 12);
        assert_valid(&code.hx, &code.hz, &l);
    }

    #[test]
    fn rejects_non_commuting() {
        let hx = BinaryMatrix::from_entries(1, 2, [(0, 0)]).unwrap();
        let hz = BinaryMatrix::from_entries(1, 2, [(0, 0)]).unwrap();
        assert!(matches!(
            compute_logicals(&hx, &hz),
            Err(Error::NonCommutingChecks)
        ));
    }

    #[test]
    fn deterministic() {
        let code = build_surface_code(5).unwrap();
        let a = compute_logicals(&code.hx, &code.hz).unwrap();
        let b = compute_logicals(&code.hx, &code.hz).unwrap();
        assert_eq!(a, b);
        assert_valid(&code.hx, &code.hz, &a);
    }
}
