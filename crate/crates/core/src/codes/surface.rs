use super::{CodeFamily, CssCode, LogicalPair};
use crate::error::{Error, Result};
use crate::gf2::BinaryMatrix;

/// Planar (unrotated) surface code of odd distance `d`.
///
/// Qubits live on a `(2d-1) x (2d-1)` grid: data qubits at even `r + c`,
/// X-checks (vertices) at even row / odd column, Z-checks (plaquettes) at odd
/// row / even column. All three sets are indexed row-major. The logical Z runs
/// along the top row, the logical X down the left column.
pub fn build_surface_code(d: usize) -> Result<CssCode> {
    if d == 0 || d % 2 == 0 {
        return Err(Error::InvalidCode(format!(
            "surface code distance must be odd and >= 1, got {d}"
        )));
    }
    let side = 2 * d - 1;
    let mut data_index = vec![vec![None; side]; side];
    let mut n = 0;
    for (r, row) in data_index.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            if (r + c) % 2 == 0 {
                *slot = Some(n);
                n += 1;
            }
        }
    }
    let at = |r: isize, c: isize| -> Option<usize> {
        if r < 0 || c < 0 || r >= side as isize || c >= side as isize {
            None
        } else {
            data_index[r as usize][c as usize]
        }
    };
    // N, W, E, S
    let compass = |r: usize, c: usize| -> Vec<Option<usize>> {
        let (r, c) = (r as isize, c as isize);
        vec![at(r - 1, c), at(r, c - 1), at(r, c + 1), at(r + 1, c)]
    };

    let mut x_slots = Vec::new();
    let mut z_slots = Vec::new();
    for r in 0..side {
        for c in 0..side {
            match (r % 2, c % 2) {
                (0, 1) => x_slots.push(compass(r, c)),
                (1, 0) => z_slots.push(compass(r, c)),
                _ => {}
            }
        }
    }
    let supports = |slots: &[Vec<Option<usize>>]| -> Vec<Vec<usize>> {
        slots
            .iter()
            .map(|s| s.iter().flatten().copied().collect())
            .collect()
    };
    let hx = BinaryMatrix::from_row_supports(n, supports(&x_slots));
    let hz = BinaryMatrix::from_row_supports(n, supports(&z_slots));

    let logical_z: Vec<usize> = (0..side)
        .step_by(2)
        .filter_map(|c| at(0, c as isize))
        .collect();
    let logical_x: Vec<usize> = (0..side)
        .step_by(2)
        .filter_map(|r| at(r as isize, 0))
        .collect();

    Ok(CssCode {
        n,
        k: 1,
        d: Some(d),
        hx,
        hz,
        logicals: vec![LogicalPair {
            x: logical_x,
            z: logical_z,
        }],
        family: CodeFamily::Surface { distance: d },
        x_slots,
        z_slots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::checks_commute;
    use crate::gf2;

    /// Commutation by explicit overlap counting, independent of the sparse product.
    fn all_pairs_commute(code: &CssCode) -> bool {
        (0..code.hx.rows()).all(|i| {
            (0..code.hz.rows()).all(|j| {
                code.hx
                    .row(i)
                    .iter()
                    .filter(|q| code.hz.row(j).contains(q))
                    .count()
                    % 2
                    == 0
            })
        })
    }

    #[test]
    fn d3_parameters() {
        let code = build_surface_code(3).unwrap();
        assert_eq!(code.n, 13);
        assert_eq!(code.k, 1);
        assert_eq!(code.dimension_by_rank(), 1);
        let max_w = (0..code.hx.rows())
            .map(|r| code.hx.row_weight(r))
            .chain((0..code.hz.rows()).map(|r| code.hz.row_weight(r)))
            .max()
            .unwrap();
        assert_eq!(max_w, 4);
        assert_eq!(code.hx.rows() + code.hz.rows(), 12);
    }

    #[test]
    fn d1_is_a_bare_qubit() {
        let code = build_surface_code(1).unwrap();
        assert_eq!(code.n, 1);
        assert_eq!(code.k, 1);
        assert_eq!(code.hx.rows() + code.hz.rows(), 0);
    }

    #[test]
    fn d5_checks_commute_exhaustively() {
        let code = build_surface_code(5).unwrap();
        assert_eq!(code.n, 41);
        assert!(all_pairs_commute(&code));
        assert!(checks_commute(&code.hx, &code.hz));
    }

    #[test]
    fn rejects_even_or_zero() {
        assert!(build_surface_code(4).is_err());
        assert!(build_surface_code(0).is_err());
    }

    #[test]
    fn geometric_logicals_are_valid() {
        for d in [3, 5, 7] {
            let code = build_surface_code(d).unwrap();
            assert_eq!(code.n, 2 * d * d - 2 * d + 1);
            assert_eq!(code.dimension_by_rank(), 1);
            let pair = &code.logicals[0];
            assert_eq!(pair.x.len(), d);
            assert_eq!(pair.z.len(), d);
            let lz = gf2::BitVector::from_positions(code.n, pair.z.iter().copied());
            let lx = gf2::BitVector::from_positions(code.n, pair.x.iter().copied());
            assert!(code.hx.mul_vec(&lz).is_zero());
            assert!(code.hz.mul_vec(&lx).is_zero());
            assert!(lx.dot(&lz));
        }
    }
}
