//! CSS code construction: planar surface codes and bivariate bicycle codes.

mod bb;
mod logicals;
mod surface;

pub use bb::{build_bb_code, build_preset, preset, BbSpec, Monomial, ShiftVar, PRESET_NAMES};
pub use logicals::{compute_logicals, symplectic_pairing};
pub use surface::build_surface_code;

use serde::{Deserialize, Serialize};

use crate::gf2::{self, BinaryMatrix};

/// One logical qubit: an X-type and a Z-type operator, given by their supports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalPair {
    pub x: Vec<usize>,
    pub z: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CodeFamily {
    Surface { distance: usize },
    Bb(BbSpec),
    Custom,
}

/// A CSS code with its check matrices, logical operators and a fixed
/// interaction order for syndrome extraction.
///
/// `x_slots[c][t]` is the data qubit that X-check `c` touches in scheduling
/// slot `t` (`None` when the check has no neighbour in that slot); `z_slots`
/// likewise for Z-checks. Surface codes use the four compass slots N, W, E, S;
/// BB codes use one slot per polynomial term.
#[derive(Clone, Debug)]
pub struct CssCode {
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub hx: BinaryMatrix,
    pub hz: BinaryMatrix,
    pub logicals: Vec<LogicalPair>,
    pub family: CodeFamily,
    pub x_slots: Vec<Vec<Option<usize>>>,
    pub z_slots: Vec<Vec<Option<usize>>>,
}

impl CssCode {
    /// Code from bare check matrices; logicals are extracted and slots follow
    /// the sorted supports.
    pub fn from_checks(hx: BinaryMatrix, hz: BinaryMatrix) -> crate::Result<CssCode> {
        if hx.cols() != hz.cols() {
            return Err(crate::Error::DimensionMismatch(
                "H_X and H_Z column counts differ".into(),
            ));
        }
        let slots = |m: &BinaryMatrix| -> Vec<Vec<Option<usize>>> {
            (0..m.rows())
                .map(|r| m.row(r).iter().map(|&q| Some(q)).collect())
                .collect()
        };
        let logicals = compute_logicals(&hx, &hz)?;
        Ok(CssCode {
            n: hx.cols(),
            k: logicals.len(),
            d: None,
            x_slots: slots(&hx),
            z_slots: slots(&hz),
            hx,
            hz,
            logicals,
            family: CodeFamily::Custom,
        })
    }

    pub fn num_x_checks(&self) -> usize {
        self.hx.rows()
    }

    pub fn num_z_checks(&self) -> usize {
        self.hz.rows()
    }

    pub fn name(&self) -> String {
        match &self.family {
            CodeFamily::Surface { distance } => format!("surface_d{distance}"),
            _ => match self.d {
                Some(d) => format!("[[{},{},{}]]", self.n, self.k, d),
                None => format!("[[{},{}]]", self.n, self.k),
            },
        }
    }

    /// `n - rank(H_X) - rank(H_Z)`.
    pub fn dimension_by_rank(&self) -> usize {
        self.n - gf2::rank(&self.hx) - gf2::rank(&self.hz)
    }

    pub fn checks_commute(&self) -> bool {
        checks_commute(&self.hx, &self.hz)
    }
}

pub fn checks_commute(hx: &BinaryMatrix, hz: &BinaryMatrix) -> bool {
    hx.mul(&hz.transpose())
        .map(|m| m.is_zero())
        .unwrap_or(false)
}
