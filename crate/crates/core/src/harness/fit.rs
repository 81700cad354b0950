use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `p_L(p) = p^alpha * exp(c0 + c1 p + c2 p^2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha: u32,
    pub n_pts: usize,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Root-mean-square residual in `ln p_L`.
    pub residual: f64,
}

impl FitResult {
    pub fn eval(&self, p: f64) -> f64 {
        p.powi(self.alpha as i32) * (self.c0 + self.c1 * p + self.c2 * p * p).exp()
    }
}

/// Least squares in the log domain: `ln p_L - alpha ln p = c0 + c1 p + c2 p^2`.
/// With exactly two points `c2` is fixed to 0.
pub fn fit_ansatz(points: &[(f64, f64)], alpha: u32) -> Result<FitResult> {
    if alpha == 0 {
        return Err(Error::Fit {
            index: 0,
            message: "alpha must be at least 1".into(),
        });
    }
    if points.len() < 2 {
        return Err(Error::Fit {
            index: points.len(),
            message: "need at least two points".into(),
        });
    }
    for (i, &(p, pl)) in points.iter().enumerate() {
        if !(p > 0.0) {
            return Err(Error::Fit {
                index: i,
                message: format!("p = {p} is not positive"),
            });
        }
        if !(pl > 0.0) {
            return Err(Error::Fit {
                index: i,
                message: format!("p_L = {pl} is not positive"),
            });
        }
    }
    let cols = if points.len() == 2 { 2 } else { 3 };
    let a = DMatrix::from_fn(points.len(), cols, |r, c| points[r].0.powi(c as i32));
    let y = DVector::from_iterator(
        points.len(),
        points
            .iter()
            .map(|&(p, pl)| pl.ln() - alpha as f64 * p.ln()),
    );
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-300)
        .map_err(|m| Error::Fit {
            index: 0,
            message: m.to_string(),
        })?;
    let resid = &a * &coef - &y;
    Ok(FitResult {
        alpha,
        n_pts: points.len(),
        c0: coef[0],
        c1: coef[1],
        c2: if cols == 3 { coef[2] } else { 0.0 },
        residual: (resid.norm_squared() / points.len() as f64).sqrt(),
    })
}
