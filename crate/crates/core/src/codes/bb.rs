use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{compute_logicals, CodeFamily, CssCode};
use crate::error::{Error, Result};
use crate::gf2::{self, BinaryMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftVar {
    X,
    Y,
}

/// A monomial `x^e`, `y^e` or `1` in `F2[x,y] / (x^l - 1, y^m - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Monomial {
    pub var: ShiftVar,
    pub exp: usize,
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        var: ShiftVar::X,
        exp: 0,
    };

    pub fn x(exp: usize) -> Self {
        Monomial {
            var: ShiftVar::X,
            exp,
        }
    }

    pub fn y(exp: usize) -> Self {
        Monomial {
            var: ShiftVar::Y,
            exp,
        }
    }

    /// Column hit by row `(i, j) -> i*m + j` of the permutation matrix.
    fn image(&self, row: usize, ell: usize, m: usize) -> usize {
        let (i, j) = (row / m, row % m);
        match self.var {
            ShiftVar::X => ((i + self.exp) % ell) * m + j,
            ShiftVar::Y => i * m + (j + self.exp) % m,
        }
    }

    fn reduced(self, ell: usize, m: usize) -> Self {
        let exp = match self.var {
            ShiftVar::X => self.exp % ell,
            ShiftVar::Y => self.exp % m,
        };
        if exp == 0 {
            Monomial::ONE
        } else {
            Monomial { var: self.var, exp }
        }
    }

    /// The `lm x lm` permutation matrix of this monomial.
    pub fn matrix(&self, ell: usize, m: usize) -> BinaryMatrix {
        let n = ell * m;
        BinaryMatrix::from_row_supports(n, (0..n).map(|r| vec![self.image(r, ell, m)]).collect())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            return write!(f, "1");
        }
        let v = match self.var {
            ShiftVar::X => 'x',
            ShiftVar::Y => 'y',
        };
        if self.exp == 1 {
            write!(f, "{v}")
        } else {
            write!(f, "{v}^{}", self.exp)
        }
    }
}

impl FromStr for Monomial {
    type Err = Error;

    /// Grammar: `x^E | y^E | x | y | 1`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "1" {
            return Ok(Monomial::ONE);
        }
        let bad = || Error::InvalidMonomial(s.to_string());
        let mut chars = t.chars();
        let var = match chars.next() {
            Some('x') => ShiftVar::X,
            Some('y') => ShiftVar::Y,
            _ => return Err(bad()),
        };
        let rest = chars.as_str();
        let exp = if rest.is_empty() {
            1
        } else {
            rest.strip_prefix('^')
                .ok_or_else(bad)?
                .parse::<usize>()
                .map_err(|_| bad())?
        };
        Ok(Monomial { var, exp })
    }
}

impl TryFrom<String> for Monomial {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Monomial> for String {
    fn from(m: Monomial) -> String {
        m.to_string()
    }
}

/// Polynomial pair `(A, B)` defining a bivariate bicycle code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BbSpec {
    pub ell: usize,
    pub m: usize,
    #[serde(rename = "a")]
    pub a_terms: Vec<Monomial>,
    #[serde(rename = "b")]
    pub b_terms: Vec<Monomial>,
}

impl BbSpec {
    pub fn new(
        ell: usize,
        m: usize,
        a_terms: Vec<Monomial>,
        b_terms: Vec<Monomial>,
    ) -> Result<Self> {
        let spec = BbSpec {
            ell,
            m,
            a_terms,
            b_terms,
        };
        spec.validated()
    }

    /// Checks positivity and non-empty term lists, and reduces exponents.
    pub fn validated(self) -> Result<Self> {
        if self.ell == 0 || self.m == 0 {
            return Err(Error::InvalidCode("ell and m must be positive".into()));
        }
        if self.a_terms.is_empty() || self.b_terms.is_empty() {
            return Err(Error::InvalidCode("A and B need at least one term".into()));
        }
        let (ell, m) = (self.ell, self.m);
        let reduce = |t: Vec<Monomial>| -> Vec<Monomial> {
            t.into_iter().map(|x| x.reduced(ell, m)).collect()
        };
        Ok(BbSpec {
            ell,
            m,
            a_terms: reduce(self.a_terms),
            b_terms: reduce(self.b_terms),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: BbSpec = serde_json::from_str(text)?;
        spec.validated()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: BbSpec = toml::from_str(text).map_err(|e| Error::config("bb", e.to_string()))?;
        spec.validated()
    }
}

pub const PRESET_NAMES: [&str; 3] = ["bb72", "bb90", "bb144"];

/// Named presets `[[72,12,6]]`, `[[90,8,10]]`, `[[144,12,12]]`.
///
/// Polynomials follow the bivariate bicycle instances of Bravyi et al. (2024).
/// The distance is carried as metadata; only `k` is checked, by rank, when the
/// code is built.
pub fn preset(name: &str) -> Result<(BbSpec, usize)> {
    let (x, y) = (Monomial::x, Monomial::y);
    let key = name.trim().trim_start_matches("[[").trim_end_matches("]]");
    let (spec, d) = match key {
        "bb72" | "72,12,6" => (
            BbSpec::new(6, 6, vec![x(3), y(1), y(2)], vec![y(3), x(1), x(2)])?,
            6,
        ),
        "bb90" | "90,8,10" => (
            BbSpec::new(
                15,
                3,
                vec![x(9), y(1), y(2)],
                vec![Monomial::ONE, x(2), x(7)],
            )?,
            10,
        ),
        "bb144" | "144,12,12" => (
            BbSpec::new(12, 6, vec![x(3), y(1), y(2)], vec![y(3), x(1), x(2)])?,
            12,
        ),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    Ok((spec, d))
}

/// Expected logical dimension of each preset.
pub(crate) fn preset_k(name: &str) -> Option<usize> {
    match name {
        "bb72" => Some(12),
        "bb90" => Some(8),
        "bb144" => Some(12),
        _ => None,
    }
}

/// `H_X = [A | B]`, `H_Z = [B^T | A^T]` with `A = sum A_i`, `B = sum B_j`.
///
/// Left data qubits occupy columns `0..lm`, right data qubits `lm..2lm`.
/// Check slots follow the term order: X-check slot `t < |A|` touches the left
/// qubit through `A_t`, later slots the right qubit through `B_t`; Z-check
/// slots use `B_t^T` on the left and `A_t^T` on the right.
pub fn build_bb_code(spec: &BbSpec) -> Result<CssCode> {
    let spec = spec.clone().validated()?;
    let (ell, m) = (spec.ell, spec.m);
    let half = ell * m;
    let n = 2 * half;

    // Inverse permutation: column c of A_t^T row r is the row of A_t hitting r.
    let inverse = |mono: &Monomial| -> Vec<usize> {
        let mut inv = vec![0; half];
        for r in 0..half {
            inv[mono.image(r, ell, m)] = r;
        }
        inv
    };
    let a_inv: Vec<Vec<usize>> = spec.a_terms.iter().map(inverse).collect();
    let b_inv: Vec<Vec<usize>> = spec.b_terms.iter().map(inverse).collect();

    let mut x_slots = Vec::with_capacity(half);
    let mut z_slots = Vec::with_capacity(half);
    for r in 0..half {
        let mut xs: Vec<Option<usize>> = spec
            .a_terms
            .iter()
            .map(|t| Some(t.image(r, ell, m)))
            .collect();
        xs.extend(spec.b_terms.iter().map(|t| Some(half + t.image(r, ell, m))));
        x_slots.push(xs);
        let mut zs: Vec<Option<usize>> = b_inv.iter().map(|inv| Some(inv[r])).collect();
        zs.extend(a_inv.iter().map(|inv| Some(half + inv[r])));
        z_slots.push(zs);
    }
    let supports = |slots: &[Vec<Option<usize>>]| -> Vec<Vec<usize>> {
        slots
            .iter()
            .map(|s| s.iter().flatten().copied().collect())
            .collect()
    };
    let hx = BinaryMatrix::from_row_supports(n, supports(&x_slots));
    let hz = BinaryMatrix::from_row_supports(n, supports(&z_slots));
    let logicals = compute_logicals(&hx, &hz)?;
    let k = n - gf2::rank(&hx) - gf2::rank(&hz);
    debug_assert_eq!(k, logicals.len());
    Ok(CssCode {
        n,
        k,
        d: None,
        hx,
        hz,
        logicals,
        family: CodeFamily::Bb(spec),
        x_slots,
        z_slots,
    })
}

/// Builds a preset and checks its dimension against the expected value.
pub fn build_preset(name: &str) -> Result<CssCode> {
    let (spec, d) = preset(name)?;
    let mut code = build_bb_code(&spec)?;
    code.d = Some(d);
    let canonical = PRESET_NAMES
        .iter()
        .find(|p| preset(p).map(|(s, _)| s == spec).unwrap_or(false))
        .copied();
    if let Some(expected) = canonical.and_then(preset_k) {
        if expected != code.k {
            return Err(Error::InvalidCode(format!(
                "preset {name}: expected k = {expected}, rank gives {}",
                code.k
            )));
        }
    }
    Ok(code)
}
