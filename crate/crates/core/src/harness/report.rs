use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentPoint;
use super::fit::{fit_ansatz, FitResult};
use crate::error::{Error, Result};

/// One CSV row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub code: String,
    pub mode: String,
    pub p: f64,
    pub p_bell: f64,
    pub p_ghz: f64,
    pub shots: u64,
    pub failures: u64,
    pub p_l: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bell_per_shot: usize,
    pub seed: u64,
    /// Noisy syndrome cycles per shot; 0 when unknown.
    #[serde(default)]
    pub rounds: usize,
}

impl From<&ExperimentPoint> for CsvRow {
    fn from(p: &ExperimentPoint) -> Self {
        CsvRow {
            code: p.code.clone(),
            mode: p.mode.as_str().into(),
            p: p.p,
            p_bell: p.p_bell,
            p_ghz: p.p_ghz,
            shots: p.shots,
            failures: p.failures,
            p_l: p.p_l,
            ci_lo: p.ci_lo,
            ci_hi: p.ci_hi,
            bell_per_shot: p.bell_per_shot,
            seed: p.seed,
            rounds: p.rounds,
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::SampleFormat(format!("csv: {e}"))
}

pub fn write_rows_csv<T: Serialize>(rows: &[T], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_points_csv(points: &[ExperimentPoint], w: impl Write) -> Result<()> {
    let rows: Vec<CsvRow> = points.iter().map(CsvRow::from).collect();
    write_rows_csv(&rows, w)
}

pub fn read_points_csv(r: impl Read) -> Result<Vec<CsvRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Rows sharing code, mode and Bell error rate, in file order.
fn curves(rows: &[CsvRow]) -> BTreeMap<(String, String, u64), Vec<(usize, &CsvRow)>> {
    let mut out: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        out.entry((r.code.clone(), r.mode.clone(), r.p_bell.to_bits()))
            .or_default()
            .push((i, r));
    }
    out
}

/// Ansatz exponent used for a code name when none is given: the values
/// {3, 4, 5} for the three BB presets and `ceil(d/2)` for surface codes.
pub fn default_alpha(code: &str) -> Option<u32> {
    match code {
        "[[72,12,6]]" => Some(3),
        "[[90,8,10]]" => Some(4),
        "[[144,12,12]]" => Some(5),
        _ => code
            .strip_prefix("surface_d")
            .and_then(|d| d.parse::<u32>().ok())
            .map(|d| d.div_ceil(2)),
    }
}

/// Fit of one curve, in the layout of the coefficient table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub code: String,
    pub curve: String,
    pub p_bell: f64,
    pub alpha: u32,
    pub n_pts: usize,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub residual: f64,
}

/// Fits every curve of a sweep table. A row with `p_L <= 0` is an error
/// naming its data line (header is line 1).
pub fn fit_rows(rows: &[CsvRow], alpha: Option<u32>) -> Result<Vec<FitRecord>> {
    if let Some(i) = rows.iter().position(|r| !(r.p_l > 0.0)) {
        return Err(Error::Fit {
            index: i + 2,
            message: format!(
                "row {} ({} {} p={}) has p_L = {}; sample more shots or drop it",
                i + 2,
                rows[i].code,
                rows[i].mode,
                rows[i].p,
                rows[i].p_l
            ),
        });
    }
    let mut out = Vec::new();
    for ((code, mode, _), members) in curves(rows) {
        let a = alpha
            .or_else(|| default_alpha(&code))
            .ok_or_else(|| Error::Fit {
                index: members[0].0 + 2,
                message: format!("no default alpha for code {code}; pass one"),
            })?;
        let pts: Vec<(f64, f64)> = members.iter().map(|(_, r)| (r.p, r.p_l)).collect();
        let FitResult {
            alpha,
            n_pts,
            c0,
            c1,
            c2,
            residual,
        } = fit_ansatz(&pts, a).map_err(|e| match e {
            Error::Fit { index, message } => Error::Fit {
                index: members.get(index).map_or(0, |m| m.0 + 2),
                message,
            },
            other => other,
        })?;
        out.push(FitRecord {
            code,
            curve: mode,
            p_bell: members[0].1.p_bell,
            alpha,
            n_pts,
            c0,
            c1,
            c2,
            residual,
        });
    }
    Ok(out)
}

/// Failure probability per syndrome cycle of a shot spanning `rounds` cycles.
pub fn per_round(p_shot: f64, rounds: usize) -> f64 {
    if rounds <= 1 {
        return p_shot;
    }
    1.0 - (1.0 - p_shot.clamp(0.0, 1.0)).powf(1.0 / rounds as f64)
}

/// Plot-ready row: the sweep row, its per-cycle rates and the uncoded
/// reference `p_L = p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub code: String,
    pub mode: String,
    pub p: f64,
    pub p_bell: f64,
    pub p_ghz: f64,
    pub shots: u64,
    pub failures: u64,
    pub p_l: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bell_per_shot: usize,
    pub rounds: usize,
    pub p_l_round: f64,
    pub ci_lo_round: f64,
    pub ci_hi_round: f64,
    pub uncoded: f64,
}

/// Point where a larger code's curve rises above a smaller one's.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub mode: String,
    pub lower: String,
    pub upper: String,
    /// `p` or `p_ghz`.
    pub parameter: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub crossings: Vec<Crossing>,
}

fn swept(rows: &[&CsvRow]) -> (&'static str, Vec<f64>) {
    let ps: Vec<f64> = rows.iter().map(|r| r.p).collect();
    let varies = |v: &[f64]| v.iter().any(|x| *x != v[0]);
    if !varies(&ps) && rows.len() > 1 {
        ("p_ghz", rows.iter().map(|r| r.p_ghz).collect())
    } else {
        ("p", ps)
    }
}

/// First sweep value where the curve of `hi` (the larger code) overtakes
/// `lo`, interpolated linearly in log-log coordinates.
pub fn crossing(lo: &[(f64, f64, u64)], hi: &[(f64, f64, u64)]) -> Option<f64> {
    let floor = |pl: f64, shots: u64| pl.max(0.5 / shots.max(1) as f64).ln();
    let mut prev: Option<(f64, f64)> = None;
    for &(x, pl_lo, s_lo) in lo {
        let Some(&(_, pl_hi, s_hi)) = hi.iter().find(|h| h.0 == x) else {
            continue;
        };
        let diff = floor(pl_hi, s_hi) - floor(pl_lo, s_lo);
        if let Some((px, pd)) = prev {
            if pd < 0.0 && diff >= 0.0 {
                let t = pd / (pd - diff);
                return Some((px.ln() + t * (x.ln() - px.ln())).exp());
            }
        }
        prev = Some((x, diff));
    }
    None
}

pub fn build_report(rows: &[CsvRow]) -> Report {
    let out_rows = rows
        .iter()
        .map(|r| ReportRow {
            code: r.code.clone(),
            mode: r.mode.clone(),
            p: r.p,
            p_bell: r.p_bell,
            p_ghz: r.p_ghz,
            shots: r.shots,
            failures: r.failures,
            p_l: r.p_l,
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
            bell_per_shot: r.bell_per_shot,
            rounds: r.rounds,
            p_l_round: per_round(r.p_l, r.rounds),
            ci_lo_round: per_round(r.ci_lo, r.rounds),
            ci_hi_round: per_round(r.ci_hi, r.rounds),
            uncoded: r.p,
        })
        .collect();
    // Surface curves of one mode, ordered by distance.
    let mut by_mode: BTreeMap<String, Vec<(u32, String, Vec<&CsvRow>)>> = BTreeMap::new();
    for ((code, mode, _), members) in curves(rows) {
        if let Some(d) = code
            .strip_prefix("surface_d")
            .and_then(|d| d.parse::<u32>().ok())
        {
            by_mode.entry(mode).or_default().push((
                d,
                code,
                members.into_iter().map(|m| m.1).collect(),
            ));
        }
    }
    let mut crossings = Vec::new();
    for (mode, mut list) in by_mode {
        list.sort_by_key(|x| x.0);
        let Some((_, base_code, base_rows)) = list.first() else {
            continue;
        };
        let (parameter, base_x) = swept(base_rows);
        let base: Vec<(f64, f64, u64)> = base_x
            .iter()
            .zip(base_rows)
            .map(|(&x, r)| (x, r.p_l, r.shots))
            .collect();
        for (_, code, members) in list.iter().skip(1) {
            let (_, xs) = swept(members);
            let cur: Vec<(f64, f64, u64)> = xs
                .iter()
                .zip(members)
                .map(|(&x, r)| (x, r.p_l, r.shots))
                .collect();
            if let Some(v) = crossing(&base, &cur) {
                crossings.push(Crossing {
                    mode: mode.clone(),
                    lower: base_code.clone(),
                    upper: code.clone(),
                    parameter: parameter.into(),
                    value: v,
                });
            }
        }
    }
    Report {
        rows: out_rows,
        crossings,
    }
}
