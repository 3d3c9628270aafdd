//! CSV tables and rate recomputation.

use std::path::Path;

use morley::adaptive::AdaptiveStep;
use morley::fit_rates;
use serde::Serialize;

use crate::error::CliError;

pub const RESULTS_HEADER: [&str; 12] = [
    "level", "h", "dofs", "lambda_M", "lambda_R", "lambda_EXP", "err_M", "err_R", "err_EXP", "rate_M", "rate_R",
    "rate_EXP",
];

pub const ADAPTIVE_HEADER: [&str; 6] = ["iteration", "dofs", "lambda_M_A", "F_M", "lambda_R_A", "eta"];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub lambda_m: f64,
    pub lambda_r: Option<f64>,
    pub lambda_exp: Option<f64>,
    pub err_m: Option<f64>,
    pub err_r: Option<f64>,
    pub err_exp: Option<f64>,
    pub rate_m: Option<f64>,
    pub rate_r: Option<f64>,
    pub rate_exp: Option<f64>,
}

/// Round-trip exact scientific notation; missing values are empty cells.
pub fn fmt_num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))
}

pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    let io = |e: csv::Error| CliError::io(path, e);
    w.write_record(RESULTS_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.level.to_string(),
            fmt_num(Some(r.h)),
            r.dofs.to_string(),
            fmt_num(Some(r.lambda_m)),
            fmt_num(r.lambda_r),
            fmt_num(r.lambda_exp),
            fmt_num(r.err_m),
            fmt_num(r.err_r),
            fmt_num(r.err_exp),
            fmt_num(r.rate_m),
            fmt_num(r.rate_r),
            fmt_num(r.rate_exp),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_adaptive_csv(path: &Path, steps: &[AdaptiveStep<f64>]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    let io = |e: csv::Error| CliError::io(path, e);
    w.write_record(ADAPTIVE_HEADER).map_err(io)?;
    for s in steps {
        w.write_record([
            s.iteration.to_string(),
            s.dofs.to_string(),
            fmt_num(Some(s.lambda_m)),
            fmt_num(Some(s.f_m)),
            fmt_num(Some(s.lambda_r)),
            fmt_num(Some(s.eta)),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ColumnRates {
    pub column: String,
    pub pairwise: Vec<Option<f64>>,
    pub least_squares: Option<f64>,
    pub last: Option<f64>,
}

/// Recomputes the rates of every `err_*` column of a results CSV from its
/// `h` and error cells.
pub fn rates_from_csv(path: &Path) -> Result<Vec<ColumnRates>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let headers = r.headers().map_err(|e| CliError::io(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::new("invalid_csv", format!("{}: missing column {name}", path.display())))
    };
    let hcol = col("h")?;
    let names = ["err_M", "err_R", "err_EXP"];
    let cols = names.iter().map(|n| col(n)).collect::<Result<Vec<_>, _>>()?;
    let parse = |s: &str| -> Result<Option<f64>, CliError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| CliError::new("invalid_csv", format!("{}: bad number '{s}'", path.display())))
        }
    };
    let mut h = Vec::new();
    let mut errs: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::io(path, e))?;
        h.push(parse(&rec[hcol])?.unwrap_or(f64::NAN));
        for (j, &c) in cols.iter().enumerate() {
            errs[j].push(parse(&rec[c])?);
        }
    }
    Ok(names
        .iter()
        .zip(errs)
        .map(|(name, e)| {
            let idx: Vec<usize> = (0..h.len()).filter(|&i| e[i].is_some()).collect();
            let hs: Vec<f64> = idx.iter().map(|&i| h[i]).collect();
            let es: Vec<f64> = idx.iter().map(|&i| e[i].unwrap()).collect();
            let fit = fit_rates(&hs, &es);
            let mut pairwise = vec![None; h.len()];
            for (k, &i) in idx.iter().enumerate() {
                pairwise[i] = fit.pairwise[k];
            }
            ColumnRates {
                column: name.to_string(),
                pairwise,
                least_squares: fit.least_squares,
                last: fit.last,
            }
        })
        .collect())
}
