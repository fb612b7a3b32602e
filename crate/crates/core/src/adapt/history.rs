use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::{Error, Result};

pub const CSV_HEADER: &str = "k,cells,dofs_sigma,dofs_u,error_sq,E_sq,eta_sq,osc_sq,osc_hat_sq,marked,q";

/// One iteration of an adaptive run. Quantities that need the next
/// iterate (`E_k`, `ô_k`) or the reference solution (`e_k`, `q_k`) are
/// `None` until known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryRecord {
    pub k: usize,
    pub cells: usize,
    pub dofs_sigma: usize,
    pub dofs_u: usize,
    /// `e_k = ‖σ - σ_k‖²` against the reference solution.
    pub error_sq: Option<f64>,
    /// `E_k = ‖σ_{k+1} - σ_k‖²`.
    pub e_next_sq: Option<f64>,
    /// `η_k = η²(σ_k, 𝒯_k)`.
    pub eta_sq: f64,
    /// `o_k = osc²(f, 𝒯_k)`.
    pub osc_sq: f64,
    /// `ô_k = osc²(f_{k+1}, 𝒯_k)`.
    pub osc_hat_sq: Option<f64>,
    pub marked: usize,
    /// `q_k = (1 - δ) e_k + β η_k` with the reporting `δ`, `β`.
    pub q: Option<f64>,
}

impl HistoryRecord {
    pub fn dofs(&self) -> usize {
        self.dofs_sigma + self.dofs_u
    }
}

/// Append-only record of an adaptive run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConvergenceHistory {
    records: Vec<HistoryRecord>,
}

impl ConvergenceHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: Vec<HistoryRecord>) -> Self {
        ConvergenceHistory { records }
    }

    pub fn push(&mut self, record: HistoryRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[HistoryRecord] {
        &self.records
    }

    pub(crate) fn records_mut(&mut self) -> &mut [HistoryRecord] {
        &mut self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&HistoryRecord> {
        self.records.last()
    }

    /// Fills `q_k = (1 - δ) e_k + β η_k` wherever `e_k` is known.
    pub fn set_quasi_error(&mut self, delta: f64, beta: f64) {
        for r in &mut self.records {
            r.q = r.error_sq.map(|e| (1.0 - delta) * e + beta * r.eta_sq);
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:.16e},{:.16e},{},{},{}",
                r.k,
                r.cells,
                r.dofs_sigma,
                r.dofs_u,
                opt(r.error_sq),
                opt(r.e_next_sq),
                r.eta_sq,
                r.osc_sq,
                opt(r.osc_hat_sq),
                r.marked,
                opt(r.q)
            );
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        text.parse().map_err(|e: Error| match e {
            Error::InsufficientData(m) => Error::InsufficientData(format!("{}: {m}", path.display())),
            Error::InvalidParameter(m) => Error::InvalidParameter(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

impl FromStr for ConvergenceHistory {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::InsufficientData("empty history file".into()))?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        if columns != CSV_HEADER.split(',').collect::<Vec<_>>() {
            return Err(Error::InvalidParameter(format!("unexpected history header `{header}`")));
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != columns.len() {
                return Err(Error::InvalidParameter(format!("row {} has {} fields", i + 1, f.len())));
            }
            let bad = |what: &str| Error::InvalidParameter(format!("row {}: bad {what}", i + 1));
            let int = |s: &str, what: &str| s.parse::<usize>().map_err(|_| bad(what));
            let real = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
            let opt = |s: &str, what: &str| if s.is_empty() { Ok(None) } else { real(s, what).map(Some) };
            records.push(HistoryRecord {
                k: int(f[0], "k")?,
                cells: int(f[1], "cells")?,
                dofs_sigma: int(f[2], "dofs_sigma")?,
                dofs_u: int(f[3], "dofs_u")?,
                error_sq: opt(f[4], "error_sq")?,
                e_next_sq: opt(f[5], "E_sq")?,
                eta_sq: real(f[6], "eta_sq")?,
                osc_sq: real(f[7], "osc_sq")?,
                osc_hat_sq: opt(f[8], "osc_hat_sq")?,
                marked: int(f[9], "marked")?,
                q: opt(f[10], "q")?,
            });
        }
        Ok(ConvergenceHistory { records })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateAxis {
    /// `dofs_sigma + dofs_u`.
    Dofs,
    Cells,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateQuantity {
    /// `sqrt(e_k)`.
    Error,
    /// `sqrt(η_k)`.
    Eta,
}

/// Least-squares slope of `log y` against `log x` over the last
/// `max(3, n/2)` records.
pub fn fit_rate(history: &ConvergenceHistory, x: RateAxis, y: RateQuantity) -> Result<f64> {
    let points: Vec<(f64, f64)> = history
        .records
        .iter()
        .map(|r| {
            let xv = match x {
                RateAxis::Dofs => r.dofs() as f64,
                RateAxis::Cells => r.cells as f64,
            };
            let yv = match y {
                RateQuantity::Error => r.error_sq.map(f64::sqrt).unwrap_or(f64::NAN),
                RateQuantity::Eta => r.eta_sq.sqrt(),
            };
            (xv, yv)
        })
        .collect();
    fit_log_slope(&points)
}

/// Slope of the log-log least-squares line through the last `max(3, n/2)`
/// points.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("{n} records, at least 3 needed")));
    }
    let tail = &points[n - (n / 2).max(3)..];
    if tail.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::InsufficientData("rates need positive finite data".into()));
    }
    let logs: Vec<(f64, f64)> = tail.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all x values coincide".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn synthetic(errors: impl Fn(f64) -> f64) -> ConvergenceHistory {
        let mut h = ConvergenceHistory::new();
        for k in 0..6 {
            let n = 16usize << (2 * k);
            let e = errors(n as f64);
            h.push(HistoryRecord {
                k,
                cells: n,
                dofs_sigma: n / 2,
                dofs_u: n / 2,
                error_sq: Some(e * e),
                e_next_sq: None,
                eta_sq: e * e,
                osc_sq: 0.0,
                osc_hat_sq: None,
                marked: 0,
                q: None,
            });
        }
        h
    }

    #[test]
    fn exact_power_laws() {
        let h = synthetic(|n| n.powf(-0.5));
        assert!((fit_rate(&h, RateAxis::Dofs, RateQuantity::Error).unwrap() + 0.5).abs() < 1e-12);
        let h = synthetic(|n| 7.0 / n);
        assert!((fit_rate(&h, RateAxis::Cells, RateQuantity::Eta).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_keeps_missing_values() {
        let mut h = synthetic(|n| n.powf(-0.5));
        h.records_mut()[5].error_sq = None;
        h.set_quasi_error(0.25, 1.0);
        let back: ConvergenceHistory = h.to_csv().parse().unwrap();
        assert_eq!(back, h);
        assert_eq!(back.records()[5].q, None);
    }

    #[test]
    fn short_or_empty_input_is_rejected() {
        assert!("".parse::<ConvergenceHistory>().is_err());
        let h: ConvergenceHistory = CSV_HEADER.parse().unwrap();
        assert!(fit_rate(&h, RateAxis::Dofs, RateQuantity::Eta).is_err());
    }
}
