use serde::Serialize;

use super::history::ConvergenceHistory;
use crate::{Error, Result};

pub const BETA_GRID: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

#[derive(Debug, Clone, Serialize)]
pub struct BetaContraction {
    pub beta: f64,
    /// `q_k = (1-δ)e_k + βη_k`.
    pub q: Vec<f64>,
    /// `max_{k≥1} q_{k+1}/q_k`.
    pub max_ratio: f64,
    /// Max step ratio of `q_k + o_k`.
    pub max_ratio_with_osc: f64,
    pub contracting: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub delta: f64,
    pub theta: f64,
    pub betas: Vec<BetaContraction>,
    pub best_beta: f64,
    pub best_ratio: f64,
    pub contracting: bool,
    /// Range of `λ_k = (βη_k - βη_{k+1} + E_k + ô_k)/(βθη_k)` at the best β.
    pub lambda_min: f64,
    pub lambda_max: f64,
}

fn max_step_ratio(q: &[f64]) -> f64 {
    q.windows(2)
        .skip(1)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max)
}

/// Quasi-error contraction over a β grid. Requires at least four records
/// with the surrogate error populated.
pub fn contraction_report(history: &ConvergenceHistory, delta: f64, theta: f64, beta_grid: &[f64]) -> Result<ContractionReport> {
    if history.len() < 4 {
        return Err(Error::InsufficientData(format!("{} records, need at least 4", history.len())));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} is not in (0, 1)")));
    }
    if beta_grid.is_empty() || beta_grid.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::InvalidParameter("beta grid must be nonempty and positive".into()));
    }
    let records = history.records();
    let e: Vec<f64> = records
        .iter()
        .map(|r| r.error_sq.ok_or_else(|| Error::InsufficientData(format!("error_sq missing at k = {}", r.k))))
        .collect::<Result<_>>()?;

    let betas: Vec<BetaContraction> = beta_grid
        .iter()
        .map(|&beta| {
            let q: Vec<f64> = records.iter().zip(&e).map(|(r, e)| (1.0 - delta) * e + beta * r.eta_sq).collect();
            let with_osc: Vec<f64> = q.iter().zip(records).map(|(q, r)| q + r.osc_sq).collect();
            let max_ratio = max_step_ratio(&q);
            BetaContraction { beta, max_ratio, max_ratio_with_osc: max_step_ratio(&with_osc), contracting: max_ratio < 1.0, q }
        })
        .collect();
    let best = betas.iter().min_by(|a, b| a.max_ratio.total_cmp(&b.max_ratio)).expect("nonempty grid");
    let (best_beta, best_ratio) = (best.beta, best.max_ratio);

    let (mut lambda_min, mut lambda_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for w in records.windows(2) {
        let (r, next) = (&w[0], &w[1]);
        let (Some(big_e), Some(o_hat)) = (r.e_next_sq, r.osc_hat_sq) else { continue };
        if r.eta_sq <= 0.0 || theta <= 0.0 {
            continue;
        }
        let lambda = (best_beta * (r.eta_sq - next.eta_sq) + big_e + o_hat) / (best_beta * theta * r.eta_sq);
        lambda_min = lambda_min.min(lambda);
        lambda_max = lambda_max.max(lambda);
    }
    Ok(ContractionReport {
        delta,
        theta,
        contracting: best_ratio < 1.0,
        betas,
        best_beta,
        best_ratio,
        lambda_min,
        lambda_max,
    })
}
