use crate::estimator::ErrorIndicators;
use crate::mesh::{MarkedSet, Mesh};
use crate::{Error, Result};

/// Minimal set of elements carrying a `θ` fraction of `Σ η_T²`: elements are
/// taken by decreasing `η_T²`, ties by increasing id, until the threshold is
/// reached.
pub fn dorfler_select(eta_sq: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta = {theta} is not in (0, 1]")));
    }
    if eta_sq.is_empty() {
        return Err(Error::InsufficientData("no indicators to mark".into()));
    }
    if let Some(bad) = eta_sq.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("indicator {bad} is negative or not finite")));
    }
    let mut order: Vec<usize> = (0..eta_sq.len()).collect();
    order.sort_by(|&a, &b| eta_sq[b].total_cmp(&eta_sq[a]).then(a.cmp(&b)));
    // summing in selection order makes the full prefix reproduce the total
    let total: f64 = order.iter().map(|&t| eta_sq[t]).sum();
    let target = theta * total;
    let mut acc = 0.0;
    let mut out = Vec::new();
    for &t in &order {
        if acc >= target {
            break;
        }
        acc += eta_sq[t];
        out.push(t);
    }
    Ok(out)
}

pub fn dorfler_mark(ind: &ErrorIndicators, theta: f64, mesh: &Mesh) -> Result<MarkedSet> {
    if let Some(tag) = ind.tag() {
        if tag != mesh.tag() {
            return Err(Error::MeshMismatch);
        }
    }
    MarkedSet::new(mesh, dorfler_select(&ind.eta_sq, theta)?)
}

/// Smallest cardinality of any subset reaching the Dörfler threshold, by
/// enumeration of all subsets (at most 20 elements).
pub fn brute_force_min_cardinality(eta_sq: &[f64], theta: f64) -> Result<usize> {
    let n = eta_sq.len();
    if n > 20 {
        return Err(Error::InvalidParameter(format!("{n} elements is too many to enumerate")));
    }
    let total: f64 = eta_sq.iter().sum();
    let mut best = n;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let s: f64 = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| eta_sq[i]).sum();
        if s >= theta * total * (1.0 - 1e-12) {
            best = size;
        }
    }
    Ok(best)
}
