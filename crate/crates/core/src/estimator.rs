//! Element error indicators
//!
//! ```text
//! η_T² = h_T ‖[[σ·t]]‖²_{∂T} + h_T² ‖rot σ‖²_T + h_T² ‖f - div σ‖²_T
//! ```
//!
//! and data oscillation `osc_T² = h_T² ‖f - P_h f‖²_T`. On boundary edges the
//! jump is the full tangential trace. Each element integrates its own edges
//! with its own `h_T`, so interior edges are visited once from each side.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{DeRhamComplex, Degree, FeFunction};
use crate::mesh::{MarkedSet, Mesh, MeshTag};
use crate::quadrature::{segment_points, triangle_points};
use crate::solver::MixedSolution;
use crate::{Error, Result, ScalarField};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorIndicators {
    pub jump: Vec<f64>,
    pub corot: Vec<f64>,
    pub residual: Vec<f64>,
    pub eta_sq: Vec<f64>,
    pub osc_sq: Vec<f64>,
    #[serde(skip)]
    tag: Option<MeshTag>,
}

impl ErrorIndicators {
    /// Indicators not attached to a mesh, e.g. for testing marking.
    pub fn from_eta_sq(eta_sq: Vec<f64>) -> Self {
        let n = eta_sq.len();
        ErrorIndicators {
            jump: vec![0.0; n],
            corot: vec![0.0; n],
            residual: eta_sq.clone(),
            eta_sq,
            osc_sq: vec![0.0; n],
            tag: None,
        }
    }

    pub fn len(&self) -> usize {
        self.eta_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta_sq.is_empty()
    }

    pub fn tag(&self) -> Option<MeshTag> {
        self.tag
    }

    /// `η²` over all elements.
    pub fn eta_sq_total(&self) -> f64 {
        self.eta_sq.iter().sum()
    }

    /// `osc²` over all elements.
    pub fn osc_sq_total(&self) -> f64 {
        self.osc_sq.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("element,jump,corot,residual,eta_sq,osc_sq\n");
        for t in 0..self.len() {
            let _ = writeln!(
                s,
                "{t},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.jump[t], self.corot[t], self.residual[t], self.eta_sq[t], self.osc_sq[t]
            );
        }
        s
    }
}

/// Sum of `η_T²` over a subset, or over all elements.
pub fn eta_total(ind: &ErrorIndicators, subset: Option<&MarkedSet>) -> Result<f64> {
    match subset {
        None => Ok(ind.eta_sq_total()),
        Some(m) => {
            if let Some(tag) = ind.tag {
                if tag != m.tag() {
                    return Err(Error::MeshMismatch);
                }
            }
            m.ids()
                .iter()
                .map(|&t| ind.eta_sq.get(t).copied().ok_or(Error::InvalidElement(t)))
                .sum()
        }
    }
}

/// Indicators of a computed solution.
pub fn estimate(solution: &MixedSolution, f: &dyn ScalarField, complex: &DeRhamComplex) -> Result<ErrorIndicators> {
    estimate_field(&solution.sigma, f, complex)
}

/// Indicators of an arbitrary degree-1 form on `complex`.
pub fn estimate_field(sigma: &FeFunction, f: &dyn ScalarField, complex: &DeRhamComplex) -> Result<ErrorIndicators> {
    if sigma.tag() != complex.tag() {
        return Err(Error::MeshMismatch);
    }
    if sigma.degree() != Degree::One {
        return Err(Error::FieldMismatch(sigma.degree().index()));
    }
    let mesh = complex.mesh();
    let edge_jump = edge_jumps(sigma, complex)?;
    let rows: Vec<[f64; 4]> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let h = mesh.diameter(t);
            let jump = h * mesh.triangle_edges(t).iter().map(|&e| edge_jump[e]).sum::<f64>();
            let area = mesh.area(t);
            let corot = h * h * area * complex.rot_on(sigma, t).powi(2);
            let div = complex.div_on(sigma, t);
            let pts = triangle_points(&mesh.triangle_vertices(t), area);
            let values = pts.map(|(p, _)| f.eval(p));
            let mean = pts.iter().zip(&values).map(|((_, w), v)| w * v).sum::<f64>() / area;
            let residual = h * h * pts.iter().zip(&values).map(|((_, w), v)| w * (v - div).powi(2)).sum::<f64>();
            let osc = h * h * pts.iter().zip(&values).map(|((_, w), v)| w * (v - mean).powi(2)).sum::<f64>();
            [jump, corot, residual, osc]
        })
        .collect();
    let mut ind = ErrorIndicators {
        jump: rows.iter().map(|r| r[0]).collect(),
        corot: rows.iter().map(|r| r[1]).collect(),
        residual: rows.iter().map(|r| r[2]).collect(),
        eta_sq: Vec::new(),
        osc_sq: rows.iter().map(|r| r[3]).collect(),
        tag: Some(complex.tag()),
    };
    ind.eta_sq = (0..rows.len()).map(|t| ind.jump[t] + ind.corot[t] + ind.residual[t]).collect();
    Ok(ind)
}

/// `∫_e [[σ·t]]²` for every edge, the full trace on boundary edges.
pub fn edge_jumps(sigma: &FeFunction, complex: &DeRhamComplex) -> Result<Vec<f64>> {
    if sigma.tag() != complex.tag() {
        return Err(Error::MeshMismatch);
    }
    let mesh = complex.mesh();
    let c = sigma.coeffs().as_slice();
    Ok((0..mesh.num_edges())
        .into_par_iter()
        .map(|e| {
            let [lo, hi] = mesh.edges()[e];
            let (a, b) = (mesh.vertices()[lo], mesh.vertices()[hi]);
            let len = crate::mesh::dist(a, b);
            let tan = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
            let [t1, t2] = mesh.edge_triangles(e);
            let t1 = t1.expect("every edge has a triangle");
            segment_points(a, b)
                .iter()
                .map(|&(p, w)| {
                    let s1 = complex.rt0_value(c, t1, p);
                    let mut j = s1[0] * tan[0] + s1[1] * tan[1];
                    if let Some(t2) = t2 {
                        let s2 = complex.rt0_value(c, t2, p);
                        j -= s2[0] * tan[0] + s2[1] * tan[1];
                    }
                    w * j * j
                })
                .sum()
        })
        .collect())
}

/// Per-element `h_T² ‖f - P_h f‖²_T`.
pub fn oscillation_sq(f: &dyn ScalarField, complex: &DeRhamComplex) -> Vec<f64> {
    let mesh = complex.mesh();
    (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let area = mesh.area(t);
            let h = mesh.diameter(t);
            let pts = triangle_points(&mesh.triangle_vertices(t), area);
            let values = pts.map(|(p, _)| f.eval(p));
            let mean = pts.iter().zip(&values).map(|((_, w), v)| w * v).sum::<f64>() / area;
            h * h * pts.iter().zip(&values).map(|((_, w), v)| w * (v - mean).powi(2)).sum::<f64>()
        })
        .collect()
}

/// `osc(f, 𝒯)` with the projection `P_h f`.
pub fn oscillation(f: &dyn ScalarField, complex: &DeRhamComplex) -> f64 {
    oscillation_sq(f, complex).iter().sum::<f64>().sqrt()
}

/// Per-coarse-element `h_T² ‖f_h - P_H f_h‖²_T` for piecewise-constant data
/// `f_h` on a refinement, computed exactly from the fine values.
pub fn discrete_oscillation_sq(f_h: &FeFunction, fine: &Mesh, coarse: &Mesh) -> Result<Vec<f64>> {
    if f_h.tag() != fine.tag() {
        return Err(Error::MeshMismatch);
    }
    if f_h.degree() != Degree::Two {
        return Err(Error::FieldMismatch(f_h.degree().index()));
    }
    let parents = Mesh::ancestor_map(coarse, fine)?;
    let n = coarse.num_triangles();
    let mut mean = vec![0.0; n];
    for (t, &p) in parents.iter().enumerate() {
        mean[p] += fine.area(t) * f_h.coeffs()[t];
    }
    for (p, m) in mean.iter_mut().enumerate() {
        *m /= coarse.area(p);
    }
    let mut osc = vec![0.0; n];
    for (t, &p) in parents.iter().enumerate() {
        osc[p] += fine.area(t) * (f_h.coeffs()[t] - mean[p]).powi(2);
    }
    for (p, o) in osc.iter_mut().enumerate() {
        *o *= coarse.diameter(p).powi(2);
    }
    Ok(osc)
}

/// `osc(f_h, 𝒯_H)`.
pub fn discrete_oscillation(f_h: &FeFunction, fine: &Mesh, coarse: &Mesh) -> Result<f64> {
    Ok(discrete_oscillation_sq(f_h, fine, coarse)?.iter().sum::<f64>().sqrt())
}
