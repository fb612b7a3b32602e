use std::sync::Arc;

use serde::Serialize;

use super::history::{ConvergenceHistory, HistoryRecord};
use super::marking::{dorfler_mark, dorfler_select};
use crate::complex::{DeRhamComplex, Degree, FeFunction};
use crate::data::{DataFunction, PiecewiseConstant};
use crate::estimator::{discrete_oscillation, estimate, oscillation_sq};
use crate::mesh::{bisect, refine_uniform, MarkedSet, Mesh};
use crate::solver::{solve_mixed, MixedSolution, MixedSystem, SolverOptions};
use crate::{Error, Result, ScalarField};

/// Marking parameter of the data approximation loop.
pub const THETA_OSC: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Dörfler marking on `η_T²`.
    Dorfler,
    /// One uniform level (two bisection sweeps) per iteration.
    Uniform,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmfemOptions {
    pub max_iter: usize,
    /// Uniform levels added to the final mesh for the reference solution;
    /// zero skips it and leaves `e_k` empty.
    pub reference_depth: usize,
    /// `δ` and `β` used to fill `q_k` in the history.
    pub delta: f64,
    pub beta: f64,
    pub strategy: Strategy,
}

impl Default for AmfemOptions {
    fn default() -> Self {
        AmfemOptions { max_iter: 50, reference_depth: 2, delta: 0.25, beta: 1.0, strategy: Strategy::Dorfler }
    }
}

/// Result of an adaptive run. `converged` is false when the iteration cap
/// stopped the loop before `η ≤ eps`.
#[derive(Debug, Clone)]
pub struct AmfemOutcome {
    pub mesh: Arc<Mesh>,
    pub solution: MixedSolution,
    pub history: ConvergenceHistory,
    pub converged: bool,
    /// Every mesh of the run, in order.
    pub meshes: Vec<Arc<Mesh>>,
    /// Marked sets of every iteration except the last.
    pub marked: Vec<MarkedSet>,
}

/// The adaptive loop SOLVE, ESTIMATE, MARK, REFINE, stopped once
/// `η(σ_k, 𝒯_k) ≤ eps`.
pub fn amfem(mesh0: &Mesh, f: &dyn ScalarField, eps: f64, theta: f64, options: &AmfemOptions) -> Result<AmfemOutcome> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta = {theta} is not in (0, 1]")));
    }
    let mut history = ConvergenceHistory::new();
    let mut complexes: Vec<DeRhamComplex> = Vec::new();
    let mut sigmas: Vec<FeFunction> = Vec::new();
    let mut marked_sets = Vec::new();
    let mut mesh = Arc::new(mesh0.clone());
    let mut converged;

    let solution = loop {
        let k = complexes.len();
        let complex = DeRhamComplex::new(mesh.clone());
        let solution = MixedSystem::new(&complex, SolverOptions::default())?.solve(&complex.project_top(f))?;
        let ind = estimate(&solution, f, &complex)?;
        let eta_sq = ind.eta_sq_total();
        let osc_sq: f64 = ind.osc_sq.iter().sum();

        if let (Some(prev), Some(prev_sigma)) = (complexes.last(), sigmas.last()) {
            let diff = solution.sigma.sub(&complex.prolong(prev_sigma, prev)?)?;
            let record = &mut history.records_mut()[k - 1];
            record.e_next_sq = Some(complex.inner(&diff, &diff)?);
            record.osc_hat_sq = Some(discrete_oscillation(&solution.f_h, &mesh, prev.mesh())?.powi(2));
        }

        let done = eta_sq.sqrt() <= eps;
        converged = done;
        let stop = done || k >= options.max_iter;
        let marked = if stop {
            None
        } else {
            Some(match options.strategy {
                Strategy::Dorfler => dorfler_mark(&ind, theta, &mesh)?,
                Strategy::Uniform => MarkedSet::all(&mesh),
            })
        };
        history.push(HistoryRecord {
            k,
            cells: mesh.num_triangles(),
            dofs_sigma: complex.num_dofs(Degree::One),
            dofs_u: complex.num_dofs(Degree::Two),
            error_sq: None,
            e_next_sq: None,
            eta_sq,
            osc_sq,
            osc_hat_sq: None,
            marked: marked.as_ref().map_or(0, |m| m.len()),
            q: None,
        });
        sigmas.push(solution.sigma.clone());
        let next = match (&marked, options.strategy) {
            (None, _) => None,
            (Some(_), Strategy::Uniform) => Some(refine_uniform(&mesh, 1)?),
            (Some(m), Strategy::Dorfler) => Some(bisect(&mesh, m)?),
        };
        complexes.push(complex);
        if let Some(m) = marked {
            marked_sets.push(m);
        }
        match next {
            Some(m) => mesh = Arc::new(m),
            None => break solution,
        }
    };

    if options.reference_depth > 0 {
        let reference = ReferenceSolution::new(&mesh, f, options.reference_depth)?;
        for (k, (c, s)) in complexes.iter().zip(&sigmas).enumerate() {
            history.records_mut()[k].error_sq = Some(reference.error_sq(s, c)?);
        }
        history.set_quasi_error(options.delta, options.beta);
    }
    let meshes = complexes.iter().map(|c| c.mesh().clone()).collect();
    Ok(AmfemOutcome { mesh, solution, history, converged, meshes, marked: marked_sets })
}

/// Surrogate for the exact flux: the discrete solution on a uniformly
/// refined mesh.
pub struct ReferenceSolution {
    pub complex: DeRhamComplex,
    pub solution: MixedSolution,
}

impl ReferenceSolution {
    pub fn new(mesh: &Mesh, f: &dyn ScalarField, depth: usize) -> Result<Self> {
        let complex = DeRhamComplex::new(Arc::new(refine_uniform(mesh, depth)?));
        let solution = solve_mixed(&complex, f)?;
        Ok(ReferenceSolution { complex, solution })
    }

    pub fn sigma(&self) -> &FeFunction {
        &self.solution.sigma
    }

    /// `‖σ_ref - σ‖²` for a flux on any coarser mesh of the same family.
    pub fn error_sq(&self, sigma: &FeFunction, complex: &DeRhamComplex) -> Result<f64> {
        let diff = self.solution.sigma.sub(&self.complex.prolong(sigma, complex)?)?;
        self.complex.inner(&diff, &diff)
    }

    /// `⟨σ_ref - a, b⟩` for fluxes `a`, `b` given on (coarser) meshes.
    pub fn inner_error_with(
        &self,
        a: &FeFunction,
        a_complex: &DeRhamComplex,
        b: &FeFunction,
        b_complex: &DeRhamComplex,
    ) -> Result<f64> {
        let diff = self.solution.sigma.sub(&self.complex.prolong(a, a_complex)?)?;
        self.complex.inner(&diff, &self.complex.prolong(b, b_complex)?)
    }
}

#[derive(Debug, Clone)]
pub struct ApproxOutcome {
    pub mesh: Mesh,
    pub osc: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `#𝒯_H - #𝒯_0`.
    pub added_cells: usize,
    /// `Σ #ℳ_j` over the loop.
    pub marked_total: usize,
    /// Vertices of the marked elements of every iteration.
    pub marked_triangles: Vec<[crate::Point; 3]>,
}

/// Greedy data approximation: Dörfler marking on the oscillation
/// indicators with `θ = 0.5` until `osc(f, 𝒯_H) ≤ eps`.
pub fn approx_data(f: &dyn ScalarField, mesh0: &Mesh, eps: f64, max_iter: usize) -> Result<ApproxOutcome> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let mut mesh = mesh0.clone();
    let mut marked_total = 0;
    let mut marked_triangles = Vec::new();
    for it in 0..=max_iter {
        let complex = DeRhamComplex::new(Arc::new(mesh.clone()));
        let osc_sq = oscillation_sq(f, &complex);
        let osc = osc_sq.iter().sum::<f64>().sqrt();
        if osc <= eps || it == max_iter {
            return Ok(ApproxOutcome {
                added_cells: mesh.num_triangles() - mesh0.num_triangles(),
                mesh,
                osc,
                iterations: it,
                converged: osc <= eps,
                marked_total,
                marked_triangles,
            });
        }
        let ids = dorfler_select(&osc_sq, THETA_OSC)?;
        marked_total += ids.len();
        marked_triangles.extend(ids.iter().map(|&t| mesh.triangle_vertices(t)));
        mesh = bisect(&mesh, &MarkedSet::new(&mesh, ids)?)?;
    }
    unreachable!("the loop returns at it == max_iter")
}

#[derive(Debug, Clone)]
pub struct OptimalOutcome {
    pub approx: ApproxOutcome,
    /// Piecewise-constant data on the approximation mesh.
    pub f_coarse: DataFunction,
    pub amfem: AmfemOutcome,
}

/// Data approximation to `eps/2`, then the adaptive loop on the resulting
/// mesh with the projected data `f_H` and tolerance `eps/2`.
pub fn optimal_amfem(
    mesh0: &Mesh,
    f: &dyn ScalarField,
    eps: f64,
    theta: f64,
    options: &AmfemOptions,
) -> Result<OptimalOutcome> {
    let approx = approx_data(f, mesh0, eps / 2.0, options.max_iter)?;
    let coarse = Arc::new(approx.mesh.clone());
    let complex = DeRhamComplex::new(coarse.clone());
    let values = complex.project_top(f).into_coeffs().as_slice().to_vec();
    let f_coarse = DataFunction::PiecewiseConstant(Arc::new(PiecewiseConstant::new(coarse, values)?));
    let amfem = amfem(&approx.mesh, &f_coarse, eps / 2.0, theta, options)?;
    Ok(OptimalOutcome { approx, f_coarse, amfem })
}
