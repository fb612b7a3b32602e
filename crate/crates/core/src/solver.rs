//! The discrete mixed problem: find `σ ∈ RT0`, `u ∈ P0` with
//!
//! ```text
//! ⟨σ, τ⟩ - ⟨u, div τ⟩ = 0        for all τ
//! ⟨div σ, v⟩          = ⟨f, v⟩   for all v
//! ```
//!
//! assembled as the symmetric indefinite system
//! `[[M1, -Bᵀ], [-B, 0]] [σ; u] = [0; -M2 f_h]` with `B = M2 D1`.
//!
//! The factorization adds `-ε I` to the zero block so that every symmetric
//! ordering admits an `LDLᵀ` factorization, then iterative refinement against
//! the unmodified matrix removes the perturbation.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::complex::{spmv, DeRhamComplex, Degree, FeFunction};
use crate::ldl::{LdlFactor, LdlOptions, Ordering, SymmetricCsc};
use crate::{Error, Result, ScalarField};

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub ordering: Ordering,
    /// Size of the `-ε I` perturbation of the zero block.
    pub static_regularization: f64,
    pub max_refinement_steps: usize,
    /// Relative residual target for iterative refinement.
    pub tolerance: f64,
    /// Systems up to this size fall back to dense LU if the sparse path
    /// fails or stagnates.
    pub dense_fallback_limit: usize,
    /// Skip the sparse path entirely (small systems only).
    pub force_dense: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            ordering: Ordering::Amd,
            static_regularization: 1e-10,
            max_refinement_steps: 20,
            tolerance: 1e-14,
            dense_fallback_limit: 2000,
            force_dense: false,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveDiagnostics {
    pub unknowns: usize,
    /// `max_T |(D1 σ)_T - (f_h)_T|`.
    pub constraint_residual: f64,
    /// `‖M1 σ - D1ᵀ M2 u‖₂`.
    pub first_equation_residual: f64,
    /// Final relative residual of the full system (infinity norm).
    pub relative_residual: f64,
    pub refinement_steps: usize,
    pub min_abs_pivot: f64,
    pub regularized_pivots: usize,
    pub dense: bool,
}

/// A solution `(σ_h, u_h)` together with the projected data it solves for.
#[derive(Debug, Clone)]
pub struct MixedSolution {
    pub sigma: FeFunction,
    pub u: FeFunction,
    pub f_h: FeFunction,
    pub diagnostics: SolveDiagnostics,
}

enum Factor {
    Sparse(LdlFactor),
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// The assembled and factored system of one complex, reusable across
/// right-hand sides.
pub struct MixedSystem<'a> {
    complex: &'a DeRhamComplex,
    exact: SymmetricCsc,
    exact_norm: f64,
    factor: Factor,
    options: SolverOptions,
}

impl<'a> MixedSystem<'a> {
    pub fn new(complex: &'a DeRhamComplex, options: SolverOptions) -> Result<Self> {
        let (ne, nt) = (complex.num_dofs(Degree::One), complex.num_dofs(Degree::Two));
        let n = ne + nt;
        let mut trip: Vec<(usize, usize, f64)> = complex
            .mass(Degree::One)
            .triplet_iter()
            .filter(|t| t.0 <= t.1)
            .map(|(i, j, v)| (i, j, *v))
            .collect();
        for (t, e, v) in complex.d1().triplet_iter() {
            // B = M2 D1 has entries ±1
            trip.push((e, ne + t, -v * complex.mesh().area(t)));
        }
        for t in 0..nt {
            trip.push((ne + t, ne + t, 0.0));
        }
        let exact = SymmetricCsc::from_triplets(n, trip.iter().copied())?;

        let factor = if options.force_dense {
            dense_factor(&exact)?
        } else {
            let eps = options.static_regularization;
            let regularized = SymmetricCsc::from_triplets(
                n,
                trip.iter().copied().chain((0..nt).map(|t| (ne + t, ne + t, -eps))),
            )?;
            let signs: Vec<i8> = (0..n).map(|i| if i < ne { 1 } else { -1 }).collect();
            let ldl_options = LdlOptions {
                ordering: options.ordering.clone(),
                signs: Some(signs),
                regularize_eps: 1e-14,
                regularize_delta: 1e-8,
            };
            match LdlFactor::new(&regularized, &ldl_options) {
                Ok(f) => Factor::Sparse(f),
                Err(_) if n <= options.dense_fallback_limit => dense_factor(&exact)?,
                Err(e) => return Err(e),
            }
        };
        let exact_norm = exact.abs_row_sum_max().max(1.0);
        Ok(MixedSystem { complex, exact, exact_norm, factor, options })
    }

    pub fn complex(&self) -> &DeRhamComplex {
        self.complex
    }

    /// Solves for the given piecewise-constant data.
    pub fn solve(&mut self, f_h: &FeFunction) -> Result<MixedSolution> {
        let c = self.complex;
        if f_h.tag() != c.tag() {
            return Err(Error::MeshMismatch);
        }
        if f_h.degree() != Degree::Two {
            return Err(Error::FieldMismatch(f_h.degree().index()));
        }
        let (ne, nt) = (c.num_dofs(Degree::One), c.num_dofs(Degree::Two));
        let n = ne + nt;
        let mut b = vec![0.0; n];
        for t in 0..nt {
            b[ne + t] = -c.mesh().area(t) * f_h.coeffs()[t];
        }

        let (mut x, mut steps, mut rel) = self.refine(&b);
        let mut dense = matches!(self.factor, Factor::Dense(_));
        if !(rel <= self.options.tolerance * 100.0) && !dense {
            if n > self.options.dense_fallback_limit {
                return Err(Error::Factorization(format!(
                    "iterative refinement stalled at relative residual {rel:.3e}"
                )));
            }
            self.factor = dense_factor(&self.exact)?;
            dense = true;
            (x, steps, rel) = self.refine(&b);
        }

        let sigma = c.function(Degree::One, DVector::from_column_slice(&x[..ne]))?;
        let u = c.function(Degree::Two, DVector::from_column_slice(&x[ne..]))?;
        let div = spmv(c.d1(), sigma.coeffs());
        let constraint_residual = (0..nt).map(|t| (div[t] - f_h.coeffs()[t]).abs()).fold(0.0, f64::max);
        let m2u = spmv(c.mass(Degree::Two), u.coeffs());
        let first = spmv(c.mass(Degree::One), sigma.coeffs()) - spmv(&c.d1().transpose(), &m2u);
        let (min_abs_pivot, regularized_pivots) = match &self.factor {
            Factor::Sparse(f) => (f.min_abs_pivot(), f.regularized_count()),
            Factor::Dense(lu) => {
                let u = lu.u();
                ((0..n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min), 0)
            }
        };
        Ok(MixedSolution {
            sigma,
            u,
            f_h: f_h.clone(),
            diagnostics: SolveDiagnostics {
                unknowns: n,
                constraint_residual,
                first_equation_residual: first.norm(),
                relative_residual: rel,
                refinement_steps: steps,
                min_abs_pivot,
                regularized_pivots,
                dense,
            },
        })
    }

    fn apply_inverse(&self, r: &[f64]) -> Vec<f64> {
        match &self.factor {
            Factor::Sparse(f) => f.solve(r),
            Factor::Dense(lu) => lu
                .solve(&DVector::from_column_slice(r))
                .map(|v| v.as_slice().to_vec())
                .unwrap_or_else(|| vec![f64::NAN; r.len()]),
        }
    }

    /// Iterative refinement; returns the iterate, the number of correction
    /// steps and the final relative residual.
    fn refine(&self, b: &[f64]) -> (Vec<f64>, usize, f64) {
        let bnorm = inf_norm(b);
        let mut x = self.apply_inverse(b);
        if bnorm == 0.0 {
            return (vec![0.0; b.len()], 0, 0.0);
        }
        let mut best = (x.clone(), f64::INFINITY);
        let mut steps = 0;
        loop {
            let kx = self.exact.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&kx).map(|(bi, ki)| bi - ki).collect();
            let scale = bnorm + self.exact_norm * inf_norm(&x);
            let rel = inf_norm(&r) / scale;
            if !rel.is_finite() {
                return (best.0, steps, f64::INFINITY);
            }
            if rel < best.1 {
                best = (x.clone(), rel);
            } else if rel > 0.5 * best.1 && steps > 2 {
                // no further progress
                return (best.0, steps, best.1);
            }
            if rel <= self.options.tolerance || steps >= self.options.max_refinement_steps {
                return (best.0, steps, best.1);
            }
            let dx = self.apply_inverse(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            steps += 1;
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn dense_factor(a: &SymmetricCsc) -> Result<Factor> {
    let n = a.dim();
    let m = DMatrix::from_column_slice(n, n, &a.to_dense());
    let lu = m.lu();
    if !lu.is_invertible() {
        return Err(Error::Factorization("singular mixed system".into()));
    }
    Ok(Factor::Dense(lu))
}

/// Solves with data `P_h f`.
pub fn solve_mixed(complex: &DeRhamComplex, f: &dyn ScalarField) -> Result<MixedSolution> {
    solve_mixed_projected(complex, &complex.project_top(f))
}

/// Solves with given piecewise-constant data.
pub fn solve_mixed_projected(complex: &DeRhamComplex, f_h: &FeFunction) -> Result<MixedSolution> {
    MixedSystem::new(complex, SolverOptions::default())?.solve(f_h)
}

/// The three solutions compared throughout the quasi-orthogonality and
/// stability analysis of a nested pair.
#[derive(Debug, Clone)]
pub struct DataVariants {
    /// Fine solution with data `P_h f`.
    pub sigma_h: MixedSolution,
    /// Fine solution with coarse data `P_H f`.
    pub sigma_tilde: MixedSolution,
    /// Coarse solution with data `P_H f`.
    pub sigma_coarse: MixedSolution,
}

pub fn solve_with_data_variants(
    fine: &DeRhamComplex,
    coarse: &DeRhamComplex,
    f: &dyn ScalarField,
) -> Result<DataVariants> {
    let f_coarse = coarse.project_top(f);
    let mut sys = MixedSystem::new(fine, SolverOptions::default())?;
    let sigma_h = sys.solve(&fine.project_top(f))?;
    let sigma_tilde = sys.solve(&fine.prolong(&f_coarse, coarse)?)?;
    let sigma_coarse = if coarse.tag() == fine.tag() {
        sigma_tilde.clone()
    } else {
        solve_mixed_projected(coarse, &f_coarse)?
    };
    Ok(DataVariants { sigma_h, sigma_tilde, sigma_coarse })
}
