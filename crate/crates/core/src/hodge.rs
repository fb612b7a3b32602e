//! Discrete Hodge decomposition of 1-forms, harmonic forms, gaps between
//! subspaces and discrete Poincaré constants. Everything here is dense and
//! meant for desk-scale meshes.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;

use crate::complex::{DeRhamComplex, Degree, FeFunction};
use crate::mesh::MeshTag;
use crate::{Error, Result};

/// Relative singular value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// An `M`-orthonormal basis of a subspace of a discrete space.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    degree: Degree,
    columns: DMatrix<f64>,
    mass: DMatrix<f64>,
    tag: Option<MeshTag>,
}

impl SubspaceBasis {
    /// Orthonormalizes the span of `columns` in the inner product `mass`.
    /// Linearly dependent columns are dropped.
    pub fn new(degree: Degree, columns: DMatrix<f64>, mass: DMatrix<f64>) -> Result<Self> {
        Self::build(degree, columns, mass, None)
    }

    fn build(degree: Degree, columns: DMatrix<f64>, mass: DMatrix<f64>, tag: Option<MeshTag>) -> Result<Self> {
        let n = mass.nrows();
        if mass.ncols() != n || columns.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} columns for a {}x{} mass matrix",
                columns.nrows(),
                columns.ncols(),
                mass.nrows(),
                mass.ncols()
            )));
        }
        let columns = m_orthonormalize(&columns, &mass);
        Ok(SubspaceBasis { degree, columns, mass, tag })
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn tag(&self) -> Option<MeshTag> {
        self.tag
    }

    /// `M`-orthogonal projection of a coefficient vector onto the subspace.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.columns * (self.columns.transpose() * (&self.mass * x))
    }

    fn project_matrix(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        &self.columns * (self.columns.transpose() * (&self.mass * x))
    }

    /// Gram matrix `QᵀMQ`, the identity up to round-off.
    pub fn gram(&self) -> DMatrix<f64> {
        self.columns.transpose() * &self.mass * &self.columns
    }

    /// The same subspace represented on a finer complex.
    pub fn prolong(&self, coarse: &DeRhamComplex, fine: &DeRhamComplex) -> Result<SubspaceBasis> {
        if self.tag != Some(coarse.tag()) {
            return Err(Error::MeshMismatch);
        }
        let mut cols = DMatrix::zeros(fine.num_dofs(self.degree), self.dim());
        for j in 0..self.dim() {
            let f = coarse.function(self.degree, self.columns.column(j).into_owned())?;
            cols.set_column(j, fine.prolong(&f, coarse)?.coeffs());
        }
        SubspaceBasis::build(self.degree, cols, dense(fine.mass(self.degree)), Some(fine.tag()))
    }

    /// One row per dof: `dof,h0,h1,...`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dof");
        for j in 0..self.dim() {
            let _ = write!(s, ",h{j}");
        }
        s.push('\n');
        for i in 0..self.columns.nrows() {
            let _ = write!(s, "{i}");
            for j in 0..self.dim() {
                let _ = write!(s, ",{:.16e}", self.columns[(i, j)]);
            }
            s.push('\n');
        }
        s
    }
}

fn dense(m: &CsrMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from(m)
}

/// `Q` with `QᵀMQ = I` spanning the columns of `a`.
fn m_orthonormalize(a: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let g = a.transpose() * m * a;
    let g = 0.5 * (&g + g.transpose());
    let eig = g.symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > RANK_TOL * RANK_TOL * max && eig.eigenvalues[i] > 0.0)
        .collect();
    let mut q = DMatrix::zeros(a.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        q.set_column(k, &(a * eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt()));
    }
    q
}

/// Right null space of `a`, via a full SVD of `a` padded to at least as
/// many rows as columns.
fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let padded = if m < n { a.clone().resize(n, n, 0.0) } else { a.clone() };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= RANK_TOL * smax)
        .collect();
    let mut out = DMatrix::zeros(n, null.len());
    for (k, &i) in null.iter().enumerate() {
        out.set_column(k, &v_t.row(i).transpose());
    }
    out
}

/// `M1`-orthonormal basis of the discrete harmonic 1-forms
/// `{x : D1 x = 0, D0ᵀ M1 x = 0}`.
pub fn harmonic_basis(complex: &DeRhamComplex, degree: Degree) -> Result<SubspaceBasis> {
    if degree != Degree::One {
        return Err(Error::InvalidDegree(degree.index()));
    }
    let m1 = dense(complex.mass(Degree::One));
    let d0 = dense(complex.d0());
    let div = dense(complex.mass(Degree::Two)) * dense(complex.d1());
    let coexact = d0.transpose() * &m1;
    let (nt, nv, ne) = (div.nrows(), coexact.nrows(), m1.nrows());
    let mut stacked = DMatrix::zeros(nt + nv, ne);
    stacked.view_mut((0, 0), (nt, ne)).copy_from(&div);
    stacked.view_mut((nt, 0), (nv, ne)).copy_from(&coexact);
    let null = null_space(&stacked);
    SubspaceBasis::build(Degree::One, null, m1, Some(complex.tag()))
}

/// `M1`-orthonormal basis of the exact forms `range(D0)`.
pub fn exact_basis(complex: &DeRhamComplex) -> SubspaceBasis {
    let m1 = dense(complex.mass(Degree::One));
    let d0 = dense(complex.d0());
    let k = d0.transpose() * &m1 * &d0;
    let eig = (0.5 * (&k + k.transpose())).symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > RANK_TOL * max).collect();
    let mut q = DMatrix::zeros(m1.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        // ‖D0 v‖²_M1 = λ for a unit eigenvector v
        q.set_column(c, &(&d0 * eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt()));
    }
    SubspaceBasis { degree: Degree::One, columns: q, mass: m1, tag: Some(complex.tag()) }
}

/// The three components of a 1-form.
#[derive(Debug, Clone)]
pub struct HodgeDecomposition {
    /// Exact part, in `range(D0)`.
    pub exact: FeFunction,
    pub harmonic: FeFunction,
    /// Remainder, `M1`-orthogonal to `ker(D1)`.
    pub coexact: FeFunction,
}

/// `x = b + h + z` with `b` exact, `h` harmonic and `z ⊥ ker D1`.
pub fn hodge_decompose(x: &FeFunction, complex: &DeRhamComplex) -> Result<HodgeDecomposition> {
    if x.tag() != complex.tag() {
        return Err(Error::MeshMismatch);
    }
    if x.degree() != Degree::One {
        return Err(Error::FieldMismatch(x.degree().index()));
    }
    let b = exact_basis(complex).project(x.coeffs());
    let h = harmonic_basis(complex, Degree::One)?.project(x.coeffs());
    let z = x.coeffs() - &b - &h;
    Ok(HodgeDecomposition { exact: x.with_coeffs(b)?, harmonic: x.with_coeffs(h)?, coexact: x.with_coeffs(z)? })
}

fn check_comparable(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<()> {
    if a.degree != b.degree || a.mass.shape() != b.mass.shape() || a.tag != b.tag {
        return Err(Error::DimensionMismatch("subspaces live in different spaces".into()));
    }
    Ok(())
}

/// `sup_{x ∈ A, ‖x‖ = 1} ‖x - P_B x‖`.
pub fn directed_gap(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<f64> {
    check_comparable(a, b)?;
    if a.dim() == 0 {
        return Ok(0.0);
    }
    if b.dim() == 0 {
        return Ok(1.0);
    }
    // residuals of the basis of A after projection onto B; forming them
    // explicitly keeps small gaps accurate
    let r = &a.columns - b.project_matrix(&a.columns);
    let rtr = r.transpose() * &a.mass * &r;
    let lmax = (0.5 * (&rtr + rtr.transpose())).symmetric_eigen().eigenvalues.max();
    Ok(lmax.clamp(0.0, 1.0).sqrt())
}

/// The gap `δ(A, B)` between subspaces of equal dimension.
pub fn subspace_gap(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<f64> {
    check_comparable(a, b)?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("gap between subspaces of dimension {} and {}", a.dim(), b.dim())));
    }
    directed_gap(a, b)
}

/// The extremal constant of `‖v‖_V ≤ c_P ‖d v‖` on the complement of the
/// kernel, where `‖v‖_V² = ‖v‖² + ‖dv‖²`.
#[derive(Debug, Clone)]
pub struct PoincareConstant {
    pub constant: f64,
    /// Smallest nonzero eigenvalue of `Dᵀ M_{k+1} D x = λ M_k x`.
    pub lambda_min: f64,
    /// An eigenvector attaining `λ_min`, `M_k`-normalized.
    pub extremal: FeFunction,
}

pub fn poincare_constant(complex: &DeRhamComplex, degree: Degree) -> Result<PoincareConstant> {
    let (d, next) = match degree {
        Degree::Zero => (dense(complex.d0()), Degree::One),
        Degree::One => (dense(complex.d1()), Degree::Two),
        Degree::Two => return Err(Error::InvalidDegree(2)),
    };
    let m = dense(complex.mass(degree));
    let k = d.transpose() * dense(complex.mass(next)) * &d;
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Factorization("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Factorization("singular Cholesky factor".into()))?;
    let c = &linv * k * linv.transpose();
    let eig = (0.5 * (&c + c.transpose())).symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let (i, lambda_min) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > RANK_TOL * max)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &l)| (i, l))
        .ok_or_else(|| Error::InsufficientData("the exterior derivative vanishes".into()))?;
    let x = linv.transpose() * eig.eigenvectors.column(i);
    Ok(PoincareConstant {
        constant: (1.0 + 1.0 / lambda_min).sqrt(),
        lambda_min,
        extremal: complex.function(degree, x)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_toy_gap() {
        let mass = DMatrix::identity(2, 2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = SubspaceBasis::new(Degree::One, DMatrix::from_column_slice(2, 1, &[s, s]), mass.clone()).unwrap();
        let b = SubspaceBasis::new(Degree::One, DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), mass.clone()).unwrap();
        assert!((subspace_gap(&a, &b).unwrap() - s).abs() < 1e-15);
        assert!(subspace_gap(&a, &a).unwrap() < 1e-14);
        let c = SubspaceBasis::new(Degree::One, DMatrix::from_column_slice(2, 1, &[0.0, 3.0]), mass.clone()).unwrap();
        assert!((subspace_gap(&b, &c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unequal_dimensions_are_rejected() {
        let mass = DMatrix::identity(3, 3);
        let a = SubspaceBasis::new(Degree::One, DMatrix::identity(3, 1), mass.clone()).unwrap();
        let b = SubspaceBasis::new(Degree::One, DMatrix::identity(3, 2), mass).unwrap();
        assert!(matches!(subspace_gap(&a, &b), Err(Error::DimensionMismatch(_))));
        assert_eq!(directed_gap(&a, &b).unwrap(), 0.0);
        assert!((directed_gap(&b, &a).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dependent_columns_are_dropped() {
        let mass = DMatrix::identity(3, 3);
        let cols = DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        let a = SubspaceBasis::new(Degree::One, cols, mass).unwrap();
        assert_eq!(a.dim(), 1);
        assert!((a.gram() - DMatrix::identity(1, 1)).amax() < 1e-14);
    }
}
