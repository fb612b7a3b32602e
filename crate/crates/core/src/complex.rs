//! The lowest-order discrete de Rham complex on a triangulation, in the
//! `H(div)` proxy: `P1 --curl--> RT0 --div--> P0`.
//!
//! Degree-1 dofs are normal fluxes across edges, measured with the global
//! normal `n_e = (t_y, -t_x)` where `t` is the unit tangent from the lower to
//! the higher vertex index. Degree-2 dofs are element mean values. With these
//! choices `D0` is the signed vertex-edge incidence and `D1` is the signed
//! edge-triangle incidence scaled by `1/|T|`.

use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rayon::prelude::*;

use crate::ldl::{LdlFactor, LdlOptions, SymmetricCsc};
use crate::mesh::{Mesh, MeshTag};
use crate::quadrature::{segment_points, triangle_points};
use crate::{Error, Point, Result, ScalarField, VectorField};

/// Form degree of a discrete space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Degree {
    /// Continuous piecewise linears on vertices.
    Zero,
    /// Lowest-order Raviart-Thomas fluxes on edges.
    One,
    /// Piecewise constants on triangles.
    Two,
}

impl Degree {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl TryFrom<usize> for Degree {
    type Error = Error;

    fn try_from(k: usize) -> Result<Self> {
        match k {
            0 => Ok(Degree::Zero),
            1 => Ok(Degree::One),
            2 => Ok(Degree::Two),
            _ => Err(Error::InvalidDegree(k)),
        }
    }
}

/// Coefficients of a discrete form, tagged with its degree and mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    degree: Degree,
    coeffs: DVector<f64>,
    tag: MeshTag,
}

impl FeFunction {
    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> DVector<f64> {
        self.coeffs
    }

    pub fn tag(&self) -> MeshTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Same space, new coefficients.
    pub fn with_coeffs(&self, coeffs: DVector<f64>) -> Result<FeFunction> {
        if coeffs.len() != self.coeffs.len() {
            return Err(Error::DimensionMismatch(format!("{} coefficients for {} dofs", coeffs.len(), self.len())));
        }
        Ok(FeFunction { degree: self.degree, coeffs, tag: self.tag })
    }

    pub fn sub(&self, other: &FeFunction) -> Result<FeFunction> {
        self.check_same_space(other)?;
        Ok(FeFunction { degree: self.degree, coeffs: &self.coeffs - &other.coeffs, tag: self.tag })
    }

    pub fn add(&self, other: &FeFunction) -> Result<FeFunction> {
        self.check_same_space(other)?;
        Ok(FeFunction { degree: self.degree, coeffs: &self.coeffs + &other.coeffs, tag: self.tag })
    }

    pub fn scale(&self, a: f64) -> FeFunction {
        FeFunction { degree: self.degree, coeffs: &self.coeffs * a, tag: self.tag }
    }

    fn check_same_space(&self, other: &FeFunction) -> Result<()> {
        if self.tag != other.tag {
            return Err(Error::MeshMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::FieldMismatch(other.degree.index()));
        }
        Ok(())
    }
}

/// A field to be projected: scalar for degrees 0 and 2, vector for degree 1.
#[derive(Clone, Copy)]
pub enum Field<'a> {
    Scalar(&'a dyn ScalarField),
    Vector(&'a dyn VectorField),
}

/// Spaces, exterior derivatives and mass matrices on one mesh.
pub struct DeRhamComplex {
    mesh: Arc<Mesh>,
    /// `edge_sign[t][j]` is `+1` when local edge `j` of `t` runs from low to
    /// high vertex index in the counterclockwise traversal.
    edge_sign: Vec<[f64; 3]>,
    d0: CsrMatrix<f64>,
    d1: CsrMatrix<f64>,
    m0: CsrMatrix<f64>,
    m1: CsrMatrix<f64>,
    m2: CsrMatrix<f64>,
    m0_factor: OnceLock<LdlFactor>,
    m1_factor: OnceLock<LdlFactor>,
}

impl std::fmt::Debug for DeRhamComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeRhamComplex")
            .field("tag", &self.mesh.tag())
            .field("dofs", &[self.num_dofs(Degree::Zero), self.num_dofs(Degree::One), self.num_dofs(Degree::Two)])
            .finish()
    }
}

impl DeRhamComplex {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        let (nv, ne, nt) = (mesh.num_vertices(), mesh.num_edges(), mesh.num_triangles());
        let edge_sign: Vec<[f64; 3]> = mesh
            .triangles()
            .iter()
            .map(|tri| std::array::from_fn(|j| if tri[(j + 1) % 3] < tri[(j + 2) % 3] { 1.0 } else { -1.0 }))
            .collect();

        let mut d0 = CooMatrix::new(ne, nv);
        for (e, &[lo, hi]) in mesh.edges().iter().enumerate() {
            d0.push(e, lo, -1.0);
            d0.push(e, hi, 1.0);
        }

        let local: Vec<([[f64; 3]; 3], [[f64; 3]; 3], f64)> = (0..nt)
            .into_par_iter()
            .map(|t| {
                let v = mesh.triangle_vertices(t);
                let area = mesh.area(t);
                (p1_local_mass(area), rt0_local_mass(&v, area, &edge_sign[t]), area)
            })
            .collect();

        let mut d1 = CooMatrix::new(nt, ne);
        let mut m0 = CooMatrix::new(nv, nv);
        let mut m1 = CooMatrix::new(ne, ne);
        let mut m2 = CooMatrix::new(nt, nt);
        for (t, (lm0, lm1, area)) in local.iter().enumerate() {
            let tri = mesh.triangles()[t];
            let edges = mesh.triangle_edges(t);
            for i in 0..3 {
                d1.push(t, edges[i], edge_sign[t][i] / area);
                for j in 0..3 {
                    m0.push(tri[i], tri[j], lm0[i][j]);
                    m1.push(edges[i], edges[j], lm1[i][j]);
                }
            }
            m2.push(t, t, *area);
        }

        DeRhamComplex {
            mesh,
            edge_sign,
            d0: CsrMatrix::from(&d0),
            d1: CsrMatrix::from(&d1),
            m0: CsrMatrix::from(&m0),
            m1: CsrMatrix::from(&m1),
            m2: CsrMatrix::from(&m2),
            m0_factor: OnceLock::new(),
            m1_factor: OnceLock::new(),
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn tag(&self) -> MeshTag {
        self.mesh.tag()
    }

    pub fn num_dofs(&self, degree: Degree) -> usize {
        match degree {
            Degree::Zero => self.mesh.num_vertices(),
            Degree::One => self.mesh.num_edges(),
            Degree::Two => self.mesh.num_triangles(),
        }
    }

    /// Discrete `d⁰` (rotated gradient), edges × vertices.
    pub fn d0(&self) -> &CsrMatrix<f64> {
        &self.d0
    }

    /// Discrete `d¹` (divergence), triangles × edges.
    pub fn d1(&self) -> &CsrMatrix<f64> {
        &self.d1
    }

    pub fn mass(&self, degree: Degree) -> &CsrMatrix<f64> {
        match degree {
            Degree::Zero => &self.m0,
            Degree::One => &self.m1,
            Degree::Two => &self.m2,
        }
    }

    /// Sign relating local edge `j` of `t` to the global edge orientation.
    pub fn edge_sign(&self, t: usize, j: usize) -> f64 {
        self.edge_sign[t][j]
    }

    pub fn function(&self, degree: Degree, coeffs: DVector<f64>) -> Result<FeFunction> {
        if coeffs.len() != self.num_dofs(degree) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} dofs of degree {}",
                coeffs.len(),
                self.num_dofs(degree),
                degree.index()
            )));
        }
        Ok(FeFunction { degree, coeffs, tag: self.tag() })
    }

    pub fn zero(&self, degree: Degree) -> FeFunction {
        FeFunction { degree, coeffs: DVector::zeros(self.num_dofs(degree)), tag: self.tag() }
    }

    fn check(&self, f: &FeFunction) -> Result<()> {
        if f.tag != self.tag() {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    /// `d f`: degree 0 to 1, or 1 to 2.
    pub fn apply_d(&self, f: &FeFunction) -> Result<FeFunction> {
        self.check(f)?;
        let (m, degree) = match f.degree {
            Degree::Zero => (&self.d0, Degree::One),
            Degree::One => (&self.d1, Degree::Two),
            Degree::Two => return Err(Error::InvalidDegree(2)),
        };
        Ok(FeFunction { degree, coeffs: spmv(m, &f.coeffs), tag: f.tag })
    }

    /// `⟨a, b⟩` in the mass matrix of their degree.
    pub fn inner(&self, a: &FeFunction, b: &FeFunction) -> Result<f64> {
        self.check(a)?;
        a.check_same_space(b)?;
        Ok(spmv(self.mass(a.degree), &a.coeffs).dot(&b.coeffs))
    }

    pub fn norm(&self, f: &FeFunction) -> Result<f64> {
        Ok(self.inner(f, f)?.max(0.0).sqrt())
    }

    /// Value of a scalar form (degree 0 or 2) at a point of triangle `t`.
    pub fn eval_scalar(&self, f: &FeFunction, t: usize, p: Point) -> Result<f64> {
        self.check(f)?;
        match f.degree {
            Degree::Two => Ok(f.coeffs[t]),
            Degree::Zero => {
                let v = self.mesh.triangle_vertices(t);
                let lam = barycentric(&v, p);
                let tri = self.mesh.triangles()[t];
                Ok((0..3).map(|i| lam[i] * f.coeffs[tri[i]]).sum())
            }
            Degree::One => Err(Error::FieldMismatch(1)),
        }
    }

    /// Value of a degree-1 form (vector proxy) at a point of triangle `t`.
    pub fn eval_vector(&self, f: &FeFunction, t: usize, p: Point) -> Result<[f64; 2]> {
        self.check(f)?;
        if f.degree != Degree::One {
            return Err(Error::FieldMismatch(f.degree.index()));
        }
        Ok(self.rt0_value(f.coeffs.as_slice(), t, p))
    }

    pub(crate) fn rt0_value(&self, c: &[f64], t: usize, p: Point) -> [f64; 2] {
        let v = self.mesh.triangle_vertices(t);
        let edges = self.mesh.triangle_edges(t);
        let scale = 0.5 / self.mesh.area(t);
        let mut out = [0.0; 2];
        for j in 0..3 {
            let a = self.edge_sign[t][j] * c[edges[j]] * scale;
            out[0] += a * (p[0] - v[j][0]);
            out[1] += a * (p[1] - v[j][1]);
        }
        out
    }

    /// Elementwise divergence of a degree-1 form.
    pub fn div_on(&self, f: &FeFunction, t: usize) -> f64 {
        let edges = self.mesh.triangle_edges(t);
        (0..3).map(|j| self.edge_sign[t][j] * f.coeffs[edges[j]]).sum::<f64>() / self.mesh.area(t)
    }

    /// Elementwise rot `∂x v₂ - ∂y v₁` of a degree-1 form, from the
    /// Jacobian of its affine restriction.
    pub fn rot_on(&self, f: &FeFunction, t: usize) -> f64 {
        let edges = self.mesh.triangle_edges(t);
        let scale = 0.5 / self.mesh.area(t);
        // each basis function (x - p_j) / (2|T|) has Jacobian I / (2|T|)
        let mut jac = [[0.0; 2]; 2];
        for j in 0..3 {
            let a = self.edge_sign[t][j] * f.coeffs[edges[j]] * scale;
            jac[0][0] += a;
            jac[1][1] += a;
        }
        jac[1][0] - jac[0][1]
    }

    /// `L²` projection onto the space of the given degree.
    pub fn l2_project(&self, field: Field<'_>, degree: Degree) -> Result<FeFunction> {
        match (degree, field) {
            (Degree::Two, Field::Scalar(f)) => Ok(self.project_top(f)),
            (Degree::Zero, Field::Scalar(f)) => {
                let nt = self.mesh.num_triangles();
                let local: Vec<[f64; 3]> = (0..nt)
                    .into_par_iter()
                    .map(|t| {
                        let v = self.mesh.triangle_vertices(t);
                        let mut b = [0.0; 3];
                        for (p, w) in triangle_points(&v, self.mesh.area(t)) {
                            let fp = f.eval(p);
                            let lam = barycentric(&v, p);
                            for i in 0..3 {
                                b[i] += w * fp * lam[i];
                            }
                        }
                        b
                    })
                    .collect();
                let mut rhs = vec![0.0; self.mesh.num_vertices()];
                for (t, b) in local.iter().enumerate() {
                    for (i, &vtx) in self.mesh.triangles()[t].iter().enumerate() {
                        rhs[vtx] += b[i];
                    }
                }
                let x = self.mass_factor(Degree::Zero)?.solve(&rhs);
                self.function(Degree::Zero, DVector::from_vec(x))
            }
            (Degree::One, Field::Vector(f)) => {
                let rhs = self.rt0_load(f);
                let x = self.mass_factor(Degree::One)?.solve(&rhs);
                self.function(Degree::One, DVector::from_vec(x))
            }
            (d, _) => Err(Error::FieldMismatch(d.index())),
        }
    }

    /// Element means of `f`, the projection onto degree 2.
    pub fn project_top(&self, f: &dyn ScalarField) -> FeFunction {
        let coeffs: Vec<f64> = (0..self.mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                let area = self.mesh.area(t);
                let s: f64 = triangle_points(&self.mesh.triangle_vertices(t), area)
                    .iter()
                    .map(|&(p, w)| w * f.eval(p))
                    .sum();
                s / area
            })
            .collect();
        FeFunction { degree: Degree::Two, coeffs: DVector::from_vec(coeffs), tag: self.tag() }
    }

    /// `b_e = ∫ v·φ_e`.
    fn rt0_load(&self, f: &dyn VectorField) -> Vec<f64> {
        let local: Vec<[f64; 3]> = (0..self.mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                let v = self.mesh.triangle_vertices(t);
                let area = self.mesh.area(t);
                let mut b = [0.0; 3];
                for (p, w) in triangle_points(&v, area) {
                    let fp = f.eval(p);
                    for j in 0..3 {
                        let phi = [(p[0] - v[j][0]) / (2.0 * area), (p[1] - v[j][1]) / (2.0 * area)];
                        b[j] += w * self.edge_sign[t][j] * (fp[0] * phi[0] + fp[1] * phi[1]);
                    }
                }
                b
            })
            .collect();
        let mut rhs = vec![0.0; self.mesh.num_edges()];
        for (t, b) in local.iter().enumerate() {
            for (j, &e) in self.mesh.triangle_edges(t).iter().enumerate() {
                rhs[e] += b[j];
            }
        }
        rhs
    }

    fn mass_factor(&self, degree: Degree) -> Result<&LdlFactor> {
        let cell = match degree {
            Degree::Zero => &self.m0_factor,
            Degree::One => &self.m1_factor,
            Degree::Two => return Err(Error::InvalidDegree(2)),
        };
        if let Some(f) = cell.get() {
            return Ok(f);
        }
        let m = self.mass(degree);
        let a = SymmetricCsc::from_triplets(m.nrows(), m.triplet_iter().map(|(i, j, v)| (i, j, *v)).filter(|t| t.0 <= t.1))?;
        let f = LdlFactor::new(&a, &LdlOptions::default())?;
        if f.positive_pivots() != m.nrows() {
            return Err(Error::Factorization("mass matrix is not positive definite".into()));
        }
        Ok(cell.get_or_init(|| f))
    }

    /// Canonical RT0 interpolant: `dof_e = ∫_e v·n_e ds`.
    pub fn canonical_interp_rt(&self, f: &dyn VectorField) -> FeFunction {
        let coeffs: Vec<f64> = self
            .mesh
            .edges()
            .par_iter()
            .map(|&[lo, hi]| {
                let (a, b) = (self.mesh.vertices()[lo], self.mesh.vertices()[hi]);
                let len = crate::mesh::dist(a, b);
                let n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                segment_points(a, b)
                    .iter()
                    .map(|&(p, w)| {
                        let v = f.eval(p);
                        w * (v[0] * n[0] + v[1] * n[1])
                    })
                    .sum()
            })
            .collect();
        FeFunction { degree: Degree::One, coeffs: DVector::from_vec(coeffs), tag: self.tag() }
    }

    /// Coarse-mesh canonical interpolant of a fine degree-2 form: the
    /// area-weighted mean over each coarse element's descendants.
    pub fn canonical_interp_top(&self, f: &FeFunction, fine: &DeRhamComplex) -> Result<FeFunction> {
        fine.check(f)?;
        if f.degree != Degree::Two {
            return Err(Error::FieldMismatch(f.degree.index()));
        }
        let parents = Mesh::ancestor_map(&self.mesh, &fine.mesh)?;
        let mut sums = vec![0.0; self.mesh.num_triangles()];
        for (t, &p) in parents.iter().enumerate() {
            sums[p] += fine.mesh.area(t) * f.coeffs[t];
        }
        for (t, s) in sums.iter_mut().enumerate() {
            *s /= self.mesh.area(t);
        }
        self.function(Degree::Two, DVector::from_vec(sums))
    }

    /// Exact representation of a coarse form on this (finer) complex.
    pub fn prolong(&self, f: &FeFunction, coarse: &DeRhamComplex) -> Result<FeFunction> {
        coarse.check(f)?;
        if f.tag == self.tag() {
            return Ok(f.clone());
        }
        let parents = Mesh::ancestor_map(&coarse.mesh, &self.mesh)?;
        let coeffs = match f.degree {
            Degree::Two => parents.iter().map(|&p| f.coeffs[p]).collect(),
            Degree::One => {
                let mut c = vec![0.0; self.mesh.num_edges()];
                for (e, &[lo, hi]) in self.mesh.edges().iter().enumerate() {
                    let t = self.mesh.edge_triangles(e)[0].expect("every edge has a triangle");
                    let (a, b) = (self.mesh.vertices()[lo], self.mesh.vertices()[hi]);
                    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                    let v = coarse.rt0_value(f.coeffs.as_slice(), parents[t], mid);
                    // flux of an affine field: |e| v(mid)·n_e, with |e| n_e = (b - a) rotated
                    c[e] = v[0] * (b[1] - a[1]) - v[1] * (b[0] - a[0]);
                }
                c
            }
            Degree::Zero => {
                let mut c = vec![f64::NAN; self.mesh.num_vertices()];
                for (t, tri) in self.mesh.triangles().iter().enumerate() {
                    let pv = coarse.mesh.triangle_vertices(parents[t]);
                    let ptri = coarse.mesh.triangles()[parents[t]];
                    for &v in tri {
                        if c[v].is_nan() {
                            let lam = barycentric(&pv, self.mesh.vertices()[v]);
                            c[v] = (0..3).map(|i| lam[i] * f.coeffs[ptri[i]]).sum();
                        }
                    }
                }
                c
            }
        };
        self.function(f.degree, DVector::from_vec(coeffs))
    }

    /// `‖f_h - v‖` for a degree-1 form and a vector field, by quadrature.
    pub fn l2_distance_vector(&self, f: &FeFunction, v: &dyn VectorField) -> Result<f64> {
        self.check(f)?;
        if f.degree != Degree::One {
            return Err(Error::FieldMismatch(f.degree.index()));
        }
        let parts: Vec<f64> = (0..self.mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                triangle_points(&self.mesh.triangle_vertices(t), self.mesh.area(t))
                    .iter()
                    .map(|&(p, w)| {
                        let a = self.rt0_value(f.coeffs.as_slice(), t, p);
                        let b = v.eval(p);
                        w * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))
                    })
                    .sum()
            })
            .collect();
        Ok(parts.iter().sum::<f64>().sqrt())
    }

    /// `‖f_h - g‖` for a scalar form and a scalar field, by quadrature.
    pub fn l2_distance_scalar(&self, f: &FeFunction, g: &dyn ScalarField) -> Result<f64> {
        self.check(f)?;
        if f.degree == Degree::One {
            return Err(Error::FieldMismatch(1));
        }
        let parts: Vec<f64> = (0..self.mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                triangle_points(&self.mesh.triangle_vertices(t), self.mesh.area(t))
                    .iter()
                    .map(|&(p, w)| {
                        let a = self.eval_scalar(f, t, p).expect("checked above");
                        w * (a - g.eval(p)).powi(2)
                    })
                    .sum()
            })
            .collect();
        Ok(parts.iter().sum::<f64>().sqrt())
    }

    pub fn dense(&self, m: &CsrMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from(m)
    }
}

/// `y = A x`.
pub fn spmv(a: &CsrMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        a.nrows(),
        a.row_iter().map(|row| row.col_indices().iter().zip(row.values()).map(|(&j, v)| v * x[j]).sum()),
    )
}

/// Coordinate-format dump, one `row col value` line per stored entry.
pub fn export_coo(a: &CsrMatrix<f64>) -> String {
    let mut s = String::new();
    for (i, j, v) in a.triplet_iter() {
        let _ = writeln!(s, "{i} {j} {v:.17e}");
    }
    s
}

pub(crate) fn barycentric(v: &[Point; 3], p: Point) -> [f64; 3] {
    use crate::mesh::signed_area;
    let area = signed_area(v[0], v[1], v[2]);
    let l0 = signed_area(p, v[1], v[2]) / area;
    let l1 = signed_area(v[0], p, v[2]) / area;
    [l0, l1, 1.0 - l0 - l1]
}

fn p1_local_mass(area: f64) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { area / 6.0 } else { area / 12.0 }))
}

fn rt0_local_mass(v: &[Point; 3], area: f64, sign: &[f64; 3]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    let scale = 1.0 / (4.0 * area * area);
    for (p, w) in triangle_points(v, area) {
        let d: [Point; 3] = std::array::from_fn(|j| [p[0] - v[j][0], p[1] - v[j][1]]);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += w * scale * sign[i] * sign[j] * (d[i][0] * d[j][0] + d[i][1] * d[j][1]);
            }
        }
    }
    m
}
