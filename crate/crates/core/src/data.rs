//! Right-hand sides and analytic reference fields.

use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::mesh::Mesh;
use crate::{Error, Point, Result};

/// A scalar field that can be sampled at quadrature points.
pub trait ScalarField: Sync {
    fn eval(&self, p: Point) -> f64;
}

/// A vector field that can be sampled at quadrature points.
pub trait VectorField: Sync {
    fn eval(&self, p: Point) -> [f64; 2];
}

impl<F: Fn(Point) -> f64 + Sync> ScalarField for F {
    fn eval(&self, p: Point) -> f64 {
        self(p)
    }
}

impl<F: Fn(Point) -> [f64; 2] + Sync> VectorField for F {
    fn eval(&self, p: Point) -> [f64; 2] {
        self(p)
    }
}

/// Data functions selectable by name, plus tabulated and piecewise-constant
/// data.
#[derive(Debug, Clone)]
pub enum DataFunction {
    /// `f = 1`.
    Const1,
    /// `f = 2π² sin(πx) sin(πy)`, the load of `u = sin(πx) sin(πy)`.
    SinSin,
    /// `f = x`.
    LineX,
    /// `f = sign(x - 1/2)`, zero on the line itself.
    SignStep,
    Tabulated(Arc<TabulatedGrid>),
    PiecewiseConstant(Arc<PiecewiseConstant>),
}

impl DataFunction {
    pub const BUILTIN: [&'static str; 4] = ["const1", "sinsin", "linex", "signstep"];

    pub fn name(&self) -> &'static str {
        match self {
            DataFunction::Const1 => "const1",
            DataFunction::SinSin => "sinsin",
            DataFunction::LineX => "linex",
            DataFunction::SignStep => "signstep",
            DataFunction::Tabulated(_) => "tabulated",
            DataFunction::PiecewiseConstant(_) => "piecewise_constant",
        }
    }

    /// Loads a tabulated grid from a JSON file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let grid: TabulatedGrid = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        grid.validate()?;
        Ok(DataFunction::Tabulated(Arc::new(grid)))
    }
}

impl FromStr for DataFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "const1" => Ok(DataFunction::Const1),
            "sinsin" => Ok(DataFunction::SinSin),
            "linex" => Ok(DataFunction::LineX),
            "signstep" => Ok(DataFunction::SignStep),
            _ => Err(Error::InvalidParameter(format!(
                "unknown data function `{s}` (expected one of {})",
                DataFunction::BUILTIN.join(", ")
            ))),
        }
    }
}

impl ScalarField for DataFunction {
    fn eval(&self, p: Point) -> f64 {
        match self {
            DataFunction::Const1 => 1.0,
            DataFunction::SinSin => 2.0 * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin(),
            DataFunction::LineX => p[0],
            DataFunction::SignStep => {
                let s = p[0] - 0.5;
                if s > 0.0 {
                    1.0
                } else if s < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            DataFunction::Tabulated(g) => g.eval(p),
            DataFunction::PiecewiseConstant(c) => c.eval(p),
        }
    }
}

/// The scalar potential `sin(πx) sin(πy)` of the `sinsin` data.
pub fn sinsin_potential(p: Point) -> f64 {
    (PI * p[0]).sin() * (PI * p[1]).sin()
}

/// The flux `σ = -∇u` of the `sinsin` data.
pub fn sinsin_flux(p: Point) -> [f64; 2] {
    let (sx, cx) = (PI * p[0]).sin_cos();
    let (sy, cy) = (PI * p[1]).sin_cos();
    [-PI * cx * sy, -PI * sx * cy]
}

/// Samples on a tensor grid, interpolated bilinearly and clamped outside.
///
/// JSON layout: `{ "x": [..], "y": [..], "values": [[..]; y.len()] }` where
/// `values[j][i]` is the sample at `(x[i], y[j])`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabulatedGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl TabulatedGrid {
    pub fn validate(&self) -> Result<()> {
        let increasing = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.x) || !increasing(&self.y) {
            return Err(Error::InvalidParameter("grid axes need at least 2 increasing samples".into()));
        }
        if self.values.len() != self.y.len() || self.values.iter().any(|r| r.len() != self.x.len()) {
            return Err(Error::DimensionMismatch("grid values do not match the axes".into()));
        }
        Ok(())
    }

    fn eval(&self, p: Point) -> f64 {
        let (i, s) = locate(&self.x, p[0]);
        let (j, t) = locate(&self.y, p[1]);
        let v = &self.values;
        (1.0 - t) * ((1.0 - s) * v[j][i] + s * v[j][i + 1]) + t * ((1.0 - s) * v[j + 1][i] + s * v[j + 1][i + 1])
    }
}

fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    let n = axis.len();
    let i = axis.partition_point(|&a| a <= x).clamp(1, n - 1) - 1;
    let s = ((x - axis[i]) / (axis[i + 1] - axis[i])).clamp(0.0, 1.0);
    (i, s)
}

/// Element values on a fixed mesh, evaluated by point location.
///
/// Points on shared edges resolve to the lowest-indexed containing
/// triangle; quadrature points of any refinement are interior, so the value
/// is unambiguous there.
#[derive(Debug, Clone)]
pub struct PiecewiseConstant {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
    buckets: Vec<Vec<usize>>,
    origin: Point,
    cell: [f64; 2],
    dims: [usize; 2],
}

impl PiecewiseConstant {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_triangles() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} triangles",
                values.len(),
                mesh.num_triangles()
            )));
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let side = (mesh.num_triangles() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = [side, side];
        let cell = [(hi[0] - lo[0]) / side as f64, (hi[1] - lo[1]) / side as f64];
        let mut buckets = vec![Vec::new(); side * side];
        for t in 0..mesh.num_triangles() {
            let v = mesh.triangle_vertices(t);
            let bx = v.map(|p| p[0]);
            let by = v.map(|p| p[1]);
            let (i0, i1) = bucket_range(bx, lo[0], cell[0], side);
            let (j0, j1) = bucket_range(by, lo[1], cell[1], side);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * side + i].push(t);
                }
            }
        }
        Ok(PiecewiseConstant { mesh, values, buckets, origin: lo, cell, dims })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Triangle containing `p`, or the nearest one if `p` is outside.
    pub fn locate(&self, p: Point) -> usize {
        let idx = |d: usize| (((p[d] - self.origin[d]) / self.cell[d]).floor().max(0.0) as usize).min(self.dims[d] - 1);
        let bucket = &self.buckets[idx(1) * self.dims[0] + idx(0)];
        let mut best = (f64::NEG_INFINITY, 0);
        for &t in bucket {
            let m = min_barycentric(&self.mesh.triangle_vertices(t), p);
            if m >= -1e-12 {
                return t;
            }
            if m > best.0 {
                best = (m, t);
            }
        }
        for t in 0..self.mesh.num_triangles() {
            let m = min_barycentric(&self.mesh.triangle_vertices(t), p);
            if m > best.0 {
                best = (m, t);
            }
        }
        best.1
    }

    fn eval(&self, p: Point) -> f64 {
        self.values[self.locate(p)]
    }
}

fn bucket_range(coords: [f64; 3], lo: f64, cell: f64, n: usize) -> (usize, usize) {
    let min = coords.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let to = |x: f64| (((x - lo) / cell).floor().max(0.0) as usize).min(n - 1);
    (to(min - 1e-12 * cell), to(max + 1e-12 * cell))
}

fn min_barycentric(v: &[Point; 3], p: Point) -> f64 {
    let area = crate::mesh::signed_area(v[0], v[1], v[2]);
    let l0 = crate::mesh::signed_area(p, v[1], v[2]) / area;
    let l1 = crate::mesh::signed_area(v[0], p, v[2]) / area;
    l0.min(l1).min(1.0 - l0 - l1)
}
