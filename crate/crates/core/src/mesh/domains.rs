use std::fmt;
use std::str::FromStr;

use super::Mesh;
use crate::{Error, Point, Result};

/// Built-in coarse meshes of the benchmark domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `[0,1]^2`, two triangles.
    Square,
    /// `[-1,1]^2 \ [0,1]x[-1,0]`, six triangles, reentrant corner at the origin.
    LShape,
    /// `[0,3]^2 \ [1,2]^2`.
    SquareOneHole,
    /// `[0,5]x[0,3] \ ([1,2]^2 ∪ [3,4]x[1,2])`.
    SquareTwoHoles,
}

impl Domain {
    pub const ALL: [Domain; 4] = [Domain::Square, Domain::LShape, Domain::SquareOneHole, Domain::SquareTwoHoles];

    pub fn name(&self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::LShape => "lshape",
            Domain::SquareOneHole => "square_one_hole",
            Domain::SquareTwoHoles => "square_two_holes",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownDomain(s.to_string()))
    }
}

pub fn builtin_domain(domain: Domain) -> Result<Mesh> {
    match domain {
        Domain::Square => grid_with_holes(1, 1, &[]),
        Domain::LShape => {
            let vertices = vec![
                [-1.0, -1.0],
                [0.0, -1.0],
                [0.0, 0.0],
                [1.0, 0.0],
                [1.0, 1.0],
                [0.0, 1.0],
                [-1.0, 1.0],
                [-1.0, 0.0],
            ];
            // every diagonal passes through the reentrant corner
            let triangles = vec![[0, 1, 2], [0, 2, 7], [7, 2, 6], [2, 5, 6], [2, 3, 4], [2, 4, 5]];
            Mesh::new(vertices, triangles)
        }
        Domain::SquareOneHole => grid_with_holes(3, 3, &[(1, 1)]),
        Domain::SquareTwoHoles => grid_with_holes(5, 3, &[(1, 1), (3, 1)]),
    }
}

/// Unit squares `[i,i+1]x[j,j+1]` of an `nx` by `ny` grid, minus `holes`,
/// each split along its `/` diagonal.
fn grid_with_holes(nx: usize, ny: usize, holes: &[(usize, usize)]) -> Result<Mesh> {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let vertices: Vec<Point> = (0..=ny)
        .flat_map(|j| (0..=nx).map(move |i| [i as f64, j as f64]))
        .collect();
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if holes.contains(&(i, j)) {
                continue;
            }
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(vertices, triangles)
}
