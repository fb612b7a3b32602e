//! JSON mesh files: `{ "vertices": [[x, y], ...], "triangles": [[i, j, k], ...],
//! "refinement_edge": [e, ...] }` with 0-based indices. A missing
//! `refinement_edge` triggers longest-edge initialisation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Mesh;
use crate::{Point, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_edge: Option<Vec<u8>>,
}

impl MeshFile {
    pub fn into_mesh(self) -> Result<Mesh> {
        match self.refinement_edge {
            Some(r) => Mesh::with_refinement_edges(self.vertices, self.triangles, r),
            None => Mesh::new(self.vertices, self.triangles),
        }
    }
}

impl From<&Mesh> for MeshFile {
    fn from(mesh: &Mesh) -> Self {
        MeshFile {
            vertices: mesh.vertices().to_vec(),
            triangles: mesh.triangles().to_vec(),
            refinement_edge: Some(mesh.refinement_edges().to_vec()),
        }
    }
}

impl Mesh {
    pub fn from_json(s: &str) -> Result<Mesh> {
        serde_json::from_str::<MeshFile>(s)?.into_mesh()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&MeshFile::from(self))?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Mesh> {
        Mesh::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
