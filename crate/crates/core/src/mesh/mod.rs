//! Conforming triangulations of planar polygonal domains with
//! newest-vertex bisection (NVB).
//!
//! Triangles are stored counterclockwise. Local edge `j` of a triangle is the
//! edge opposite its local vertex `j`, running from vertex `j+1` to `j+2`
//! (indices mod 3). The refinement edge of a triangle is such a local index;
//! its opposite vertex is the "newest vertex".
//!
//! Global edges are oriented from the lower to the higher vertex index.

mod domains;
mod io;
mod refine;

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

pub use domains::{builtin_domain, Domain};
pub use io::MeshFile;
pub use refine::{bisect, bisect_all, refine_uniform};

/// Maximum number of bisections separating a triangle from its root.
pub const MAX_DEPTH: usize = 127;

/// Position of a triangle in the binary bisection forest rooted at the
/// initial mesh: the root triangle, the number of bisections, and the
/// child choices (bit `i` is the choice made at depth `i + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lineage {
    pub root: u32,
    pub depth: u8,
    pub path: u128,
}

impl Lineage {
    pub fn root(index: usize) -> Self {
        Lineage { root: index as u32, depth: 0, path: 0 }
    }

    pub fn child(&self, which: u8) -> Result<Self> {
        if self.depth as usize >= MAX_DEPTH {
            return Err(Error::DepthLimit(MAX_DEPTH));
        }
        Ok(Lineage {
            root: self.root,
            depth: self.depth + 1,
            path: self.path | ((which as u128) << self.depth),
        })
    }

    /// Ancestor `depth` levels below the root.
    pub fn truncate(&self, depth: u8) -> Self {
        let mask = if depth == 0 { 0 } else { u128::MAX >> (128 - depth as u32) };
        Lineage { root: self.root, depth, path: self.path & mask }
    }

    pub fn is_descendant_of(&self, other: &Lineage) -> bool {
        self.root == other.root && self.depth >= other.depth && self.truncate(other.depth) == *other
    }
}

/// Identifies the mesh a discrete function or indicator set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshTag {
    pub root_id: u64,
    pub level: u32,
    pub cells: usize,
    pub vertices: usize,
}

/// A conforming, counterclockwise triangulation with NVB bookkeeping.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    edge_tris: Vec<[Option<usize>; 2]>,
    edge_lookup: HashMap<(usize, usize), usize>,
    lineage: Vec<Lineage>,
    level: u32,
    root_id: u64,
}

/// A set of triangles of one specific mesh, sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedSet {
    ids: Vec<usize>,
    tag: MeshTag,
}

impl MarkedSet {
    pub fn new(mesh: &Mesh, mut ids: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = ids.iter().find(|&&t| t >= mesh.num_triangles()) {
            return Err(Error::InvalidElement(bad));
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(MarkedSet { ids, tag: mesh.tag() })
    }

    pub fn empty(mesh: &Mesh) -> Self {
        MarkedSet { ids: Vec::new(), tag: mesh.tag() }
    }

    pub fn all(mesh: &Mesh) -> Self {
        MarkedSet { ids: (0..mesh.num_triangles()).collect(), tag: mesh.tag() }
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.ids.binary_search(&t).is_ok()
    }

    pub fn tag(&self) -> MeshTag {
        self.tag
    }
}

#[inline]
pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

#[inline]
pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

/// Relative tolerance for degenerate signed areas.
const AREA_TOL: f64 = 1e-12;

impl Mesh {
    /// Builds a mesh from raw data, assigning each refinement edge to the
    /// longest edge (ties go to the edge whose opposite vertex has the lowest
    /// index).
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        check_indices(&vertices, &triangles)?;
        let refinement_edge = triangles
            .iter()
            .map(|tri| longest_edge(&vertices, tri))
            .collect();
        Self::with_refinement_edges(vertices, triangles, refinement_edge)
    }

    /// Builds an initial mesh with prescribed refinement edges.
    pub fn with_refinement_edges(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        refinement_edge: Vec<u8>,
    ) -> Result<Self> {
        check_indices(&vertices, &triangles)?;
        if refinement_edge.len() != triangles.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} refinement edges for {} triangles",
                refinement_edge.len(),
                triangles.len()
            )));
        }
        let lineage = (0..triangles.len()).map(Lineage::root).collect();
        let root_id = fingerprint(&vertices, &triangles);
        Self::from_parts(vertices, triangles, refinement_edge, lineage, 0, root_id)
    }

    pub(crate) fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        refinement_edge: Vec<u8>,
        lineage: Vec<Lineage>,
        level: u32,
        root_id: u64,
    ) -> Result<Self> {
        for (t, &r) in refinement_edge.iter().enumerate() {
            if r > 2 {
                return Err(Error::InvalidRefinementEdge(t));
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|v| vertices[v]);
            let area = signed_area(a, b, c);
            let scale = dist(a, b).max(dist(b, c)).max(dist(c, a)).powi(2);
            if area.abs() <= AREA_TOL * scale {
                return Err(Error::DegenerateTriangle(t));
            }
            if area < 0.0 {
                return Err(Error::InvertedTriangle(t));
            }
        }
        let mut seen: HashMap<[usize; 3], usize> = HashMap::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut key = *tri;
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Err(Error::DuplicateTriangle(t, first));
            }
            seen.insert(key, t);
        }

        let mut edges = Vec::with_capacity(triangles.len() * 3 / 2 + 4);
        let mut edge_lookup = HashMap::with_capacity(triangles.len() * 3 / 2 + 4);
        let mut edge_tris: Vec<[Option<usize>; 2]> = Vec::with_capacity(edges.capacity());
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0; 3];
            for (j, slot) in local.iter_mut().enumerate() {
                let (a, b) = (tri[(j + 1) % 3], tri[(j + 2) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *edge_lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_tris.push([None, None]);
                    edges.len() - 1
                });
                match edge_tris[e] {
                    [None, _] => edge_tris[e][0] = Some(t),
                    [Some(other), None] => {
                        // the two triangles must traverse the shared edge in
                        // opposite directions
                        let o = triangles[other];
                        let same_direction = (0..3).any(|k| o[(k + 1) % 3] == a && o[(k + 2) % 3] == b);
                        if same_direction {
                            return Err(Error::NonConforming {
                                element: t,
                                reason: format!("overlaps triangle {other} along edge ({a}, {b})"),
                            });
                        }
                        edge_tris[e][1] = Some(t);
                    }
                    [Some(_), Some(_)] => {
                        return Err(Error::NonConforming {
                            element: t,
                            reason: format!("edge ({a}, {b}) shared by more than two triangles"),
                        })
                    }
                }
                *slot = e;
            }
            tri_edges.push(local);
        }

        let mesh = Mesh {
            vertices,
            triangles,
            refinement_edge,
            edges,
            tri_edges,
            edge_tris,
            edge_lookup,
            lineage,
            level,
            root_id,
        };
        mesh.check_hanging_vertices()?;
        Ok(mesh)
    }

    /// Rejects vertices lying strictly inside a boundary edge, which is how a
    /// hanging node shows up once edges are paired.
    fn check_hanging_vertices(&self) -> Result<()> {
        let mut by_x: Vec<usize> = (0..self.vertices.len()).collect();
        by_x.sort_by(|&a, &b| self.vertices[a][0].total_cmp(&self.vertices[b][0]));
        let xs: Vec<f64> = by_x.iter().map(|&v| self.vertices[v][0]).collect();
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            if self.edge_tris[e][1].is_some() {
                continue;
            }
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let len2 = (pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2);
            let tol = 1e-10 * len2.sqrt();
            let lo = xs.partition_point(|&x| x < pa[0].min(pb[0]) - tol);
            let hi = xs.partition_point(|&x| x <= pa[0].max(pb[0]) + tol);
            for &v in &by_x[lo..hi] {
                if v == a || v == b {
                    continue;
                }
                let p = self.vertices[v];
                let cross = (pb[0] - pa[0]) * (p[1] - pa[1]) - (pb[1] - pa[1]) * (p[0] - pa[0]);
                if cross.abs() > 1e-10 * len2 {
                    continue;
                }
                let s = ((p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1])) / len2;
                if s > 1e-10 && s < 1.0 - 1e-10 {
                    return Err(Error::NonConforming {
                        element: self.edge_tris[e][0].unwrap_or(0),
                        reason: format!("hanging vertex {v} on edge ({a}, {b})"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn refinement_edges(&self) -> &[u8] {
        &self.refinement_edge
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.edge_tris.iter().filter(|p| p[1].is_none()).count()
    }

    /// Global edge ids of a triangle, indexed by local edge.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    /// The one or two triangles sharing an edge.
    pub fn edge_triangles(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_tris[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e][1].is_none()
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// Global id of the refinement edge of triangle `t`.
    pub fn refinement_edge_id(&self, t: usize) -> usize {
        self.tri_edges[t][self.refinement_edge[t] as usize]
    }

    pub fn lineage(&self, t: usize) -> Lineage {
        self.lineage[t]
    }

    /// Number of bisections separating triangle `t` from its initial ancestor.
    pub fn generation(&self, t: usize) -> usize {
        self.lineage[t].depth as usize
    }

    /// Number of `bisect` calls since the initial mesh.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn tag(&self) -> MeshTag {
        MeshTag {
            root_id: self.root_id,
            level: self.level,
            cells: self.triangles.len(),
            vertices: self.vertices.len(),
        }
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        signed_area(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_vertices(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        dist(self.vertices[a], self.vertices[b])
    }

    /// Diameter `h_T` of triangle `t`, i.e. its longest edge.
    pub fn element_size(&self, t: usize) -> Result<f64> {
        if t >= self.triangles.len() {
            return Err(Error::InvalidElement(t));
        }
        Ok(self.diameter(t))
    }

    pub(crate) fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn inradius(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        2.0 * signed_area(a, b, c) / (dist(a, b) + dist(b, c) + dist(c, a))
    }

    /// Minimum over all elements of `inradius / h_T`.
    pub fn shape_regularity(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.inradius(t) / self.diameter(t))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Whether `self` and `other` descend from the same initial mesh.
    pub fn same_root(&self, other: &Mesh) -> bool {
        self.root_id == other.root_id
    }

    /// For every triangle of `fine`, the triangle of `coarse` containing it.
    /// Fails unless `fine` is a refinement of `coarse`.
    pub fn ancestor_map(coarse: &Mesh, fine: &Mesh) -> Result<Vec<usize>> {
        if !coarse.same_root(fine) {
            return Err(Error::NotNested);
        }
        let index: HashMap<Lineage, usize> =
            coarse.lineage.iter().enumerate().map(|(t, l)| (*l, t)).collect();
        fine.lineage
            .iter()
            .map(|l| {
                (0..=l.depth)
                    .rev()
                    .find_map(|d| index.get(&l.truncate(d)).copied())
                    .ok_or(Error::NotNested)
            })
            .collect()
    }

    /// Structural conformity check: edge pairing, orientation, no hanging
    /// vertices, valid refinement edges.
    pub fn check_conformity(&self) -> Result<()> {
        let rebuilt = Mesh::from_parts(
            self.vertices.clone(),
            self.triangles.clone(),
            self.refinement_edge.clone(),
            self.lineage.clone(),
            self.level,
            self.root_id,
        )?;
        for (e, tris) in rebuilt.edge_tris.iter().enumerate() {
            if tris[0].is_none() {
                return Err(Error::NonConforming { element: 0, reason: format!("orphan edge {e}") });
            }
        }
        Ok(())
    }
}

fn check_indices(vertices: &[Point], triangles: &[[usize; 3]]) -> Result<()> {
    if vertices.len() < 3 {
        return Err(Error::TooFewVertices(vertices.len()));
    }
    for (t, tri) in triangles.iter().enumerate() {
        if tri.iter().any(|&v| v >= vertices.len()) {
            return Err(Error::VertexOutOfRange(t));
        }
    }
    Ok(())
}

/// Local index of the longest edge; near-ties (1e-12 relative) go to the
/// edge whose opposite vertex has the lowest global index.
fn longest_edge(vertices: &[Point], tri: &[usize; 3]) -> u8 {
    let len = |j: usize| dist(vertices[tri[(j + 1) % 3]], vertices[tri[(j + 2) % 3]]);
    let lens = [len(0), len(1), len(2)];
    let max = lens.iter().cloned().fold(0.0, f64::max);
    (0..3)
        .filter(|&j| lens[j] >= max * (1.0 - 1e-12))
        .min_by_key(|&j| tri[j])
        .unwrap_or(0) as u8
}

fn fingerprint(vertices: &[Point], triangles: &[[usize; 3]]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for p in vertices {
        p[0].to_bits().hash(&mut h);
        p[1].to_bits().hash(&mut h);
    }
    triangles.hash(&mut h);
    h.finish()
}
