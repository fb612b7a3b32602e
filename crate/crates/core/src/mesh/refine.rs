//! Newest-vertex bisection with conforming closure.
//!
//! Refinement works on edges: the refinement edge of every marked triangle is
//! marked, then the closure marks the refinement edge of any triangle that
//! owns a marked edge until nothing changes. Each triangle is then bisected
//! across its refinement edge, and each child is bisected again if its own
//! refinement edge (an edge of the parent) is marked. A triangle therefore
//! ends up with 1, 2, 3 or 4 descendants, and every marked edge is split in
//! every triangle sharing it, so the output is conforming.

use super::{Lineage, MarkedSet, Mesh};
use crate::{Error, Result};

/// Bisects every marked triangle at least once and completes the mesh.
pub fn bisect(mesh: &Mesh, marked: &MarkedSet) -> Result<Mesh> {
    if marked.tag() != mesh.tag() {
        return Err(Error::MeshMismatch);
    }
    if marked.is_empty() {
        return Ok(mesh.clone());
    }

    let mut edge_marked = vec![false; mesh.num_edges()];
    let mut stack = Vec::new();
    for &t in marked.ids() {
        let e = mesh.refinement_edge_id(t);
        if !edge_marked[e] {
            edge_marked[e] = true;
            stack.push(e);
        }
    }
    while let Some(e) = stack.pop() {
        for t in mesh.edge_triangles(e).into_iter().flatten() {
            let r = mesh.refinement_edge_id(t);
            if !edge_marked[r] {
                edge_marked[r] = true;
                stack.push(r);
            }
        }
    }

    let mut vertices = mesh.vertices().to_vec();
    let mut midpoint = vec![usize::MAX; mesh.num_edges()];
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        if edge_marked[e] {
            midpoint[e] = vertices.len();
            let (pa, pb) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
    }

    let mut out = Output::with_capacity(mesh.num_triangles() + 3 * midpoint.iter().filter(|&&m| m != usize::MAX).count());
    let split_at = |a: usize, b: usize| -> Option<usize> {
        mesh.edge_id(a, b).filter(|&e| edge_marked[e]).map(|e| midpoint[e])
    };
    for t in 0..mesh.num_triangles() {
        split(mesh.triangles()[t], mesh.refinement_edges()[t], mesh.lineage(t), &split_at, &mut out)?;
    }

    Mesh::from_parts(
        vertices,
        out.triangles,
        out.refinement_edge,
        out.lineage,
        mesh.level() + 1,
        mesh.root_id,
    )
}

/// One NVB sweep with every triangle marked.
pub fn bisect_all(mesh: &Mesh) -> Result<Mesh> {
    bisect(mesh, &MarkedSet::all(mesh))
}

/// `levels` uniform refinements, each made of two NVB sweeps so that mesh
/// sizes roughly halve per level.
pub fn refine_uniform(mesh: &Mesh, levels: usize) -> Result<Mesh> {
    let mut m = mesh.clone();
    for _ in 0..2 * levels {
        m = bisect_all(&m)?;
    }
    Ok(m)
}

struct Output {
    triangles: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    lineage: Vec<Lineage>,
}

impl Output {
    fn with_capacity(n: usize) -> Self {
        Output {
            triangles: Vec::with_capacity(n),
            refinement_edge: Vec::with_capacity(n),
            lineage: Vec::with_capacity(n),
        }
    }
}

fn split(
    tri: [usize; 3],
    r: u8,
    lineage: Lineage,
    split_at: &impl Fn(usize, usize) -> Option<usize>,
    out: &mut Output,
) -> Result<()> {
    let r = r as usize;
    let (c, a, b) = (tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]);
    match split_at(a, b) {
        None => {
            out.triangles.push(tri);
            out.refinement_edge.push(r as u8);
            out.lineage.push(lineage);
        }
        Some(m) => {
            // the new vertex is the newest vertex of both children
            split([c, a, m], 2, lineage.child(0)?, split_at, out)?;
            split([c, m, b], 1, lineage.child(1)?, split_at, out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{builtin_domain, Domain};

    fn reference_triangle() -> Mesh {
        Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = builtin_domain(Domain::LShape).unwrap();
        let r = bisect(&m, &MarkedSet::empty(&m)).unwrap();
        assert_eq!(r.triangles(), m.triangles());
        assert_eq!(r.vertices(), m.vertices());
        assert_eq!(r.tag(), m.tag());
    }

    #[test]
    fn marking_one_square_triangle_bisects_neighbour() {
        let m = builtin_domain(Domain::Square).unwrap();
        assert_eq!(m.refinement_edge_id(0), m.refinement_edge_id(1));
        let r = bisect(&m, &MarkedSet::new(&m, vec![0]).unwrap()).unwrap();
        assert_eq!(r.num_triangles(), 4);
        assert_eq!(r.num_vertices(), 5);
        r.check_conformity().unwrap();
    }

    #[test]
    fn reference_triangle_children_have_unit_size() {
        let m = reference_triangle();
        let r = bisect_all(&m).unwrap();
        assert_eq!(r.num_triangles(), 2);
        for t in 0..2 {
            assert!((r.element_size(t).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(r.generation(t), 1);
            // the midpoint is the newest vertex: refinement edge is opposite it
            let newest = r.triangles()[t][r.refinement_edges()[t] as usize];
            assert_eq!(newest, 3);
        }
    }

    #[test]
    fn compatible_marking_gives_two_children_each() {
        let m = builtin_domain(Domain::Square).unwrap();
        let r = bisect_all(&m).unwrap();
        let parents = Mesh::ancestor_map(&m, &r).unwrap();
        let mut counts = vec![0; m.num_triangles()];
        for p in parents {
            counts[p] += 1;
        }
        assert!(counts.iter().all(|&c| c == 2));
    }

    #[test]
    fn children_partition_parent_area() {
        let mut m = builtin_domain(Domain::SquareOneHole).unwrap();
        for step in 0..4 {
            let ids = (0..m.num_triangles()).filter(|t| (t + step) % 3 == 0).collect();
            let r = bisect(&m, &MarkedSet::new(&m, ids).unwrap()).unwrap();
            let parents = Mesh::ancestor_map(&m, &r).unwrap();
            let mut sums = vec![0.0; m.num_triangles()];
            for (t, p) in parents.iter().enumerate() {
                sums[*p] += r.area(t);
            }
            for (t, s) in sums.iter().enumerate() {
                assert!((s - m.area(t)).abs() <= 1e-12 * m.area(t));
            }
            m = r;
        }
    }

    #[test]
    fn unrelated_meshes_are_not_nested() {
        let a = builtin_domain(Domain::Square).unwrap();
        let b = builtin_domain(Domain::LShape).unwrap();
        assert!(matches!(Mesh::ancestor_map(&a, &b), Err(Error::NotNested)));
        let fine = bisect_all(&a).unwrap();
        // the coarse mesh is not a refinement of the fine one
        assert!(matches!(Mesh::ancestor_map(&fine, &a), Err(Error::NotNested)));
    }
}
