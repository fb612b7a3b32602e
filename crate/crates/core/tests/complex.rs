#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use hodge_afem::complex::{spmv, Field};
use hodge_afem::data::PiecewiseConstant;
use hodge_afem::mesh::Domain;
use hodge_afem::{DataFunction, DeRhamComplex, Degree, FeFunction, Mesh, Point};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

fn dense(c: &DeRhamComplex, m: &nalgebra_sparse::CsrMatrix<f64>) -> DMatrix<f64> {
    c.dense(m)
}

/// Exact RT0 mass matrix from second moments:
/// `∫_T x xᵀ = |T|/12 (Σ v vᵀ + 9 c cᵀ)`.
fn rt0_mass_oracle(mesh: &Mesh) -> DMatrix<f64> {
    let n = mesh.num_edges();
    let mut m = DMatrix::zeros(n, n);
    let v = mesh.vertices();
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[t];
        let p = tri.map(|i| v[i]);
        let area = mesh.area(t);
        let c = mesh.centroid(t);
        let mut second = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                second[a][b] = area / 12.0 * (p.iter().map(|q| q[a] * q[b]).sum::<f64>() + 9.0 * c[a] * c[b]);
            }
        }
        let first = [area * c[0], area * c[1]];
        let (mut ids, mut signs) = ([0; 3], [0.0; 3]);
        for j in 0..3 {
            let (a, b) = (tri[(j + 1) % 3], tri[(j + 2) % 3]);
            let e = mesh.edge_id(a, b).unwrap();
            let [lo, hi] = mesh.edges()[e];
            let n_e = [v[hi][1] - v[lo][1], -(v[hi][0] - v[lo][0])];
            let mid = [0.5 * (v[a][0] + v[b][0]), 0.5 * (v[a][1] + v[b][1])];
            let outward = n_e[0] * (mid[0] - p[j][0]) + n_e[1] * (mid[1] - p[j][1]) > 0.0;
            ids[j] = e;
            signs[j] = if outward { 1.0 } else { -1.0 };
        }
        for i in 0..3 {
            for j in 0..3 {
                // ∫ (x - p_i)·(x - p_j)
                let trace = second[0][0] + second[1][1];
                let lin = (p[i][0] + p[j][0]) * first[0] + (p[i][1] + p[j][1]) * first[1];
                let val = trace - lin + area * (p[i][0] * p[j][0] + p[i][1] * p[j][1]);
                m[(ids[i], ids[j])] += signs[i] * signs[j] * val / (4.0 * area * area);
            }
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn d_squared_vanishes_and_masses_are_symmetric(seed in any::<u64>(), d in 0usize..4) {
        let (_, fine) = random_pair(Domain::ALL[d], seed, 0, 3);
        let c = complex(fine);
        let dd = dense(&c, c.d1()) * dense(&c, c.d0());
        prop_assert!(dd.amax() <= 1e-12 * dense(&c, c.d1()).amax());
        for k in [Degree::Zero, Degree::One, Degree::Two] {
            let m = dense(&c, c.mass(k));
            prop_assert!((&m - m.transpose()).amax() <= 1e-14 * m.amax());
            prop_assert!(m.clone().cholesky().is_some());
        }
    }

    #[test]
    fn rt0_mass_matches_exact_oracle(seed in any::<u64>()) {
        let (_, fine) = random_pair(Domain::LShape, seed, 0, 2);
        let oracle = rt0_mass_oracle(&fine);
        let c = complex(fine);
        let m = dense(&c, c.mass(Degree::One));
        prop_assert!((&m - &oracle).amax() <= 1e-12 * oracle.amax());
    }

    #[test]
    fn canonical_projection_identities(seed in any::<u64>(), d in 0usize..4) {
        let (coarse, fine) = random_pair(Domain::ALL[d], seed, 1, 2);
        let parents = Mesh::ancestor_map(&coarse, &fine).unwrap();
        let (cc, cf) = (complex(coarse), complex(fine));
        let mut r = rng(seed ^ 0xabc);
        let nf = cf.num_dofs(Degree::Two);
        let f = cf.function(Degree::Two, DVector::from_vec(random_vec(&mut r, nf))).unwrap();
        let u = cf.function(Degree::Two, DVector::from_vec(random_vec(&mut r, nf))).unwrap();
        let fine_mesh = cf.mesh().clone();
        let coarse_mesh = cc.mesh().clone();
        // (I_h - I_H) g on the fine mesh
        let defect = |g: &FeFunction| -> Vec<f64> {
            let mean = cc.canonical_interp_top(g, &cf).unwrap();
            (0..nf).map(|t| g.coeffs()[t] - mean.coeffs()[parents[t]]).collect()
        };
        let (df, du) = (defect(&f), defect(&u));
        for p in 0..coarse_mesh.num_triangles() {
            let kids: Vec<usize> = (0..nf).filter(|&t| parents[t] == p).collect();
            let scale = kids.iter().map(|&t| fine_mesh.area(t) * f.coeffs()[t].abs()).sum::<f64>().max(1e-300);
            let pl1: f64 = kids.iter().map(|&t| fine_mesh.area(t) * df[t]).sum();
            prop_assert!(pl1.abs() <= 1e-12 * scale);
            let lhs: f64 = kids.iter().map(|&t| fine_mesh.area(t) * du[t] * f.coeffs()[t]).sum();
            let rhs: f64 = kids.iter().map(|&t| fine_mesh.area(t) * u.coeffs()[t] * df[t]).sum();
            let s: f64 = kids.iter().map(|&t| fine_mesh.area(t) * (u.coeffs()[t] * f.coeffs()[t]).abs()).sum::<f64>().max(1e-300);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * s);
        }
    }

    #[test]
    fn prolongation_is_exact_inclusion(seed in any::<u64>()) {
        let (coarse, fine) = random_pair(Domain::SquareOneHole, seed, 1, 2);
        let parents = Mesh::ancestor_map(&coarse, &fine).unwrap();
        let (cc, cf) = (complex(coarse), complex(fine));
        let mut r = rng(seed);
        let x = cc.function(Degree::One, DVector::from_vec(random_vec(&mut r, cc.num_dofs(Degree::One)))).unwrap();
        let y = cf.prolong(&x, &cc).unwrap();
        let (nc, nf) = (cc.norm(&x).unwrap(), cf.norm(&y).unwrap());
        prop_assert!((nc - nf).abs() <= 1e-12 * nc);
        let bary = [[1.0 / 3.0; 3], [0.6, 0.2, 0.2], [0.2, 0.6, 0.2], [0.2, 0.2, 0.6], [0.05, 0.05, 0.9], [0.05, 0.9, 0.05], [0.9, 0.05, 0.05]];
        let mut worst: f64 = 0.0;
        for t in 0..cf.mesh().num_triangles() {
            let v = cf.mesh().triangle_vertices(t);
            for b in &bary {
                let p = [b[0] * v[0][0] + b[1] * v[1][0] + b[2] * v[2][0], b[0] * v[0][1] + b[1] * v[1][1] + b[2] * v[2][1]];
                let a = cf.eval_vector(&y, t, p).unwrap();
                let c = cc.eval_vector(&x, parents[t], p).unwrap();
                worst = worst.max((a[0] - c[0]).abs().max((a[1] - c[1]).abs()));
            }
        }
        prop_assert!(worst <= 1e-12 * x.coeffs().amax().max(1.0) * 10.0);
        let s = cc.function(Degree::Zero, DVector::from_vec(random_vec(&mut r, cc.num_dofs(Degree::Zero)))).unwrap();
        let dx = cf.apply_d(&cf.prolong(&s, &cc).unwrap()).unwrap();
        let xd = cf.prolong(&cc.apply_d(&s).unwrap(), &cc).unwrap();
        prop_assert!((dx.coeffs() - xd.coeffs()).amax() <= 1e-12);
    }

    #[test]
    fn rt0_fields_are_curl_free(seed in any::<u64>()) {
        let c = complex(uniform(Domain::LShape, 1));
        let mut r = rng(seed);
        let x = c.function(Degree::One, DVector::from_vec(random_vec(&mut r, c.num_dofs(Degree::One)))).unwrap();
        for t in 0..c.mesh().num_triangles() {
            prop_assert!(c.rot_on(&x, t).abs() <= 1e-12 * x.coeffs().amax() / c.mesh().area(t));
        }
    }
}

#[test]
fn square_incidence_ranks() {
    let c = complex(domain(Domain::Square));
    assert_eq!(dense(&c, c.d0()).rank(1e-10), 3);
    assert_eq!(dense(&c, c.d1()).rank(1e-10), 2);
}

#[test]
fn projections_of_constants_and_idempotence() {
    let c = complex(uniform(Domain::SquareTwoHoles, 1));
    let p = c.l2_project(Field::Scalar(&|_: Point| 2.5), Degree::Two).unwrap();
    assert!(p.coeffs().iter().all(|&v| (v - 2.5).abs() < 1e-13));
    let mut r = rng(3);
    let values = random_vec(&mut r, c.num_dofs(Degree::Two));
    let pc = Arc::new(PiecewiseConstant::new(c.mesh().clone(), values.clone()).unwrap());
    let data = DataFunction::PiecewiseConstant(pc.clone());
    let again = c.l2_project(Field::Scalar(&data), Degree::Two).unwrap();
    for (a, b) in again.coeffs().iter().zip(&values) {
        assert!((a - b).abs() <= 1e-12);
    }
    let nodal = c.function(Degree::Zero, DVector::from_vec(random_vec(&mut r, c.num_dofs(Degree::Zero)))).unwrap();
    let field = |q: Point| {
        let t = pc.locate(q);
        c.eval_scalar(&nodal, t, q).unwrap()
    };
    let back = c.l2_project(Field::Scalar(&field), Degree::Zero).unwrap();
    assert!((back.coeffs() - nodal.coeffs()).amax() <= 1e-10);
}

#[test]
fn projection_is_best_approximation() {
    let c = complex(uniform(Domain::Square, 2));
    let f = |p: Point| (3.0 * p[0]).sin() * (2.0 * p[1]).cos() + p[0] * p[0];
    let proj = c.project_top(&f);
    let best = c.l2_distance_scalar(&proj, &f).unwrap();
    let mut r = rng(11);
    for _ in 0..20 {
        let noise = DVector::from_vec(random_vec(&mut r, proj.len())) * 0.1;
        let chi = proj.with_coeffs(proj.coeffs() + noise).unwrap();
        assert!(best <= c.l2_distance_scalar(&chi, &f).unwrap());
    }
}

#[test]
fn canonical_rt_interpolation() {
    let c = complex(uniform(Domain::LShape, 1));
    let constant = |_: Point| [0.3, -1.2];
    let i = c.canonical_interp_rt(&constant);
    assert!(c.l2_distance_vector(&i, &constant).unwrap() <= 1e-12);

    let v = |p: Point| [(PI * p[1]).sin(), (PI * p[0]).sin()];
    let div = |p: Point| 0.0 * p[0];
    let mut err = Vec::new();
    let mut comm = Vec::new();
    for l in 1..=4 {
        let c = complex(uniform(Domain::Square, l));
        let i = c.canonical_interp_rt(&v);
        let h = (0..c.mesh().num_triangles()).map(|t| c.mesh().element_size(t).unwrap()).fold(0.0, f64::max);
        err.push((h, c.l2_distance_vector(&i, &v).unwrap()));
        let d = spmv(c.d1(), i.coeffs());
        let p = c.project_top(&div);
        comm.push((d - p.coeffs()).amax());
    }
    let slope = loglog_slope(&err);
    assert!((slope - 1.0).abs() <= 0.1, "slope {slope}");
    assert!(comm.iter().all(|&r| r <= 1e-12), "{comm:?}");

    // commuting property for a field with nonzero divergence
    let w = |p: Point| [p[0] * p[0], p[0] * p[1]];
    let divw = |p: Point| 3.0 * p[0];
    let mut prev = f64::INFINITY;
    for l in 1..=3 {
        let c = complex(uniform(Domain::Square, l));
        let d = spmv(c.d1(), c.canonical_interp_rt(&w).coeffs());
        let r = (d - c.project_top(&divw).coeffs()).amax();
        assert!(r <= prev.max(1e-12));
        prev = r;
    }
    assert!(prev <= 1e-10);
}

#[test]
fn prolonged_constants_and_top_forms() {
    let (coarse, fine) = random_pair(Domain::SquareOneHole, 5, 1, 1);
    let parents = Mesh::ancestor_map(&coarse, &fine).unwrap();
    let (cc, cf) = (complex(coarse), complex(fine));
    let mut r = rng(5);
    let g = cc.function(Degree::Two, DVector::from_vec(random_vec(&mut r, cc.num_dofs(Degree::Two)))).unwrap();
    let gf = cf.prolong(&g, &cc).unwrap();
    for (t, &p) in parents.iter().enumerate() {
        assert_eq!(gf.coeffs()[t], g.coeffs()[p]);
    }
    let one = cf.function(Degree::Two, DVector::from_element(cf.num_dofs(Degree::Two), 4.0)).unwrap();
    let mean = cc.canonical_interp_top(&one, &cf).unwrap();
    assert!(mean.coeffs().iter().all(|&v| (v - 4.0).abs() < 1e-14));
}

#[test]
fn rejects_functions_from_other_meshes() {
    let a = complex(domain(Domain::Square));
    let b = complex(uniform(Domain::Square, 1));
    let x = a.zero(Degree::One);
    assert!(b.norm(&x).is_err());
    assert!(b.prolong(&b.zero(Degree::One), &a).is_err());
}
