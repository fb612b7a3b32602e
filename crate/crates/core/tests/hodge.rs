mod common;

use common::*;
use hodge_afem::hodge::{directed_gap, exact_basis, harmonic_basis, hodge_decompose, poincare_constant, subspace_gap, SubspaceBasis};
use hodge_afem::mesh::{bisect_all, Domain, Mesh};
use hodge_afem::Degree;
use nalgebra::{DMatrix, DVector};

#[test]
fn harmonic_dimension_counts_holes() {
    for (d, dim) in [(Domain::Square, 0), (Domain::LShape, 0), (Domain::SquareOneHole, 1), (Domain::SquareTwoHoles, 2)] {
        for levels in 0..2 {
            let c = complex(uniform(d, levels));
            assert_eq!(harmonic_basis(&c, Degree::One).unwrap().dim(), dim, "{d} at level {levels}");
        }
    }
}

#[test]
fn decomposition_components() {
    let c = complex(uniform(Domain::SquareOneHole, 1));
    let mut r = rng(2);
    let s = c.function(Degree::Zero, DVector::from_vec(random_vec(&mut r, c.num_dofs(Degree::Zero)))).unwrap();
    let x = c.apply_d(&s).unwrap();
    let h = hodge_decompose(&x, &c).unwrap();
    let scale = c.norm(&x).unwrap();
    assert!(c.norm(&h.harmonic).unwrap() <= 1e-10 * scale);
    assert!(c.norm(&h.coexact).unwrap() <= 1e-10 * scale);
    assert!(c.norm(&h.exact.sub(&x).unwrap()).unwrap() <= 1e-10 * scale);

    let hb = harmonic_basis(&c, Degree::One).unwrap();
    let hv = c.function(Degree::One, hb.columns().column(0).into_owned()).unwrap();
    let h = hodge_decompose(&hv, &c).unwrap();
    assert!(c.norm(&h.exact).unwrap() <= 1e-10);
    assert!(c.norm(&h.coexact).unwrap() <= 1e-10);

    let x = c.function(Degree::One, DVector::from_vec(random_vec(&mut r, c.num_dofs(Degree::One)))).unwrap();
    let h = hodge_decompose(&x, &c).unwrap();
    let sum = h.exact.add(&h.harmonic).unwrap().add(&h.coexact).unwrap();
    let nx = c.norm(&x).unwrap();
    assert!(c.norm(&sum.sub(&x).unwrap()).unwrap() <= 1e-10 * nx);
    let parts = [&h.exact, &h.harmonic, &h.coexact].map(|p| c.inner(p, p).unwrap());
    assert!((parts.iter().sum::<f64>() - nx * nx).abs() <= 1e-10 * nx * nx);
    for part in [&h.exact, &h.harmonic, &h.coexact] {
        let again = hodge_decompose(part, &c).unwrap();
        let np = c.norm(part).unwrap().max(1e-300);
        let same = [&again.exact, &again.harmonic, &again.coexact]
            .iter()
            .filter(|q| c.norm(&q.sub(part).unwrap()).unwrap() <= 1e-10 * np)
            .count();
        assert!(same >= 1 || np <= 1e-12);
    }
    assert_eq!(exact_basis(&c).dim(), c.num_dofs(Degree::Zero) - 1);
}

#[test]
fn gap_examples() {
    let id = DMatrix::identity(2, 2);
    let a = SubspaceBasis::new(Degree::One, DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), id.clone()).unwrap();
    let b = SubspaceBasis::new(Degree::One, DMatrix::from_column_slice(2, 1, &[0.0, 3.0]), id.clone()).unwrap();
    assert_eq!(subspace_gap(&a, &a).unwrap(), 0.0);
    assert!((subspace_gap(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    let c = SubspaceBasis::new(Degree::One, DMatrix::from_column_slice(2, 1, &[1.0, 1.0]), id).unwrap();
    assert!((directed_gap(&c, &a).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn nested_harmonic_gaps_are_symmetric_and_below_one() {
    for d in [Domain::SquareOneHole, Domain::SquareTwoHoles] {
        let coarse = domain(d);
        let mut fine = coarse.clone();
        let cc = complex(coarse.clone());
        let hc = harmonic_basis(&cc, Degree::One).unwrap();
        for _ in 0..2 {
            fine = bisect_all(&fine).unwrap();
            Mesh::ancestor_map(&coarse, &fine).unwrap();
            let cf = complex(fine.clone());
            let hf = harmonic_basis(&cf, Degree::One).unwrap();
            let hp = hc.prolong(&cc, &cf).unwrap();
            assert_eq!(hf.dim(), hc.dim());
            let (ab, ba) = (subspace_gap(&hp, &hf).unwrap(), subspace_gap(&hf, &hp).unwrap());
            assert!((ab - ba).abs() <= 1e-8);
            assert!(ab <= 0.9, "{d}: gap {ab}");
            assert!(ab > 0.0);
        }
    }
}

#[test]
fn poincare_constants() {
    let mut consts = Vec::new();
    for l in 1..=3 {
        let c = complex(uniform(Domain::Square, l));
        let p = poincare_constant(&c, Degree::Zero).unwrap();
        // the extremal function attains the bound
        let v = &p.extremal;
        let dv = c.apply_d(v).unwrap();
        let (nv, ndv) = (c.inner(v, v).unwrap(), c.inner(&dv, &dv).unwrap());
        assert!(((nv + ndv).sqrt() - p.constant * ndv.sqrt()).abs() <= 1e-8 * p.constant);
        consts.push(p.constant);
        if l == 1 {
            let p1 = poincare_constant(&c, Degree::One).unwrap();
            assert!(p1.constant > 1.0);
        }
    }
    let (lo, hi) = consts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    assert!(hi / lo <= 1.05, "{consts:?}");

    let base = uniform(Domain::Square, 1);
    let scaled = Mesh::new(base.vertices().iter().map(|p| [2.0 * p[0], 2.0 * p[1]]).collect(), base.triangles().to_vec()).unwrap();
    let (a, b) = (
        poincare_constant(&complex(base), Degree::Zero).unwrap().constant,
        poincare_constant(&complex(scaled), Degree::Zero).unwrap().constant,
    );
    assert!(((b * b - 1.0) / (a * a - 1.0) - 4.0).abs() <= 1e-8);
}
