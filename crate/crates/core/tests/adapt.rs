mod common;

use std::sync::Arc;

use common::*;
use hodge_afem::adapt::verify::{run_suite, suite_harmonics, suite_marking, RunMatrix, Suite, MARKING_SEED};
use hodge_afem::adapt::{
    amfem, approx_data, brute_force_min_cardinality, contraction_report, dorfler_select, fit_log_slope, optimal_amfem,
    AmfemOptions, Strategy, BETA_GRID,
};
use hodge_afem::data::PiecewiseConstant;
use hodge_afem::mesh::Domain;
use hodge_afem::{DataFunction, Point};
use proptest::prelude::*;

fn options(max_iter: usize) -> AmfemOptions {
    AmfemOptions { max_iter, ..AmfemOptions::default() }
}

proptest! {
    #[test]
    fn dorfler_is_minimal(eta in prop::collection::vec(0.0f64..1.0, 1..12), theta in 0.05f64..1.0) {
        prop_assume!(eta.iter().sum::<f64>() > 0.0);
        let sel = dorfler_select(&eta, theta).unwrap();
        let total: f64 = eta.iter().sum();
        prop_assert!(sel.iter().map(|&t| eta[t]).sum::<f64>() >= theta * total * (1.0 - 1e-12));
        prop_assert_eq!(sel.len(), brute_force_min_cardinality(&eta, theta).unwrap());
    }

    #[test]
    fn dorfler_grows_with_theta(eta in prop::collection::vec(0.0f64..1.0, 1..40), a in 0.05f64..1.0, b in 0.05f64..1.0) {
        prop_assume!(eta.iter().sum::<f64>() > 0.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let small = dorfler_select(&eta, lo).unwrap();
        let large = dorfler_select(&eta, hi).unwrap();
        prop_assert!(small.len() <= large.len());
        prop_assert!(small.iter().all(|t| large.contains(t)));
    }
}

#[test]
fn large_tolerance_stops_immediately() {
    let out = amfem(&domain(Domain::Square), &DataFunction::Const1, 1e9, 0.5, &options(10)).unwrap();
    assert!(out.converged);
    assert_eq!(out.history.len(), 1);
    assert!(out.history.records()[0].eta_sq >= 0.0);
}

/// Distance from `p` to the closed triangle `v`, for `p` outside it.
fn distance_to_triangle(p: Point, v: [Point; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % 3]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
            ((a[0] + t * d[0] - p[0]).powi(2) + (a[1] + t * d[1] - p[1]).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn lshape_refines_toward_the_corner() {
    let out = amfem(&domain(Domain::LShape), &DataFunction::Const1, 1e-12, 0.5, &options(5)).unwrap();
    assert!(!out.converged);
    let (mut near, mut total) = (0, 0);
    for (mesh, marked) in out.meshes.iter().zip(&out.marked) {
        for &t in marked.ids() {
            total += 1;
            if distance_to_triangle([0.0, 0.0], mesh.triangle_vertices(t)) <= 0.25 {
                near += 1;
            }
        }
    }
    assert!(2 * near >= total, "{near} of {total} marked near the corner");
}

#[test]
fn history_invariants() {
    let out = amfem(&domain(Domain::LShape), &DataFunction::SinSin, 1e-12, 0.5, &options(8)).unwrap();
    let rows = out.history.records();
    assert_eq!(rows.len(), 9);
    for w in rows.windows(2) {
        assert!(w[1].cells > w[0].cells);
        assert!(w[0].e_next_sq.unwrap() >= 0.0);
        assert!(w[0].osc_hat_sq.unwrap() <= w[0].osc_sq * (1.0 + 1e-12) + 1e-300);
    }
    for r in rows {
        assert!(r.eta_sq >= 0.0 && r.osc_sq >= 0.0 && r.error_sq.unwrap() >= 0.0);
        assert!(r.q.unwrap() >= 0.0);
    }
    let last = rows.last().unwrap();
    assert!(last.e_next_sq.is_none() && last.osc_hat_sq.is_none());
}

#[test]
fn runs_are_deterministic() {
    let run = || amfem(&domain(Domain::LShape), &DataFunction::SinSin, 1e-12, 0.3, &options(6)).unwrap().history.to_csv();
    assert_eq!(run(), run());
}

#[test]
fn uniform_strategy_quadruples_cells() {
    let o = AmfemOptions { strategy: Strategy::Uniform, reference_depth: 0, ..options(2) };
    let out = amfem(&domain(Domain::Square), &DataFunction::SinSin, 1e-12, 0.5, &o).unwrap();
    let cells: Vec<usize> = out.history.records().iter().map(|r| r.cells).collect();
    assert_eq!(cells, [cells[0], 4 * cells[0], 16 * cells[0]]);
    assert!(out.history.records().iter().all(|r| r.error_sq.is_none()));
}

#[test]
fn contraction_on_reentrant_corner() {
    let out = amfem(&domain(Domain::LShape), &DataFunction::Const1, 1e-12, 0.5, &options(12)).unwrap();
    let rep = contraction_report(&out.history, 0.25, 0.5, &BETA_GRID).unwrap();
    assert!(rep.best_ratio <= 0.95, "{}", rep.best_ratio);
    assert!(rep.lambda_min > 0.0 && rep.lambda_min <= rep.lambda_max);
}

#[test]
fn approx_keeps_resolved_data() {
    let mesh = uniform(Domain::Square, 1);
    let pc = PiecewiseConstant::new(Arc::new(mesh.clone()), (0..mesh.num_triangles()).map(|t| t as f64).collect()).unwrap();
    let out = approx_data(&DataFunction::PiecewiseConstant(Arc::new(pc)), &mesh, 1e-10, 10).unwrap();
    assert!(out.converged);
    assert_eq!(out.added_cells, 0);
    assert_eq!(out.iterations, 0);
}

#[test]
fn approx_follows_the_discontinuity() {
    // an unaligned step so that the discontinuity actually cuts elements
    let step = |p: Point| if p[0] + 0.3 * p[1] > 0.55 { 1.0 } else { -1.0 };
    let out = approx_data(&step, &domain(Domain::Square), 0.02, 40).unwrap();
    assert!(out.converged);
    let cut = out
        .marked_triangles
        .iter()
        .filter(|v| {
            let s: Vec<f64> = v.iter().map(|p| p[0] + 0.3 * p[1] - 0.55).collect();
            s.iter().any(|&x| x >= 0.0) && s.iter().any(|&x| x <= 0.0)
        })
        .count();
    assert!(cut as f64 >= 0.8 * out.marked_triangles.len() as f64);
}

#[test]
fn approx_growth_is_bounded() {
    let base = domain(Domain::Square);
    let added: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&eps| {
            let out = approx_data(&DataFunction::SinSin, &base, eps, 60).unwrap();
            assert!(out.converged);
            (1.0 / eps, out.added_cells as f64)
        })
        .collect();
    for w in added.windows(2) {
        assert!(w[1].1 / w[0].1 <= 4.0, "{added:?}");
    }
    let slope = loglog_slope(&added);
    assert!((slope - 1.0).abs() <= 0.25, "{slope}");
    assert!((fit_log_slope(&added).unwrap() - slope).abs() <= 0.3);
}

#[test]
fn optimal_loop_reaches_tolerance() {
    let out = optimal_amfem(&domain(Domain::Square), &DataFunction::SinSin, 0.3, 0.5, &options(30)).unwrap();
    assert!(out.approx.osc <= 0.15);
    assert!(out.amfem.converged);
    assert!(out.amfem.history.last().unwrap().eta_sq.sqrt() <= 0.15);
}

#[test]
fn verification_suites_pass() {
    let matrix = RunMatrix::standard().unwrap();
    let r = run_suite(Suite::All, &matrix).unwrap();
    assert!(r.passed(), "{:?}", r.failures());
    assert!(suite_harmonics().unwrap().passed());
    assert!(suite_marking(MARKING_SEED ^ 7).unwrap().passed());
}
