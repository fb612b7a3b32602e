#![allow(dead_code)]

use std::sync::Arc;

use hodge_afem::mesh::{bisect, builtin_domain, refine_uniform, Domain};
use hodge_afem::{DeRhamComplex, MarkedSet, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn domain(d: Domain) -> Mesh {
    builtin_domain(d).unwrap()
}

pub fn uniform(d: Domain, levels: usize) -> Mesh {
    refine_uniform(&domain(d), levels).unwrap()
}

pub fn complex(mesh: Mesh) -> DeRhamComplex {
    DeRhamComplex::new(Arc::new(mesh))
}

/// Marks each triangle with probability `p` (at least one) and bisects.
pub fn random_step(mesh: &Mesh, rng: &mut ChaCha8Rng, p: f64) -> Mesh {
    let mut ids: Vec<usize> = (0..mesh.num_triangles()).filter(|_| rng.random_bool(p)).collect();
    if ids.is_empty() {
        ids.push(rng.random_range(0..mesh.num_triangles()));
    }
    bisect(mesh, &MarkedSet::new(mesh, ids).unwrap()).unwrap()
}

/// A random nested pair: `coarse` after `a` random steps, `fine` after `b`
/// more.
pub fn random_pair(d: Domain, seed: u64, a: usize, b: usize) -> (Mesh, Mesh) {
    let mut r = rng(seed);
    let mut coarse = domain(d);
    for _ in 0..a {
        coarse = random_step(&coarse, &mut r, 0.4);
    }
    let mut fine = coarse.clone();
    for _ in 0..b {
        fine = random_step(&fine, &mut r, 0.4);
    }
    (coarse, fine)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
