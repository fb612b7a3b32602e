//! Empirical checks of the inequalities behind the adaptive loop, on nested
//! mesh pairs and on run matrices of uniformly refined meshes.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::afem::ReferenceSolution;
use super::marking::{brute_force_min_cardinality, dorfler_select};
use crate::complex::{DeRhamComplex, Degree, FeFunction};
use crate::data::DataFunction;
use crate::estimator::{discrete_oscillation, estimate, estimate_field, oscillation};
use crate::hodge::{harmonic_basis, subspace_gap};
use crate::mesh::{bisect_all, builtin_domain, refine_uniform, Domain, Mesh};
use crate::quadrature::triangle_points;
use crate::solver::{solve_mixed_projected, solve_with_data_variants, DataVariants};
use crate::{Error, Result, ScalarField};

/// Fixed `δ` of the quasi-orthogonality check.
pub const QUASI_DELTA: f64 = 0.5;
/// Bound on the normalized cross inner product.
pub const CROSS_TOL: f64 = 0.05;
/// Relative slack for checks that involve the surrogate flux.
pub const SURROGATE_SLACK: f64 = 0.1;
pub const STABILITY_DRIFT: f64 = 2.0;
pub const DISCRETE_BOUND_DRIFT: f64 = 4.0;
pub const BETA_DRIFT: f64 = 2.0;
pub const HARMONIC_GAP_MAX: f64 = 0.9;
pub const GAP_SYMMETRY_TOL: f64 = 1e-8;
pub const MARKING_SEED: u64 = 20_240_601;
pub const MARKING_INSTANCES: usize = 200;
pub const MARKING_THETAS: [f64; 3] = [0.25, 0.5, 0.75];

/// A coarse/fine complex pair with the three solutions compared by the
/// checks.
pub struct Pair<'a> {
    pub coarse: &'a DeRhamComplex,
    pub fine: &'a DeRhamComplex,
    pub variants: DataVariants,
}

impl<'a> Pair<'a> {
    /// Fails with `NotNested` unless `fine` refines `coarse`.
    pub fn new(coarse: &'a DeRhamComplex, fine: &'a DeRhamComplex, f: &dyn ScalarField) -> Result<Self> {
        Mesh::ancestor_map(coarse.mesh(), fine.mesh())?;
        Ok(Pair { coarse, fine, variants: solve_with_data_variants(fine, coarse, f)? })
    }

    fn coarse_on_fine(&self) -> Result<FeFunction> {
        self.fine.prolong(&self.variants.sigma_coarse.sigma, self.coarse)
    }

    /// `‖σ_h - σ_H‖²`.
    fn fine_coarse_sq(&self) -> Result<f64> {
        let d = self.variants.sigma_h.sigma.sub(&self.coarse_on_fine()?)?;
        self.fine.inner(&d, &d)
    }

    /// `osc²(f_h, 𝒯_H)`.
    fn discrete_osc_sq(&self) -> Result<f64> {
        Ok(discrete_oscillation(&self.variants.sigma_h.f_h, self.fine.mesh(), self.coarse.mesh())?.powi(2))
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasiOrthogonality {
    /// `|⟨σ_ref - σ_h, σ̃_h - σ_H⟩| / (‖σ_ref - σ_h‖ ‖σ̃_h - σ_H‖)`, zero when
    /// either factor vanishes.
    pub normalized_inner: f64,
    pub error_fine_sq: f64,
    pub error_coarse_sq: f64,
    pub fine_coarse_sq: f64,
    pub osc_sq: f64,
    /// Smallest `C₀` for which the quasi-orthogonality inequality holds.
    pub required_c0: f64,
}

impl QuasiOrthogonality {
    /// `(1-δ)e_h ≤ e_H - ‖σ_h - σ_H‖² + (C₀/δ) osc²`, with the surrogate
    /// slack applied to `e_H`.
    pub fn holds(&self, c0: f64, slack: f64) -> bool {
        let d = QUASI_DELTA;
        (1.0 - d) * self.error_fine_sq <= (1.0 + slack) * self.error_coarse_sq - self.fine_coarse_sq + c0 / d * self.osc_sq
    }
}

pub fn verify_quasi_orthogonality(pair: &Pair, reference: &ReferenceSolution) -> Result<QuasiOrthogonality> {
    let v = &pair.variants;
    let sigma_h = &v.sigma_h.sigma;
    let tilde_minus_coarse = v.sigma_tilde.sigma.sub(&pair.coarse_on_fine()?)?;
    let error_fine_sq = reference.error_sq(sigma_h, pair.fine)?;
    let cross_norm = pair.fine.norm(&tilde_minus_coarse)?;
    let scale = pair.fine.norm(&v.sigma_tilde.sigma)?;
    let normalized_inner = if cross_norm <= 1e-13 * scale || error_fine_sq <= 0.0 {
        0.0
    } else {
        let inner = reference.inner_error_with(sigma_h, pair.fine, &tilde_minus_coarse, pair.fine)?;
        inner.abs() / (error_fine_sq.sqrt() * cross_norm)
    };
    let error_coarse_sq = reference.error_sq(&v.sigma_coarse.sigma, pair.coarse)?;
    let fine_coarse_sq = pair.fine_coarse_sq()?;
    let osc_sq = pair.discrete_osc_sq()?;
    let excess = (1.0 - QUASI_DELTA) * error_fine_sq - error_coarse_sq + fine_coarse_sq;
    let required_c0 = QUASI_DELTA * ratio(excess.max(0.0), osc_sq);
    Ok(QuasiOrthogonality { normalized_inner, error_fine_sq, error_coarse_sq, fine_coarse_sq, osc_sq, required_c0 })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteStability {
    /// `‖σ_h - σ̃_h‖`.
    pub difference: f64,
    /// `osc(f_h, 𝒯_H)`.
    pub osc: f64,
    pub ratio: f64,
    /// `max_T ‖u_h - I_H u_h‖_T / (h_T ‖σ_h‖_T)` over coarse elements.
    pub local_ratio_max: f64,
}

/// `∫_t |σ|²` for every element.
fn element_norms_sq(complex: &DeRhamComplex, sigma: &FeFunction) -> Vec<f64> {
    let mesh = complex.mesh();
    (0..mesh.num_triangles())
        .map(|t| {
            triangle_points(&mesh.triangle_vertices(t), mesh.area(t))
                .iter()
                .map(|&(p, w)| {
                    let v = complex.rt0_value(sigma.coeffs().as_slice(), t, p);
                    w * (v[0] * v[0] + v[1] * v[1])
                })
                .sum()
        })
        .collect()
}

pub fn verify_discrete_stability(pair: &Pair) -> Result<DiscreteStability> {
    let v = &pair.variants;
    let d = v.sigma_h.sigma.sub(&v.sigma_tilde.sigma)?;
    let difference = pair.fine.norm(&d)?;
    let osc = pair.discrete_osc_sq()?.sqrt();
    let ratio = if osc <= 0.0 && difference <= 1e-13 { 0.0 } else { ratio(difference, osc) };

    let (coarse, fine) = (pair.coarse.mesh(), pair.fine.mesh());
    let parents = Mesh::ancestor_map(coarse, fine)?;
    let u = &v.sigma_h.u;
    let mean = pair.coarse.canonical_interp_top(u, pair.fine)?;
    let sigma_sq = element_norms_sq(pair.fine, &v.sigma_h.sigma);
    let mut num = vec![0.0; coarse.num_triangles()];
    let mut den = vec![0.0; coarse.num_triangles()];
    for (t, &p) in parents.iter().enumerate() {
        num[p] += fine.area(t) * (u.coeffs()[t] - mean.coeffs()[p]).powi(2);
        den[p] += sigma_sq[t];
    }
    let floor = 1e-12 * den.iter().cloned().fold(0.0, f64::max);
    let mut local_ratio_max: f64 = 0.0;
    for t in 0..coarse.num_triangles() {
        if den[t] > floor {
            local_ratio_max = local_ratio_max.max(num[t].sqrt() / (coarse.element_size(t)? * den[t].sqrt()));
        }
    }
    Ok(DiscreteStability { difference, osc, ratio, local_ratio_max })
}

#[derive(Debug, Clone, Serialize)]
pub struct UpperBounds {
    /// `‖σ_h - σ_H‖²`.
    pub discrete_lhs: f64,
    /// `η²(σ_H, 𝒯_H)`.
    pub eta_coarse_sq: f64,
    pub discrete_ratio: f64,
    /// `‖σ_ref - σ_H‖²`.
    pub continuous_lhs: f64,
    pub continuous_ratio: f64,
    /// `‖σ_ref - σ̃_ref‖`, where `σ̃_ref` uses the data `f_h`.
    pub data_lhs: f64,
    /// `osc(f, 𝒯_h)`.
    pub data_osc: f64,
    pub data_ratio: f64,
    /// `η²(σ_h, 𝒯_h) / (‖σ_ref - σ_h‖² + osc²(f, 𝒯_h))`.
    pub efficiency_ratio: f64,
    /// `η(σ_H) = 0` forces `σ_h = σ_H`; true when that holds or `η > 0`.
    pub zero_eta_exact: bool,
}

pub fn verify_upper_bounds(pair: &Pair, reference: &ReferenceSolution, f: &dyn ScalarField) -> Result<UpperBounds> {
    let v = &pair.variants;
    let discrete_lhs = pair.fine_coarse_sq()?;
    let eta_coarse_sq = estimate(&v.sigma_coarse, f, pair.coarse)?.eta_sq_total();
    let continuous_lhs = reference.error_sq(&v.sigma_coarse.sigma, pair.coarse)?;

    let rc = &reference.complex;
    let f_fine = rc.prolong(&v.sigma_h.f_h, pair.fine)?;
    let tilde_ref = solve_mixed_projected(rc, &f_fine)?;
    let data_lhs = rc.norm(&reference.sigma().sub(&tilde_ref.sigma)?)?;
    let data_osc = oscillation(f, pair.fine);

    let eta_fine_sq = estimate(&v.sigma_h, f, pair.fine)?.eta_sq_total();
    let error_fine_sq = reference.error_sq(&v.sigma_h.sigma, pair.fine)?;
    let zero_eta_exact = eta_coarse_sq > 1e-24 || discrete_lhs.sqrt() <= 1e-10;
    Ok(UpperBounds {
        discrete_lhs,
        eta_coarse_sq,
        discrete_ratio: ratio(discrete_lhs, eta_coarse_sq),
        continuous_lhs,
        continuous_ratio: ratio(continuous_lhs, eta_coarse_sq),
        data_lhs,
        data_osc,
        data_ratio: ratio(data_lhs, data_osc),
        efficiency_ratio: ratio(eta_fine_sq, error_fine_sq + data_osc * data_osc),
        zero_eta_exact,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimatorContinuity {
    /// `η²(σ_h, 𝒯_h) - η²(σ_H, 𝒯_h)`.
    pub lhs: f64,
    /// `‖σ_h - σ_H‖² + osc²(f_h, 𝒯_H)`.
    pub rhs: f64,
    /// Largest `β` with `β·lhs ≤ rhs`; infinite when `lhs ≤ 0`.
    pub implied_beta: f64,
    /// `(η(σ_h, 𝒯_h) - η(σ_H, 𝒯_h)) / (‖σ_h - σ_H‖ + osc(f_h, 𝒯_H))`.
    pub root_ratio: f64,
}

impl EstimatorContinuity {
    pub fn holds(&self, beta: f64) -> bool {
        self.lhs <= 0.0 || beta * self.lhs <= self.rhs
    }
}

pub fn verify_estimator_continuity(pair: &Pair, f: &dyn ScalarField) -> Result<EstimatorContinuity> {
    let v = &pair.variants;
    let eta_fine = estimate(&v.sigma_h, f, pair.fine)?.eta_sq_total();
    let eta_coarse_on_fine = estimate_field(&pair.coarse_on_fine()?, f, pair.fine)?.eta_sq_total();
    let lhs = eta_fine - eta_coarse_on_fine;
    let (diff_sq, osc_sq) = (pair.fine_coarse_sq()?, pair.discrete_osc_sq()?);
    let rhs = diff_sq + osc_sq;
    let implied_beta = if lhs > 0.0 { rhs / lhs } else { f64::INFINITY };
    let root_ratio = ratio(eta_fine.sqrt() - eta_coarse_on_fine.sqrt(), diff_sq.sqrt() + osc_sq.sqrt());
    Ok(EstimatorContinuity { lhs, rhs, implied_beta, root_ratio })
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ReportValue {
    Bool(bool),
    Int(i64),
    Number(f64),
}

/// Flat map of named ratios, constants and pass flags (`pass.<check>`).
#[derive(Debug, Clone, Default)]
pub struct Report {
    entries: BTreeMap<String, ReportValue>,
    failures: Vec<String>,
}

impl Report {
    pub fn number(&mut self, key: impl Into<String>, v: f64) {
        self.entries.insert(key.into(), ReportValue::Number(v));
    }

    pub fn int(&mut self, key: impl Into<String>, v: i64) {
        self.entries.insert(key.into(), ReportValue::Int(v));
    }

    pub fn check(&mut self, name: &str, passed: bool) {
        self.entries.insert(format!("pass.{name}"), ReportValue::Bool(passed));
        if !passed {
            self.failures.push(name.to_string());
        }
    }

    pub fn get(&self, key: &str) -> Option<&ReportValue> {
        self.entries.get(key)
    }

    pub fn entries(&self) -> &BTreeMap<String, ReportValue> {
        &self.entries
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failures(&self) -> &[String] {
        &self.failures
    }

    pub fn merge(&mut self, other: Report) {
        self.entries.extend(other.entries);
        self.failures.extend(other.failures);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.entries)?)
    }
}

/// `max/min` of the positive finite entries; 1 when there are none.
pub fn drift(values: &[f64]) -> f64 {
    let v: Vec<f64> = values.iter().cloned().filter(|x| x.is_finite() && *x > 0.0).collect();
    if v.is_empty() {
        return 1.0;
    }
    v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Uniform refinements of one base mesh with a fixed data function.
#[derive(Debug, Clone)]
pub struct RunMatrix {
    pub base: Mesh,
    pub f: DataFunction,
    /// Uniform levels of the meshes; consecutive entries form the pairs.
    pub levels: Vec<usize>,
    /// Extra uniform levels of the reference mesh beyond the finest level.
    pub reference_depth: usize,
}

impl RunMatrix {
    /// Square, smooth data, levels 1 to 5, reference two levels finer.
    pub fn standard() -> Result<Self> {
        Ok(RunMatrix { base: builtin_domain(Domain::Square)?, f: DataFunction::SinSin, levels: (1..=5).collect(), reference_depth: 2 })
    }

    pub fn prepare(&self) -> Result<PreparedMatrix> {
        if self.levels.len() < 2 || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("run matrix needs at least two increasing levels".into()));
        }
        if self.reference_depth == 0 {
            return Err(Error::InvalidParameter("reference depth must be at least 1".into()));
        }
        let complexes: Vec<DeRhamComplex> = self
            .levels
            .iter()
            .map(|&l| Ok(DeRhamComplex::new(Arc::new(refine_uniform(&self.base, l)?))))
            .collect::<Result<_>>()?;
        let finest = complexes.last().expect("at least two levels").mesh();
        let reference = ReferenceSolution::new(finest, &self.f, self.reference_depth)?;
        Ok(PreparedMatrix { f: self.f.clone(), complexes, reference })
    }
}

pub struct PreparedMatrix {
    pub f: DataFunction,
    pub complexes: Vec<DeRhamComplex>,
    pub reference: ReferenceSolution,
}

impl PreparedMatrix {
    pub fn pairs(&self) -> Result<Vec<Pair<'_>>> {
        self.complexes.windows(2).map(|w| Pair::new(&w[0], &w[1], &self.f)).collect()
    }
}

pub fn suite_stability(m: &PreparedMatrix, pairs: &[Pair]) -> Result<Report> {
    let mut r = Report::default();
    let mut ratios = Vec::new();
    let mut local = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let s = verify_discrete_stability(p)?;
        r.number(format!("stability.pair{i}.difference"), s.difference);
        r.number(format!("stability.pair{i}.osc"), s.osc);
        r.number(format!("stability.pair{i}.ratio"), s.ratio);
        r.number(format!("stability.pair{i}.local_ratio_max"), s.local_ratio_max);
        ratios.push(s.ratio);
        local.push(s.local_ratio_max);
    }
    let _ = m;
    let d = drift(&ratios);
    r.number("stability.ratio_drift", d);
    r.check("stability.ratio_drift", ratios.iter().all(|x| x.is_finite()) && d <= STABILITY_DRIFT);
    r.number("stability.local_ratio_drift", drift(&local));
    r.check("stability.local_ratio_bounded", local.iter().all(|x| x.is_finite()));
    Ok(r)
}

pub fn suite_quasi(m: &PreparedMatrix, pairs: &[Pair]) -> Result<Report> {
    let mut r = Report::default();
    let q: Vec<QuasiOrthogonality> = pairs.iter().map(|p| verify_quasi_orthogonality(p, &m.reference)).collect::<Result<_>>()?;
    for (i, q) in q.iter().enumerate() {
        r.number(format!("quasi.pair{i}.normalized_inner"), q.normalized_inner);
        r.number(format!("quasi.pair{i}.required_c0"), q.required_c0);
        r.check(&format!("quasi.pair{i}.cross"), q.normalized_inner <= CROSS_TOL);
    }
    let c0 = q[0].required_c0.max(0.0) * (1.0 + SURROGATE_SLACK);
    r.number("quasi.c0", c0);
    r.number("quasi.delta", QUASI_DELTA);
    for (i, q) in q.iter().enumerate().skip(1) {
        r.check(&format!("quasi.pair{i}.inequality"), q.holds(c0, SURROGATE_SLACK));
    }
    Ok(r)
}

pub fn suite_bounds(m: &PreparedMatrix, pairs: &[Pair]) -> Result<Report> {
    let mut r = Report::default();
    let b: Vec<UpperBounds> = pairs.iter().map(|p| verify_upper_bounds(p, &m.reference, &m.f)).collect::<Result<_>>()?;
    let c: Vec<EstimatorContinuity> = pairs.iter().map(|p| verify_estimator_continuity(p, &m.f)).collect::<Result<_>>()?;
    for (i, (b, c)) in b.iter().zip(&c).enumerate() {
        r.number(format!("bounds.pair{i}.discrete_bound_ratio"), b.discrete_ratio);
        r.number(format!("bounds.pair{i}.continuous_bound_ratio"), b.continuous_ratio);
        r.number(format!("bounds.pair{i}.data_ratio"), b.data_ratio);
        r.number(format!("bounds.pair{i}.efficiency_ratio"), b.efficiency_ratio);
        r.number(format!("bounds.pair{i}.continuity_beta"), c.implied_beta);
        r.check(&format!("bounds.pair{i}.zero_eta"), b.zero_eta_exact);
    }
    let discrete: Vec<f64> = b.iter().map(|b| b.discrete_ratio).collect();
    r.number("bounds.discrete_bound_drift", drift(&discrete));
    r.check("bounds.discrete_bound_drift", discrete.iter().all(|x| x.is_finite()) && drift(&discrete) <= DISCRETE_BOUND_DRIFT);
    let c1 = b[0].continuous_ratio * (1.0 + SURROGATE_SLACK);
    r.number("bounds.c1", c1);
    r.check("bounds.continuous_bound", b.iter().all(|b| b.continuous_ratio <= c1));
    let data: Vec<f64> = b.iter().map(|b| b.data_ratio).collect();
    r.number("bounds.data_drift", drift(&data));

    // calibrated on the coarsest pair that constrains β; with none, every
    // pair holds for any β
    let betas: Vec<f64> = c.iter().map(|c| c.implied_beta).collect();
    let beta = betas.iter().find(|b| b.is_finite()).map_or(f64::INFINITY, |b| b / BETA_DRIFT);
    r.number("bounds.continuity_beta", beta);
    r.int("bounds.continuity_constraining_pairs", betas.iter().filter(|b| b.is_finite()).count() as i64);
    for (i, c) in c.iter().enumerate() {
        r.number(format!("bounds.pair{i}.continuity_root_ratio"), c.root_ratio);
    }
    r.number("bounds.continuity_beta_drift", drift(&betas));
    r.check("bounds.continuity", c.iter().all(|c| c.holds(beta)));
    r.check("bounds.continuity_beta_drift", drift(&betas) <= BETA_DRIFT);
    Ok(r)
}

/// Harmonic dimensions on the builtin domains and gaps between harmonic
/// spaces of nested meshes with holes.
pub fn suite_harmonics() -> Result<Report> {
    let mut r = Report::default();
    for (domain, expected) in [(Domain::Square, 0), (Domain::LShape, 0), (Domain::SquareOneHole, 1), (Domain::SquareTwoHoles, 2)] {
        let mesh = refine_uniform(&builtin_domain(domain)?, 1)?;
        let complex = DeRhamComplex::new(Arc::new(mesh));
        let dim = harmonic_basis(&complex, Degree::One)?.dim();
        r.int(format!("harmonics.{domain}.dim"), dim as i64);
        r.check(&format!("harmonics.{domain}.dim"), dim == expected);
    }
    for domain in [Domain::SquareOneHole, Domain::SquareTwoHoles] {
        let coarse = builtin_domain(domain)?;
        let once = bisect_all(&coarse)?;
        let twice = bisect_all(&once)?;
        let meshes = [coarse, once, twice].map(|m| DeRhamComplex::new(Arc::new(m)));
        let h0 = harmonic_basis(&meshes[0], Degree::One)?;
        for (j, fine) in meshes.iter().enumerate().skip(1) {
            let hf = harmonic_basis(fine, Degree::One)?;
            let hc = h0.prolong(&meshes[0], fine)?;
            let (ab, ba) = (subspace_gap(&hc, &hf)?, subspace_gap(&hf, &hc)?);
            r.int(format!("harmonics.{domain}.refined{j}.dim"), hf.dim() as i64);
            r.number(format!("harmonics.{domain}.refined{j}.gap"), ab);
            r.check(&format!("harmonics.{domain}.refined{j}.dim"), hf.dim() == h0.dim());
            r.check(&format!("harmonics.{domain}.refined{j}.gap_symmetric"), (ab - ba).abs() <= GAP_SYMMETRY_TOL);
            r.check(&format!("harmonics.{domain}.refined{j}.gap"), ab <= HARMONIC_GAP_MAX);
        }
    }
    Ok(r)
}

/// Random indicator vector with up to 12 entries; half the instances draw
/// small integers so that ties occur.
pub fn random_indicators(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(1..=12);
    let ties = rng.random_bool(0.5);
    (0..n).map(|_| if ties { rng.random_range(0..4) as f64 } else { rng.random::<f64>() }).collect()
}

/// Dörfler selection against the brute-force minimum cardinality.
pub fn suite_marking(seed: u64) -> Result<Report> {
    let mut r = Report::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut mismatches = 0;
    for _ in 0..MARKING_INSTANCES {
        let eta = random_indicators(&mut rng);
        if eta.iter().all(|&x| x == 0.0) {
            continue;
        }
        for theta in MARKING_THETAS {
            let greedy = dorfler_select(&eta, theta)?.len();
            let best = brute_force_min_cardinality(&eta, theta)?;
            checked += 1;
            if greedy != best {
                mismatches += 1;
            }
        }
    }
    r.int("marking.seed", seed as i64);
    r.int("marking.instances", checked);
    r.int("marking.mismatches", mismatches);
    r.check("marking.minimal", mismatches == 0 && checked > 0);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Stability,
    Quasi,
    Bounds,
    Harmonics,
    Marking,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "stability" => Suite::Stability,
            "quasi" => Suite::Quasi,
            "bounds" => Suite::Bounds,
            "harmonics" => Suite::Harmonics,
            "marking" => Suite::Marking,
            "all" => Suite::All,
            _ => return Err(Error::InvalidParameter(format!("unknown suite `{s}`"))),
        })
    }
}

/// Runs one suite, or all of them, on a run matrix.
pub fn run_suite(suite: Suite, matrix: &RunMatrix) -> Result<Report> {
    let mut r = Report::default();
    let needs_matrix = matches!(suite, Suite::Stability | Suite::Quasi | Suite::Bounds | Suite::All);
    if needs_matrix {
        let m = matrix.prepare()?;
        let pairs = m.pairs()?;
        if matches!(suite, Suite::Stability | Suite::All) {
            r.merge(suite_stability(&m, &pairs)?);
        }
        if matches!(suite, Suite::Quasi | Suite::All) {
            r.merge(suite_quasi(&m, &pairs)?);
        }
        if matches!(suite, Suite::Bounds | Suite::All) {
            r.merge(suite_bounds(&m, &pairs)?);
        }
    }
    if matches!(suite, Suite::Harmonics | Suite::All) {
        r.merge(suite_harmonics()?);
    }
    if matches!(suite, Suite::Marking | Suite::All) {
        r.merge(suite_marking(MARKING_SEED)?);
    }
    Ok(r)
}
