//! Property suites comparing the analytic paths with the brute-force
//! oracles, as run by `ksupport verify`.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::faces::{
    argmax_of_projection, exposed_face_sp, optimal_support_lattice_bounds, optimal_supports,
    projection_of_argmax,
};
use crate::norms::{ksupport_norm, ksupport_norm_oracle, lp_norm, top_norm, NormSpec};
use crate::oracles::{self, sub_seed, BruteFace, MAX_HULL_DIM};
use crate::polytopes::{
    enumerate_proper_faces_top1k, fan_refinement_check, is_hypersimplex_f64, ksup_inf_ball,
    top1k_ball, verify_polarity, SignVector, Q,
};
use crate::solver::{
    certify_optimality, solve_penalized, QuadraticObjective, SmoothObjective, SolveOptions,
};
use crate::sparse::{binomial, dot, l0, level_index, SupportSet, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Norms,
    Duality,
    Supports,
    Faces,
    Polytope,
    Solver,
    Lasso,
    Commutation,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Norms,
        Suite::Duality,
        Suite::Supports,
        Suite::Faces,
        Suite::Polytope,
        Suite::Solver,
        Suite::Lasso,
        Suite::Commutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Norms => "norms",
            Suite::Duality => "duality",
            Suite::Supports => "supports",
            Suite::Faces => "faces",
            Suite::Polytope => "polytope",
            Suite::Solver => "solver",
            Suite::Lasso => "lasso",
            Suite::Commutation => "commutation",
        }
    }

    /// Parses a suite name; "all" yields every suite.
    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Suite::ALL.to_vec());
        }
        Suite::ALL.iter().find(|x| x.name() == s).map(|x| vec![*x])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    pub d: usize,
    pub seed: u64,
}

struct Tally {
    checks: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            checks: 0,
            failures: 0,
            first: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    /// Numerical errors count as failures; input errors propagate.
    fn absorb<T>(&mut self, r: Result<T>) -> Result<Option<T>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e @ (Error::NonConvergence { .. } | Error::Degenerate(_) | Error::Infeasible)) => {
                self.check(false, || e.to_string());
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }
}

/// Runs one suite at dimension d with `trials` random instances.
pub fn run_suite(suite: Suite, d: usize, trials: usize, seed: u64) -> Result<SuiteResult> {
    if d == 0 {
        return Err(Error::EmptyVector);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, suite as u64));
    let mut t = Tally::new();
    match suite {
        Suite::Norms => norms(d, trials, &mut rng, &mut t)?,
        Suite::Duality => duality(d, trials, &mut rng, &mut t)?,
        Suite::Supports => supports(d, trials, &mut rng, &mut t)?,
        Suite::Faces => faces(d, trials, &mut rng, &mut t)?,
        Suite::Polytope => polytope(d, trials, seed, &mut rng, &mut t)?,
        Suite::Solver => solver(d, trials, &mut rng, &mut t)?,
        Suite::Lasso => lasso(d, trials, &mut rng, &mut t)?,
        Suite::Commutation => commutation(d, trials, &mut rng, &mut t)?,
    }
    Ok(SuiteResult {
        suite: suite.name(),
        passed: t.failures == 0,
        checks: t.checks,
        failures: t.failures,
        first_failure: t.first,
        d,
        seed,
    })
}

const EXPONENTS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];

fn gaussian(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn integer_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
        if y.iter().any(|v| *v != 0.0) {
            return y;
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn norms(d: usize, trials: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..trials {
        let x = gaussian(d, rng);
        let p = EXPONENTS[rng.gen_range(0..EXPONENTS.len())];
        let k = rng.gen_range(1..=d);
        let l1 = lp_norm(&x, 1.0)?;
        let v1 = ksupport_norm(&x, &NormSpec::new(1.0, k)?, Tolerance::default())?.value;
        t.check(close(v1, l1, 1e-12), || format!("p = 1 closed form at {x:?}"));
        let vk1 = ksupport_norm(&x, &NormSpec::new(p, 1)?, Tolerance::default())?.value;
        t.check(close(vk1, l1, 1e-12), || format!("k = 1 closed form at {x:?}"));
        let full = NormSpec::new(p, d)?;
        let vd = ksupport_norm(&x, &full, Tolerance::default())?.value;
        t.check(close(vd, lp_norm(&x, p)?, 1e-12), || format!("k = d closed form at {x:?}"));
        let td = top_norm(&x, &full)?;
        t.check(close(td, lp_norm(&x, full.q)?, 1e-12), || format!("top k = d at {x:?}"));
        if d <= 8 && k <= 3 && (p == 2.0 || p.is_infinite()) {
            let spec = NormSpec::new(p, k)?;
            let v = ksupport_norm(&x, &spec, Tolerance::default())?.value;
            if let Some(o) = t.absorb(ksupport_norm_oracle(&x, &spec))? {
                t.check(close(v, o.value, 1e-6), || {
                    format!("value {v} vs decomposition {} at {x:?}, p = {p}, k = {k}", o.value)
                });
            }
            if d <= MAX_HULL_DIM {
                let ub = oracles::sampled_gauge_upper_bound(&x, p, k, 2000, rng.gen())?;
                t.check(ub.payload >= v - 1e-7 * v.max(1.0), || {
                    format!("sampled gauge {} below value {v}", ub.payload)
                });
            }
        }
    }
    Ok(())
}

fn duality(d: usize, trials: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..trials {
        let x = gaussian(d, rng);
        let y = gaussian(d, rng);
        let p = EXPONENTS[rng.gen_range(0..EXPONENTS.len())];
        let spec = NormSpec::new(p, rng.gen_range(1..=d))?;
        let Some(v) = t.absorb(ksupport_norm(&x, &spec, Tolerance::default()))? else {
            continue;
        };
        let top = top_norm(&y, &spec)?;
        let pair = dot(&x, &y);
        t.check(pair <= v.value * top + 1e-9 * (1.0 + v.value * top), || {
            format!("pairing {pair} exceeds {} at p = {p}, k = {}", v.value * top, spec.k)
        });
        let a = crate::solver::lmo_sp_ball(&y, &spec)?;
        t.check(close(a.dot(&y), top, 1e-9), || format!("lmo value at {y:?}"));
        if let Some(na) = t.absorb(ksupport_norm(a.as_slice(), &spec, Tolerance::default()))? {
            t.check(close(na.value, 1.0, 1e-6), || format!("lmo atom norm {}", na.value));
        }
    }
    Ok(())
}

fn supports(d: usize, trials: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..trials {
        let y = integer_vector(d, rng);
        let p = [1.5, 2.0, 3.0][rng.gen_range(0..3)];
        let spec = NormSpec::new(p, rng.gen_range(1..=d))?;
        let fast = optimal_supports(&y, &spec, Tolerance::exact())?;
        // powers of integers may round differently across subsets
        let brute = oracles::brute_optimal_supports(&y, spec.q, spec.k, Tolerance::new(0.0, 1e-12)?)?;
        t.check(fast == brute, || format!("optimal supports of {y:?}, k = {}", spec.k));
        let (lo, hi) = optimal_support_lattice_bounds(&y, &spec, Tolerance::exact())?;
        let lev = level_index(&y, spec.k, Tolerance::exact())?;
        // without a tie at level m_k > 0 the optimal support is unique and
        // equals L̄_k, so the intersection is L̄_k rather than L_k
        let untied = lev.m_k > 0.0 && lev.weak.len() == spec.k;
        let inter = if untied { &lev.weak } else { &lev.strict };
        t.check(lo == *inter && hi == lev.weak, || {
            format!("lattice bounds of {y:?}, k = {}", spec.k)
        });
    }
    Ok(())
}

/// Hausdorff distance between two finite point sets in ℓ2.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let dist = |u: &[f64], v: &[f64]| -> f64 {
        u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    };
    let one_way = |s: &[Vec<f64>], r: &[Vec<f64>]| -> f64 {
        s.iter()
            .map(|u| r.iter().map(|v| dist(u, v)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Exposed face of the unit k-support ball (k ≤ 2) against the argmax over
/// an angular grid of `n` atoms. Samples within top(y)·h²/4 of the best are
/// kept, h being the grid spacing, so each vertex keeps its nearest
/// samples. Returns the Hausdorff distance and the worst |⟨v, y⟩ − top(y)|.
pub fn face_against_samples(y: &[f64], spec: &NormSpec, n: usize, seed: u64) -> Result<(f64, f64)> {
    let d = y.len();
    let face = exposed_face_sp(y, spec, Tolerance::default())?;
    let top = top_norm(y, spec)?;
    let verts: Vec<Vec<f64>> = face.vertices.iter().map(|v| v.as_slice().to_vec()).collect();
    let value_err = verts
        .iter()
        .map(|v| (dot(v, y) - top).abs())
        .fold(0.0, f64::max);
    let atoms = oracles::grid_sparse_atoms(d, spec.k, spec.p, n, seed)?;
    let slack = if spec.k == 1 {
        1e-12 * top
    } else {
        let per = (n / binomial(d, 2)).max(4) as f64;
        let h = std::f64::consts::TAU / per;
        top * h * h / 4.0
    };
    let hits = oracles::brute_exposed_face(&atoms, y, Tolerance::abs_only(slack))?;
    let sampled: Vec<Vec<f64>> = hits.into_iter().map(|i| atoms[i].clone()).collect();
    Ok((hausdorff(&verts, &sampled), value_err))
}

fn faces(d: usize, trials: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..trials {
        let k = rng.gen_range(1..=d.min(2));
        // non-Euclidean spheres only at generic directions, where the
        // vertices avoid the flat or kinked points of the ℓp circle
        let (p, y) = if rng.gen_bool(0.5) {
            (2.0, integer_vector(d, rng))
        } else {
            ([1.5, 2.0, 3.0][rng.gen_range(0..3)], gaussian(d, rng))
        };
        let spec = NormSpec::new(p, k)?;
        let (h, err) = face_against_samples(&y, &spec, 100_000, rng.gen())?;
        t.check(h <= 1e-3 && err <= 1e-9 * y.iter().fold(1.0f64, |m, v| m.max(v.abs())), || {
            format!("face of {y:?}, p = {p}, k = {k}: Hausdorff {h:e}, value error {err:e}")
        });
    }
    Ok(())
}

/// The k-sparse sign vectors: the inequality normals of the top-(1,k)
/// ball, and the atoms whose hull is B^sp_{∞,k}.
fn sign_points(d: usize, k: usize) -> Vec<Vec<Q>> {
    let mut v: Vec<Vec<Q>> = SignVector::all(d, k).iter().map(|s| s.as_point()).collect();
    v.sort();
    v
}

fn polytope(d: usize, trials: usize, seed: u64, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    if d > MAX_HULL_DIM {
        return Err(Error::ScaleExceeded {
            d,
            max: MAX_HULL_DIM,
        });
    }
    for k in 1..=d {
        let top = top1k_ball(d, k)?;
        let sp = ksup_inf_ball(d, k)?;
        // the top-(1,k) ball from its definition: ⟨s, x⟩ ≤ 1 for k-sparse signs
        let brute_vertices = oracles::brute_vertices_from_inequalities(&sign_points(d, k))?;
        t.check(brute_vertices == top.vertices, || format!("top1k vertices d = {d}, k = {k}"));
        let mut facets: Vec<Vec<Q>> = top.facets.iter().map(|f| f.normal.clone()).collect();
        facets.sort();
        let brute_facets = oracles::brute_hull_facets(&brute_vertices)?;
        t.check(facets == brute_facets, || format!("top1k facets d = {d}, k = {k}"));
        let signs = sign_points(d, k);
        t.check(facets == signs, || format!("facets are the sign vectors, d = {d}, k = {k}"));
        // B^sp_{∞,k} as the hull of its atoms
        let atoms = signs;
        let mut sp_facets: Vec<Vec<Q>> = sp.facets.iter().map(|f| f.normal.clone()).collect();
        sp_facets.sort();
        t.check(sp_facets == oracles::brute_hull_facets(&atoms)?, || {
            format!("ksupinf facets d = {d}, k = {k}")
        });
        t.check(sp.vertices == atoms, || format!("ksupinf vertices d = {d}, k = {k}"));
        t.check(verify_polarity(d, k)?, || format!("polarity d = {d}, k = {k}"));
        let lattice: BTreeSet<BruteFace> = enumerate_proper_faces_top1k(d, k)?
            .into_iter()
            .map(|f| BruteFace {
                dim: f.dim,
                vertices: f.vertices,
            })
            .collect();
        let brute: BTreeSet<BruteFace> = oracles::brute_face_lattice(&brute_vertices)?
            .into_iter()
            .collect();
        t.check(lattice == brute, || format!("face lattice d = {d}, k = {k}"));
    }
    for _ in 0..trials {
        let y = integer_vector(d, rng);
        let spec = NormSpec::new(2.0, rng.gen_range(1..=d))?;
        let lev = level_index(&y, spec.k, Tolerance::exact())?;
        if lev.m_k == 0.0 {
            continue;
        }
        let face = exposed_face_sp(&y, &spec, Tolerance::default())?;
        let pts: Vec<Vec<f64>> = face.vertices.iter().map(|v| v.as_slice().to_vec()).collect();
        let expected = binomial(lev.weak.len() - lev.strict.len(), spec.k - lev.strict.len());
        t.check(pts.len() == expected && is_hypersimplex_f64(&pts, 1e-9), || {
            format!("hypersimplex face of {y:?}, k = {}", spec.k)
        });
    }
    if d >= 2 {
        let r = fan_refinement_check(d, 2.min(d), 2.0, trials, seed)?;
        t.check(r.passed(), || {
            format!("fan refinement violated at {:?}", r.violating_directions)
        });
    }
    Ok(())
}

/// A random least-squares instance with m = d + 5 rows and γ a fraction of
/// the threshold top(Aᵀb) above which zero is optimal.
pub fn random_quadratic(d: usize, spec: &NormSpec, rng: &mut ChaCha8Rng) -> Result<(QuadraticObjective, f64)> {
    let m = d + 5;
    let s = (m as f64).sqrt();
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| gaussian(d, rng).into_iter().map(|v| v / s).collect())
        .collect();
    let b = gaussian(m, rng);
    let obj = QuadraticObjective::new(Some(a), b)?;
    let u: Vec<f64> = obj.gradient(&vec![0.0; d]).iter().map(|v| -v).collect();
    let gamma = top_norm(&u, spec)? * rng.gen_range(0.1..0.6);
    Ok((obj, gamma))
}

fn solver(d: usize, trials: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let opts = SolveOptions {
        tol: 1e-10,
        ..SolveOptions::default()
    };
    for _ in 0..trials {
        let p = if rng.gen_bool(0.5) { 2.0 } else { f64::INFINITY };
        let spec = NormSpec::new(p, rng.gen_range(1..=d.min(3)))?;
        let (obj, gamma) = random_quadratic(d, &spec, rng)?;
        let r = solve_penalized(&obj, gamma, &spec, &opts)?;
        t.check(r.converged && r.fw_gap <= 1e-6, || format!("gap {:e}", r.fw_gap));
        let (ok, gap) = certify_optimality(r.x_star.as_slice(), &obj, gamma, &spec, 1e-6)?;
        t.check(ok, || format!("certificate gap {gap:e}"));
        t.check(r.support.is_subset(&r.support_bound), || {
            format!("support {:?} outside bound {:?}", r.support, r.support_bound)
        });
        if r.unique_support.is_some() {
            t.check(r.support.len() <= spec.k, || format!("unique support but l0 = {}", r.support.len()));
        }
    }
    Ok(())
}

fn lasso(d: usize, trials: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let opts = SolveOptions {
        tol: 1e-10,
        ..SolveOptions::default()
    };
    for _ in 0..trials {
        let a = gaussian(d, rng);
        let amax = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gamma = rng.gen_range(0.05..1.2) * amax;
        let spec = NormSpec::new(1.0, rng.gen_range(1..=d))?;
        let obj = QuadraticObjective::denoising(a.clone())?;
        let r = solve_penalized(&obj, gamma, &spec, &opts)?;
        let exact = oracles::lasso_closed_form(&a, gamma);
        let err = r
            .x_star
            .iter()
            .zip(&exact)
            .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        t.check(err <= 1e-6, || format!("lasso error {err:e} at {a:?}, γ = {gamma}"));
        let g = obj.gradient(r.x_star.as_slice());
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let argmax = SupportSet::from_indices(
            (0..d).filter(|&i| g[i].abs() >= gmax - 1e-6 * gmax.max(1.0)),
        );
        if gmax > 0.0 {
            t.check(r.support_bound == argmax, || {
                format!("bound {:?} vs argmax {:?}", r.support_bound, argmax)
            });
        }
        t.check(l0(r.x_star.as_slice(), Tolerance::abs_only(1e-9)) <= argmax.len(), || {
            "support exceeds argmax".into()
        });
    }
    Ok(())
}

fn commutation(d: usize, trials: usize, rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let small = |rng: &mut ChaCha8Rng| -> Q { Q::new(rng.gen_range(-2i64..=2).into(), rng.gen_range(1i64..=2).into()) };
    for _ in 0..trials {
        let n = rng.gen_range(1..=8);
        let atoms: Vec<Vec<Q>> = (0..n).map(|_| (0..d).map(|_| small(rng)).collect()).collect();
        let y: Vec<Q> = (0..d).map(|_| small(rng)).collect();
        for kk in crate::sparse::k_subsets_upto(d, 2.min(d)) {
            let zero = Q::from_integer(0.into());
            let lhs: BTreeSet<Vec<Q>> = argmax_of_projection(&atoms, &kk, &y, &zero)?.into_iter().collect();
            let rhs: BTreeSet<Vec<Q>> = projection_of_argmax(&atoms, &kk, &y, &zero)?.into_iter().collect();
            let brute = oracles::brute_projected_argmax(&atoms, &kk, &y)?;
            t.check(lhs == rhs && rhs == brute, || format!("commutation on K = {kk:?}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_in_low_dimension() {
        for s in Suite::ALL {
            let r = run_suite(s, 2, 10, 0).unwrap();
            assert!(r.passed, "{r:?}");
            assert!(r.checks > 0);
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(Suite::parse("all").unwrap().len(), 8);
        assert_eq!(Suite::parse("polytope"), Some(vec![Suite::Polytope]));
        assert!(Suite::parse("nope").is_none());
    }

    #[test]
    fn polytope_scale_guard() {
        assert!(matches!(
            run_suite(Suite::Polytope, 5, 1, 0),
            Err(Error::ScaleExceeded { .. })
        ));
    }
}
