//! The thirteen acceptance criteria, each printed as one PASS/FAIL line.
//!
//! Criterion 6 checks the optimal-support lattice identity exactly as
//! stated and fails: with no tie at level m_k > 0 the optimal support is
//! unique and equals L̄_k, so the intersection is L̄_k rather than L_k. The
//! test records that failure, and separately checks that every
//! counterexample is of that kind and that the corrected identity holds.

use std::collections::BTreeSet;
use std::time::Instant;

use ksupport::faces::{
    argmax_of_projection, exposed_face_sp, optimal_support_lattice_bounds, projection_of_argmax,
};
use ksupport::norms::{
    ksupport_norm, ksupport_norm_dual_ascent, ksupport_norm_oracle, lp_norm, top_norm, NormSpec,
};
use ksupport::oracles::{self, BruteFace};
use ksupport::polytopes::{
    enumerate_proper_faces_top1k, facet_from_sign_vector, fan_refinement_check,
    is_hypersimplex_f64, ksup_inf_ball, top1k_ball, verify_polarity, SignVector, Q,
};
use ksupport::solver::{
    certify_optimality, lmo_sp_ball, solve_penalized, QuadraticObjective, SmoothObjective,
    SolveOptions,
};
use ksupport::sparse::{binomial, dot, k_subsets_upto, l0, level_index, SupportSet, Tolerance};
use ksupport::verify::{face_against_samples, random_quadratic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const EXPONENTS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
const INTERIOR: [f64; 3] = [1.5, 2.0, 3.0];

/// Criteria expected to fail, with the reason recorded alongside the
/// lattice check.
const EXPECTED_FAILURES: [usize; 1] = [6];

struct Outcome {
    passed: bool,
    detail: String,
}

/// Counts checks and keeps the first failure.
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

    fn outcome(self) -> Outcome {
        let detail = match self.first {
            None => format!("{} checks", self.checks),
            Some(f) => format!("{}/{} checks failed; first: {f}", self.failures, self.checks),
        };
        Outcome {
            passed: self.failures == 0,
            detail,
        }
    }
}

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x6b73_7570 ^ criterion)
}

fn gaussian(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn integer_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..d).map(|_| f64::from(rng.gen_range(-3i32..=3))).collect();
        if y.iter().any(|v| *v != 0.0) {
            return y;
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, c| m.max(c.abs()))
}

fn spec(p: f64, k: usize) -> NormSpec {
    NormSpec::new(p, k).unwrap()
}

fn c1_closed_forms() -> Outcome {
    let mut rng = rng(1);
    let mut t = Tally::new();
    let tol = Tolerance::default();
    for _ in 0..200 {
        let d = rng.gen_range(2..=8);
        let x = gaussian(d, &mut rng);
        let p = EXPONENTS[rng.gen_range(0..EXPONENTS.len())];
        let k = rng.gen_range(1..=d);
        let l1 = lp_norm(&x, 1.0).unwrap();
        let cases = [
            ("ksupport p = 1", ksupport_norm(&x, &spec(1.0, k), tol).unwrap().value, l1),
            ("ksupport k = 1", ksupport_norm(&x, &spec(p, 1), tol).unwrap().value, l1),
            ("top k = 1", top_norm(&x, &spec(p, 1)).unwrap(), max_abs(&x)),
            (
                "ksupport k = d",
                ksupport_norm(&x, &spec(p, d), tol).unwrap().value,
                lp_norm(&x, p).unwrap(),
            ),
            (
                "top k = d",
                top_norm(&x, &spec(p, d)).unwrap(),
                lp_norm(&x, spec(p, d).q).unwrap(),
            ),
        ];
        for (what, got, want) in cases {
            t.check(rel_err(got, want) <= 1e-12, || {
                format!("{what} at p = {p}: {got} vs {want}")
            });
        }
    }
    t.outcome()
}

fn c2_infinity_closed_form() -> Outcome {
    let mut rng = rng(2);
    let mut t = Tally::new();
    for _ in 0..100 {
        let d = rng.gen_range(2..=6);
        let k = rng.gen_range(1..=d.min(3));
        let x = gaussian(d, &mut rng);
        let s = spec(f64::INFINITY, k);
        let v = ksupport_norm(&x, &s, Tolerance::default()).unwrap().value;
        let formula = (lp_norm(&x, 1.0).unwrap() / k as f64).max(max_abs(&x));
        t.check(v == formula, || format!("value {v} vs formula {formula}"));
        let o = ksupport_norm_oracle(&x, &s).unwrap().value;
        t.check((v - o).abs() <= 1e-6, || format!("value {v} vs oracle {o} at {x:?}"));
    }
    t.outcome()
}

fn c3_dual_ascent() -> Outcome {
    let mut rng = rng(3);
    let mut t = Tally::new();
    let tol = Tolerance::default();
    for _ in 0..100 {
        let d = rng.gen_range(2..=6);
        let k = rng.gen_range(1..=d.min(3));
        let x = gaussian(d, &mut rng);
        let s = spec(2.0, k);
        let v = ksupport_norm_dual_ascent(&x, &s, tol, true).unwrap().value;
        let o = ksupport_norm_oracle(&x, &s).unwrap().value;
        t.check((v - o).abs() <= 1e-6, || format!("dual ascent {v} vs oracle {o} at {x:?}, k = {k}"));
    }
    for d in 2..=6 {
        for k in 1..=d.min(3) {
            let ones = vec![1.0; d];
            let want = d as f64 / (k as f64).sqrt();
            let v = ksupport_norm_dual_ascent(&ones, &spec(2.0, k), tol, true).unwrap().value;
            t.check((v - want).abs() <= 1e-8, || format!("all-ones d = {d}, k = {k}: {v} vs {want}"));
        }
    }
    t.outcome()
}

fn c4_duality() -> Outcome {
    let mut rng = rng(4);
    let mut t = Tally::new();
    let tol = Tolerance::default();
    for i in 0..10_000 {
        let d = rng.gen_range(2..=6);
        let p = EXPONENTS[i % EXPONENTS.len()];
        let k = rng.gen_range(1..=d);
        let s = spec(p, k);
        let x = gaussian(d, &mut rng);
        let y = gaussian(d, &mut rng);
        let v = ksupport_norm(&x, &s, tol).unwrap().value;
        let top = top_norm(&y, &s).unwrap();
        let pair = dot(&x, &y);
        t.check(pair - v * top <= 1e-9 * (1.0 + v * top), || {
            format!("pairing {pair} exceeds {} at p = {p}, k = {k}", v * top)
        });
    }
    // equality at the Hölder maximizer, normalized to the unit ball
    for _ in 0..500 {
        let d = rng.gen_range(2..=6);
        let p = INTERIOR[rng.gen_range(0..INTERIOR.len())];
        let s = spec(p, rng.gen_range(1..=d));
        let y = gaussian(d, &mut rng);
        let x = lmo_sp_ball(&y, &s).unwrap();
        let v = ksupport_norm(x.as_slice(), &s, tol).unwrap().value;
        let top = top_norm(&y, &s).unwrap();
        let gap = (x.dot(&y) - v * top).abs();
        t.check(gap <= 1e-6 * (1.0 + top), || format!("equality gap {gap:e} at p = {p}"));
    }
    t.outcome()
}

fn c5_faces() -> Outcome {
    let mut rng = rng(5);
    let mut t = Tally::new();
    for _ in 0..200 {
        let d = rng.gen_range(2..=6);
        let k = rng.gen_range(1..=d.min(2));
        // integer directions carry the ties; the curved spheres are
        // sampled at Gaussian directions
        let (p, y) = if rng.gen_bool(0.5) {
            (2.0, integer_vector(d, &mut rng))
        } else {
            (INTERIOR[rng.gen_range(0..INTERIOR.len())], gaussian(d, &mut rng))
        };
        let (h, err) = face_against_samples(&y, &spec(p, k), 100_000, rng.gen()).unwrap();
        t.check(h <= 1e-3, || format!("Hausdorff {h:e} at {y:?}, p = {p}, k = {k}"));
        t.check(err <= 1e-9 * max_abs(&y).max(1.0), || format!("value error {err:e} at {y:?}"));
    }
    t.outcome()
}

/// Returns the literal outcome, and whether every counterexample is an
/// untied level with the corrected identity holding on every sample.
fn c6_lattice() -> (Outcome, bool) {
    let mut rng = rng(6);
    let mut t = Tally::new();
    let mut corrected_ok = true;
    let mut untied_violations = 0;
    for _ in 0..500 {
        let d = rng.gen_range(2..=8);
        let y = integer_vector(d, &mut rng);
        let s = spec(INTERIOR[rng.gen_range(0..INTERIOR.len())], rng.gen_range(1..=d));
        let (lo, hi) = optimal_support_lattice_bounds(&y, &s, Tolerance::exact()).unwrap();
        let lev = level_index(&y, s.k, Tolerance::exact()).unwrap();
        let literal = lo == lev.strict && hi == lev.weak;
        let untied = lev.m_k > 0.0 && lev.weak.len() == s.k;
        t.check(literal, || {
            format!("y = {y:?}, k = {}: intersection {lo:?} vs L_k {:?}", s.k, lev.strict)
        });
        if !literal && untied {
            untied_violations += 1;
        }
        let inter = if untied { &lev.weak } else { &lev.strict };
        corrected_ok &= lo == *inter && hi == lev.weak;
    }
    let explained = corrected_ok && untied_violations == t.failures;
    let mut o = t.outcome();
    o.detail = format!(
        "{}; untied counterexamples {untied_violations}, corrected identity {}",
        o.detail,
        if corrected_ok { "holds" } else { "fails" }
    );
    (o, explained)
}

fn sign_points(d: usize, k: usize) -> Vec<Vec<Q>> {
    let mut v: Vec<Vec<Q>> = SignVector::all(d, k).iter().map(|s| s.as_point()).collect();
    v.sort();
    v
}

fn sorted_normals(normals: impl Iterator<Item = Vec<Q>>) -> Vec<Vec<Q>> {
    let mut v: Vec<Vec<Q>> = normals.collect();
    v.sort();
    v
}

fn tight(points: &[Vec<Q>], normal: &[Q]) -> Vec<Vec<Q>> {
    let one = Q::from_integer(1.into());
    let mut out: Vec<Vec<Q>> = points
        .iter()
        .filter(|p| p.iter().zip(normal).map(|(a, b)| a * b).sum::<Q>() == one)
        .cloned()
        .collect();
    out.sort();
    out
}

fn c7_polytopes() -> Outcome {
    let mut t = Tally::new();
    let top = top1k_ball(3, 2).unwrap();
    let sp = ksup_inf_ball(3, 2).unwrap();
    t.check(top.facets.len() == 12, || format!("top ball has {} facets", top.facets.len()));
    t.check(sp.vertices.len() == 12, || format!("ksupinf ball has {} vertices", sp.vertices.len()));
    for d in 1..=4 {
        for k in 1..=d {
            let brute_vertices = oracles::brute_vertices_from_inequalities(&sign_points(d, k)).unwrap();
            let brute_facets = oracles::brute_hull_facets(&brute_vertices).unwrap();
            let brute_sets: BTreeSet<Vec<Vec<Q>>> =
                brute_facets.iter().map(|n| tight(&brute_vertices, n)).collect();
            let sign_vector_sets: BTreeSet<Vec<Vec<Q>>> = SignVector::all(d, k)
                .iter()
                .map(|s| facet_from_sign_vector(s, d, k).unwrap())
                .collect();
            t.check(sign_vector_sets == brute_sets, || format!("top facets d = {d}, k = {k}"));
            let sp = ksup_inf_ball(d, k).unwrap();
            let sp_facets = sorted_normals(sp.facets.iter().map(|f| f.normal.clone()));
            t.check(sp_facets == oracles::brute_hull_facets(&sign_points(d, k)).unwrap(), || {
                format!("ksupinf facets d = {d}, k = {k}")
            });
            t.check(verify_polarity(d, k).unwrap(), || format!("polarity d = {d}, k = {k}"));
        }
    }
    t.outcome()
}

fn c8_lattice() -> Outcome {
    let mut t = Tally::new();
    for d in 1..=4 {
        for k in 1..=d {
            let ours: BTreeSet<BruteFace> = enumerate_proper_faces_top1k(d, k)
                .unwrap()
                .into_iter()
                .map(|f| BruteFace {
                    dim: f.dim,
                    vertices: f.vertices,
                })
                .collect();
            let vertices = oracles::brute_vertices_from_inequalities(&sign_points(d, k)).unwrap();
            let brute: BTreeSet<BruteFace> =
                oracles::brute_face_lattice(&vertices).unwrap().into_iter().collect();
            t.check(ours == brute, || {
                format!("d = {d}, k = {k}: {} faces vs {}", ours.len(), brute.len())
            });
        }
    }
    t.outcome()
}

fn c9_hypersimplex() -> Outcome {
    let mut rng = rng(9);
    let mut t = Tally::new();
    let mut tested = 0;
    for _ in 0..500 {
        let d = rng.gen_range(2..=5);
        let y = integer_vector(d, &mut rng);
        let s = spec(2.0, rng.gen_range(1..=d));
        let lev = level_index(&y, s.k, Tolerance::exact()).unwrap();
        if lev.m_k == 0.0 {
            continue;
        }
        tested += 1;
        let face = exposed_face_sp(&y, &s, Tolerance::default()).unwrap();
        let pts: Vec<Vec<f64>> = face.vertices.iter().map(|v| v.as_slice().to_vec()).collect();
        let want = binomial(lev.weak.len() - lev.strict.len(), s.k - lev.strict.len());
        t.check(pts.len() == want, || format!("{y:?}, k = {}: {} vertices vs {want}", s.k, pts.len()));
        t.check(is_hypersimplex_f64(&pts, 1e-9), || format!("{y:?}, k = {} not a hypersimplex", s.k));
    }
    let mut o = t.outcome();
    o.detail = format!("{} ({tested} faces with m_k > 0)", o.detail);
    o
}

fn c10_fan() -> Outcome {
    let r = fan_refinement_check(3, 2, 2.0, 1000, 10).unwrap();
    Outcome {
        passed: r.passed() && r.samples == 1000,
        detail: format!(
            "{} directions, {} generators, {} violations",
            r.samples, r.generators_checked, r.violations
        ),
    }
}

fn c11_solver() -> Outcome {
    let mut rng = rng(11);
    let mut t = Tally::new();
    // solved well below the criterion so the certificate is read at 1e-6
    let opts = SolveOptions {
        tol: 1e-10,
        ..SolveOptions::default()
    };
    let mut unique = 0;
    for _ in 0..50 {
        let d = rng.gen_range(2..=10);
        let p = if rng.gen_bool(0.5) { 2.0 } else { f64::INFINITY };
        let s = spec(p, rng.gen_range(1..=d.min(3)));
        let (obj, gamma) = random_quadratic(d, &s, &mut rng).unwrap();
        let r = solve_penalized(&obj, gamma, &s, &opts).unwrap();
        t.check(r.converged && r.fw_gap <= 1e-6, || format!("gap {:e} after {}", r.fw_gap, r.iterations));
        let (ok, gap) = certify_optimality(r.x_star.as_slice(), &obj, gamma, &s, 1e-6).unwrap();
        t.check(ok, || format!("certificate gap {gap:e}"));
        t.check(r.support.is_subset(&r.support_bound), || {
            format!("support {:?} outside bound {:?}", r.support, r.support_bound)
        });
        if r.unique_support.is_some() {
            unique += 1;
            t.check(r.support.len() <= s.k, || format!("unique support, l0 = {}", r.support.len()));
        }
    }
    let mut o = t.outcome();
    o.detail = format!("{} ({unique} runs with a unique support)", o.detail);
    o
}

fn c12_lasso() -> Outcome {
    let mut rng = rng(12);
    let mut t = Tally::new();
    let opts = SolveOptions {
        tol: 1e-10,
        ..SolveOptions::default()
    };
    for _ in 0..100 {
        let d = rng.gen_range(2..=8);
        let a = gaussian(d, &mut rng);
        let gamma = rng.gen_range(0.05..1.2) * max_abs(&a);
        let s = spec(1.0, rng.gen_range(1..=d));
        let obj = QuadraticObjective::denoising(a.clone()).unwrap();
        let r = solve_penalized(&obj, gamma, &s, &opts).unwrap();
        let exact = oracles::lasso_closed_form(&a, gamma);
        let err = r.x_star.iter().zip(&exact).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        t.check(err <= 1e-6, || format!("error {err:e} at {a:?}, γ = {gamma}"));
        let g = obj.gradient(r.x_star.as_slice());
        let gmax = max_abs(&g);
        let argmax =
            SupportSet::from_indices((0..d).filter(|&i| g[i].abs() >= gmax - 1e-6 * gmax.max(1.0)));
        t.check(r.support_bound == argmax, || {
            format!("bound {:?} vs argmax {argmax:?}", r.support_bound)
        });
        t.check(l0(r.x_star.as_slice(), Tolerance::abs_only(1e-9)) <= argmax.len(), || {
            "support exceeds the argmax".into()
        });
    }
    t.outcome()
}

fn small_rationals(d: usize, rng: &mut ChaCha8Rng) -> Vec<Q> {
    (0..d)
        .map(|_| Q::new(rng.gen_range(-3i64..=3).into(), rng.gen_range(1i64..=3).into()))
        .collect()
}

fn c13_commutation() -> Outcome {
    let mut rng = rng(13);
    let mut t = Tally::new();
    let zero = Q::from_integer(0.into());
    for _ in 0..500 {
        let d = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=8);
        let atoms: Vec<Vec<Q>> = (0..n).map(|_| small_rationals(d, &mut rng)).collect();
        let y = small_rationals(d, &mut rng);
        for kk in k_subsets_upto(d, d.min(2)) {
            let lhs: BTreeSet<Vec<Q>> =
                argmax_of_projection(&atoms, &kk, &y, &zero).unwrap().into_iter().collect();
            let rhs: BTreeSet<Vec<Q>> =
                projection_of_argmax(&atoms, &kk, &y, &zero).unwrap().into_iter().collect();
            let brute = oracles::brute_projected_argmax(&atoms, &kk, &y).unwrap();
            t.check(lhs == rhs && rhs == brute, || format!("K = {kk:?}, y = {y:?}"));
        }
    }
    t.outcome()
}

#[test]
fn acceptance_criteria() {
    let start = Instant::now();
    let (lattice, lattice_explained) = c6_lattice();
    let runs: Vec<(usize, &str, Box<dyn FnOnce() -> Outcome>)> = vec![
        (1, "closed-form degeneracies", Box::new(c1_closed_forms)),
        (2, "p = ∞ closed form vs decomposition", Box::new(c2_infinity_closed_form)),
        (3, "dual ascent vs decomposition", Box::new(c3_dual_ascent)),
        (4, "duality pairing", Box::new(c4_duality)),
        (5, "exposed faces vs sampled atoms", Box::new(c5_faces)),
        (6, "optimal-support lattice", Box::new(move || lattice)),
        (7, "polytope combinatorics", Box::new(c7_polytopes)),
        (8, "face lattice of the top-(1,k) ball", Box::new(c8_lattice)),
        (9, "hypersimplex faces", Box::new(c9_hypersimplex)),
        (10, "normal-fan refinement", Box::new(c10_fan)),
        (11, "solver and support identification", Box::new(c11_solver)),
        (12, "ℓ1 specialization", Box::new(c12_lasso)),
        (13, "projection/argmax commutation", Box::new(c13_commutation)),
    ];
    let mut failed = BTreeSet::new();
    for (n, name, run) in runs {
        let t0 = Instant::now();
        let o = run();
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {n:2} {status} {name}: {} [{:.1}s]",
            o.detail,
            t0.elapsed().as_secs_f64()
        );
        if !o.passed {
            failed.insert(n);
        }
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    let expected: BTreeSet<usize> = EXPECTED_FAILURES.into_iter().collect();
    assert_eq!(failed, expected, "failing criteria differ from the documented set");
    assert!(
        lattice_explained,
        "lattice counterexamples are not all untied levels"
    );
}
