//! Brute-force ground truth for tests and `verify`: exhaustive argmax over
//! vertex lists and supports, sampled atomic gauges, hulls and face lattices
//! by subset enumeration, and the soft-threshold closed form.
//!
//! Nothing here calls the faces, norms, polytopes or solver modules.

use std::collections::BTreeSet;

use num::{BigRational, One, Signed, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{linprog, LpError};
use crate::sparse::{k_subsets, k_subsets_upto, SupportSet, Tolerance};

type Q = BigRational;

/// Exhaustive searches refuse dimensions above this.
pub const MAX_ORACLE_DIM: usize = 8;
/// Hull, lattice and gauge oracles enumerate subsets of points and stop here.
pub const MAX_HULL_DIM: usize = 4;

/// An oracle result with the parameters needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport<T> {
    pub payload: T,
    pub method: &'static str,
    pub d: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
}

/// The i-th splitmix64 output after `seed`, used as an independent sub-seed
/// per sample.
pub fn sub_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn guard(d: usize, max: usize) -> Result<()> {
    if d > max {
        return Err(Error::ScaleExceeded { d, max });
    }
    Ok(())
}

fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::InvalidSparsity { k, d });
    }
    Ok(())
}

/// Indices of the vertices maximizing ⟨v, y⟩, within `tol.abs + tol.rel·|max|`.
pub fn brute_exposed_face(vertices: &[Vec<f64>], y: &[f64], tol: Tolerance) -> Result<Vec<usize>> {
    if vertices.is_empty() {
        return Err(Error::EmptyAtomSet);
    }
    let vals: Vec<f64> = vertices
        .iter()
        .map(|v| {
            if v.len() != y.len() {
                return Err(Error::DimensionMismatch {
                    expected: y.len(),
                    got: v.len(),
                });
            }
            Ok(v.iter().zip(y).map(|(a, b)| a * b).sum())
        })
        .collect::<Result<_>>()?;
    let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let slack = tol.abs + tol.rel * best.abs();
    Ok((0..vals.len()).filter(|&i| vals[i] >= best - slack).collect())
}

/// Exact counterpart of [`brute_exposed_face`].
pub fn brute_exposed_face_exact(vertices: &[Vec<Q>], y: &[Q]) -> Result<Vec<usize>> {
    if vertices.is_empty() {
        return Err(Error::EmptyAtomSet);
    }
    let vals: Vec<Q> = vertices.iter().map(|v| qdot(v, y)).collect();
    let best = vals.iter().max().expect("nonempty").clone();
    Ok((0..vals.len()).filter(|&i| vals[i] == best).collect())
}

/// Σ_{i∈K} |y_i|^q, or max_{i∈K} |y_i| for q = ∞. Comparing powers avoids
/// rounding in the root.
fn powered(y: &[f64], kk: &SupportSet, q: f64) -> f64 {
    let it = kk.indices().iter().map(|&i| y[i].abs());
    if q.is_infinite() {
        it.fold(0.0, f64::max)
    } else {
        it.map(|a| a.powf(q)).sum()
    }
}

/// All K with |K| ≤ k maximizing ‖π_K y‖_q, found by enumeration. Values
/// within `tol.abs + tol.rel·max` of the maximum (compared as q-th powers)
/// count as optimal.
pub fn brute_optimal_supports(y: &[f64], q: f64, k: usize, tol: Tolerance) -> Result<Vec<SupportSet>> {
    let d = y.len();
    if d == 0 {
        return Err(Error::EmptyVector);
    }
    guard(d, MAX_ORACLE_DIM)?;
    check_k(k, d)?;
    if !(q >= 1.0) {
        return Err(Error::InvalidExponent(q));
    }
    let all = k_subsets_upto(d, k);
    let vals: Vec<f64> = all.iter().map(|kk| powered(y, kk, q)).collect();
    let best = vals.iter().cloned().fold(0.0, f64::max);
    let slack = tol.abs + tol.rel * best;
    let mut out: Vec<SupportSet> = all
        .into_iter()
        .zip(vals)
        .filter(|(_, v)| *v >= best - slack)
        .map(|(kk, _)| kk)
        .collect();
    out.sort();
    Ok(out)
}

/// Minimizer of ½‖x − a‖² + γ‖x‖₁: sign(a_i)·max(|a_i| − γ, 0).
pub fn lasso_closed_form(a: &[f64], gamma: f64) -> Vec<f64> {
    a.iter()
        .map(|&v| v.signum() * (v.abs() - gamma).max(0.0))
        .collect()
}

fn lp_local(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, a| m.max(a.abs()))
    } else {
        v.iter().map(|a| a.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// `n` random unit ℓp vectors supported on uniformly random k-subsets. Each
/// atom draws from its own sub-seed.
pub fn sample_sparse_atoms(d: usize, k: usize, p: f64, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_k(k, d)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    Ok((0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, i as u64));
            let mut a = vec![0.0; d];
            loop {
                for j in sample(&mut rng, d, k) {
                    a[j] = rng.sample(StandardNormal);
                }
                let s = lp_local(&a, p);
                if s > 0.0 {
                    a.iter_mut().for_each(|c| *c /= s);
                    return a;
                }
            }
        })
        .collect())
}

/// Unit ℓp atoms on every support of size k ≤ 2, about `n` in total: ±e_i
/// for k = 1, and for k = 2 an evenly spaced angular grid with a random
/// phase on each support circle, scaled onto the ℓp sphere.
pub fn grid_sparse_atoms(d: usize, k: usize, p: f64, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_k(k, d)?;
    if k > 2 {
        return Err(Error::InvalidSparsity { k, d });
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let mut out = Vec::new();
    if k == 1 {
        for i in 0..d {
            for s in [1.0, -1.0] {
                let mut a = vec![0.0; d];
                a[i] = s;
                out.push(a);
            }
        }
        return Ok(out);
    }
    let supports = k_subsets(d, 2);
    let per = (n / supports.len()).max(4);
    for (si, kk) in supports.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, si as u64));
        let phase: f64 = rng.gen_range(0.0..1.0);
        let (i, j) = (kk.indices()[0], kk.indices()[1]);
        for t in 0..per {
            let th = std::f64::consts::TAU * (t as f64 + phase) / per as f64;
            let (c, s) = (th.cos(), th.sin());
            let r = lp_local(&[c, s], p);
            let mut a = vec![0.0; d];
            a[i] = c / r;
            a[j] = s / r;
            out.push(a);
        }
    }
    Ok(out)
}

/// Upper bound on the k-support norm of x: the least total weight of a
/// nonnegative combination of sampled atoms (and their negatives) equal to
/// x, by linear programming. Tightens as the sample grows.
pub fn sampled_gauge_upper_bound(
    x: &[f64],
    p: f64,
    k: usize,
    atom_samples: usize,
    seed: u64,
) -> Result<OracleReport<f64>> {
    let d = x.len();
    if d == 0 {
        return Err(Error::EmptyVector);
    }
    guard(d, MAX_HULL_DIM)?;
    let atoms = sample_sparse_atoms(d, k, p, atom_samples, seed)?;
    gauge_over(x, &atoms, k, seed)
}

/// The same bound over a caller-supplied atom list.
pub fn gauge_over(x: &[f64], atoms: &[Vec<f64>], k: usize, seed: u64) -> Result<OracleReport<f64>> {
    let d = x.len();
    let report = |v: f64| OracleReport {
        payload: v,
        method: "sampled atomic gauge (linear program)",
        d,
        k,
        samples: atoms.len(),
        seed,
    };
    if x.iter().all(|v| *v == 0.0) {
        return Ok(report(0.0));
    }
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(2 * atoms.len());
    for a in atoms {
        if a.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.len(),
            });
        }
        columns.push(a.clone());
        columns.push(a.iter().map(|c| -c).collect());
    }
    let cost = vec![1.0; columns.len()];
    match linprog(&columns, &cost, x) {
        Ok(sol) => Ok(report(sol.objective)),
        Err(LpError::Infeasible) => Err(Error::Infeasible),
        Err(_) => Err(Error::NonConvergence {
            what: "gauge linear program",
            iterations: 0,
            gap: f64::INFINITY,
        }),
    }
}

fn qdot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Solution of the square system A a = b, if A is nonsingular.
fn qsolve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut r = r.clone();
            r.push(v.clone());
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, piv);
        let inv = m[c][c].recip();
        for v in m[c].iter_mut() {
            *v *= &inv;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..=n {
                    let t = &f * &m[c][j];
                    m[i][j] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

fn qrank(rows: &[Vec<Q>]) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        for i in r + 1..m.len() {
            let f = &m[i][c] / &m[r][c];
            for j in c..cols {
                let t = &f * &m[r][j];
                m[i][j] -= t;
            }
        }
        r += 1;
    }
    r
}

/// Dimension of the affine hull of a nonempty point set.
pub fn brute_affine_dim(points: &[Vec<Q>]) -> usize {
    let diffs: Vec<Vec<Q>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect())
        .collect();
    qrank(&diffs)
}

fn subsets_of(n: usize, r: usize) -> Vec<Vec<usize>> {
    k_subsets(n, r)
        .into_iter()
        .map(|s| s.indices().to_vec())
        .collect()
}

/// Facet normals a, with facets {x : ⟨a, x⟩ = 1}, of the convex hull of
/// points whose hull contains the origin in its interior. Every d-subset of
/// points spanning a hyperplane off the origin is tested for having all
/// points on one side.
pub fn brute_hull_facets(points: &[Vec<Q>]) -> Result<Vec<Vec<Q>>> {
    let d = points.first().ok_or(Error::EmptyAtomSet)?.len();
    guard(d, MAX_HULL_DIM)?;
    let one = Q::one();
    let ones = vec![one.clone(); d];
    let mut out: BTreeSet<Vec<Q>> = BTreeSet::new();
    for idx in subsets_of(points.len(), d) {
        let rows: Vec<Vec<Q>> = idx.iter().map(|&i| points[i].clone()).collect();
        let Some(a) = qsolve(&rows, &ones) else {
            continue;
        };
        if points.iter().all(|p| qdot(&a, p) <= one) {
            out.insert(a);
        }
    }
    // a hyperplane through d points may still meet the hull in a lower
    // dimensional face when the points are affinely dependent
    Ok(out
        .into_iter()
        .filter(|a| {
            let tight: Vec<Vec<Q>> = points.iter().filter(|p| qdot(a, p) == one).cloned().collect();
            brute_affine_dim(&tight) + 1 == d
        })
        .collect())
}

/// Vertices of {x : ⟨r, x⟩ ≤ 1 for every row r}: solutions of every d × d
/// subsystem that satisfy all rows.
pub fn brute_vertices_from_inequalities(rows: &[Vec<Q>]) -> Result<Vec<Vec<Q>>> {
    let d = rows.first().ok_or(Error::EmptyAtomSet)?.len();
    guard(d, MAX_HULL_DIM)?;
    let one = Q::one();
    let ones = vec![one.clone(); d];
    let mut out: BTreeSet<Vec<Q>> = BTreeSet::new();
    for idx in subsets_of(rows.len(), d) {
        let sub: Vec<Vec<Q>> = idx.iter().map(|&i| rows[i].clone()).collect();
        if let Some(x) = qsolve(&sub, &ones) {
            if rows.iter().all(|r| qdot(r, &x) <= one) {
                out.insert(x);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// A face of a hull as its sorted vertex list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BruteFace {
    pub dim: usize,
    pub vertices: Vec<Vec<Q>>,
}

/// All proper faces of conv(points), as the closure of the facets' vertex
/// sets under intersection. Points that are not vertices are dropped.
pub fn brute_face_lattice(points: &[Vec<Q>]) -> Result<Vec<BruteFace>> {
    let facets = brute_hull_facets(points)?;
    let one = Q::one();
    let tight: Vec<BTreeSet<usize>> = facets
        .iter()
        .map(|a| (0..points.len()).filter(|&i| qdot(a, &points[i]) == one).collect())
        .collect();
    let mut faces: BTreeSet<BTreeSet<usize>> = tight.iter().cloned().collect();
    let mut frontier: Vec<BTreeSet<usize>> = faces.iter().cloned().collect();
    while let Some(f) = frontier.pop() {
        for t in &tight {
            let g: BTreeSet<usize> = f.intersection(t).cloned().collect();
            if !g.is_empty() && faces.insert(g.clone()) {
                frontier.push(g);
            }
        }
    }
    // a point is a vertex exactly when it is a face on its own
    let is_vertex: Vec<bool> = (0..points.len())
        .map(|i| faces.contains(&BTreeSet::from([i])))
        .collect();
    let mut out: BTreeSet<BruteFace> = BTreeSet::new();
    for f in faces {
        let mut vs: Vec<Vec<Q>> = f
            .into_iter()
            .filter(|&i| is_vertex[i])
            .map(|i| points[i].clone())
            .collect();
        vs.sort();
        vs.dedup();
        if !vs.is_empty() {
            out.insert(BruteFace {
                dim: brute_affine_dim(&vs),
                vertices: vs,
            });
        }
    }
    Ok(out.into_iter().collect())
}

/// Integer vector as rationals.
pub fn rationals(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&c| Q::from_integer(c.into())).collect()
}

/// Exact argmax set {a ∈ atoms : ⟨a, y⟩ maximal}, for the commutation
/// check of finite atom sets.
pub fn brute_atom_argmax(atoms: &[Vec<Q>], y: &[Q]) -> Result<BTreeSet<Vec<Q>>> {
    Ok(brute_exposed_face_exact(atoms, y)?
        .into_iter()
        .map(|i| atoms[i].clone())
        .collect())
}

/// π_K of every atom in the argmax of ⟨·, π_K y⟩ over the atoms.
pub fn brute_projected_argmax(atoms: &[Vec<Q>], kk: &SupportSet, y: &[Q]) -> Result<BTreeSet<Vec<Q>>> {
    let proj = |v: &[Q]| -> Vec<Q> {
        v.iter()
            .enumerate()
            .map(|(i, c)| if kk.contains(i) { c.clone() } else { Q::zero() })
            .collect()
    };
    let py = proj(y);
    Ok(brute_exposed_face_exact(atoms, &py)?
        .into_iter()
        .map(|i| proj(&atoms[i]))
        .collect())
}

/// Largest |v_i| among the coordinates, exactly.
pub fn max_abs(v: &[Q]) -> Q {
    v.iter().map(|c| c.abs()).max().unwrap_or_else(Q::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn exposed_face_examples() {
        let square = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        assert_eq!(brute_exposed_face(&square, &[1.0, 0.0], Tolerance::exact()).unwrap(), vec![0, 1]);
        let cross: Vec<Vec<f64>> = (0..6)
            .map(|j| {
                let mut v = vec![0.0; 3];
                v[j / 2] = if j % 2 == 0 { 1.0 } else { -1.0 };
                v
            })
            .collect();
        assert_eq!(brute_exposed_face(&cross, &[1.0, 1.0, 0.0], Tolerance::exact()).unwrap(), vec![0, 2]);
        assert_eq!(brute_exposed_face(&cross, &[0.0; 3], Tolerance::exact()).unwrap().len(), 6);
        assert!(brute_exposed_face(&[], &[1.0], Tolerance::exact()).is_err());
    }

    #[test]
    fn optimal_support_examples() {
        let s = brute_optimal_supports(&[3.0, 2.0, 2.0, 1.0], 2.0, 2, Tolerance::exact()).unwrap();
        assert_eq!(s, vec![SupportSet::from_indices([0, 1]), SupportSet::from_indices([0, 2])]);
        let s = brute_optimal_supports(&[3.0, 1.0, 0.0], 2.0, 2, Tolerance::exact()).unwrap();
        assert_eq!(s, vec![SupportSet::from_indices([0, 1])]);
        let s = brute_optimal_supports(&[1.0, 0.0, 0.0], 2.0, 2, Tolerance::exact()).unwrap();
        assert_eq!(s.len(), 3);
        assert!(brute_optimal_supports(&[0.0; 9], 2.0, 2, Tolerance::exact()).is_err());
    }

    #[test]
    fn lasso_examples() {
        assert_eq!(lasso_closed_form(&[2.0, 1.0, 0.0], 1.5), vec![0.5, 0.0, 0.0]);
        assert_eq!(lasso_closed_form(&[2.0, -1.0], 0.0), vec![2.0, -1.0]);
        assert!(lasso_closed_form(&[2.0, -1.0], 2.0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gauge_examples() {
        let atoms = sample_sparse_atoms(3, 2, 2.0, 50, 4).unwrap();
        let r = gauge_over(&atoms[7], &atoms, 2, 4).unwrap();
        assert!((r.payload - 1.0).abs() < 1e-9);
        let r = sampled_gauge_upper_bound(&[1.0, 1.0, 1.0], 2.0, 2, 20_000, 1).unwrap();
        let exact = 3.0 / 2f64.sqrt();
        assert!(r.payload >= exact - 1e-9 && r.payload <= exact + 1e-3, "{}", r.payload);
        assert_eq!(sampled_gauge_upper_bound(&[0.0; 3], 2.0, 2, 10, 0).unwrap().payload, 0.0);
        assert!(sampled_gauge_upper_bound(&[0.0; 5], 2.0, 2, 10, 0).is_err());
    }

    #[test]
    fn grid_atoms_lie_on_the_sphere() {
        for a in grid_sparse_atoms(3, 2, 3.0, 300, 2).unwrap() {
            assert!((lp_local(&a, 3.0) - 1.0).abs() < 1e-12);
            assert!(a.iter().filter(|c| **c != 0.0).count() <= 2);
        }
        assert_eq!(grid_sparse_atoms(3, 1, 2.0, 10, 0).unwrap().len(), 6);
    }

    #[test]
    fn cube_hull_and_lattice() {
        let mut cube = Vec::new();
        for m in 0..8 {
            cube.push((0..3).map(|i| if m >> i & 1 == 1 { q(-1) } else { q(1) }).collect::<Vec<_>>());
        }
        assert_eq!(brute_hull_facets(&cube).unwrap().len(), 6);
        let lattice = brute_face_lattice(&cube).unwrap();
        let count = |dim| lattice.iter().filter(|f| f.dim == dim).count();
        assert_eq!((count(0), count(1), count(2)), (8, 12, 6));
        // the cross polytope from its inequalities
        let v = brute_vertices_from_inequalities(&cube).unwrap();
        assert_eq!(v.len(), 6);
    }

    #[test]
    fn non_vertices_are_dropped() {
        let mut pts = vec![
            rationals(&[1, 1]),
            rationals(&[1, -1]),
            rationals(&[-1, 1]),
            rationals(&[-1, -1]),
        ];
        pts.push(rationals(&[1, 0]));
        let lattice = brute_face_lattice(&pts).unwrap();
        assert_eq!(lattice.len(), 8);
        assert!(lattice.iter().all(|f| !f.vertices.contains(&rationals(&[1, 0]))));
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(0, 0), sub_seed(0, 1));
        assert_eq!(sub_seed(5, 3), sub_seed(5, 3));
        assert_eq!(max_abs(&rationals(&[2, -3])), q(3));
    }
}
