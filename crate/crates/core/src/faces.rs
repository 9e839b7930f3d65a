//! Exposed faces and normal cones of the k-support unit ball.
//!
//! A dual vector y exposes the face of B^sp spanned by the points
//! v_p(π_K y) over its optimal supports K, i.e. the supports |K| ≤ k that
//! maximize ‖π_K y‖_q. For ℓp sources those supports are exactly the sets
//! L_k(y) ⊆ K ⊆ L̄_k(y) with |K| = k, or any superset of supp(y) when m_k = 0.
//!
//! The finite-atom engine at the end works for an arbitrary finite atom set
//! X and any ordered field, so the commutation of projections with argmax
//! can be checked in exact arithmetic.

use std::ops::{Add, Mul, Sub};

use num::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{lp, NormSpec};
use crate::sparse::{
    k_subsets, level_index, project_unchecked, DenseVector, LevelIndexData, SupportSet, Tolerance,
};

/// Vertices of an exposed face together with the supports generating them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceDescription {
    pub vertices: Vec<DenseVector>,
    pub generating_supports: Vec<SupportSet>,
    pub dual: DenseVector,
}

/// Base z of a normal cone with its level index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalConeDescription {
    pub base: DenseVector,
    pub level: LevelIndexData,
}

impl NormalConeDescription {
    /// Validates z ≠ 0 and z = π_{L̄_k(z)} z.
    pub fn new(z: &[f64], spec: &NormSpec, tol: Tolerance) -> Result<Self> {
        let level = level_index(z, spec.k, tol)?;
        let outside = (0..z.len())
            .filter(|i| !level.weak.contains(*i))
            .any(|i| z[i].abs() > tol.abs);
        if outside {
            return Err(Error::InvalidConeBase);
        }
        Ok(Self {
            base: DenseVector::new(z.to_vec())?,
            level,
        })
    }
}

fn check_dual(y: &[f64], spec: &NormSpec) -> Result<()> {
    spec.check_dim(y.len())?;
    if let Some(index) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

/// All |K| ≤ k maximizing ‖π_K y‖_q, in lexicographic order.
///
/// For p = 1 (q = ∞) these are the sets meeting argmax |y_i|; otherwise the
/// level-index characterization applies, so only the tie group is
/// enumerated.
pub fn optimal_supports(y: &[f64], spec: &NormSpec, tol: Tolerance) -> Result<Vec<SupportSet>> {
    check_dual(y, spec)?;
    let d = y.len();
    let k = spec.k;
    let mut out = Vec::new();
    if spec.q.is_infinite() {
        let top = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let arg = SupportSet::from_indices((0..d).filter(|&i| y[i].abs() >= top - tol.abs));
        for j in 1..=k {
            out.extend(
                k_subsets(d, j)
                    .into_iter()
                    .filter(|kk| !kk.intersection(&arg).is_empty()),
            );
        }
        out.sort();
        return Ok(out);
    }
    let level = level_index(y, k, tol)?;
    let free = level.weak.difference(&level.strict);
    let free_idx = free.indices();
    let need = k - level.strict.len();
    let sizes: Vec<usize> = if level.m_k == 0.0 {
        (0..=need).collect()
    } else {
        vec![need]
    };
    for j in sizes {
        for pick in k_subsets(free_idx.len(), j) {
            let chosen = pick.indices().iter().map(|&n| free_idx[n]);
            out.push(level.strict.union(&SupportSet::from_indices(chosen)));
        }
    }
    out.sort();
    Ok(out)
}

/// The point of the unit ℓp sphere exposed by y: same signs as y and
/// |z_i| = (|y_i| / ‖y‖_q)^{q/p}.
pub fn v_p(y: &[f64], p: f64) -> Result<DenseVector> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::UnsupportedExponent(p));
    }
    if y.is_empty() {
        return Err(Error::EmptyVector);
    }
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    DenseVector::new(v_p_unchecked(y, p))
}

pub(crate) fn v_p_unchecked(y: &[f64], p: f64) -> Vec<f64> {
    let q = crate::norms::conjugate(p);
    let nq = lp(y, q);
    if p == 2.0 {
        return y.iter().map(|c| c / nq).collect();
    }
    let e = q / p;
    y.iter()
        .map(|c| c.signum() * (c.abs() / nq).powf(e))
        .map(|c| if c.is_nan() { 0.0 } else { c })
        .collect()
}

/// Exposed face of B^sp_{p,k} in direction y for 1 < p < ∞.
///
/// Vertices closer than `tol.abs` in ℓ∞ are merged, keeping the one from
/// the lexicographically smallest support.
pub fn exposed_face_sp(y: &[f64], spec: &NormSpec, tol: Tolerance) -> Result<FaceDescription> {
    if !spec.is_interior_p() {
        return Err(Error::UnsupportedExponent(spec.p));
    }
    let supports = optimal_supports(y, spec, tol)?;
    let mut vertices: Vec<DenseVector> = Vec::new();
    let mut generating = Vec::new();
    for kk in supports {
        let v = v_p_unchecked(&project_unchecked(y, &kk), spec.p);
        let dup = vertices
            .iter()
            .any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= tol.abs));
        if !dup {
            vertices.push(DenseVector::new(v)?);
            generating.push(kk);
        }
    }
    Ok(FaceDescription {
        vertices,
        generating_supports: generating,
        dual: DenseVector::new(y.to_vec())?,
    })
}

/// Whether y lies in the (pre-closure) normal cone with base z: some
/// positive multiple y' of y has π_{L̄_k(z)} y' = z and L̄_k(y') = L̄_k(z).
pub fn normal_cone_membership(
    z: &[f64],
    y: &[f64],
    spec: &NormSpec,
    tol: Tolerance,
) -> Result<bool> {
    let cone = NormalConeDescription::new(z, spec, tol)?;
    if y.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            got: y.len(),
        });
    }
    let weak = &cone.level.weak;
    let py = project_unchecked(y, weak);
    let npy = lp(&py, 2.0);
    if npy == 0.0 {
        return Ok(false);
    }
    let alpha = lp(z, 2.0) / npy;
    let scale = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let matches = py
        .iter()
        .zip(z)
        .all(|(a, b)| (alpha * a - b).abs() <= tol.abs * scale);
    if !matches {
        return Ok(false);
    }
    let scaled: Vec<f64> = y.iter().map(|c| alpha * c).collect();
    Ok(level_index(&scaled, spec.k, tol)?.weak == *weak)
}

/// (∩ K*, ∪ K*) over the optimal supports of y.
pub fn optimal_support_lattice_bounds(
    y: &[f64],
    spec: &NormSpec,
    tol: Tolerance,
) -> Result<(SupportSet, SupportSet)> {
    let supports = optimal_supports(y, spec, tol)?;
    let mut inter = supports[0].clone();
    let mut union = SupportSet::empty();
    for kk in &supports {
        inter = inter.intersection(kk);
        union = union.union(kk);
    }
    Ok((inter, union))
}

/// Union of the optimal supports of y: contains the support of every point
/// of the face exposed by y.
pub fn support_bound_from_dual(y: &[f64], spec: &NormSpec, tol: Tolerance) -> Result<SupportSet> {
    Ok(optimal_support_lattice_bounds(y, spec, tol)?.1)
}

/// Ordered-field scalars accepted by the finite-atom engine.
pub trait Scalar:
    Clone + PartialOrd + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone + PartialOrd + Zero + Add<Output = T> + Sub<Output = T> + Mul<Output = T>
{
}

fn dot_s<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn project_s<T: Scalar>(x: &[T], kk: &SupportSet) -> Vec<T> {
    (0..x.len())
        .map(|i| {
            if kk.contains(i) {
                x[i].clone()
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Indices of the points of `atoms` maximizing ⟨·, y⟩, with values within
/// `tol` of the maximum counted as ties.
pub fn argmax_indices<T: Scalar>(atoms: &[Vec<T>], y: &[T], tol: &T) -> Vec<usize> {
    let vals: Vec<T> = atoms.iter().map(|a| dot_s(a, y)).collect();
    let mut best = vals[0].clone();
    for v in &vals[1..] {
        if *v > best {
            best = v.clone();
        }
    }
    let floor = best - tol.clone();
    (0..vals.len()).filter(|&j| vals[j] >= floor).collect()
}

fn push_unique<T: PartialEq>(out: &mut Vec<Vec<T>>, v: Vec<T>) {
    if !out.contains(&v) {
        out.push(v);
    }
}

/// argmax over π_K(X) of ⟨·, y⟩, as a set of distinct points.
pub fn argmax_of_projection<T: Scalar>(
    atoms: &[Vec<T>],
    kk: &SupportSet,
    y: &[T],
    tol: &T,
) -> Result<Vec<Vec<T>>> {
    if atoms.is_empty() {
        return Err(Error::EmptyAtomSet);
    }
    let projected: Vec<Vec<T>> = atoms.iter().map(|a| project_s(a, kk)).collect();
    let mut out = Vec::new();
    for j in argmax_indices(&projected, y, tol) {
        push_unique(&mut out, projected[j].clone());
    }
    Ok(out)
}

/// π_K applied to argmax over X of ⟨·, π_K y⟩, as a set of distinct points.
pub fn projection_of_argmax<T: Scalar>(
    atoms: &[Vec<T>],
    kk: &SupportSet,
    y: &[T],
    tol: &T,
) -> Result<Vec<Vec<T>>> {
    if atoms.is_empty() {
        return Err(Error::EmptyAtomSet);
    }
    let py = project_s(y, kk);
    let mut out = Vec::new();
    for j in argmax_indices(atoms, &py, tol) {
        push_unique(&mut out, project_s(&atoms[j], kk));
    }
    Ok(out)
}

/// Face data of conv Atom_k(X) in direction y for a finite atom set X.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFace<T> {
    /// The optimal supports K*, lexicographically ordered.
    pub supports: Vec<SupportSet>,
    /// ∪_{K*} π_{K*}(argmax_{x∈X} ⟨x, π_{K*} y⟩), the k-sparse points of the
    /// face; the face is their convex hull.
    pub points: Vec<Vec<T>>,
}

/// K* = argmax over |K| ≤ k of max_{x∈X} ⟨x, π_K y⟩, and the face points
/// generated by them.
pub fn atomset_face<T: Scalar>(
    atoms: &[Vec<T>],
    k: usize,
    y: &[T],
    tol: &T,
) -> Result<AtomFace<T>> {
    if atoms.is_empty() {
        return Err(Error::EmptyAtomSet);
    }
    let d = y.len();
    if let Some(a) = atoms.iter().find(|a| a.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a.len(),
        });
    }
    crate::sparse::check_sparsity(k, d)?;
    let mut scored: Vec<(SupportSet, T)> = Vec::new();
    for j in 0..=k {
        for kk in k_subsets(d, j) {
            let py = project_s(y, &kk);
            let mut best = dot_s(&atoms[0], &py);
            for a in &atoms[1..] {
                let v = dot_s(a, &py);
                if v > best {
                    best = v;
                }
            }
            scored.push((kk, best));
        }
    }
    let mut top = scored[0].1.clone();
    for (_, v) in &scored[1..] {
        if *v > top {
            top = v.clone();
        }
    }
    let floor = top - tol.clone();
    let mut supports: Vec<SupportSet> = scored
        .into_iter()
        .filter(|(_, v)| *v >= floor)
        .map(|(kk, _)| kk)
        .collect();
    supports.sort();
    let mut points = Vec::new();
    for kk in &supports {
        for v in projection_of_argmax(atoms, kk, y, tol)? {
            push_unique(&mut points, v);
        }
    }
    Ok(AtomFace { supports, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn spec(p: f64, k: usize) -> NormSpec {
        NormSpec::new(p, k).unwrap()
    }

    fn sets(v: &[&[usize]]) -> Vec<SupportSet> {
        v.iter()
            .map(|s| SupportSet::from_one_based(s.iter().copied(), 10).unwrap())
            .collect()
    }

    #[test]
    fn optimal_supports_examples() {
        let t = Tolerance::default();
        let s = optimal_supports(&[3.0, 2.0, 2.0, 1.0], &spec(2.0, 2), t).unwrap();
        assert_eq!(s, sets(&[&[1, 2], &[1, 3]]));
        let s = optimal_supports(&[5.0, 0.0, 0.0], &spec(3.0, 1), t).unwrap();
        assert_eq!(s, sets(&[&[1]]));
        let s = optimal_supports(&[1.0, 1.0, 1.0], &spec(2.0, 2), t).unwrap();
        assert_eq!(s, sets(&[&[1, 2], &[1, 3], &[2, 3]]));
        assert_eq!(
            optimal_supports(&[0.0, 0.0], &spec(2.0, 1), t),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn zero_level_admits_smaller_supports() {
        let s = optimal_supports(&[5.0, 0.0, 0.0], &spec(2.0, 2), Tolerance::default()).unwrap();
        assert_eq!(s, sets(&[&[1], &[1, 2], &[1, 3]]));
    }

    #[test]
    fn v_p_examples() {
        let z = v_p(&[3.0, -4.0], 2.0).unwrap();
        assert_eq!(z.as_slice(), &[0.6, -0.8]);
        let z = v_p(&[0.0, -2.5, 0.0], 3.0).unwrap();
        assert_eq!(z.as_slice(), &[0.0, -1.0, 0.0]);
        let z = v_p(&[1.0, 1.0], 4.0).unwrap();
        let expect = (1.0 / 2f64.powf(0.75)).powf(1.0 / 3.0);
        assert!((z[0] - expect).abs() < 1e-15 && (z[1] - expect).abs() < 1e-15);
        assert!((lp(&z, 4.0) - 1.0).abs() < 1e-12);
        assert!((z[0] + z[1] - lp(&[1.0, 1.0], 4.0 / 3.0)).abs() < 1e-12);
        assert!(v_p(&[1.0], 1.0).is_err());
    }

    #[test]
    fn exposed_face_examples() {
        let t = Tolerance::default();
        let f = exposed_face_sp(&[3.0, 0.0, 0.0], &spec(2.0, 2), t).unwrap();
        assert_eq!(f.vertices.len(), 1);
        assert_eq!(f.vertices[0].as_slice(), &[1.0, 0.0, 0.0]);
        let f = exposed_face_sp(&[1.0, 1.0, 1.0], &spec(2.0, 2), t).unwrap();
        let r = 0.5f64.sqrt();
        let expect = [[r, r, 0.0], [r, 0.0, r], [0.0, r, r]];
        assert_eq!(f.vertices.len(), 3);
        for (v, e) in f.vertices.iter().zip(&expect) {
            assert!(v.iter().zip(e).all(|(a, b)| (a - b).abs() < 1e-15));
        }
        let f = exposed_face_sp(&[2.0, 1.0, 0.0], &spec(2.0, 2), t).unwrap();
        assert_eq!(f.vertices.len(), 1);
        let s5 = 5f64.sqrt();
        assert!((f.vertices[0][0] - 2.0 / s5).abs() < 1e-15);
    }

    #[test]
    fn normal_cone_examples() {
        let t = Tolerance::default();
        let s = spec(2.0, 1);
        assert!(normal_cone_membership(&[1.0, 0.0], &[1.0, 0.0], &s, t).unwrap());
        assert!(normal_cone_membership(&[1.0, 0.0], &[2.0, 1.0], &s, t).unwrap());
        assert!(!normal_cone_membership(&[1.0, 0.0], &[1.0, 1.0], &s, t).unwrap());
        let s2 = spec(2.0, 2);
        assert_eq!(
            normal_cone_membership(&[3.0, 2.0, 1.0], &[1.0, 0.0, 0.0], &s2, t),
            Err(Error::InvalidConeBase)
        );
    }

    #[test]
    fn lattice_bounds_examples() {
        let t = Tolerance::default();
        let s = spec(2.0, 2);
        let (l, u) = optimal_support_lattice_bounds(&[3.0, 2.0, 2.0, 1.0], &s, t).unwrap();
        assert_eq!(
            (l, u),
            (sets(&[&[1]])[0].clone(), sets(&[&[1, 2, 3]])[0].clone())
        );
        let (l, u) = optimal_support_lattice_bounds(&[1.0, 1.0, 1.0], &s, t).unwrap();
        assert!(l.is_empty() && u == SupportSet::full(3));
        let b = support_bound_from_dual(&[5.0, 0.0, 0.0], &spec(2.0, 1), t).unwrap();
        assert_eq!(b, sets(&[&[1]])[0]);
    }

    #[test]
    fn atomset_face_examples() {
        let x = vec![vec![1.0, 1.0]];
        let f = atomset_face(&x, 1, &[1.0, 0.0], &0.0).unwrap();
        assert_eq!(f.supports, sets(&[&[1]]));
        assert_eq!(f.points, vec![vec![1.0, 0.0]]);
        let sphere = vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
            vec![0.6, 0.8],
        ];
        let f = atomset_face(&sphere, 1, &[1.0, 0.0], &0.0).unwrap();
        assert_eq!(f.points, vec![vec![1.0, 0.0]]);
        assert!(atomset_face::<f64>(&[], 1, &[1.0], &0.0).is_err());
    }

    #[test]
    fn commutation_in_exact_arithmetic() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let x = vec![
            vec![r(1, 3), r(1, 6), r(-1, 2)],
            vec![r(1, 2), r(0, 1), r(2, 7)],
            vec![r(1, 2), r(-3, 5), r(0, 1)],
        ];
        let y = vec![r(1, 1), r(0, 1), r(1, 1)];
        let zero = r(0, 1);
        for j in 0..=2 {
            for kk in k_subsets(3, j) {
                let mut a = argmax_of_projection(&x, &kk, &y, &zero).unwrap();
                let mut b = projection_of_argmax(&x, &kk, &y, &zero).unwrap();
                a.sort();
                b.sort();
                assert_eq!(a, b, "K = {kk}");
            }
        }
    }
}
