//! Vector and support primitives: supports, ℓ0 counts, coordinate
//! projections, the absolute-value sort order and the level index
//! (m_k, L_k, L̄_k) of a dual vector.
//!
//! Indices are 0-based internally and 1-based whenever a value is
//! displayed or serialized.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite vector of length at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(coords))
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d])
    }

    /// The i-th standard basis vector (0-based index).
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::IndexOutOfRange { index: i, d });
        }
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }
}

impl Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl TryFrom<&[f64]> for DenseVector {
    type Error = Error;
    fn try_from(v: &[f64]) -> Result<Self> {
        Self::new(v.to_vec())
    }
}

impl Serialize for DenseVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Self::new(v).map_err(serde::de::Error::custom)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A strictly increasing set of coordinate indices (0-based internally).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a set from 0-based indices in any order; duplicates collapse.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// Builds a set from 1-based indices, as used in external formats.
    pub fn from_one_based<I: IntoIterator<Item = usize>>(indices: I, d: usize) -> Result<Self> {
        let mut out = Vec::new();
        for i in indices {
            if i == 0 || i > d {
                return Err(Error::IndexOutOfRange { index: i, d });
            }
            out.push(i - 1);
        }
        Ok(Self::from_indices(out))
    }

    pub fn full(d: usize) -> Self {
        Self((0..d).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        Self::from_indices(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn intersection(&self, other: &SupportSet) -> SupportSet {
        Self(
            self.0
                .iter()
                .copied()
                .filter(|&i| other.contains(i))
                .collect(),
        )
    }

    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        Self(
            self.0
                .iter()
                .copied()
                .filter(|&i| !other.contains(i))
                .collect(),
        )
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for SupportSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SupportSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        if v.contains(&0) {
            return Err(serde::de::Error::custom("support indices are 1-based"));
        }
        Ok(Self::from_indices(v.into_iter().map(|i| i - 1)))
    }
}

/// Absolute and relative tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs.is_finite() && rel.is_finite() && abs >= 0.0 && rel >= 0.0) {
            return Err(Error::InvalidTolerance);
        }
        Ok(Self { abs, rel })
    }

    pub const fn exact() -> Self {
        Self { abs: 0.0, rel: 0.0 }
    }

    pub const fn abs_only(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-9,
            rel: 1e-9,
        }
    }
}

/// The level index of a dual vector at sparsity k.
///
/// `m_k` is the k-th largest absolute value, `strict` the indices strictly
/// above it (L_k) and `weak` the indices at or above it (L̄_k).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelIndexData {
    pub m_k: f64,
    pub strict: SupportSet,
    pub weak: SupportSet,
}

pub fn support_of(x: &[f64], tol: Tolerance) -> SupportSet {
    SupportSet(
        x.iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > tol.abs)
            .map(|(i, _)| i)
            .collect(),
    )
}

pub fn l0(x: &[f64], tol: Tolerance) -> usize {
    x.iter().filter(|v| v.abs() > tol.abs).count()
}

pub fn project_support(x: &[f64], k: &SupportSet) -> Result<DenseVector> {
    let d = x.len();
    if let Some(m) = k.max_index() {
        if m >= d {
            return Err(Error::IndexOutOfRange { index: m + 1, d });
        }
    }
    let mut out = vec![0.0; d];
    for &i in k.indices() {
        out[i] = x[i];
    }
    DenseVector::new(out)
}

/// Projection onto the coordinates of `k` without range checks; indices of
/// `k` must be below `x.len()`.
pub(crate) fn project_unchecked(x: &[f64], k: &SupportSet) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for &i in k.indices() {
        out[i] = x[i];
    }
    out
}

/// Permutation ν (0-based) with |y_ν(0)| ≥ |y_ν(1)| ≥ …; ties keep ascending
/// index order.
pub fn abs_sort_permutation(y: &[f64]) -> Vec<usize> {
    let mut nu: Vec<usize> = (0..y.len()).collect();
    nu.sort_by(|&a, &b| y[b].abs().total_cmp(&y[a].abs()).then(a.cmp(&b)));
    nu
}

pub fn check_sparsity(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::InvalidSparsity { k, d });
    }
    Ok(())
}

pub fn level_index(y: &[f64], k: usize, tol: Tolerance) -> Result<LevelIndexData> {
    let d = y.len();
    check_sparsity(k, d)?;
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let nu = abs_sort_permutation(y);
    let mut m = y[nu[k - 1]].abs();
    if m <= tol.abs {
        m = 0.0;
    }
    let strict = SupportSet((0..d).filter(|&i| y[i].abs() > m + tol.abs).collect());
    let weak = if m == 0.0 {
        SupportSet::full(d)
    } else {
        SupportSet((0..d).filter(|&i| y[i].abs() >= m - tol.abs).collect())
    };
    Ok(LevelIndexData {
        m_k: m,
        strict,
        weak,
    })
}

/// All subsets of `{0..d}` with exactly `k` elements, in lexicographic order.
pub fn k_subsets(d: usize, k: usize) -> Vec<SupportSet> {
    let mut out = Vec::new();
    if k > d {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(SupportSet(cur.clone()));
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < d - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All subsets with at most `k` elements, ordered by size then
/// lexicographically.
pub fn k_subsets_upto(d: usize, k: usize) -> Vec<SupportSet> {
    (0..=k.min(d)).flat_map(|j| k_subsets(d, j)).collect()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[usize]) -> SupportSet {
        SupportSet::from_one_based(v.iter().copied(), 10).unwrap()
    }

    #[test]
    fn support_examples() {
        assert_eq!(support_of(&[0.0, 0.0, 0.0], Tolerance::exact()), s(&[]));
        assert_eq!(
            support_of(&[3.0, 0.0, -2.0], Tolerance::exact()),
            s(&[1, 3])
        );
        assert_eq!(
            support_of(&[1e-12, 1.0, 0.0], Tolerance::abs_only(1e-9)),
            s(&[2])
        );
        assert_eq!(l0(&[1.0, 1.0, 1.0, 1.0], Tolerance::exact()), 4);
        assert_eq!(l0(&[3.0, 0.0, -2.0], Tolerance::exact()), 2);
    }

    #[test]
    fn projection_examples() {
        let x = [5.0, 6.0, 7.0];
        assert_eq!(
            project_support(&x, &s(&[1, 3])).unwrap().as_slice(),
            &[5.0, 0.0, 7.0]
        );
        assert_eq!(
            project_support(&x, &s(&[])).unwrap().as_slice(),
            &[0.0, 0.0, 0.0]
        );
        assert_eq!(project_support(&x, &s(&[1, 2, 3])).unwrap().as_slice(), &x);
        assert!(matches!(
            project_support(&x, &s(&[4])),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn sort_examples() {
        assert_eq!(abs_sort_permutation(&[3.0, -1.0, 2.0]), vec![0, 2, 1]);
        assert_eq!(abs_sort_permutation(&[0.0, 0.0, 0.0]), vec![0, 1, 2]);
        assert_eq!(abs_sort_permutation(&[2.0, 2.0, 5.0]), vec![2, 0, 1]);
    }

    #[test]
    fn level_index_examples() {
        let t = Tolerance::default();
        let a = level_index(&[3.0, 2.0, 2.0, 1.0], 2, t).unwrap();
        assert_eq!((a.m_k, a.strict, a.weak), (2.0, s(&[1]), s(&[1, 2, 3])));
        let b = level_index(&[1.0, 1.0, 1.0], 1, t).unwrap();
        assert_eq!((b.m_k, b.strict, b.weak), (1.0, s(&[]), s(&[1, 2, 3])));
        let c = level_index(&[5.0, 0.0, 0.0], 2, t).unwrap();
        assert_eq!((c.m_k, c.strict, c.weak), (0.0, s(&[1]), s(&[1, 2, 3])));
        assert_eq!(level_index(&[0.0, 0.0], 1, t), Err(Error::ZeroVector));
        assert!(level_index(&[1.0], 2, t).is_err());
    }

    #[test]
    fn subsets_examples() {
        assert_eq!(k_subsets(3, 2), vec![s(&[1, 2]), s(&[1, 3]), s(&[2, 3])]);
        assert_eq!(k_subsets(3, 0), vec![SupportSet::empty()]);
        assert_eq!(k_subsets(4, 2).len(), 6);
        assert_eq!(k_subsets_upto(4, 2).len(), 1 + 4 + 6);
        assert_eq!(binomial(6, 3), 20);
    }

    #[test]
    fn one_based_serialization() {
        let k = s(&[1, 3]);
        assert_eq!(serde_json::to_string(&k).unwrap(), "[1,3]");
        let back: SupportSet = serde_json::from_str("[3,1]").unwrap();
        assert_eq!(back, k);
        assert_eq!(k.to_string(), "{1,3}");
    }
}
