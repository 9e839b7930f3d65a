//! Exact combinatorics of the q = 1 top ball and the p = ∞ k-support ball:
//!
//!   B^top_{1,k} = conv(β_d ∪ γ_d / k),   B^sp_{∞,k} = kβ_d ∩ γ_d,
//!
//! with β_d the cross-polytope and γ_d the hypercube. The two are polar to
//! each other. The facets of B^top_{1,k} are the sets
//! conv(F(β_d, s) ∪ F(γ_d, s)/k) for sign vectors s with k nonzero entries.
//!
//! All arithmetic is over the rationals.

mod dd;
mod fan;
mod hypersimplex;

use std::collections::BTreeSet;

use num::{One, Signed};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sparse::{check_sparsity, k_subsets};

pub use dd::{affine_rank, rank, vertices_of, Q};
pub use fan::{fan_refinement_check, FanReport};
pub use hypersimplex::{is_hypersimplex, is_hypersimplex_f64};

pub type RatPoint = Vec<Q>;

/// Largest dimension accepted by the ball constructors.
pub const MAX_DIM: usize = 6;
/// Largest dimension accepted by the face enumeration.
pub const MAX_LATTICE_DIM: usize = 5;

/// The inequality ⟨normal, x⟩ ≤ offset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Facet {
    pub normal: RatPoint,
    pub offset: Q,
}

/// A full-dimensional polytope with both representations; facets are
/// normalized to offset 1 and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPolytope {
    pub dim: usize,
    pub vertices: Vec<RatPoint>,
    pub facets: Vec<Facet>,
}

pub(crate) fn point_strings(p: &[Q]) -> Vec<String> {
    p.iter().map(|c| c.to_string()).collect()
}

impl Serialize for Facet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Facet", 2)?;
        st.serialize_field("normal", &point_strings(&self.normal))?;
        st.serialize_field("offset", &self.offset.to_string())?;
        st.end()
    }
}

impl Serialize for RationalPolytope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RationalPolytope", 3)?;
        st.serialize_field("dim", &self.dim)?;
        let v: Vec<Vec<String>> = self.vertices.iter().map(|p| point_strings(p)).collect();
        st.serialize_field("vertices", &v)?;
        st.serialize_field("facets", &self.facets)?;
        st.end()
    }
}

fn tight(points: &[RatPoint], normal: &[Q]) -> Vec<RatPoint> {
    points
        .iter()
        .filter(|p| dd::dot(p, normal).is_one())
        .cloned()
        .collect()
}

impl RationalPolytope {
    /// conv(points) for a point set whose hull contains the origin in its
    /// interior. Facets come from the vertices of the polar; points that are
    /// not vertices are dropped.
    pub fn from_points(points: &[RatPoint]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        let normals = vertices_of(points)?;
        let facets: Vec<Facet> = normals
            .into_iter()
            .map(|normal| Facet {
                normal,
                offset: Q::one(),
            })
            .collect();
        let mut vertices: Vec<RatPoint> = points
            .iter()
            .filter(|p| {
                let rows: Vec<RatPoint> = facets
                    .iter()
                    .filter(|f| dd::dot(p, &f.normal).is_one())
                    .map(|f| f.normal.clone())
                    .collect();
                rank(&rows) == dim
            })
            .cloned()
            .collect();
        vertices.sort();
        vertices.dedup();
        Ok(Self {
            dim,
            vertices,
            facets,
        })
    }

    /// {x : ⟨r, x⟩ ≤ 1 for every row r} for a bounded set with the origin in
    /// its interior; redundant rows are dropped.
    pub fn from_inequalities(rows: &[RatPoint]) -> Result<Self> {
        let dim = rows.first().map_or(0, |p| p.len());
        let vertices = vertices_of(rows)?;
        let mut normals: Vec<RatPoint> = rows
            .iter()
            .filter(|r| affine_rank(&tight(&vertices, r)) == dim)
            .cloned()
            .collect();
        normals.sort();
        normals.dedup();
        let facets = normals
            .into_iter()
            .map(|normal| Facet {
                normal,
                offset: Q::one(),
            })
            .collect();
        Ok(Self {
            dim,
            vertices,
            facets,
        })
    }

    /// Vertices on the given facet.
    pub fn facet_vertices(&self, f: &Facet) -> Vec<RatPoint> {
        tight(&self.vertices, &f.normal)
    }
}

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

fn check_scale(d: usize, k: usize, max: usize) -> Result<()> {
    check_sparsity(k, d)?;
    if d > max {
        return Err(Error::ScaleExceeded { d, max });
    }
    Ok(())
}

fn signed_basis(d: usize) -> Vec<RatPoint> {
    let mut out = Vec::new();
    for i in 0..d {
        for s in [1, -1] {
            let mut e = vec![q(0); d];
            e[i] = q(s);
            out.push(e);
        }
    }
    out
}

fn scaled_cube(d: usize, k: usize) -> Vec<RatPoint> {
    let inv = Q::new(1.into(), (k as i64).into());
    (0..1u32 << d)
        .map(|m| {
            (0..d)
                .map(|i| {
                    if m >> i & 1 == 1 {
                        -inv.clone()
                    } else {
                        inv.clone()
                    }
                })
                .collect()
        })
        .collect()
}

/// B^top_{1,k} = conv(β_d ∪ γ_d / k).
pub fn top1k_ball(d: usize, k: usize) -> Result<RationalPolytope> {
    check_scale(d, k, MAX_DIM)?;
    let mut pts = signed_basis(d);
    pts.extend(scaled_cube(d, k));
    RationalPolytope::from_points(&pts)
}

/// B^sp_{∞,k} = kβ_d ∩ γ_d, from the rows ±e_i and s/k.
pub fn ksup_inf_ball(d: usize, k: usize) -> Result<RationalPolytope> {
    check_scale(d, k, MAX_DIM)?;
    let mut rows = signed_basis(d);
    rows.extend(scaled_cube(d, k));
    RationalPolytope::from_inequalities(&rows)
}

/// A vector in {−1, 0, 1}^d with exactly k nonzero entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>, k: usize) -> Result<Self> {
        if entries.iter().any(|e| !(-1..=1).contains(e)) {
            return Err(Error::Degenerate(
                "sign vector entries must lie in {-1, 0, 1}".into(),
            ));
        }
        let found = entries.iter().filter(|e| **e != 0).count();
        if found != k {
            return Err(Error::InvalidSignVector { expected: k, found });
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.0.iter().filter(|e| **e != 0).count()
    }

    pub fn as_point(&self) -> RatPoint {
        self.0.iter().map(|&e| q(e as i64)).collect()
    }

    /// All sign vectors of dimension d with k nonzero entries.
    pub fn all(d: usize, k: usize) -> Vec<SignVector> {
        let mut out = Vec::new();
        for kk in k_subsets(d, k) {
            for m in 0..1u32 << k {
                let mut e = vec![0i8; d];
                for (n, &i) in kk.indices().iter().enumerate() {
                    e[i] = if m >> n & 1 == 1 { -1 } else { 1 };
                }
                out.push(SignVector(e));
            }
        }
        out
    }
}

/// Candidate points of conv(F(β_d, s) ∪ F(γ_d, s)/k): the signed basis
/// vectors on the support of s and the cube vertices agreeing with s there,
/// scaled by 1/k.
fn facet_candidates(s: &SignVector, k: usize) -> (Vec<RatPoint>, Vec<RatPoint>) {
    let d = s.dim();
    let e = s.entries();
    let simplex: Vec<RatPoint> = (0..d)
        .filter(|&i| e[i] != 0)
        .map(|i| {
            let mut v = vec![q(0); d];
            v[i] = q(e[i] as i64);
            v
        })
        .collect();
    let cube: Vec<RatPoint> = scaled_cube(d, k)
        .into_iter()
        .filter(|v| (0..d).all(|i| e[i] == 0 || (v[i].is_positive() == (e[i] > 0))))
        .collect();
    (simplex, cube)
}

/// Vertex list of the facet of B^top_{1,k} exposed by the sign vector s.
pub fn facet_from_sign_vector(s: &SignVector, d: usize, k: usize) -> Result<Vec<RatPoint>> {
    if s.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: s.dim(),
        });
    }
    if s.nonzeros() != k {
        return Err(Error::InvalidSignVector {
            expected: k,
            found: s.nonzeros(),
        });
    }
    let ball = top1k_ball(d, k)?;
    Ok(facet_in(&ball, s, k))
}

fn facet_in(ball: &RationalPolytope, s: &SignVector, k: usize) -> Vec<RatPoint> {
    let (simplex, cube) = facet_candidates(s, k);
    let mut out: Vec<RatPoint> = simplex
        .into_iter()
        .chain(cube)
        .filter(|p| ball.vertices.binary_search(p).is_ok())
        .collect();
    // for k = d the simplex and cube candidates can coincide
    out.sort();
    out.dedup();
    out
}

/// A face given by its sorted vertex list and its dimension.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Face {
    pub dim: usize,
    pub vertices: Vec<RatPoint>,
}

impl Face {
    pub fn new(mut vertices: Vec<RatPoint>) -> Self {
        vertices.sort();
        vertices.dedup();
        let dim = affine_rank(&vertices).saturating_sub(1);
        Self { dim, vertices }
    }
}

impl Serialize for Face {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Face", 2)?;
        st.serialize_field("dim", &self.dim)?;
        let v: Vec<Vec<String>> = self.vertices.iter().map(|p| point_strings(p)).collect();
        st.serialize_field("vertices", &v)?;
        st.end()
    }
}

/// All proper faces of B^top_{1,k}, as conv(F ∪ G/k) with F a face of the
/// simplex F(β_d, s), G a face of the cube face F(γ_d, s) (either may be
/// empty but not both) and F full exactly when G is full. Sorted by
/// dimension, then vertices.
pub fn enumerate_proper_faces_top1k(d: usize, k: usize) -> Result<Vec<Face>> {
    check_scale(d, k, MAX_LATTICE_DIM)?;
    let ball = top1k_ball(d, k)?;
    let mut seen: BTreeSet<Face> = BTreeSet::new();
    for s in SignVector::all(d, k) {
        let e = s.entries().to_vec();
        let (simplex, _) = facet_candidates(&s, k);
        let free: Vec<usize> = (0..d).filter(|&i| e[i] == 0).collect();
        let nf = free.len();
        // G: ∅ or a face of the cube face, one of 3 states per free coordinate
        let mut cube_faces: Vec<Option<Vec<RatPoint>>> = vec![None];
        for code in 0..3usize.pow(nf as u32) {
            let mut state = vec![0u8; nf];
            let mut c = code;
            for st in state.iter_mut() {
                *st = (c % 3) as u8;
                c /= 3;
            }
            let pts: Vec<RatPoint> = scaled_cube(d, k)
                .into_iter()
                .filter(|v| {
                    (0..d).all(|i| e[i] == 0 || v[i].is_positive() == (e[i] > 0))
                        && free.iter().zip(&state).all(|(&i, &st)| match st {
                            1 => v[i].is_positive(),
                            2 => v[i].is_negative(),
                            _ => true,
                        })
                })
                .collect();
            cube_faces.push(Some(pts));
        }
        for fmask in 0..1u32 << simplex.len() {
            let f_full = fmask == (1u32 << simplex.len()) - 1;
            let f_pts: Vec<RatPoint> = (0..simplex.len())
                .filter(|&j| fmask >> j & 1 == 1)
                .map(|j| simplex[j].clone())
                .collect();
            for (gi, g) in cube_faces.iter().enumerate() {
                let g_full = gi == 1; // code 0 leaves every free coordinate free
                if f_full != g_full {
                    continue;
                }
                if f_pts.is_empty() && g.is_none() {
                    continue;
                }
                let mut pts = f_pts.clone();
                if let Some(g) = g {
                    pts.extend(g.iter().cloned());
                }
                let verts: Vec<RatPoint> = pts
                    .into_iter()
                    .filter(|p| ball.vertices.binary_search(p).is_ok())
                    .collect();
                if !verts.is_empty() {
                    seen.insert(Face::new(verts));
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Checks that B^top_{1,k} and B^sp_{∞,k} are polar: the facet normals of
/// each are the vertices of the other and every vertex pair satisfies
/// ⟨v, w⟩ ≤ 1.
pub fn verify_polarity(d: usize, k: usize) -> Result<bool> {
    let top = top1k_ball(d, k)?;
    let sp = ksup_inf_ball(d, k)?;
    let normals = |p: &RationalPolytope| -> Vec<RatPoint> {
        let mut n: Vec<RatPoint> = p.facets.iter().map(|f| f.normal.clone()).collect();
        n.sort();
        n
    };
    if normals(&top) != sp.vertices || normals(&sp) != top.vertices {
        return Ok(false);
    }
    let one = Q::one();
    Ok(top
        .vertices
        .iter()
        .all(|v| sp.vertices.iter().all(|w| dd::dot(v, w) <= one)))
}

/// Exact rational value of each f64 coordinate; `None` for non-finite
/// input.
pub fn to_rational(x: &[f64]) -> Option<RatPoint> {
    x.iter().map(|&c| Q::from_float(c)).collect()
}

pub fn to_f64(x: &[Q]) -> Vec<f64> {
    use num::ToPrimitive;
    x.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
}
