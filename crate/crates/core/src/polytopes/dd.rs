//! Exact double description: extreme rays of a homogeneous cone
//! {w : ⟨h_j, w⟩ ≥ 0}, used to enumerate the vertices of bounded polytopes
//! {x : ⟨r_j, x⟩ ≤ 1} that contain the origin in their interior.

use num::{BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Rows are indexed by bits of a u128, which bounds the constraint count.
pub const MAX_ROWS: usize = 127;

pub(crate) fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Rank of a list of rational row vectors.
pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        for i in r + 1..m.len() {
            if !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                for j in c..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Affine rank of a point set: the dimension of its affine hull plus one.
pub fn affine_rank(points: &[Vec<Q>]) -> usize {
    if points.is_empty() {
        return 0;
    }
    let base = &points[0];
    let diffs: Vec<Vec<Q>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    rank(&diffs) + 1
}

/// Inverse of a square rational matrix, if nonsingular.
fn invert(a: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
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
                for j in 0..2 * n {
                    let t = &f * &m[c][j];
                    m[i][j] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

struct Ray {
    w: Vec<Q>,
    zeros: u128,
}

fn normalize(w: &mut [Q]) {
    if let Some(s) = w.iter().find(|v| !v.is_zero()).map(|v| v.abs()) {
        for v in w.iter_mut() {
            *v /= &s;
        }
    }
}

/// Extreme rays of {w : ⟨h_j, w⟩ ≥ 0 for all j}, assuming the cone is
/// pointed (the rows span the space).
pub fn extreme_rays(h: &[Vec<Q>]) -> Result<Vec<Vec<Q>>> {
    if h.len() > MAX_ROWS {
        return Err(Error::ScaleExceeded {
            d: h.len(),
            max: MAX_ROWS,
        });
    }
    let n = h[0].len();
    // greedy basis of n independent rows
    let mut basis: Vec<usize> = Vec::new();
    for j in 0..h.len() {
        let mut trial: Vec<Vec<Q>> = basis.iter().map(|&b| h[b].clone()).collect();
        trial.push(h[j].clone());
        if rank(&trial) == trial.len() {
            basis.push(j);
            if basis.len() == n {
                break;
            }
        }
    }
    if basis.len() < n {
        return Err(Error::Degenerate(
            "constraint rows do not span the space".into(),
        ));
    }
    let h0: Vec<Vec<Q>> = basis.iter().map(|&b| h[b].clone()).collect();
    let inv = invert(&h0).ok_or_else(|| Error::Degenerate("singular basis".into()))?;
    let basis_mask: u128 = basis.iter().fold(0, |m, &b| m | 1u128 << b);
    let mut rays: Vec<Ray> = (0..n)
        .map(|c| {
            let mut w: Vec<Q> = (0..n).map(|r| inv[r][c].clone()).collect();
            normalize(&mut w);
            Ray {
                w,
                zeros: basis_mask & !(1u128 << basis[c]),
            }
        })
        .collect();
    for (j, row) in h.iter().enumerate() {
        if basis_mask >> j & 1 == 1 {
            continue;
        }
        let vals: Vec<Q> = rays.iter().map(|r| dot(row, &r.w)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut fresh: Vec<Ray> = Vec::new();
        for &a in &pos {
            for &b in &neg {
                let common = rays[a].zeros & rays[b].zeros;
                if (common.count_ones() as usize) + 2 < n {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(i, r)| i != a && i != b && r.zeros & common == common);
                if blocked {
                    continue;
                }
                let mut w: Vec<Q> = rays[b]
                    .w
                    .iter()
                    .zip(&rays[a].w)
                    .map(|(wb, wa)| &vals[a] * wb - &vals[b] * wa)
                    .collect();
                normalize(&mut w);
                fresh.push(Ray {
                    w,
                    zeros: common | 1u128 << j,
                });
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i].is_zero() {
                r.zeros |= 1u128 << j;
                next.push(r);
            } else if vals[i].is_positive() {
                next.push(r);
            }
        }
        next.extend(fresh);
        rays = next;
    }
    Ok(rays.into_iter().map(|r| r.w).collect())
}

/// Vertices of the bounded polytope {x : ⟨r_j, x⟩ ≤ 1}, which must contain
/// a neighbourhood of the origin.
pub fn vertices_of(rows: &[Vec<Q>]) -> Result<Vec<Vec<Q>>> {
    let d = rows[0].len();
    // homogenize: t − ⟨r, x⟩ ≥ 0 and t ≥ 0 on w = (x, t)
    let mut h: Vec<Vec<Q>> = rows
        .iter()
        .map(|r| {
            let mut v: Vec<Q> = r.iter().map(|c| -c).collect();
            v.push(Q::one());
            v
        })
        .collect();
    let mut t = vec![Q::zero(); d + 1];
    t[d] = Q::one();
    h.push(t);
    let mut out = Vec::new();
    for w in extreme_rays(&h)? {
        if !w[d].is_positive() {
            return Err(Error::Degenerate("polytope is unbounded".into()));
        }
        let x: Vec<Q> = w[..d].iter().map(|c| c / &w[d]).collect();
        out.push(x);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn square_vertices() {
        let rows = vec![
            vec![q(1), q(0)],
            vec![q(-1), q(0)],
            vec![q(0), q(1)],
            vec![q(0), q(-1)],
        ];
        let v = vertices_of(&rows).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.contains(&vec![q(1), q(-1)]));
    }

    #[test]
    fn octahedron_vertices() {
        let mut rows = Vec::new();
        for m in 0..8 {
            rows.push(
                (0..3)
                    .map(|i| if m >> i & 1 == 1 { q(-1) } else { q(1) })
                    .collect(),
            );
        }
        let v = vertices_of(&rows).unwrap();
        assert_eq!(v.len(), 6);
        assert!(v.contains(&vec![q(0), q(0), q(-1)]));
    }

    #[test]
    fn ranks() {
        let pts = vec![
            vec![q(1), q(0), q(0)],
            vec![q(0), q(1), q(0)],
            vec![q(0), q(0), q(1)],
        ];
        assert_eq!(rank(&pts), 3);
        assert_eq!(affine_rank(&pts), 3);
        assert_eq!(affine_rank(&pts[..1]), 1);
    }
}
