//! Recognition of hypersimplices δ_{n,m} = conv{t ∈ {0,1}^n : Σ t = m} up
//! to the coordinatewise normalization used for faces of the k-support
//! balls: constant coordinates are dropped, each remaining coordinate must
//! take exactly two values, which are sent to 0 and 1 in either order.

use super::Q;
use crate::sparse::binomial;

/// Whether the point set is a hypersimplex after the normalization. A
/// single point counts as one.
pub fn is_hypersimplex(points: &[Vec<Q>]) -> bool {
    labels(points, |a, b| a == b).is_some_and(|l| check(&l))
}

/// Floating-point variant; coordinates within `tol` are treated as equal.
pub fn is_hypersimplex_f64(points: &[Vec<f64>], tol: f64) -> bool {
    labels(points, |a, b| (a - b).abs() <= tol).is_some_and(|l| check(&l))
}

/// Per point, the bit pattern of which of the two values each active
/// coordinate takes; `None` if some coordinate takes three or more values.
fn labels<T: Clone, F: Fn(&T, &T) -> bool>(points: &[Vec<T>], eq: F) -> Option<Vec<Vec<bool>>> {
    let first = points.first()?;
    let d = first.len();
    let mut out = vec![Vec::new(); points.len()];
    for j in 0..d {
        let a = &points[0][j];
        let mut b: Option<&T> = None;
        let mut col = Vec::with_capacity(points.len());
        for p in points {
            if eq(&p[j], a) {
                col.push(false);
            } else {
                match b {
                    None => {
                        b = Some(&p[j]);
                        col.push(true);
                    }
                    Some(bv) if eq(&p[j], bv) => col.push(true),
                    Some(_) => return None,
                }
            }
        }
        if b.is_some() {
            for (o, c) in out.iter_mut().zip(col) {
                o.push(c);
            }
        }
    }
    Some(out)
}

fn check(labels: &[Vec<bool>]) -> bool {
    let mut distinct = labels.to_vec();
    distinct.sort();
    distinct.dedup();
    if distinct.len() != labels.len() {
        return false;
    }
    let n = labels[0].len();
    if n == 0 {
        return labels.len() == 1;
    }
    if n > 20 {
        return false;
    }
    for orient in 0..1u32 << n {
        let count = |l: &Vec<bool>| -> usize {
            l.iter()
                .enumerate()
                .filter(|(j, &b)| b != (orient >> j & 1 == 1))
                .count()
        };
        let m = count(&labels[0]);
        if m == 0 || m == n {
            continue;
        }
        if labels.iter().all(|l| count(l) == m) && labels.len() == binomial(n, m) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn simplex_is_hypersimplex() {
        let pts: Vec<Vec<Q>> = (0..4)
            .map(|i| (0..4).map(|j| q((i == j) as i64)).collect())
            .collect();
        assert!(is_hypersimplex(&pts));
    }

    #[test]
    fn square_is_not() {
        let pts = vec![
            vec![q(1), q(1)],
            vec![q(1), q(-1)],
            vec![q(-1), q(1)],
            vec![q(-1), q(-1)],
        ];
        assert!(!is_hypersimplex(&pts));
    }

    #[test]
    fn octahedron_section_is_hypersimplex() {
        // δ_{4,2} is an octahedron
        let mut pts = Vec::new();
        for a in 0..4 {
            for b in a + 1..4 {
                pts.push((0..4).map(|j| q((j == a || j == b) as i64)).collect());
            }
        }
        assert!(is_hypersimplex(&pts));
        pts.pop();
        assert!(!is_hypersimplex(&pts));
    }

    #[test]
    fn float_variant_and_point() {
        let r = 0.5f64.sqrt();
        let pts = vec![vec![r, r, 0.0], vec![r, 0.0, r], vec![0.0, r, r]];
        assert!(is_hypersimplex_f64(&pts, 1e-12));
        assert!(is_hypersimplex_f64(&pts[..1], 1e-12));
        assert!(!is_hypersimplex_f64(
            &[vec![0.0, 1.0], vec![1.0, 1.0]],
            1e-12
        ));
    }
}
