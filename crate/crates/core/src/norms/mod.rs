//! ℓp norms, the top-(q,k) norm and its dual, the k-support norm with ℓp
//! source.
//!
//! The k-support norm has closed forms for p = 1, p = ∞, k = 1 and k = d.
//! Elsewhere it is evaluated by projected gradient ascent of ⟨x,·⟩ over the
//! top ball, with an upper bound from an explicit atomic decomposition so the
//! returned value carries a certified gap.

mod decomposition;
mod dual_ascent;
pub mod projection;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sparse::{abs_sort_permutation, check_sparsity, DenseVector, Tolerance};

pub use decomposition::ksupport_norm_oracle;
pub use dual_ascent::ksupport_norm_dual_ascent;

/// Source exponent p, its conjugate q and the sparsity level k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub p: f64,
    pub q: f64,
    pub k: usize,
}

impl NormSpec {
    pub fn new(p: f64, k: usize) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if k == 0 {
            return Err(Error::InvalidSparsity { k, d: 0 });
        }
        Ok(Self {
            p,
            q: conjugate(p),
            k,
        })
    }

    /// Checks k ≤ d for a vector of dimension d.
    pub fn check_dim(&self, d: usize) -> Result<()> {
        check_sparsity(self.k, d)
    }

    pub fn is_interior_p(&self) -> bool {
        self.p > 1.0 && self.p.is_finite()
    }
}

/// Hölder conjugate: 1/p + 1/q = 1.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Parses an exponent: "inf", an integer, a decimal or a ratio "a/b".
pub fn parse_exponent(s: &str) -> Result<f64> {
    let t = s.trim();
    let v = match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        other => {
            if let Some((a, b)) = other.split_once('/') {
                let a = f64::from_str(a.trim()).map_err(|_| Error::InvalidExponent(f64::NAN))?;
                let b = f64::from_str(b.trim()).map_err(|_| Error::InvalidExponent(f64::NAN))?;
                a / b
            } else {
                f64::from_str(other).map_err(|_| Error::InvalidExponent(f64::NAN))?
            }
        }
    };
    if v.is_nan() || v < 1.0 {
        return Err(Error::InvalidExponent(v));
    }
    Ok(v)
}

/// How a norm value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    DualAscent,
    DecompositionOracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::DualAscent => "dual_ascent",
            Method::DecompositionOracle => "decomposition_oracle",
        })
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub value: f64,
    pub method: Method,
    pub certified_gap: f64,
}

impl EvalReport {
    pub(crate) fn closed(value: f64) -> Self {
        Self {
            value,
            method: Method::ClosedForm,
            certified_gap: 0.0,
        }
    }
}

pub fn lp_norm(x: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(lp(x, p))
}

/// ℓp norm without validation, scaled by the largest entry for stability.
pub(crate) fn lp(x: &[f64], p: f64) -> f64 {
    let mx = x.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if p.is_infinite() || mx == 0.0 {
        return mx;
    }
    if p == 1.0 {
        return x.iter().map(|c| c.abs()).sum();
    }
    if p == 2.0 {
        return x.iter().map(|c| c * c).sum::<f64>().sqrt();
    }
    mx * x
        .iter()
        .map(|c| (c.abs() / mx).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// The ℓq norm of the k largest entries of |y|; the dual of the k-support
/// norm.
pub fn top_norm(y: &[f64], spec: &NormSpec) -> Result<f64> {
    spec.check_dim(y.len())?;
    Ok(top_unchecked(y, spec.q, spec.k))
}

pub(crate) fn top_unchecked(y: &[f64], q: f64, k: usize) -> f64 {
    let nu = abs_sort_permutation(y);
    let top: Vec<f64> = nu[..k.min(y.len())].iter().map(|&i| y[i]).collect();
    lp(&top, q)
}

/// The k-support norm with ℓp source, the dual of [`top_norm`].
pub fn ksupport_norm(x: &[f64], spec: &NormSpec, tol: Tolerance) -> Result<EvalReport> {
    let d = x.len();
    spec.check_dim(d)?;
    if let Some(v) = ksupport_closed_form(x, spec) {
        return Ok(EvalReport::closed(v));
    }
    ksupport_norm_dual_ascent(x, spec, tol, true)
}

/// Closed forms: p = 1 or k = 1 give ℓ1, p = ∞ gives max(‖x‖₁/k, ‖x‖_∞),
/// k = d gives ℓp.
pub(crate) fn ksupport_closed_form(x: &[f64], spec: &NormSpec) -> Option<f64> {
    let d = x.len();
    if spec.p == 1.0 || spec.k == 1 {
        Some(lp(x, 1.0))
    } else if spec.p.is_infinite() {
        Some((lp(x, 1.0) / spec.k as f64).max(lp(x, f64::INFINITY)))
    } else if spec.k >= d {
        Some(lp(x, spec.p))
    } else {
        None
    }
}

/// Euclidean projection onto {y : top_norm(y) ≤ 1}.
///
/// The projection is exact up to rounding, so `tol` is not consulted.
pub fn project_top_ball(y0: &[f64], spec: &NormSpec, _tol: Tolerance) -> Result<DenseVector> {
    spec.check_dim(y0.len())?;
    DenseVector::new(projection::project_top_ball_exact(y0, spec.k, spec.q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: f64, k: usize) -> NormSpec {
        NormSpec::new(p, k).unwrap()
    }

    #[test]
    fn lp_examples() {
        assert_eq!(lp_norm(&[3.0, 4.0], 2.0).unwrap(), 5.0);
        assert_eq!(lp_norm(&[3.0, -1.0, 2.0], f64::INFINITY).unwrap(), 3.0);
        assert_eq!(lp_norm(&[1.0; 4], 1.0).unwrap(), 4.0);
        assert!(lp_norm(&[1.0], 0.5).is_err());
    }

    #[test]
    fn top_examples() {
        // p = ∞ source means q = 1
        assert_eq!(
            top_norm(&[3.0, -1.0, 2.0], &spec(f64::INFINITY, 2)).unwrap(),
            5.0
        );
        assert_eq!(top_norm(&[3.0, -7.0, 2.0], &spec(3.0, 1)).unwrap(), 7.0);
        let v = top_norm(&[3.0, -1.0, 2.0], &spec(2.0, 3)).unwrap();
        assert!((v - 14f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ksupport_examples() {
        let t = Tolerance::default();
        let r = ksupport_norm(&[1.0, 1.0, 1.0], &spec(f64::INFINITY, 2), t).unwrap();
        assert_eq!((r.value, r.method), (1.5, Method::ClosedForm));
        let r = ksupport_norm(&[1.0, 1.0, 1.0], &spec(2.0, 2), t).unwrap();
        assert!((r.value - 3.0 / 2f64.sqrt()).abs() < 1e-9, "{r:?}");
        let r = ksupport_norm(&[3.0, -4.0, 0.5], &spec(2.0, 1), t).unwrap();
        assert_eq!(r.value, 7.5);
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!(parse_exponent("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_exponent("3/2").unwrap(), 1.5);
        assert_eq!(parse_exponent("2").unwrap(), 2.0);
        assert!(parse_exponent("0.5").is_err());
        assert!(parse_exponent("abc").is_err());
        assert_eq!(spec(1.0, 1).q, f64::INFINITY);
        assert_eq!(spec(4.0, 1).q, 4.0 / 3.0);
    }

    #[test]
    fn projection_examples() {
        let t = Tolerance::default();
        let p = project_top_ball(&[2.0, 0.0, 0.0], &spec(2.0, 2), t).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        let p = project_top_ball(&[2.0, 2.0], &spec(f64::INFINITY, 1), t).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 1.0]);
    }
}
