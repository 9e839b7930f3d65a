//! Independent evaluation of the k-support norm through its primal
//! decomposition program
//!
//!   min Σ_K ‖z_K‖_p  s.t.  supp z_K ⊆ K, |K| = k, Σ_K z_K = x.
//!
//! For p ∈ {1, ∞} the block balls are polytopes, so the program is the
//! linear program "min Σ c_j s.t. Σ c_j a_j = x, c ≥ 0" over their finitely
//! many vertices a_j; its optimal multipliers give the dual lower bound.
//! For p = 2 the program is solved by smoothed iterative reweighting:
//! with weights η_K > 0, minimizing Σ ‖z_K‖²/η_K under the constraint gives
//! z_K = η_K π_K λ with λ_i = x_i / Σ_{K∋i} η_K, after which the weights are
//! reset to η_K = (‖z_K‖² + ε²)^{1/2} with ε shrinking. Every iterate is a
//! feasible decomposition (upper bound) and λ rescaled to the unit top ball
//! is a feasible dual point (lower bound).
//!
//! This module deliberately avoids the projection and dual-ascent code it is
//! used to check.

use super::{EvalReport, Method, NormSpec};
use crate::error::{Error, Result};
use crate::linalg::{linprog, LpError};
use crate::sparse::{dot, k_subsets, SupportSet};

pub const ORACLE_MAX_DIM: usize = 8;
pub const ORACLE_MAX_K: usize = 3;
const ORACLE_TOL: f64 = 1e-10;
const IRLS_MAX_ITERS: usize = 2_000_000;

pub fn ksupport_norm_oracle(x: &[f64], spec: &NormSpec) -> Result<EvalReport> {
    let d = x.len();
    spec.check_dim(d)?;
    if d > ORACLE_MAX_DIM {
        return Err(Error::ScaleExceeded {
            d,
            max: ORACLE_MAX_DIM,
        });
    }
    if spec.k > ORACLE_MAX_K {
        return Err(Error::ScaleExceeded {
            d: spec.k,
            max: ORACLE_MAX_K,
        });
    }
    if x.iter().all(|c| *c == 0.0) {
        return Ok(EvalReport {
            value: 0.0,
            method: Method::DecompositionOracle,
            certified_gap: 0.0,
        });
    }
    let (lb, ub) = if spec.p == 1.0 || spec.p.is_infinite() {
        polyhedral(x, spec)?
    } else if spec.p == 2.0 {
        reweighted(x, spec.k)?
    } else {
        return Err(Error::UnsupportedExponent(spec.p));
    };
    Ok(EvalReport {
        value: ub,
        method: Method::DecompositionOracle,
        certified_gap: (ub - lb).max(0.0),
    })
}

/// Vertices of the block balls: ±e_i for p = 1, k-sparse sign vectors for
/// p = ∞.
fn block_vertices(d: usize, spec: &NormSpec) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if spec.p == 1.0 {
        for i in 0..d {
            for s in [1.0, -1.0] {
                let mut a = vec![0.0; d];
                a[i] = s;
                out.push(a);
            }
        }
        return out;
    }
    for kk in k_subsets(d, spec.k) {
        for mask in 0..(1u32 << spec.k) {
            let mut a = vec![0.0; d];
            for (n, &i) in kk.indices().iter().enumerate() {
                a[i] = if mask >> n & 1 == 1 { -1.0 } else { 1.0 };
            }
            out.push(a);
        }
    }
    out
}

fn polyhedral(x: &[f64], spec: &NormSpec) -> Result<(f64, f64)> {
    let atoms = block_vertices(x.len(), spec);
    let cost = vec![1.0; atoms.len()];
    let sol = linprog(&atoms, &cost, x).map_err(|e| match e {
        LpError::Infeasible => Error::Infeasible,
        _ => Error::NonConvergence {
            what: "decomposition linear program",
            iterations: 0,
            gap: f64::NAN,
        },
    })?;
    // the multipliers satisfy ⟨a_j, y⟩ ≤ 1 up to rounding; rescale exactly
    let worst = atoms
        .iter()
        .map(|a| dot(a, &sol.dual))
        .fold(0.0f64, f64::max);
    let lb = if worst > 0.0 {
        dot(x, &sol.dual) / worst
    } else {
        0.0
    };
    Ok((lb, sol.objective))
}

fn reweighted(x: &[f64], k: usize) -> Result<(f64, f64)> {
    let d = x.len();
    let blocks: Vec<SupportSet> = k_subsets(d, k);
    let mut eta = vec![1.0; blocks.len()];
    let scale = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut eps = scale;
    let mut best_ub = f64::INFINITY;
    let mut best_lb = 0.0f64;
    let mut lambda = vec![0.0; d];
    let mut block_norm = vec![0.0; blocks.len()];
    for iter in 0..IRLS_MAX_ITERS {
        let mut s = vec![0.0; d];
        for (kk, &e) in blocks.iter().zip(&eta) {
            for &i in kk.indices() {
                s[i] += e;
            }
        }
        for i in 0..d {
            lambda[i] = x[i] / s[i];
        }
        for (j, kk) in blocks.iter().enumerate() {
            block_norm[j] = kk
                .indices()
                .iter()
                .map(|&i| lambda[i] * lambda[i])
                .sum::<f64>()
                .sqrt();
        }
        let ub: f64 = eta.iter().zip(&block_norm).map(|(e, n)| e * n).sum();
        let top = block_norm.iter().fold(0.0f64, |m, v| m.max(*v));
        let lb = dot(x, &lambda) / top;
        best_ub = best_ub.min(ub);
        best_lb = best_lb.max(lb);
        if best_ub - best_lb <= ORACLE_TOL * best_ub.max(1.0) {
            return Ok((best_lb, best_ub));
        }
        for j in 0..blocks.len() {
            let z = eta[j] * block_norm[j];
            eta[j] = (z * z + eps * eps).sqrt();
        }
        if iter % 4 == 3 {
            eps = (eps * 0.5).max(1e-300);
        }
    }
    Err(Error::NonConvergence {
        what: "decomposition reweighting",
        iterations: IRLS_MAX_ITERS,
        gap: best_ub - best_lb,
    })
}
