//! Generalized conditional gradient for min f(x) + γ‖x‖^sp_{p,k}.
//!
//! The iterate is kept as a sum of groups x = Σ_K z_K with supp z_K ⊆ K, and
//! Σ_K ‖z_K‖_p is used as the penalty; it bounds ‖x‖^sp from above and is
//! tight at a best decomposition. Each iteration calls the linear
//! minimization oracle at u = −∇f(x), which returns a unit atom v_p(π_K u)
//! on an optimal support K of u, and minimizes over the pair (α, β) ≥ 0 the
//! objective of αx + βa. Every `correction_every` iterations all groups are
//! re-optimized by block proximal gradient.
//!
//! The gap reported is a certified bound on the suboptimality of
//! f(x) + γ Σ‖z_K‖_p: with R = (P(x) − f_lb)/γ ≥ ‖x*‖^sp,
//!
//!   gap = (γ Σ‖z_K‖_p − ⟨u, x⟩)₊ + R (top(u) − γ)₊.

mod objective;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use objective::{
    gradient_check, LogisticObjective, ObjectiveFile, QuadraticObjective, SmoothObjective,
};

use crate::error::{Error, Result};
use crate::faces::{optimal_supports, v_p_unchecked};
use crate::norms::projection::project_lq_ball;
use crate::norms::{ksupport_norm, lp, top_unchecked, NormSpec};
use crate::sparse::{abs_sort_permutation, dot, support_of, DenseVector, SupportSet, Tolerance};

/// Options for [`solve_penalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Stop once the certified gap falls below this value.
    pub tol: f64,
    pub max_iterations: usize,
    pub correction_every: usize,
    /// Block proximal sweeps per correction.
    pub correction_sweeps: usize,
    /// Lower bound on f used in the gap radius.
    pub f_lower_bound: f64,
    /// Seed for a random choice among tied optimal supports in the oracle;
    /// `None` picks the lexicographically smallest.
    pub tie_seed: Option<u64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iterations: 50_000,
            correction_every: 10,
            correction_sweeps: 50,
            f_lower_bound: 0.0,
            tie_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub x_star: DenseVector,
    /// f(x*) + γ Σ‖z_K‖_p, an upper bound on f(x*) + γ‖x*‖^sp.
    pub objective: f64,
    pub fw_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// supp(x*) at threshold 1e-6·‖x*‖_∞.
    pub support: SupportSet,
    pub identified_supports: Vec<SupportSet>,
    pub unique_support: Option<SupportSet>,
    pub support_bound: SupportSet,
    /// Support bound at each correction, for diagnostics.
    pub bound_history: Vec<SupportSet>,
}

fn check_spec(spec: &NormSpec, d: usize) -> Result<()> {
    spec.check_dim(d)
}

/// Tie tolerance used when reading supports off a numerical gradient.
fn gradient_tol(g: &[f64]) -> Tolerance {
    let s = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Tolerance::abs_only(1e-6 * s)
}

/// The effective sparsity for support computations: the ℓ1 penalty (p = 1)
/// does not depend on k and behaves as k = 1.
fn support_spec(spec: &NormSpec) -> NormSpec {
    if spec.p == 1.0 {
        NormSpec { k: 1, ..*spec }
    } else {
        *spec
    }
}

/// argmax of ⟨a, u⟩ over the unit k-support ball, and its support group.
fn lmo(u: &[f64], spec: &NormSpec, rng: Option<&mut ChaCha8Rng>) -> Result<(Vec<f64>, SupportSet)> {
    let d = u.len();
    if u.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroVector);
    }
    if spec.p == 1.0 {
        let j = abs_sort_permutation(u)[0];
        let mut a = vec![0.0; d];
        a[j] = u[j].signum();
        return Ok((a, SupportSet::from_indices([j])));
    }
    let supports = optimal_supports(u, spec, Tolerance::exact())?;
    let sized: Vec<&SupportSet> = supports.iter().filter(|s| s.len() == spec.k).collect();
    let kk = match rng {
        Some(r) => (*sized.choose(r).expect("a size-k optimal support exists")).clone(),
        None => sized[0].clone(),
    };
    let mut a = vec![0.0; d];
    if spec.p.is_infinite() {
        for &i in kk.indices() {
            a[i] = if u[i] < 0.0 { -1.0 } else { 1.0 };
        }
    } else {
        let proj: Vec<f64> = (0..d)
            .map(|i| if kk.contains(i) { u[i] } else { 0.0 })
            .collect();
        a = v_p_unchecked(&proj, spec.p);
    }
    Ok((a, kk))
}

/// A maximizer of ⟨a, u⟩ over the unit ball of ‖·‖^sp_{p,k}: v_p(π_K u) on
/// the lexicographically smallest optimal support K (1 < p < ∞), the sign
/// vertex on K (p = ∞), or a signed basis vector (p = 1).
pub fn lmo_sp_ball(u: &[f64], spec: &NormSpec) -> Result<DenseVector> {
    check_spec(spec, u.len())?;
    DenseVector::new(lmo(u, spec, None)?.0)
}

/// Optimal supports of g = −∇f(x), their union and the unique one if there
/// is exactly one. Ties are read at 1e-6·max(1, ‖g‖_∞).
pub fn identified_support(
    g: &[f64],
    spec: &NormSpec,
) -> Result<(Vec<SupportSet>, Option<SupportSet>, SupportSet)> {
    check_spec(spec, g.len())?;
    if g.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroGradient);
    }
    let supports = optimal_supports(g, &support_spec(spec), gradient_tol(g))?;
    let bound = supports
        .iter()
        .fold(SupportSet::empty(), |acc, s| acc.union(s));
    let unique = (supports.len() == 1).then(|| supports[0].clone());
    Ok((supports, unique, bound))
}

/// Checks the optimality conditions of min f + γ‖·‖^sp at x with relative
/// tolerance `tol`: for x = 0, top(−∇f(0)) ≤ γ(1 + tol); otherwise
/// top(−∇f(x)) = γ within tol and ⟨x, −∇f(x)⟩ ≥ ‖x‖^sp·top(∇f(x))(1 − tol).
/// The returned gap is the worst relative violation.
pub fn certify_optimality(
    x: &[f64],
    obj: &dyn SmoothObjective,
    gamma: f64,
    spec: &NormSpec,
    tol: f64,
) -> Result<(bool, f64)> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidGamma(gamma));
    }
    check_spec(spec, x.len())?;
    let u: Vec<f64> = obj.gradient(x).iter().map(|v| -v).collect();
    let top = top_unchecked(&u, spec.q, spec.k);
    let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if xmax <= tol {
        let gap = ((top - gamma) / gamma).max(0.0);
        return Ok((gap <= tol, gap));
    }
    let norm = ksupport_norm(x, spec, Tolerance::default())?.value;
    let dual = ((top - gamma) / gamma).abs();
    let pair = dot(x, &u);
    let align = ((norm * top - pair) / (norm * top).max(f64::MIN_POSITIVE)).max(0.0);
    let gap = dual.max(align);
    Ok((gap <= tol, gap))
}

/// Group representation of the iterate.
struct Groups {
    z: BTreeMap<SupportSet, Vec<f64>>,
    p: f64,
}

impl Groups {
    fn penalty(&self) -> f64 {
        self.z.values().map(|v| lp(v, self.p)).sum()
    }

    fn sum(&self, d: usize) -> Vec<f64> {
        let mut x = vec![0.0; d];
        for v in self.z.values() {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += vi;
            }
        }
        x
    }
}

/// Proximal map of t‖·‖_p: v − t·Π_{B_q}(v / t).
fn prox_lp(v: &[f64], t: f64, q: f64) -> Vec<f64> {
    let mut w: Vec<f64> = v.iter().map(|c| c / t).collect();
    project_lq_ball(&mut w, q, 1.0);
    v.iter().zip(&w).map(|(a, b)| a - t * b).collect()
}

/// Objective values within rounding of `v` count as no increase.
fn slack(v: f64) -> f64 {
    v + 1e-13 * v.abs().max(1.0)
}

struct Problem<'a> {
    obj: &'a dyn SmoothObjective,
    gamma: f64,
    spec: NormSpec,
    d: usize,
}

impl Problem<'_> {
    fn total(&self, x: &[f64], pen: f64) -> f64 {
        self.obj.value(x) + self.gamma * pen
    }

    /// Exact or majorized curvature matrix of f along the directions x, a.
    fn curvature(&self, x: &[f64], a: &[f64]) -> [f64; 3] {
        let both: Vec<f64> = x.iter().zip(a).map(|(s, t)| s + t).collect();
        match (
            self.obj.directional_curvature(x, x),
            self.obj.directional_curvature(x, a),
            self.obj.directional_curvature(x, &both),
        ) {
            (Some(cxx), Some(caa), Some(cb)) => [cxx, 0.5 * (cb - cxx - caa), caa],
            _ => {
                let l = self.obj.lipschitz();
                [l * dot(x, x), l * dot(x, a), l * dot(a, a)]
            }
        }
    }

    /// Minimizes the model of f((1+s)x + βa) + γ((1+s)Ω + β) over s ≥ −1,
    /// β ≥ 0.
    fn pair_step(&self, x: &[f64], g: &[f64], a: &[f64], omega: f64) -> (f64, f64) {
        let [cxx, cxa, caa] = self.curvature(x, a);
        let lx = dot(g, x) + self.gamma * omega;
        let la = dot(g, a) + self.gamma;
        let model = |s: f64, b: f64| {
            lx * s + la * b + 0.5 * (cxx * s * s + 2.0 * cxa * s * b + caa * b * b)
        };
        let mut cands = vec![(0.0, 0.0), (-1.0, 0.0)];
        if caa > 0.0 {
            cands.push((0.0, (-la / caa).max(0.0)));
            cands.push((-1.0, ((cxa - la) / caa).max(0.0)));
        }
        if cxx > 0.0 {
            cands.push(((-lx / cxx).max(-1.0), 0.0));
        }
        let det = cxx * caa - cxa * cxa;
        if det > 1e-14 * (cxx * caa).max(f64::MIN_POSITIVE) {
            let s = (-lx * caa + la * cxa) / det;
            let b = (-la * cxx + lx * cxa) / det;
            if s >= -1.0 && b >= 0.0 {
                cands.push((s, b));
            }
        }
        cands
            .into_iter()
            .min_by(|p, q| model(p.0, p.1).total_cmp(&model(q.0, q.1)))
            .unwrap_or((0.0, 0.0))
    }

    /// Block proximal gradient sweeps over all groups, with backtracking on
    /// each block constant.
    fn correct(&self, groups: &mut Groups, lips: &mut BTreeMap<SupportSet, f64>, sweeps: usize) {
        let q = self.spec.q;
        for _ in 0..sweeps {
            let mut moved = 0.0f64;
            let keys: Vec<SupportSet> = groups.z.keys().cloned().collect();
            for kk in keys {
                let x = groups.sum(self.d);
                let fx = self.obj.value(&x);
                let g = self.obj.gradient(&x);
                let lk = lips
                    .entry(kk.clone())
                    .or_insert_with(|| self.obj.block_lipschitz(&kk).max(1e-12));
                let z = groups.z[&kk].clone();
                let before = self.gamma * lp(&z, self.spec.p);
                loop {
                    let step: Vec<f64> = z
                        .iter()
                        .zip(&g)
                        .enumerate()
                        .map(|(i, (zi, gi))| if kk.contains(i) { zi - gi / *lk } else { 0.0 })
                        .collect();
                    let nz = prox_lp(&step, self.gamma / *lk, q);
                    let delta: Vec<f64> = nz.iter().zip(&z).map(|(a, b)| a - b).collect();
                    let xn: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
                    let bound = fx + dot(&g, &delta) + 0.5 * *lk * dot(&delta, &delta);
                    // the descent lemma makes an accepted step monotone, so
                    // the objective is compared only up to rounding
                    if self.obj.value(&xn) <= bound + 1e-12 * fx.abs().max(1.0) {
                        let after = self.gamma * lp(&nz, self.spec.p);
                        if after + self.obj.value(&xn) <= slack(fx + before) {
                            moved = moved.max(delta.iter().fold(0.0f64, |m, v| m.max(v.abs())));
                            groups.z.insert(kk.clone(), nz);
                        }
                        break;
                    }
                    *lk *= 2.0;
                }
            }
            groups.z.retain(|_, v| v.iter().any(|c| *c != 0.0));
            if moved <= 1e-15 {
                break;
            }
        }
    }

    fn gap(&self, x: &[f64], u: &[f64], pen: f64, f_lb: f64) -> f64 {
        let top = top_unchecked(u, self.spec.q, self.spec.k);
        let first = (self.gamma * pen - dot(u, x)).max(0.0);
        let radius = ((self.total(x, pen) - f_lb) / self.gamma).max(0.0);
        first + radius * (top - self.gamma).max(0.0)
    }
}

/// Minimizes f + γ‖·‖^sp_{p,k} by generalized conditional gradient. The
/// report carries `converged = false` when the iteration cap is reached.
pub fn solve_penalized(
    obj: &dyn SmoothObjective,
    gamma: f64,
    spec: &NormSpec,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidGamma(gamma));
    }
    let d = obj.dim();
    check_spec(spec, d)?;
    let prob = Problem {
        obj,
        gamma,
        spec: *spec,
        d,
    };
    let mut rng = opts.tie_seed.map(ChaCha8Rng::seed_from_u64);
    let mut groups = Groups {
        z: BTreeMap::new(),
        p: spec.p,
    };
    let mut lips: BTreeMap<SupportSet, f64> = BTreeMap::new();
    let mut history = Vec::new();
    let mut x = vec![0.0; d];
    let mut iterations = 0;
    let mut gap;
    let mut converged = false;
    loop {
        let g = obj.gradient(&x);
        let u: Vec<f64> = g.iter().map(|v| -v).collect();
        let pen = groups.penalty();
        gap = prob.gap(&x, &u, pen, opts.f_lower_bound);
        if gap <= opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations || u.iter().all(|v| *v == 0.0) {
            break;
        }
        iterations += 1;
        let (a, kk) = lmo(&u, spec, rng.as_mut())?;
        let (s, beta) = prob.pair_step(&x, &g, &a, pen);
        let before = prob.total(&x, pen);
        let mut trial = Groups {
            z: groups.z.clone(),
            p: spec.p,
        };
        for v in trial.z.values_mut() {
            for c in v.iter_mut() {
                *c *= 1.0 + s;
            }
        }
        let entry = trial.z.entry(kk).or_insert_with(|| vec![0.0; d]);
        for (c, ai) in entry.iter_mut().zip(&a) {
            *c += beta * ai;
        }
        trial.z.retain(|_, v| v.iter().any(|c| *c != 0.0));
        let xt = trial.sum(d);
        if prob.total(&xt, trial.penalty()) <= slack(before) {
            groups = trial;
            x = xt;
        }
        if iterations % opts.correction_every.max(1) == 0 {
            prob.correct(&mut groups, &mut lips, opts.correction_sweeps);
            x = groups.sum(d);
            let u: Vec<f64> = obj.gradient(&x).iter().map(|v| -v).collect();
            if u.iter().any(|v| *v != 0.0) {
                history.push(identified_support(&u, spec)?.2);
            }
        }
    }
    let u: Vec<f64> = obj.gradient(&x).iter().map(|v| -v).collect();
    let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let support = support_of(&x, Tolerance::abs_only(1e-6 * xmax));
    let (supports, unique, bound) = if u.iter().all(|v| *v == 0.0) {
        (Vec::new(), None, SupportSet::full(d))
    } else {
        identified_support(&u, spec)?
    };
    Ok(SolveReport {
        objective: prob.total(&x, groups.penalty()),
        x_star: DenseVector::new(x)?,
        fw_gap: gap,
        iterations,
        converged,
        support,
        identified_supports: supports,
        unique_support: unique,
        support_bound: bound,
        bound_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: f64, k: usize) -> NormSpec {
        NormSpec::new(p, k).unwrap()
    }

    #[test]
    fn lmo_examples() {
        let a = lmo_sp_ball(&[3.0, 1.0, 0.0], &spec(2.0, 1)).unwrap();
        assert_eq!(a.as_slice(), &[1.0, 0.0, 0.0]);
        let a = lmo_sp_ball(&[1.0, 1.0, 1.0], &spec(2.0, 2)).unwrap();
        let r = 0.5f64.sqrt();
        assert!((a[0] - r).abs() < 1e-15 && (a[1] - r).abs() < 1e-15 && a[2] == 0.0);
        let a = lmo_sp_ball(&[-3.0, 1.0, 2.0], &spec(f64::INFINITY, 2)).unwrap();
        assert_eq!(a.as_slice(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn lasso_example() {
        let obj = QuadraticObjective::denoising(vec![2.0, 1.0, 0.0]).unwrap();
        let r = solve_penalized(&obj, 1.5, &spec(1.0, 1), &SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.x_star[0] - 0.5).abs() < 1e-6 && r.x_star[1].abs() < 1e-9);
        assert_eq!(r.support_bound, SupportSet::from_indices([0]));
        let (ok, gap) = certify_optimality(&r.x_star, &obj, 1.5, &spec(1.0, 1), 1e-6).unwrap();
        assert!(ok, "gap {gap}");
    }

    #[test]
    fn zero_solution_above_threshold() {
        let obj = QuadraticObjective::denoising(vec![2.0, 1.0, 0.0]).unwrap();
        let r = solve_penalized(&obj, 2.5, &spec(2.0, 1), &SolveOptions::default()).unwrap();
        assert!(r.x_star.is_zero() && r.converged);
        let (ok, _) = certify_optimality(&[0.0; 3], &obj, 0.5, &spec(2.0, 1), 1e-6).unwrap();
        assert!(!ok);
    }

    #[test]
    fn small_penalty_recovers_target() {
        let obj = QuadraticObjective::denoising(vec![2.0, 1.0, 0.5]).unwrap();
        let opts = SolveOptions {
            tol: 1e-10,
            ..SolveOptions::default()
        };
        let r = solve_penalized(&obj, 1e-4, &spec(2.0, 2), &opts).unwrap();
        assert!(r.converged);
        for (a, b) in r.x_star.iter().zip([2.0, 1.0, 0.5]) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn identified_support_examples() {
        let (s, u, b) = identified_support(&[3.0, 2.0, 2.0, 1.0], &spec(2.0, 2)).unwrap();
        assert_eq!(s.len(), 2);
        assert!(u.is_none());
        assert_eq!(b, SupportSet::from_indices([0, 1, 2]));
        let (_, u, _) = identified_support(&[3.0, 1.0, 0.0], &spec(2.0, 1)).unwrap();
        assert_eq!(u, Some(SupportSet::from_indices([0])));
        let (_, _, b) = identified_support(&[1.5, 1.0, 0.0], &spec(1.0, 3)).unwrap();
        assert_eq!(b, SupportSet::from_indices([0]));
        assert_eq!(
            identified_support(&[0.0, 0.0], &spec(2.0, 1)),
            Err(Error::ZeroGradient)
        );
    }
}
