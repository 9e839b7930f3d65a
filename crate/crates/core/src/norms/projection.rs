//! Euclidean projections onto ℓq balls and onto the top-(q,k) ball.
//!
//! The top ball is projected onto exactly through its symmetry; Dykstra's
//! method over the cylinders {y : ‖π_K y‖_q ≤ 1} is kept as an independent
//! path for cross-checks.

use crate::error::{Error, Result};
use crate::sparse::{k_subsets, SupportSet};

/// Projects `v` in place onto the ℓq ball of the given radius.
pub fn project_lq_ball(v: &mut [f64], q: f64, radius: f64) {
    if q.is_infinite() {
        for c in v.iter_mut() {
            *c = c.clamp(-radius, radius);
        }
    } else if q == 2.0 {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > radius {
            let s = radius / n;
            for c in v.iter_mut() {
                *c *= s;
            }
        }
    } else if q == 1.0 {
        project_l1_ball(v, radius);
    } else {
        project_lq_general(v, q, radius);
    }
}

/// ℓ1-ball projection by soft thresholding; the threshold is the root of
/// the piecewise-linear equation Σ max(|v_i| − θ, 0) = radius, located by
/// bisection and then solved exactly on its linear piece.
fn project_l1_ball(v: &mut [f64], radius: f64) {
    let total: f64 = v.iter().map(|c| c.abs()).sum();
    if total <= radius {
        return;
    }
    let excess =
        |theta: f64| -> f64 { v.iter().map(|c| (c.abs() - theta).max(0.0)).sum::<f64>() - radius };
    let mut lo = 0.0;
    let mut hi = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    // exact solve on the active piece
    let active: Vec<f64> = v.iter().map(|c| c.abs()).filter(|&a| a > lo).collect();
    let theta = if active.is_empty() {
        hi
    } else {
        ((active.iter().sum::<f64>() - radius) / active.len() as f64).max(0.0)
    };
    for c in v.iter_mut() {
        *c = c.signum() * (c.abs() - theta).max(0.0);
    }
}

/// General q ∈ (1,∞): the projection has |z_i| = t_i(λ) where
/// t + λ q t^{q−1} = |v_i|. The multiplier λ solves Σ t_i(λ)^q = r^q, a
/// decreasing equation handled by Newton's method inside a bisection
/// bracket; each t_i comes from the same safeguarded scheme.
fn project_lq_general(v: &mut [f64], q: f64, radius: f64) {
    let norm_q = super::lp(v, q);
    if norm_q <= radius {
        return;
    }
    let target = radius.powf(q);
    let abs: Vec<f64> = v.iter().map(|c| c.abs()).collect();
    let mut t: Vec<f64> = abs.iter().map(|a| a * radius / norm_q).collect();
    // φ(λ) = Σ t_i^q − r^q and its derivative, updating t in place
    let eval = |lam: f64, t: &mut [f64]| -> (f64, f64) {
        let mut phi = -target;
        let mut dphi = 0.0;
        for (ti, &a) in t.iter_mut().zip(&abs) {
            *ti = solve_coordinate(a, lam, q, *ti);
            if *ti > 0.0 {
                let tq1 = ti.powf(q - 1.0);
                let denom = 1.0 + lam * q * (q - 1.0) * ti.powf(q - 2.0);
                phi += tq1 * *ti;
                dphi -= q * tq1 * q * tq1 / denom;
            }
        }
        (phi, dphi)
    };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while eval(hi, &mut t).0 > 0.0 && hi < 1e300 {
        lo = hi;
        hi *= 2.0;
    }
    let mut lam = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (phi, dphi) = eval(lam, &mut t);
        if phi.abs() <= 4.0 * f64::EPSILON * target {
            break;
        }
        if phi > 0.0 {
            lo = lam;
        } else {
            hi = lam;
        }
        let mut next = if dphi < 0.0 {
            lam - phi / dphi
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - lam).abs() <= 1e-16 * lam.max(1e-300) || hi - lo <= 1e-16 * hi {
            lam = next;
            break;
        }
        lam = next;
    }
    eval(lam, &mut t);
    for (c, ti) in v.iter_mut().zip(&t) {
        *c = c.signum() * ti;
    }
}

/// Root t ∈ [0, a] of t + λ q t^{q−1} = a, by Newton from `guess` with a
/// bisection fallback.
fn solve_coordinate(a: f64, lam: f64, q: f64, guess: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if lam == 0.0 {
        return a;
    }
    let (mut lo, mut hi) = (0.0f64, a);
    let mut t = if guess > 0.0 && guess < a {
        guess
    } else {
        0.5 * a
    };
    for _ in 0..100 {
        let g = t + lam * q * t.powf(q - 1.0) - a;
        if g > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let dg = 1.0 + lam * q * (q - 1.0) * t.powf(q - 2.0);
        let mut next = t - g / dg;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 2.0 * f64::EPSILON * a || hi - lo <= 2.0 * f64::EPSILON * a {
            return next;
        }
        t = next;
    }
    t
}

/// Projection of `y0` onto {y : top_{q,k}(y) ≤ 1}.
///
/// The ball is invariant under permutations and sign changes, so the
/// projection keeps the signs and the order of |y0|. On z = |y0| sorted
/// decreasingly the optimum has a head i < h with w_i + λw_i^{q−1} = z_i, a
/// tie block clipped to a common level m carrying the remaining r = k − h
/// slots, and an untouched tail z_i ≤ m. For each h the multiplier λ > 0 is
/// the root of the active constraint; among the resulting feasible
/// candidates the nearest to z is the projection.
pub fn project_top_ball_exact(y0: &[f64], k: usize, q: f64) -> Vec<f64> {
    let d = y0.len();
    if super::top_unchecked(y0, q, k) <= 1.0 {
        return y0.to_vec();
    }
    if q.is_infinite() {
        return y0.iter().map(|c| c.clamp(-1.0, 1.0)).collect();
    }
    let order = crate::sparse::abs_sort_permutation(y0);
    let z: Vec<f64> = order.iter().map(|&i| y0[i].abs()).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for h in 0..k {
        let Some(w) = tie_candidate(&z, h, k - h, q) else {
            continue;
        };
        if super::top_unchecked(&w, q, k) > 1.0 + 1e-12 {
            continue;
        }
        let dist: f64 = w.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(b, _)| dist < *b) {
            best = Some((dist, w));
        }
    }
    // the last candidate (h = k − 1, no tie) always exists, so `best` is set
    let w = best.map(|(_, w)| w).unwrap_or_else(|| z.clone());
    let mut out = vec![0.0; d];
    for (n, &i) in order.iter().enumerate() {
        out[i] = if y0[i] < 0.0 { -w[n] } else { w[n] };
    }
    out
}

/// Head coordinate for multiplier λ: the root of w + λw^{q−1} = a.
fn head_value(a: f64, lam: f64, q: f64) -> f64 {
    if q == 1.0 {
        (a - lam).max(0.0)
    } else {
        solve_coordinate(a, lam / q, q, a / (1.0 + lam))
    }
}

/// Tie level for multiplier λ: the root m ∈ [0, z_h] of
/// Σ_{i≥h} (z_i − m)₊ = λ r m^{q−1}.
fn tie_level(rest: &[f64], lam: f64, r: f64, q: f64) -> f64 {
    let excess = |m: f64| -> f64 { rest.iter().map(|z| (z - m).max(0.0)).sum::<f64>() };
    let top = rest.first().copied().unwrap_or(0.0);
    if q == 1.0 {
        // piecewise linear: Σ (z_i − m)₊ = λr
        if excess(0.0) <= lam * r {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, top);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) > lam * r {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * top {
                break;
            }
        }
        return 0.5 * (lo + hi);
    }
    let g = |m: f64| excess(m) - lam * r * m.powf(q - 1.0);
    let (mut lo, mut hi) = (0.0, top);
    let mut m = top / (1.0 + lam);
    for _ in 0..200 {
        let v = g(m);
        if v > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
        let count = rest.iter().filter(|z| **z > m).count() as f64;
        let dg = -count - lam * r * (q - 1.0) * m.powf(q - 2.0);
        let mut next = m - v / dg;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - m).abs() <= 2.0 * f64::EPSILON * top || hi - lo <= 2.0 * f64::EPSILON * top {
            return next;
        }
        m = next;
    }
    m
}

/// The candidate with head size h and r tie slots, or `None` when the
/// constraint is already slack at λ = 0 for this structure.
fn tie_candidate(z: &[f64], h: usize, r: usize, q: f64) -> Option<Vec<f64>> {
    let (head, rest) = z.split_at(h);
    let r = r as f64;
    let build = |lam: f64| -> (Vec<f64>, f64) {
        let m = tie_level(rest, lam, r, q);
        let mut w: Vec<f64> = head.iter().map(|&a| head_value(a, lam, q)).collect();
        w.extend(rest.iter().map(|&a| a.min(m)));
        let val = w[..h].iter().map(|c| c.powf(q)).sum::<f64>() + r * m.powf(q);
        (w, val - 1.0)
    };
    if build(0.0).1 <= 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while build(hi).1 > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return None;
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if build(mid).1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    Some(build(hi).0)
}

/// Result of a Dykstra run.
#[derive(Debug, Clone)]
pub struct DykstraOutcome {
    pub point: Vec<f64>,
    pub sweeps: usize,
}

pub const DYKSTRA_MAX_SWEEPS: usize = 10_000;

/// Projection of `y0` onto {y : ‖π_K y‖_q ≤ 1 for all |K| = k}.
///
/// Dykstra's method runs over a working set of cylinders, initially the one
/// most violated by `y0`. If the result violates a cylinder outside the
/// working set, the most violated one joins and the run restarts; a result
/// feasible for every cylinder is the projection onto the full
/// intersection. Growing the set one cylinder at a time keeps constraints
/// that are slack at the solution out of the run, where their large
/// correction terms would slow Dykstra to a crawl. Each run stops once a
/// full sweep moves no coordinate by more than `move_tol`.
pub fn dykstra_top_ball(y0: &[f64], k: usize, q: f64, move_tol: f64) -> Result<DykstraOutcome> {
    let d = y0.len();
    let cylinders: Vec<SupportSet> = k_subsets(d, k);
    let norm_on = |x: &[f64], kk: &SupportSet| -> f64 {
        let local: Vec<f64> = kk.indices().iter().map(|&i| x[i]).collect();
        super::lp(&local, q)
    };
    // the cylinder outside `working` with the largest norm above the bound
    let most_violated = |x: &[f64], working: &[usize], bound: f64| -> Option<usize> {
        (0..cylinders.len())
            .filter(|j| !working.contains(j))
            .map(|j| (j, norm_on(x, &cylinders[j])))
            .filter(|&(_, n)| n > bound)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| j)
    };
    let mut working: Vec<usize> = match most_violated(y0, &[], 1.0) {
        Some(j) => vec![j],
        None => {
            return Ok(DykstraOutcome {
                point: y0.to_vec(),
                sweeps: 0,
            })
        }
    };
    let mut total = 0;
    loop {
        let sets: Vec<&SupportSet> = working.iter().map(|&j| &cylinders[j]).collect();
        let (point, sweeps) = dykstra_on(y0, &sets, k, q, move_tol)?;
        total += sweeps;
        match most_violated(&point, &working, 1.0 + 1e-12) {
            Some(j) => working.push(j),
            None => {
                return Ok(DykstraOutcome {
                    point,
                    sweeps: total,
                })
            }
        }
    }
}

fn dykstra_on(
    y0: &[f64],
    cylinders: &[&SupportSet],
    k: usize,
    q: f64,
    move_tol: f64,
) -> Result<(Vec<f64>, usize)> {
    let mut x = y0.to_vec();
    let mut incr: Vec<Vec<f64>> = vec![vec![0.0; k]; cylinders.len()];
    let mut buf = vec![0.0; k];
    let mut before = vec![0.0; k];
    for sweep in 1..=DYKSTRA_MAX_SWEEPS {
        let mut moved = 0.0f64;
        for (kk, p) in cylinders.iter().zip(incr.iter_mut()) {
            let idx = kk.indices();
            for (n, &i) in idx.iter().enumerate() {
                buf[n] = x[i] + p[n];
                before[n] = buf[n];
            }
            project_lq_ball(&mut buf, q, 1.0);
            for (n, &i) in idx.iter().enumerate() {
                p[n] = before[n] - buf[n];
                moved = moved.max((buf[n] - x[i]).abs());
                x[i] = buf[n];
            }
        }
        // a single set is projected exactly in one pass
        if moved < move_tol || (cylinders.len() == 1 && sweep == 1) {
            return Ok((x, sweep));
        }
    }
    Err(Error::NonConvergence {
        what: "Dykstra projection",
        iterations: DYKSTRA_MAX_SWEEPS,
        gap: f64::NAN,
    })
}
