//! Refinement of normal fans: every normal cone of B^sp_{p,k} (1 < p < ∞)
//! lies inside a normal cone of B^sp_{∞,k}.
//!
//! For a dual direction y with level index (m, L, L̄), the cone of B^sp_{p,k}
//! containing y is generated by the vectors π_L̄ y + w with w supported off
//! L̄ and |w_i| < m. Each generator is tested, in exact arithmetic, for
//! membership in the normal cone of B^sp_{∞,k} at the vertex s given by the
//! signs of y on an optimal support of size k.

use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{dd, ksup_inf_ball, RatPoint, Q};
use crate::error::{Error, Result};
use crate::faces::optimal_supports;
use crate::norms::NormSpec;
use crate::sparse::Tolerance;

/// Random off-block perturbations tried per sampled direction, in addition
/// to the closure corners |w_i| = m.
const PERTURBATIONS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanReport {
    pub d: usize,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
    pub samples: usize,
    pub generators_checked: usize,
    pub violations: usize,
    /// Directions (integer coordinates) whose cone escaped the target cone.
    pub violating_directions: Vec<Vec<i64>>,
}

impl FanReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Samples `sample_count` integer directions with entries in [−3, 3] (so
/// that ties are common) and checks every generator of their cones.
pub fn fan_refinement_check(
    d: usize,
    k: usize,
    p: f64,
    sample_count: usize,
    seed: u64,
) -> Result<FanReport> {
    let spec = NormSpec::new(p, k)?;
    if !spec.is_interior_p() {
        return Err(Error::UnsupportedExponent(p));
    }
    spec.check_dim(d)?;
    let ball = ksup_inf_ball(d, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FanReport {
        d,
        k,
        p,
        seed,
        samples: 0,
        generators_checked: 0,
        violations: 0,
        violating_directions: Vec::new(),
    };
    while report.samples < sample_count {
        let y: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
        if y.iter().all(|&v| v == 0) {
            continue;
        }
        report.samples += 1;
        let gens = cone_generators(&y, k, &mut rng);
        let s = target_vertex(&y, &spec)?;
        let mut bad = false;
        for g in &gens {
            report.generators_checked += 1;
            let top = dd::dot(&s, g);
            if ball.vertices.iter().any(|w| dd::dot(w, g) > top) {
                bad = true;
            }
        }
        if bad {
            report.violations += 1;
            report.violating_directions.push(y);
        }
    }
    Ok(report)
}

/// Generators π_L̄ y + w of the cone through y, with random w of
/// magnitude below m and the corner choices |w_i| = m.
fn cone_generators(y: &[i64], k: usize, rng: &mut ChaCha8Rng) -> Vec<RatPoint> {
    let d = y.len();
    let mut mags: Vec<i64> = y.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.cmp(a));
    let m = mags[k - 1];
    let weak: Vec<bool> = y.iter().map(|v| m == 0 || v.abs() >= m).collect();
    let base: RatPoint = (0..d)
        .map(|i| if weak[i] { q(y[i]) } else { Q::zero() })
        .collect();
    let off: Vec<usize> = (0..d).filter(|&i| !weak[i]).collect();
    let mut out = vec![base.clone()];
    if off.is_empty() {
        return out;
    }
    let den = 97i64;
    for _ in 0..PERTURBATIONS {
        let mut g = base.clone();
        for &i in &off {
            let num = rng.gen_range(-(m * den - 1)..=(m * den - 1));
            g[i] = Q::new(num.into(), den.into());
        }
        out.push(g);
    }
    for mask in 0..1u32 << off.len() {
        let mut g = base.clone();
        for (n, &i) in off.iter().enumerate() {
            g[i] = if mask >> n & 1 == 1 { q(-m) } else { q(m) };
        }
        out.push(g);
    }
    out
}

/// The vertex of B^sp_{∞,k} carrying the signs of y on the lexicographically
/// smallest optimal support of size k (+1 where y vanishes).
fn target_vertex(y: &[i64], spec: &NormSpec) -> Result<RatPoint> {
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let supports = optimal_supports(&yf, spec, Tolerance::exact())?;
    let kk = supports
        .into_iter()
        .find(|s| s.len() == spec.k)
        .ok_or_else(|| Error::Degenerate("no optimal support of size k".into()))?;
    Ok((0..y.len())
        .map(|i| {
            if !kk.contains(i) {
                Q::zero()
            } else if y[i] < 0 {
                -Q::one()
            } else {
                Q::one()
            }
        })
        .collect())
}
