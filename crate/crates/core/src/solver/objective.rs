//! Smooth convex objectives: least squares, logistic loss and a
//! finite-difference gradient check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sparse::{dot, SupportSet};

/// A smooth convex function with Lipschitz gradient.
pub trait SmoothObjective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Upper bound on the Lipschitz constant of the gradient.
    fn lipschitz(&self) -> f64;
    /// Lipschitz constant of the gradient restricted to coordinates in K.
    fn block_lipschitz(&self, _block: &SupportSet) -> f64 {
        self.lipschitz()
    }
    /// ⟨v, ∇²f v⟩ when f is quadratic, so line searches can be exact.
    fn directional_curvature(&self, _x: &[f64], _v: &[f64]) -> Option<f64> {
        None
    }
}

fn check_matrix(rows: &[Vec<f64>], cols: usize) -> Result<()> {
    for r in rows {
        if r.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: r.len(),
            });
        }
        if let Some(index) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    Ok(())
}

/// Largest eigenvalue of AᵀA restricted to the columns in `cols`, by power
/// iteration.
fn gram_norm(a: &[Vec<f64>], cols: &[usize]) -> f64 {
    if cols.is_empty() || a.is_empty() {
        return 0.0;
    }
    let mut v = vec![1.0; cols.len()];
    let mut lam = 0.0;
    for _ in 0..500 {
        let av: Vec<f64> = a
            .iter()
            .map(|row| cols.iter().zip(&v).map(|(&j, vj)| row[j] * vj).sum())
            .collect();
        let w: Vec<f64> = cols
            .iter()
            .map(|&j| a.iter().zip(&av).map(|(row, s)| row[j] * s).sum())
            .collect();
        let n = dot(&w, &w).sqrt();
        if n == 0.0 {
            return 0.0;
        }
        let next = n / dot(&v, &v).sqrt();
        v = w.iter().map(|c| c / n).collect();
        if (next - lam).abs() <= 1e-12 * next {
            lam = next;
            break;
        }
        lam = next;
    }
    // power iteration approaches from below
    lam * (1.0 + 1e-9)
}

/// f(x) = ½‖Ax − b‖², with A the identity when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    a: Option<Vec<Vec<f64>>>,
    b: Vec<f64>,
    lip: f64,
}

impl QuadraticObjective {
    pub fn new(a: Option<Vec<Vec<f64>>>, b: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let lip = match &a {
            None => 1.0,
            Some(rows) => {
                if rows.len() != b.len() {
                    return Err(Error::DimensionMismatch {
                        expected: rows.len(),
                        got: b.len(),
                    });
                }
                let d = rows.first().map_or(0, |r| r.len());
                if d == 0 {
                    return Err(Error::EmptyVector);
                }
                check_matrix(rows, d)?;
                gram_norm(rows, &(0..d).collect::<Vec<_>>())
            }
        };
        Ok(Self { a, b, lip })
    }

    /// ½‖x − a‖².
    pub fn denoising(a: Vec<f64>) -> Result<Self> {
        Self::new(None, a)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.a {
            None => x.to_vec(),
            Some(rows) => rows.iter().map(|r| dot(r, x)).collect(),
        }
    }

    fn apply_t(&self, r: &[f64]) -> Vec<f64> {
        match &self.a {
            None => r.to_vec(),
            Some(rows) => {
                let d = self.dim();
                let mut out = vec![0.0; d];
                for (row, ri) in rows.iter().zip(r) {
                    for (o, aij) in out.iter_mut().zip(row) {
                        *o += aij * ri;
                    }
                }
                out
            }
        }
    }
}

impl SmoothObjective for QuadraticObjective {
    fn dim(&self) -> usize {
        match &self.a {
            None => self.b.len(),
            Some(rows) => rows[0].len(),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r: Vec<f64> = self
            .apply(x)
            .iter()
            .zip(&self.b)
            .map(|(u, v)| u - v)
            .collect();
        0.5 * dot(&r, &r)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = self
            .apply(x)
            .iter()
            .zip(&self.b)
            .map(|(u, v)| u - v)
            .collect();
        self.apply_t(&r)
    }

    fn lipschitz(&self) -> f64 {
        self.lip
    }

    fn block_lipschitz(&self, block: &SupportSet) -> f64 {
        match &self.a {
            None => 1.0,
            Some(rows) => gram_norm(rows, block.indices()),
        }
    }

    fn directional_curvature(&self, _x: &[f64], v: &[f64]) -> Option<f64> {
        let av = self.apply(v);
        Some(dot(&av, &av))
    }
}

/// f(x) = (1/n) Σ log(1 + exp(−l_i ⟨a_i, x⟩)) with labels l_i ∈ {−1, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticObjective {
    design: Vec<Vec<f64>>,
    labels: Vec<f64>,
    lip: f64,
}

impl LogisticObjective {
    pub fn new(design: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if design.is_empty() {
            return Err(Error::EmptyVector);
        }
        if design.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: design.len(),
                got: labels.len(),
            });
        }
        if labels.iter().any(|l| *l != 1.0 && *l != -1.0) {
            return Err(Error::Degenerate("labels must be -1 or 1".into()));
        }
        let d = design[0].len();
        if d == 0 {
            return Err(Error::EmptyVector);
        }
        check_matrix(&design, d)?;
        let n = design.len() as f64;
        let lip = gram_norm(&design, &(0..d).collect::<Vec<_>>()) / (4.0 * n);
        Ok(Self {
            design,
            labels,
            lip,
        })
    }
}

/// log(1 + e^t) without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl SmoothObjective for LogisticObjective {
    fn dim(&self) -> usize {
        self.design[0].len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.labels.len() as f64;
        self.design
            .iter()
            .zip(&self.labels)
            .map(|(a, l)| softplus(-l * dot(a, x)))
            .sum::<f64>()
            / n
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.labels.len() as f64;
        let mut g = vec![0.0; self.dim()];
        for (a, l) in self.design.iter().zip(&self.labels) {
            let w = -l * sigmoid(-l * dot(a, x)) / n;
            for (gi, ai) in g.iter_mut().zip(a) {
                *gi += w * ai;
            }
        }
        g
    }

    fn lipschitz(&self) -> f64 {
        self.lip
    }
}

/// Objective file format for the command line.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveFile {
    Quadratic {
        #[serde(rename = "A", default)]
        a: Option<Vec<Vec<f64>>>,
        b: Vec<f64>,
    },
    Logistic {
        design: Vec<Vec<f64>>,
        labels: Vec<f64>,
    },
}

impl ObjectiveFile {
    pub fn build(self) -> Result<Box<dyn SmoothObjective>> {
        Ok(match self {
            ObjectiveFile::Quadratic { a, b } => Box::new(QuadraticObjective::new(a, b)?),
            ObjectiveFile::Logistic { design, labels } => {
                Box::new(LogisticObjective::new(design, labels)?)
            }
        })
    }
}

/// Largest relative error between the gradient and central differences
/// (step 1e-6) over random probes; a correct gradient stays below 1e-4.
pub fn gradient_check(obj: &dyn SmoothObjective, probes: usize, seed: u64) -> f64 {
    let d = obj.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = obj.gradient(&x);
        let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_match_differences() {
        let a = vec![vec![1.0, 2.0, 0.0], vec![0.5, -1.0, 3.0]];
        let q = QuadraticObjective::new(Some(a.clone()), vec![1.0, -2.0]).unwrap();
        assert!(gradient_check(&q, 5, 1) < 1e-4);
        let l = LogisticObjective::new(a, vec![1.0, -1.0]).unwrap();
        assert!(gradient_check(&l, 5, 2) < 1e-4);
    }

    #[test]
    fn lipschitz_bounds() {
        let q = QuadraticObjective::new(Some(vec![vec![3.0, 0.0], vec![0.0, 1.0]]), vec![0.0, 0.0])
            .unwrap();
        assert!((q.lipschitz() - 9.0).abs() < 1e-6);
        let blk = q.block_lipschitz(&SupportSet::from_indices([1]));
        assert!((blk - 1.0).abs() < 1e-6);
        assert_eq!(
            q.directional_curvature(&[0.0, 0.0], &[1.0, 1.0]),
            Some(10.0)
        );
    }

    #[test]
    fn parse_objective_file() {
        let f: ObjectiveFile = serde_json::from_str(r#"{"kind":"quadratic","b":[2,1,0]}"#).unwrap();
        let obj = f.build().unwrap();
        assert_eq!(obj.dim(), 3);
        assert_eq!(obj.value(&[2.0, 1.0, 0.0]), 0.0);
    }
}
