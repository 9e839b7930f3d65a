//! Small dense numerical kernels: Gaussian elimination, nonnegative least
//! squares (Lawson–Hanson) and a revised simplex method for
//! `min cᵀx s.t. Ax = b, x ≥ 0` with few rows.

/// Solves the square system `a · x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `1e-13` times the
/// largest entry.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for c in col..=n {
                    m[row][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = m[row][n];
        for c in row + 1..n {
            s -= m[row][c] * x[c];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

/// Inverse of a square matrix, or `None` if singular.
pub fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve(a, &e)?);
    }
    Some(
        (0..n)
            .map(|i| (0..n).map(|j| cols[j][i]).collect())
            .collect(),
    )
}

/// Nonnegative least squares: minimizes ‖Σ_j c_j columns[j] − b‖₂ over
/// c ≥ 0 by the Lawson–Hanson active-set method.
pub fn nnls(columns: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let m = columns.len();
    let mut c = vec![0.0; m];
    if m == 0 {
        return c;
    }
    let gram: Vec<Vec<f64>> = columns
        .iter()
        .map(|ci| {
            columns
                .iter()
                .map(|cj| crate::sparse::dot(ci, cj))
                .collect()
        })
        .collect();
    let atb: Vec<f64> = columns.iter().map(|ci| crate::sparse::dot(ci, b)).collect();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let mut passive = vec![false; m];
    // gradient of ½‖Ac − b‖² is G c − Aᵀb; w = −gradient
    let w_of = |c: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| atb[i] - (0..m).map(|j| gram[i][j] * c[j]).sum::<f64>())
            .collect()
    };
    for _ in 0..3 * m + 10 {
        let w = w_of(&c);
        let cand = (0..m)
            .filter(|&j| !passive[j] && w[j] > 1e-14 * bnorm)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = cand else { break };
        passive[j] = true;
        let mut stalled = false;
        for _ in 0..3 * m + 10 {
            let idx: Vec<usize> = (0..m).filter(|&i| passive[i]).collect();
            let sub: Vec<Vec<f64>> = idx
                .iter()
                .map(|&i| idx.iter().map(|&l| gram[i][l]).collect())
                .collect();
            let rhs: Vec<f64> = idx.iter().map(|&i| atb[i]).collect();
            let Some(z) = solve(&sub, &rhs) else {
                // dependent column: drop the newest one and stop growing
                passive[j] = false;
                stalled = true;
                break;
            };
            if z.iter().all(|&v| v > 0.0) {
                for (n, &i) in idx.iter().enumerate() {
                    c[i] = z[n];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (n, &i) in idx.iter().enumerate() {
                if z[n] <= 0.0 {
                    let denom = c[i] - z[n];
                    if denom > 0.0 {
                        alpha = alpha.min(c[i] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (n, &i) in idx.iter().enumerate() {
                c[i] += alpha * (z[n] - c[i]);
                if c[i] <= 1e-15 {
                    c[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
        if stalled {
            break;
        }
    }
    c
}

/// Solution of a linear program in standard equality form.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Multipliers of the equality rows (`y` with `Aᵀy ≤ c` at optimality).
    pub dual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Revised simplex for `min cᵀx s.t. Ax = b, x ≥ 0`, with `A` given by
/// columns. Intended for a handful of rows and many columns. Pricing is
/// Dantzig's rule, switching to Bland's rule after many pivots so that
/// degenerate problems still terminate.
pub fn linprog(columns: &[Vec<f64>], cost: &[f64], b: &[f64]) -> Result<LpSolution, LpError> {
    let m = b.len();
    let n = columns.len();
    // Flip rows so that b ≥ 0; artificial columns are n..n+m.
    let sign: Vec<f64> = b
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let bb: Vec<f64> = b.iter().zip(&sign).map(|(v, s)| v * s).collect();
    let col = |j: usize| -> Vec<f64> {
        if j < n {
            columns[j].iter().zip(&sign).map(|(v, s)| v * s).collect()
        } else {
            let mut e = vec![0.0; m];
            e[j - n] = 1.0;
            e
        }
    };
    let scale = columns
        .iter()
        .flat_map(|c| c.iter())
        .chain(bb.iter())
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    let eps = 1e-11 * scale;

    let mut basis: Vec<usize> = (n..n + m).collect();
    let phase1_cost = |j: usize| if j >= n { 1.0 } else { 0.0 };
    run_simplex(&mut basis, n + m, &col, &phase1_cost, &bb, eps, n)?;
    let xb = basic_values(&basis, &col, &bb).ok_or(LpError::Infeasible)?;
    let infeas: f64 = basis
        .iter()
        .zip(&xb)
        .filter(|(&j, _)| j >= n)
        .map(|(_, v)| v.abs())
        .sum();
    if infeas > 1e-9 * scale {
        return Err(LpError::Infeasible);
    }
    // Pivot remaining artificial variables out of the basis where possible.
    for r in 0..m {
        if basis[r] < n {
            continue;
        }
        let binv = basis_inverse(&basis, &col).ok_or(LpError::Infeasible)?;
        let entering = (0..n).find(|&j| {
            !basis.contains(&j) && {
                let aj = col(j);
                let v: f64 = (0..m).map(|l| binv[r][l] * aj[l]).sum();
                v.abs() > 1e-9
            }
        });
        if let Some(j) = entering {
            basis[r] = j;
        }
    }
    let phase2_cost = |j: usize| if j < n { cost[j] } else { f64::INFINITY };
    run_simplex(&mut basis, n, &col, &phase2_cost, &bb, eps, n)?;
    let xb = basic_values(&basis, &col, &bb).ok_or(LpError::Infeasible)?;
    let mut x = vec![0.0; n];
    for (r, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = xb[r].max(0.0);
        }
    }
    let binv = basis_inverse(&basis, &col).ok_or(LpError::Infeasible)?;
    let cb: Vec<f64> = basis
        .iter()
        .map(|&j| if j < n { cost[j] } else { 0.0 })
        .collect();
    let dual: Vec<f64> = (0..m)
        .map(|l| (0..m).map(|r| cb[r] * binv[r][l]).sum::<f64>() * sign[l])
        .collect();
    let objective = x.iter().zip(cost).map(|(a, c)| a * c).sum();
    Ok(LpSolution { x, objective, dual })
}

fn basis_inverse(basis: &[usize], col: &dyn Fn(usize) -> Vec<f64>) -> Option<Vec<Vec<f64>>> {
    let m = basis.len();
    let cols: Vec<Vec<f64>> = basis.iter().map(|&j| col(j)).collect();
    let bmat: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|r| cols[r][i]).collect())
        .collect();
    invert(&bmat)
}

fn basic_values(basis: &[usize], col: &dyn Fn(usize) -> Vec<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let binv = basis_inverse(basis, col)?;
    Some(
        binv.iter()
            .map(|row| row.iter().zip(b).map(|(a, v)| a * v).sum())
            .collect(),
    )
}

fn run_simplex(
    basis: &mut [usize],
    n_cols: usize,
    col: &dyn Fn(usize) -> Vec<f64>,
    cost: &dyn Fn(usize) -> f64,
    b: &[f64],
    eps: f64,
    n_real: usize,
) -> Result<(), LpError> {
    let m = b.len();
    for iter in 0..50_000 {
        let bland = iter > 1_000;
        let binv = basis_inverse(basis, col).ok_or(LpError::Infeasible)?;
        let xb: Vec<f64> = binv
            .iter()
            .map(|row| row.iter().zip(b).map(|(a, v)| a * v).sum())
            .collect();
        let cb: Vec<f64> = basis
            .iter()
            .map(|&j| {
                let c = cost(j);
                if c.is_finite() {
                    c
                } else {
                    0.0
                }
            })
            .collect();
        let y: Vec<f64> = (0..m)
            .map(|l| (0..m).map(|r| cb[r] * binv[r][l]).sum())
            .collect();
        let mut entering: Option<(usize, Vec<f64>)> = None;
        let mut best_rc = -eps;
        for j in 0..n_cols {
            if basis.contains(&j) || (j >= n_real && !cost(j).is_finite()) {
                continue;
            }
            let c = cost(j);
            if !c.is_finite() {
                continue;
            }
            let aj = col(j);
            let rc = c - crate::sparse::dot(&y, &aj);
            if rc < best_rc {
                entering = Some((j, aj));
                if bland {
                    break;
                }
                best_rc = rc;
            }
        }
        let Some((j, aj)) = entering else {
            return Ok(());
        };
        let dir: Vec<f64> = binv
            .iter()
            .map(|row| row.iter().zip(&aj).map(|(a, v)| a * v).sum())
            .collect();
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            if dir[r] > 1e-12 {
                let ratio = xb[r].max(0.0) / dir[r];
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-15
                            || (ratio <= lratio + 1e-15 && basis[r] < basis[lr])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, _)) = leave else {
            return Err(LpError::Unbounded);
        };
        basis[r] = j;
    }
    Err(LpError::IterationLimit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn nnls_clips_negative_weights() {
        // b lies outside the cone of the columns; best fit uses e1 only
        let cols = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let c = nnls(&cols, &[1.0, -1.0]);
        assert!((c[0] - 1.0).abs() < 1e-12 && c[1] == 0.0);
        let c = nnls(&cols, &[2.0, 1.0]);
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lp_gauge_of_cross_polytope() {
        // min Σc s.t. Σ c_j (±e_j) = (1,-2): value ‖x‖₁ = 3
        let cols = vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ];
        let sol = linprog(&cols, &[1.0; 4], &[1.0, -2.0]).unwrap();
        assert!((sol.objective - 3.0).abs() < 1e-12);
        // dual is a subgradient: sign pattern (1,-1)
        assert!((sol.dual[0] - 1.0).abs() < 1e-12 && (sol.dual[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn lp_detects_infeasibility() {
        let cols = vec![vec![1.0, 0.0]];
        assert_eq!(
            linprog(&cols, &[1.0], &[1.0, 1.0]).unwrap_err(),
            LpError::Infeasible
        );
    }
}
