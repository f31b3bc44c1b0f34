//! Phase-one simplex for small dense feasibility problems.

pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    /// A nonnegative solution of A x = b.
    Feasible(Vec<f64>),
    /// Smallest total artificial weight reached.
    Infeasible(f64),
}

/// Decides whether A x = b has a solution with x ≥ 0, by minimizing the sum of artificial
/// variables with Bland's rule. `a` is row-major with `m` rows of length `n`.
pub fn feasible(a: &[Vec<f64>], b: &[f64]) -> Feasibility {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = sign * b[i];
    }
    for j in 0..n {
        t[m][j] = -(0..m).map(|i| t[i][j]).sum::<f64>();
    }
    t[m][width - 1] = -(0..m).map(|i| t[i][width - 1]).sum::<f64>();
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 50 * (n + m) + 1000;
    for _ in 0..max_iter {
        let Some(col) = (0..n + m).find(|&j| t[m][j] < -PIVOT_TOL) else { break };
        let mut pivot: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][col] > PIVOT_TOL {
                let r = t[i][width - 1] / t[i][col];
                pivot = match pivot {
                    None => Some((i, r)),
                    Some((k, best)) => {
                        if r < best - PIVOT_TOL || (r <= best + PIVOT_TOL && basis[i] < basis[k]) {
                            Some((i, r))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = pivot else { break };
        let p = t[row][col];
        for v in t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i != row {
                let f = r[col];
                if f != 0.0 {
                    for (v, pv) in r.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        basis[row] = col;
    }
    let residual = -t[m][width - 1];
    if residual <= FEAS_TOL {
        let mut x = vec![0.0; n];
        for (i, &j) in basis.iter().enumerate() {
            if j < n {
                x[j] = t[i][width - 1].max(0.0);
            }
        }
        Feasibility::Feasible(x)
    } else {
        Feasibility::Infeasible(residual)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_feasible() {
        let a = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        match feasible(&a, &[1.0, 1.0]) {
            Feasibility::Feasible(x) => {
                assert!((x[0] + x[1] - 1.0).abs() < 1e-12 && (x[1] + x[2] - 1.0).abs() < 1e-12);
                assert!(x.iter().all(|v| *v >= 0.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn simple_infeasible() {
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        assert!(matches!(feasible(&a, &[1.0, 2.0]), Feasibility::Infeasible(_)));
    }

    #[test]
    fn negative_rhs_and_degenerate() {
        let a = vec![vec![-1.0, 0.0, 1.0], vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]];
        assert!(matches!(feasible(&a, &[-0.5, 0.0, 0.5]), Feasibility::Feasible(_)));
        assert!(matches!(feasible(&a, &[-0.5, 0.1, 0.5]), Feasibility::Infeasible(_)));
    }

    #[test]
    fn convex_hull_membership() {
        // Points of the unit square as columns, plus the normalization row.
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let a = vec![
            pts.iter().map(|p| p[0]).collect::<Vec<_>>(),
            pts.iter().map(|p| p[1]).collect(),
            vec![1.0; 4],
        ];
        assert!(matches!(feasible(&a, &[0.3, 0.9, 1.0]), Feasibility::Feasible(_)));
        assert!(matches!(feasible(&a, &[0.3, 1.1, 1.0]), Feasibility::Infeasible(_)));
    }
}
