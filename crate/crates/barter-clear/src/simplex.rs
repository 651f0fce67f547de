//! Dense-tableau primal simplex for the restricted master problem:
//! maximize `c x` subject to `A x <= b`, `x >= 0`, with `b >= 0` so the
//! slack basis is a feasible start. Bland's rule for both the entering and
//! the leaving variable rules out cycling, at the cost of speed that is
//! perfectly adequate at the few-hundred-column scale this crate works at.

use thiserror::Error;

pub const PIVOT_TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum SimplexError {
    #[error("no optimum after {MAX_ITERATIONS} pivots")]
    IterationLimit,
    #[error("the LP is unbounded")]
    Unbounded,
    #[error("right-hand side {0} is negative; the slack start requires b >= 0")]
    NegativeRhs(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    pub objective: f64,
    /// Optimal values of the structural variables, basic solution.
    pub x: Vec<f64>,
    /// One dual value per constraint, nonnegative at the optimum up to
    /// pivot tolerance.
    pub duals: Vec<f64>,
}

/// Solves `max c x  s.t.  rows[i] . x <= rhs[i], x >= 0`.
pub fn solve_max(
    objective: &[f64],
    rows: &[Vec<f64>],
    rhs: &[f64],
) -> Result<SimplexSolution, SimplexError> {
    let n = objective.len();
    let m = rows.len();
    assert_eq!(rhs.len(), m, "one rhs per row");
    for r in rhs {
        if *r < 0.0 {
            return Err(SimplexError::NegativeRhs(*r));
        }
    }

    // Tableau columns: n structural, m slack, then the rhs.
    let width = n + m + 1;
    let mut tableau: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n, "row {i} has wrong arity");
        let mut t = vec![0.0; width];
        t[..n].copy_from_slice(row);
        t[n + i] = 1.0;
        t[width - 1] = rhs[i];
        tableau.push(t);
    }
    // Reduced-cost row, z_j - c_j convention; the last cell accumulates the
    // objective value.
    let mut zrow = vec![0.0; width];
    for j in 0..n {
        zrow[j] = -objective[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    for _ in 0..MAX_ITERATIONS {
        // Bland: entering variable is the lowest index with a negative
        // reduced cost.
        let Some(entering) = (0..n + m).find(|&j| zrow[j] < -PIVOT_TOLERANCE) else {
            let mut x = vec![0.0; n];
            for (i, &b) in basis.iter().enumerate() {
                if b < n {
                    x[b] = tableau[i][width - 1];
                }
            }
            let duals = (0..m).map(|i| zrow[n + i]).collect();
            return Ok(SimplexSolution { objective: zrow[width - 1], x, duals });
        };

        // Ratio test; Bland tie-break on the smallest basis variable.
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tableau[i][entering];
            if a > PIVOT_TOLERANCE {
                let ratio = tableau[i][width - 1] / a;
                let replace = match leaving {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - PIVOT_TOLERANCE
                            || (ratio <= lr + PIVOT_TOLERANCE && basis[i] < basis[li])
                    }
                };
                if replace {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leaving else {
            return Err(SimplexError::Unbounded);
        };

        let pivot = tableau[pivot_row][entering];
        for v in tableau[pivot_row].iter_mut() {
            *v /= pivot;
        }
        let pivot_row_values = tableau[pivot_row].clone();
        for (i, row) in tableau.iter_mut().enumerate() {
            if i == pivot_row {
                continue;
            }
            let factor = row[entering];
            if factor != 0.0 {
                for (cell, &p) in row.iter_mut().zip(&pivot_row_values) {
                    *cell -= factor * p;
                }
            }
        }
        let factor = zrow[entering];
        if factor != 0.0 {
            for (cell, &p) in zrow.iter_mut().zip(&pivot_row_values) {
                *cell -= factor * p;
            }
        }
        basis[pivot_row] = entering;
    }
    Err(SimplexError::IterationLimit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} != {b}");
    }

    #[test]
    fn single_variable() {
        let sol = solve_max(&[4.0], &[vec![1.0]], &[1.0]).unwrap();
        close(sol.objective, 4.0);
        close(sol.x[0], 1.0);
        close(sol.duals[0], 4.0);
    }

    #[test]
    fn two_disjoint_columns() {
        // Two variables hitting disjoint constraints.
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let sol = solve_max(&[2.0, 3.0], &rows, &[1.0, 1.0]).unwrap();
        close(sol.objective, 5.0);
        close(sol.x[0], 1.0);
        close(sol.x[1], 1.0);
    }

    #[test]
    fn odd_overlap_is_half_integral() {
        // Three pairwise-overlapping sets over three elements: the packing
        // LP optimum is 1.5 at x = (0.5, 0.5, 0.5), duals 0.5 each.
        let rows = vec![
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0, 1.0],
        ];
        let sol = solve_max(&[1.0, 1.0, 1.0], &rows, &[1.0, 1.0, 1.0]).unwrap();
        close(sol.objective, 1.5);
        for v in &sol.x {
            close(*v, 0.5);
        }
        let dual_sum: f64 = sol.duals.iter().sum();
        close(dual_sum, 1.5);
    }

    #[test]
    fn negative_objective_stays_at_zero() {
        let sol = solve_max(&[-1.0, -2.0], &[vec![1.0, 1.0]], &[1.0]).unwrap();
        close(sol.objective, 0.0);
        close(sol.x[0], 0.0);
        close(sol.x[1], 0.0);
    }

    #[test]
    fn unbounded_is_reported() {
        assert_eq!(solve_max(&[1.0], &[], &[]), Err(SimplexError::Unbounded));
    }

    #[test]
    fn negative_rhs_is_rejected() {
        assert_eq!(
            solve_max(&[1.0], &[vec![1.0]], &[-1.0]),
            Err(SimplexError::NegativeRhs(-1.0))
        );
    }

    #[test]
    fn weak_duality_on_random_packing_lps() {
        // Deterministic pseudo-random 0/1 packing matrices.
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _case in 0..50 {
            let m = 3 + (next() % 5) as usize;
            let n = 2 + (next() % 8) as usize;
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| if next() % 3 == 0 { 1.0 } else { 0.0 }).collect())
                .collect();
            let c: Vec<f64> = (0..n).map(|_| (next() % 7) as f64).collect();
            let rhs = vec![1.0; m];
            let sol = solve_max(&c, &rows, &rhs);
            let Ok(sol) = sol else {
                // Unbounded when some column has no constraint and positive
                // objective; legitimate for this generator.
                let unconstrained = (0..n)
                    .any(|j| c[j] > 0.0 && rows.iter().all(|r| r[j] == 0.0));
                assert!(unconstrained);
                continue;
            };
            // Primal feasibility.
            for (i, row) in rows.iter().enumerate() {
                let lhs: f64 = row.iter().zip(&sol.x).map(|(a, x)| a * x).sum();
                assert!(lhs <= rhs[i] + 1e-9);
            }
            for x in &sol.x {
                assert!(*x >= -1e-9);
            }
            // Dual feasibility and strong duality at the optimum.
            for d in &sol.duals {
                assert!(*d >= -1e-9);
            }
            let dual_obj: f64 = sol.duals.iter().sum();
            assert!(sol.objective <= dual_obj + 1e-6);
            assert!((sol.objective - dual_obj).abs() <= 1e-6);
        }
    }
}
