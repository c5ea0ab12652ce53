//! Sparse LU factorization of a simplex basis, left-looking with partial
//! pivoting (Gilbert–Peierls). Columns are processed sparsest-first and each
//! column is eliminated against earlier pivots in topological order found by
//! a depth-first reach over the L structure, so factorization cost tracks
//! fill rather than m².
//!
//! The factors solve both B·w = rhs (ftran) and Bᵀ·y = c (btran). Row
//! indices refer to the original constraint rows ("row space"); basis slots
//! ("slot space") are the positions 0..m of the basic-variable array the
//! caller maintains.

/// Pivots smaller than this mean the basis is numerically singular.
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug)]
pub(crate) struct LuFactors {
    m: usize,
    /// Per pivot p: sub-diagonal multipliers (original row, value).
    l_cols: Vec<Vec<(usize, f64)>>,
    /// Per pivot p: above-diagonal U entries (earlier pivot q, value).
    u_cols: Vec<Vec<(usize, f64)>>,
    u_diag: Vec<f64>,
    row_of_pos: Vec<usize>,
    pos_of_row: Vec<usize>,
    /// Pivot p consumed the basis column in slot `col_of_pos[p]`.
    col_of_pos: Vec<usize>,
}

#[derive(Debug, thiserror::Error)]
#[error("basis is singular at pivot {position}")]
pub(crate) struct SingularBasis {
    pub position: usize,
}

impl LuFactors {
    /// Factorizes the m×m basis whose slot-s column is `cols[s]`.
    pub fn factorize(cols: &[Vec<(usize, f64)>]) -> Result<LuFactors, SingularBasis> {
        let m = cols.len();
        let mut lu = LuFactors {
            m,
            l_cols: Vec::with_capacity(m),
            u_cols: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
            row_of_pos: Vec::with_capacity(m),
            pos_of_row: vec![usize::MAX; m],
            col_of_pos: Vec::with_capacity(m),
        };

        // Sparsest-first column order keeps early pivots cheap; index breaks
        // ties so the factorization is deterministic.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&s| (cols[s].len(), s));

        let mut work = vec![0.0f64; m];
        let mut in_work = vec![false; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut dfs_seen = vec![false; m];
        let mut topo: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();

        for &slot in &order {
            for &(r, v) in &cols[slot] {
                if in_work[r] {
                    work[r] += v;
                } else {
                    in_work[r] = true;
                    work[r] = v;
                    touched.push(r);
                }
            }

            // Symbolic phase: topological order (ancestors first) of the
            // earlier pivots this column depends on, following L's pattern.
            topo.clear();
            for i in 0..touched.len() {
                let p0 = lu.pos_of_row[touched[i]];
                if p0 == usize::MAX || dfs_seen[p0] {
                    continue;
                }
                dfs_seen[p0] = true;
                stack.push((p0, 0));
                while let Some((p, child)) = stack.pop() {
                    let children = &lu.l_cols[p];
                    let mut advanced = false;
                    for (ci, &(r, _)) in children.iter().enumerate().skip(child) {
                        let q = lu.pos_of_row[r];
                        if q != usize::MAX && !dfs_seen[q] {
                            dfs_seen[q] = true;
                            stack.push((p, ci + 1));
                            stack.push((q, 0));
                            advanced = true;
                            break;
                        }
                    }
                    if !advanced {
                        topo.push(p); // post-order
                    }
                }
            }
            topo.reverse();

            // Numeric phase: eliminate in dependency order.
            let mut u_col = Vec::new();
            for &p in &topo {
                let val = work[lu.row_of_pos[p]];
                if val != 0.0 {
                    u_col.push((p, val));
                    for &(r, mult) in &lu.l_cols[p] {
                        if in_work[r] {
                            work[r] -= val * mult;
                        } else {
                            in_work[r] = true;
                            work[r] = -val * mult;
                            touched.push(r);
                        }
                    }
                }
            }

            // Partial pivoting among rows not yet assigned to a pivot.
            let mut pivot_row = usize::MAX;
            let mut pivot_mag = 0.0;
            for &r in &touched {
                if lu.pos_of_row[r] == usize::MAX {
                    let mag = work[r].abs();
                    if mag > pivot_mag || (mag == pivot_mag && r < pivot_row) {
                        pivot_mag = mag;
                        pivot_row = r;
                    }
                }
            }
            if pivot_mag < SINGULAR_TOL {
                return Err(SingularBasis {
                    position: lu.row_of_pos.len(),
                });
            }

            let diag = work[pivot_row];
            let mut l_col = Vec::new();
            for &r in &touched {
                if lu.pos_of_row[r] == usize::MAX && r != pivot_row && work[r] != 0.0 {
                    l_col.push((r, work[r] / diag));
                }
            }
            l_col.sort_unstable_by_key(|&(r, _)| r);

            let position = lu.row_of_pos.len();
            lu.pos_of_row[pivot_row] = position;
            lu.row_of_pos.push(pivot_row);
            lu.col_of_pos.push(slot);
            lu.u_diag.push(diag);
            lu.u_cols.push(u_col);
            lu.l_cols.push(l_col);

            for &r in &touched {
                work[r] = 0.0;
                in_work[r] = false;
            }
            touched.clear();
            for &p in &topo {
                dfs_seen[p] = false;
            }
        }

        Ok(lu)
    }

    /// Solves B·w = rhs. `x` holds rhs indexed by row on entry and the
    /// solution indexed by basis slot on exit. `scratch` must have length m.
    pub fn ftran(&self, x: &mut [f64], scratch: &mut [f64]) {
        // L solve, in row space.
        for p in 0..self.m {
            let v = x[self.row_of_pos[p]];
            if v != 0.0 {
                for &(r, mult) in &self.l_cols[p] {
                    x[r] -= v * mult;
                }
            }
        }
        for p in 0..self.m {
            scratch[p] = x[self.row_of_pos[p]];
        }
        // U back-substitution over pivot positions.
        for p in (0..self.m).rev() {
            let v = scratch[p] / self.u_diag[p];
            scratch[p] = v;
            if v != 0.0 {
                for &(q, val) in &self.u_cols[p] {
                    scratch[q] -= val * v;
                }
            }
        }
        for v in x.iter_mut() {
            *v = 0.0;
        }
        for p in 0..self.m {
            x[self.col_of_pos[p]] = scratch[p];
        }
    }

    /// Solves Bᵀ·y = c. `x` holds c indexed by basis slot on entry and y
    /// indexed by row on exit. `scratch` must have length m.
    pub fn btran(&self, x: &mut [f64], scratch: &mut [f64]) {
        for p in 0..self.m {
            scratch[p] = x[self.col_of_pos[p]];
        }
        // Uᵀ forward solve.
        for p in 0..self.m {
            let mut v = scratch[p];
            for &(q, val) in &self.u_cols[p] {
                v -= val * scratch[q];
            }
            scratch[p] = v / self.u_diag[p];
        }
        // Lᵀ back solve into row space.
        for v in x.iter_mut() {
            *v = 0.0;
        }
        for p in (0..self.m).rev() {
            let mut v = scratch[p];
            for &(r, mult) in &self.l_cols[p] {
                v -= mult * x[r];
            }
            x[self.row_of_pos[p]] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_cols(a: &[&[f64]]) -> Vec<Vec<(usize, f64)>> {
        let m = a.len();
        (0..m)
            .map(|j| {
                (0..m)
                    .filter(|&i| a[i][j] != 0.0)
                    .map(|i| (i, a[i][j]))
                    .collect()
            })
            .collect()
    }

    fn mat_vec(a: &[&[f64]], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(v, y)| v * y).sum())
            .collect()
    }

    fn mat_t_vec(a: &[&[f64]], x: &[f64]) -> Vec<f64> {
        let m = a.len();
        (0..m)
            .map(|j| (0..m).map(|i| a[i][j] * x[i]).sum())
            .collect()
    }

    fn check_solves(a: &[&[f64]], rhs: &[f64]) {
        let m = a.len();
        let lu = LuFactors::factorize(&dense_cols(a)).unwrap();
        let mut scratch = vec![0.0; m];

        let mut x = rhs.to_vec();
        lu.ftran(&mut x, &mut scratch);
        let back = mat_vec(a, &x);
        for (got, want) in back.iter().zip(rhs) {
            assert!((got - want).abs() < 1e-10, "ftran residual {got} vs {want}");
        }

        let mut y = rhs.to_vec();
        lu.btran(&mut y, &mut scratch);
        let back = mat_t_vec(a, &y);
        for (got, want) in back.iter().zip(rhs) {
            assert!((got - want).abs() < 1e-10, "btran residual {got} vs {want}");
        }
    }

    #[test]
    fn factors_identity_and_diagonal() {
        check_solves(&[&[1.0, 0.0], &[0.0, 1.0]], &[3.0, -4.0]);
        check_solves(&[&[2.0, 0.0], &[0.0, -5.0]], &[1.0, 1.0]);
    }

    #[test]
    fn factors_dense_and_permuted_matrices() {
        check_solves(
            &[&[0.0, 2.0, 1.0], &[1.0, 0.0, 3.0], &[4.0, 1.0, 0.0]],
            &[1.0, 2.0, 3.0],
        );
        check_solves(
            &[&[1e-3, 1.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 1.0, -1.0]],
            &[0.5, -0.25, 8.0],
        );
    }

    #[test]
    fn factors_bidiagonal_chain_like_prefix_bases() {
        // The shape the scheduling LP produces: unit diagonal with -1 below.
        let a: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                (0..6)
                    .map(|j| {
                        if i == j {
                            1.0
                        } else if i == j + 1 {
                            -1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let rows: Vec<&[f64]> = a.iter().map(Vec::as_slice).collect();
        check_solves(&rows, &[1.0, 0.0, -2.0, 0.5, 0.0, 3.0]);
    }

    #[test]
    fn rejects_singular_basis() {
        let singular = dense_cols(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(LuFactors::factorize(&singular).is_err());
        let zero_col = dense_cols(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(LuFactors::factorize(&zero_col).is_err());
    }
}
