//! Small dense Gaussian elimination over the ambient field.
//!
//! Rows are `Vec<Fe>`; entries may come from any subfield. Eliminating a
//! matrix whose entries lie in GF(2^m) keeps them there, so the same routine
//! serves GF(q)-, GF(q²)- and GF(q⁴)-linear algebra.

use crate::fields::{Fe, FieldCtx};

/// Reduces `rows` in place to reduced row-echelon form, drops zero rows, and
/// returns the pivot columns.
pub fn rref(ctx: &FieldCtx, rows: &mut Vec<Vec<Fe>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = ctx.inv(rows[rank][c]).expect("pivot is nonzero");
        for x in rows[rank].iter_mut() {
            *x = ctx.mul(*x, inv);
        }
        for r in 0..rows.len() {
            if r == rank || rows[r][c].is_zero() {
                continue;
            }
            let f = rows[r][c];
            for j in c..ncols {
                let v = ctx.mul(f, rows[rank][j]);
                rows[r][j] += v;
            }
        }
        pivots.push(c);
        rank += 1;
    }
    rows.truncate(rank);
    pivots
}

pub fn rank(ctx: &FieldCtx, rows: &[Vec<Fe>]) -> usize {
    let mut m = rows.to_vec();
    rref(ctx, &mut m).len()
}

/// Basis of `{x : M x = 0}` in reduced form (one basis vector per free column,
/// with a 1 in that column).
pub fn nullspace(ctx: &FieldCtx, rows: &[Vec<Fe>], ncols: usize) -> Vec<Vec<Fe>> {
    let mut m: Vec<Vec<Fe>> = rows.to_vec();
    let pivots = if m.is_empty() { Vec::new() } else { rref(ctx, &mut m) };
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![Fe::ZERO; ncols];
        v[f] = Fe::ONE;
        for (r, &p) in pivots.iter().enumerate() {
            // char 2: x_p = -m[r][f] = m[r][f]
            v[p] = m[r][f];
        }
        basis.push(v);
    }
    let mut basis_rows = basis;
    if !basis_rows.is_empty() {
        rref(ctx, &mut basis_rows);
    }
    basis_rows
}
