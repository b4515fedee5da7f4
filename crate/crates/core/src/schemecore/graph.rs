//! Class graphs: strongly-regular checks and connectivity.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use super::{and_popcount, RelationTable};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SrgParams {
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    /// `None` when the graph is complete (no non-adjacent pairs).
    pub mu: Option<u64>,
}

impl SrgParams {
    pub fn is_complete(&self) -> bool {
        self.mu.is_none()
    }
}

fn class_mask(t: &RelationTable, merged: &[usize]) -> Result<Vec<bool>> {
    if merged.is_empty() {
        return Err(Error::Partition("empty class union".into()));
    }
    let mut mask = vec![false; t.d() + 1];
    for &c in merged {
        if c == 0 || c > t.d() {
            return Err(Error::Partition(format!("class {c} outside 1..={}", t.d())));
        }
        mask[c] = true;
    }
    Ok(mask)
}

/// 0/1 adjacency of the union of `merged` classes, as row bitsets.
pub fn adjacency(t: &RelationTable, merged: &[usize]) -> Result<Vec<Vec<u64>>> {
    Ok(t.class_bitsets(&class_mask(t, merged)?))
}

/// Verifies `A² = kI + λA + μ(J − I − A)` for the union of `merged` classes by
/// counting common neighbours of every pair.
pub fn srg_check(t: &RelationTable, merged: &[usize]) -> Result<SrgParams> {
    let adj = adjacency(t, merged)?;
    let n = t.n();
    let degree = |x: usize| adj[x].iter().map(|w| w.count_ones() as u64).sum::<u64>();
    let k = degree(0);
    if let Some(x) = (1..n).find(|&x| degree(x) != k) {
        return Err(Error::Partition(format!("graph is not regular: vertex {x} has degree {} ≠ {k}", degree(x))));
    }
    let is_adj = |x: usize, y: usize| adj[x][y / 64] >> (y % 64) & 1 == 1;
    // (adjacent?, common) for every pair x < y, collected per row.
    let rows: Vec<Vec<(bool, u64)>> = (0..n)
        .into_par_iter()
        .map(|x| (x + 1..n).map(|y| (is_adj(x, y), and_popcount(&adj[x], &adj[y]))).collect())
        .collect();
    let (mut lambda, mut mu) = (None, None);
    for (x, row) in rows.iter().enumerate() {
        for (off, &(a, c)) in row.iter().enumerate() {
            let slot = if a { &mut lambda } else { &mut mu };
            match *slot {
                None => *slot = Some(c),
                Some(v) if v != c => {
                    let y = x + 1 + off;
                    let kind = if a { "adjacent" } else { "non-adjacent" };
                    return Err(Error::Partition(format!(
                        "{kind} pair ({x}, {y}) has {c} common neighbours, expected {v}"
                    )));
                }
                _ => {}
            }
        }
    }
    Ok(SrgParams { v: n as u64, k, lambda: lambda.unwrap_or(0), mu })
}

/// Connected components of the union of `merged` classes.
pub fn components(t: &RelationTable, merged: &[usize]) -> Result<usize> {
    let mask = class_mask(t, merged)?;
    let n = t.n();
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for (y, &c) in t.row(x).iter().enumerate() {
                if mask[c as usize] && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimitivityReport {
    /// Component count of each class graph 1..=d.
    pub components: Vec<usize>,
    pub primitive: bool,
}

/// A scheme is primitive iff every nonidentity class graph is connected.
pub fn primitivity(t: &RelationTable) -> Result<PrimitivityReport> {
    let components = (1..=t.d())
        .map(|c| components(t, &[c]))
        .collect::<Result<Vec<_>>>()?;
    let primitive = components.iter().all(|&c| c == 1);
    Ok(PrimitivityReport { components, primitive })
}
