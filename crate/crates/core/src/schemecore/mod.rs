//! Symmetric association schemes given by relation tables.
//!
//! A [`RelationTable`] is an n×n table of class indices 0..=d with 0 exactly on
//! the diagonal. [`verify_scheme`] checks the intersection-number axioms by
//! brute force over all pairs; [`eigen`] turns the resulting intersection
//! numbers into exact eigenmatrices and Krein parameters; [`graph`] holds the
//! class-graph checks.

pub mod eigen;
pub mod graph;

use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

/// Symmetric n×n table of class indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationTable {
    n: usize,
    d: usize,
    data: Vec<u8>,
}

impl RelationTable {
    /// Builds a table from a classifier on unordered pairs `i < j`, evaluated
    /// in parallel. The error reported is the one at the smallest pair.
    pub fn try_from_pairs<F>(n: usize, d: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<u8> + Sync,
    {
        let rows: Vec<Result<Vec<u8>>> = (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| f(i, j)).collect())
            .collect();
        let mut data = vec![0u8; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, c) in row?.into_iter().enumerate() {
                let j = i + 1 + off;
                data[i * n + j] = c;
                data[j * n + i] = c;
            }
        }
        RelationTable::from_vec(n, d, data)
    }

    /// Validates a full row-major table.
    pub fn from_vec(n: usize, d: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Table(format!("expected {} entries, got {}", n * n, data.len())));
        }
        if d > u8::MAX as usize {
            return Err(Error::Table(format!("{d} classes do not fit the table")));
        }
        for i in 0..n {
            if data[i * n + i] != 0 {
                return Err(Error::Table(format!("diagonal entry {i} is nonzero")));
            }
            for j in i + 1..n {
                let c = data[i * n + j];
                if c != data[j * n + i] {
                    return Err(Error::Table(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
                if c == 0 || c as usize > d {
                    return Err(Error::Table(format!("entry ({i},{j}) has class {c} outside 1..={d}")));
                }
            }
        }
        Ok(RelationTable { n, d, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Overwrites the class of the unordered pair {i, j}, keeping symmetry.
    pub fn set_pair(&mut self, i: usize, j: usize, c: u8) -> Result<()> {
        if i == j || c == 0 || c as usize > self.d {
            return Err(Error::Table(format!("cannot set ({i},{j}) to class {c}")));
        }
        self.data[i * self.n + j] = c;
        self.data[j * self.n + i] = c;
        Ok(())
    }

    /// Number of unordered pairs in each class; index 0 counts the diagonal.
    pub fn class_pair_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.d + 1];
        counts[0] = self.n as u64;
        for i in 0..self.n {
            for &c in &self.row(i)[i + 1..] {
                counts[c as usize] += 1;
            }
        }
        counts
    }

    /// Class sizes in row 0 (the valencies when the table is a scheme).
    pub fn row_valencies(&self, x: usize) -> Vec<u64> {
        let mut v = vec![0u64; self.d + 1];
        for &c in self.row(x) {
            v[c as usize] += 1;
        }
        v
    }

    /// Classes in 1..=d with no pair.
    pub fn empty_classes(&self) -> Vec<usize> {
        let counts = self.class_pair_counts();
        (1..=self.d).filter(|&c| counts[c] == 0).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.empty_classes().is_empty()
    }

    /// Row bitsets of class `c`.
    pub(crate) fn class_bitsets(&self, classes: &[bool]) -> Vec<Vec<u64>> {
        let words = self.n.div_ceil(64);
        (0..self.n)
            .map(|x| {
                let mut b = vec![0u64; words];
                for (y, &c) in self.row(x).iter().enumerate() {
                    if classes[c as usize] {
                        b[y / 64] |= 1 << (y % 64);
                    }
                }
                b
            })
            .collect()
    }
}

#[inline]
pub(crate) fn and_popcount(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as u64).sum()
}

/// Intersection numbers `p^k_{ij}` of a verified scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionNumbers {
    pub n: usize,
    pub d: usize,
    /// `p[k][i][j]`.
    pub p: Vec<Vec<Vec<u64>>>,
}

impl IntersectionNumbers {
    pub fn get(&self, k: usize, i: usize, j: usize) -> u64 {
        self.p[k][i][j]
    }

    /// `k_i = p^0_{ii}`.
    pub fn valencies(&self) -> Vec<u64> {
        (0..=self.d).map(|i| self.p[0][i][i]).collect()
    }

    /// The matrix `L_i` with `(L_i)_{jk} = p^k_{ij}`.
    pub fn intersection_matrix(&self, i: usize) -> Vec<Vec<u64>> {
        (0..=self.d)
            .map(|j| (0..=self.d).map(|k| self.p[k][i][j]).collect())
            .collect()
    }
}

/// Checks the association-scheme axioms by counting, for every off-diagonal
/// pair (x, y) and every (i, j), the common neighbours `|N_i(x) ∩ N_j(y)|`.
///
/// Each class k takes its reference counts from its first pair in row-major
/// order; the reported violation is the smallest pair that disagrees.
pub fn verify_scheme(t: &RelationTable) -> Result<IntersectionNumbers> {
    let (n, d) = (t.n, t.d);
    if let Some(c) = t.empty_classes().first() {
        return Err(Error::Table(format!("class {c} is empty")));
    }
    let sets: Vec<Vec<Vec<u64>>> = (0..=d)
        .map(|c| {
            let mut mask = vec![false; d + 1];
            mask[c] = true;
            t.class_bitsets(&mask)
        })
        .collect();
    let counts = |x: usize, y: usize| -> Vec<Vec<u64>> {
        (0..=d)
            .map(|i| (0..=d).map(|j| and_popcount(&sets[i][x], &sets[j][y])).collect())
            .collect()
    };

    let mut p = vec![vec![vec![0u64; d + 1]; d + 1]; d + 1];
    // Diagonal: p^0_{ij} = δ_ij k_i, constant iff every row has the same valencies.
    let val0 = t.row_valencies(0);
    for x in 1..n {
        let v = t.row_valencies(x);
        if let Some(i) = (0..=d).find(|&i| v[i] != val0[i]) {
            return Err(Error::NotAScheme { i, j: i, k: 0, x, y: x, found: v[i], expected: val0[i] });
        }
    }
    for i in 0..=d {
        p[0][i][i] = val0[i];
    }
    let mut reference = vec![None; d + 1];
    for k in 1..=d {
        'find: for x in 0..n {
            for y in x + 1..n {
                if t.get(x, y) as usize == k {
                    reference[k] = Some((x, y));
                    break 'find;
                }
            }
        }
        let (x, y) = reference[k].expect("class is nonempty");
        p[k] = counts(x, y);
    }

    let violation = (0..n)
        .into_par_iter()
        .find_map_first(|x| {
            for y in x + 1..n {
                let k = t.get(x, y) as usize;
                let c = counts(x, y);
                for i in 0..=d {
                    for j in 0..=d {
                        if c[i][j] != p[k][i][j] {
                            return Some((i, j, k, x, y, c[i][j], p[k][i][j]));
                        }
                    }
                }
            }
            None
        });
    if let Some((i, j, k, x, y, found, expected)) = violation {
        return Err(Error::NotAScheme { i, j, k, x, y, found, expected });
    }
    Ok(IntersectionNumbers { n, d, p })
}

/// Relabels classes by part: class c becomes `1 + index of the part containing c`.
pub fn fuse(t: &RelationTable, grouping: &[Vec<usize>]) -> Result<RelationTable> {
    let mut map = vec![0u8; t.d + 1];
    for (part, members) in grouping.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::Partition(format!("part {part} is empty")));
        }
        for &c in members {
            if c == 0 || c > t.d {
                return Err(Error::Partition(format!("class {c} outside 1..={}", t.d)));
            }
            if map[c] != 0 {
                return Err(Error::Partition(format!("class {c} appears twice")));
            }
            map[c] = (part + 1) as u8;
        }
    }
    if let Some(c) = (1..=t.d).find(|&c| map[c] == 0) {
        return Err(Error::Partition(format!("class {c} is not covered")));
    }
    let data = t.data.iter().map(|&c| map[c as usize]).collect();
    RelationTable::from_vec(t.n, grouping.len(), data)
}

/// Ordered positions (i, j) where `b[map(i)][map(j)]` differs from `a[i][j]`;
/// `map = None` is the identity.
pub fn diff_tables(
    a: &RelationTable,
    b: &RelationTable,
    map: Option<&[usize]>,
) -> Result<Vec<(usize, usize)>> {
    if a.n != b.n {
        return Err(Error::Table(format!("sizes differ: {} vs {}", a.n, b.n)));
    }
    let idx = |i: usize| map.map_or(i, |m| m[i]);
    if let Some(m) = map {
        let mut seen = vec![false; a.n];
        if m.len() != a.n || m.iter().any(|&x| x >= a.n || std::mem::replace(&mut seen[x], true)) {
            return Err(Error::Table("index map is not a permutation".into()));
        }
    }
    let mut out = Vec::new();
    for i in 0..a.n {
        for j in 0..a.n {
            if a.get(i, j) != b.get(idx(i), idx(j)) {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}
